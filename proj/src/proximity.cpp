#include "agglom/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "agglom/csv.hpp"
#include "agglom/error.hpp"
#include "agglom/kernels.hpp"

#include <json.hpp>

namespace agglom {

const char* channel_name(Channel c) {
  switch (c) {
    case Channel::EG:
      return "EG";
    case Channel::L:
      return "L";
    case Channel::IO:
      return "IO";
    case Channel::K:
      return "K";
  }
  return "?";
}

ProximityMatrix eg_index(const EmploymentTable& emp, RegionShareMode mode) {
  const std::size_t n = emp.values.rows();
  const std::size_t nr = emp.values.cols();
  if (nr < 2) fail_input("co-agglomeration index needs at least 2 regions");

  std::vector<double> row_total(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    row_total[i] = kernels::vsum(emp.values.row(i), nr);
    if (row_total[i] <= 0.0)
      fail_input("industry at index " + std::to_string(i) + " has zero total employment");
    total += row_total[i];
  }

  // shares s_ir, and the region reference x_r
  Matrix shares(n, nr);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < nr; ++r) shares(i, r) = emp.values(i, r) / row_total[i];

  std::vector<double> x(nr, 0.0);
  if (mode == RegionShareMode::TotalEmployment) {
    for (std::size_t r = 0; r < nr; ++r) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += emp.values(i, r);
      x[r] = col / total;
    }
  } else {
    for (std::size_t r = 0; r < nr; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += shares(i, r);
      x[r] = s / static_cast<double>(n);
    }
  }

  double denom = 1.0;
  for (std::size_t r = 0; r < nr; ++r) denom -= x[r] * x[r];
  if (denom <= 0.0)
    fail_degenerate("co-agglomeration denominator 1 - sum(x_r^2) is not positive "
                    "(employment concentrated in a single region)");

  Matrix centered(n, nr);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < nr; ++r) centered(i, r) = shares(i, r) - x[r];

  ProximityMatrix out;
  out.channel = Channel::EG;
  out.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = kernels::vdot(centered.row(i), centered.row(j), nr) / denom;
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  return out;
}

ProximityMatrix labour_pooling(const OccupationTable& occ) {
  const std::size_t n = occ.values.rows();
  const std::size_t no = occ.values.cols();
  if (no < 2) fail_input("labour pooling needs at least 2 occupations");

  Matrix centered(n, no);
  std::vector<double> norm(n, 0.0);
  ProximityMatrix out;
  out.channel = Channel::L;
  out.values = Matrix(n, n, std::numeric_limits<double>::quiet_NaN());

  for (std::size_t i = 0; i < n; ++i) {
    double mean = kernels::vsum(occ.values.row(i), no) / static_cast<double>(no);
    for (std::size_t o = 0; o < no; ++o) centered(i, o) = occ.values(i, o) - mean;
    norm[i] = std::sqrt(kernels::vdot(centered.row(i), centered.row(i), no));
    if (norm[i] == 0.0) out.undefined_industries.push_back(i);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (norm[i] == 0.0) continue;
    out.values(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (norm[j] == 0.0) continue;
      double v = kernels::vdot(centered.row(i), centered.row(j), no) / (norm[i] * norm[j]);
      v = std::clamp(v, -1.0, 1.0);
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  }
  return out;
}

namespace {

// Shared form of the trade/citation proximity: for every unordered pair, the
// largest of the four ratios that normalize the two directed intensities by
// the buyer's column sum and the seller's row sum. 0/0 counts as 0.
ProximityMatrix max_ratio_proximity(const Matrix& raw, Channel channel) {
  const std::size_t n = raw.rows();
  std::vector<double> row_sum(n, 0.0), col_sum(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;  // diagonal ignored
      row_sum[i] += raw(i, j);
      col_sum[j] += raw(i, j);
    }

  auto ratio = [](double num, double den) { return num > 0.0 ? num / den : 0.0; };

  ProximityMatrix out;
  out.channel = channel;
  out.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      if (i == j) {
        out.values(i, i) = 0.0;
        continue;
      }
      double fij = raw(i, j), fji = raw(j, i);
      double v = std::max({ratio(fij, col_sum[j]), ratio(fij, row_sum[i]),
                           ratio(fji, col_sum[i]), ratio(fji, row_sum[j])});
      out.values(i, j) = v;
      out.values(j, i) = v;
    }
  return out;
}

}  // namespace

ProximityMatrix io_proximity(const FlowTable& flows) {
  return max_ratio_proximity(flows.values, Channel::IO);
}

ProximityMatrix knowledge_proximity(const CitationTable& cites) {
  return max_ratio_proximity(cites.values, Channel::K);
}

void write_proximity(const std::filesystem::path& csv_path,
                     const std::filesystem::path& sidecar_json_path,
                     const IndustryCatalog& catalog, const ProximityMatrix& m) {
  const std::size_t n = m.n();
  std::ostringstream out;
  out << "industry_i,industry_j,value\n";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!m.defined(i, j)) continue;
      out << catalog.industry_id(i) << "," << catalog.industry_id(j) << ","
          << csv::format_number(m.values(i, j)) << "\n";
    }
  csv::write_file(csv_path, out.str());

  nlohmann::json sidecar;
  sidecar["channel"] = channel_name(m.channel);
  sidecar["diagonal"] = "excluded-from-analysis";
  auto undefined = nlohmann::json::array();
  for (auto i : m.undefined_industries) undefined.push_back(catalog.industry_id(i));
  sidecar["undefined_industries"] = undefined;
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!m.defined(i, j)) ++dropped;
  sidecar["dropped_pairs"] = dropped;
  csv::write_file(sidecar_json_path, sidecar.dump(2) + "\n");
}

ProximityMatrix read_proximity(const std::filesystem::path& csv_path, Channel channel,
                               const IndustryCatalog& catalog) {
  auto rows = csv::read(csv_path, {"industry_i", "industry_j", "value"});
  const std::size_t n = catalog.n_industries();
  ProximityMatrix m;
  m.channel = channel;
  double fill = channel == Channel::L ? std::numeric_limits<double>::quiet_NaN() : 0.0;
  m.values = Matrix(n, n, fill);
  for (std::size_t i = 0; i < n; ++i) m.values(i, i) = channel == Channel::L ? 1.0 : 0.0;
  for (const auto& r : rows) {
    auto it_i = catalog.industry_index.find(r.fields[0]);
    auto it_j = catalog.industry_index.find(r.fields[1]);
    if (it_i == catalog.industry_index.end() || it_j == catalog.industry_index.end())
      fail_input(csv_path.string() + ": unknown industry at line " + std::to_string(r.line));
    double v = csv::parse_number(r.fields[2], csv_path, r.line);
    m.values(it_i->second, it_j->second) = v;
    m.values(it_j->second, it_i->second) = v;
  }
  return m;
}

IndustryCatalog catalog_from_pair_csv(const std::filesystem::path& csv_path,
                                      const std::vector<std::string>& header) {
  auto rows = csv::read(csv_path, header);
  std::set<std::string> ids;
  for (const auto& r : rows) {
    ids.insert(r.fields[0]);
    ids.insert(r.fields[1]);
  }
  IndustryCatalog cat;
  for (const auto& id : ids) cat.industries.push_back({id, id});
  cat.rebuild_indices();
  return cat;
}

}  // namespace agglom
