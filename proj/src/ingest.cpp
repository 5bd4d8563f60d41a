#include "agglom/ingest.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "agglom/csv.hpp"
#include "agglom/error.hpp"

namespace agglom {

namespace {

using std::filesystem::path;

std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index,
                   const std::string& id, const char* what, const path& file,
                   std::size_t line) {
  auto it = index.find(id);
  if (it == index.end())
    fail_input(file.string() + ": unknown " + what + " '" + id + "' at line " +
               std::to_string(line) + " (absent from catalog)");
  return it->second;
}

void check_nonnegative(double v, const path& file, std::size_t line) {
  if (v < 0.0)
    fail_input(file.string() + ": negative value at line " + std::to_string(line));
  if (!std::isfinite(v))
    fail_input(file.string() + ": non-finite value at line " + std::to_string(line));
}

// Fills a dense matrix from (row_id, col_id, value) triples, rejecting
// duplicates and negatives. Missing combinations stay 0.
Matrix fill_long_form(const std::vector<csv::Row>& rows, const path& file,
                      const std::unordered_map<std::string, std::size_t>& row_index,
                      const std::unordered_map<std::string, std::size_t>& col_index,
                      const char* row_what, const char* col_what, std::size_t nr,
                      std::size_t nc) {
  Matrix m(nr, nc);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& r : rows) {
    std::size_t i = lookup(row_index, r.fields[0], row_what, file, r.line);
    std::size_t j = lookup(col_index, r.fields[1], col_what, file, r.line);
    double v = csv::parse_number(r.fields[2], file, r.line);
    check_nonnegative(v, file, r.line);
    if (!seen.insert({i, j}).second)
      fail_input(file.string() + ": duplicate key (" + r.fields[0] + "," + r.fields[1] +
                 ") at line " + std::to_string(r.line));
    m(i, j) = v;
  }
  return m;
}

}  // namespace

void IndustryCatalog::rebuild_indices() {
  industry_index.clear();
  region_index.clear();
  occupation_index.clear();
  for (std::size_t i = 0; i < industries.size(); ++i) industry_index[industries[i].id] = i;
  for (std::size_t i = 0; i < regions.size(); ++i) region_index[regions[i]] = i;
  for (std::size_t i = 0; i < occupations.size(); ++i) occupation_index[occupations[i]] = i;
}

TableSet parse_tables(const TablePaths& paths) {
  TableSet ts;

  auto emp_rows = csv::read(paths.employment, {"industry_id", "region_id", "employment"});
  auto occ_rows = csv::read(paths.occupations, {"industry_id", "occupation_id", "employment"});
  auto flow_rows = csv::read(paths.io_table, {"seller_id", "buyer_id", "flow"});

  // Catalog: industries and regions from employment, occupations from the
  // occupation table; lexicographic order fixes all matrix indices.
  std::set<std::string> ind_ids, region_ids, occ_ids;
  for (const auto& r : emp_rows) {
    ind_ids.insert(r.fields[0]);
    region_ids.insert(r.fields[1]);
  }
  for (const auto& r : occ_rows) occ_ids.insert(r.fields[1]);

  for (const auto& id : ind_ids) ts.catalog.industries.push_back({id, id});
  ts.catalog.regions.assign(region_ids.begin(), region_ids.end());
  ts.catalog.occupations.assign(occ_ids.begin(), occ_ids.end());
  ts.catalog.rebuild_indices();

  const std::size_t n = ts.catalog.n_industries();
  const std::size_t nr = ts.catalog.n_regions();
  const std::size_t no = ts.catalog.n_occupations();

  ts.employment.values =
      fill_long_form(emp_rows, paths.employment, ts.catalog.industry_index,
                     ts.catalog.region_index, "industry", "region", n, nr);
  // industries need positive totals (their share vectors are undefined
  // otherwise); a region may end up all-zero after sparse densification
  for (std::size_t i = 0; i < n; ++i) {
    double row_total = 0.0;
    for (std::size_t r = 0; r < nr; ++r) row_total += ts.employment.values(i, r);
    if (row_total <= 0.0)
      fail_input(paths.employment.string() + ": industry '" + ts.catalog.industry_id(i) +
                 "' has zero total employment");
  }

  ts.occupations.values =
      fill_long_form(occ_rows, paths.occupations, ts.catalog.industry_index,
                     ts.catalog.occupation_index, "industry", "occupation", n, no);

  ts.flows.values = fill_long_form(flow_rows, paths.io_table, ts.catalog.industry_index,
                                   ts.catalog.industry_index, "industry", "industry", n, n);

  if (!paths.patents.empty()) {
    auto rows = csv::read(paths.patents, {"citing_industry", "cited_industry", "citations"});
    CitationTable ct;
    ct.values = fill_long_form(rows, paths.patents, ts.catalog.industry_index,
                               ts.catalog.industry_index, "industry", "industry", n, n);
    for (const auto& r : rows) {
      double v = csv::parse_number(r.fields[2], paths.patents, r.line);
      if (v != std::floor(v))
        fail_input(paths.patents.string() + ": non-integer citation count at line " +
                   std::to_string(r.line));
    }
    ts.citations = std::move(ct);
  }

  if (!paths.education.empty()) {
    auto rows = csv::read(paths.education, {"industry_id", "mean_years_education"});
    EducationTable et;
    et.years.assign(n, std::numeric_limits<double>::quiet_NaN());
    std::set<std::size_t> seen;
    for (const auto& r : rows) {
      std::size_t i = lookup(ts.catalog.industry_index, r.fields[0], "industry",
                             paths.education, r.line);
      double v = csv::parse_number(r.fields[1], paths.education, r.line);
      if (v <= 0.0)
        fail_input(paths.education.string() + ": non-positive education value at line " +
                   std::to_string(r.line));
      if (!seen.insert(i).second)
        fail_input(paths.education.string() + ": duplicate key (" + r.fields[0] +
                   ") at line " + std::to_string(r.line));
      et.years[i] = v;
    }
    ts.education = std::move(et);
  }

  if (!paths.sectors.empty()) {
    auto rows = csv::read(paths.sectors, {"industry_id", "sector_id"});
    SectorMap sm;
    sm.sector_of.assign(n, "");
    std::set<std::size_t> seen;
    for (const auto& r : rows) {
      std::size_t i =
          lookup(ts.catalog.industry_index, r.fields[0], "industry", paths.sectors, r.line);
      if (!seen.insert(i).second)
        fail_input(paths.sectors.string() + ": duplicate key (" + r.fields[0] + ") at line " +
                   std::to_string(r.line));
      sm.sector_of[i] = r.fields[1];
    }
    for (std::size_t i = 0; i < n; ++i)
      if (sm.sector_of[i].empty())
        fail_input(paths.sectors.string() + ": industry '" + ts.catalog.industry_id(i) +
                   "' has no sector (map must be total)");
    ts.sectors = std::move(sm);
  }

  return ts;
}

namespace {

void write_triples(const path& file, const std::string& header, const IndustryCatalog& cat,
                   const Matrix& m,
                   const std::vector<std::string>& col_ids) {
  std::ostringstream out;
  out << header << "\n";
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (m(i, j) != 0.0)
        out << cat.industry_id(i) << "," << col_ids[j] << "," << csv::format_number(m(i, j))
            << "\n";
  csv::write_file(file, out.str());
}

std::vector<std::string> industry_ids(const IndustryCatalog& cat) {
  std::vector<std::string> ids;
  ids.reserve(cat.n_industries());
  for (const auto& ind : cat.industries) ids.push_back(ind.id);
  return ids;
}

}  // namespace

void write_employment(const path& file, const IndustryCatalog& cat, const EmploymentTable& t) {
  write_triples(file, "industry_id,region_id,employment", cat, t.values, cat.regions);
}

void write_occupations(const path& file, const IndustryCatalog& cat, const OccupationTable& t) {
  write_triples(file, "industry_id,occupation_id,employment", cat, t.values, cat.occupations);
}

void write_flows(const path& file, const IndustryCatalog& cat, const FlowTable& t) {
  write_triples(file, "seller_id,buyer_id,flow", cat, t.values, industry_ids(cat));
}

void write_citations(const path& file, const IndustryCatalog& cat, const CitationTable& t) {
  write_triples(file, "citing_industry,cited_industry,citations", cat, t.values,
                industry_ids(cat));
}

void write_education(const path& file, const IndustryCatalog& cat, const EducationTable& t) {
  std::ostringstream out;
  out << "industry_id,mean_years_education\n";
  for (std::size_t i = 0; i < cat.n_industries(); ++i)
    if (t.has(i)) out << cat.industry_id(i) << "," << csv::format_number(t.years[i]) << "\n";
  csv::write_file(file, out.str());
}

void write_sectors(const path& file, const IndustryCatalog& cat, const SectorMap& t) {
  std::ostringstream out;
  out << "industry_id,sector_id\n";
  for (std::size_t i = 0; i < cat.n_industries(); ++i)
    out << cat.industry_id(i) << "," << t.sector_of[i] << "\n";
  csv::write_file(file, out.str());
}

}  // namespace agglom
