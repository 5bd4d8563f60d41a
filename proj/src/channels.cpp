#include "agglom/channels.hpp"

#include <cmath>
#include <limits>

#include "agglom/error.hpp"

namespace agglom {

const char* scope_name(Scope s) {
  switch (s) {
    case Scope::Global:
      return "global";
    case Scope::Industry:
      return "industry";
    case Scope::Community:
      return "community";
  }
  return "?";
}

const char* weight_scheme_name(WeightScheme s) {
  switch (s) {
    case WeightScheme::OLS:
      return "ols";
    case WeightScheme::WLSI:
      return "wlsi";
    case WeightScheme::WLSII:
      return "wlsii";
  }
  return "?";
}

const char* zeroing_name(Zeroing z) {
  switch (z) {
    case Zeroing::None:
      return "none";
    case Zeroing::At10pct:
      return "at10pct";
    case Zeroing::At5pct:
      return "at5pct";
  }
  return "?";
}

const char* edu_channel_name(EduChannel c) {
  switch (c) {
    case EduChannel::L:
      return "L";
    case EduChannel::IO:
      return "IO";
    case EduChannel::Diff:
      return "L-IO";
  }
  return "?";
}

namespace {

void check_matched(const ProximityMatrix& eg, const ProximityMatrix& z) {
  if (eg.n() != z.n()) fail_input("channel regression: proximity matrices differ in size");
}

// Fits EG ~ Z over the given pair sample; marks the estimate undefined
// instead of throwing when the sample is degenerate.
ChannelEstimate fit_pairs(const std::vector<double>& zs, const std::vector<double>& egs,
                          std::size_t dropped) {
  ChannelEstimate est;
  est.dropped_pairs = dropped;
  if (zs.size() < 3) {
    est.defined = false;
    est.reason = "fewer than 3 usable pairs";
    est.fit.n = zs.size();
    return est;
  }
  try {
    est.fit = ols_fit(zs, egs);
    est.defined = true;
  } catch (const Error& e) {
    est.defined = false;
    est.reason = e.what();
    est.fit.n = zs.size();
  }
  return est;
}

}  // namespace

ChannelEstimate global_regression(const ProximityMatrix& eg, const ProximityMatrix& z) {
  check_matched(eg, z);
  const std::size_t n = eg.n();
  std::vector<double> zs, egs;
  zs.reserve(n * (n - 1) / 2);
  egs.reserve(n * (n - 1) / 2);
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!eg.defined(i, j) || !z.defined(i, j)) {
        ++dropped;
        continue;
      }
      zs.push_back(z.values(i, j));
      egs.push_back(eg.values(i, j));
    }
  ChannelEstimate est = fit_pairs(zs, egs, dropped);
  est.scope = Scope::Global;
  est.channel = z.channel;
  return est;
}

std::vector<ChannelEstimate> industry_regression(const ProximityMatrix& eg,
                                                 const ProximityMatrix& z,
                                                 const IndustryCatalog& catalog) {
  check_matched(eg, z);
  const std::size_t n = eg.n();
  if (catalog.n_industries() != n) fail_input("industry regression: catalog mismatch");
  if (n < 4) fail_input("industry regression needs at least 4 industries");

  std::vector<ChannelEstimate> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> zs, egs;
    zs.reserve(n - 1);
    egs.reserve(n - 1);
    std::size_t dropped = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (!eg.defined(i, j) || !z.defined(i, j)) {
        ++dropped;
        continue;
      }
      zs.push_back(z.values(i, j));
      egs.push_back(eg.values(i, j));
    }
    ChannelEstimate est = fit_pairs(zs, egs, dropped);
    est.scope = Scope::Industry;
    est.scope_id = catalog.industry_id(i);
    est.channel = z.channel;
    out.push_back(std::move(est));
  }
  return out;
}

std::vector<ChannelEstimate> community_regression(
    const ProximityMatrix& eg, const ProximityMatrix& z,
    const std::vector<std::vector<std::size_t>>& communities) {
  check_matched(eg, z);
  std::vector<ChannelEstimate> out;
  out.reserve(communities.size());
  for (std::size_t c = 0; c < communities.size(); ++c) {
    const auto& members = communities[c];
    std::vector<double> zs, egs;
    std::size_t dropped = 0;
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        std::size_t i = members[a], j = members[b];
        if (!eg.defined(i, j) || !z.defined(i, j)) {
          ++dropped;
          continue;
        }
        zs.push_back(z.values(i, j));
        egs.push_back(eg.values(i, j));
      }
    ChannelEstimate est = fit_pairs(zs, egs, dropped);
    est.scope = Scope::Community;
    est.scope_id = "c" + std::to_string(c);
    est.channel = z.channel;
    out.push_back(std::move(est));
  }
  return out;
}

std::vector<ChannelEstimate> community_regression(const ProximityMatrix& eg,
                                                  const ProximityMatrix& z,
                                                  const Partition& p) {
  if (p.size() != eg.n()) fail_input("community regression: partition does not cover catalog");
  return community_regression(eg, z, p.communities());
}

std::vector<double> community_mean_education(
    const EducationTable& edu, const std::vector<std::vector<std::size_t>>& communities,
    bool employment_weighted, const EmploymentTable* emp) {
  if (employment_weighted && emp == nullptr)
    fail_input("employment-weighted education means need the employment table");
  std::vector<double> out;
  out.reserve(communities.size());
  for (const auto& members : communities) {
    double num = 0.0, den = 0.0;
    bool ok = !members.empty();
    for (std::size_t i : members) {
      if (!edu.has(i)) {
        ok = false;
        break;
      }
      double w = 1.0;
      if (employment_weighted) {
        w = 0.0;
        for (std::size_t r = 0; r < emp->values.cols(); ++r) w += emp->values(i, r);
      }
      num += w * edu.years[i];
      den += w;
    }
    out.push_back(ok && den > 0.0 ? num / den
                                  : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

namespace {

bool row_usable(const CommunityChannelRow& row, EduChannel channel) {
  if (!row.has_ed) return false;
  switch (channel) {
    case EduChannel::L:
      return row.defined_l;
    case EduChannel::IO:
      return row.defined_io;
    case EduChannel::Diff:
      return row.defined_l && row.defined_io;
  }
  return false;
}

double significance_level(Zeroing z) {
  switch (z) {
    case Zeroing::None:
      return 0.0;  // keep everything
    case Zeroing::At10pct:
      return 0.10;
    case Zeroing::At5pct:
      return 0.05;
  }
  return 0.0;
}

double zeroed_value(double beta, double p, Zeroing z) {
  double level = significance_level(z);
  if (level == 0.0) return beta;
  return p < level ? beta : 0.0;  // insignificant at the level -> zero
}

double dependent_value(const CommunityChannelRow& row, Zeroing zeroing, EduChannel channel) {
  switch (channel) {
    case EduChannel::L:
      return zeroed_value(row.beta_l, row.p_l, zeroing);
    case EduChannel::IO:
      return zeroed_value(row.beta_io, row.p_io, zeroing);
    case EduChannel::Diff:
      return zeroed_value(row.beta_l, row.p_l, zeroing) -
             zeroed_value(row.beta_io, row.p_io, zeroing);
  }
  return 0.0;
}

struct PooledSample {
  std::vector<double> ed, y, w;
};

PooledSample pooled_sample(const std::vector<CommunityChannelRow>& rows, WeightScheme scheme,
                           Zeroing zeroing, EduChannel channel) {
  // partition totals over usable rows, in first-appearance order
  std::vector<std::string> partition_order;
  std::vector<std::size_t> count;
  std::vector<double> size_total;
  auto partition_slot = [&](const std::string& id) {
    for (std::size_t s = 0; s < partition_order.size(); ++s)
      if (partition_order[s] == id) return s;
    partition_order.push_back(id);
    count.push_back(0);
    size_total.push_back(0.0);
    return partition_order.size() - 1;
  };
  for (const auto& row : rows)
    if (row_usable(row, channel)) {
      std::size_t s = partition_slot(row.partition_id);
      ++count[s];
      size_total[s] += static_cast<double>(row.size);
    }

  PooledSample out;
  for (const auto& row : rows) {
    if (!row_usable(row, channel)) continue;
    std::size_t s = partition_slot(row.partition_id);
    double w = 1.0;
    if (scheme == WeightScheme::WLSI) w = 1.0 / static_cast<double>(count[s]);
    if (scheme == WeightScheme::WLSII) w = static_cast<double>(row.size) / size_total[s];
    out.ed.push_back(row.ed);
    out.y.push_back(dependent_value(row, zeroing, channel));
    out.w.push_back(w);
  }
  return out;
}

}  // namespace

EducationFit education_regression(const std::vector<CommunityChannelRow>& rows,
                                  WeightScheme scheme, Zeroing zeroing, EduChannel channel) {
  PooledSample sample = pooled_sample(rows, scheme, zeroing, channel);
  if (sample.ed.size() < 3)
    fail_degenerate("education regression: fewer than 3 usable communities pooled");
  EducationFit out;
  out.scheme = scheme;
  out.zeroing = zeroing;
  out.channel = channel;
  out.fit = wls_fit(sample.ed, sample.y, sample.w);
  return out;
}

std::vector<PartitionEducationFit> per_partition_education_fits(
    const std::vector<CommunityChannelRow>& rows) {
  std::vector<std::string> partitions;
  for (const auto& row : rows) {
    bool seen = false;
    for (const auto& p : partitions) seen = seen || p == row.partition_id;
    if (!seen) partitions.push_back(row.partition_id);
  }

  std::vector<PartitionEducationFit> out;
  for (const auto& pid : partitions) {
    for (EduChannel channel : {EduChannel::L, EduChannel::IO, EduChannel::Diff}) {
      PartitionEducationFit pf;
      pf.partition_id = pid;
      pf.channel = channel;
      // community-size weights within one partition
      std::vector<double> ed, y, w;
      for (const auto& row : rows) {
        if (row.partition_id != pid || !row_usable(row, channel)) continue;
        ed.push_back(row.ed);
        y.push_back(dependent_value(row, Zeroing::None, channel));
        w.push_back(static_cast<double>(row.size));
      }
      if (ed.size() < 3) {
        pf.defined = false;
        pf.reason = "fewer than 3 usable communities";
        out.push_back(std::move(pf));
        continue;
      }
      try {
        pf.fit = wls_fit(ed, y, w);
        pf.defined = true;
      } catch (const Error& e) {
        pf.defined = false;
        pf.reason = e.what();
      }
      out.push_back(std::move(pf));
    }
  }
  return out;
}

std::vector<std::size_t> zeroed_row_indices(const std::vector<CommunityChannelRow>& rows,
                                            Zeroing zeroing, EduChannel channel) {
  std::vector<std::size_t> out;
  double level = significance_level(zeroing);
  if (level == 0.0) return out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (!row_usable(row, channel)) continue;
    bool zeroed = false;
    if (channel == EduChannel::L || channel == EduChannel::Diff)
      zeroed = zeroed || row.p_l >= level;
    if (channel == EduChannel::IO || channel == EduChannel::Diff)
      zeroed = zeroed || row.p_io >= level;
    if (zeroed) out.push_back(i);
  }
  return out;
}

}  // namespace agglom
