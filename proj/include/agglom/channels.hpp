#pragma once

#include <string>
#include <vector>

#include "agglom/partition.hpp"
#include "agglom/proximity.hpp"
#include "agglom/stats.hpp"
#include "agglom/tables.hpp"

namespace agglom {

enum class Scope { Global, Industry, Community };
const char* scope_name(Scope s);

// One regression EG ~ Z at some scope. Undefined estimates (too few pairs,
// zero-variance regressor) carry a reason instead of numbers.
struct ChannelEstimate {
  Scope scope = Scope::Global;
  std::string scope_id;  // "" | industry id | community label
  Channel channel = Channel::L;
  bool defined = false;
  std::string reason;
  LinearFit fit;
  std::size_t dropped_pairs = 0;  // pairs skipped because Z was undefined
};

// OLS over all unordered industry pairs.
ChannelEstimate global_regression(const ProximityMatrix& eg, const ProximityMatrix& z);

// One estimate per industry i over the pairs (i, j), j != i.
std::vector<ChannelEstimate> industry_regression(const ProximityMatrix& eg,
                                                 const ProximityMatrix& z,
                                                 const IndustryCatalog& catalog);

// One estimate per community over within-community pairs. Communities are
// given as catalog index lists so partitions restricted to a sub-network can
// be scored against full-catalog proximity matrices.
std::vector<ChannelEstimate> community_regression(
    const ProximityMatrix& eg, const ProximityMatrix& z,
    const std::vector<std::vector<std::size_t>>& communities);

std::vector<ChannelEstimate> community_regression(const ProximityMatrix& eg,
                                                  const ProximityMatrix& z,
                                                  const Partition& p);

// Mean years of education per community (NaN when a member industry has no
// value). The employment-weighted variant sits behind a flag.
std::vector<double> community_mean_education(
    const EducationTable& edu, const std::vector<std::vector<std::size_t>>& communities,
    bool employment_weighted = false, const EmploymentTable* emp = nullptr);

// ---- pooled education regressions (beta^c ~ ed_c) ----

enum class WeightScheme { OLS, WLSI, WLSII };
enum class Zeroing { None, At10pct, At5pct };
enum class EduChannel { L, IO, Diff };

const char* weight_scheme_name(WeightScheme s);
const char* zeroing_name(Zeroing z);
const char* edu_channel_name(EduChannel c);

// One pooled observation: a community in some partition with its channel
// estimates, mean education and size.
struct CommunityChannelRow {
  std::string partition_id;
  std::uint32_t community = 0;
  std::size_t size = 0;
  bool defined_l = false, defined_io = false;
  double beta_l = 0.0, p_l = 1.0;
  double beta_io = 0.0, p_io = 1.0;
  double ed = 0.0;
  bool has_ed = false;
};

struct EducationFit {
  WeightScheme scheme = WeightScheme::OLS;
  Zeroing zeroing = Zeroing::None;
  EduChannel channel = EduChannel::L;
  LinearFit fit;
};

// Pools communities across partitions and fits beta_Z^c (or the difference
// beta_L^c - beta_IO^c) against ed_c. Weights: OLS = 1; WLSI = 1 / (community
// count of its partition); WLSII proportional to community size, renormalized
// so every partition carries the same total weight. Zeroing replaces channel
// estimates insignificant at the stated level with 0 before fitting.
// Throws Error(Degenerate) on zero-variance education or fewer than 3 usable
// communities.
EducationFit education_regression(const std::vector<CommunityChannelRow>& rows,
                                  WeightScheme scheme, Zeroing zeroing, EduChannel channel);

// Per-partition fits of the same relationship (the pale lines of the
// partition-by-partition view); undefined fits are skipped.
struct PartitionEducationFit {
  std::string partition_id;
  EduChannel channel = EduChannel::L;
  bool defined = false;
  std::string reason;
  LinearFit fit;
};

std::vector<PartitionEducationFit> per_partition_education_fits(
    const std::vector<CommunityChannelRow>& rows);

// Dependent values after zeroing, in row order restricted to usable rows;
// exposed for the zeroing-monotonicity checks.
std::vector<std::size_t> zeroed_row_indices(const std::vector<CommunityChannelRow>& rows,
                                            Zeroing zeroing, EduChannel channel);

}  // namespace agglom
