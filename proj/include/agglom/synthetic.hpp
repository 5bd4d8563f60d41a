#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "agglom/ingest.hpp"
#include "agglom/partition.hpp"

namespace agglom {

// Which cost-sharing channel dominates a planted cluster.
enum class Regime { Labour, IO };

const char* regime_name(Regime r);
std::optional<Regime> parse_regime(const std::string& s);

// Parameters of the synthetic economy. Every industry's regional employment
// mixes a common metro-size baseline with an industry-specific deviation;
// deviations follow the cluster's latent profile over its home regions (to a
// per-industry loyalty degree) plus an idiosyncratic scatter, and a fixed
// count of gateway industries per cluster redirects part of its deviation to
// shared hub cities. Co-agglomeration is therefore strong within clusters and
// near zero across them, with the gateway pairs supplying the weak positive
// bridges that keep the clipped network in one component. The same loyalty
// scales the cluster's planted channel, so within-cluster channel proximity
// co-varies with within-cluster co-agglomeration:
//   - labour regime: occupation rows mix a shared prototype with noise,
//   - io regime: within-cluster flows scale with the loyalties of both ends.
struct SyntheticSpec {
  std::vector<std::size_t> cluster_sizes;
  std::vector<Regime> regimes;
  std::optional<std::size_t> n_industries;  // cross-checked against cluster_sizes when set

  std::size_t n_regions = 16;
  std::size_t n_occupations = 30;

  double regional_concentration = 2.0;  // log-normal sigma of cluster profiles
  double own_concentration = 0.8;       // sigma of the idiosyncratic global scatter
  double deviation = 0.4;               // industry-specific share of the location pattern
  double hub_weight = 0.3;              // gateway industries' deviation share on shared hubs
  double gateway_fraction = 0.2;        // share of industries acting as hub gateways
  double loyalty_min = 0.3;            // per-industry mixing weight range
  double loyalty_max = 0.95;
  double occupation_mix = 1.0;          // scales loyalty for occupation rows
  double occupation_base_weight = 0.55; // common-hiring share of occupation rows
  double flow_scale = 70.0;             // within-cluster flow level (io regime)
  double flow_noise = 1.0;              // background flow level
  double flow_spread = 1.4;             // log-normal sigma of background flows

  double edu_labour_mean = 15.5;  // planted education levels (years)
  double edu_other_mean = 12.0;
  double edu_sd = 0.4;

  // Margin asserted by generator tests: mean within-cluster channel proximity
  // of a planted cluster must exceed the global mean by at least this much.
  double planted_margin = 0.05;

  std::uint64_t seed = 1;
};

struct SyntheticEconomy {
  TableSet tables;
  Partition ground_truth;
  std::vector<Regime> regimes;
};

// Deterministic given spec.seed: the same spec always yields identical
// tables.
SyntheticEconomy generate_synthetic_economy(const SyntheticSpec& spec);

}  // namespace agglom
