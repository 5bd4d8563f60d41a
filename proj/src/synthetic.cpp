#include "agglom/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "agglom/error.hpp"
#include "agglom/rng.hpp"

namespace agglom {

const char* regime_name(Regime r) { return r == Regime::Labour ? "labour" : "io"; }

std::optional<Regime> parse_regime(const std::string& s) {
  if (s == "labour" || s == "labor" || s == "l") return Regime::Labour;
  if (s == "io" || s == "value-chain") return Regime::IO;
  return std::nullopt;
}

namespace {

std::string padded_id(char prefix, std::size_t i, std::size_t count) {
  int width = 2;
  for (std::size_t c = 100; c < count; c *= 10) ++width;
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%0*zu", prefix, width, i);
  return buf;
}

}  // namespace

SyntheticEconomy generate_synthetic_economy(const SyntheticSpec& spec) {
  if (spec.cluster_sizes.empty()) fail_input("synthetic spec: no clusters given");
  if (spec.cluster_sizes.size() != spec.regimes.size())
    fail_input("synthetic spec: cluster count and regime count differ");
  const std::size_t n =
      std::accumulate(spec.cluster_sizes.begin(), spec.cluster_sizes.end(), std::size_t{0});
  if (spec.n_industries && *spec.n_industries != n)
    fail_input("synthetic spec: cluster sizes sum to " + std::to_string(n) +
               " but n_industries = " + std::to_string(*spec.n_industries));
  for (std::size_t s : spec.cluster_sizes)
    if (s == 0) fail_input("synthetic spec: empty cluster");
  if (spec.n_regions < 2) fail_input("synthetic spec: need at least 2 regions");
  if (spec.n_occupations < 3) fail_input("synthetic spec: need at least 3 occupations");

  const std::size_t nr = spec.n_regions;
  const std::size_t no = spec.n_occupations;
  const std::size_t nc = spec.cluster_sizes.size();

  Rng rng(spec.seed);

  SyntheticEconomy eco;
  auto& cat = eco.tables.catalog;
  for (std::size_t i = 0; i < n; ++i) {
    auto id = padded_id('I', i, n);
    cat.industries.push_back({id, id});
  }
  for (std::size_t r = 0; r < nr; ++r) cat.regions.push_back(padded_id('R', r, nr));
  for (std::size_t o = 0; o < no; ++o) cat.occupations.push_back(padded_id('O', o, no));
  cat.rebuild_indices();

  std::vector<std::uint32_t> labels(n);
  std::vector<Regime> regime_of(n);
  {
    std::size_t node = 0;
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t s = 0; s < spec.cluster_sizes[c]; ++s, ++node) {
        labels[node] = static_cast<std::uint32_t>(c);
        regime_of[node] = spec.regimes[c];
      }
  }
  eco.ground_truth = Partition::from_labels(labels);
  eco.regimes = spec.regimes;

  // Employment: common metro-size baseline + industry deviation. The
  // deviation splits into a home-block component following the cluster
  // profile (scaled by loyalty) and an idiosyncratic scatter over all
  // regions. Against the aggregate pattern this leaves within-cluster pairs
  // strongly co-agglomerated while cross-cluster pairs hover around zero,
  // occasionally positive where scatters collide; those collisions are the
  // weak bridges that keep the clipped network in one component.
  if (nr < 2 * nc)
    fail_input("synthetic spec: need at least " + std::to_string(2 * nc) +
               " regions for " + std::to_string(nc) + " clusters (got " +
               std::to_string(nr) + ")");
  const std::size_t block = nr / nc;

  std::vector<double> metro_base(nr);
  double base_total = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    metro_base[r] = std::exp(1.0 * rng.normal());
    base_total += metro_base[r];
  }

  // shared hub cities: a fixed slice of every cluster profile, so loyal
  // industries from different clusters still co-locate somewhere
  std::vector<double> hub(nr);
  double hub_total = 0.0;
  for (std::size_t r = 0; r < nr; ++r) {
    hub[r] = std::exp(1.4 * rng.normal());
    hub_total += hub[r];
  }

  Matrix regional_latent(nc, block);
  Matrix occupation_prototype(nc, no);
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t b = 0; b < block; ++b)
      regional_latent(c, b) = std::exp(spec.regional_concentration * rng.normal());
    for (std::size_t o = 0; o < no; ++o)
      occupation_prototype(c, o) = std::exp(1.0 * rng.normal());
  }

  std::vector<double> loyalty(n);
  for (std::size_t i = 0; i < n; ++i)
    loyalty[i] = rng.uniform(spec.loyalty_min, spec.loyalty_max);

  // a fixed count of gateway industries per cluster puts a large slice of
  // its deviation on the shared hubs; gateway pairs from different clusters
  // are the bridges that keep the clipped network in one component
  std::vector<double> hub_affinity(n);
  {
    auto clusters = eco.ground_truth.communities();
    for (std::size_t c = 0; c < nc; ++c) {
      auto members = clusters[c];
      rng.shuffle(members);
      std::size_t gateways = std::max<std::size_t>(
          1, static_cast<std::size_t>(
                 std::llround(spec.gateway_fraction * static_cast<double>(members.size()))));
      for (std::size_t m = 0; m < members.size(); ++m)
        hub_affinity[members[m]] =
            m < gateways ? rng.uniform(1.5 * spec.hub_weight, 2.2 * spec.hub_weight)
                         : rng.uniform(0.0, 0.12);
    }
  }

  std::vector<double> latent_total(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t b = 0; b < block; ++b) latent_total[c] += regional_latent(c, b);

  eco.tables.employment.values = Matrix(n, nr);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = labels[i];
    std::vector<double> own(nr);
    double own_total = 0.0;
    for (std::size_t r = 0; r < nr; ++r) {
      own[r] = std::exp(spec.own_concentration * rng.normal());
      own_total += own[r];
    }
    double size = 600.0 * std::exp(0.4 * rng.normal());
    for (std::size_t r = 0; r < nr; ++r) {
      double block_part = (r / block == c && r < block * nc)
                              ? regional_latent(c, r % block) / latent_total[c]
                              : 0.0;
      double cluster_tilt =
          loyalty[i] * block_part + (1.0 - loyalty[i]) * own[r] / own_total;
      double tilt = (1.0 - hub_affinity[i]) * cluster_tilt +
                    hub_affinity[i] * hub[r] / hub_total;
      double share = (1.0 - spec.deviation) * metro_base[r] / base_total +
                     spec.deviation * tilt;
      eco.tables.employment.values(i, r) = 1.0 + std::floor(size * share);
    }
  }

  // occupations: every row shares a common base (all industries hire some of
  // everything), labour clusters add a loyalty-scaled prototype, the rest is
  // idiosyncratic
  std::vector<double> occupation_base(no);
  for (std::size_t o = 0; o < no; ++o) occupation_base[o] = std::exp(1.0 * rng.normal());

  eco.tables.occupations.values = Matrix(n, no);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = labels[i];
    double mix = regime_of[i] == Regime::Labour
                     ? std::min(1.0, spec.occupation_mix * loyalty[i])
                     : 0.0;
    for (std::size_t o = 0; o < no; ++o) {
      double own = std::exp(1.0 * rng.normal());
      double v = spec.occupation_base_weight * occupation_base[o] +
                 (1.0 - spec.occupation_base_weight) *
                     (mix * occupation_prototype(c, o) + (1.0 - mix) * own);
      eco.tables.occupations.values(i, o) = 1.0 + std::floor(120.0 * v);
    }
  }

  // flows: elevated within io clusters (scaled by both loyalties) over a
  // heavy-tailed background
  eco.tables.flows.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double v = spec.flow_noise * std::exp(spec.flow_spread * rng.normal());
      if (labels[i] == labels[j] && regime_of[i] == Regime::IO)
        v += spec.flow_scale * loyalty[i] * loyalty[j] * rng.uniform(0.75, 1.25);
      eco.tables.flows.values(i, j) = v;
    }

  // citations: sparse background counts
  CitationTable cites;
  cites.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      cites.values(i, j) = std::floor(4.0 * rng.uniform());
    }
  eco.tables.citations = std::move(cites);

  EducationTable edu;
  edu.years.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean =
        regime_of[i] == Regime::Labour ? spec.edu_labour_mean : spec.edu_other_mean;
    edu.years[i] = std::max(1.0, mean + spec.edu_sd * rng.normal());
  }
  eco.tables.education = std::move(edu);

  SectorMap sm;
  sm.sector_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) sm.sector_of[i] = padded_id('S', labels[i], nc);
  eco.tables.sectors = std::move(sm);

  return eco;
}

}  // namespace agglom
