#include <doctest.h>

#include <cmath>
#include <numeric>

#include "agglom/error.hpp"
#include "agglom/network.hpp"
#include "agglom/rng.hpp"
#include "agglom/stability.hpp"

using namespace agglom;

namespace {

// random connected weighted graph; weights O(1)
WeightedNetwork random_connected_net(Rng& rng, std::size_t n, double p = 0.3) {
  Matrix w(n, n);
  auto set = [&](std::size_t i, std::size_t j, double v) {
    w(i, j) = v;
    w(j, i) = v;
  };
  // random spanning tree keeps it connected
  for (std::size_t i = 1; i < n; ++i) set(i, rng.bounded(i), rng.uniform(0.2, 1.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (w(i, j) == 0.0 && rng.uniform() < p) set(i, j, rng.uniform(0.2, 1.0));
  return network_from_weights(std::move(w), {});
}

Partition random_partition(Rng& rng, std::size_t n, std::uint32_t max_k) {
  std::vector<std::uint32_t> labels(n);
  for (auto& l : labels) l = static_cast<std::uint32_t>(rng.bounded(max_k));
  return Partition::from_labels(std::move(labels));
}

// Newman-Girvan modularity computed straight from the weights; the
// independent reference for discrete-time stability at t = 1.
double modularity_oracle(const WeightedNetwork& net, const Partition& p) {
  const std::size_t n = net.n();
  const double total = net.total_weight;  // sum of degrees
  double q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (p.community_of(i) != p.community_of(j)) continue;
      q += net.weights(i, j) / total - net.degrees[i] * net.degrees[j] / (total * total);
    }
  return q;
}

// two disconnected 2-node cliques
WeightedNetwork two_cliques() {
  Matrix w(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(2, 3) = w(3, 2) = 1.0;
  return network_from_weights(std::move(w), {});
}

// ring of `cliques` cliques of `size` nodes, bridged by unit edges
WeightedNetwork clique_ring(std::size_t cliques, std::size_t size, double clique_weight = 1.0) {
  const std::size_t n = cliques * size;
  Matrix w(n, n);
  for (std::size_t c = 0; c < cliques; ++c)
    for (std::size_t a = 0; a < size; ++a)
      for (std::size_t b = a + 1; b < size; ++b) {
        std::size_t i = c * size + a, j = c * size + b;
        w(i, j) = w(j, i) = clique_weight;
      }
  for (std::size_t c = 0; c < cliques; ++c) {
    std::size_t i = c * size;                              // first node of clique c
    std::size_t j = ((c + 1) % cliques) * size + size - 1; // last node of next clique
    w(i, j) = w(j, i) = 1.0;
  }
  return network_from_weights(std::move(w), {});
}

Partition clique_labels(std::size_t cliques, std::size_t size) {
  std::vector<std::uint32_t> labels(cliques * size);
  for (std::size_t c = 0; c < cliques; ++c)
    for (std::size_t a = 0; a < size; ++a) labels[c * size + a] = static_cast<std::uint32_t>(c);
  return Partition::from_labels(std::move(labels));
}

}  // namespace

TEST_CASE("autocovariance at t = 0 has pi(c) - pi(c)^2 on the diagonal") {
  Rng rng(61);
  WeightedNetwork net = random_connected_net(rng, 10);
  TransitionSystem ts = transition_system(net);
  Partition p = random_partition(rng, 10, 3);

  Matrix r = autocovariance(ts, p, 0.0, Mode::Continuous);
  std::vector<double> pic(p.k(), 0.0);
  for (std::size_t i = 0; i < 10; ++i) pic[p.community_of(i)] += ts.pi[i];
  for (std::uint32_t c = 0; c < p.k(); ++c)
    CHECK(std::abs(r(c, c) - (pic[c] - pic[c] * pic[c])) < 1e-14);
}

TEST_CASE("all-in-one partition is exactly neutral") {
  Rng rng(67);
  WeightedNetwork net = random_connected_net(rng, 12);
  TransitionSystem ts = transition_system(net);
  Partition one = Partition::all_in_one(12);
  for (double t : {0.0, 0.4, 1.0, 7.3}) {
    Matrix r = autocovariance(ts, one, t, Mode::Continuous);
    REQUIRE(r.rows() == 1);
    CHECK(std::abs(r(0, 0)) < 1e-12);
    CHECK(std::abs(stability(ts, one, t, Mode::Continuous).r) < 1e-12);
  }
  for (double t : {0.0, 1.0, 5.0})
    CHECK(std::abs(stability(ts, one, t, Mode::Discrete).r) < 1e-12);
}

TEST_CASE("disconnected cliques: walkers never cross components") {
  WeightedNetwork net = two_cliques();
  TransitionSystem ts = transition_system(net);
  Partition by_component = Partition::from_labels({0, 0, 1, 1});
  for (double t : {0.0, 1.0, 2.0, 4.0}) {
    Matrix rc = autocovariance(ts, by_component, t, Mode::Discrete);
    CHECK(std::abs(rc(0, 0) - 0.25) < 1e-12);
    CHECK(std::abs(rc(1, 1) - 0.25) < 1e-12);
    CHECK(std::abs(stability(ts, by_component, t, Mode::Discrete).r - 0.5) < 1e-12);
  }
  CHECK(std::abs(stability(ts, by_component, 3.7, Mode::Continuous).r - 0.5) < 1e-10);
}

TEST_CASE("r(0) equals 1 - sum pi(c)^2 for any partition") {
  Rng rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    std::size_t n = 5 + rng.bounded(20);
    WeightedNetwork net = random_connected_net(rng, n);
    TransitionSystem ts = transition_system(net);
    Partition p = random_partition(rng, n, 5);
    std::vector<double> pic(p.k(), 0.0);
    for (std::size_t i = 0; i < n; ++i) pic[p.community_of(i)] += ts.pi[i];
    double expected = 1.0;
    for (double v : pic) expected -= v * v;
    for (Mode mode : {Mode::Discrete, Mode::Continuous})
      CHECK(std::abs(stability(ts, p, 0.0, mode).r - expected) < 1e-12);
  }
}

TEST_CASE("discrete stability at t = 1 equals Newman-Girvan modularity") {
  Rng rng(73);
  for (int trial = 0; trial < 30; ++trial) {
    std::size_t n = 4 + rng.bounded(30);
    WeightedNetwork net = random_connected_net(rng, n);
    TransitionSystem ts = transition_system(net);
    Partition p = random_partition(rng, n, 6);
    double r = stability(ts, p, 1.0, Mode::Discrete).r;
    double q = modularity_oracle(net, p);
    CHECK(std::abs(r - q) < 1e-12);
  }
}

TEST_CASE("non-integer times are rejected in discrete mode") {
  Rng rng(79);
  WeightedNetwork net = random_connected_net(rng, 6);
  TransitionSystem ts = transition_system(net);
  Partition p = Partition::singletons(6);
  CHECK_THROWS_AS((void)stability(ts, p, 0.55, Mode::Discrete), Error);
  CHECK_NOTHROW((void)stability(ts, p, 0.55, Mode::Continuous));
}

TEST_CASE("continuous kernel conserves probability and decays") {
  Rng rng(83);
  WeightedNetwork net = random_connected_net(rng, 15);
  StabilityEngine engine(transition_system(net));
  for (double t : log_time_grid(1e-2, 1e2, 25))
    CHECK(std::abs(engine.kernel_mass(t, Mode::Continuous) - 1.0) < 1e-10);

  // per-row mass: sum_j (Pi K)_ij = pi_i, i.e. every gain-matrix row sums to 0
  for (double t : {0.05, 0.8, 12.0}) {
    Matrix gain = engine.gain_matrix(t, Mode::Continuous);
    for (std::size_t i = 0; i < gain.rows(); ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < gain.cols(); ++j) row += gain(i, j);
      CHECK(std::abs(row) < 1e-12);
    }
  }

  Partition p = random_partition(rng, 15, 4);
  CHECK(std::abs(stability(engine.transition(), p, 1e4, Mode::Continuous).r) < 1e-6);
}

TEST_CASE("louvain recovers disconnected cliques exactly") {
  // 5 cliques of 8 nodes with no bridges: component structure is the optimum
  WeightedNetwork net = clique_ring(5, 8);
  // remove the ring bridges to leave pure cliques
  Matrix w = net.weights;
  for (std::size_t c = 0; c < 5; ++c) {
    std::size_t i = c * 8;
    std::size_t j = ((c + 1) % 5) * 8 + 7;
    w(i, j) = w(j, i) = 0.0;
  }
  WeightedNetwork pure = network_from_weights(std::move(w), {});
  TransitionSystem ts = transition_system(pure);
  Partition planted = clique_labels(5, 8);
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Partition found = louvain_maximize(ts, 1.0, Mode::Discrete, seed);
    CHECK(variation_of_information(found, planted) == 0.0);
  }
}

TEST_CASE("louvain recovers a bridged clique ring in nearly every run") {
  WeightedNetwork net = clique_ring(5, 8);
  TransitionSystem ts = transition_system(net);
  Partition planted = clique_labels(5, 8);
  int hits = 0;
  const int runs = 100;
  for (int s = 1; s <= runs; ++s) {
    Partition found = louvain_maximize(ts, 1.0, Mode::Discrete, s);
    if (variation_of_information(found, planted) == 0.0) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("complete graph collapses to one community at large times") {
  const std::size_t n = 4;
  Matrix w(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) w(i, j) = w(j, i) = 1.0;
  TransitionSystem ts = transition_system(network_from_weights(std::move(w), {}));

  // discrete odd t: the kernel weight (-1/3)^t is negative, so every split
  // scores below the all-in-one partition's exact 0 (at even/continuous
  // times the complete graph's symmetry keeps splits marginally positive)
  const double t = 11.0;
  Partition found = louvain_maximize(ts, t, Mode::Discrete, 1);
  CHECK(found.k() == 1);
  Partition split = Partition::from_labels({0, 0, 1, 1});
  CHECK(stability(ts, split, t, Mode::Discrete).r < 0.0);
  CHECK(stability(ts, Partition::all_in_one(4), t, Mode::Discrete).r >=
        stability(ts, split, t, Mode::Discrete).r);
}

TEST_CASE("louvain never lands below the singleton start") {
  Rng rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    std::size_t n = 6 + rng.bounded(15);
    WeightedNetwork net = random_connected_net(rng, n);
    TransitionSystem ts = transition_system(net);
    for (double t : {0.3, 1.0, 3.0}) {
      StabilityEngine engine(ts);
      Matrix gain = engine.gain_matrix(t, Mode::Continuous);
      double singleton_r = partition_stability(gain, Partition::singletons(n));
      LouvainResult res = louvain_maximize_gain(gain, rng.next());
      CHECK(res.r >= singleton_r - 1e-13);
    }
  }
}

TEST_CASE("louvain is deterministic given the seed") {
  Rng rng(97);
  WeightedNetwork net = random_connected_net(rng, 20);
  TransitionSystem ts = transition_system(net);
  Partition a = louvain_maximize(ts, 0.7, Mode::Continuous, 1234);
  Partition b = louvain_maximize(ts, 0.7, Mode::Continuous, 1234);
  CHECK(a == b);
}

TEST_CASE("power-of-two weight rescaling leaves stability and louvain output unchanged") {
  Rng rng(101);
  WeightedNetwork net = random_connected_net(rng, 12);
  Matrix scaled(12, 12);
  for (std::size_t i = 0; i < 12; ++i)
    for (std::size_t j = 0; j < 12; ++j) scaled(i, j) = 8.0 * net.weights(i, j);
  WeightedNetwork net2 = network_from_weights(std::move(scaled), {});

  TransitionSystem a = transition_system(net);
  TransitionSystem b = transition_system(net2);
  Partition p = random_partition(rng, 12, 4);
  CHECK(stability(a, p, 0.9, Mode::Continuous).r == stability(b, p, 0.9, Mode::Continuous).r);
  CHECK(louvain_maximize(a, 0.9, Mode::Continuous, 77) ==
        louvain_maximize(b, 0.9, Mode::Continuous, 77));
}

TEST_CASE("sweep on planted cliques reaches zero VI and recovers P_5") {
  WeightedNetwork net = clique_ring(5, 8);
  TransitionSystem ts = transition_system(net);
  SweepOptions opts;
  opts.repeats = 12;
  opts.mode = Mode::Continuous;
  opts.seed = 7;
  opts.workers = 2;
  auto times = log_time_grid(0.1, 30.0, 12);
  SweepResult sr = sweep(ts, times, opts);

  REQUIRE(sr.points.size() == times.size());
  bool saw_planted_vi0 = false;
  Partition planted = clique_labels(5, 8);
  for (const auto& pt : sr.points) {
    CHECK(pt.mean_vi >= 0.0);
    CHECK(pt.mean_vi <= std::log(40.0) + 1e-12);
    if (pt.k == 5 && pt.mean_vi == 0.0 &&
        variation_of_information(pt.best, planted) == 0.0)
      saw_planted_vi0 = true;
  }
  CHECK(saw_planted_vi0);

  PartitionSelection sel = select_partitions(sr);
  bool p5 = false;
  for (const auto& s : sel.earliest_k)
    if (s.k == 5 && variation_of_information(s.partition, planted) == 0.0) p5 = true;
  CHECK(p5);
}

TEST_CASE("sweep is reproducible and independent of worker count") {
  Rng rng(103);
  WeightedNetwork net = random_connected_net(rng, 14);
  TransitionSystem ts = transition_system(net);
  auto times = log_time_grid(0.2, 5.0, 6);
  SweepOptions a;
  a.repeats = 8;
  a.seed = 42;
  a.workers = 1;
  SweepOptions b = a;
  b.workers = 4;
  SweepResult ra = sweep(ts, times, a);
  SweepResult rb = sweep(ts, times, b);
  for (std::size_t i = 0; i < times.size(); ++i) {
    CHECK(ra.points[i].best == rb.points[i].best);
    CHECK(ra.points[i].r == rb.points[i].r);
    CHECK(ra.points[i].mean_vi == rb.points[i].mean_vi);
  }
}

TEST_CASE("mean pairwise VI handles the two-repeat degenerate case") {
  Partition a = Partition::from_labels({0, 0, 1, 1});
  Partition b = Partition::from_labels({0, 1, 0, 1});
  double vi = variation_of_information(a, b);
  CHECK(mean_pairwise_vi({a, b}, 0) == doctest::Approx(vi));
}

TEST_CASE("mean pairwise VI samples pairs above the cap, seeded") {
  Rng rng(109);
  std::vector<Partition> parts;
  for (int i = 0; i < 300; ++i) parts.push_back(random_partition(rng, 12, 4));
  double full = mean_pairwise_vi(parts, 5, 1000);  // all 44850 pairs
  double sampled = mean_pairwise_vi(parts, 5, 256);
  double sampled_again = mean_pairwise_vi(parts, 5, 256);
  CHECK(sampled == sampled_again);  // deterministic given seed
  CHECK(sampled == doctest::Approx(full).epsilon(0.05));
  double other_seed = mean_pairwise_vi(parts, 6, 256);
  CHECK(other_seed != sampled);
}

TEST_CASE("select_partitions finds interior VI minima with plateau handling") {
  auto mk = [](double t, double vi, std::uint32_t k) {
    TimePoint pt;
    pt.t = t;
    pt.mean_vi = vi;
    pt.k = k;
    pt.best = Partition::singletons(4);
    pt.r = 0.0;
    return pt;
  };
  SweepResult sr;
  sr.points = {mk(1, 0.5, 4), mk(2, 0.2, 3), mk(3, 0.4, 2)};
  PartitionSelection sel = select_partitions(sr);
  REQUIRE(sel.vi_minima.size() == 1);
  CHECK(sel.vi_minima[0].t == 2);

  // monotone curve: no interior minima, only the P_k family
  sr.points = {mk(1, 0.5, 4), mk(2, 0.4, 3), mk(3, 0.3, 2)};
  sel = select_partitions(sr);
  CHECK(sel.vi_minima.empty());
  CHECK(sel.earliest_k.size() == 3);

  // plateau minimum takes the earliest time in the plateau
  sr.points = {mk(1, 0.5, 5), mk(2, 0.2, 4), mk(3, 0.2, 4), mk(4, 0.6, 3)};
  sel = select_partitions(sr);
  REQUIRE(sel.vi_minima.size() == 1);
  CHECK(sel.vi_minima[0].t == 2);

  // plateau touching the boundary is not a minimum
  sr.points = {mk(1, 0.2, 5), mk(2, 0.2, 4), mk(3, 0.6, 3)};
  sel = select_partitions(sr);
  CHECK(sel.vi_minima.empty());
}

TEST_CASE("external scoring agrees with direct stability evaluation") {
  WeightedNetwork net = clique_ring(5, 8);
  TransitionSystem ts = transition_system(net);
  Partition planted = clique_labels(5, 8);
  auto grid = log_time_grid(0.2, 8.0, 6);
  auto scores = score_external_partition(ts, planted, grid, Mode::Continuous);
  REQUIRE(scores.size() == grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(scores[i].r ==
          doctest::Approx(stability(ts, planted, grid[i], Mode::Continuous).r).epsilon(1e-14));
}

TEST_CASE("external partitions score at most as well as the detected optimum") {
  WeightedNetwork net = clique_ring(5, 8);
  TransitionSystem ts = transition_system(net);
  Partition planted = clique_labels(5, 8);
  auto times = std::vector<double>{1.0};

  auto planted_score = score_external_partition(ts, planted, times, Mode::Discrete);
  Rng rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    Partition random_p = random_partition(rng, 40, 5);
    auto s = score_external_partition(ts, random_p, times, Mode::Discrete);
    CHECK(planted_score[0].r >= s[0].r - 1e-12);
  }

  Partition one = Partition::all_in_one(40);
  auto zero = score_external_partition(ts, one, log_time_grid(0.1, 10, 5), Mode::Continuous);
  for (const auto& sc : zero) CHECK(std::abs(sc.r) < 1e-12);
}

TEST_CASE("dendrogram links follow containment, plurality and tie rules") {
  // strictly nested: parents follow set containment
  Partition coarse = Partition::from_labels({0, 0, 0, 0, 1, 1});
  Partition fine = Partition::from_labels({0, 0, 1, 1, 2, 2});
  Dendrogram d = build_dendrogram({{2.0, coarse}, {1.0, fine}});
  REQUIRE(d.levels.size() == 3);  // synthesized all-in-one root
  CHECK(d.levels[0].partition.k() == 1);
  CHECK(d.parent[2][0] == 0);
  CHECK(d.parent[2][1] == 0);
  CHECK(d.parent[2][2] == 1);

  // plurality: child {a,b,c} with two members in parent 0
  Partition parents = Partition::from_labels({0, 0, 1, 1});
  Partition child = Partition::from_labels({0, 0, 0, 1});
  Dendrogram d2 = build_dendrogram({{2.0, parents}, {1.0, child}});
  CHECK(d2.parent[2][0] == 0);

  // 2/2 tie goes to the lower parent index
  Partition tie_child = Partition::from_labels({0, 0, 0, 0});
  Dendrogram d3 = build_dendrogram(
      {{2.0, Partition::from_labels({1, 1, 3, 3})}, {1.0, tie_child}});
  CHECK(d3.parent[2][0] == 0);
}

TEST_CASE("log time grid has the requested endpoints and spacing") {
  auto grid = log_time_grid(1e-2, 1e2, 120);
  REQUIRE(grid.size() == 120);
  CHECK(grid.front() == 1e-2);
  CHECK(grid.back() == 1e2);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    CHECK(grid[i] > grid[i - 1]);
    if (i >= 2)
      CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[i - 1] / grid[i - 2]).epsilon(1e-9));
  }
}
