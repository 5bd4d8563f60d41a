#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "agglom/error.hpp"
#include "agglom/network.hpp"
#include "agglom/rng.hpp"

using namespace agglom;

namespace {

IndustryCatalog catalog_of(std::size_t n) {
  IndustryCatalog cat;
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = "I" + std::to_string(i / 10) + std::to_string(i % 10);
    cat.industries.push_back({id, id});
  }
  cat.rebuild_indices();
  return cat;
}

ProximityMatrix random_eg(Rng& rng, std::size_t n, double negative_share = 0.2) {
  ProximityMatrix eg;
  eg.channel = Channel::EG;
  eg.values = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = rng.uniform() < negative_share ? rng.uniform(-0.5, 0.0)
                                                : rng.uniform(0.0, 1.0);
      eg.values(i, j) = v;
      eg.values(j, i) = v;
    }
  return eg;
}

WeightedNetwork small_net() {
  Matrix w(4, 4);
  auto set = [&](std::size_t i, std::size_t j, double v) {
    w(i, j) = v;
    w(j, i) = v;
  };
  set(0, 1, 1.0);
  set(1, 2, 2.0);
  set(2, 3, 0.5);
  return network_from_weights(std::move(w), {});
}

}  // namespace

TEST_CASE("negative entries are clipped and isolated nodes reported") {
  ProximityMatrix eg;
  eg.channel = Channel::EG;
  eg.values = Matrix(3, 3);
  eg.values(0, 1) = eg.values(1, 0) = 0.3;
  eg.values(0, 2) = eg.values(2, 0) = -0.2;
  IndustryCatalog cat = catalog_of(3);

  WeightedNetwork net = build_network(eg, cat, ClipPolicy::Clip);
  CHECK(net.weights(0, 1) == 0.3);
  CHECK(net.weights(0, 2) == 0.0);
  auto isolated = net.isolated_nodes();
  REQUIRE(isolated.size() == 1);
  CHECK(isolated[0] == 2);
  CHECK(net.n_components == 2);
}

TEST_CASE("an all-positive matrix passes through unchanged off-diagonal") {
  Rng rng(31);
  ProximityMatrix eg = random_eg(rng, 6, 0.0);
  IndustryCatalog cat = catalog_of(6);
  WeightedNetwork net = build_network(eg, cat);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(net.weights(i, j) == (i == j ? 0.0 : eg.values(i, j)));
}

TEST_CASE("degrees equal an independent row-sum pass") {
  Rng rng(37);
  ProximityMatrix eg = random_eg(rng, 10);
  WeightedNetwork net = build_network(eg, catalog_of(10));
  for (std::size_t i = 0; i < 10; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 10; ++j) row += net.weights(i, j);
    CHECK(net.degrees[i] == doctest::Approx(row).epsilon(1e-14));
  }
}

TEST_CASE("transition system of a single edge and a star") {
  Matrix w(2, 2);
  w(0, 1) = w(1, 0) = 3.0;
  TransitionSystem ts = transition_system(network_from_weights(std::move(w), {}));
  CHECK(ts.M(0, 1) == 1.0);
  CHECK(ts.M(1, 0) == 1.0);
  CHECK(ts.M(0, 0) == 0.0);
  CHECK(ts.pi[0] == doctest::Approx(0.5));

  // star K_{1,3}: hub degree 3, leaves 1 -> pi = (1/2, 1/6, 1/6, 1/6)
  Matrix s(4, 4);
  for (std::size_t leaf = 1; leaf < 4; ++leaf) s(0, leaf) = s(leaf, 0) = 1.0;
  TransitionSystem star = transition_system(network_from_weights(std::move(s), {}));
  CHECK(star.pi[0] == doctest::Approx(0.5).epsilon(1e-14));
  for (std::size_t leaf = 1; leaf < 4; ++leaf)
    CHECK(star.pi[leaf] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("stationarity: pi M == pi") {
  Rng rng(41);
  ProximityMatrix eg = random_eg(rng, 12, 0.0);
  WeightedNetwork net = build_network(eg, catalog_of(12));
  TransitionSystem ts = transition_system(largest_component(net));
  const std::size_t n = ts.n();
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += ts.pi[i] * ts.M(i, j);
    CHECK(std::abs(acc - ts.pi[j]) < 1e-10);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += ts.M(i, j);
    CHECK(std::abs(row - 1.0) < 1e-12);
  }
}

TEST_CASE("zero-degree nodes are rejected by the transition system") {
  Matrix w(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  WeightedNetwork net = network_from_weights(std::move(w), {});
  CHECK_THROWS_AS((void)transition_system(net), Error);
}

TEST_CASE("shuffle null preserves nodes, edge count and the weight multiset") {
  Rng rng(43);
  ProximityMatrix eg = random_eg(rng, 50);
  WeightedNetwork net = build_network(eg, catalog_of(50));
  WeightedNetwork null = shuffle_null(net, 99);

  CHECK(null.n() == net.n());
  CHECK(null.edge_count() == net.edge_count());

  auto weights_of = [](const WeightedNetwork& g) {
    std::vector<double> ws;
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = i + 1; j < g.n(); ++j)
        if (g.weights(i, j) > 0.0) ws.push_back(g.weights(i, j));
    std::sort(ws.begin(), ws.end());
    return ws;
  };
  CHECK(weights_of(null) == weights_of(net));  // exact multiset
  CHECK(std::abs(null.total_weight - net.total_weight) < 1e-12 * net.total_weight);

  // deterministic given seed
  WeightedNetwork again = shuffle_null(net, 99);
  CHECK(again.weights == null.weights);
  WeightedNetwork other = shuffle_null(net, 100);
  CHECK(other.weights != null.weights);
}

TEST_CASE("single-edge shuffles keep the weight somewhere") {
  Matrix w(3, 3);
  w(0, 1) = w(1, 0) = 2.5;
  WeightedNetwork net = network_from_weights(std::move(w), {});
  WeightedNetwork null = shuffle_null(net, 7);
  CHECK(null.edge_count() == 1);
  double found = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = i + 1; j < 3; ++j) found += null.weights(i, j);
  CHECK(found == 2.5);
}

TEST_CASE("triangle shuffles preserve the three weights") {
  Matrix w(5, 5);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 2) = w(2, 1) = 2.0;
  w(0, 2) = w(2, 0) = 3.0;
  WeightedNetwork net = network_from_weights(std::move(w), {});
  WeightedNetwork null = shuffle_null(net, 3);
  CHECK(null.edge_count() == 3);
  std::vector<double> ws;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = i + 1; j < 5; ++j)
      if (null.weights(i, j) > 0.0) ws.push_back(null.weights(i, j));
  std::sort(ws.begin(), ws.end());
  CHECK(ws == std::vector<double>{1.0, 2.0, 3.0});
}

TEST_CASE("degree-preserving null keeps the unweighted degree sequence") {
  Rng rng(47);
  ProximityMatrix eg = random_eg(rng, 14);
  WeightedNetwork net = build_network(eg, catalog_of(14));
  WeightedNetwork null = degree_preserving_null(net, 5);

  auto degree_seq = [](const WeightedNetwork& g) {
    std::vector<std::size_t> deg(g.n(), 0);
    for (std::size_t i = 0; i < g.n(); ++i)
      for (std::size_t j = 0; j < g.n(); ++j)
        if (g.weights(i, j) > 0.0) ++deg[i];
    return deg;
  };
  CHECK(degree_seq(null) == degree_seq(net));
  CHECK(null.edge_count() == net.edge_count());
}

TEST_CASE("top-fraction subgraph keeps exact counts with deterministic ties") {
  WeightedNetwork net = small_net();
  WeightedNetwork all = top_fraction_subgraph(net, 1.0);
  CHECK(all.edge_count() == net.edge_count());

  WeightedNetwork top = top_fraction_subgraph(net, 0.34);  // ceil(0.34 * 3) = 2
  CHECK(top.edge_count() == 2);
  CHECK(top.weights(1, 2) == 2.0);
  CHECK(top.weights(0, 1) == 1.0);

  // tie-break: equal weights resolved by pair order
  Matrix w(3, 3);
  w(0, 1) = w(1, 0) = 1.0;
  w(0, 2) = w(2, 0) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  WeightedNetwork tie = network_from_weights(std::move(w), {});
  WeightedNetwork half = top_fraction_subgraph(tie, 0.5);
  CHECK(half.edge_count() == 2);
  CHECK(half.weights(0, 1) == 1.0);
  CHECK(half.weights(0, 2) == 1.0);
  CHECK(half.weights(1, 2) == 0.0);
}

TEST_CASE("fractional edge counts round up exactly") {
  // 1000 edges at q=0.02 must keep exactly 20
  const std::size_t n = 46;  // 46*45/2 = 1035 >= 1000
  Matrix w(n, n);
  std::size_t made = 0;
  for (std::size_t i = 0; i < n && made < 1000; ++i)
    for (std::size_t j = i + 1; j < n && made < 1000; ++j) {
      w(i, j) = w(j, i) = 1.0 + static_cast<double>(made);
      ++made;
    }
  WeightedNetwork net = network_from_weights(std::move(w), {});
  REQUIRE(net.edge_count() == 1000);
  CHECK(top_fraction_subgraph(net, 0.02).edge_count() == 20);
}

TEST_CASE("scaling weights by a power of two leaves M and pi bitwise unchanged") {
  Rng rng(53);
  ProximityMatrix eg = random_eg(rng, 8, 0.0);
  WeightedNetwork net = build_network(eg, catalog_of(8));

  Matrix scaled(8, 8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) scaled(i, j) = 4.0 * net.weights(i, j);
  WeightedNetwork net2 = network_from_weights(std::move(scaled), net.node_ids);

  TransitionSystem a = transition_system(net);
  TransitionSystem b = transition_system(net2);
  CHECK(a.M == b.M);
  CHECK(a.pi == b.pi);
}

TEST_CASE("edge csv round-trips through read_edge_csv") {
  Rng rng(59);
  ProximityMatrix eg = random_eg(rng, 7, 0.0);
  WeightedNetwork net = build_network(eg, catalog_of(7));
  auto path = std::filesystem::temp_directory_path() / "agglom_edges_test.csv";
  write_edge_csv(path, net);
  WeightedNetwork back = read_edge_csv(path);
  CHECK(back.n() == net.n());
  CHECK(back.edge_count() == net.edge_count());
  for (std::size_t i = 0; i < net.n(); ++i)
    for (std::size_t j = 0; j < net.n(); ++j)
      CHECK(back.weights(i, j) == net.weights(i, j));  // %.17g round-trip
  std::filesystem::remove(path);
}
