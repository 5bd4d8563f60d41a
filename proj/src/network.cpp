#include "agglom/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "agglom/csv.hpp"
#include "agglom/error.hpp"
#include "agglom/kernels.hpp"
#include "agglom/rng.hpp"

namespace agglom {

namespace {

void finalize(WeightedNetwork& net) {
  const std::size_t n = net.weights.rows();
  net.degrees.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    net.degrees[i] = kernels::vsum(net.weights.row(i), n);
  net.total_weight = kernels::vsum(net.degrees.data(), n);

  // connected components by BFS over positive weights
  net.component_of.assign(n, static_cast<std::size_t>(-1));
  net.n_components = 0;
  std::vector<std::size_t> queue;
  for (std::size_t start = 0; start < n; ++start) {
    if (net.component_of[start] != static_cast<std::size_t>(-1)) continue;
    std::size_t comp = net.n_components++;
    net.component_of[start] = comp;
    queue.assign(1, start);
    while (!queue.empty()) {
      std::size_t u = queue.back();
      queue.pop_back();
      for (std::size_t v = 0; v < n; ++v)
        if (net.weights(u, v) > 0.0 && net.component_of[v] == static_cast<std::size_t>(-1)) {
          net.component_of[v] = comp;
          queue.push_back(v);
        }
    }
  }
}

struct Edge {
  std::size_t i, j;  // i < j
  double w;
};

std::vector<Edge> edges_of(const WeightedNetwork& net) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < net.n(); ++i)
    for (std::size_t j = i + 1; j < net.n(); ++j)
      if (net.weights(i, j) > 0.0) edges.push_back({i, j, net.weights(i, j)});
  return edges;
}

}  // namespace

std::size_t WeightedNetwork::edge_count() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < n(); ++i)
    for (std::size_t j = i + 1; j < n(); ++j)
      if (weights(i, j) > 0.0) ++m;
  return m;
}

std::vector<std::size_t> WeightedNetwork::isolated_nodes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < n(); ++i)
    if (degrees[i] <= 0.0) out.push_back(i);
  return out;
}

const char* clip_policy_name(ClipPolicy p) {
  switch (p) {
    case ClipPolicy::Clip:
      return "clip";
    case ClipPolicy::ShiftMin:
      return "shift-min";
    case ClipPolicy::Abs:
      return "abs";
  }
  return "?";
}

const char* null_variant_name(NullVariant v) {
  return v == NullVariant::ShuffleEdges ? "shuffle" : "degree-preserving";
}

WeightedNetwork build_network(const ProximityMatrix& eg, const IndustryCatalog& catalog,
                              ClipPolicy policy) {
  const std::size_t n = eg.n();
  if (catalog.n_industries() != n) fail_input("build_network: catalog does not match matrix");

  double shift = 0.0;
  if (policy == ClipPolicy::ShiftMin) {
    double lo = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) lo = std::min(lo, eg.values(i, j));
    shift = -lo;  // 0 when nothing is negative
  }

  WeightedNetwork net;
  net.weights = Matrix(n, n);
  net.node_ids.reserve(n);
  for (std::size_t i = 0; i < n; ++i) net.node_ids.push_back(catalog.industry_id(i));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double v = eg.values(i, j);
      switch (policy) {
        case ClipPolicy::Clip:
          v = v > 0.0 ? v : 0.0;
          break;
        case ClipPolicy::ShiftMin:
          v = v + shift;
          break;
        case ClipPolicy::Abs:
          v = std::abs(v);
          break;
      }
      net.weights(i, j) = v;
      net.weights(j, i) = v;
    }
  finalize(net);
  if (net.total_weight <= 0.0) fail_degenerate("network is empty after clipping");
  return net;
}

WeightedNetwork network_from_weights(Matrix weights, std::vector<std::string> node_ids) {
  if (weights.rows() != weights.cols()) fail_input("network weights must be square");
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    weights(i, i) = 0.0;
    for (std::size_t j = 0; j < weights.cols(); ++j)
      if (weights(i, j) < 0.0) fail_input("network weights must be nonnegative");
  }
  WeightedNetwork net;
  net.weights = std::move(weights);
  net.node_ids = std::move(node_ids);
  if (net.node_ids.empty())
    for (std::size_t i = 0; i < net.weights.rows(); ++i)
      net.node_ids.push_back("n" + std::to_string(i));
  finalize(net);
  return net;
}

WeightedNetwork largest_component(const WeightedNetwork& net) {
  if (net.n_components <= 1) return net;
  std::vector<std::size_t> counts(net.n_components, 0);
  for (auto c : net.component_of) ++counts[c];
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c)
    if (counts[c] > counts[best]) best = c;

  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < net.n(); ++i)
    if (net.component_of[i] == best) keep.push_back(i);

  WeightedNetwork sub;
  sub.weights = Matrix(keep.size(), keep.size());
  for (std::size_t a = 0; a < keep.size(); ++a) {
    sub.node_ids.push_back(net.node_ids[keep[a]]);
    for (std::size_t b = 0; b < keep.size(); ++b)
      sub.weights(a, b) = net.weights(keep[a], keep[b]);
  }
  finalize(sub);
  return sub;
}

TransitionSystem transition_system(const WeightedNetwork& net) {
  const std::size_t n = net.n();
  for (std::size_t i = 0; i < n; ++i)
    if (net.degrees[i] <= 0.0)
      fail_degenerate("transition system undefined: node '" + net.node_ids[i] +
                      "' has zero degree");
  TransitionSystem ts;
  ts.M = Matrix(n, n);
  ts.pi.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ts.pi[i] = net.degrees[i] / net.total_weight;
    for (std::size_t j = 0; j < n; ++j) ts.M(i, j) = net.weights(i, j) / net.degrees[i];
  }
  return ts;
}

WeightedNetwork shuffle_null(const WeightedNetwork& net, std::uint64_t seed) {
  const std::size_t n = net.n();
  auto edges = edges_of(net);
  if (edges.empty()) fail_input("shuffle null needs at least 1 edge");

  Rng rng(seed);
  Matrix w(n, n);
  std::set<std::pair<std::size_t, std::size_t>> used;
  const std::size_t max_tries_per_edge = 64 * n * n;
  for (const auto& e : edges) {
    bool placed = false;
    for (std::size_t t = 0; t < max_tries_per_edge; ++t) {
      std::size_t a = rng.bounded(n);
      std::size_t b = rng.bounded(n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (!used.insert({a, b}).second) continue;
      w(a, b) = e.w;
      w(b, a) = e.w;
      placed = true;
      break;
    }
    if (!placed)
      fail_numeric("shuffle null: could not place all edges without collision");
  }
  return network_from_weights(std::move(w), net.node_ids);
}

WeightedNetwork degree_preserving_null(const WeightedNetwork& net, std::uint64_t seed) {
  auto edges = edges_of(net);
  if (edges.empty()) fail_input("degree-preserving null needs at least 1 edge");
  const std::size_t n = net.n();

  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> used;
  for (const auto& e : edges) used.insert({e.i, e.j});

  auto key = [](std::size_t a, std::size_t b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
  };

  const std::size_t target_swaps = 10 * edges.size();
  std::size_t done = 0;
  for (std::size_t attempt = 0; attempt < 200 * target_swaps && done < target_swaps;
       ++attempt) {
    auto& e1 = edges[rng.bounded(edges.size())];
    auto& e2 = edges[rng.bounded(edges.size())];
    std::size_t a = e1.i, b = e1.j, c = e2.i, d = e2.j;
    if (rng.bounded(2)) std::swap(c, d);
    // rewire (a,b),(c,d) -> (a,d),(c,b)
    if (a == d || c == b || a == c || b == d) continue;
    if (used.count(key(a, d)) || used.count(key(c, b))) continue;
    used.erase(key(a, b));
    used.erase(key(c, d));
    used.insert(key(a, d));
    used.insert(key(c, b));
    e1 = {std::min(a, d), std::max(a, d), e1.w};
    e2 = {std::min(c, b), std::max(c, b), e2.w};
    ++done;
  }

  Matrix w(n, n);
  for (const auto& e : edges) {
    w(e.i, e.j) = e.w;
    w(e.j, e.i) = e.w;
  }
  return network_from_weights(std::move(w), net.node_ids);
}

WeightedNetwork top_fraction_subgraph(const WeightedNetwork& net, double q) {
  if (!(q > 0.0) || q > 1.0) fail_input("top-fraction q must be in (0, 1]");
  auto edges = edges_of(net);
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    if (a.w != b.w) return a.w > b.w;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  // small epsilon counters representation noise in q * |E| (e.g. 0.02 * 1000)
  auto keep = static_cast<std::size_t>(
      std::ceil(q * static_cast<double>(edges.size()) - 1e-9));
  keep = std::min(keep, edges.size());

  Matrix w(net.n(), net.n());
  for (std::size_t e = 0; e < keep; ++e) {
    w(edges[e].i, edges[e].j) = edges[e].w;
    w(edges[e].j, edges[e].i) = edges[e].w;
  }
  return network_from_weights(std::move(w), net.node_ids);
}

void write_edge_csv(const std::filesystem::path& path, const WeightedNetwork& net) {
  std::ostringstream out;
  out << "industry_i,industry_j,weight\n";
  for (const auto& e : edges_of(net))
    out << net.node_ids[e.i] << "," << net.node_ids[e.j] << "," << csv::format_number(e.w)
        << "\n";
  csv::write_file(path, out.str());
}

void write_dot(const std::filesystem::path& path, const WeightedNetwork& net) {
  std::ostringstream out;
  out << "graph co_agglomeration {\n";
  out << "  node [shape=circle];\n";
  for (std::size_t i = 0; i < net.n(); ++i)
    out << "  \"" << net.node_ids[i] << "\";\n";
  for (const auto& e : edges_of(net))
    out << "  \"" << net.node_ids[e.i] << "\" -- \"" << net.node_ids[e.j] << "\" [weight="
        << csv::format_number(e.w) << "];\n";
  out << "}\n";
  csv::write_file(path, out.str());
}

WeightedNetwork read_edge_csv(const std::filesystem::path& path) {
  auto rows = csv::read(path, {"industry_i", "industry_j", "weight"});
  std::set<std::string> ids;
  for (const auto& r : rows) {
    ids.insert(r.fields[0]);
    ids.insert(r.fields[1]);
  }
  std::vector<std::string> node_ids(ids.begin(), ids.end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index[node_ids[i]] = i;

  Matrix w(node_ids.size(), node_ids.size());
  for (const auto& r : rows) {
    double v = csv::parse_number(r.fields[2], path, r.line);
    if (v < 0.0) fail_input(path.string() + ": negative value at line " + std::to_string(r.line));
    std::size_t i = index[r.fields[0]], j = index[r.fields[1]];
    if (i == j) continue;
    w(i, j) = v;
    w(j, i) = v;
  }
  return network_from_weights(std::move(w), std::move(node_ids));
}

}  // namespace agglom
