#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "agglom/matrix.hpp"
#include "agglom/proximity.hpp"

namespace agglom {

// Undirected, nonnegative-weight network over industries. `node_ids` maps
// local node indices to industry ids, so restricted networks (e.g. the
// largest connected component) stay traceable to the catalog.
struct WeightedNetwork {
  Matrix weights;  // symmetric, zero diagonal
  std::vector<double> degrees;
  double total_weight = 0.0;  // sum of degrees (2x the edge weight total)
  std::vector<std::string> node_ids;
  std::vector<std::size_t> component_of;
  std::size_t n_components = 0;

  std::size_t n() const { return weights.rows(); }
  std::size_t edge_count() const;
  std::vector<std::size_t> isolated_nodes() const;
};

struct TransitionSystem {
  Matrix M;                 // row-stochastic D^-1 W
  std::vector<double> pi;   // stationary distribution, proportional to degrees

  std::size_t n() const { return M.rows(); }
};

enum class ClipPolicy { Clip, ShiftMin, Abs };
const char* clip_policy_name(ClipPolicy p);

enum class NullVariant { ShuffleEdges, DegreePreserving };
const char* null_variant_name(NullVariant v);

// Negative co-agglomeration entries are dropped (default), shifted, or
// folded depending on policy; the diagonal is zeroed.
WeightedNetwork build_network(const ProximityMatrix& eg, const IndustryCatalog& catalog,
                              ClipPolicy policy = ClipPolicy::Clip);

WeightedNetwork network_from_weights(Matrix weights, std::vector<std::string> node_ids);

// Sub-network induced by the largest connected component (ties broken by the
// lowest contained node index).
WeightedNetwork largest_component(const WeightedNetwork& net);

TransitionSystem transition_system(const WeightedNetwork& net);

// Null model: same node set, same edge count, same weight multiset, endpoints
// resampled uniformly over distinct pairs. Deterministic given seed.
WeightedNetwork shuffle_null(const WeightedNetwork& net, std::uint64_t seed);

// Alternative null that preserves the (unweighted) degree sequence by
// double-edge swaps, weights travelling with their edges.
WeightedNetwork degree_preserving_null(const WeightedNetwork& net, std::uint64_t seed);

// Keeps the ceil(q * |E|) largest-weight edges; ties broken by node pair in
// catalog order. Visualization export only.
WeightedNetwork top_fraction_subgraph(const WeightedNetwork& net, double q);

void write_edge_csv(const std::filesystem::path& path, const WeightedNetwork& net);
void write_dot(const std::filesystem::path& path, const WeightedNetwork& net);
WeightedNetwork read_edge_csv(const std::filesystem::path& path);

}  // namespace agglom
