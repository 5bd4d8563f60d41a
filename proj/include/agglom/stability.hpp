#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agglom/matrix.hpp"
#include "agglom/network.hpp"
#include "agglom/partition.hpp"

namespace agglom {

// The diffusion runs either in discrete steps (K(t) = M^t, t integer) or in
// continuous time (K(t) = exp(t(M - I))). Continuous is the default: the
// interesting Markov times are rarely integers.
enum class Mode { Discrete, Continuous };

const char* mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& s);

struct StabilityScore {
  double t = 0.0;
  double r = 0.0;
  Mode mode = Mode::Continuous;
};

// Shared per-network state for stability computations. The symmetrized
// transition matrix diag(pi)^1/2 M diag(pi)^-1/2 is eigendecomposed once and
// the spectrum reused across the whole time grid; gain matrices are immutable
// and safe to share across Louvain workers.
class StabilityEngine {
public:
  explicit StabilityEngine(TransitionSystem ts);

  const TransitionSystem& transition() const { return ts_; }
  std::size_t n() const { return ts_.n(); }

  // X(t) = Pi K(t) - pi^T pi, mirrored to exact symmetry. The stability of a
  // partition is sum_{i,j same community} X(t)_ij.
  Matrix gain_matrix(double t, Mode mode) const;

  // sum over all entries of Pi K(t); equals 1 when probability is conserved
  double kernel_mass(double t, Mode mode) const;

private:
  TransitionSystem ts_;
  mutable std::once_flag spectrum_once_;
  mutable std::vector<double> eigenvalues_;
  mutable Matrix basis_;  // rows scaled eigenvectors: B = diag(pi)^1/2 U

  void ensure_spectrum() const;
  Matrix gain_from_kernel_weights(const std::vector<double>& f) const;
};

// R(t) = H^T [Pi K(t) - pi^T pi] H for the partition's indicator H.
Matrix autocovariance(const TransitionSystem& ts, const Partition& p, double t, Mode mode);

StabilityScore stability(const TransitionSystem& ts, const Partition& p, double t, Mode mode);

// trace of H^T X H for a precomputed gain matrix
double partition_stability(const Matrix& gain, const Partition& p);

struct LouvainResult {
  Partition partition;
  double r = 0.0;
};

// Greedy node-move + aggregation maximization of the partition stability
// encoded by `gain`. The seed fixes the node visiting order; moves need a
// strictly positive improvement, so the algorithm always terminates.
LouvainResult louvain_maximize_gain(const Matrix& gain, std::uint64_t seed);

Partition louvain_maximize(const TransitionSystem& ts, double t, Mode mode, std::uint64_t seed);

// Mean VI over distinct partition pairs; all pairs when count <= pair_cap,
// otherwise a seeded uniform sample of pair_cap*(pair_cap-1)/2 pairs.
double mean_pairwise_vi(const std::vector<Partition>& parts, std::uint64_t seed,
                        std::size_t pair_cap = 256);

struct SweepOptions {
  int repeats = 100;
  Mode mode = Mode::Continuous;
  std::uint64_t seed = 0;
  int workers = 1;
  std::size_t vi_pair_cap = 256;
};

struct TimePoint {
  double t = 0.0;
  Partition best;
  double r = 0.0;
  std::uint32_t k = 0;
  double mean_vi = 0.0;
  std::vector<std::uint64_t> repeat_seeds;
};

struct SweepResult {
  Mode mode = Mode::Continuous;
  std::vector<TimePoint> points;
};

SweepResult sweep(const TransitionSystem& ts, const std::vector<double>& times,
                  const SweepOptions& opts);

struct SelectedPartition {
  double t = 0.0;
  Partition partition;
  std::uint32_t k = 0;
};

struct PartitionSelection {
  std::vector<SelectedPartition> vi_minima;   // strict local minima of mean VI
  std::vector<SelectedPartition> earliest_k;  // P_k family, ascending k
};

PartitionSelection select_partitions(const SweepResult& sr);

std::vector<StabilityScore> score_external_partition(const TransitionSystem& ts,
                                                     const Partition& external,
                                                     const std::vector<double>& times,
                                                     Mode mode);

struct Dendrogram {
  struct Level {
    double t = 0.0;
    Partition partition;
  };
  std::vector<Level> levels;                       // coarse -> fine, levels[0] all-in-one
  std::vector<std::vector<std::uint32_t>> parent;  // parent[l][c], defined for l >= 1
};

// Links each community to the community one level coarser that contains the
// plurality of its nodes; ties go to the lowest parent index. A missing
// all-in-one root is prepended.
Dendrogram build_dendrogram(const std::vector<Dendrogram::Level>& levels);

// 'points' log-spaced Markov times in [tmin, tmax]
std::vector<double> log_time_grid(double tmin, double tmax, std::size_t points);

}  // namespace agglom
