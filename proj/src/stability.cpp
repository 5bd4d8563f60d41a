#include "agglom/stability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <thread>

#include "agglom/error.hpp"
#include "agglom/kernels.hpp"
#include "agglom/rng.hpp"

namespace agglom {

const char* mode_name(Mode m) { return m == Mode::Discrete ? "discrete" : "continuous"; }

std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "discrete") return Mode::Discrete;
  if (s == "continuous") return Mode::Continuous;
  return std::nullopt;
}

StabilityEngine::StabilityEngine(TransitionSystem ts) : ts_(std::move(ts)) {}

void StabilityEngine::ensure_spectrum() const {
  std::call_once(spectrum_once_, [this]() {
    const std::size_t n = ts_.n();
    // A = Pi^1/2 M Pi^-1/2 is symmetric for undirected networks; mirror
    // explicitly to remove division roundoff before the eigensolve.
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        a(i, j) = std::sqrt(ts_.pi[i] / ts_.pi[j]) * ts_.M(i, j);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        double v = 0.5 * (a(i, j) + a(j, i));
        a(i, j) = v;
        a(j, i) = v;
      }
    auto eig = symmetric_eigen(a);
    eigenvalues_ = std::move(eig.values);
    basis_ = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = std::sqrt(ts_.pi[i]);
      for (std::size_t k = 0; k < n; ++k) basis_(i, k) = s * eig.vectors(i, k);
    }
  });
}

Matrix StabilityEngine::gain_from_kernel_weights(const std::vector<double>& f) const {
  const std::size_t n = ts_.n();
  Matrix x(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double v = kernels::vdot3(basis_.row(i), f.data(), basis_.row(j), n) -
                 ts_.pi[i] * ts_.pi[j];
      x(i, j) = v;
      x(j, i) = v;
    }
  return x;
}

Matrix StabilityEngine::gain_matrix(double t, Mode mode) const {
  const std::size_t n = ts_.n();
  if (t < 0.0) fail_input("Markov time must be nonnegative");

  if (t == 0.0) {
    // K(0) = I exactly in both modes
    Matrix x(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        double v = (i == j ? ts_.pi[i] : 0.0) - ts_.pi[i] * ts_.pi[j];
        x(i, j) = v;
        x(j, i) = v;
      }
    return x;
  }

  if (mode == Mode::Discrete) {
    if (t != std::floor(t))
      fail_input("discrete mode requires integer Markov times (got t=" + std::to_string(t) +
                 "); use continuous mode for fractional times");
    Matrix k = matrix_power(ts_.M, static_cast<unsigned long long>(t));
    Matrix x(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        // Pi M^t is symmetric up to roundoff; mirror the average
        double v = 0.5 * (ts_.pi[i] * k(i, j) + ts_.pi[j] * k(j, i)) - ts_.pi[i] * ts_.pi[j];
        x(i, j) = v;
        x(j, i) = v;
      }
    return x;
  }

  ensure_spectrum();
  std::vector<double> f(n);
  for (std::size_t k = 0; k < n; ++k) f[k] = std::exp(t * (eigenvalues_[k] - 1.0));
  return gain_from_kernel_weights(f);
}

double StabilityEngine::kernel_mass(double t, Mode mode) const {
  const std::size_t n = ts_.n();
  if (t == 0.0) return kernels::vsum(ts_.pi.data(), n);
  if (mode == Mode::Discrete) {
    if (t != std::floor(t)) fail_input("discrete mode requires integer Markov times");
    Matrix k = matrix_power(ts_.M, static_cast<unsigned long long>(t));
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += ts_.pi[i] * kernels::vsum(k.row(i), n);
    return mass;
  }
  ensure_spectrum();
  double mass = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double col = 0.0;
    for (std::size_t i = 0; i < n; ++i) col += basis_(i, k);
    mass += std::exp(t * (eigenvalues_[k] - 1.0)) * col * col;
  }
  return mass;
}

Matrix autocovariance(const TransitionSystem& ts, const Partition& p, double t, Mode mode) {
  if (p.size() != ts.n()) fail_input("autocovariance: partition does not cover the network");
  StabilityEngine engine(ts);
  Matrix x = engine.gain_matrix(t, mode);
  const std::uint32_t k = p.k();
  Matrix r(k, k);
  for (std::size_t i = 0; i < ts.n(); ++i)
    for (std::size_t j = 0; j < ts.n(); ++j)
      r(p.community_of(i), p.community_of(j)) += x(i, j);
  return r;
}

double partition_stability(const Matrix& gain, const Partition& p) {
  double r = 0.0;
  // group nodes by community; sum X over same-community pairs
  for (const auto& members : p.communities()) {
    for (std::size_t a = 0; a < members.size(); ++a) {
      const double* row = gain.row(members[a]);
      for (std::size_t b = 0; b < members.size(); ++b) r += row[members[b]];
    }
  }
  return r;
}

StabilityScore stability(const TransitionSystem& ts, const Partition& p, double t, Mode mode) {
  if (p.size() != ts.n()) fail_input("stability: partition does not cover the network");
  StabilityEngine engine(ts);
  Matrix x = engine.gain_matrix(t, mode);
  return StabilityScore{t, partition_stability(x, p), mode};
}

namespace {

// One Louvain level: greedy node moves between existing communities until a
// full pass makes no move. Returns contiguous labels; `any_move` reports
// whether anything changed.
std::vector<std::uint32_t> louvain_one_level(const Matrix& x, Rng& rng, bool& any_move) {
  const std::size_t n = x.rows();
  std::vector<std::uint32_t> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<std::uint32_t>(i);
  any_move = false;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  std::vector<double> acc(n, 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> stamp(n, 0);
  std::uint32_t pass_stamp = 0;

  bool moved = true;
  while (moved) {
    moved = false;
    rng.shuffle(order);
    for (std::size_t idx = 0; idx < n; ++idx) {
      const std::size_t i = order[idx];
      ++pass_stamp;
      touched.clear();
      const double* row = x.row(i);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        std::uint32_t c = label[j];
        if (stamp[c] != pass_stamp) {
          stamp[c] = pass_stamp;
          acc[c] = 0.0;
          touched.push_back(c);
        }
        acc[c] += row[j];
      }
      std::sort(touched.begin(), touched.end());

      const std::uint32_t cur = label[i];
      const double base = stamp[cur] == pass_stamp ? acc[cur] : 0.0;
      std::uint32_t best = cur;
      double best_gain = 0.0;
      for (std::uint32_t c : touched) {
        if (c == cur) continue;
        double gain = 2.0 * (acc[c] - base);  // X symmetric: both orientations move
        if (gain > best_gain) {
          best_gain = gain;
          best = c;
        }
      }
      if (best != cur) {
        label[i] = best;
        moved = true;
        any_move = true;
      }
    }
  }

  // make labels contiguous
  std::vector<std::uint32_t> remap(n, 0xffffffffu);
  std::uint32_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (remap[label[i]] == 0xffffffffu) remap[label[i]] = next++;
    label[i] = remap[label[i]];
  }
  return label;
}

Matrix collapse(const Matrix& x, const std::vector<std::uint32_t>& label, std::uint32_t k) {
  Matrix out(k, k);
  const std::size_t n = x.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = x.row(i);
    double* orow = out.row(label[i]);
    for (std::size_t j = 0; j < n; ++j) orow[label[j]] += row[j];
  }
  return out;
}

}  // namespace

LouvainResult louvain_maximize_gain(const Matrix& gain, std::uint64_t seed) {
  const std::size_t n = gain.rows();
  Rng rng(seed);

  std::vector<std::uint32_t> membership(n);
  for (std::size_t i = 0; i < n; ++i) membership[i] = static_cast<std::uint32_t>(i);

  Matrix level = gain;
  while (true) {
    bool any_move = false;
    auto label = louvain_one_level(level, rng, any_move);
    if (!any_move) break;
    std::uint32_t k = *std::max_element(label.begin(), label.end()) + 1;
    for (auto& m : membership) m = label[m];
    if (k == level.rows()) break;  // nothing aggregated
    level = collapse(level, label, k);
  }

  LouvainResult res;
  res.partition = Partition::from_labels(std::move(membership));
  res.r = partition_stability(gain, res.partition);
  return res;
}

Partition louvain_maximize(const TransitionSystem& ts, double t, Mode mode,
                           std::uint64_t seed) {
  StabilityEngine engine(ts);
  Matrix x = engine.gain_matrix(t, mode);
  return louvain_maximize_gain(x, seed).partition;
}

double mean_pairwise_vi(const std::vector<Partition>& parts, std::uint64_t seed,
                        std::size_t pair_cap) {
  const std::size_t m = parts.size();
  if (m < 2) fail_input("mean pairwise VI needs at least 2 partitions");
  if (pair_cap < 2) fail_input("mean pairwise VI needs a pair cap of at least 2");

  if (m <= pair_cap) {
    double total = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        total += variation_of_information(parts[a], parts[b]);
        ++pairs;
      }
    return total / static_cast<double>(pairs);
  }

  // sample as many distinct pairs as a pair_cap-sized run would have
  const std::size_t want = pair_cap * (pair_cap - 1) / 2;
  Rng rng(seed);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < want) {
    std::size_t a = rng.bounded(m);
    std::size_t b = rng.bounded(m);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    chosen.insert({a, b});
  }
  double total = 0.0;
  for (const auto& [a, b] : chosen) total += variation_of_information(parts[a], parts[b]);
  return total / static_cast<double>(want);
}

SweepResult sweep(const TransitionSystem& ts, const std::vector<double>& times,
                  const SweepOptions& opts) {
  if (times.empty()) fail_input("sweep: empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) fail_input("sweep: times must be strictly increasing");
  if (opts.repeats < 2) fail_input("sweep: need at least 2 repeats");

  StabilityEngine engine(ts);
  SweepResult sr;
  sr.mode = opts.mode;
  sr.points.resize(times.size());

  const int workers = std::max(1, opts.workers);
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    const Matrix gain = engine.gain_matrix(t, opts.mode);

    std::vector<std::uint64_t> seeds(opts.repeats);
    for (int rep = 0; rep < opts.repeats; ++rep)
      seeds[rep] = derive_seed(opts.seed, "louvain", ti, static_cast<std::uint64_t>(rep));

    std::vector<LouvainResult> results(opts.repeats);
    if (workers == 1) {
      for (int rep = 0; rep < opts.repeats; ++rep)
        results[rep] = louvain_maximize_gain(gain, seeds[rep]);
    } else {
      std::atomic<int> next{0};
      auto work = [&]() {
        while (true) {
          int rep = next.fetch_add(1);
          if (rep >= opts.repeats) return;
          results[rep] = louvain_maximize_gain(gain, seeds[rep]);
        }
      };
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }

    // best by r, ties to the lowest repeat index: reduction order is fixed,
    // so the sweep is reproducible regardless of worker count
    std::size_t best = 0;
    for (std::size_t rep = 1; rep < results.size(); ++rep)
      if (results[rep].r > results[best].r) best = rep;

    std::vector<Partition> parts;
    parts.reserve(results.size());
    for (auto& res : results) parts.push_back(res.partition);

    TimePoint& pt = sr.points[ti];
    pt.t = t;
    pt.best = results[best].partition;
    pt.r = results[best].r;
    pt.k = pt.best.k();
    pt.mean_vi = mean_pairwise_vi(parts, derive_seed(opts.seed, "vi-pairs", ti),
                                  opts.vi_pair_cap);
    pt.repeat_seeds = std::move(seeds);
  }
  return sr;
}

PartitionSelection select_partitions(const SweepResult& sr) {
  PartitionSelection sel;
  const auto& pts = sr.points;
  const std::size_t m = pts.size();

  // strict local minima of mean VI; plateaus take the earliest time and must
  // be strictly below both distinct neighbours (boundary plateaus excluded)
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0 && pts[i - 1].mean_vi == pts[i].mean_vi) continue;  // not plateau head
    std::size_t prev = i;
    while (prev > 0 && pts[prev - 1].mean_vi == pts[i].mean_vi) --prev;
    if (prev == 0) continue;  // plateau reaches the left edge
    std::size_t next = i;
    while (next + 1 < m && pts[next + 1].mean_vi == pts[i].mean_vi) ++next;
    if (next + 1 >= m) continue;  // plateau reaches the right edge
    if (pts[i].mean_vi < pts[prev - 1].mean_vi && pts[i].mean_vi < pts[next + 1].mean_vi)
      sel.vi_minima.push_back({pts[i].t, pts[i].best, pts[i].k});
  }

  // P_k family: earliest time at which exactly k communities were detected
  std::set<std::uint32_t> seen;
  std::vector<SelectedPartition> earliest;
  for (const auto& pt : pts)
    if (seen.insert(pt.k).second) earliest.push_back({pt.t, pt.best, pt.k});
  std::sort(earliest.begin(), earliest.end(),
            [](const SelectedPartition& a, const SelectedPartition& b) { return a.k < b.k; });
  sel.earliest_k = std::move(earliest);
  return sel;
}

std::vector<StabilityScore> score_external_partition(const TransitionSystem& ts,
                                                     const Partition& external,
                                                     const std::vector<double>& times,
                                                     Mode mode) {
  if (external.size() != ts.n())
    fail_input("external partition does not cover the analyzed network");
  StabilityEngine engine(ts);
  std::vector<StabilityScore> out;
  out.reserve(times.size());
  for (double t : times) {
    Matrix x = engine.gain_matrix(t, mode);
    out.push_back({t, partition_stability(x, external), mode});
  }
  return out;
}

Dendrogram build_dendrogram(const std::vector<Dendrogram::Level>& levels_in) {
  if (levels_in.empty()) fail_input("dendrogram: no levels given");
  for (const auto& lv : levels_in)
    if (lv.partition.size() == 0) fail_input("dendrogram: empty level");

  Dendrogram d;
  const std::size_t n = levels_in.front().partition.size();
  for (const auto& lv : levels_in)
    if (lv.partition.size() != n)
      fail_input("dendrogram: levels cover different node sets");

  if (levels_in.front().partition.k() != 1) {
    // synthesize the all-in-one root at the coarsest level
    d.levels.push_back({std::numeric_limits<double>::infinity(), Partition::all_in_one(n)});
  }
  for (const auto& lv : levels_in) d.levels.push_back(lv);

  d.parent.resize(d.levels.size());
  for (std::size_t l = 1; l < d.levels.size(); ++l) {
    const Partition& fine = d.levels[l].partition;
    const Partition& coarse = d.levels[l - 1].partition;
    d.parent[l].assign(fine.k(), 0);
    for (std::uint32_t c = 0; c < fine.k(); ++c) {
      std::vector<std::size_t> votes(coarse.k(), 0);
      for (std::size_t i = 0; i < n; ++i)
        if (fine.community_of(i) == c) ++votes[coarse.community_of(i)];
      std::uint32_t winner = 0;
      for (std::uint32_t pc = 1; pc < coarse.k(); ++pc)
        if (votes[pc] > votes[winner]) winner = pc;  // ties keep the lowest index
      d.parent[l][c] = winner;
    }
  }
  return d;
}

std::vector<double> log_time_grid(double tmin, double tmax, std::size_t points) {
  if (!(tmin > 0.0) || !(tmax > tmin)) fail_input("time grid needs 0 < tmin < tmax");
  if (points < 2) fail_input("time grid needs at least 2 points");
  std::vector<double> out(points);
  const double lo = std::log(tmin), hi = std::log(tmax);
  for (std::size_t i = 0; i < points; ++i)
    out[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) /
                               static_cast<double>(points - 1));
  out.front() = tmin;
  out.back() = tmax;
  return out;
}

}  // namespace agglom
