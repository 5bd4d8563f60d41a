#include "agglom/partition.hpp"

#include <cmath>

#include "agglom/error.hpp"

namespace agglom {

Partition Partition::from_labels(std::vector<std::uint32_t> labels) {
  Partition p;
  // renumber by first appearance
  std::vector<std::uint32_t> remap;
  constexpr std::uint32_t unset = 0xffffffffu;
  for (auto& l : labels) {
    if (l >= remap.size()) remap.resize(l + 1, unset);
    if (remap[l] == unset) remap[l] = static_cast<std::uint32_t>(p.k_++);
    l = remap[l];
  }
  p.assignment_ = std::move(labels);
  return p;
}

Partition Partition::singletons(std::size_t n) {
  std::vector<std::uint32_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<std::uint32_t>(i);
  return from_labels(std::move(labels));
}

Partition Partition::all_in_one(std::size_t n) {
  return from_labels(std::vector<std::uint32_t>(n, 0));
}

std::vector<std::vector<std::size_t>> Partition::communities() const {
  std::vector<std::vector<std::size_t>> out(k_);
  for (std::size_t i = 0; i < assignment_.size(); ++i) out[assignment_[i]].push_back(i);
  return out;
}

std::vector<std::size_t> Partition::community_sizes() const {
  std::vector<std::size_t> out(k_, 0);
  for (auto c : assignment_) ++out[c];
  return out;
}

double variation_of_information(const Partition& p, const Partition& q) {
  if (p.size() != q.size())
    fail_input("variation_of_information: partitions cover different node counts");
  const std::size_t n = p.size();
  if (n == 0) return 0.0;
  if (p == q) return 0.0;

  std::vector<double> np(p.k(), 0.0), nq(q.k(), 0.0);
  // joint counts as a dense k_p x k_q table; partitions here are small
  std::vector<double> joint(static_cast<std::size_t>(p.k()) * q.k(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto a = p.community_of(i);
    auto b = q.community_of(i);
    np[a] += 1.0;
    nq[b] += 1.0;
    joint[static_cast<std::size_t>(a) * q.k() + b] += 1.0;
  }

  const double dn = static_cast<double>(n);
  double hp = 0.0, hq = 0.0, mi = 0.0;
  for (double c : np)
    if (c > 0.0) hp -= (c / dn) * std::log(c / dn);
  for (double c : nq)
    if (c > 0.0) hq -= (c / dn) * std::log(c / dn);
  for (std::uint32_t a = 0; a < p.k(); ++a)
    for (std::uint32_t b = 0; b < q.k(); ++b) {
      double c = joint[static_cast<std::size_t>(a) * q.k() + b];
      if (c > 0.0) mi += (c / dn) * std::log(dn * c / (np[a] * nq[b]));
    }

  double vi = hp + hq - 2.0 * mi;
  return vi < 0.0 ? 0.0 : vi;  // clamp roundoff
}

}  // namespace agglom
