#pragma once

#include <cstdint>
#include <vector>

namespace agglom {

// Assignment of nodes to communities. Labels are always contiguous 0..k-1,
// renumbered in order of first appearance, so two partitions are equal as
// set partitions iff their assignment vectors are equal.
class Partition {
public:
  Partition() = default;

  static Partition from_labels(std::vector<std::uint32_t> labels);
  static Partition singletons(std::size_t n);
  static Partition all_in_one(std::size_t n);

  std::size_t size() const { return assignment_.size(); }
  std::uint32_t k() const { return k_; }
  std::uint32_t community_of(std::size_t node) const { return assignment_[node]; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }

  std::vector<std::vector<std::size_t>> communities() const;
  std::vector<std::size_t> community_sizes() const;

  bool operator==(const Partition&) const = default;

private:
  std::vector<std::uint32_t> assignment_;
  std::uint32_t k_ = 0;
};

// Meila's variation of information with natural-log entropies;
// VI(p, q) in [0, ln n], 0 iff p == q.
double variation_of_information(const Partition& p, const Partition& q);

}  // namespace agglom
