#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace msvi {

/// Bit set of item indices (item i <-> bit i); supports D <= 64.
using BlockMask = std::uint64_t;

/// A partition of {0, ..., D-1} in canonical form.
///
/// Stored as a restricted growth string: label[0] = 0 and every label is at
/// most one more than the largest label before it. Block b is therefore the
/// block whose smallest element appears b-th, which is exactly the canonical
/// block ordering; elements within a block are ascending.
class SetPartition {
 public:
  SetPartition() = default;

  /// Items with equal label share a block; labels are arbitrary integers and
  /// are relabelled to canonical form.
  template <class Int>
  static SetPartition from_labels(std::span<const Int> labels);

  /// Partition from explicit blocks (0-based items); validated.
  static SetPartition from_blocks(const std::vector<std::vector<int>>& blocks);

  /// Parses the text form `1,3|2` (1-based items).
  static SetPartition parse(std::string_view text);

  static SetPartition singletons(std::size_t dim);
  static SetPartition single_block(std::size_t dim);

  std::size_t dim() const noexcept { return labels_.size(); }
  std::size_t num_blocks() const noexcept { return num_blocks_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  std::vector<std::vector<int>> blocks() const;
  std::vector<BlockMask> block_masks() const;

  /// Canonical text: blocks joined by '|', 1-based items joined by ','.
  std::string to_string() const;

  friend bool operator==(const SetPartition&, const SetPartition&) = default;
  friend auto operator<=>(const SetPartition& a, const SetPartition& b) {
    return a.labels_ <=> b.labels_;
  }

 private:
  std::vector<int> labels_;
  std::size_t num_blocks_ = 0;
};

template <class Int>
SetPartition SetPartition::from_labels(std::span<const Int> labels) {
  SetPartition p;
  p.labels_.resize(labels.size());
  std::vector<Int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::size_t b = 0;
    while (b < seen.size() && seen[b] != labels[i]) ++b;
    if (b == seen.size()) seen.push_back(labels[i]);
    p.labels_[i] = static_cast<int>(b);
  }
  p.num_blocks_ = seen.size();
  return p;
}

using BigInt = boost::multiprecision::cpp_int;

/// Number of partitions of a D-set, exact; 1 <= D <= 64.
BigInt bell_number(int dim);

/// Largest D accepted by enumerate_partitions.
inline constexpr int kMaxEnumerationDim = 12;

/// Every partition of {0..D-1} exactly once, canonical, in lexicographic
/// order of restricted growth strings; 1 <= D <= 12.
std::vector<SetPartition> enumerate_partitions(int dim);

/// Calls `fn(const SetPartition&)` for each partition without materializing
/// the whole list.
template <class Fn>
void for_each_partition(int dim, Fn&& fn);

namespace detail {
void check_enumeration_dim(int dim);
}

template <class Fn>
void for_each_partition(int dim, Fn&& fn) {
  detail::check_enumeration_dim(dim);
  const auto n = static_cast<std::size_t>(dim);
  std::vector<int> rgs(n, 0);
  std::vector<int> prefix_max(n, 0);  // max label among items [0, i]
  for (;;) {
    fn(SetPartition::from_labels(std::span<const int>(rgs)));
    // Increment the restricted growth string from the right.
    std::size_t i = n - 1;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
    if (i == 0) return;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
}

}  // namespace msvi
