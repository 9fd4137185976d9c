#include "msvi/partition.hpp"

#include <algorithm>
#include <charconv>

#include <fmt/format.h>

#include "msvi/error.hpp"

namespace msvi {

SetPartition SetPartition::from_blocks(const std::vector<std::vector<int>>& blocks) {
  std::size_t dim = 0;
  for (const auto& b : blocks) {
    if (b.empty()) throw DomainError("partition has an empty block");
    dim += b.size();
  }
  std::vector<int> labels(dim, -1);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    for (int item : blocks[k]) {
      if (item < 0 || static_cast<std::size_t>(item) >= dim) {
        throw DomainError(fmt::format("partition item {} out of range", item + 1));
      }
      if (labels[item] != -1) {
        throw DomainError(fmt::format("partition item {} appears twice", item + 1));
      }
      labels[item] = static_cast<int>(k);
    }
  }
  return from_labels(std::span<const int>(labels));
}

SetPartition SetPartition::parse(std::string_view text) {
  std::vector<std::vector<int>> blocks(1);
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = text.find_first_of(",|", pos);
    const std::string_view tok =
        text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
    int item = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), item);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || item < 1) {
      throw DomainError(fmt::format("cannot parse partition '{}'", text));
    }
    blocks.back().push_back(item - 1);
    if (end == std::string_view::npos) break;
    if (text[end] == '|') blocks.emplace_back();
    pos = end + 1;
  }
  return from_blocks(blocks);
}

SetPartition SetPartition::singletons(std::size_t dim) {
  std::vector<int> labels(dim);
  for (std::size_t i = 0; i < dim; ++i) labels[i] = static_cast<int>(i);
  return from_labels(std::span<const int>(labels));
}

SetPartition SetPartition::single_block(std::size_t dim) {
  std::vector<int> labels(dim, 0);
  return from_labels(std::span<const int>(labels));
}

std::vector<std::vector<int>> SetPartition::blocks() const {
  std::vector<std::vector<int>> out(num_blocks_);
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]].push_back(static_cast<int>(i));
  return out;
}

std::vector<BlockMask> SetPartition::block_masks() const {
  std::vector<BlockMask> out(num_blocks_, 0);
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i]] |= BlockMask{1} << i;
  return out;
}

std::string SetPartition::to_string() const {
  std::string s;
  const auto bl = blocks();
  for (std::size_t k = 0; k < bl.size(); ++k) {
    if (k) s += '|';
    for (std::size_t j = 0; j < bl[k].size(); ++j) {
      if (j) s += ',';
      s += std::to_string(bl[k][j] + 1);
    }
  }
  return s;
}

BigInt bell_number(int dim) {
  if (dim < 1 || dim > 64) {
    throw DomainError(fmt::format("bell_number: D = {} outside [1, 64]", dim));
  }
  // Bell triangle: each row starts with the last entry of the previous row.
  std::vector<BigInt> row{BigInt(1)};
  for (int n = 1; n < dim; ++n) {
    std::vector<BigInt> next{row.back()};
    next.reserve(row.size() + 1);
    for (const auto& v : row) next.push_back(next.back() + v);
    row = std::move(next);
  }
  return row.back();
}

namespace detail {
void check_enumeration_dim(int dim) {
  if (dim < 1) throw DomainError(fmt::format("enumerate_partitions: D = {} < 1", dim));
  if (dim > kMaxEnumerationDim) {
    throw DomainError(fmt::format(
        "enumerate_partitions: D = {} exceeds the enumeration limit {} ({} partitions)", dim,
        kMaxEnumerationDim, bell_number(dim).str()));
  }
}
}  // namespace detail

std::vector<SetPartition> enumerate_partitions(int dim) {
  std::vector<SetPartition> out;
  for_each_partition(dim, [&](const SetPartition& p) { out.push_back(p); });
  return out;
}

}  // namespace msvi
