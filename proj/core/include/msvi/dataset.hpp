#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace msvi {

struct Site {
  double x = 0.0;
  double y = 0.0;
};

/// Symmetric D x D matrix of non-negative distances with zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  std::size_t dim() const noexcept { return dim_; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * dim_ + j];
  }
  /// Sets d_ij and d_ji.
  void set(std::size_t i, std::size_t j, double d) noexcept {
    data_[i * dim_ + j] = d;
    data_[j * dim_ + i] = d;
  }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Sites plus n replicate observation vectors on unit-Frechet margins.
/// Instances are only produced by validate_dataset and are immutable.
class SpatialDataset {
 public:
  std::size_t dim() const noexcept { return sites_.size(); }
  std::size_t replicates() const noexcept { return observations_.size(); }
  const std::vector<Site>& sites() const noexcept { return sites_; }
  std::span<const double> observation(std::size_t i) const noexcept {
    return observations_[i];
  }
  const std::vector<std::vector<double>>& observations() const noexcept {
    return observations_;
  }

  /// Dataset restricted to the given replicate indices (in that order).
  SpatialDataset subset(std::span<const std::size_t> rows) const;

 private:
  friend SpatialDataset validate_dataset(std::vector<Site>, std::vector<std::vector<double>>);
  std::vector<Site> sites_;
  std::vector<std::vector<double>> observations_;
};

/// Checks shape, positivity and finiteness; the error names the offending
/// replicate and site (1-based).
SpatialDataset validate_dataset(std::vector<Site> sites,
                                std::vector<std::vector<double>> observations);

/// Observation-value distance d_ij = |z_i - z_j|.
DistanceMatrix distance_matrix(std::span<const double> z);

/// Euclidean distance between sites.
DistanceMatrix site_distance_matrix(std::span<const Site> sites);

enum class DistanceKind { observation, site };

// CSV dataset format: a sites file with header `site_x,site_y`, and an
// observation file with one header row and one row per replicate. Lines
// starting with '#' are provenance comments and are skipped on read.

std::vector<Site> read_sites_csv(const std::filesystem::path& path);
std::vector<std::vector<double>> read_observations_csv(const std::filesystem::path& path);
SpatialDataset read_dataset_csv(const std::filesystem::path& sites,
                                const std::filesystem::path& observations);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

void write_sites_csv(std::ostream& out, std::span<const Site> sites);
void write_observations_csv(std::ostream& out, const SpatialDataset& data);

}  // namespace msvi
