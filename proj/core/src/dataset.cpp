#include "msvi/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "msvi/error.hpp"

namespace msvi {

SpatialDataset validate_dataset(std::vector<Site> sites,
                                std::vector<std::vector<double>> observations) {
  const std::size_t dim = sites.size();
  if (dim == 0) throw InvalidDataError("dataset has no sites");
  if (observations.empty()) throw InvalidDataError("dataset has no replicates");
  for (std::size_t s = 0; s < dim; ++s) {
    if (!std::isfinite(sites[s].x) || !std::isfinite(sites[s].y)) {
      throw InvalidDataError(fmt::format("site {} has a non-finite coordinate", s + 1));
    }
  }
  for (std::size_t r = 0; r < observations.size(); ++r) {
    const auto& z = observations[r];
    if (z.size() != dim) {
      throw InvalidDataError(fmt::format("replicate {} has {} values, expected {}", r + 1,
                                         z.size(), dim));
    }
    for (std::size_t s = 0; s < dim; ++s) {
      if (!std::isfinite(z[s])) {
        throw InvalidDataError(
            fmt::format("replicate {}, site {}: value is not finite", r + 1, s + 1));
      }
      if (z[s] <= 0.0) {
        throw InvalidDataError(fmt::format(
            "replicate {}, site {}: value {} is not strictly positive", r + 1, s + 1, z[s]));
      }
    }
  }
  SpatialDataset data;
  data.sites_ = std::move(sites);
  data.observations_ = std::move(observations);
  return data;
}

SpatialDataset SpatialDataset::subset(std::span<const std::size_t> rows) const {
  std::vector<std::vector<double>> obs;
  obs.reserve(rows.size());
  for (std::size_t r : rows) obs.push_back(observations_.at(r));
  return validate_dataset(sites_, std::move(obs));
}

DistanceMatrix distance_matrix(std::span<const double> z) {
  if (z.empty()) throw InvalidDataError("distance_matrix: empty observation");
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!std::isfinite(z[i]) || z[i] <= 0.0) {
      throw InvalidDataError(
          fmt::format("distance_matrix: entry {} = {} is not positive and finite", i + 1, z[i]));
    }
  }
  DistanceMatrix d(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (std::size_t j = i + 1; j < z.size(); ++j) d.set(i, j, std::fabs(z[i] - z[j]));
  }
  return d;
}

DistanceMatrix site_distance_matrix(std::span<const Site> sites) {
  DistanceMatrix d(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    for (std::size_t j = i + 1; j < sites.size(); ++j) {
      d.set(i, j, std::hypot(sites[i].x - sites[j].x, sites[i].y - sites[j].y));
    }
  }
  return d;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_number(const std::string& text, const std::filesystem::path& path,
                    std::size_t line_no) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InvalidDataError(
        fmt::format("{}:{}: cannot parse '{}' as a number", path.string(), line_no, text));
  }
  return v;
}

/// Header row followed by numeric rows; comment lines skipped.
std::vector<std::vector<double>> read_numeric_csv(const std::filesystem::path& path,
                                                  std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw InvalidDataError(fmt::format("cannot open {}", path.string()));
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    auto fields = split_fields(line);
    if (!have_header) {
      if (header) *header = fields;
      have_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_number(f, path, line_no));
    rows.push_back(std::move(row));
  }
  if (!have_header) throw InvalidDataError(fmt::format("{}: missing header row", path.string()));
  return rows;
}

}  // namespace

std::vector<Site> read_sites_csv(const std::filesystem::path& path) {
  std::vector<std::string> header;
  const auto rows = read_numeric_csv(path, &header);
  if (header.size() != 2 || header[0] != "site_x" || header[1] != "site_y") {
    throw InvalidDataError(
        fmt::format("{}: expected header 'site_x,site_y'", path.string()));
  }
  std::vector<Site> sites;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 2) {
      throw InvalidDataError(fmt::format("{}: site {} does not have 2 coordinates",
                                         path.string(), i + 1));
    }
    sites.push_back({rows[i][0], rows[i][1]});
  }
  return sites;
}

std::vector<std::vector<double>> read_observations_csv(const std::filesystem::path& path) {
  return read_numeric_csv(path, nullptr);
}

SpatialDataset read_dataset_csv(const std::filesystem::path& sites,
                                const std::filesystem::path& observations) {
  return validate_dataset(read_sites_csv(sites), read_observations_csv(observations));
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_sites_csv(std::ostream& out, std::span<const Site> sites) {
  out << "site_x,site_y\n";
  for (const auto& s : sites) out << format_double(s.x) << ',' << format_double(s.y) << '\n';
}

void write_observations_csv(std::ostream& out, const SpatialDataset& data) {
  for (std::size_t s = 0; s < data.dim(); ++s) out << (s ? "," : "") << 's' << s + 1;
  out << '\n';
  for (const auto& z : data.observations()) {
    for (std::size_t s = 0; s < z.size(); ++s) out << (s ? "," : "") << format_double(z[s]);
    out << '\n';
  }
}

}  // namespace msvi
