#include "msvi/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "msvi/mle.hpp"

namespace msvi::cli {
namespace {

struct Located {
  std::string value;
  std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto pos = s.find(sep);
    out.push_back(trim(s.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    s.remove_prefix(pos + 1);
  }
  return out;
}

// Thrown by value parsers; rethrown with key and line attached.
struct BadValue {
  std::string why;
};

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{fmt::format("'{}' is not a number", s)};
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw BadValue{fmt::format("'{}' is not a non-negative integer", s)};
  }
  return v;
}

std::size_t parse_size(std::string_view s) { return static_cast<std::size_t>(parse_u64(s)); }

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw BadValue{fmt::format("'{}' is not a boolean", s)};
}

template <class T, class F>
std::vector<T> parse_list(std::string_view s, F parse_one) {
  std::vector<T> out;
  for (auto item : split(s, ',')) out.push_back(parse_one(item));
  if (out.empty()) throw BadValue{"empty list"};
  return out;
}

std::vector<Site> parse_sites(std::string_view s) {
  std::vector<Site> out;
  for (auto item : split(s, ';')) {
    std::istringstream in{std::string(item)};
    std::string x;
    std::string y;
    std::string extra;
    if (!(in >> x >> y) || (in >> extra)) {
      throw BadValue{fmt::format("site '{}' is not 'x y'", item)};
    }
    out.push_back({parse_double(x), parse_double(y)});
  }
  return out;
}

void require(bool ok, std::string why) {
  if (!ok) throw BadValue{std::move(why)};
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

struct KeySpec {
  std::string name;
  Setter set;
  std::optional<std::string> fallback;  // nullopt: no default
};

std::vector<KeySpec> key_table() {
  auto size_key = [](std::size_t ExperimentConfig::*field, std::size_t min) {
    return [field, min](ExperimentConfig& c, std::string_view v) {
      const std::size_t x = parse_size(v);
      require(x >= min, fmt::format("must be at least {}", min));
      c.*field = x;
    };
  };
  auto double_key = [](double ExperimentConfig::*field, std::function<bool(double)> ok,
                       std::string what) {
    return [field, ok, what](ExperimentConfig& c, std::string_view v) {
      const double x = parse_double(v);
      require(ok(x), fmt::format("{} (got {})", what, x));
      c.*field = x;
    };
  };
  auto bool_key = [](bool ExperimentConfig::*field) {
    return [field](ExperimentConfig& c, std::string_view v) { c.*field = parse_bool(v); };
  };
  auto path_key = [](std::filesystem::path ExperimentConfig::*field) {
    return [field](ExperimentConfig& c, std::string_view v) { c.*field = std::string(v); };
  };
  const auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  const auto non_negative = [](double x) { return x >= 0.0 && std::isfinite(x); };
  const auto open_unit = [](double x) { return x > 0.0 && x < 1.0; };

  return {
      {"command",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "simulate") c.command = Command::simulate;
         else if (v == "fit") c.command = Command::fit;
         else if (v == "mle") c.command = Command::mle;
         else if (v == "sweep") c.command = Command::sweep;
         else throw BadValue{fmt::format("'{}' is not one of simulate, fit, mle, sweep", v)};
       },
       std::nullopt},
      {"model",
       [](ExperimentConfig& c, std::string_view v) {
         try {
           c.model = parse_model_kind(std::string(v));
         } catch (const DomainError& e) {
           throw BadValue{e.what()};
         }
       },
       std::nullopt},
      {"D", size_key(&ExperimentConfig::D, 1), ""},
      {"n", size_key(&ExperimentConfig::n, 1), ""},
      {"sites", [](ExperimentConfig& c, std::string_view v) { c.sites = parse_sites(v); }, ""},
      {"sites_file", path_key(&ExperimentConfig::sites_file), ""},
      {"data_file", path_key(&ExperimentConfig::data_file), ""},
      {"theta", double_key(&ExperimentConfig::theta, [](double x) { return x > 0 && x <= 1; },
                           "theta must lie in (0, 1]"),
       std::nullopt},
      {"range", double_key(&ExperimentConfig::range, positive, "range must be positive"),
       std::nullopt},
      {"smoothness",
       double_key(&ExperimentConfig::smoothness, [](double x) { return x > 0 && x <= 2; },
                  "smoothness must lie in (0, 2]"),
       std::nullopt},
      {"theta_init", double_key(&ExperimentConfig::theta_init, open_unit,
                                "theta_init must lie in (0, 1)"),
       "0.6"},
      {"range_init",
       double_key(&ExperimentConfig::range_init, positive, "range_init must be positive"), "1"},
      {"smoothness_init",
       double_key(&ExperimentConfig::smoothness_init, [](double x) { return x > 0 && x < 2; },
                  "smoothness_init must lie in (0, 2)"),
       "1"},
      {"alpha", double_key(&ExperimentConfig::alpha_init, [](double x) { return std::isfinite(x); },
                           "alpha must be finite"),
       "0.5"},
      {"delta", double_key(&ExperimentConfig::delta_init, [](double x) { return x >= 0 && x < 1; },
                           "delta must lie in [0, 1)"),
       "0.5"},
      {"rho", double_key(&ExperimentConfig::rho_init, positive, "rho must be positive"), "1"},
      {"M", size_key(&ExperimentConfig::M, 1), "25"},
      {"R", size_key(&ExperimentConfig::R, 1), "5000"},
      {"lr_theta", double_key(&ExperimentConfig::lr_theta, non_negative,
                              "lr_theta must be finite and non-negative"),
       std::nullopt},
      {"lr_phi", double_key(&ExperimentConfig::lr_phi, non_negative,
                            "lr_phi must be finite and non-negative"),
       std::nullopt},
      {"momentum", double_key(&ExperimentConfig::momentum, [](double x) { return x >= 0 && x < 1; },
                              "momentum must lie in [0, 1)"),
       "0.9"},
      {"batch", size_key(&ExperimentConfig::batch, 0), "0"},
      {"distance",
       [](ExperimentConfig& c, std::string_view v) {
         if (v == "observation") c.distance = DistanceKind::observation;
         else if (v == "site") c.distance = DistanceKind::site;
         else throw BadValue{fmt::format("'{}' is not observation or site", v)};
       },
       "observation"},
      {"tail_fraction", double_key(&ExperimentConfig::tail_fraction,
                                   [](double x) { return x >= 0 && x < 1; },
                                   "tail_fraction must lie in [0, 1)"),
       "0"},
      {"record_wall_time", bool_key(&ExperimentConfig::record_wall_time), "false"},
      {"record_partitions", bool_key(&ExperimentConfig::record_partitions), "false"},
      {"mvn_accuracy", double_key(&ExperimentConfig::mvn_accuracy, non_negative,
                                  "mvn_accuracy must be non-negative"),
       "0"},
      {"mvn_max_points", size_key(&ExperimentConfig::mvn_max_points, 1), "256"},
      {"mvn_shifts", size_key(&ExperimentConfig::mvn_shifts, 2), "12"},
      {"mle_tolerance", double_key(&ExperimentConfig::mle_tolerance, positive,
                                   "mle_tolerance must be positive"),
       "1e-06"},
      {"replications", size_key(&ExperimentConfig::replications, 1), "1"},
      {"M_values",
       [](ExperimentConfig& c, std::string_view v) {
         c.M_values = parse_list<std::size_t>(v, parse_size);
         for (auto m : c.M_values) require(m >= 1, "every M must be at least 1");
       },
       ""},
      {"D_values",
       [](ExperimentConfig& c, std::string_view v) {
         c.D_values = parse_list<std::size_t>(v, parse_size);
         for (auto d : c.D_values) require(d >= 1 && d <= 64, "every D must lie in 1..64");
       },
       ""},
      {"theta_values",
       [](ExperimentConfig& c, std::string_view v) {
         c.theta_values = parse_list<double>(v, parse_double);
         for (double t : c.theta_values) require(t > 0 && t <= 1, "every theta must lie in (0, 1]");
       },
       ""},
      {"range_values",
       [](ExperimentConfig& c, std::string_view v) {
         c.range_values = parse_list<double>(v, parse_double);
         for (double t : c.range_values) require(t > 0, "every range must be positive");
       },
       ""},
      {"smoothness_values",
       [](ExperimentConfig& c, std::string_view v) {
         c.smoothness_values = parse_list<double>(v, parse_double);
         for (double t : c.smoothness_values) {
           require(t > 0 && t <= 2, "every smoothness must lie in (0, 2]");
         }
       },
       ""},
      {"estimators",
       [](ExperimentConfig& c, std::string_view v) {
         c.run_vi = false;
         c.run_mle = false;
         for (auto item : split(v, ',')) {
           if (item == "vi") c.run_vi = true;
           else if (item == "mle") c.run_mle = true;
           else throw BadValue{fmt::format("'{}' is not vi or mle", item)};
         }
       },
       "vi,mle"},
      {"seed", [](ExperimentConfig& c, std::string_view v) { c.seed = parse_u64(v); }, "0"},
      {"threads", size_key(&ExperimentConfig::threads, 1), "1"},
      {"out", path_key(&ExperimentConfig::out), "."},
  };
}

bool simulates_data(const ExperimentConfig& c) {
  return c.command == Command::sweep || c.data_file.empty();
}

void check_requirements(ExperimentConfig& c, const std::map<std::string, Located>& given,
                        std::string_view origin) {
  auto missing = [&](const std::string& key, std::string_view why) {
    throw ConfigError(fmt::format("{}: missing required key '{}' ({})", origin, key, why));
  };
  auto has = [&](const std::string& key) { return given.count(key) > 0; };
  auto fail = [&](const std::string& key, std::string_view why) {
    const auto it = given.find(key);
    if (it == given.end()) throw ConfigError(fmt::format("{}: {}: {}", origin, key, why));
    throw ConfigError(fmt::format("{}:{}: {}: {}", origin, it->second.line, key, why));
  };

  if (!has("command")) missing("command", "simulate, fit, mle or sweep");
  if (!has("model")) missing("model", "logistic or brown_resnick");

  const bool needs_vi = c.command == Command::fit || (c.command == Command::sweep && c.run_vi);
  if (needs_vi) {
    if (!has("lr_theta")) missing("lr_theta", "learning rates have no default");
    if (!has("lr_phi")) missing("lr_phi", "learning rates have no default");
  }
  if (simulates_data(c)) {
    if (c.command != Command::sweep || c.D_values.empty()) {
      if (c.D == 0 && c.sites.empty() && c.sites_file.empty()) {
        missing("D", "number of sites to simulate");
      }
    }
    if (c.n == 0) missing("n", "number of replicates to simulate");
    if (c.model == ModelKind::logistic) {
      if (!has("theta") && c.theta_values.empty()) missing("theta", "dependence used to simulate");
    } else {
      if (!has("range") && c.range_values.empty()) missing("range", "range used to simulate");
      if (!has("smoothness") && c.smoothness_values.empty()) {
        missing("smoothness", "smoothness used to simulate");
      }
    }
  }
  if (c.delta_init == 0.0) {
    fail("delta", "the optimizer starts in the open interval (0, 1)");
  }
  if (!(c.alpha_init > -c.delta_init)) fail("alpha", "alpha must exceed -delta");
  if (!c.sites.empty() && !c.sites_file.empty()) fail("sites", "give sites or sites_file, not both");
  if (!c.sites.empty() && c.D != 0 && c.sites.size() != c.D) {
    fail("sites", fmt::format("{} sites listed but D = {}", c.sites.size(), c.D));
  }
  if (c.D > 64) fail("D", "at most 64 sites are supported");
  if (c.batch != 0 && c.n != 0 && c.batch > c.n) {
    fail("batch", fmt::format("batch {} exceeds n = {}", c.batch, c.n));
  }
  if (c.record_partitions && c.model == ModelKind::logistic) {
    fail("record_partitions", "only the Brown-Resnick sampler records partitions");
  }
  if (c.command == Command::sweep && !c.run_vi && !c.run_mle) {
    fail("estimators", "nothing to run");
  }
  if (c.command == Command::sweep && !c.data_file.empty()) {
    fail("data_file", "sweep always simulates its datasets");
  }
  const bool brown_mle = c.model == ModelKind::brown_resnick &&
                         (c.command == Command::mle || (c.command == Command::sweep && c.run_mle));
  if (brown_mle) {
    std::vector<std::size_t> dims = c.D_values.empty() ? std::vector<std::size_t>{c.D} : c.D_values;
    if (!c.sites.empty()) dims = {c.sites.size()};
    for (auto d : dims) {
      if (d > kMaxBrownResnickMleDim) {
        fail(c.D_values.empty() ? "D" : "D_values",
             fmt::format("Brown-Resnick MLE enumerates partitions and needs D <= {}",
                         kMaxBrownResnickMleDim));
      }
    }
  }
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::simulate: return "simulate";
    case Command::fit: return "fit";
    case Command::mle: return "mle";
    case Command::sweep: return "sweep";
  }
  return "?";
}

ExperimentConfig parse_config(std::string_view text, std::string_view origin) {
  std::map<std::string, Located> given;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') continue;  // section headers are cosmetic
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected 'key = value', got '{}'", origin, line_no, line));
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError(fmt::format("{}:{}: empty key", origin, line_no));
    if (const auto it = given.find(key); it != given.end()) {
      throw ConfigError(fmt::format("{}:{}: key '{}' repeats line {}", origin, line_no, key,
                                    it->second.line));
    }
    given.emplace(key, Located{value, line_no});
  }

  const auto table = key_table();
  for (const auto& [key, loc] : given) {
    const bool known = std::any_of(table.begin(), table.end(),
                                   [&](const KeySpec& s) { return s.name == key; });
    if (!known) throw ConfigError(fmt::format("{}:{}: unknown key '{}'", origin, loc.line, key));
  }

  ExperimentConfig config;
  for (const auto& spec : table) {
    const auto it = given.find(spec.name);
    if (it != given.end()) {
      try {
        spec.set(config, it->second.value);
      } catch (const BadValue& bad) {
        throw ConfigError(fmt::format("{}:{}: {}: {}", origin, it->second.line, spec.name, bad.why));
      }
      config.entries.emplace_back(spec.name, it->second.value);
    } else if (spec.fallback) {
      if (!spec.fallback->empty()) spec.set(config, *spec.fallback);
      config.entries.emplace_back(spec.name, *spec.fallback);
      config.defaulted.push_back(spec.name);
    }
  }
  std::sort(config.entries.begin(), config.entries.end());
  check_requirements(config, given, origin);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentConfig config = parse_config(text.str(), path.string());
  const auto base = path.parent_path();
  for (auto* p : {&config.sites_file, &config.data_file}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
    if (!p->empty() && !std::filesystem::exists(*p)) {
      throw ConfigError(fmt::format("{}: file '{}' does not exist", path.string(), p->string()));
    }
  }
  return config;
}

void apply_overrides(ExperimentConfig& config, std::optional<std::uint64_t> seed,
                     std::optional<std::size_t> threads,
                     std::optional<std::filesystem::path> out) {
  auto set_entry = [&](const std::string& key, const std::string& value) {
    for (auto& [k, v] : config.entries) {
      if (k == key) v = value;
    }
    std::erase(config.defaulted, key);
  };
  if (seed) {
    config.seed = *seed;
    set_entry("seed", std::to_string(*seed));
  }
  if (threads) {
    if (*threads < 1) throw ConfigError("--threads must be at least 1");
    config.threads = *threads;
    set_entry("threads", std::to_string(*threads));
  }
  if (out) {
    config.out = *out;
    set_entry("out", out->string());
  }
}

std::uint64_t config_hash(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : config.entries) {
    if (k == "threads" || k == "out") continue;
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

std::string provenance_line(const ExperimentConfig& config) {
  return fmt::format("# msvi {} config_hash={:016x} seed={}", MSVI_VERSION, config_hash(config),
                     config.seed);
}

void echo_defaults(const ExperimentConfig& config, std::ostream& log) {
  for (const auto& key : config.defaulted) {
    for (const auto& [k, v] : config.entries) {
      if (k == key) log << "default: " << k << " = " << (v.empty() ? "(unset)" : v) << '\n';
    }
  }
}

}  // namespace msvi::cli
