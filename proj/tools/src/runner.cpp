#include "msvi/cli/runner.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "msvi/dataset.hpp"
#include "msvi/mle.hpp"
#include "msvi/parallel.hpp"
#include "msvi/simulate.hpp"
#include "msvi/vi.hpp"

namespace msvi::cli {
namespace {

constexpr std::uint64_t kSitesTag = 0x517e5;
constexpr std::uint64_t kDataTag = 0xda7a;
constexpr std::uint64_t kFitTag = 0xf17;
constexpr std::uint64_t kBootTag = 0xb0075;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

std::string fmt_value(double x) { return std::isnan(x) ? "nan" : format_double(x); }

std::string join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

class CsvFile {
 public:
  CsvFile(const ExperimentConfig& config, const std::string& name)
      : path_(config.out / name), out_(path_) {
    if (!out_) throw Error(fmt::format("cannot write '{}'", path_.string()));
    out_ << provenance_line(config) << '\n';
  }
  std::ostream& stream() { return out_; }
  void row(const std::vector<std::string>& cells) { out_ << join(cells) << '\n'; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

MvnOptions mvn_options(const ExperimentConfig& c) {
  return MvnOptions{.abs_accuracy = c.mvn_accuracy, .max_points = c.mvn_max_points,
                    .shifts = c.mvn_shifts};
}

std::vector<Site> random_sites(std::size_t dim, RandomStream& rng) {
  std::vector<Site> sites(dim);
  for (auto& s : sites) {
    s.x = rng.uniform();
    s.y = rng.uniform();
  }
  return sites;
}

/// Model with the given parameter values; Brown-Resnick gets a setup for `sites`.
ModelParams make_params(const ExperimentConfig& c, std::span<const double> values,
                        const std::vector<Site>& sites) {
  if (c.model == ModelKind::logistic) return LogisticParams{values[0]};
  return BrownResnickParams{values[0], values[1], BrownResnickSetup::make(sites, mvn_options(c))};
}

ModelParams start_params(const ExperimentConfig& c, const ModelParams& like) {
  if (c.model == ModelKind::logistic) return LogisticParams{c.theta_init};
  auto br = std::get<BrownResnickParams>(like);
  br.range = c.range_init;
  br.smoothness = c.smoothness_init;
  return br;
}

std::vector<double> truth_values(const ExperimentConfig& c) {
  if (c.model == ModelKind::logistic) return {c.theta};
  return {c.range, c.smoothness};
}

VIConfig vi_config(const ExperimentConfig& c, const ModelParams& start, std::size_t M,
                   std::uint64_t seed) {
  VIConfig v;
  v.M = M;
  v.R = c.R;
  v.lr_theta = c.lr_theta;
  v.lr_phi = c.lr_phi;
  v.momentum = c.momentum;
  v.batch = c.batch;
  v.seed = seed;
  v.init_model = start;
  v.init_epa = EpaParams{c.alpha_init, c.delta_init, c.rho_init};
  v.distance = c.distance;
  v.record_wall_time = c.record_wall_time;
  v.tail_fraction = c.tail_fraction;
  return v;
}

struct LoadedData {
  SpatialDataset data;
  std::vector<SetPartition> partitions;
  ModelParams like = LogisticParams{};  // carries the Brown-Resnick setup
};

LoadedData load_or_simulate(const ExperimentConfig& c, std::ostream& log) {
  LoadedData out;
  std::vector<Site> sites = c.sites;
  if (!c.sites_file.empty()) sites = read_sites_csv(c.sites_file);
  if (!c.data_file.empty()) {
    auto rows = read_observations_csv(c.data_file);
    if (sites.empty()) {
      if (c.model == ModelKind::brown_resnick) {
        throw ConfigError("Brown-Resnick data needs sites or sites_file");
      }
      const std::size_t dim = rows.empty() ? 0 : rows.front().size();
      for (std::size_t i = 0; i < dim; ++i) sites.push_back({static_cast<double>(i), 0.0});
    }
    out.data = validate_dataset(sites, std::move(rows));
    log << fmt::format("loaded {} replicates at {} sites from {}\n", out.data.replicates(),
                       out.data.dim(), c.data_file.string());
    out.like = make_params(c, truth_values(c), sites);
    return out;
  }
  if (sites.empty()) {
    auto rng = RandomStream::derive(c.seed, {kSitesTag});
    sites = random_sites(c.D, rng);
  }
  const ModelParams truth = make_params(c, truth_values(c), sites);
  auto rng = RandomStream::derive(c.seed, {kDataTag});
  SimulationRequest req{truth, sites, c.n, rng(), c.record_partitions};
  auto sim = simulate(req);
  out.data = std::move(sim.data);
  out.partitions = std::move(sim.partitions);
  out.like = truth;
  log << fmt::format("simulated {} replicates at {} sites\n", out.data.replicates(),
                     out.data.dim());
  return out;
}

void write_trace(const ExperimentConfig& c, const FitTrace& trace, const std::string& name) {
  CsvFile csv(c, name);
  std::vector<std::string> header{"iter"};
  for (const auto& p : param_names(trace.kind)) header.push_back(p);
  for (const char* s : {"alpha", "delta", "rho", "iwae", "grad_norm_theta", "grad_norm_phi",
                        "skipped", "wall_ms"}) {
    header.emplace_back(s);
  }
  csv.row(header);
  for (const auto& r : trace.rows) {
    std::vector<std::string> cells{std::to_string(r.iter)};
    for (double v : r.model) cells.push_back(fmt_value(v));
    cells.push_back(fmt_value(r.epa.alpha));
    cells.push_back(fmt_value(r.epa.delta));
    cells.push_back(fmt_value(r.epa.rho));
    cells.push_back(fmt_value(r.iwae));
    cells.push_back(fmt_value(r.grad_norm_theta));
    cells.push_back(fmt_value(r.grad_norm_phi));
    cells.push_back(r.skipped ? "1" : "0");
    cells.push_back(fmt_value(r.wall_ms));
    csv.row(cells);
  }
}

int run_simulate(const ExperimentConfig& c, std::ostream& log) {
  const LoadedData d = load_or_simulate(c, log);
  {
    CsvFile csv(c, "sites.csv");
    write_sites_csv(csv.stream(), d.data.sites());
  }
  {
    CsvFile csv(c, "observations.csv");
    write_observations_csv(csv.stream(), d.data);
  }
  if (c.record_partitions) {
    CsvFile csv(c, "partitions.csv");
    csv.row({"replicate", "partition"});
    for (std::size_t i = 0; i < d.partitions.size(); ++i) {
      csv.row({std::to_string(i + 1), d.partitions[i].to_string()});
    }
  }
  return kExitOk;
}

int run_fit(const ExperimentConfig& c, std::ostream& log) {
  const LoadedData d = load_or_simulate(c, log);
  const ModelParams start = start_params(c, d.like);
  auto rng = RandomStream::derive(c.seed, {kFitTag});
  VIConfig v = vi_config(c, start, c.M, rng());
  v.threads = c.threads;
  FitTrace trace;
  int status = kExitOk;
  try {
    trace = fit(d.data, v);
  } catch (const FitAborted& e) {
    log << "error: " << e.what() << '\n';
    trace = e.trace();
    status = kExitAllFailed;
  }
  write_trace(c, trace, "trace.csv");
  CsvFile csv(c, "estimate.csv");
  csv.row({"param", "value"});
  const auto names = param_names(trace.kind);
  const auto values = param_values(trace.estimate);
  for (std::size_t j = 0; j < names.size(); ++j) csv.row({names[j], fmt_value(values[j])});
  csv.row({"alpha", fmt_value(trace.final_epa.alpha)});
  csv.row({"delta", fmt_value(trace.final_epa.delta)});
  csv.row({"rho", fmt_value(trace.final_epa.rho)});
  csv.row({"skipped", std::to_string(trace.skipped)});
  log << fmt::format("fit finished: {} iterations, {} skipped\n", trace.rows.size(),
                     trace.skipped);
  return status;
}

int run_mle(const ExperimentConfig& c, std::ostream& log) {
  const LoadedData d = load_or_simulate(c, log);
  const ModelParams start = start_params(c, d.like);
  MleOptions opt;
  opt.tolerance = c.mle_tolerance;
  opt.threads = c.threads;
  const MleResult res = fit_mle(d.data, start, MleBounds::defaults(c.model), opt);
  CsvFile csv(c, "mle.csv");
  std::vector<std::string> header = param_names(c.model);
  for (const char* s : {"loglik", "evaluations", "converged"}) header.emplace_back(s);
  csv.row(header);
  std::vector<std::string> cells;
  for (double v : param_values(res.params)) cells.push_back(fmt_value(v));
  cells.push_back(fmt_value(res.loglik));
  cells.push_back(std::to_string(res.evaluations));
  cells.push_back(res.converged ? "1" : "0");
  csv.row(cells);
  if (!res.converged) {
    log << "mle did not converge: " << res.message << '\n';
    return std::isfinite(res.loglik) ? kExitOk : kExitAllFailed;
  }
  return kExitOk;
}

// ---- sweep -----------------------------------------------------------------

struct Estimate {
  std::vector<double> values;  // empty on failure
  std::string error;
};

struct SweepJob {
  std::size_t dim = 0;
  std::vector<double> truth;
  std::size_t rep = 0;
  std::optional<Estimate> mle;
  std::vector<Estimate> vi;  // one per M value
  std::string log;
};

std::string scenario_label(const ExperimentConfig& c, std::size_t dim,
                           std::span<const double> truth) {
  const auto names = param_names(c.model);
  std::string s = fmt::format("D={}", dim);
  for (std::size_t j = 0; j < names.size(); ++j) {
    s += fmt::format(" {}={}", names[j], format_double(truth[j]));
  }
  return s;
}

void run_sweep_job(const ExperimentConfig& c, const std::vector<std::size_t>& m_values,
                   SweepJob& job) {
  auto data_rng = RandomStream::derive(
      c.seed, {kDataTag, job.dim, bits(job.truth[0]),
               job.truth.size() > 1 ? bits(job.truth[1]) : 0, job.rep});
  std::vector<Site> sites = c.sites.size() == job.dim ? c.sites : random_sites(job.dim, data_rng);
  const ModelParams truth = make_params(c, job.truth, sites);
  SimulationRequest req{truth, sites, c.n, data_rng(), false};
  const SpatialDataset data = simulate(req).data;
  const ModelParams start = start_params(c, truth);

  if (c.run_mle) {
    Estimate e;
    try {
      MleOptions opt;
      opt.tolerance = c.mle_tolerance;
      const MleResult res = fit_mle(data, start, MleBounds::defaults(c.model), opt);
      if (std::isfinite(res.loglik)) {
        e.values = param_values(res.params);
        if (!res.converged) job.log += fmt::format("rep {}: mle: {}\n", job.rep + 1, res.message);
      } else {
        e.error = res.message;
      }
    } catch (const std::exception& ex) {
      e.error = ex.what();
    }
    if (!e.error.empty()) job.log += fmt::format("rep {}: mle failed: {}\n", job.rep + 1, e.error);
    job.mle = std::move(e);
  }
  if (c.run_vi) {
    for (std::size_t M : m_values) {
      auto fit_rng = RandomStream::derive(
          c.seed, {kFitTag, job.dim, bits(job.truth[0]),
                   job.truth.size() > 1 ? bits(job.truth[1]) : 0, M, job.rep});
      Estimate e;
      try {
        const FitTrace trace = fit(data, vi_config(c, start, M, fit_rng()));
        e.values = param_values(trace.estimate);
        if (trace.skipped > 0) {
          job.log += fmt::format("rep {}: vi M={}: {} iterations skipped\n", job.rep + 1, M,
                                 trace.skipped);
        }
      } catch (const std::exception& ex) {
        e.error = ex.what();
        job.log += fmt::format("rep {}: vi M={} failed: {}\n", job.rep + 1, M, e.error);
      }
      job.vi.push_back(std::move(e));
    }
  }
}

int run_sweep(const ExperimentConfig& c, std::ostream& log) {
  const std::vector<std::size_t> dims =
      !c.D_values.empty() ? c.D_values
                          : std::vector<std::size_t>{c.sites.empty() ? c.D : c.sites.size()};
  const std::vector<std::size_t> m_values =
      c.M_values.empty() ? std::vector<std::size_t>{c.M} : c.M_values;
  std::vector<std::vector<double>> truths;
  if (c.model == ModelKind::logistic) {
    for (double t : c.theta_values.empty() ? std::vector<double>{c.theta} : c.theta_values) {
      truths.push_back({t});
    }
  } else {
    const auto ranges = c.range_values.empty() ? std::vector<double>{c.range} : c.range_values;
    const auto smooths =
        c.smoothness_values.empty() ? std::vector<double>{c.smoothness} : c.smoothness_values;
    for (double r : ranges) {
      for (double s : smooths) truths.push_back({r, s});
    }
  }

  std::vector<SweepJob> jobs;
  for (std::size_t dim : dims) {
    for (const auto& t : truths) {
      for (std::size_t rep = 0; rep < c.replications; ++rep) {
        SweepJob job;
        job.dim = dim;
        job.truth = t;
        job.rep = rep;
        jobs.push_back(std::move(job));
      }
    }
  }
  log << fmt::format("sweep: {} datasets x {} M values\n", jobs.size(), m_values.size());

  ThreadPool pool(c.threads);
  pool.parallel_for(jobs.size(), [&](std::size_t i) { run_sweep_job(c, m_values, jobs[i]); });
  for (const auto& job : jobs) log << job.log;

  // Group estimates by (scenario, estimator, param) in a fixed order.
  struct Group {
    std::string scenario;
    std::string estimator;
    std::string param;
    std::vector<std::size_t> reps;
    std::vector<double> values;  // NaN for failures
  };
  std::vector<Group> groups;
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> index;
  auto add = [&](const std::string& scenario, const std::string& estimator,
                 const std::string& param, std::size_t rep, double value) {
    const auto key = std::make_tuple(scenario, estimator, param);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, groups.size()).first;
      groups.push_back({scenario, estimator, param, {}, {}});
    }
    groups[it->second].reps.push_back(rep);
    groups[it->second].values.push_back(value);
  };
  const auto names = param_names(c.model);
  std::size_t attempts = 0;
  std::size_t failures = 0;
  for (const auto& job : jobs) {
    const std::string base = scenario_label(c, job.dim, job.truth);
    if (job.mle) {
      ++attempts;
      failures += job.mle->values.empty() ? 1 : 0;
      for (std::size_t j = 0; j < names.size(); ++j) {
        add(base, "mle", names[j], job.rep, job.mle->values.empty() ? kNaN : job.mle->values[j]);
      }
    }
    for (std::size_t m = 0; m < job.vi.size(); ++m) {
      ++attempts;
      failures += job.vi[m].values.empty() ? 1 : 0;
      const std::string scenario = fmt::format("{} M={}", base, m_values[m]);
      for (std::size_t j = 0; j < names.size(); ++j) {
        add(scenario, "vi", names[j], job.rep,
            job.vi[m].values.empty() ? kNaN : job.vi[m].values[j]);
      }
    }
  }

  CsvFile reps_csv(c, "replications.csv");
  reps_csv.row({"scenario", "estimator", "rep", "param", "estimate", "status", "flagged"});
  CsvFile summary_csv(c, "summary.csv");
  summary_csv.row({"scenario", "estimator", "param", "mean", "sd", "ci_lo", "ci_hi", "n_reps",
                   "n_failed"});
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const Group& grp = groups[g];
    std::vector<double> ok;
    for (double v : grp.values) {
      if (!std::isnan(v)) ok.push_back(v);
    }
    const std::vector<bool> flags = flag_outliers(ok);
    std::size_t k = 0;
    for (std::size_t i = 0; i < grp.values.size(); ++i) {
      const bool failed = std::isnan(grp.values[i]);
      const bool flagged = !failed && flags[k++];
      reps_csv.row({grp.scenario, grp.estimator, std::to_string(grp.reps[i] + 1), grp.param,
                    fmt_value(grp.values[i]), failed ? "failed" : "ok", flagged ? "1" : "0"});
    }
    auto rng = RandomStream::derive(c.seed, {kBootTag, g});
    const SummaryStats s = summarize(ok, rng);
    summary_csv.row({grp.scenario, grp.estimator, grp.param, fmt_value(s.mean), fmt_value(s.sd),
                     fmt_value(s.ci_lo), fmt_value(s.ci_hi), std::to_string(s.n),
                     std::to_string(grp.values.size() - ok.size())});
  }
  if (attempts > 0 && failures == attempts) {
    log << "error: every replication failed\n";
    return kExitAllFailed;
  }
  return kExitOk;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) return kNaN;
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

SummaryStats summarize(std::span<const double> values, RandomStream& rng,
                       std::size_t resamples) {
  SummaryStats s;
  s.n = values.size();
  if (values.empty()) {
    s.mean = s.sd = s.ci_lo = s.ci_hi = kNaN;
    return s;
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
  } else {
    s.sd = kNaN;
  }
  std::vector<double> means(resamples);
  for (auto& m : means) {
    double acc = 0.0;
    for (std::size_t i = 0; i < s.n; ++i) acc += values[rng.below(s.n)];
    m = acc / static_cast<double>(s.n);
  }
  std::sort(means.begin(), means.end());
  s.ci_lo = quantile_sorted(means, 0.025);
  s.ci_hi = quantile_sorted(means, 0.975);
  return s;
}

std::vector<bool> flag_outliers(std::span<const double> values) {
  std::vector<bool> flags(values.size(), false);
  if (values.size() < 4) return flags;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile_sorted(sorted, 0.25);
  const double q3 = quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  for (std::size_t i = 0; i < values.size(); ++i) {
    flags[i] = values[i] < q1 - 3.0 * iqr || values[i] > q3 + 3.0 * iqr;
  }
  return flags;
}

int run_experiment(const ExperimentConfig& config, std::ostream& log) {
  std::filesystem::create_directories(config.out);
  log << fmt::format("msvi {}: {} ({}), seed {}\n", MSVI_VERSION, to_string(config.command),
                     to_string(config.model), config.seed);
  echo_defaults(config, log);
  switch (config.command) {
    case Command::simulate: return run_simulate(config, log);
    case Command::fit: return run_fit(config, log);
    case Command::mle: return run_mle(config, log);
    case Command::sweep: return run_sweep(config, log);
  }
  return kExitFailure;
}

}  // namespace msvi::cli
