#pragma once

// Multi-seed experiment driver: runs independent replicates of one solver
// configuration (replicate r uses seed base_seed + r), aggregates precision
// statistics, and writes machine-readable artifacts.  Also provides the
// hyperparameter-ablation driver and the solver-comparison presets.
//
// Artifact layout per experiment directory:
//   summary.json        config echo + aggregate results + provenance
//   per_seed.csv        seed, precision, iterations, runtime_s, stop_reason
//   trace_<seed>.csv    per-iteration trace (full verbosity only)
// All floating-point values are serialized with 17 significant digits, so
// identical (config, seed) pairs produce byte-identical files up to the
// wall-clock runtime fields.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include "cb2o/baselines.hpp"
#include "cb2o/dynamics.hpp"
#include "cb2o/ensemble.hpp"
#include "cb2o/errors.hpp"
#include "cb2o/problems.hpp"

#ifndef CB2O_GIT_HASH
#define CB2O_GIT_HASH "unknown"
#endif

namespace cb2o {

enum class SolverKind { Cb2o, PenalizedCbo, AdaptivePenalizedCbo, CboGradientForce, ProjectedCbo };

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Cb2o: return "cb2o";
    case SolverKind::PenalizedCbo: return "penalized-cbo";
    case SolverKind::AdaptivePenalizedCbo: return "adaptive-penalized-cbo";
    case SolverKind::CboGradientForce: return "cbo-gradient-force";
    default: return "projected-cbo";
  }
}

inline SolverKind parse_solver_kind(const std::string& name) {
  for (SolverKind k : {SolverKind::Cb2o, SolverKind::PenalizedCbo,
                       SolverKind::AdaptivePenalizedCbo, SolverKind::CboGradientForce,
                       SolverKind::ProjectedCbo})
    if (name == to_string(k)) return k;
  throw ConfigError("unknown solver '" + name +
                    "' (known: cb2o, penalized-cbo, adaptive-penalized-cbo, "
                    "cbo-gradient-force, projected-cbo)");
}

// Full description of one solver run: which method, the shared dynamics
// parameters, and the method-specific knobs.
struct SolverSpec {
  SolverKind kind = SolverKind::Cb2o;
  std::size_t n_particles = 100;
  Cb2oParams params;
  double chi = 100.0;                // penalized / gradient-force strength
  AdaptivePenalizedParams adaptive;  // adaptive-penalized settings
};

struct ExperimentConfig {
  std::string benchmark;  // registry key, e.g. "ackley-circle"
  SolverSpec solver;
  std::size_t n_seeds = 100;
  std::uint64_t base_seed = 1;
  std::string out_dir;  // empty: no files written
  TraceMode trace_mode = TraceMode::Summary;
  std::size_t workers = 1;
  std::optional<InitSpec> init;  // default: the benchmark's default init
};

struct ReplicateResult {
  std::uint64_t seed = 0;
  double precision = std::numeric_limits<double>::quiet_NaN();
  std::size_t iterations = 0;
  double runtime_s = 0.0;
  StopReason stop_reason = StopReason::MaxIters;
  std::string error_message;
};

struct PrecisionSummary {
  std::string benchmark;
  std::string solver;
  std::size_t n_particles = 0;
  std::size_t n_seeds = 0;
  std::size_t n_failed = 0;
  double mean_precision = std::numeric_limits<double>::quiet_NaN();
  double std_precision = std::numeric_limits<double>::quiet_NaN();
  double min_precision = std::numeric_limits<double>::quiet_NaN();
  double max_precision = std::numeric_limits<double>::quiet_NaN();
  double mean_iterations = std::numeric_limits<double>::quiet_NaN();
  double mean_runtime_s = std::numeric_limits<double>::quiet_NaN();
  std::vector<ReplicateResult> per_seed;
};

namespace detail {

// 17-significant-digit rendering; the common serialization for JSON and CSV.
inline std::string fmt17(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no non-finite literals; map them to null.
inline std::string json_number(double v) { return std::isfinite(v) ? fmt17(v) : "null"; }

// Short human-oriented rendering for directory names and labels.
inline std::string fmt_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

inline std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string describe_init(const InitSpec& init) {
  if (std::holds_alternative<GaussianInit>(init)) return "gaussian";
  if (const auto* u = std::get_if<UniformBoxInit>(&init))
    return "uniform[" + fmt17(u->lo) + "," + fmt17(u->hi) + "]";
  return "points(" + std::to_string(std::get<PointsInit>(init).points.size()) + ")";
}

// One replicate of the configured solver.  Never throws: configuration has
// been validated up front, and runtime failures come back as error rows.
inline ReplicateResult run_replicate(const problems::BenchmarkSpec& bench, const ExperimentConfig& cfg,
                                     std::uint64_t seed, RunTrace* trace_out) {
  const SolverSpec& s = cfg.solver;
  const InitSpec& init = cfg.init ? *cfg.init : bench.default_init;
  const TraceMode mode = trace_out ? TraceMode::Full : TraceMode::Summary;
  ReplicateResult row;
  row.seed = seed;
  try {
    RunTrace tr;
    switch (s.kind) {
      case SolverKind::Cb2o:
        tr = run(bench.problem, bench.dim, s.n_particles, s.params, init, seed, mode);
        break;
      case SolverKind::PenalizedCbo:
        tr = penalized_cbo_run(bench.problem, bench.dim, s.n_particles, s.chi, s.params, init,
                               seed, mode);
        break;
      case SolverKind::AdaptivePenalizedCbo:
        tr = adaptive_penalized_cbo_run(bench.problem, bench.dim, s.n_particles, s.adaptive,
                                        s.params, init, seed, mode)
                 .trace;
        break;
      case SolverKind::CboGradientForce:
        tr = cbo_gradient_force_run(bench.problem, bench.dim, s.n_particles, s.chi, s.params,
                                    init, seed, mode);
        break;
      case SolverKind::ProjectedCbo:
        tr = projected_cbo_run(bench.problem, bench.dim, s.n_particles, s.params, init, seed,
                               mode);
        break;
    }
    row.precision = tr.summary.final_precision;
    row.iterations = tr.summary.iterations;
    row.runtime_s = tr.summary.runtime_s;
    row.stop_reason = tr.summary.stop_reason;
    row.error_message = tr.summary.error_message;
    if (trace_out) *trace_out = std::move(tr);
  } catch (const std::exception& ex) {
    row.stop_reason = StopReason::Error;
    row.error_message = ex.what();
  }
  return row;
}

inline void write_trace_csv(const std::filesystem::path& path, const RunTrace& tr) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "iter,t";
  for (std::size_t j = 0; j < tr.dim; ++j)
    out << ",m_" << (j == 0 ? "x" : j == 1 ? "y" : std::to_string(j));
  out << ",c_stop,L_m,G_m,precision\n";
  for (std::size_t k = 0; k < tr.records(); ++k) {
    out << tr.iter[k] << ',' << fmt17(tr.t[k]);
    const auto m = tr.consensus_at(k);
    for (double v : m) out << ',' << fmt17(v);
    out << ',' << fmt17(tr.c_stop[k]) << ',' << fmt17(tr.lower_at_m[k]) << ','
        << fmt17(tr.upper_at_m[k]) << ',' << fmt17(tr.precision[k]) << '\n';
  }
}

// Configuration echo + results, with a fixed key order so identical runs
// serialize to identical bytes (modulo the wall-clock fields).
inline std::string summary_json(const ExperimentConfig& cfg, const problems::BenchmarkSpec& bench,
                                const PrecisionSummary& s) {
  const SolverSpec& sp = cfg.solver;
  const Cb2oParams& p = sp.params;
  std::ostringstream j;
  j << "{\n";
  j << "  \"schema\": \"cb2o-summary-v1\",\n";
  j << "  \"git_hash\": \"" << json_escape(CB2O_GIT_HASH) << "\",\n";
  j << "  \"benchmark\": \"" << json_escape(s.benchmark) << "\",\n";
  j << "  \"solver\": \"" << to_string(sp.kind) << "\",\n";
  j << "  \"config\": {\n";
  j << "    \"n_particles\": " << sp.n_particles << ",\n";
  j << "    \"n_seeds\": " << cfg.n_seeds << ",\n";
  j << "    \"base_seed\": " << cfg.base_seed << ",\n";
  j << "    \"trace_mode\": \"" << (cfg.trace_mode == TraceMode::Full ? "full" : "summary")
    << "\",\n";
  j << "    \"init\": \"" << json_escape(describe_init(cfg.init ? *cfg.init : bench.default_init))
    << "\",\n";
  j << "    \"params\": {\n";
  j << "      \"lambda\": " << json_number(p.lambda) << ",\n";
  j << "      \"sigma\": " << json_number(p.sigma) << ",\n";
  j << "      \"alpha\": " << json_number(p.alpha) << ",\n";
  j << "      \"beta\": " << json_number(p.beta) << ",\n";
  j << "      \"dt\": " << json_number(p.dt) << ",\n";
  j << "      \"eps_stop\": " << json_number(p.eps_stop) << ",\n";
  j << "      \"max_iters\": " << p.max_iters << ",\n";
  j << "      \"diffusion\": \"" << to_string(p.diffusion) << "\",\n";
  j << "      \"lambda_grad\": " << json_number(p.lambda_grad) << ",\n";
  j << "      \"sigma_grad\": " << json_number(p.sigma_grad);
  if (p.regularized) {
    j << ",\n      \"regularized\": {\"radius\": " << json_number(p.regularized->radius)
      << ", \"delta_q\": " << json_number(p.regularized->delta_q) << "}";
  }
  if (p.reinit_patience) j << ",\n      \"reinit_patience\": " << *p.reinit_patience;
  if (p.schedules) {
    const ScheduleSpec& sc = *p.schedules;
    j << ",\n      \"schedules\": {\"epoch_len\": " << sc.epoch_len;
    if (sc.alpha_factor) j << ", \"alpha_factor\": " << json_number(*sc.alpha_factor);
    if (sc.sigma0) j << ", \"sigma0\": " << json_number(*sc.sigma0);
    if (sc.beta_floor)
      j << ", \"beta0\": " << json_number(sc.beta_floor->beta0)
        << ", \"beta_kappa\": " << json_number(sc.beta_floor->kappa)
        << ", \"beta_min\": " << json_number(sc.beta_floor->beta_min);
    j << "}";
  }
  j << "\n    }";
  if (sp.kind == SolverKind::PenalizedCbo || sp.kind == SolverKind::CboGradientForce)
    j << ",\n    \"chi\": " << json_number(sp.chi);
  if (sp.kind == SolverKind::AdaptivePenalizedCbo)
    j << ",\n    \"adaptive\": {\"chi0\": " << json_number(sp.adaptive.chi0)
      << ", \"eta_chi\": " << json_number(sp.adaptive.eta_chi)
      << ", \"zeta0\": " << json_number(sp.adaptive.zeta0)
      << ", \"eta_zeta\": " << json_number(sp.adaptive.eta_zeta)
      << ", \"update_every\": " << sp.adaptive.update_every << "}";
  j << "\n  },\n";
  j << "  \"results\": {\n";
  j << "    \"n_failed\": " << s.n_failed << ",\n";
  j << "    \"partial\": " << (s.n_failed > 0 ? "true" : "false") << ",\n";
  j << "    \"mean_precision\": " << json_number(s.mean_precision) << ",\n";
  j << "    \"std_precision\": " << json_number(s.std_precision) << ",\n";
  j << "    \"min_precision\": " << json_number(s.min_precision) << ",\n";
  j << "    \"max_precision\": " << json_number(s.max_precision) << ",\n";
  j << "    \"mean_iterations\": " << json_number(s.mean_iterations) << ",\n";
  j << "    \"mean_runtime_s\": " << json_number(s.mean_runtime_s) << "\n";
  j << "  }\n";
  j << "}\n";
  return j.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

// Fail fast on invalid configuration (before any replicate runs); the CLI
// maps these throws to exit code 2.
inline void validate_experiment(const ExperimentConfig& cfg, const problems::BenchmarkSpec& bench) {
  if (cfg.n_seeds < 1) throw ConfigError("n_seeds must be >= 1");
  const SolverSpec& s = cfg.solver;
  if (s.n_particles < 2) throw ConfigError("need at least 2 particles");
  validate_params(s.params, bench.dim, bench.problem.lower_grad != nullptr);
  switch (s.kind) {
    case SolverKind::Cb2o:
      quantile_count(s.params.beta, s.n_particles);  // enforces beta >= beta_min = 2/N
      break;
    case SolverKind::PenalizedCbo:
      if (!std::isfinite(s.chi) || s.chi < 0.0) throw ConfigError("chi must be finite and >= 0");
      break;
    case SolverKind::AdaptivePenalizedCbo:
      validate_adaptive(s.adaptive);
      break;
    case SolverKind::CboGradientForce:
      if (!std::isfinite(s.chi) || s.chi < 0.0) throw ConfigError("chi must be finite and >= 0");
      if (s.chi > 0.0 && !bench.problem.lower_grad)
        throw ConfigError("gradient force requires a lower-level gradient; benchmark '" +
                          bench.name + "' has none");
      break;
    case SolverKind::ProjectedCbo:
      if (!bench.problem.project)
        throw ConfigError("projected CBO requires a projection operator; benchmark '" +
                          bench.name + "' has none");
      break;
  }
}

}  // namespace detail

// Run cfg.n_seeds independent replicates (replicate r is seeded with
// base_seed + r, so results are independent of execution order and worker
// count), aggregate precision statistics over the non-failed replicates, and
// write artifacts when an output directory is configured.
inline PrecisionSummary run_experiment(const ExperimentConfig& cfg) {
  const problems::BenchmarkSpec& bench = problems::get_benchmark(cfg.benchmark);
  detail::validate_experiment(cfg, bench);

  const bool want_files = !cfg.out_dir.empty();
  const bool want_traces = want_files && cfg.trace_mode == TraceMode::Full;
  const std::filesystem::path dir = cfg.out_dir;
  if (want_files) std::filesystem::create_directories(dir);

  const std::size_t n = cfg.n_seeds;
  std::vector<ReplicateResult> rows(n);

  // Worker threads pull replicate indices from a shared counter; each writes
  // only its own row (and its own trace file), so no locking is needed and
  // the aggregate below is independent of scheduling.
  auto work_one = [&](std::size_t r) {
    const std::uint64_t seed = cfg.base_seed + r;
    if (want_traces) {
      RunTrace tr;
      rows[r] = detail::run_replicate(bench, cfg, seed, &tr);
      if (rows[r].stop_reason != StopReason::Error || tr.records() > 0)
        detail::write_trace_csv(dir / ("trace_" + std::to_string(seed) + ".csv"), tr);
    } else {
      rows[r] = detail::run_replicate(bench, cfg, seed, nullptr);
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(cfg.workers, 1, n);
  if (workers == 1) {
    for (std::size_t r = 0; r < n; ++r) work_one(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t r = next.fetch_add(1); r < n; r = next.fetch_add(1)) work_one(r);
      });
    for (std::thread& t : pool) t.join();
  }

  PrecisionSummary s;
  s.benchmark = cfg.benchmark;
  s.solver = to_string(cfg.solver.kind);
  s.n_particles = cfg.solver.n_particles;
  s.n_seeds = n;
  double sum_p = 0.0, sum_iter = 0.0, sum_rt = 0.0;
  double mn = std::numeric_limits<double>::infinity();
  double mx = -std::numeric_limits<double>::infinity();
  std::size_t ok = 0;
  for (const ReplicateResult& r : rows) {
    if (r.stop_reason == StopReason::Error) {
      ++s.n_failed;
      continue;
    }
    ++ok;
    sum_p += r.precision;
    sum_iter += static_cast<double>(r.iterations);
    sum_rt += r.runtime_s;
    mn = std::min(mn, r.precision);
    mx = std::max(mx, r.precision);
  }
  if (ok > 0) {
    s.mean_precision = sum_p / static_cast<double>(ok);
    s.mean_iterations = sum_iter / static_cast<double>(ok);
    s.mean_runtime_s = sum_rt / static_cast<double>(ok);
    s.min_precision = mn;
    s.max_precision = mx;
    double ss = 0.0;
    for (const ReplicateResult& r : rows) {
      if (r.stop_reason == StopReason::Error) continue;
      const double d = r.precision - s.mean_precision;
      ss += d * d;
    }
    s.std_precision = std::sqrt(ss / static_cast<double>(ok));
  }
  s.per_seed = std::move(rows);

  if (want_files) {
    std::ostringstream csv;
    csv << "seed,precision,iterations,runtime_s,stop_reason\n";
    for (const ReplicateResult& r : s.per_seed)
      csv << r.seed << ',' << detail::fmt17(r.precision) << ',' << r.iterations << ','
          << detail::fmt17(r.runtime_s) << ',' << to_string(r.stop_reason) << '\n';
    detail::write_text_file(dir / "per_seed.csv", csv.str());
    detail::write_text_file(dir / "summary.json", detail::summary_json(cfg, bench, s));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Hyperparameter ablation around the reference configuration
// (N = 1000, beta = 1/20, alpha = 30, eps_stop = 0).

enum class AblationAxis { N, Beta, Alpha, EpsStop, JointNBeta };

inline const char* to_string(AblationAxis a) {
  switch (a) {
    case AblationAxis::N: return "N";
    case AblationAxis::Beta: return "beta";
    case AblationAxis::Alpha: return "alpha";
    case AblationAxis::EpsStop: return "eps_stop";
    default: return "joint_N_beta";
  }
}

inline AblationAxis parse_ablation_axis(const std::string& name) {
  for (AblationAxis a : {AblationAxis::N, AblationAxis::Beta, AblationAxis::Alpha,
                         AblationAxis::EpsStop, AblationAxis::JointNBeta})
    if (name == to_string(a)) return a;
  throw ConfigError("unknown ablation axis '" + name +
                    "' (known: N, beta, alpha, eps_stop, joint_N_beta)");
}

struct AblationGrid {
  ExperimentConfig reference;  // solver must be the main method
  AblationAxis axis = AblationAxis::Beta;
  std::vector<double> values;                         // scalar axes
  std::vector<std::pair<std::size_t, double>> joint;  // (N, beta) pairs, fixed beta*N
};

struct AblationCell {
  double value = 0.0;  // the varied scalar (N for the joint axis)
  double beta = 0.0;   // effective beta of the cell
  PrecisionSummary summary;
};

inline const ExperimentConfig& ablation_reference_config();

// One run_experiment per grid value, all other parameters at the reference.
// Returns the per-cell summaries; writes ablation_<axis>.csv (columns:
// value, mean_precision, mean_runtime_s) plus per-cell artifact directories
// when the reference config carries an output directory.
inline std::vector<AblationCell> run_ablation(const AblationGrid& grid) {
  if (grid.reference.solver.kind != SolverKind::Cb2o)
    throw ConfigError("ablation grids are defined for the main solver");
  const bool joint = grid.axis == AblationAxis::JointNBeta;
  if (joint) {
    if (grid.joint.empty()) throw ConfigError("joint_N_beta grid needs (N, beta) pairs");
    const double product =
        static_cast<double>(grid.joint.front().first) * grid.joint.front().second;
    for (const auto& [n, beta] : grid.joint)
      if (std::abs(static_cast<double>(n) * beta - product) > 1e-9 * std::max(1.0, product))
        throw ConfigError("joint_N_beta grid must keep beta*N fixed");
  } else if (grid.values.empty()) {
    throw ConfigError("ablation grid needs at least one value");
  }

  const std::string base_dir = grid.reference.out_dir;
  const std::size_t cells = joint ? grid.joint.size() : grid.values.size();
  std::vector<AblationCell> out;
  out.reserve(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    ExperimentConfig cfg = grid.reference;
    AblationCell cell;
    switch (grid.axis) {
      case AblationAxis::N:
        cell.value = grid.values[c];
        cfg.solver.n_particles = static_cast<std::size_t>(std::llround(grid.values[c]));
        break;
      case AblationAxis::Beta:
        cell.value = grid.values[c];
        cfg.solver.params.beta = grid.values[c];
        break;
      case AblationAxis::Alpha:
        cell.value = grid.values[c];
        cfg.solver.params.alpha = grid.values[c];
        break;
      case AblationAxis::EpsStop:
        cell.value = grid.values[c];
        cfg.solver.params.eps_stop = grid.values[c];
        break;
      case AblationAxis::JointNBeta:
        cell.value = static_cast<double>(grid.joint[c].first);
        cfg.solver.n_particles = grid.joint[c].first;
        cfg.solver.params.beta = grid.joint[c].second;
        break;
    }
    cell.beta = cfg.solver.params.beta;
    if (!base_dir.empty()) {
      std::string label = detail::fmt_label(cell.value);
      for (char& ch : label)
        if (ch == '.' || ch == '+' || ch == '-') ch = '_';
      cfg.out_dir = (std::filesystem::path(base_dir) /
                     (std::string(to_string(grid.axis)) + "_" + label))
                        .string();
    }
    cell.summary = run_experiment(cfg);
    out.push_back(std::move(cell));
  }

  if (!base_dir.empty()) {
    std::ostringstream csv;
    csv << "value,mean_precision,mean_runtime_s\n";
    for (const AblationCell& c : out)
      csv << detail::fmt17(c.value) << ',' << detail::fmt17(c.summary.mean_precision) << ','
          << detail::fmt17(c.summary.mean_runtime_s) << '\n';
    detail::write_text_file(std::filesystem::path(base_dir) /
                                ("ablation_" + std::string(to_string(grid.axis)) + ".csv"),
                            csv.str());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solver comparison with the benchmark presets.

enum class CompareMode { SameParticles, SameTime };

inline const char* to_string(CompareMode m) {
  return m == CompareMode::SameParticles ? "same-particles" : "same-time";
}

inline CompareMode parse_compare_mode(const std::string& name) {
  if (name == "same-particles") return CompareMode::SameParticles;
  if (name == "same-time") return CompareMode::SameTime;
  throw ConfigError("unknown compare mode '" + name + "' (known: same-particles, same-time)");
}

// Shared experiment parameters of the constrained benchmark campaign:
// lambda = 1, sigma = 1, alpha = 30, dt = 0.01, K = 30000 (T = 300);
// eps_stop = 0 on the circular constraint and 1e-3 on the star.
inline Cb2oParams benchmark_params(const std::string& benchmark) {
  Cb2oParams p;
  p.lambda = 1.0;
  p.sigma = 1.0;
  p.alpha = 30.0;
  p.dt = 0.01;
  p.max_iters = 30000;
  p.eps_stop = benchmark == "ackley-star" ? 1e-3 : 0.0;
  return p;
}

// Per-solver presets for the two comparison modes.  Equal-particles uses
// N = 100 everywhere; equal-time uses the per-solver particle counts of the
// equal-runtime tables.  The penalty strengths are chi = 100 for both the
// penalized and gradient-force methods on either constraint; the adaptive
// settings vary per campaign.  The projected method only exists where a
// projection operator does (circular).
inline std::vector<SolverSpec> comparison_presets(const std::string& benchmark,
                                                  CompareMode mode) {
  const bool star = benchmark == "ackley-star";
  const bool circular = benchmark == "ackley-circle";
  if (!star && !circular)
    throw ConfigError("comparison presets exist for ackley-circle and ackley-star only");
  const Cb2oParams shared = benchmark_params(benchmark);
  const bool same_n = mode == CompareMode::SameParticles;

  std::vector<SolverSpec> specs;
  auto add = [&](SolverKind kind, std::size_t n) {
    SolverSpec s;
    s.kind = kind;
    s.n_particles = n;
    s.params = shared;
    s.chi = 100.0;
    specs.push_back(std::move(s));
  };

  add(SolverKind::PenalizedCbo, same_n ? 100 : 500);
  add(SolverKind::AdaptivePenalizedCbo, same_n ? 100 : 500);
  // Presets update the penalty every 10 iterations: compounding the
  // multiplicative factors every iteration overflows double well before the
  // 30000-iteration budget, and a slower cadence lets the
  // ensemble collapse before the penalty reaches useful strength.
  if (same_n) {
    specs.back().adaptive = {1.0, 1.1, 0.1, 1.4, 10};
  } else {
    specs.back().adaptive = star ? AdaptivePenalizedParams{50.0, 1.05, 0.1, 1.4, 10}
                                 : AdaptivePenalizedParams{10.0, 1.05, 0.1, 1.4, 10};
  }
  add(SolverKind::CboGradientForce, same_n ? 100 : (star ? 500 : 50));
  if (circular) add(SolverKind::ProjectedCbo, same_n ? 100 : 80);
  add(SolverKind::Cb2o, same_n ? 100 : (star ? 2000 : 1500));
  specs.back().params.beta = same_n ? 1.0 / 20.0 : (star ? 1.0 / 40.0 : 1.0 / 30.0);
  return specs;
}

struct CompareRow {
  SolverSpec spec;
  PrecisionSummary summary;
};

// Run every preset solver on the benchmark with a shared seed block and
// write comparison.csv (solver, n_particles, mean_precision, mean_runtime_s)
// when an output directory is given.  `max_iters_override` scales every
// preset's iteration budget down (runtime-ordering checks at reduced K).
inline std::vector<CompareRow> compare_baselines(
    const std::string& benchmark, CompareMode mode, std::size_t n_seeds, std::uint64_t base_seed,
    const std::string& out_dir = "", std::size_t workers = 1,
    std::optional<std::size_t> max_iters_override = {}) {
  std::vector<CompareRow> rows;
  for (SolverSpec spec : comparison_presets(benchmark, mode)) {
    if (max_iters_override) spec.params.max_iters = *max_iters_override;
    ExperimentConfig cfg;
    cfg.benchmark = benchmark;
    cfg.solver = spec;
    cfg.n_seeds = n_seeds;
    cfg.base_seed = base_seed;
    cfg.workers = workers;
    if (!out_dir.empty())
      cfg.out_dir = (std::filesystem::path(out_dir) / to_string(spec.kind)).string();
    CompareRow row;
    row.spec = std::move(spec);
    row.summary = run_experiment(cfg);
    rows.push_back(std::move(row));
  }
  if (!out_dir.empty()) {
    std::ostringstream csv;
    csv << "solver,n_particles,mean_precision,mean_runtime_s\n";
    for (const CompareRow& r : rows)
      csv << to_string(r.spec.kind) << ',' << r.spec.n_particles << ','
          << detail::fmt17(r.summary.mean_precision) << ','
          << detail::fmt17(r.summary.mean_runtime_s) << '\n';
    detail::write_text_file(std::filesystem::path(out_dir) / "comparison.csv", csv.str());
  }
  return rows;
}

// Reference configuration of the ablation campaign: the main solver on the
// circular benchmark at N = 1000, beta = 1/20, alpha = 30, eps_stop = 0.
inline const ExperimentConfig& ablation_reference_config() {
  static const ExperimentConfig cfg = [] {
    ExperimentConfig c;
    c.benchmark = "ackley-circle";
    c.solver.kind = SolverKind::Cb2o;
    c.solver.n_particles = 1000;
    c.solver.params = benchmark_params("ackley-circle");
    c.solver.params.beta = 1.0 / 20.0;
    return c;
  }();
  return cfg;
}

}  // namespace cb2o
