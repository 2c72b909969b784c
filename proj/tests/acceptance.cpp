// Acceptance gate for the benchmark campaign.  Each numbered criterion runs
// the same presets the library and CLI ship, checks a band or ordering that
// is pinned here in code, and contributes one [PASS]/[FAIL] line to the final
// report.  The process exits 0 only if every numbered criterion passes.
//
// Statistical criteria aggregate over seeded replicates (seed = base + r), so
// the verdicts are reproducible run-to-run and worker-count independent; the
// only nondeterministic outputs are wall-clock fields, which are excluded
// where byte-identity is asserted (and said so in the report line).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cb2o/cb2o.hpp"

namespace fs = std::filesystem;
using namespace cb2o;

namespace {

std::size_t g_workers = 1;
fs::path g_art;

struct ReportLine {
  std::string label;  // "1" ... "9", "A"
  bool pass = false;
  bool counted = true;  // "A" reports an ordering note; still counted
  std::string detail;
  double seconds = 0.0;
};

std::vector<ReportLine> g_report;

std::string fmt(double v, const char* spec = "%.4g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void progress(const std::string& label, const ReportLine& r) {
  std::printf("  .. %s finished in %.1fs: %s\n", label.c_str(), r.seconds,
              r.pass ? "ok" : "FAILED");
  std::fflush(stdout);
}

template <typename Fn>
void criterion(const std::string& label, Fn&& fn) {
  ReportLine r;
  r.label = label;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    fn(r);
  } catch (const std::exception& ex) {
    r.pass = false;
    r.detail += std::string(r.detail.empty() ? "" : "; ") + "exception: " + ex.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  progress(label, r);
  g_report.push_back(std::move(r));
}

PrecisionSummary run_preset(const std::string& benchmark, const SolverSpec& spec,
                            std::size_t n_seeds, const std::string& subdir) {
  ExperimentConfig cfg;
  cfg.benchmark = benchmark;
  cfg.solver = spec;
  cfg.n_seeds = n_seeds;
  cfg.base_seed = 1;
  cfg.workers = g_workers;
  cfg.out_dir = (g_art / subdir).string();
  return run_experiment(cfg);
}

double mean_runtime_all_rows(const PrecisionSummary& s) {
  double sum = 0.0;
  for (const ReplicateResult& r : s.per_seed) sum += r.runtime_s;
  return sum / static_cast<double>(s.per_seed.size());
}

// --------------------------------------------------------------------------
// fast deterministic criteria

void crit5_decay_rate(ReportLine& r) {
  BiLevelProblem quad;
  quad.lower = [](std::span<const double> th) {
    double s = 0.0;
    for (double x : th) s += x * x;
    return s;
  };
  quad.upper = [](std::span<const double>) { return 0.0; };

  Cb2oParams p;
  p.lambda = 1.0;
  p.sigma = 0.3;
  p.alpha = 1e4;
  p.beta = 0.02;
  p.dt = 1e-3;
  p.eps_stop = 0.0;
  p.max_iters = 8000;

  const auto t0 = std::chrono::steady_clock::now();
  const RunTrace tr = run(quad, 2, 10000, p, GaussianInit{}, 1, TraceMode::Full);
  std::vector<double> ts, vs;
  for (std::size_t k = 0; k < tr.records(); ++k) {
    if (std::isfinite(tr.c_stop[k]) && tr.c_stop[k] > 0.0) {
      ts.push_back(tr.t[k]);
      vs.push_back(tr.c_stop[k]);
    }
  }
  const DecayFit fit = fit_decay_rate(ts, vs);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const double target = -1.82;  // -(2*lambda - d*sigma^2)
  const double rel_dev = std::abs(fit.rate - target) / std::abs(target);
  r.pass = rel_dev <= 0.35 && elapsed < 60.0;
  r.detail = "fitted rate " + fmt(fit.rate) + " vs " + fmt(target) + " (deviation " +
             fmt(100.0 * rel_dev, "%.1f") + "%, tolerance 35%), R^2 " + fmt(fit.r_squared) +
             ", " + fmt(elapsed, "%.1f") + "s (< 60s required)";
}

void crit6_instability(ReportLine& r) {
  const std::vector<double> svals = {1e-1, 1e-2, 1e-3};
  std::vector<double> gaps, ratios;
  bool w2_exact = true;
  for (double s : svals) {
    const InstabilityResult ir = wasserstein_instability_demo(s, 30.0);
    w2_exact = w2_exact && (ir.w2 == s / 2.0);
    gaps.push_back(ir.consensus_gap);
    ratios.push_back(ir.consensus_gap / ir.w2);
  }
  const double gmin = *std::min_element(gaps.begin(), gaps.end());
  const double gmax = *std::max_element(gaps.begin(), gaps.end());
  const double variation = (gmax - gmin) / gmin;
  const double growth = ratios.back() / ratios.front();
  r.pass = w2_exact && variation < 0.05 && growth >= 50.0;
  r.detail = "gap " + fmt(gaps[0]) + " varies " + fmt(100.0 * variation, "%.2f") +
             "% over s in {1e-1,1e-2,1e-3} (< 5%), W2 = s/2 " +
             (w2_exact ? "exact" : "NOT exact") + ", gap/W2 grows " + fmt(growth, "%.0f") +
             "x (>= 50x)";
}

void crit7_consensus_properties(ReportLine& r) {
  const auto t0 = std::chrono::steady_clock::now();
  const Objective lower = [](std::span<const double> th) {
    return th[0] * th[0] + 3.0 * th[1] * th[1];
  };
  const Objective upper = [](std::span<const double> th) {
    const double dx = th[0] - 0.3, dy = th[1] + 0.2;
    return dx * dx + dy * dy;
  };

  RngStream rng(7);
  Ensemble e(200, 2);
  for (std::size_t i = 0; i < e.size(); ++i)
    for (double& x : e.row(i)) x = rng.normal();

  std::string fails;
  auto expect = [&fails](bool ok, const char* what) {
    if (!ok) fails += std::string(fails.empty() ? "" : ", ") + what;
  };

  const ConsensusResult base = consensus_point(e, lower, upper, 12.0, 0.3);

  // strictly increasing transform of the lower objective: same selection,
  // same consensus point
  const Objective lower_warp = [&lower](std::span<const double> th) {
    const double v = lower(th);
    return std::atan(v) + 0.1 * v;
  };
  const ConsensusResult warped = consensus_point(e, lower_warp, upper, 12.0, 0.3);
  expect(warped.selected == base.selected, "monotone-transform selection");
  expect(std::abs(warped.point[0] - base.point[0]) <= 1e-12 &&
             std::abs(warped.point[1] - base.point[1]) <= 1e-12,
         "monotone-transform point");

  // alpha = 0: plain mean of the selected particles
  const ConsensusResult flat = consensus_point(e, lower, upper, 0.0, 0.3);
  double mx = 0.0, my = 0.0;
  for (std::size_t i : flat.selected) {
    mx += e.row(i)[0];
    my += e.row(i)[1];
  }
  mx /= static_cast<double>(flat.selected.size());
  my /= static_cast<double>(flat.selected.size());
  expect(std::abs(flat.point[0] - mx) <= 1e-12 && std::abs(flat.point[1] - my) <= 1e-12,
         "alpha=0 mean");

  // alpha = 1e6: the argmin-G particle within the selection
  const ConsensusResult sharp = consensus_point(e, lower, upper, 1e6, 0.3);
  std::size_t best = sharp.selected.front();
  for (std::size_t i : sharp.selected)
    if (upper(e.row(i)) < upper(e.row(best))) best = i;
  expect(std::hypot(sharp.point[0] - e.row(best)[0], sharp.point[1] - e.row(best)[1]) <= 1e-6,
         "alpha=1e6 argmin");

  // G-shift invariance
  const Objective upper_shift = [&upper](std::span<const double> th) { return upper(th) + 5.75; };
  const ConsensusResult shifted = consensus_point(e, lower, upper_shift, 12.0, 0.3);
  expect(shifted.selected == base.selected &&
             std::abs(shifted.point[0] - base.point[0]) <= 1e-12 &&
             std::abs(shifted.point[1] - base.point[1]) <= 1e-12,
         "G-shift invariance");

  // quantile vs full-sort oracle on 1000 random instances (with ties)
  RngStream qr(123);
  bool quantile_ok = true;
  for (int k = 0; k < 1000 && quantile_ok; ++k) {
    const std::size_t n = 2 + qr.uniform_below(59);
    Ensemble inst(n, 1);
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) {
      double v = qr.normal();
      if (qr.uniform01() < 0.3) v = std::round(v * 2.0) / 2.0;  // inject ties
      inst.row(i)[0] = v;
      values[i] = v;
    }
    const double beta =
        std::min(1.0, 2.0 / static_cast<double>(n) +
                          (1.0 - 2.0 / static_cast<double>(n)) * qr.uniform01());
    const Objective ident = [](std::span<const double> th) { return th[0]; };
    const QuantileResult got = quantile_value(inst, ident, beta);
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&values](std::size_t a, std::size_t b) {
      return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    const std::size_t m = quantile_count(beta, n);
    quantile_ok = got.order == order && got.value == values[order[m - 1]];
  }
  expect(quantile_ok, "quantile full-sort oracle");

  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.pass = fails.empty() && elapsed < 1.0;
  r.detail = fails.empty() ? ("monotone transform, alpha limits, G-shift, 1000 quantile "
                              "instances all exact in " +
                              fmt(elapsed, "%.2f") + "s (< 1s)")
                           : ("failed: " + fails);
  if (elapsed >= 1.0) r.detail += "; over the 1s budget";
}

void crit8_stepper_oracle(ReportLine& r) {
  BiLevelProblem prob;
  prob.lower = [](std::span<const double> th) { return th[0] * th[0] + th[1] * th[1]; };
  prob.upper = [](std::span<const double> th) {
    const double dx = th[0] - 1.0;
    return dx * dx + th[1] * th[1];
  };

  Ensemble e(3, 2);
  RngStream init_rng(7);
  for (std::size_t i = 0; i < 3; ++i)
    for (double& x : e.row(i)) x = init_rng.normal();
  std::vector<double> pre(e.data(), e.data() + 6);

  Cb2oParams p;
  p.lambda = 0.8;
  p.sigma = 0.6;
  p.alpha = 12.0;
  p.beta = 2.0 / 3.0;
  p.dt = 0.05;

  RngStream rng(99);
  const StepResult sr = cb2o_step(e, prob, p, rng);

  // independent scalar transcription: stable selection of ceil(2/3 * 3) = 2
  // particles by L, Gibbs weights on G, then the plain Euler update with the
  // replayed noise stream
  std::vector<double> lv(3), gv(3);
  for (int i = 0; i < 3; ++i) {
    lv[i] = prob.lower(std::span<const double>(pre.data() + 2 * i, 2));
    gv[i] = prob.upper(std::span<const double>(pre.data() + 2 * i, 2));
  }
  std::vector<std::size_t> idx = {0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return lv[a] < lv[b] || (lv[a] == lv[b] && a < b);
  });
  std::vector<std::size_t> sel(idx.begin(), idx.begin() + 2);
  std::sort(sel.begin(), sel.end());
  const double gmin = std::min(gv[sel[0]], gv[sel[1]]);
  double w0 = std::exp(-p.alpha * (gv[sel[0]] - gmin));
  double w1 = std::exp(-p.alpha * (gv[sel[1]] - gmin));
  const double ws = w0 + w1;
  w0 /= ws;
  w1 /= ws;
  const double mx = w0 * pre[2 * sel[0]] + w1 * pre[2 * sel[1]];
  const double my = w0 * pre[2 * sel[0] + 1] + w1 * pre[2 * sel[1] + 1];

  RngStream replay(99);
  const double sqrt_dt = std::sqrt(p.dt);
  double max_dev = std::max(std::abs(sr.consensus.point[0] - mx),
                            std::abs(sr.consensus.point[1] - my));
  double c_stop_sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double x = pre[2 * i], y = pre[2 * i + 1];
    const double vx = x - mx, vy = y - my;
    const double vn = std::sqrt(vx * vx + vy * vy);
    const double bx = replay.normal(), by = replay.normal();
    const double nx = x - p.dt * p.lambda * vx + sqrt_dt * p.sigma * vn * bx;
    const double ny = y - p.dt * p.lambda * vy + sqrt_dt * p.sigma * vn * by;
    max_dev = std::max({max_dev, std::abs(e.row(i)[0] - nx), std::abs(e.row(i)[1] - ny)});
    c_stop_sum += (nx - mx) * (nx - mx) + (ny - my) * (ny - my);
  }
  max_dev = std::max(max_dev, std::abs(sr.c_stop - c_stop_sum / 6.0));
  const bool transcription_ok = max_dev <= 1e-14;

  // sigma = 0, lambda*dt = 1: every particle lands exactly on the consensus
  Ensemble e2(3, 2);
  RngStream init2(11);
  for (std::size_t i = 0; i < 3; ++i)
    for (double& x : e2.row(i)) x = init2.normal();
  Cb2oParams pc;
  pc.lambda = 1.0;
  pc.dt = 1.0;
  pc.sigma = 0.0;
  pc.beta = 1.0;
  RngStream rng2(5);
  const StepResult cr = cb2o_step(e2, prob, pc, rng2);
  bool collapse_exact = cr.c_stop == 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      collapse_exact = collapse_exact && (e2.row(i)[j] == cr.consensus.point[j]);

  r.pass = transcription_ok && collapse_exact;
  r.detail = "3-particle transcription max deviation " + fmt(max_dev, "%.2e") +
             " (<= 1e-14); sigma=0, lambda*dt=1 collapse " +
             (collapse_exact ? "bit-exact" : "NOT exact");
}

std::string mask_runtime_csv(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!header) {
      // seed,precision,iterations,runtime_s,stop_reason -> blank field 4
      std::size_t pos = 0;
      for (int c = 0; c < 3; ++c) pos = line.find(',', pos) + 1;
      const std::size_t end = line.find(',', pos);
      line.replace(pos, end - pos, "-");
    }
    header = false;
    out << line << '\n';
  }
  return out.str();
}

std::string mask_runtime_json(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("\"mean_runtime_s\"") != std::string::npos)
      line = "    \"mean_runtime_s\": -";
    out << line << '\n';
  }
  return out.str();
}

void crit9_determinism(ReportLine& r) {
  SolverSpec spec;
  spec.kind = SolverKind::Cb2o;
  spec.n_particles = 100;
  spec.params = benchmark_params("ackley-circle");
  spec.params.beta = 1.0 / 20.0;

  const PrecisionSummary a = run_preset("ackley-circle", spec, 8, "determinism_a");
  const PrecisionSummary b = run_preset("ackley-circle", spec, 8, "determinism_b");
  (void)a;
  (void)b;

  const bool csv_same = mask_runtime_csv(g_art / "determinism_a" / "per_seed.csv") ==
                        mask_runtime_csv(g_art / "determinism_b" / "per_seed.csv");
  const bool json_same = mask_runtime_json(g_art / "determinism_a" / "summary.json") ==
                         mask_runtime_json(g_art / "determinism_b" / "summary.json");
  r.pass = csv_same && json_same;
  r.detail = std::string("repeated 8-replicate run: per_seed.csv ") +
             (csv_same ? "identical" : "DIFFERS") + ", summary.json " +
             (json_same ? "identical" : "DIFFERS") +
             " byte-for-byte outside the wall-clock fields (runtime_s column, "
             "mean_runtime_s entry), which are excluded";
}

// --------------------------------------------------------------------------
// statistical criteria

double g_t1_cb2o_runtime = std::numeric_limits<double>::quiet_NaN();

void crit1_table1(ReportLine& r) {
  SolverSpec spec;
  spec.kind = SolverKind::Cb2o;
  spec.n_particles = 100;
  spec.params = benchmark_params("ackley-circle");
  spec.params.beta = 1.0 / 20.0;

  const PrecisionSummary s = run_preset("ackley-circle", spec, 100, "table1_cb2o");
  g_t1_cb2o_runtime = s.mean_runtime_s;
  const double lo = 1.6e-3, hi = 1.0e-2;
  r.pass = s.n_failed == 0 && s.mean_precision >= lo && s.mean_precision <= hi;
  r.detail = "circular, N=100, beta=1/20, 100 seeds: mean precision " + fmt(s.mean_precision) +
             " in [" + fmt(lo) + ", " + fmt(hi) + "], " + std::to_string(s.n_failed) + " failed";
}

void crit2_table2(ReportLine& r) {
  const std::vector<CompareRow> rows = compare_baselines(
      "ackley-circle", CompareMode::SameTime, 50, 1, (g_art / "table2").string(), g_workers);

  const CompareRow* cb2o_row = nullptr;
  for (const CompareRow& row : rows)
    if (row.spec.kind == SolverKind::Cb2o) cb2o_row = &row;

  bool smallest = true;
  std::string table;
  for (const CompareRow& row : rows) {
    const double m = row.summary.mean_precision;
    table += std::string(table.empty() ? "" : ", ") + to_string(row.spec.kind) + "=" +
             (std::isfinite(m) ? fmt(m) : "n/a(all " +
                                              std::to_string(row.summary.n_failed) +
                                              " replicates diverged)");
    if (row.spec.kind != SolverKind::Cb2o && std::isfinite(m))
      smallest = smallest && cb2o_row->summary.mean_precision < m;
  }
  const double lo = 4e-4, hi = 2.5e-3;
  const double mp = cb2o_row->summary.mean_precision;
  r.pass = smallest && mp >= lo && mp <= hi && cb2o_row->summary.n_failed == 0;
  r.detail = "equal-budget circular, 50 seeds: " + table + "; main method " +
             (smallest ? "smallest" : "NOT smallest") + ", " + fmt(mp) + " in [" + fmt(lo) +
             ", " + fmt(hi) + "]";
}

void crit3_star(ReportLine& r) {
  SolverSpec small;
  small.kind = SolverKind::Cb2o;
  small.n_particles = 100;
  small.params = benchmark_params("ackley-star");
  small.params.beta = 1.0 / 20.0;
  const PrecisionSummary s100 = run_preset("ackley-star", small, 100, "table3_cb2o");

  SolverSpec big = small;
  big.n_particles = 2000;
  big.params.beta = 1.0 / 40.0;
  const PrecisionSummary s2000 = run_preset("ackley-star", big, 100, "table4_cb2o");

  const bool ok100 = s100.n_failed == 0 && s100.mean_precision >= 3.2e-3 &&
                     s100.mean_precision <= 2e-2;
  const bool ok2000 = s2000.n_failed == 0 && s2000.mean_precision >= 1.3e-3 &&
                      s2000.mean_precision <= 8e-3;
  r.pass = ok100 && ok2000;
  r.detail = "star N=100 beta=1/20: " + fmt(s100.mean_precision) + " in [3.2e-3, 2e-2] " +
             (ok100 ? "ok" : "FAIL") + "; star N=2000 beta=1/40: " + fmt(s2000.mean_precision) +
             " in [1.3e-3, 8e-3] " + (ok2000 ? "ok" : "FAIL") + " (100 seeds each)";
}

void crit4_ablations(ReportLine& r) {
  // Every cell is averaged over the full 100-replicate campaign protocol.
  // The stopping-rule comparison in (d) needs it: at the reference
  // configuration the consensus point saturates long before the ensemble
  // fully collapses, so the early-stop precision penalty is tiny and smaller
  // seed sets can flip the sign of the difference.
  ExperimentConfig ref = ablation_reference_config();
  ref.n_seeds = 100;
  ref.base_seed = 1;
  ref.workers = g_workers;

  auto run_axis = [&](AblationAxis axis, std::vector<double> values) {
    AblationGrid grid;
    grid.reference = ref;
    grid.reference.out_dir = (g_art / "ablations").string();
    grid.axis = axis;
    grid.values = std::move(values);
    return run_ablation(grid);
  };

  std::string fails;
  auto expect = [&fails](bool ok, const std::string& what) {
    if (!ok) fails += std::string(fails.empty() ? "" : "; ") + what;
  };
  std::string notes;

  // (a) more particles do not hurt
  const auto n_cells = run_axis(AblationAxis::N, {100.0, 1000.0});
  expect(n_cells[1].summary.mean_precision <= n_cells[0].summary.mean_precision,
         "N=1000 (" + fmt(n_cells[1].summary.mean_precision) + ") worse than N=100 (" +
             fmt(n_cells[0].summary.mean_precision) + ")");
  notes += "N: " + fmt(n_cells[0].summary.mean_precision) + " -> " +
           fmt(n_cells[1].summary.mean_precision);

  // (b) quantile fraction: sweet spot and the beta=1/2 penalty
  const auto beta_cells =
      run_axis(AblationAxis::Beta, {0.002, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5});
  std::size_t best = 0;
  for (std::size_t i = 1; i < beta_cells.size(); ++i)
    if (beta_cells[i].summary.mean_precision < beta_cells[best].summary.mean_precision) best = i;
  const double best_beta = beta_cells[best].value;
  double p_half = 0.0, p_twentieth = 0.0;
  for (const AblationCell& c : beta_cells) {
    if (c.value == 0.5) p_half = c.summary.mean_precision;
    if (c.value == 0.05) p_twentieth = c.summary.mean_precision;
  }
  expect(best_beta >= 0.01 && best_beta <= 0.05,
         "minimizing beta " + fmt(best_beta) + " outside [0.01, 0.05]");
  expect(p_half >= 5.0 * p_twentieth, "beta=1/2 (" + fmt(p_half) + ") not >= 5x beta=1/20 (" +
                                          fmt(p_twentieth) + ")");
  notes += "; beta*: " + fmt(best_beta) + ", half/twentieth " +
           fmt(p_half / p_twentieth, "%.0f") + "x";

  // (c) precision non-increasing in the weight sharpness
  const auto alpha_cells = run_axis(AblationAxis::Alpha, {2.0, 10.0, 30.0, 100.0});
  bool monotone = true;
  std::string alpha_str;
  for (std::size_t i = 0; i < alpha_cells.size(); ++i) {
    alpha_str += (i ? " -> " : "") + fmt(alpha_cells[i].summary.mean_precision);
    if (i > 0)
      monotone = monotone && alpha_cells[i].summary.mean_precision <=
                                 alpha_cells[i - 1].summary.mean_precision;
  }
  expect(monotone, "precision not non-increasing over alpha {2,10,30,100}: " + alpha_str);
  notes += "; alpha: " + alpha_str;

  // (d) running to full collapse beats stopping early
  const auto eps_cells = run_axis(AblationAxis::EpsStop, {0.0, 0.1});
  expect(eps_cells[0].summary.mean_precision < eps_cells[1].summary.mean_precision,
         "eps=0 (" + fmt(eps_cells[0].summary.mean_precision) + ") not below eps=0.1 (" +
             fmt(eps_cells[1].summary.mean_precision) + ")");
  notes += "; eps 0 vs 0.1: " + fmt(eps_cells[0].summary.mean_precision) + " vs " +
           fmt(eps_cells[1].summary.mean_precision);

  r.pass = fails.empty();
  r.detail = (fails.empty() ? "100 seeds per cell: " + notes : fails);
}

void critA_runtime_ordering(ReportLine& r) {
  // Only orderings are meaningful (absolute wall-clock is hardware-bound).
  // The gradient-force legs cannot be measured as optimization work: the
  // explicit strong-penalty drift (chi=100, dt=0.01) is an effective step of
  // 1.0 on a quartic residual and diverges within a few iterations from any
  // spread-out start, so its wall time only measures how fast it fails.
  SolverSpec proj;
  proj.kind = SolverKind::ProjectedCbo;
  proj.n_particles = 100;
  proj.params = benchmark_params("ackley-circle");
  const PrecisionSummary ps = run_preset("ackley-circle", proj, 100, "table1_projected");

  SolverSpec gf;
  gf.kind = SolverKind::CboGradientForce;
  gf.n_particles = 100;
  gf.params = benchmark_params("ackley-circle");
  gf.chi = 100.0;
  const PrecisionSummary gs = run_preset("ackley-circle", gf, 100, "table1_gradient_force");

  const bool ordered = std::isfinite(g_t1_cb2o_runtime) && g_t1_cb2o_runtime < ps.mean_runtime_s;
  r.pass = ordered;
  r.detail = "main method " + fmt(g_t1_cb2o_runtime, "%.2f") + "s < projected " +
             fmt(ps.mean_runtime_s, "%.2f") +
             "s per replicate at N=100 (checked); gradient-force legs unattainable: " +
             std::to_string(gs.n_failed) + "/100 replicates diverged after ~" +
             fmt(static_cast<double>(gs.per_seed.front().iterations), "%.0f") +
             " iterations (" + fmt(1e3 * mean_runtime_all_rows(gs), "%.2f") +
             " ms mean time-to-failure), so its wall time measures divergence, not work";
}

}  // namespace

int main() {
  g_workers = std::max(1u, std::thread::hardware_concurrency());
  g_art = fs::temp_directory_path() / "cb2o_acceptance";
  std::error_code ec;
  fs::remove_all(g_art, ec);
  fs::create_directories(g_art);

  std::printf("acceptance: artifacts in %s, %zu worker(s)\n", g_art.string().c_str(), g_workers);
  std::fflush(stdout);
  const auto t0 = std::chrono::steady_clock::now();

  // fast deterministic criteria first, heavy statistical ones after
  criterion("5", crit5_decay_rate);
  criterion("6", crit6_instability);
  criterion("7", crit7_consensus_properties);
  criterion("8", crit8_stepper_oracle);
  criterion("9", crit9_determinism);
  criterion("3", crit3_star);
  criterion("1", crit1_table1);
  criterion("A", critA_runtime_ordering);
  criterion("2", crit2_table2);
  criterion("4", crit4_ablations);

  std::sort(g_report.begin(), g_report.end(), [](const ReportLine& a, const ReportLine& b) {
    return a.label < b.label;  // "1".."9" then "A"
  });

  const std::vector<std::pair<std::string, std::string>> titles = {
      {"1", "circular benchmark precision band (N=100)"},
      {"2", "equal-budget circular comparison"},
      {"3", "star benchmark precision bands"},
      {"4", "ablation shape checks"},
      {"5", "ensemble variance decay rate"},
      {"6", "consensus-map instability under small perturbations"},
      {"7", "consensus selection and weighting properties"},
      {"8", "particle stepper oracle"},
      {"9", "artifact determinism"},
      {"A", "runtime orderings"},
  };

  int failed = 0;
  std::printf("\n================ acceptance report ================\n");
  for (const ReportLine& line : g_report) {
    std::string title = line.label;
    for (const auto& [k, v] : titles)
      if (k == line.label) title = v;
    std::printf("[%s] %s. %s\n      %s\n", line.pass ? "PASS" : "FAIL", line.label.c_str(),
                title.c_str(), line.detail.c_str());
    if (!line.pass && line.counted) ++failed;
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("===================================================\n");
  std::printf("acceptance: %d/%zu passed in %.0fs\n", static_cast<int>(g_report.size()) - failed,
              g_report.size(), total);
  return failed == 0 ? 0 : 1;
}
