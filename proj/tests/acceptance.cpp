// Acceptance suite: one PASS/FAIL line per criterion on stdout, details on stderr.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>

#include "eigenrec/experiments.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "eigenrec/trajectory_lab.hpp"
#include "gradcheck.hpp"
#include "test_support.hpp"

using namespace eigenrec;

namespace {

// Pinned thresholds.
constexpr double kEnergyTol = 1e-8;
constexpr double kScaleTol = 1e-8;
constexpr int kInstancesPerCase = 200;
constexpr int kGradConfigs = 50;
constexpr double kGradTol = 1e-4;
constexpr double kGeneralMinFidelity = 0.98;
constexpr std::size_t kGeneralMaxLevel = 7;
constexpr std::size_t kTrendLevel = 7;
constexpr double kRingTrendGap = 0.1;
constexpr double kRouterMinFidelity = 0.93;
constexpr double kRouterMargin = 0.02;
constexpr std::size_t kSuccessTrials = 300;
constexpr double kRandomSuccessLo = 0.005, kRandomSuccessHi = 0.12;
constexpr double kNetworkGroundMin = 0.5;
constexpr double kNetworkFirstExcitedMin = 0.15;
constexpr double kNetworkOverRandom = 8.0;
constexpr double kNoiseSmallBand = 0.07;
constexpr double kNoiseLargeDrop = 0.05;
constexpr std::size_t kNoiseMaxLevel = 3;
constexpr double kCrossingAngleTol = 1e-4;
constexpr double kSweepEnergyTol = 1e-8;
constexpr double kCircleTol = 1e-9;

// Runtime budgets in seconds, indexed by criterion.
constexpr double kBudget[] = {0, 120, 60, 900, 900, 2700, 7200, 1800, 60, 1e9};

constexpr int kQubits = 5;

std::uint64_t g_seed = 1;

struct Outcome {
  bool pass = false;
  std::string summary;
};

std::string fixed(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

void print_report(const FidelityReport& r) {
  std::cerr << "  " << r.tag << ":";
  for (const auto& l : r.levels) std::cerr << " k" << l.level << "=" << fixed(l.mean);
  std::cerr << "\n";
}

const LevelStats& worst_level(const FidelityReport& r) {
  return *std::min_element(r.levels.begin(), r.levels.end(),
                           [](const LevelStats& a, const LevelStats& b) { return a.mean < b.mean; });
}

FidelityExperimentConfig fidelity_config() {
  FidelityExperimentConfig cfg;
  cfg.seed = g_seed;
  return cfg;
}

Outcome forward_map_invariants() {
  double worst_energy = 0.0, worst_scale = 0.0;
  std::size_t checked = 0, skipped = 0;
  for (int n = 3; n <= 5; ++n) {
    for (ModelKind kind : {ModelKind::general, ModelKind::ring}) {
      const OperatorSet ops = model_operators(kind, n, g_seed);
      Rng rng(derive_seed(g_seed, static_cast<std::uint64_t>(10 * n) + static_cast<std::uint64_t>(kind)));
      std::vector<std::size_t> levels(ops.dim());
      for (std::size_t k = 0; k < levels.size(); ++k) levels[k] = k;
      for (int t = 0; t < kInstancesPerCase; ++t) {
        const auto c = testsupport::uniform_vector(rng, ops.size());
        const Spectrum s = eigendecompose(assemble(c, ops));
        const auto base = forward_map_levels(c, ops, levels);
        for (std::size_t k = 0; k < levels.size(); ++k) {
          double e = 0.0;
          for (std::size_t i = 0; i < c.size(); ++i) e += c[i] * base[k].a[i];
          worst_energy = std::max(worst_energy, std::abs(e - s.eigenvalues[k]));
        }
        for (double alpha : {0.5, 2.0, 10.0}) {
          std::vector<double> sc(c);
          for (auto& x : sc) x *= alpha;
          const auto scaled = forward_map_levels(sc, ops, levels);
          for (std::size_t k = 0; k < levels.size(); ++k) {
            if (base[k].degenerate) {
              ++skipped;
              continue;
            }
            worst_scale = std::max(worst_scale, testsupport::max_abs_diff(scaled[k].a, base[k].a));
            ++checked;
          }
        }
      }
    }
  }
  std::cerr << "  " << checked << " scaled level comparisons, " << skipped << " degenerate skipped\n";
  return {worst_energy <= kEnergyTol && worst_scale <= kScaleTol,
          "max |<c,a> - lambda_k| = " + sci(worst_energy) + ", max scale deviation = " + sci(worst_scale) +
              " (tol " + sci(kEnergyTol) + ")"};
}

Outcome gradient_correctness() {
  Rng rng(derive_seed(g_seed, 2));
  double worst = 0.0;
  for (int t = 0; t < kGradConfigs; ++t) {
    const std::size_t n = 2 + rng.below(9);
    MLPParams p = init_params(regressor_dims(n), rng.next());
    for (auto& b : p.biases)
      for (auto& x : b) x = rng.uniform(-0.2, 0.2);
    TrainingSet data;
    data.input_dim = data.target_dim = n;
    for (int s = 0; s < 4; ++s) data.add(testsupport::uniform_vector(rng, n), testsupport::uniform_vector(rng, n));
    worst = std::max(worst, testsupport::check_gradients(p, data, LossKind::cosine).rel_error);
  }
  return {worst <= kGradTol, "worst relative error over " + std::to_string(kGradConfigs) + " configurations " +
                                 sci(worst) + " (tol " + sci(kGradTol) + ")"};
}

Outcome general_reconstruction() {
  const OperatorSet ops = model_operators(ModelKind::general, kQubits, g_seed);
  const FidelityExperimentResult r = run_fidelity_experiment(ops, fidelity_config());
  print_report(r.report);
  double worst = 1.0;
  std::size_t worst_k = 0;
  for (const auto& l : r.report.levels) {
    if (l.level <= kGeneralMaxLevel && l.mean < worst) {
      worst = l.mean;
      worst_k = l.level;
    }
  }
  return {worst >= kGeneralMinFidelity, "lowest mean fidelity for k <= " + std::to_string(kGeneralMaxLevel) + " is " +
                                            fixed(worst) + " at k=" + std::to_string(worst_k) + " (need >= " +
                                            fixed(kGeneralMinFidelity, 2) + ")"};
}

Outcome ring_trend() {
  const OperatorSet ops = model_operators(ModelKind::ring, kQubits, g_seed);
  const FidelityExperimentResult r = run_fidelity_experiment(ops, fidelity_config());
  print_report(r.report);
  const double f0 = r.report.at(0).mean, f7 = r.report.at(kTrendLevel).mean;
  return {f0 - f7 >= kRingTrendGap, "mean k=0 " + fixed(f0) + " minus mean k=7 " + fixed(f7) + " = " +
                                        fixed(f0 - f7) + " (need >= " + fixed(kRingTrendGap, 2) + ")"};
}

Outcome router_improvement() {
  const OperatorSet ops = model_operators(ModelKind::fully_connected, kQubits, g_seed);
  RouterExperimentConfig cfg;
  cfg.seed = g_seed;
  const RouterExperimentResult r = run_router_experiment(ops, cfg);
  print_report(r.routed);
  print_report(r.pooled);
  print_report(r.oracle);
  std::cerr << "  classifier top-1 " << fixed(r.classifier_top1) << ", true pattern among "
            << r.true_in_top.size() << " candidates " << fixed(r.true_in_top.back()) << ", verified "
            << fixed(r.verified_fraction) << "; parts " << fixed(r.build.seconds_parts, 0) << " s, classifier "
            << fixed(r.build.seconds_classifier, 0) << " s\n";
  const LevelStats& routed = worst_level(r.routed);
  const LevelStats& pooled = worst_level(r.pooled);
  const bool floor_ok = routed.mean >= kRouterMinFidelity;
  const bool margin_ok = routed.mean >= pooled.mean + kRouterMargin;
  return {floor_ok && margin_ok, "routed worst level " + fixed(routed.mean) + " (k=" + std::to_string(routed.level) +
                                     ", need >= " + fixed(kRouterMinFidelity, 2) + "), pooled worst level " +
                                     fixed(pooled.mean) + " (k=" + std::to_string(pooled.level) +
                                     "), margin need >= " + fixed(kRouterMargin, 2)};
}

Outcome bfgs_success() {
  const OperatorSet ops = model_operators(ModelKind::ring, kQubits, g_seed);
  SuccessExperimentConfig cfg;
  cfg.seed = g_seed;
  cfg.n_trials = kSuccessTrials;
  cfg.network = fidelity_config();
  const SuccessExperimentResult r = run_success_experiment(ops, cfg);
  for (const auto& c : r.cells)
    std::cerr << "  k=" << c.level << " " << to_string(c.policy) << ": " << c.successes << "/" << c.trials << " = "
              << fixed(c.rate) << " [" << fixed(c.ci_low) << ", " << fixed(c.ci_high) << "]\n";
  const double rand0 = r.cell(0, InitPolicy::random).rate;
  const double net0 = r.cell(0, InitPolicy::network).rate;
  const double net1 = r.cell(1, InitPolicy::network).rate;
  const bool a = rand0 >= kRandomSuccessLo && rand0 <= kRandomSuccessHi;
  const bool b = net0 >= kNetworkGroundMin;
  const bool c = net1 >= kNetworkFirstExcitedMin;
  const bool d = net0 >= kNetworkOverRandom * rand0;
  return {a && b && c && d, "random k=0 " + fixed(rand0, 3) + (a ? " ok" : " out of [0.005, 0.12]") +
                                 ", network k=0 " + fixed(net0, 3) + (b ? " ok" : " < 0.5") + ", network k=1 " +
                                 fixed(net1, 3) + (c ? " ok" : " < 0.15") + ", ratio " +
                                 (rand0 > 0 ? fixed(net0 / rand0, 2) : std::string("inf")) + (d ? " ok" : " < 8")};
}

Outcome noise_robustness() {
  const OperatorSet ops = model_operators(ModelKind::ring, kQubits, g_seed);
  const auto runs = run_noise_experiment(ops, fidelity_config(), {0.0, 0.2, 1.0});
  for (const auto& r : runs) print_report(r.report);
  double worst_band = 0.0, worst_drop = 1e300;
  for (std::size_t k = 0; k <= kNoiseMaxLevel; ++k) {
    const double f0 = runs[0].report.at(k).mean, f2 = runs[1].report.at(k).mean, f10 = runs[2].report.at(k).mean;
    worst_band = std::max(worst_band, std::abs(f2 - f0));
    worst_drop = std::min(worst_drop, f2 - f10);
  }
  return {worst_band <= kNoiseSmallBand && worst_drop >= kNoiseLargeDrop,
          "k <= 3: max |f(0.2) - f(0)| = " + fixed(worst_band) + " (need <= " + fixed(kNoiseSmallBand, 2) +
              "), min f(0.2) - f(1.0) = " + fixed(worst_drop) + " (need >= " + fixed(kNoiseLargeDrop, 2) + ")"};
}

SweepResult chain_sweep() {
  SweepConfig cfg;
  cfg.ops = sweep_operators(SweepKind::chain2local, 3, g_seed);
  return sweep(cfg);
}

Outcome trajectory_properties() {
  constexpr double kPi = std::numbers::pi;
  const SweepResult r = chain_sweep();
  const auto angles = crossing_angles(detect_crossings(r));
  const std::vector<double> expected{0.0, kPi / 2, kPi, 3 * kPi / 2};
  bool angles_ok = angles.size() == expected.size();
  double worst_angle = 0.0;
  for (std::size_t i = 0; angles_ok && i < angles.size(); ++i) worst_angle = std::max(worst_angle, std::abs(angles[i] - expected[i]));
  angles_ok = angles_ok && worst_angle <= kCrossingAngleTol;

  double worst_energy = 0.0;
  for (const auto& lv : r.levels)
    for (std::size_t j = 0; j < lv.theta.size(); ++j)
      worst_energy = std::max(worst_energy,
                              std::abs(std::cos(lv.theta[j]) * lv.a1[j] + std::sin(lv.theta[j]) * lv.a2[j] - lv.lambda[j]));

  SweepConfig one;
  one.ops = make_operator_set(1, OperatorKind::general, std::nullopt, 0,
                              {{{PauliString("X"), 1.0}}, {{PauliString("Z"), 1.0}}});
  const SweepResult circle = sweep(one);
  double worst_circle = 0.0;
  const auto& g = circle.level(0);
  for (std::size_t j = 0; j < g.theta.size(); ++j) {
    worst_circle = std::max(worst_circle, std::abs(g.a1[j] + std::cos(g.theta[j])));
    worst_circle = std::max(worst_circle, std::abs(g.a2[j] + std::sin(g.theta[j])));
  }
  std::string found;
  for (double a : angles) found += (found.empty() ? "" : ", ") + fixed(a, 6);
  std::cerr << "  crossing angles: {" << found << "}\n";
  return {angles_ok && worst_energy <= kSweepEnergyTol && worst_circle <= kCircleTol,
          std::to_string(angles.size()) + " crossing angles, max offset " + sci(worst_angle) +
              "; sweep energy identity " + sci(worst_energy) + "; 1-qubit circle deviation " + sci(worst_circle)};
}

Outcome determinism() {
  const OperatorSet ops = model_operators(ModelKind::general, kQubits, g_seed);
  const std::string f1 = report_csv(run_fidelity_experiment(ops, fidelity_config()).report);
  const std::string f2 = report_csv(run_fidelity_experiment(ops, fidelity_config()).report);

  testsupport::TempDir dir("accept_sweep");
  const SweepResult s1 = chain_sweep();
  const SweepResult s2 = chain_sweep();
  const auto files1 = export_plot_data(s1, detect_crossings(s1), dir / "a");
  const auto files2 = export_plot_data(s2, detect_crossings(s2), dir / "b");
  bool sweep_same = files1.size() == files2.size();
  for (std::size_t i = 0; sweep_same && i < files1.size(); ++i)
    sweep_same = read_text_file(files1[i]) == read_text_file(files2[i]);
  return {f1 == f2 && sweep_same, std::string("fidelity CSV ") + (f1 == f2 ? "identical" : "differs") + ", " +
                                      std::to_string(files1.size()) + " sweep CSVs " +
                                      (sweep_same ? "identical" : "differ")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default all)");
  app.add_option("--seed", g_seed, "master seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "forward-map invariants", forward_map_invariants},
      {2, "gradient correctness", gradient_correctness},
      {3, "general-operator reconstruction", general_reconstruction},
      {4, "ring reconstruction trend", ring_trend},
      {5, "sign-router improvement", router_improvement},
      {6, "BFGS success rates", bfgs_success},
      {7, "noise robustness", noise_robustness},
      {8, "trajectory properties", trajectory_properties},
      {9, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    std::cerr << "criterion " << c.id << ": " << c.name << "\n";
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs <= kBudget[c.id];
    const bool pass = o.pass && in_budget;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " [" << c.id << "] " << c.name << ": " << o.summary << "; "
              << fixed(secs, 1) << " s" << (in_budget ? "" : " (over budget " + fixed(kBudget[c.id], 0) + " s)")
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
