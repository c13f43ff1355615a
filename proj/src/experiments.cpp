#include "eigenrec/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <unordered_set>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"

namespace eigenrec {

namespace {

enum : std::uint64_t {
  kStreamData = 1,
  kStreamTrain = 3,
  kStreamPooled = 10,
  kStreamTest = 11,
  kStreamParts = 12,
  kStreamClassifier = 13,
  kStreamPartData = 0x7061727400000000ULL,
  kStreamSuccess = 100,
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

/// Samples belonging to the first `draws` distinct draws, in dataset order.
Dataset first_draws(const Dataset& ds, std::size_t draws) {
  Dataset out = ds;
  out.samples.clear();
  std::unordered_set<std::uint64_t> kept;
  for (const auto& s : ds.samples) {
    if (!kept.contains(s.seed)) {
      if (kept.size() == draws) continue;
      kept.insert(s.seed);
    }
    out.samples.push_back(s);
  }
  return out;
}

void append(Dataset& into, const Dataset& from) {
  into.samples.insert(into.samples.end(), from.samples.begin(), from.samples.end());
}

}  // namespace

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::general: return "general";
    case ModelKind::chain: return "chain";
    case ModelKind::ring: return "ring";
    case ModelKind::fully_connected: return "fully_connected";
  }
  return "?";
}

ModelKind model_kind_from_string(const std::string& text) {
  if (text == "general") return ModelKind::general;
  if (text == "chain") return ModelKind::chain;
  if (text == "ring") return ModelKind::ring;
  if (text == "fully_connected" || text == "fully-connected") return ModelKind::fully_connected;
  throw InvalidInput("unknown operator model: " + text);
}

OperatorSet model_operators(ModelKind kind, int n_qubits, std::uint64_t seed, int n_coeffs) {
  switch (kind) {
    case ModelKind::general: return build_general_set(n_qubits, n_coeffs > 0 ? n_coeffs : n_qubits, seed);
    case ModelKind::chain: return build_local_set(InteractionGraph::chain(n_qubits), seed);
    case ModelKind::ring: return build_local_set(InteractionGraph::ring(n_qubits), seed);
    case ModelKind::fully_connected: return build_local_set(InteractionGraph::fully_connected(n_qubits), seed);
  }
  throw InvalidInput("unknown operator model");
}

FidelityExperimentResult run_fidelity_experiment(const OperatorSet& ops, const FidelityExperimentConfig& cfg) {
  GenerateOptions gen;
  gen.levels = cfg.levels;
  gen.seed = derive_seed(cfg.seed, kStreamData);
  gen.noise_ratio = cfg.noise_ratio;
  auto draw = [&](std::size_t count, std::uint64_t offset, SplitTag tag, GenerateReport* report) {
    gen.n_sets = count;
    gen.draw_offset = offset;
    GenerateResult r = generate(ops, gen);
    r.dataset.operator_set_hash = ops.hash();
    r.dataset.split_tag = tag;
    if (report) *report = r.report;
    return std::move(r.dataset);
  };
  FidelityExperimentResult out;
  SplitResult parts;
  parts.train = draw(cfg.draws, 0, SplitTag::train, &out.data_report);
  parts.val = draw(cfg.val_draws, cfg.draws, SplitTag::val, nullptr);
  parts.test = draw(cfg.test_draws, cfg.draws + cfg.val_draws, SplitTag::test, nullptr);

  TrainConfig tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, kStreamTrain);
  TrainResult trained = train_regressor(parts.train, parts.val, tc);

  const MLPParams& p = trained.params;
  out.report = evaluate([&p](std::span<const double> a) { return mlp_forward(p, a); }, parts.test, ops,
                        "regressor");
  out.train_report = std::move(trained.report);
  out.params = std::move(trained.params);
  return out;
}

std::vector<FidelityExperimentResult> run_noise_experiment(const OperatorSet& ops, FidelityExperimentConfig cfg,
                                                           const std::vector<double>& ratios) {
  std::vector<FidelityExperimentResult> out;
  for (double r : ratios) {
    cfg.noise_ratio = r;
    out.push_back(run_fidelity_experiment(ops, cfg));
    out.back().report.tag = "noise_" + format_double(r);
  }
  return out;
}

std::string noise_csv(const std::vector<FidelityExperimentResult>& runs) {
  std::string out = "ratio,level,mean_f,min_f,max_f,count\n";
  for (const auto& run : runs) {
    for (const auto& s : run.report.levels) {
      out += format_double(run.report.noise_ratio) + "," + std::to_string(s.level) + "," + format_double(s.mean) +
             "," + format_double(s.min) + "," + format_double(s.max) + "," + std::to_string(s.count) + "\n";
    }
  }
  return out;
}

std::map<SignPattern, PartData> orthant_part_data(const OperatorSet& ops, std::uint64_t seed, std::size_t train_draws,
                                                  std::size_t val_draws, const std::vector<std::size_t>& levels) {
  std::map<SignPattern, PartData> parts;
  const std::string hash = ops.hash();
  for (const auto& pattern : gray_order(ops.size())) {
    GenerateOptions gen;
    gen.levels = levels;
    gen.seed = derive_seed(seed, kStreamPartData + pattern.index());
    gen.sign_pattern = pattern.str();
    PartData pd;
    gen.n_sets = train_draws;
    pd.train = generate(ops, gen).dataset;
    pd.train.operator_set_hash = hash;
    pd.train.split_tag = SplitTag::train;
    if (val_draws > 0) {
      gen.n_sets = val_draws;
      gen.draw_offset = train_draws;
      pd.val = generate(ops, gen).dataset;
      pd.val.operator_set_hash = hash;
      pd.val.split_tag = SplitTag::val;
    }
    parts.emplace(pattern, std::move(pd));
  }
  return parts;
}

RouterBuild build_router(const OperatorSet& ops, const std::map<SignPattern, PartData>& parts,
                         const RouterTrainConfig& cfg) {
  RouterBuild out;
  // Classifier on the pooled union of (a subset of) every part's draws.
  Dataset cls_train, cls_val;
  bool first = true;
  for (const auto& [pattern, pd] : parts) {
    if (first) {
      cls_train = pd.train;
      cls_train.samples.clear();
      cls_val = cls_train;
      first = false;
    }
    append(cls_train, first_draws(pd.train, cfg.classifier_draws));
    append(cls_val, first_draws(pd.val, cfg.classifier_val_draws));
  }
  auto t0 = std::chrono::steady_clock::now();
  TrainConfig cls_cfg = cfg.classifier_train;
  cls_cfg.seed = derive_seed(cfg.seed, 1);
  ClassifierTrainResult cls = train_classifier(cls_train, cls_val, cls_cfg);
  out.seconds_classifier = seconds_since(t0);
  out.classifier_report = std::move(cls.report);
  out.empty_classes = cls.empty_classes.size();

  t0 = std::chrono::steady_clock::now();
  TrainConfig part_cfg = cfg.part_train;
  part_cfg.seed = derive_seed(cfg.seed, 2);
  out.router.parts = train_parts(parts, ops.size(), part_cfg, &out.parts_report);
  out.seconds_parts = seconds_since(t0);
  out.router.n_coeffs = ops.size();
  out.router.classifier = std::move(cls.classifier);
  out.router.gray = gray_order(ops.size());
  out.router.ops_hash = ops.hash();
  return out;
}

RouterExperimentResult run_router_experiment(const OperatorSet& ops, const RouterExperimentConfig& cfg) {
  RouterExperimentResult out;
  const std::string hash = ops.hash();

  GenerateOptions test_gen;
  test_gen.n_sets = cfg.test_draws;
  test_gen.levels = cfg.levels;
  test_gen.seed = derive_seed(cfg.seed, kStreamTest);
  Dataset test = generate(ops, test_gen).dataset;
  test.operator_set_hash = hash;

  // Pooled baseline on uniform draws.
  {
    FidelityExperimentConfig pooled;
    pooled.seed = derive_seed(cfg.seed, kStreamPooled);
    pooled.draws = cfg.pooled_draws;
    pooled.levels = cfg.levels;
    pooled.train = cfg.pooled_train;
    const FidelityExperimentResult base = run_fidelity_experiment(ops, pooled);
    const MLPParams& p = base.params;
    out.pooled = evaluate([&p](std::span<const double> a) { return mlp_forward(p, a); }, test, ops, "pooled");
  }

  const auto parts = orthant_part_data(ops, derive_seed(cfg.seed, kStreamParts), cfg.part_draws,
                                       cfg.part_val_draws, cfg.levels);

  RouterTrainConfig rc = cfg.router;
  rc.seed = derive_seed(cfg.seed, kStreamClassifier);
  out.build = build_router(ops, parts, rc);

  std::atomic<std::size_t> verified{0}, top1{0};
  const RouterModel& router = out.build.router;
  auto routed = [&](std::span<const double> a) {
    RouteResult r = route_and_predict(router, a, ops, cfg.policy);
    if (r.verified) ++verified;
    if (!r.c.empty()) return r.c;
    // Every candidate part was missing: fall back to the top pattern's sign vector.
    std::vector<double> c;
    for (char ch : r.candidates.front().pattern.str()) c.push_back(ch == '+' ? 1.0 : -1.0);
    return c;
  };
  out.routed = evaluate(routed, test, ops, "routed");
  out.oracle = evaluate_samples(
      [&](const Sample& s) {
        const auto& part = router.parts.at(SignPattern::of(s.c));
        return part ? mlp_forward(*part, s.a) : std::vector<double>(s.a.size(), 1.0);
      },
      test, ops, "oracle");
  out.true_in_top.assign(cfg.policy.max_candidates, 0.0);
  for (const auto& s : test.samples) {
    auto ranking = rank_patterns(router.classifier, s.a);
    const SignPattern truth = SignPattern::of(s.c);
    for (std::size_t k = 0; k < cfg.policy.max_candidates; ++k) {
      auto next = ranking.next();
      if (!next) break;
      if (next->first == truth) {
        if (k == 0) ++top1;
        for (std::size_t j = k; j < out.true_in_top.size(); ++j) out.true_in_top[j] += 1.0;
        break;
      }
    }
  }
  const double n_test = static_cast<double>(test.samples.size());
  for (auto& v : out.true_in_top) v /= n_test;
  out.verified_fraction = static_cast<double>(verified.load()) / n_test;
  out.classifier_top1 = static_cast<double>(top1.load()) / n_test;
  return out;
}

const SuccessRateResult& SuccessExperimentResult::cell(std::size_t level, InitPolicy policy) const {
  for (const auto& c : cells) {
    if (c.level == level && c.policy == policy) return c;
  }
  throw InvalidInput("no success-rate cell for level " + std::to_string(level));
}

SuccessExperimentResult run_success_experiment(const OperatorSet& ops, const SuccessExperimentConfig& cfg) {
  SuccessExperimentResult out;
  out.network = run_fidelity_experiment(ops, cfg.network);
  for (std::size_t level : cfg.levels) {
    for (InitPolicy policy : {InitPolicy::random, InitPolicy::network}) {
      SuccessRateConfig sc;
      sc.level = level;
      sc.n_trials = cfg.n_trials;
      sc.policy = policy;
      sc.network = &out.network.params;
      // Both policies see the same targets.
      sc.seed = derive_seed(cfg.seed, kStreamSuccess + level);
      sc.beta = cfg.beta;
      sc.bfgs = cfg.bfgs;
      out.cells.push_back(success_rate(ops, sc));
    }
  }
  return out;
}

}  // namespace eigenrec
