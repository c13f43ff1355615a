// eigenrec: command-line driver for data generation, training, routing,
// refinement and the experiment sweeps.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "eigenrec/bfgs_refiner.hpp"
#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/errors.hpp"
#include "eigenrec/experiments.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/metrics.hpp"
#include "eigenrec/neural_regressor.hpp"
#include "eigenrec/operator_models.hpp"
#include "eigenrec/sign_router.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "eigenrec/trajectory_lab.hpp"

#ifndef EIGENREC_VERSION
#define EIGENREC_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace eigenrec;
using json = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kIntegrity = 2, kUnverified = 3, kNumeric = 4 };

/// Collected while a command runs and written next to its outputs.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> inputs;   // path -> hash
  std::map<std::string, std::string> outputs;  // path -> hash
  json seeds = json::object();
  json extra = json::object();
};

json flags_of(const CLI::App* sub) {
  json flags = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    const auto& res = opt->results();
    std::string joined;
    for (std::size_t i = 0; i < res.size(); ++i) joined += (i ? "," : "") + res[i];
    flags[opt->get_name()] = res.empty() ? "true" : joined;
  }
  return flags;
}

void write_manifest(const Manifest& m, const CLI::App* sub, const fs::path& where, double seconds) {
  json j;
  j["schema_version"] = 1;
  j["tool"] = "eigenrec";
  j["tool_version"] = EIGENREC_VERSION;
  j["command"] = m.command;
  j["flags"] = flags_of(sub);
  j["seeds"] = m.seeds;
  json in = json::object(), out = json::object();
  for (const auto& [p, h] : m.inputs) in[p] = h;
  for (const auto& [p, h] : m.outputs) out[p] = h;
  j["inputs"] = in;
  j["outputs"] = out;
  if (!m.extra.empty()) j["summary"] = m.extra;
  j["started_at_unix"] = static_cast<long long>(std::time(nullptr) - static_cast<long long>(seconds));
  j["wall_clock_seconds"] = seconds;
  write_text_file(where, j.dump(2) + "\n");
}

void record_output(Manifest& m, const fs::path& p) { m.outputs[p.string()] = file_hash(p); }
void record_input(Manifest& m, const fs::path& p) { m.inputs[p.string()] = file_hash(p); }

void emit(Manifest& m, const fs::path& p, const std::string& text) {
  write_text_file(p, text);
  record_output(m, p);
}

std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> v;
  std::string cleaned = text;
  for (auto& ch : cleaned) {
    if (ch == '[' || ch == ']') ch = ' ';
  }
  std::stringstream ss(cleaned);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\n");
    if (b == std::string::npos) continue;
    cell = cell.substr(b, cell.find_last_not_of(" \t\n") - b + 1);
    char* end = nullptr;
    const double x = std::strtod(cell.c_str(), &end);
    if (*end != '\0' || !std::isfinite(x)) throw ParseError("bad number in vector: '" + cell + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ParseError("empty vector");
  return v;
}

TrainConfig load_train_config(const std::string& path, TrainConfig c = {}) {
  if (path.empty()) return c;
  json j;
  try {
    j = json::parse(read_text_file(path));
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<std::size_t>();
    if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<std::size_t>();
    if (j.contains("patience")) c.patience = j["patience"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("standardize_inputs")) c.standardize_inputs = j["standardize_inputs"].get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  c.validate();
  return c;
}

json train_report_json(const TrainReport& r) {
  json j;
  j["epochs_run"] = r.epochs_run;
  j["best_epoch"] = r.best_epoch;
  j["best_val_loss"] = r.best_val_loss;
  j["transfer_init"] = r.transfer_init;
  j["seconds"] = r.seconds;
  j["train_loss"] = r.train_loss;
  j["val_loss"] = r.val_loss;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hamiltonian reconstruction from eigenstate expectation values"};
  app.set_version_flag("--version", EIGENREC_VERSION);
  app.require_subcommand(1);

  Manifest manifest;
  std::optional<fs::path> manifest_path;
  std::function<int()> action;

  // ops-gen
  auto* ops_gen = app.add_subcommand("ops-gen", "Generate an operator set");
  std::string og_kind = "general", og_out;
  int og_n = 5, og_count = 0;
  std::uint64_t og_seed = 1;
  ops_gen->add_option("--kind", og_kind, "general | chain | ring | fully-connected")->capture_default_str();
  ops_gen->add_option("--n-qubits", og_n)->capture_default_str();
  ops_gen->add_option("--n-ops", og_count, "general kind only; 0 means n")->capture_default_str();
  ops_gen->add_option("--seed", og_seed)->capture_default_str();
  ops_gen->add_option("--out", og_out)->required();
  ops_gen->callback([&] {
    action = [&] {
      const OperatorSet ops = model_operators(model_kind_from_string(og_kind), og_n, og_seed, og_count);
      save_operator_set(ops, og_out);
      record_output(manifest, og_out);
      manifest.seeds["ops"] = og_seed;
      manifest.extra["operators"] = ops.size();
      manifest.extra["hash"] = ops.hash();
      manifest_path = fs::path(og_out + ".manifest.json");
      std::cout << ops.size() << " operators, hash " << ops.hash() << "\n";
      return kOk;
    };
  });

  // data-gen
  auto* data_gen = app.add_subcommand("data-gen", "Sample coefficients and emit expectation data (JSONL)");
  std::string dg_ops, dg_levels, dg_out, dg_sign;
  std::size_t dg_sets = 1000;
  double dg_noise = 0.0;
  std::uint64_t dg_seed = 1, dg_offset = 0;
  bool dg_keep = false;
  data_gen->add_option("--ops", dg_ops)->required()->check(CLI::ExistingFile);
  data_gen->add_option("--sets", dg_sets)->capture_default_str();
  data_gen->add_option("--levels", dg_levels, "comma list; default lower half");
  data_gen->add_option("--noise-ratio", dg_noise)->capture_default_str();
  data_gen->add_option("--seed", dg_seed)->capture_default_str();
  data_gen->add_option("--draw-offset", dg_offset)->capture_default_str();
  data_gen->add_option("--sign-pattern", dg_sign, "restrict draws to one orthant, e.g. +-+");
  data_gen->add_flag("--keep-degenerate", dg_keep);
  data_gen->add_option("--out", dg_out)->required();
  data_gen->callback([&] {
    action = [&] {
      const OperatorSet ops = load_operator_set(dg_ops);
      record_input(manifest, dg_ops);
      GenerateOptions g;
      g.n_sets = dg_sets;
      g.seed = dg_seed;
      g.noise_ratio = dg_noise;
      g.keep_degenerate = dg_keep;
      g.draw_offset = dg_offset;
      if (!dg_sign.empty()) g.sign_pattern = SignPattern(dg_sign).str();
      if (!dg_levels.empty()) {
        for (double v : parse_vector(dg_levels)) g.levels.push_back(static_cast<std::size_t>(v));
      }
      GenerateResult r = generate(ops, g);
      r.dataset.operator_set_hash = ops.hash();
      r.dataset.operator_set_path = dg_ops;
      save_jsonl(r.dataset, dg_out);
      record_output(manifest, dg_out);
      manifest.seeds["data"] = dg_seed;
      manifest.extra = {{"draws", r.report.draws},
                        {"emitted", r.report.emitted},
                        {"degenerate", r.report.degenerate},
                        {"degenerate_excluded", r.report.degenerate_excluded}};
      manifest_path = fs::path(dg_out + ".manifest.json");
      std::cout << r.report.emitted << " samples from " << r.report.draws << " draws\n";
      return kOk;
    };
  });

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the coefficient regressor");
  std::string tr_data, tr_config, tr_transfer, tr_out, tr_ops;
  double tr_val = 0.1, tr_test = 0.1;
  std::optional<std::uint64_t> tr_seed;
  train_cmd->add_option("--data", tr_data)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--val-frac", tr_val)->capture_default_str();
  train_cmd->add_option("--test-frac", tr_test)->capture_default_str();
  train_cmd->add_option("--config", tr_config, "JSON training config")->check(CLI::ExistingFile);
  train_cmd->add_option("--transfer-from", tr_transfer, "checkpoint to initialize from")->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", tr_seed);
  train_cmd->add_option("--ops", tr_ops, "operator set, for test-fidelity reporting")->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr_out)->required();
  train_cmd->callback([&] {
    action = [&] {
      std::optional<OperatorSet> ops;
      if (!tr_ops.empty()) {
        ops = load_operator_set(tr_ops);
        record_input(manifest, tr_ops);
      }
      LoadOptions lo;
      lo.ops = ops ? &*ops : nullptr;
      const Dataset ds = load_jsonl(tr_data, lo);
      record_input(manifest, tr_data);
      TrainConfig cfg = load_train_config(tr_config);
      if (tr_seed) cfg.seed = *tr_seed;
      const SplitResult parts = split(ds, SplitFractions{1.0 - tr_val - tr_test, tr_val, tr_test}, cfg.seed);
      std::optional<Checkpoint> from;
      if (!tr_transfer.empty()) {
        from = load_checkpoint(tr_transfer);
        record_input(manifest, tr_transfer);
        if (from->operator_set_hash != ds.operator_set_hash) {
          throw IntegrityError("transfer checkpoint was trained on a different operator set");
        }
      }
      TrainResult r = train_regressor(parts.train, parts.val, cfg, from ? &from->params : nullptr);
      save_checkpoint(Checkpoint{r.params, cfg, ds.operator_set_hash}, tr_out);
      record_output(manifest, tr_out);
      json rep = train_report_json(r.report);
      rep["test_loss"] = mean_loss(r.params, regression_set(parts.test), LossKind::cosine);
      emit(manifest, tr_out + ".report.json", rep.dump(1) + "\n");
      if (ops) {
        const MLPParams& p = r.params;
        const FidelityReport fr =
            evaluate([&p](std::span<const double> a) { return mlp_forward(p, a); }, parts.test, *ops, "test");
        emit(manifest, tr_out + ".fidelity.csv", report_csv(fr));
      }
      manifest.seeds["train"] = cfg.seed;
      manifest_path = fs::path(tr_out + ".manifest.json");
      std::cout << "epochs " << r.report.epochs_run << ", best val loss " << format_double(r.report.best_val_loss)
                << "\n";
      return kOk;
    };
  });

  // route-train
  auto* route_train = app.add_subcommand("route-train", "Train the sign classifier and per-part regressors");
  std::string rt_ops, rt_config, rt_cls_config, rt_out;
  std::uint64_t rt_seed = 1;
  std::size_t rt_part_draws = 40, rt_part_val = 8, rt_cls_draws = 16;
  route_train->add_option("--ops", rt_ops)->required()->check(CLI::ExistingFile);
  route_train->add_option("--seed", rt_seed)->capture_default_str();
  route_train->add_option("--part-draws", rt_part_draws)->capture_default_str();
  route_train->add_option("--part-val-draws", rt_part_val)->capture_default_str();
  route_train->add_option("--classifier-draws", rt_cls_draws)->capture_default_str();
  route_train->add_option("--config", rt_config, "training config for the part regressors")->check(CLI::ExistingFile);
  route_train->add_option("--classifier-config", rt_cls_config, "training config for the sign classifier")
      ->check(CLI::ExistingFile);
  route_train->add_option("--out", rt_out, "bundle directory")->required();
  route_train->callback([&] {
    action = [&] {
      const OperatorSet ops = load_operator_set(rt_ops);
      record_input(manifest, rt_ops);
      const auto parts = orthant_part_data(ops, rt_seed, rt_part_draws, rt_part_val, {});
      RouterTrainConfig rc;
      rc.seed = derive_seed(rt_seed, 1);
      rc.classifier_draws = rt_cls_draws;
      if (!rt_config.empty()) rc.part_train = load_train_config(rt_config);
      if (!rt_cls_config.empty()) rc.classifier_train = load_train_config(rt_cls_config, rc.classifier_train);
      const RouterBuild build = build_router(ops, parts, rc);
      const RouterModel& router = build.router;
      const PartsTrainReport& rep = build.parts_report;
      save_router(router, rt_out);
      for (const auto& entry : fs::directory_iterator(rt_out)) {
        if (entry.path().filename() != "run_manifest.json") record_output(manifest, entry.path());
      }
      manifest.seeds["router"] = rt_seed;
      manifest.extra = {{"parts_trained", rep.order.size()},
                        {"parts_missing", rep.missing.size()},
                        {"classifier_epochs", build.classifier_report.epochs_run},
                        {"empty_classes", build.empty_classes}};
      manifest_path = fs::path(rt_out) / "run_manifest.json";
      std::cout << rep.order.size() << " parts trained, " << rep.missing.size() << " missing\n";
      return kOk;
    };
  });

  // route-predict
  auto* route_predict = app.add_subcommand("route-predict", "Route an expectation vector through a router bundle");
  std::string rp_router, rp_ops, rp_a, rp_a_file, rp_out;
  VerificationPolicy rp_policy;
  route_predict->add_option("--router", rp_router)->required()->check(CLI::ExistingDirectory);
  route_predict->add_option("--ops", rp_ops)->required()->check(CLI::ExistingFile);
  auto* rp_a_opt = route_predict->add_option("--a", rp_a, "comma-separated expectation vector");
  route_predict->add_option("--a-file", rp_a_file, "file with a JSON array")->excludes(rp_a_opt);
  route_predict->add_option("--tau", rp_policy.residual_tol)->capture_default_str();
  route_predict->add_option("--max-candidates", rp_policy.max_candidates)->capture_default_str();
  route_predict->add_option("--out", rp_out, "result JSON (stdout if omitted)");
  route_predict->callback([&] {
    action = [&] {
      if (rp_a.empty() == rp_a_file.empty()) throw InvalidInput("give exactly one of --a / --a-file");
      const OperatorSet ops = load_operator_set(rp_ops);
      record_input(manifest, rp_ops);
      const RouterModel router = load_router(rp_router);
      if (!rp_a_file.empty()) record_input(manifest, rp_a_file);
      const std::vector<double> a = parse_vector(rp_a.empty() ? read_text_file(rp_a_file) : rp_a);
      const RouteResult r = route_and_predict(router, a, ops, rp_policy);
      json j;
      j["verified"] = r.verified;
      j["pattern"] = r.pattern.str();
      j["c"] = r.c;
      j["residual"] = std::isfinite(r.residual) ? json(r.residual) : json(nullptr);
      j["level"] = r.level;
      json cands = json::array();
      for (const auto& c : r.candidates) {
        cands.push_back({{"pattern", c.pattern.str()},
                         {"probability", c.probability},
                         {"residual", std::isfinite(c.residual) ? json(c.residual) : json(nullptr)},
                         {"level", c.level},
                         {"missing", c.missing}});
      }
      j["ranking"] = cands;
      if (rp_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        emit(manifest, rp_out, j.dump(2) + "\n");
        manifest_path = fs::path(rp_out + ".manifest.json");
      }
      return r.verified ? kOk : kUnverified;
    };
  });

  // refine
  auto* refine_cmd = app.add_subcommand("refine", "BFGS refinement of a coefficient estimate");
  std::string rf_ops, rf_a, rf_a_file, rf_model, rf_x0, rf_truth, rf_out;
  double rf_beta = kDefaultBeta;
  BfgsOptions rf_bfgs;
  std::uint64_t rf_seed = 1;
  refine_cmd->add_option("--ops", rf_ops)->required()->check(CLI::ExistingFile);
  auto* rf_a_opt = refine_cmd->add_option("--a", rf_a, "comma-separated expectation vector");
  refine_cmd->add_option("--a-file", rf_a_file)->excludes(rf_a_opt);
  auto* rf_model_opt = refine_cmd->add_option("--from-model", rf_model, "initial point from a checkpoint");
  refine_cmd->add_option("--x0", rf_x0, "explicit initial point")->excludes(rf_model_opt);
  refine_cmd->add_option("--seed", rf_seed, "random initial point when neither --from-model nor --x0")
      ->capture_default_str();
  refine_cmd->add_option("--truth", rf_truth, "true coefficients, for the fidelity report");
  refine_cmd->add_option("--beta", rf_beta)->capture_default_str();
  refine_cmd->add_option("--tol", rf_bfgs.tol)->capture_default_str();
  refine_cmd->add_option("--max-iter", rf_bfgs.max_iter)->capture_default_str();
  refine_cmd->add_option("--out", rf_out, "RefineResult JSON (stdout if omitted)");
  refine_cmd->callback([&] {
    action = [&] {
      if (rf_a.empty() == rf_a_file.empty()) throw InvalidInput("give exactly one of --a / --a-file");
      const OperatorSet ops = load_operator_set(rf_ops);
      record_input(manifest, rf_ops);
      ObjectiveContext ctx{&ops, parse_vector(rf_a.empty() ? read_text_file(rf_a_file) : rf_a), rf_beta};
      std::vector<double> x0;
      std::string init = "random";
      if (!rf_model.empty()) {
        const Checkpoint ck = load_checkpoint(rf_model);
        record_input(manifest, rf_model);
        if (ck.operator_set_hash != ops.hash()) throw IntegrityError("checkpoint was trained on a different operator set");
        x0 = predict_coefficients(ck.params, ctx.a);
        init = "network";
      } else if (!rf_x0.empty()) {
        x0 = parse_vector(rf_x0);
        init = "explicit";
      } else {
        Rng rng(rf_seed);
        for (std::size_t i = 0; i < ops.size(); ++i) x0.push_back(rng.uniform(-1.0, 1.0));
        manifest.seeds["init"] = rf_seed;
      }
      RefineResult r = refine(x0, ctx, rf_bfgs);
      if (!rf_truth.empty()) r.fidelity_vs_truth = fidelity(r.x_star, parse_vector(rf_truth), GramMatrix(ops));
      json j;
      j["init"] = init;
      j["x0"] = x0;
      j["x_star"] = r.x_star;
      j["objective_value"] = r.objective_value;
      j["iterations"] = r.iterations;
      j["converged"] = r.converged;
      j["stop_reason"] = r.stop_reason;
      j["fidelity_vs_truth"] = r.fidelity_vs_truth ? json(*r.fidelity_vs_truth) : json(nullptr);
      if (r.fidelity_vs_truth) j["success"] = *r.fidelity_vs_truth > kSuccessFidelity;
      if (rf_out.empty()) {
        std::cout << j.dump(2) << "\n";
      } else {
        emit(manifest, rf_out, j.dump(2) + "\n");
        manifest_path = fs::path(rf_out + ".manifest.json");
      }
      return kOk;
    };
  });

  // Shared experiment flags.
  struct ExpFlags {
    std::string kind = "general";
    int n_qubits = 5;
    int n_ops = 0;
    std::uint64_t ops_seed = 1;
    std::uint64_t seed = 1;
    std::size_t draws = 1000;
    std::string config;
    std::string out;
  };
  auto add_exp_flags = [](CLI::App* sub, ExpFlags& f) {
    sub->add_option("--kind", f.kind, "general | chain | ring | fully-connected")->capture_default_str();
    sub->add_option("--n-qubits", f.n_qubits)->capture_default_str();
    sub->add_option("--n-ops", f.n_ops)->capture_default_str();
    sub->add_option("--ops-seed", f.ops_seed)->capture_default_str();
    sub->add_option("--seed", f.seed)->capture_default_str();
    sub->add_option("--sets", f.draws, "coefficient draws")->capture_default_str();
    sub->add_option("--config", f.config, "JSON training config")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output directory")->required();
  };
  auto exp_ops = [&](const ExpFlags& f) {
    manifest.seeds["ops"] = f.ops_seed;
    manifest.seeds["experiment"] = f.seed;
    OperatorSet ops = model_operators(model_kind_from_string(f.kind), f.n_qubits, f.ops_seed, f.n_ops);
    save_operator_set(ops, fs::path(f.out) / "ops.json");
    record_output(manifest, fs::path(f.out) / "ops.json");
    return ops;
  };

  auto* exp_fid = app.add_subcommand("exp-fidelity", "Per-level reconstruction fidelity");
  ExpFlags ef;
  add_exp_flags(exp_fid, ef);
  exp_fid->callback([&] {
    action = [&] {
      const OperatorSet ops = exp_ops(ef);
      FidelityExperimentConfig cfg;
      cfg.seed = ef.seed;
      cfg.draws = ef.draws;
      cfg.train = load_train_config(ef.config);
      const FidelityExperimentResult r = run_fidelity_experiment(ops, cfg);
      emit(manifest, fs::path(ef.out) / "fidelity.csv", report_csv(r.report));
      emit(manifest, fs::path(ef.out) / "fidelity.json", report_json(r.report));
      save_checkpoint(Checkpoint{r.params, cfg.train, ops.hash()}, fs::path(ef.out) / "model.json");
      record_output(manifest, fs::path(ef.out) / "model.json");
      manifest.extra["train"] = train_report_json(r.train_report);
      manifest_path = fs::path(ef.out) / "manifest.json";
      std::cout << report_csv(r.report);
      return kOk;
    };
  });

  auto* exp_noise = app.add_subcommand("exp-noise", "Fidelity under relative noise on the expectations");
  ExpFlags en;
  en.kind = "ring";
  std::string en_ratios = "0,0.2,0.5,1";
  add_exp_flags(exp_noise, en);
  exp_noise->add_option("--ratios", en_ratios)->capture_default_str();
  exp_noise->callback([&] {
    action = [&] {
      const OperatorSet ops = exp_ops(en);
      FidelityExperimentConfig cfg;
      cfg.seed = en.seed;
      cfg.draws = en.draws;
      cfg.train = load_train_config(en.config);
      const auto runs = run_noise_experiment(ops, cfg, parse_vector(en_ratios));
      emit(manifest, fs::path(en.out) / "noise.csv", noise_csv(runs));
      manifest_path = fs::path(en.out) / "manifest.json";
      std::cout << noise_csv(runs);
      return kOk;
    };
  });

  auto* exp_succ = app.add_subcommand("exp-success", "BFGS success rate, random vs network initial points");
  ExpFlags es;
  es.kind = "ring";
  std::size_t es_trials = 300;
  std::string es_levels = "0,1";
  double es_beta = kDefaultBeta;
  add_exp_flags(exp_succ, es);
  exp_succ->add_option("--trials", es_trials)->capture_default_str();
  exp_succ->add_option("--levels", es_levels)->capture_default_str();
  exp_succ->add_option("--beta", es_beta)->capture_default_str();
  exp_succ->callback([&] {
    action = [&] {
      const OperatorSet ops = exp_ops(es);
      SuccessExperimentConfig cfg;
      cfg.seed = es.seed;
      cfg.n_trials = es_trials;
      cfg.beta = es_beta;
      cfg.levels.clear();
      for (double v : parse_vector(es_levels)) cfg.levels.push_back(static_cast<std::size_t>(v));
      cfg.network.seed = derive_seed(es.seed, 0x6e6574);
      cfg.network.draws = es.draws;
      cfg.network.train = load_train_config(es.config);
      const SuccessExperimentResult r = run_success_experiment(ops, cfg);
      std::string csv = success_csv_header();
      for (const auto& c : r.cells) csv += success_csv_row(c);
      emit(manifest, fs::path(es.out) / "success.csv", csv);
      emit(manifest, fs::path(es.out) / "network_fidelity.csv", report_csv(r.network.report));
      manifest_path = fs::path(es.out) / "manifest.json";
      std::cout << csv;
      return kOk;
    };
  });

  auto* sweep_cmd = app.add_subcommand("sweep", "Two-operator sweep: trajectories, energies, crossings");
  std::string sw_kind = "general", sw_out, sw_levels;
  int sw_n = 3;
  std::uint64_t sw_seed = 1;
  std::size_t sw_points = 2000;
  double sw_gap_tol = kDefaultGapTol;
  sweep_cmd->add_option("--kind", sw_kind, "general | chain2local")->capture_default_str();
  sweep_cmd->add_option("--n-qubits", sw_n)->capture_default_str();
  sweep_cmd->add_option("--seed", sw_seed)->capture_default_str();
  sweep_cmd->add_option("--points", sw_points)->capture_default_str();
  sweep_cmd->add_option("--levels", sw_levels, "comma list; default all");
  sweep_cmd->add_option("--gap-tol", sw_gap_tol, "negative selects 1e-6 * max ||H||")->capture_default_str();
  sweep_cmd->add_option("--out", sw_out, "output directory")->required();
  sweep_cmd->callback([&] {
    action = [&] {
      SweepConfig cfg;
      cfg.theta_points = sw_points;
      cfg.ops = sweep_operators(sweep_kind_from_string(sw_kind), sw_n, sw_seed);
      if (!sw_levels.empty()) {
        for (double v : parse_vector(sw_levels)) cfg.levels.push_back(static_cast<std::size_t>(v));
      }
      const SweepResult res = sweep(cfg);
      const auto crossings = detect_crossings(res, sw_gap_tol);
      for (const auto& p : export_plot_data(res, crossings, sw_out)) record_output(manifest, p);
      json si = json::object();
      for (const auto& t : res.levels) si[std::to_string(t.level)] = polyline_self_intersections(t);
      manifest.seeds["ops"] = sw_seed;
      manifest.extra = {{"crossings", crossings.size()},
                        {"crossing_angles", crossing_angles(crossings)},
                        {"polyline_self_intersections", si}};
      manifest_path = fs::path(sw_out) / "manifest.json";
      std::cout << crossings.size() << " crossings\n";
      return kOk;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  const auto t0 = std::chrono::steady_clock::now();
  CLI::App* sub = app.get_subcommands().front();
  manifest.command = sub->get_name();
  int code = kOk;
  try {
    code = action();
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::parse:
      case ErrorKind::integrity: return kIntegrity;
      case ErrorKind::numeric: return kNumeric;
      default: return kUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  if (manifest_path) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(manifest, sub, *manifest_path, secs);
  }
  return code;
}
