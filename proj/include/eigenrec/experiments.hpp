#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "eigenrec/bfgs_refiner.hpp"
#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/metrics.hpp"
#include "eigenrec/neural_regressor.hpp"
#include "eigenrec/operator_models.hpp"
#include "eigenrec/sign_router.hpp"

namespace eigenrec {

/// End-to-end experiment drivers shared by the CLI and the acceptance suite.
/// Every random stream is a sub-seed of one master seed.

enum class ModelKind { general, chain, ring, fully_connected };
const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& text);

/// general: N random general operators (n_coeffs = 0 means N = n);
/// otherwise one two-local operator per edge of the named graph.
OperatorSet model_operators(ModelKind kind, int n_qubits, std::uint64_t seed, int n_coeffs = 0);

/// Training, validation and test data are independent draws from the same
/// sampler (disjoint draw offsets of one data seed).
struct FidelityExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t draws = 1000;  // training draws
  std::size_t val_draws = 200;
  std::size_t test_draws = 100;
  std::vector<std::size_t> levels;  // empty = lower half
  double noise_ratio = 0.0;         // applied to every split
  TrainConfig train{};
};

struct FidelityExperimentResult {
  FidelityReport report;
  TrainReport train_report;
  MLPParams params;
  GenerateReport data_report;
};

/// generate train/val/test -> train the regressor -> per-level test fidelity.
FidelityExperimentResult run_fidelity_experiment(const OperatorSet& ops, const FidelityExperimentConfig& cfg);

/// One fidelity run per ratio with identical coefficient draws.
std::vector<FidelityExperimentResult> run_noise_experiment(const OperatorSet& ops, FidelityExperimentConfig cfg,
                                                           const std::vector<double>& ratios);

/// ratio,level,mean_f,min_f,max_f,count
std::string noise_csv(const std::vector<FidelityExperimentResult>& runs);

/// Classifier + Gray-chained part regressors from per-part data.
struct RouterTrainConfig {
  std::uint64_t seed = 1;
  std::size_t classifier_draws = 16;     // per part, taken from the part's training draws
  std::size_t classifier_val_draws = 2;  // per part, taken from the part's validation draws
  TrainConfig part_train{};
  // The joint 1024-way head overfits quickly at the default step size.
  TrainConfig classifier_train{.learning_rate = 3e-4, .batch_size = 128, .max_epochs = 60, .patience = 10};
};

struct RouterBuild {
  RouterModel router;
  PartsTrainReport parts_report;
  TrainReport classifier_report;
  std::size_t empty_classes = 0;
  double seconds_parts = 0.0;
  double seconds_classifier = 0.0;
};

RouterBuild build_router(const OperatorSet& ops, const std::map<SignPattern, PartData>& parts,
                         const RouterTrainConfig& cfg);

struct RouterExperimentConfig {
  std::uint64_t seed = 1;
  std::size_t pooled_draws = 1000;  // baseline regressor, sized like the fidelity run
  std::size_t part_draws = 40;      // orthant-constrained draws per sign part
  std::size_t part_val_draws = 8;
  std::size_t test_draws = 100;     // uniform draws disjoint from everything else
  std::vector<std::size_t> levels;  // empty = lower half
  TrainConfig pooled_train{};
  RouterTrainConfig router{};       // seed is overridden by a sub-seed of `seed`
  VerificationPolicy policy{};
};

struct RouterExperimentResult {
  RouterBuild build;
  FidelityReport routed;
  FidelityReport pooled;
  FidelityReport oracle;  // regressor of the true sign part, no classifier involved
  double verified_fraction = 0.0;
  double classifier_top1 = 0.0;  // on the test set
  std::vector<double> true_in_top;  // [k-1]: fraction with the true pattern among the first k candidates
};

/// Builds the per-part datasets, trains the Gray-chained part regressors and
/// the sign classifier, then scores routed vs pooled predictions on shared test data.
RouterExperimentResult run_router_experiment(const OperatorSet& ops, const RouterExperimentConfig& cfg);

/// Per-part training data drawn inside each orthant. Split into train/val by
/// draw offsets; seeds derive from `seed` and the pattern index.
std::map<SignPattern, PartData> orthant_part_data(const OperatorSet& ops, std::uint64_t seed, std::size_t train_draws,
                                                  std::size_t val_draws, const std::vector<std::size_t>& levels);

struct SuccessExperimentConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> levels{0, 1};
  std::size_t n_trials = 300;
  double beta = kDefaultBeta;
  BfgsOptions bfgs{};
  FidelityExperimentConfig network{};  // training run for the network-init policy
};

struct SuccessExperimentResult {
  std::vector<SuccessRateResult> cells;  // (level, policy) in level-major order, random first
  FidelityExperimentResult network;

  const SuccessRateResult& cell(std::size_t level, InitPolicy policy) const;
};

SuccessExperimentResult run_success_experiment(const OperatorSet& ops, const SuccessExperimentConfig& cfg);

}  // namespace eigenrec
