#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/operator_models.hpp"
#include "eigenrec/pauli_algebra.hpp"

namespace eigenrec {

/// Hidden activation max(0.1 z, z). The subgradient at 0 is taken as 0.1.
inline constexpr double kLeakySlope = 0.1;
inline constexpr double kCosineNormFloor = 1e-12;

/// How the final affine layer is read out. Training losses act on the raw
/// (pre-head) outputs.
enum class OutputHead { identity, softmax, sigmoid };
const char* to_string(OutputHead head);

/// Fully connected net: weights[l] is dims[l+1] x dims[l], row-major.
struct MLPParams {
  std::vector<std::size_t> dims;
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;
  OutputHead head = OutputHead::identity;

  std::size_t layer_count() const noexcept { return weights.size(); }
  std::size_t input_dim() const noexcept { return dims.front(); }
  std::size_t output_dim() const noexcept { return dims.back(); }
  std::size_t parameter_count() const noexcept;
  /// Throws InvalidInput on inconsistent shapes or non-finite values.
  void validate() const;

  friend bool operator==(const MLPParams&, const MLPParams&) = default;
};

/// [n, 64, 32, n]
std::vector<std::size_t> regressor_dims(std::size_t n);

/// He-style uniform init for LeakyReLU: U(-b, b), b = sqrt(6 / ((1 + 0.1^2) fan_in)); zero biases.
MLPParams init_params(std::vector<std::size_t> dims, std::uint64_t seed,
                      OutputHead head = OutputHead::identity);

/// Raw network output W3 s(W2 s(W1 a + b1) + b2) + b3.
std::vector<double> mlp_forward(const MLPParams& p, std::span<const double> a);
/// Output after the head (softmax probabilities / sigmoid probabilities).
std::vector<double> mlp_predict(const MLPParams& p, std::span<const double> a);

/// 1 - <pred, target> / (max(|pred|, 1e-12) |target|), in [0, 2].
double cosine_loss(std::span<const double> pred, std::span<const double> target);

enum class LossKind {
  cosine,                // target: coefficient vector
  cross_entropy,         // target: one value, the class index
  binary_cross_entropy,  // target: one 0/1 label per output, averaged over outputs
};

/// Flat row-major inputs/targets.
struct TrainingSet {
  std::size_t input_dim = 0;
  std::size_t target_dim = 0;
  std::vector<double> inputs;
  std::vector<double> targets;

  std::size_t size() const noexcept { return input_dim ? inputs.size() / input_dim : 0; }
  std::span<const double> input(std::size_t i) const noexcept {
    return {inputs.data() + i * input_dim, input_dim};
  }
  std::span<const double> target(std::size_t i) const noexcept {
    return {targets.data() + i * target_dim, target_dim};
  }
  void add(std::span<const double> in, std::span<const double> target);
};

/// a -> c pairs.
TrainingSet regression_set(const Dataset& ds);

/// Loss on raw outputs; writes dLoss/dOutput into grad when non-empty.
double loss_and_grad(LossKind kind, std::span<const double> out, std::span<const double> target,
                     std::span<double> grad);

struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> biases;

  static Gradients zeros_like(const MLPParams& p);
  void clear();
};

/// Exact gradient of the mean loss over `batch` (indices into data);
/// returns the mean loss. Overwrites grads.
double backward(const MLPParams& p, const TrainingSet& data, std::span<const std::size_t> batch,
                LossKind kind, Gradients& grads);

double mean_loss(const MLPParams& p, const TrainingSet& data, LossKind kind);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 500;
  std::size_t patience = 50;
  std::uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// Train on per-feature standardized inputs; the affine map is folded into
  /// the first layer afterwards, so the returned network takes raw inputs.
  bool standardize_inputs = true;

  void validate() const;
};

/// Per-feature (x - mean) / scale, fitted on a training set (scale floored to 1
/// for constant features).
struct InputScaler {
  std::vector<double> mean;
  std::vector<double> scale;

  TrainingSet apply(const TrainingSet& data) const;
  /// Rewrites a network trained on scaled inputs into one taking raw inputs.
  void fold_into(MLPParams& p) const;
  /// Inverse of fold_into.
  void unfold_from(MLPParams& p) const;
};
InputScaler fit_input_scaler(const TrainingSet& data);

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::size_t best_epoch = 0;  // 0-based index into val_loss
  double best_val_loss = 0.0;
  std::size_t epochs_run = 0;
  double seconds = 0.0;
  bool transfer_init = false;
};

struct TrainResult {
  MLPParams params;
  TrainReport report;
};

/// Adam on shuffled mini-batches starting from `initial`; keeps the
/// parameters of the best validation epoch and stops after `patience`
/// epochs without improvement. Throws NumericError if a loss goes NaN.
/// With standardize_inputs, a fresh `initial` is taken to live in scaled
/// coordinates, while a transfer_init network is taken to take raw inputs.
TrainResult train(const TrainingSet& train_set, const TrainingSet& val_set, const TrainConfig& cfg,
                  LossKind kind, const MLPParams& initial, bool transfer_init = false);

/// Cosine-loss regressor on a -> c. Fresh init from cfg.seed unless
/// `transfer_from` is given.
TrainResult train_regressor(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                            const MLPParams* transfer_from = nullptr);

struct HamiltonianPrediction {
  std::vector<double> c;  // unit norm
  HermitianOp h;
};

/// c_hat = normalized network output, H_rec = assemble(c_hat).
HamiltonianPrediction predict_hamiltonian(const MLPParams& p, std::span<const double> a,
                                          const OperatorSet& ops);
/// Unit-normalized network output; throws NumericError on a zero output.
std::vector<double> predict_coefficients(const MLPParams& p, std::span<const double> a);

struct Checkpoint {
  MLPParams params;
  TrainConfig config;
  std::string operator_set_hash;
};

std::string checkpoint_to_json(const Checkpoint& ck);
Checkpoint checkpoint_from_json(const std::string& text);
void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace eigenrec
