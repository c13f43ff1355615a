#include "eigenrec/neural_regressor.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/kernels.hpp"
#include "eigenrec/rng.hpp"
#include "eigenrec/spectral_engine.hpp"

namespace eigenrec {

using nlohmann::json;

const char* to_string(OutputHead head) {
  switch (head) {
    case OutputHead::identity: return "identity";
    case OutputHead::softmax: return "softmax";
    case OutputHead::sigmoid: return "sigmoid";
  }
  return "identity";
}

namespace {

OutputHead head_from_string(const std::string& text) {
  if (text == "identity") return OutputHead::identity;
  if (text == "softmax") return OutputHead::softmax;
  if (text == "sigmoid") return OutputHead::sigmoid;
  throw ParseError("unknown output head '" + text + "'");
}

inline double leaky(double z) noexcept { return z > 0.0 ? z : kLeakySlope * z; }
inline double leaky_slope(double z) noexcept { return z > 0.0 ? 1.0 : kLeakySlope; }

// Per-call activations: pre[l] = z_{l+1}, post[l] = h_{l+1}; post of the
// last layer is the raw output.
struct Workspace {
  std::vector<std::vector<double>> pre, post;
  std::vector<double> delta, delta_prev, grad_out;

  explicit Workspace(const MLPParams& p) {
    for (std::size_t l = 0; l < p.layer_count(); ++l) {
      pre.emplace_back(p.dims[l + 1]);
      post.emplace_back(p.dims[l + 1]);
    }
    const std::size_t widest = *std::max_element(p.dims.begin(), p.dims.end());
    delta.resize(widest);
    delta_prev.resize(widest);
    grad_out.resize(p.output_dim());
  }
};

void forward_into(const MLPParams& p, std::span<const double> x, Workspace& ws) {
  const auto& k = kernels::active();
  const double* in = x.data();
  const std::size_t last = p.layer_count() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    auto& z = ws.pre[l];
    k.gemv(p.weights[l].data(), p.dims[l + 1], p.dims[l], in, p.biases[l].data(), z.data());
    auto& h = ws.post[l];
    if (l == last) {
      std::copy(z.begin(), z.end(), h.begin());
    } else {
      for (std::size_t i = 0; i < z.size(); ++i) h[i] = leaky(z[i]);
    }
    in = h.data();
  }
}

void check_input(const MLPParams& p, std::span<const double> a) {
  if (p.weights.empty()) throw InvalidInput("network has no layers");
  if (a.size() != p.input_dim()) {
    throw InvalidInput("network expects input of length " + std::to_string(p.input_dim()) + ", got " +
                       std::to_string(a.size()));
  }
}

double norm(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

}  // namespace

std::size_t MLPParams::parameter_count() const noexcept {
  std::size_t total = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) total += weights[l].size() + biases[l].size();
  return total;
}

void MLPParams::validate() const {
  if (dims.size() < 2) throw InvalidInput("network needs at least an input and an output layer");
  if (weights.size() != dims.size() - 1 || biases.size() != dims.size() - 1) {
    throw InvalidInput("layer count does not match dims");
  }
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    if (dims[l] == 0 || dims[l + 1] == 0) throw InvalidInput("zero-width layer");
    if (weights[l].size() != dims[l + 1] * dims[l]) throw InvalidInput("weight matrix shape mismatch at layer " + std::to_string(l));
    if (biases[l].size() != dims[l + 1]) throw InvalidInput("bias shape mismatch at layer " + std::to_string(l));
    for (double w : weights[l]) if (!std::isfinite(w)) throw InvalidInput("non-finite weight");
    for (double b : biases[l]) if (!std::isfinite(b)) throw InvalidInput("non-finite bias");
  }
}

std::vector<std::size_t> regressor_dims(std::size_t n) { return {n, 64, 32, n}; }

MLPParams init_params(std::vector<std::size_t> dims, std::uint64_t seed, OutputHead head) {
  MLPParams p;
  p.dims = std::move(dims);
  p.head = head;
  if (p.dims.size() < 2) throw InvalidInput("network needs at least two layer widths");
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
    const std::size_t fan_in = p.dims[l], fan_out = p.dims[l + 1];
    if (fan_in == 0 || fan_out == 0) throw InvalidInput("zero-width layer");
    const double bound = std::sqrt(6.0 / ((1.0 + kLeakySlope * kLeakySlope) * static_cast<double>(fan_in)));
    std::vector<double> w(fan_in * fan_out);
    for (auto& v : w) v = rng.uniform(-bound, bound);
    p.weights.push_back(std::move(w));
    p.biases.emplace_back(fan_out, 0.0);
  }
  return p;
}

std::vector<double> mlp_forward(const MLPParams& p, std::span<const double> a) {
  check_input(p, a);
  Workspace ws(p);
  forward_into(p, a, ws);
  return ws.post.back();
}

std::vector<double> mlp_predict(const MLPParams& p, std::span<const double> a) {
  std::vector<double> out = mlp_forward(p, a);
  if (p.head == OutputHead::softmax) {
    const double mx = *std::max_element(out.begin(), out.end());
    double z = 0.0;
    for (auto& v : out) z += (v = std::exp(v - mx));
    for (auto& v : out) v /= z;
  } else if (p.head == OutputHead::sigmoid) {
    for (auto& v : out) v = 1.0 / (1.0 + std::exp(-v));
  }
  return out;
}

double cosine_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw InvalidInput("cosine_loss: length mismatch");
  const double nc = norm(target);
  if (nc == 0.0) throw InvalidInput("cosine_loss: zero target vector");
  const double np = std::max(norm(pred), kCosineNormFloor);
  const double cos = kernels::dot(pred, target) / (np * nc);
  return 1.0 - std::clamp(cos, -1.0, 1.0);
}

void TrainingSet::add(std::span<const double> in, std::span<const double> target) {
  if (input_dim == 0 && inputs.empty()) {
    input_dim = in.size();
    target_dim = target.size();
  }
  if (in.size() != input_dim || target.size() != target_dim) {
    throw InvalidInput("training pair has inconsistent dimensions");
  }
  inputs.insert(inputs.end(), in.begin(), in.end());
  targets.insert(targets.end(), target.begin(), target.end());
}

TrainingSet regression_set(const Dataset& ds) {
  TrainingSet set;
  set.input_dim = ds.n_coeffs;
  set.target_dim = ds.n_coeffs;
  set.inputs.reserve(ds.samples.size() * ds.n_coeffs);
  set.targets.reserve(ds.samples.size() * ds.n_coeffs);
  for (const auto& s : ds.samples) set.add(s.a, s.c);
  return set;
}

double loss_and_grad(LossKind kind, std::span<const double> out, std::span<const double> target,
                     std::span<double> grad) {
  const bool want_grad = !grad.empty();
  switch (kind) {
    case LossKind::cosine: {
      if (out.size() != target.size()) throw InvalidInput("cosine loss: length mismatch");
      const double nc = norm(target);
      if (nc == 0.0) throw InvalidInput("cosine loss: zero target vector");
      const double raw = norm(out);
      const double nu = std::max(raw, kCosineNormFloor);
      const double dotv = kernels::dot(out, target);
      const double cos = dotv / (nu * nc);
      if (want_grad) {
        for (std::size_t i = 0; i < out.size(); ++i) {
          double g = -target[i] / (nu * nc);
          if (raw > kCosineNormFloor) g += cos * out[i] / (nu * nu);
          grad[i] = g;
        }
      }
      return 1.0 - cos;
    }
    case LossKind::cross_entropy: {
      if (target.size() != 1) throw InvalidInput("cross entropy expects a single class index");
      const auto cls = static_cast<std::size_t>(target[0]);
      if (cls >= out.size()) throw InvalidInput("class index out of range");
      const double mx = *std::max_element(out.begin(), out.end());
      double z = 0.0;
      for (double v : out) z += std::exp(v - mx);
      const double log_z = mx + std::log(z);
      if (want_grad) {
        for (std::size_t i = 0; i < out.size(); ++i) grad[i] = std::exp(out[i] - log_z);
        grad[cls] -= 1.0;
      }
      return log_z - out[cls];
    }
    case LossKind::binary_cross_entropy: {
      if (target.size() != out.size()) throw InvalidInput("binary cross entropy: length mismatch");
      const double inv = 1.0 / static_cast<double>(out.size());
      double total = 0.0;
      for (std::size_t i = 0; i < out.size(); ++i) {
        const double z = out[i];
        // softplus(z) - t z, computed stably
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        total += softplus - target[i] * z;
        if (want_grad) grad[i] = (1.0 / (1.0 + std::exp(-z)) - target[i]) * inv;
      }
      return total * inv;
    }
  }
  return 0.0;
}

Gradients Gradients::zeros_like(const MLPParams& p) {
  Gradients g;
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    g.weights.emplace_back(p.weights[l].size(), 0.0);
    g.biases.emplace_back(p.biases[l].size(), 0.0);
  }
  return g;
}

void Gradients::clear() {
  for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
  for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
}

namespace {

double backward_with(const MLPParams& p, const TrainingSet& data, std::span<const std::size_t> batch,
                     LossKind kind, Gradients& grads, Workspace& ws) {
  if (batch.empty()) throw InvalidInput("backward: empty batch");
  if (grads.weights.size() != p.layer_count()) grads = Gradients::zeros_like(p);
  grads.clear();
  const auto& k = kernels::active();
  const double inv = 1.0 / static_cast<double>(batch.size());
  const std::size_t last = p.layer_count() - 1;
  double total = 0.0;
  for (std::size_t idx : batch) {
    const auto x = data.input(idx);
    forward_into(p, x, ws);
    total += loss_and_grad(kind, ws.post[last], data.target(idx), ws.grad_out);
    for (std::size_t i = 0; i < ws.grad_out.size(); ++i) ws.delta[i] = ws.grad_out[i] * inv;
    for (std::size_t l = last + 1; l-- > 0;) {
      const std::size_t rows = p.dims[l + 1], cols = p.dims[l];
      const double* h_in = l == 0 ? x.data() : ws.post[l - 1].data();
      k.ger(grads.weights[l].data(), rows, cols, ws.delta.data(), h_in);
      k.axpy(1.0, ws.delta.data(), grads.biases[l].data(), rows);
      if (l == 0) break;
      k.gemv_t(p.weights[l].data(), rows, cols, ws.delta.data(), ws.delta_prev.data());
      const auto& z_prev = ws.pre[l - 1];
      for (std::size_t i = 0; i < cols; ++i) ws.delta_prev[i] *= leaky_slope(z_prev[i]);
      std::swap(ws.delta, ws.delta_prev);
    }
  }
  return total * inv;
}

void check_data(const MLPParams& p, const TrainingSet& data, LossKind kind) {
  if (data.input_dim != p.input_dim()) throw InvalidInput("dataset input width does not match network");
  const std::size_t want = kind == LossKind::cross_entropy ? 1 : p.output_dim();
  if (data.target_dim != want) throw InvalidInput("dataset target width does not match network/loss");
}

}  // namespace

double backward(const MLPParams& p, const TrainingSet& data, std::span<const std::size_t> batch,
                LossKind kind, Gradients& grads) {
  check_data(p, data, kind);
  Workspace ws(p);
  return backward_with(p, data, batch, kind, grads, ws);
}

double mean_loss(const MLPParams& p, const TrainingSet& data, LossKind kind) {
  check_data(p, data, kind);
  if (data.size() == 0) throw InvalidInput("mean_loss: empty dataset");
  Workspace ws(p);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    forward_into(p, data.input(i), ws);
    total += loss_and_grad(kind, ws.post.back(), data.target(i), {});
  }
  return total / static_cast<double>(data.size());
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0) || batch_size == 0 || max_epochs == 0 || patience == 0) {
    throw InvalidInput("training config values must be positive");
  }
  if (patience > max_epochs) throw InvalidInput("patience must not exceed max_epochs");
}

InputScaler fit_input_scaler(const TrainingSet& data) {
  InputScaler s;
  const std::size_t n = data.size();
  s.mean.assign(data.input_dim, 0.0);
  s.scale.assign(data.input_dim, 1.0);
  if (n == 0) return s;
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.input(i);
    for (std::size_t j = 0; j < x.size(); ++j) s.mean[j] += x[j];
  }
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(data.input_dim, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = data.input(i);
    for (std::size_t j = 0; j < x.size(); ++j) var[j] += (x[j] - s.mean[j]) * (x[j] - s.mean[j]);
  }
  for (std::size_t j = 0; j < var.size(); ++j) {
    const double sd = std::sqrt(var[j] / static_cast<double>(n));
    s.scale[j] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

TrainingSet InputScaler::apply(const TrainingSet& data) const {
  TrainingSet out = data;
  for (std::size_t i = 0; i < out.size(); ++i) {
    double* x = out.inputs.data() + i * out.input_dim;
    for (std::size_t j = 0; j < out.input_dim; ++j) x[j] = (x[j] - mean[j]) / scale[j];
  }
  return out;
}

void InputScaler::fold_into(MLPParams& p) const {
  auto& w = p.weights.front();
  auto& b = p.biases.front();
  const std::size_t in = p.dims[0];
  for (std::size_t r = 0; r < b.size(); ++r) {
    for (std::size_t j = 0; j < in; ++j) {
      w[r * in + j] /= scale[j];
      b[r] -= w[r * in + j] * mean[j];
    }
  }
}

void InputScaler::unfold_from(MLPParams& p) const {
  auto& w = p.weights.front();
  auto& b = p.biases.front();
  const std::size_t in = p.dims[0];
  for (std::size_t r = 0; r < b.size(); ++r) {
    for (std::size_t j = 0; j < in; ++j) {
      b[r] += w[r * in + j] * mean[j];
      w[r * in + j] *= scale[j];
    }
  }
}

TrainResult train(const TrainingSet& raw_train, const TrainingSet& raw_val, const TrainConfig& cfg,
                  LossKind kind, const MLPParams& initial, bool transfer_init) {
  cfg.validate();
  initial.validate();
  check_data(initial, raw_train, kind);
  check_data(initial, raw_val, kind);
  if (raw_train.size() == 0 || raw_val.size() == 0) throw InvalidInput("training and validation sets must be non-empty");

  const auto started = std::chrono::steady_clock::now();
  TrainResult result{initial, {}};
  result.report.transfer_init = transfer_init;
  MLPParams params = initial;

  std::optional<InputScaler> scaler;
  TrainingSet scaled_train, scaled_val;
  if (cfg.standardize_inputs) {
    scaler = fit_input_scaler(raw_train);
    scaled_train = scaler->apply(raw_train);
    scaled_val = scaler->apply(raw_val);
    if (transfer_init) scaler->unfold_from(params);
  }
  const TrainingSet& train_set = scaler ? scaled_train : raw_train;
  const TrainingSet& val_set = scaler ? scaled_val : raw_val;
  Gradients grads = Gradients::zeros_like(params);
  Gradients m = Gradients::zeros_like(params), v = Gradients::zeros_like(params);
  Workspace ws(params);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng shuffle_rng(derive_seed(cfg.seed, 0x7368756666ULL));

  double best = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;
  std::uint64_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      const std::span<const std::size_t> batch(order.data() + start, len);
      const double loss = backward_with(params, train_set, batch, kind, grads, ws);
      if (!std::isfinite(loss)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) + " (loss " +
                           format_double(loss) + ")");
      }
      epoch_loss += loss * static_cast<double>(len);
      ++step;
      const double c1 = 1.0 / (1.0 - std::pow(cfg.adam_beta1, static_cast<double>(step)));
      const double c2 = 1.0 / (1.0 - std::pow(cfg.adam_beta2, static_cast<double>(step)));
      auto update = [&](std::vector<double>& w, const std::vector<double>& g, std::vector<double>& mm,
                        std::vector<double>& vv) {
        for (std::size_t i = 0; i < w.size(); ++i) {
          mm[i] = cfg.adam_beta1 * mm[i] + (1.0 - cfg.adam_beta1) * g[i];
          vv[i] = cfg.adam_beta2 * vv[i] + (1.0 - cfg.adam_beta2) * g[i] * g[i];
          w[i] -= cfg.learning_rate * (mm[i] * c1) / (std::sqrt(vv[i] * c2) + cfg.adam_eps);
        }
      };
      for (std::size_t l = 0; l < params.layer_count(); ++l) {
        update(params.weights[l], grads.weights[l], m.weights[l], v.weights[l]);
        update(params.biases[l], grads.biases[l], m.biases[l], v.biases[l]);
      }
    }
    const double train_loss = epoch_loss / static_cast<double>(order.size());
    const double val_loss = mean_loss(params, val_set, kind);
    if (!std::isfinite(val_loss)) {
      throw NumericError("validation loss is not finite at epoch " + std::to_string(epoch));
    }
    result.report.train_loss.push_back(train_loss);
    result.report.val_loss.push_back(val_loss);
    result.report.epochs_run = epoch + 1;
    if (val_loss < best) {
      best = val_loss;
      result.params = params;
      result.report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  if (scaler) scaler->fold_into(result.params);
  result.report.best_val_loss = best;
  result.report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

TrainResult train_regressor(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg,
                            const MLPParams* transfer_from) {
  if (train_ds.n_coeffs != val_ds.n_coeffs) throw InvalidInput("train/val datasets disagree on N");
  const MLPParams initial =
      transfer_from ? *transfer_from : init_params(regressor_dims(train_ds.n_coeffs), cfg.seed);
  if (initial.input_dim() != train_ds.n_coeffs || initial.output_dim() != train_ds.n_coeffs) {
    throw InvalidInput("initial network shape does not match dataset N");
  }
  return train(regression_set(train_ds), regression_set(val_ds), cfg, LossKind::cosine, initial,
               transfer_from != nullptr);
}

std::vector<double> predict_coefficients(const MLPParams& p, std::span<const double> a) {
  std::vector<double> c = mlp_forward(p, a);
  const double n = norm(c);
  if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("network output has zero or non-finite norm");
  for (auto& v : c) v /= n;
  return c;
}

HamiltonianPrediction predict_hamiltonian(const MLPParams& p, std::span<const double> a,
                                          const OperatorSet& ops) {
  HamiltonianPrediction out;
  out.c = predict_coefficients(p, a);
  out.h = assemble(out.c, ops);
  return out;
}

std::string checkpoint_to_json(const Checkpoint& ck) {
  const MLPParams& p = ck.params;
  std::string out = "{\n \"version\": 1,\n \"layer_dims\": [";
  for (std::size_t i = 0; i < p.dims.size(); ++i) out += (i ? "," : "") + std::to_string(p.dims[i]);
  out += "],\n \"activation\": \"leaky_relu_0.1\",\n \"head\": \"";
  out += to_string(p.head);
  out += "\",\n \"weights\": [";
  for (std::size_t l = 0; l < p.layer_count(); ++l) {
    out += l ? ",\n  [" : "\n  [";
    const std::size_t cols = p.dims[l];
    for (std::size_t r = 0; r < p.dims[l + 1]; ++r) {
      out += r ? "," : "";
      out += format_array(std::span<const double>(p.weights[l].data() + r * cols, cols));
    }
    out += "]";
  }
  out += "\n ],\n \"biases\": [";
  for (std::size_t l = 0; l < p.layer_count(); ++l) out += (l ? ",\n  " : "\n  ") + format_array(p.biases[l]);
  out += "\n ],\n \"train_config\": {";
  const TrainConfig& c = ck.config;
  out += "\"learning_rate\": " + format_double(c.learning_rate) +
         ", \"batch_size\": " + std::to_string(c.batch_size) +
         ", \"max_epochs\": " + std::to_string(c.max_epochs) +
         ", \"patience\": " + std::to_string(c.patience) + ", \"seed\": " + std::to_string(c.seed) +
         ", \"adam_beta1\": " + format_double(c.adam_beta1) +
         ", \"adam_beta2\": " + format_double(c.adam_beta2) +
         ", \"adam_eps\": " + format_double(c.adam_eps) +
         ", \"standardize_inputs\": " + (c.standardize_inputs ? "true" : "false") + "},\n";
  out += " \"operator_set_hash\": \"" + ck.operator_set_hash + "\"\n}\n";
  return out;
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed checkpoint JSON: ") + e.what());
  }
  Checkpoint ck;
  try {
    if (doc.at("version").get<int>() != 1) throw ParseError("unsupported checkpoint version");
    if (doc.at("activation").get<std::string>() != "leaky_relu_0.1") {
      throw ParseError("unsupported activation '" + doc.at("activation").get<std::string>() + "'");
    }
    MLPParams& p = ck.params;
    p.dims = doc.at("layer_dims").get<std::vector<std::size_t>>();
    p.head = head_from_string(doc.value("head", std::string("identity")));
    const auto& jw = doc.at("weights");
    const auto& jb = doc.at("biases");
    if (p.dims.size() < 2 || jw.size() != p.dims.size() - 1 || jb.size() != p.dims.size() - 1) {
      throw ParseError("checkpoint layer count does not match layer_dims");
    }
    for (std::size_t l = 0; l + 1 < p.dims.size(); ++l) {
      const auto rows = jw[l].get<std::vector<std::vector<double>>>();
      if (rows.size() != p.dims[l + 1]) throw ParseError("weight rows mismatch at layer " + std::to_string(l));
      std::vector<double> w;
      for (const auto& r : rows) {
        if (r.size() != p.dims[l]) throw ParseError("weight columns mismatch at layer " + std::to_string(l));
        w.insert(w.end(), r.begin(), r.end());
      }
      p.weights.push_back(std::move(w));
      p.biases.push_back(jb[l].get<std::vector<double>>());
    }
    const auto& tc = doc.at("train_config");
    ck.config.learning_rate = tc.at("learning_rate").get<double>();
    ck.config.batch_size = tc.at("batch_size").get<std::size_t>();
    ck.config.max_epochs = tc.at("max_epochs").get<std::size_t>();
    ck.config.patience = tc.at("patience").get<std::size_t>();
    ck.config.seed = tc.at("seed").get<std::uint64_t>();
    ck.config.adam_beta1 = tc.value("adam_beta1", 0.9);
    ck.config.adam_beta2 = tc.value("adam_beta2", 0.999);
    ck.config.adam_eps = tc.value("adam_eps", 1e-8);
    ck.config.standardize_inputs = tc.value("standardize_inputs", true);
    ck.operator_set_hash = doc.at("operator_set_hash").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad checkpoint field: ") + e.what());
  }
  try {
    ck.params.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  }
  return ck;
}

void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  write_text_file(path, checkpoint_to_json(ck));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_json(read_text_file(path));
}

}  // namespace eigenrec
