#include "eigenrec/sign_router.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/spectral_engine.hpp"

namespace eigenrec {

namespace {

constexpr std::size_t kMaxPatternBits = 63;
constexpr double kProbFloor = 1e-300;
constexpr double kTieRelTol = 1e-12;

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

SignPattern::SignPattern(std::string signs) : signs_(std::move(signs)) {
  if (signs_.empty()) throw InvalidInput("sign pattern must be non-empty");
  for (char ch : signs_) {
    if (ch != '+' && ch != '-') throw InvalidInput("sign pattern may only contain '+' and '-': " + signs_);
  }
}

SignPattern SignPattern::of(std::span<const double> c) {
  std::string s(c.size(), '+');
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::isnan(c[i])) throw InvalidInput("sign of NaN coefficient");
    if (c[i] < 0.0) s[i] = '-';
  }
  return SignPattern(std::move(s));
}

SignPattern SignPattern::from_index(std::uint64_t index, std::size_t n) {
  if (n == 0 || n > kMaxPatternBits) throw InvalidInput("pattern length out of range");
  if (index >> n) throw InvalidInput("pattern index out of range");
  std::string s(n, '+');
  for (std::size_t i = 0; i < n; ++i) {
    if ((index >> (n - 1 - i)) & 1U) s[i] = '-';
  }
  return SignPattern(std::move(s));
}

std::uint64_t SignPattern::index() const {
  if (signs_.size() > kMaxPatternBits) throw InvalidInput("pattern too long to index");
  std::uint64_t idx = 0;
  for (char ch : signs_) idx = (idx << 1) | (ch == '-' ? 1U : 0U);
  return idx;
}

SignPattern SignPattern::complement() const {
  std::string s = signs_;
  for (auto& ch : s) ch = (ch == '+') ? '-' : '+';
  return SignPattern(std::move(s));
}

std::vector<SignPattern> gray_order(std::size_t n) {
  if (n == 0 || n > 24) throw ResourceLimit("Gray order supports 1..24 sign bits");
  const std::uint64_t count = std::uint64_t{1} << n;
  std::vector<SignPattern> out;
  out.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) out.push_back(SignPattern::from_index(i ^ (i >> 1), n));
  return out;
}

std::map<SignPattern, Dataset> sign_partition(const Dataset& ds) {
  std::map<SignPattern, Dataset> parts;
  for (const auto& s : ds.samples) {
    if (s.c.size() != ds.n_coeffs) throw InvalidInput("sample has wrong coefficient count");
    auto [it, fresh] = parts.try_emplace(SignPattern::of(s.c));
    if (fresh) {
      it->second = ds;
      it->second.samples.clear();
    }
    it->second.samples.push_back(s);
  }
  return parts;
}

const char* to_string(HeadKind kind) {
  return kind == HeadKind::joint ? "joint" : "factorized";
}

std::vector<double> SignClassifier::probabilities(std::span<const double> a) const {
  return mlp_predict(net, a);
}

ClassifierTrainResult train_classifier(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg) {
  const std::size_t n = train_ds.n_coeffs;
  if (n == 0 || val_ds.n_coeffs != n) throw InvalidInput("classifier datasets disagree on N");
  ClassifierTrainResult out;
  const bool joint = n <= kMaxJointHeadCoeffs;
  out.classifier.kind = joint ? HeadKind::joint : HeadKind::factorized;

  auto labelled = [&](const Dataset& ds) {
    TrainingSet ts;
    ts.input_dim = n;
    ts.target_dim = joint ? 1 : n;
    for (const auto& s : ds.samples) {
      const SignPattern p = SignPattern::of(s.c);
      if (joint) {
        const double cls = static_cast<double>(p.index());
        ts.add(s.a, std::span<const double>(&cls, 1));
      } else {
        std::vector<double> t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = p.str()[i] == '+' ? 1.0 : 0.0;
        ts.add(s.a, t);
      }
    }
    return ts;
  };
  const TrainingSet tr = labelled(train_ds);
  const TrainingSet va = labelled(val_ds);

  std::vector<std::size_t> dims = regressor_dims(n);
  if (joint) {
    dims.back() = std::size_t{1} << n;
    std::vector<std::size_t> seen(dims.back(), 0);
    for (std::size_t i = 0; i < tr.size(); ++i) ++seen[static_cast<std::size_t>(tr.target(i)[0])];
    for (std::size_t c = 0; c < seen.size(); ++c) {
      if (seen[c] == 0) out.empty_classes.push_back(c);
    }
  }
  const MLPParams init = init_params(dims, cfg.seed, joint ? OutputHead::softmax : OutputHead::sigmoid);
  TrainResult r = train(tr, va, cfg, joint ? LossKind::cross_entropy : LossKind::binary_cross_entropy, init);
  out.classifier.net = std::move(r.params);
  out.report = std::move(r.report);
  return out;
}

double factorized_log_likelihood(std::span<const double> p_plus, const SignPattern& pattern) {
  if (p_plus.size() != pattern.size()) throw InvalidInput("pattern length does not match head size");
  double ll = 0.0;
  for (std::size_t i = 0; i < p_plus.size(); ++i) {
    const double p = pattern.str()[i] == '+' ? p_plus[i] : 1.0 - p_plus[i];
    ll += std::log(std::max(p, kProbFloor));
  }
  return ll;
}

PatternRanking PatternRanking::joint(std::vector<double> class_probs, std::size_t n) {
  if (n == 0 || n > kMaxPatternBits || class_probs.size() != (std::uint64_t{1} << n)) {
    throw InvalidInput("joint ranking needs 2^N probabilities");
  }
  PatternRanking r;
  r.kind_ = HeadKind::joint;
  r.n_ = n;
  r.sorted_.reserve(class_probs.size());
  for (std::size_t i = 0; i < class_probs.size(); ++i) r.sorted_.emplace_back(class_probs[i], i);
  std::stable_sort(r.sorted_.begin(), r.sorted_.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  return r;
}

PatternRanking PatternRanking::factorized(std::vector<double> p_plus) {
  const std::size_t n = p_plus.size();
  if (n == 0) throw InvalidInput("factorized ranking needs at least one coordinate");
  PatternRanking r;
  r.kind_ = HeadKind::factorized;
  r.n_ = n;
  r.base_.assign(n, '+');
  std::vector<double> cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = p_plus[i];
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("per-coordinate probability outside [0, 1]");
    const double hi = std::max(p, 1.0 - p), lo = std::min(p, 1.0 - p);
    if (p < 0.5) r.base_[i] = '-';
    cost[i] = std::log(std::max(hi, kProbFloor)) - std::log(std::max(lo, kProbFloor));
  }
  r.order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.order_[i] = i;
  std::stable_sort(r.order_.begin(), r.order_.end(), [&](std::size_t x, std::size_t y) { return cost[x] < cost[y]; });
  r.flip_cost_.resize(n);
  for (std::size_t i = 0; i < n; ++i) r.flip_cost_[i] = cost[r.order_[i]];
  r.p_plus_ = std::move(p_plus);
  return r;
}

PatternRanking::Node PatternRanking::make_node(std::vector<std::size_t> flips) const {
  Node node{0.0, base_, std::move(flips)};
  for (std::size_t j : node.flips) {
    node.cost += flip_cost_[j];
    char& ch = node.pattern[order_[j]];
    ch = ch == '+' ? '-' : '+';
  }
  return node;
}

std::optional<std::pair<SignPattern, double>> PatternRanking::next() {
  if (kind_ == HeadKind::joint) {
    if (cursor_ >= sorted_.size()) return std::nullopt;
    const auto& [p, idx] = sorted_[cursor_++];
    return std::make_pair(SignPattern::from_index(idx, n_), p);
  }

  if (!started_) {
    started_ = true;
    heap_.push(make_node({}));
  }
  if (pending_.empty()) {
    if (heap_.empty()) return std::nullopt;
    // Pop the whole group of (numerically) tied costs so lexicographic order
    // holds within it even if some members were discovered late.
    const double group = heap_.top().cost;
    const double slack = kTieRelTol * std::max(1.0, std::abs(group));
    std::vector<Node> tied;
    while (!heap_.empty() && heap_.top().cost <= group + slack) {
      Node node = heap_.top();
      heap_.pop();
      // Successors of flip set S with largest element j: S + {j+1}, and S with j -> j+1.
      const std::size_t next_j = node.flips.empty() ? 0 : node.flips.back() + 1;
      if (next_j < n_) {
        auto extended = node.flips;
        extended.push_back(next_j);
        heap_.push(make_node(std::move(extended)));
        if (!node.flips.empty()) {
          auto shifted = node.flips;
          shifted.back() = next_j;
          heap_.push(make_node(std::move(shifted)));
        }
      }
      tied.push_back(std::move(node));
    }
    std::sort(tied.begin(), tied.end(), [](const Node& x, const Node& y) { return x.pattern > y.pattern; });
    for (auto& node : tied) {
      SignPattern pat(std::move(node.pattern));
      const double prob = std::exp(factorized_log_likelihood(p_plus_, pat));
      pending_.emplace_back(std::move(pat), prob);
    }
  }
  auto out = std::move(pending_.back());
  pending_.pop_back();
  return out;
}

PatternRanking rank_patterns(const SignClassifier& classifier, std::span<const double> a) {
  std::vector<double> probs = classifier.probabilities(a);
  if (classifier.kind == HeadKind::joint) return PatternRanking::joint(std::move(probs), classifier.n_coeffs());
  return PatternRanking::factorized(std::move(probs));
}

std::map<SignPattern, std::optional<MLPParams>> train_parts(const std::map<SignPattern, PartData>& parts,
                                                            std::size_t n_coeffs, const TrainConfig& cfg,
                                                            PartsTrainReport* report,
                                                            const MLPParams* seed_params) {
  cfg.validate();
  std::map<SignPattern, std::optional<MLPParams>> out;
  const MLPParams* prev = seed_params;
  std::optional<MLPParams> last;
  std::size_t step = 0;
  for (const auto& pattern : gray_order(n_coeffs)) {
    const auto it = parts.find(pattern);
    if (it == parts.end() || it->second.train.samples.empty()) {
      out[pattern] = std::nullopt;
      if (report) report->missing.push_back(pattern);
      continue;
    }
    const PartData& pd = it->second;
    TrainConfig part_cfg = cfg;
    part_cfg.seed = derive_seed(cfg.seed, step++);
    const Dataset& val = pd.val.samples.empty() ? pd.train : pd.val;
    TrainResult r = train_regressor(pd.train, val, part_cfg, prev);
    if (report) {
      report->order.push_back(pattern);
      report->reports[pattern] = r.report;
    }
    last = std::move(r.params);
    out[pattern] = last;
    prev = &*last;
  }
  return out;
}

void VerificationPolicy::validate() const {
  if (!(residual_tol > 0.0) || !std::isfinite(residual_tol)) throw InvalidInput("residual_tol must be positive");
  if (max_candidates == 0) throw InvalidInput("max_candidates must be at least 1");
}

std::pair<double, std::size_t> forward_residual(std::span<const double> c, std::span<const double> a,
                                                const OperatorSet& ops) {
  if (c.size() != ops.size() || a.size() != ops.size()) throw InvalidInput("forward_residual: length mismatch");
  const double a_norm = l2(a);
  if (!(a_norm > 0.0)) return {std::numeric_limits<double>::infinity(), 0};
  const Spectrum spec = eigendecompose(assemble(c, ops));
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_level = 0;
  for (std::size_t j = 0; j < spec.eigenvalues.size(); ++j) {
    const std::vector<double> aj = expectations(spec.vector(j), ops);
    double s = 0.0;
    for (std::size_t i = 0; i < aj.size(); ++i) s += (aj[i] - a[i]) * (aj[i] - a[i]);
    const double r = std::sqrt(s) / a_norm;
    if (r < best) {
      best = r;
      best_level = j;
    }
  }
  return {best, best_level};
}

RouteResult route_and_predict(const RouterModel& router, std::span<const double> a, const OperatorSet& ops,
                              const VerificationPolicy& policy) {
  policy.validate();
  if (router.ops_hash != ops.hash()) throw IntegrityError("router was trained on a different operator set");
  if (a.size() != router.n_coeffs) throw InvalidInput("expectation vector has wrong length");
  for (double v : a) {
    if (!std::isfinite(v)) throw InvalidInput("expectation vector is not finite");
  }

  RouteResult out;
  PatternRanking ranking = rank_patterns(router.classifier, a);
  std::optional<std::size_t> best;
  for (std::size_t tried = 0; tried < policy.max_candidates; ++tried) {
    auto next = ranking.next();
    if (!next) break;
    CandidateResult cand;
    cand.pattern = next->first;
    cand.probability = next->second;
    cand.residual = std::numeric_limits<double>::infinity();
    const auto part = router.parts.find(cand.pattern);
    if (part == router.parts.end() || !part->second) {
      cand.missing = true;
    } else {
      try {
        cand.c = predict_coefficients(*part->second, a);
        std::tie(cand.residual, cand.level) = forward_residual(cand.c, a, ops);
      } catch (const NumericError&) {
        cand.c.clear();
      }
    }
    out.candidates.push_back(cand);
    const std::size_t at = out.candidates.size() - 1;
    if (!cand.c.empty() && (!best || cand.residual < out.candidates[*best].residual)) best = at;
    if (!cand.c.empty() && cand.residual <= policy.residual_tol) {
      best = at;
      out.verified = true;
      break;
    }
  }
  if (best) {
    const auto& b = out.candidates[*best];
    out.c = b.c;
    out.pattern = b.pattern;
    out.residual = b.residual;
    out.level = b.level;
  } else {
    out.residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

void save_router(const RouterModel& router, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["version"] = 1;
  manifest["N"] = router.n_coeffs;
  manifest["head_kind"] = to_string(router.classifier.kind);
  nlohmann::json order = nlohmann::json::array(), missing = nlohmann::json::array();
  for (const auto& p : router.gray) {
    order.push_back(p.str());
    const auto it = router.parts.find(p);
    if (it == router.parts.end() || !it->second) missing.push_back(p.str());
  }
  manifest["gray_order"] = std::move(order);
  manifest["missing"] = std::move(missing);
  manifest["ops_hash"] = router.ops_hash;
  write_text_file(dir / "manifest.json", manifest.dump(1) + "\n");
  write_text_file(dir / "classifier.json",
                  checkpoint_to_json(Checkpoint{router.classifier.net, TrainConfig{}, router.ops_hash}));
  for (const auto& [pattern, params] : router.parts) {
    if (!params) continue;
    write_text_file(dir / (pattern.str() + ".json"),
                    checkpoint_to_json(Checkpoint{*params, TrainConfig{}, router.ops_hash}));
  }
}

RouterModel load_router(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("router manifest: ") + e.what());
  }
  RouterModel r;
  try {
    if (manifest.at("version").get<int>() != 1) throw ParseError("router manifest: unsupported version");
    r.n_coeffs = manifest.at("N").get<std::size_t>();
    r.ops_hash = manifest.at("ops_hash").get<std::string>();
    const std::string head = manifest.at("head_kind").get<std::string>();
    if (head != "joint" && head != "factorized") throw ParseError("router manifest: unknown head_kind " + head);
    r.classifier.kind = head == "joint" ? HeadKind::joint : HeadKind::factorized;
    for (const auto& p : manifest.at("gray_order")) r.gray.emplace_back(p.get<std::string>());
    std::vector<std::string> missing;
    if (manifest.contains("missing")) missing = manifest["missing"].get<std::vector<std::string>>();
    for (const auto& p : r.gray) {
      if (p.size() != r.n_coeffs) throw IntegrityError("router manifest: pattern length differs from N");
      if (std::find(missing.begin(), missing.end(), p.str()) != missing.end()) {
        r.parts[p] = std::nullopt;
        continue;
      }
      Checkpoint ck = load_checkpoint(dir / (p.str() + ".json"));
      if (ck.operator_set_hash != r.ops_hash) throw IntegrityError("part " + p.str() + ": operator set hash differs");
      if (ck.params.input_dim() != r.n_coeffs || ck.params.output_dim() != r.n_coeffs) {
        throw IntegrityError("part " + p.str() + ": network shape does not match N");
      }
      r.parts[p] = std::move(ck.params);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("router manifest: ") + e.what());
  }
  Checkpoint cls = load_checkpoint(dir / "classifier.json");
  if (cls.operator_set_hash != r.ops_hash) throw IntegrityError("classifier: operator set hash differs");
  const std::size_t want_out =
      r.classifier.kind == HeadKind::joint ? (std::size_t{1} << r.n_coeffs) : r.n_coeffs;
  if (cls.params.input_dim() != r.n_coeffs || cls.params.output_dim() != want_out) {
    throw IntegrityError("classifier shape does not match N");
  }
  r.classifier.net = std::move(cls.params);
  return r;
}

}  // namespace eigenrec
