#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/neural_regressor.hpp"
#include "eigenrec/operator_models.hpp"

namespace eigenrec {

/// Componentwise signs of a coefficient vector as a string over {'+', '-'};
/// zero maps to '+'. Coordinate 0 is the most significant bit of index(),
/// with '-' = 1, so index order equals lexicographic string order.
class SignPattern {
 public:
  SignPattern() = default;
  /// Throws InvalidInput on letters other than '+'/'-'.
  explicit SignPattern(std::string signs);
  static SignPattern of(std::span<const double> c);
  static SignPattern from_index(std::uint64_t index, std::size_t n);

  const std::string& str() const noexcept { return signs_; }
  std::size_t size() const noexcept { return signs_.size(); }
  std::uint64_t index() const;
  SignPattern complement() const;

  friend auto operator<=>(const SignPattern&, const SignPattern&) = default;

 private:
  std::string signs_;
};

/// Reflected binary Gray order over all 2^n patterns: consecutive entries
/// differ in exactly one sign.
std::vector<SignPattern> gray_order(std::size_t n);

/// Samples grouped by the sign pattern of c; every sample lands in exactly one part.
std::map<SignPattern, Dataset> sign_partition(const Dataset& ds);

/// Largest N for which the classifier uses a joint softmax over 2^N classes.
inline constexpr std::size_t kMaxJointHeadCoeffs = 12;

enum class HeadKind { joint, factorized };
const char* to_string(HeadKind kind);

struct SignClassifier {
  HeadKind kind = HeadKind::joint;
  MLPParams net;  // softmax head (joint) or sigmoid head giving P(sign = '+') per coefficient

  std::size_t n_coeffs() const noexcept { return net.input_dim(); }
  /// Joint: 2^N class probabilities. Factorized: N values of P('+').
  std::vector<double> probabilities(std::span<const double> a) const;
};

struct ClassifierTrainResult {
  SignClassifier classifier;
  TrainReport report;
  std::vector<std::size_t> empty_classes;  // joint head only
};

/// Joint softmax + cross-entropy when N <= 12, else N sigmoid heads with
/// binary cross-entropy. Hidden layers match the regressor: [N, 64, 32, out].
ClassifierTrainResult train_classifier(const Dataset& train_ds, const Dataset& val_ds, const TrainConfig& cfg);

/// Log-likelihood of each pattern under a factorized head, summed in coordinate order.
double factorized_log_likelihood(std::span<const double> p_plus, const SignPattern& pattern);

/// Lazy stream of sign patterns in non-increasing probability; ties in
/// lexicographic order.
class PatternRanking {
 public:
  /// From a joint probability vector (length 2^N).
  static PatternRanking joint(std::vector<double> class_probs, std::size_t n);
  /// From per-coordinate P('+') via best-first search over flip sets.
  static PatternRanking factorized(std::vector<double> p_plus);

  /// Next pattern and its probability; nullopt when all 2^N are exhausted.
  std::optional<std::pair<SignPattern, double>> next();

 private:
  struct Node {
    double cost;            // -log probability
    std::string pattern;    // tie-break
    std::vector<std::size_t> flips;  // indices into order_ (ascending)
  };
  struct NodeCmp {
    bool operator()(const Node& a, const Node& b) const {
      if (a.cost != b.cost) return a.cost > b.cost;
      return a.pattern > b.pattern;
    }
  };

  Node make_node(std::vector<std::size_t> flips) const;

  HeadKind kind_ = HeadKind::joint;
  std::size_t n_ = 0;
  // joint
  std::vector<std::pair<double, std::uint64_t>> sorted_;
  std::size_t cursor_ = 0;
  // factorized
  std::vector<double> p_plus_;
  std::vector<std::size_t> order_;   // coordinates by ascending flip cost
  std::vector<double> flip_cost_;    // indexed like order_
  std::string base_;
  std::priority_queue<Node, std::vector<Node>, NodeCmp> heap_;
  std::vector<std::pair<SignPattern, double>> pending_;  // current tie group, reversed
  bool started_ = false;
};

PatternRanking rank_patterns(const SignClassifier& classifier, std::span<const double> a);

struct PartsTrainReport {
  std::vector<SignPattern> order;        // transfer chain actually visited (non-empty parts)
  std::vector<SignPattern> missing;      // empty parts
  std::map<SignPattern, TrainReport> reports;
};

struct PartData {
  Dataset train;
  Dataset val;
};

/// Trains one regressor per non-empty part in Gray order; each starts from
/// its predecessor's weights (the first from a fresh init, or `seed_params`).
std::map<SignPattern, std::optional<MLPParams>> train_parts(const std::map<SignPattern, PartData>& parts,
                                                            std::size_t n_coeffs, const TrainConfig& cfg,
                                                            PartsTrainReport* report = nullptr,
                                                            const MLPParams* seed_params = nullptr);

struct RouterModel {
  std::size_t n_coeffs = 0;
  SignClassifier classifier;
  std::map<SignPattern, std::optional<MLPParams>> parts;  // nullopt = missing
  std::vector<SignPattern> gray;
  std::string ops_hash;
};

struct VerificationPolicy {
  double residual_tol = 0.05;
  std::size_t max_candidates = 8;
  void validate() const;
};

struct CandidateResult {
  SignPattern pattern;
  double probability = 0.0;
  std::vector<double> c;
  double residual = 0.0;  // min_j |a(psi_j) - a| / |a|
  std::size_t level = 0;  // arg min
  bool missing = false;
};

struct RouteResult {
  std::vector<double> c;  // unit norm
  SignPattern pattern;
  double residual = 0.0;
  std::size_t level = 0;
  bool verified = false;
  std::vector<CandidateResult> candidates;  // in ranking order
};

/// Relative forward residual of candidate c against a, minimized over all levels.
std::pair<double, std::size_t> forward_residual(std::span<const double> c, std::span<const double> a,
                                                const OperatorSet& ops);

/// Walks the ranking; first candidate with residual <= tol wins, else the
/// lowest-residual candidate is returned with verified = false.
RouteResult route_and_predict(const RouterModel& router, std::span<const double> a, const OperatorSet& ops,
                              const VerificationPolicy& policy = {});

/// Directory bundle: manifest.json, classifier.json, <pattern>.json per part.
void save_router(const RouterModel& router, const std::filesystem::path& dir);
RouterModel load_router(const std::filesystem::path& dir);

}  // namespace eigenrec
