#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/operator_models.hpp"
#include "eigenrec/pauli_algebra.hpp"

namespace eigenrec {

/// 1/2 + Tr(H_rec H) / (2 sqrt(Tr H_rec^2) sqrt(Tr H^2)), clamped to [0, 1].
double fidelity(const HermitianOp& h_rec, const HermitianOp& h);

/// G_ij = Tr(A_i A_j); turns operator inner products into coefficient algebra.
class GramMatrix {
 public:
  explicit GramMatrix(const OperatorSet& ops);
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return g_[i * n_ + j]; }
  /// u^T G v = Tr(assemble(u) assemble(v))
  double inner(std::span<const double> u, std::span<const double> v) const;

 private:
  std::size_t n_ = 0;
  std::vector<double> g_;
};

/// Same value as fidelity(assemble(c_rec), assemble(c)) without forming matrices.
double fidelity(std::span<const double> c_rec, std::span<const double> c, const GramMatrix& gram);

struct LevelStats {
  std::size_t level = 0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct FidelityReport {
  std::string tag;
  double noise_ratio = 0.0;
  std::vector<LevelStats> levels;  // ascending level

  /// Mean at `level`; throws InvalidInput if the level has no samples.
  const LevelStats& at(std::size_t level) const;
};

/// Maps an expectation vector to a coefficient estimate.
using Predictor = std::function<std::vector<double>(std::span<const double> a)>;

/// Scores predictor(a) against c for every sample, grouped by level.
/// The predictor must be safe to call concurrently.
FidelityReport evaluate(const Predictor& predictor, const Dataset& test, const OperatorSet& ops,
                        std::string tag = {});

/// Same, for predictors that may look at the whole sample (oracle baselines).
using SamplePredictor = std::function<std::vector<double>(const Sample& sample)>;
FidelityReport evaluate_samples(const SamplePredictor& predictor, const Dataset& test, const OperatorSet& ops,
                                std::string tag = {});

/// level,mean_f,min_f,max_f,count
std::string report_csv(const FidelityReport& report);
std::string report_json(const FidelityReport& report);

}  // namespace eigenrec
