#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenrec/neural_regressor.hpp"
#include "eigenrec/operator_models.hpp"

namespace eigenrec {

inline constexpr double kDefaultBeta = 100.0;
inline constexpr double kSuccessFidelity = 1.0 - 1e-8;

/// Target data for the Gibbs-regularized least-squares objective.
struct ObjectiveContext {
  const OperatorSet* ops = nullptr;
  std::vector<double> a;
  double beta = kDefaultBeta;

  void validate() const;
};

/// sum_i (tr(A_i rho(x)) - a_i)^2 + tr(H~(x)^2 rho(x)),
/// rho(x) = exp(-beta H~^2)/Z, H~(x) = sum_i x_i (A_i - a_i I) with a the target.
double objective(std::span<const double> x, const ObjectiveContext& ctx);

using ScalarFunction = std::function<double(std::span<const double>)>;
using GradientFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Central differences with step h_i = 1e-6 * max(1, |x_i|).
std::vector<double> central_gradient(const ScalarFunction& f, std::span<const double> x);
std::vector<double> gradient(std::span<const double> x, const ObjectiveContext& ctx);

struct BfgsOptions {
  double tol = 1e-9;  // on the gradient 2-norm
  std::size_t max_iter = 500;
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  std::size_t max_line_search = 40;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double grad_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string stop_reason;
};

/// Inverse-Hessian BFGS with a strong-Wolfe line search (cubic
/// interpolation in the zoom phase). A failed line search returns the best
/// point so far with converged = false.
BfgsResult bfgs_minimize(const ScalarFunction& f, const GradientFunction& grad,
                         std::vector<double> x0, const BfgsOptions& options = {});

struct RefineResult {
  std::vector<double> x_star;  // unit norm
  double objective_value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::optional<double> fidelity_vs_truth;
  std::string stop_reason;
};

/// Minimizes objective() from x0 (finite, nonzero).
RefineResult refine(std::span<const double> x0, const ObjectiveContext& ctx,
                    const BfgsOptions& options = {});

enum class InitPolicy { random, network };
const char* to_string(InitPolicy policy);

struct SuccessRateConfig {
  std::size_t level = 0;
  std::size_t n_trials = 300;
  InitPolicy policy = InitPolicy::random;
  const MLPParams* network = nullptr;  // required for InitPolicy::network
  std::uint64_t seed = 0;
  double beta = kDefaultBeta;
  BfgsOptions bfgs;
};

struct SuccessRateResult {
  std::size_t level = 0;
  InitPolicy policy = InitPolicy::random;
  std::size_t trials = 0;
  std::size_t successes = 0;
  double rate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> initial_fidelity;
  std::vector<double> final_fidelity;
  std::vector<bool> converged;
};

/// Wilson score interval (z = 1.96 by default).
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.96);

/// Fresh target per trial (c uniform on [-1, 1)^N, a at `level`), initial
/// point per policy, refinement, success when fidelity > 1 - 1e-8.
/// Trial t uses derive_seed(seed, t).
SuccessRateResult success_rate(const OperatorSet& ops, const SuccessRateConfig& cfg);

/// level,init_policy,trials,successes,rate,ci_low,ci_high
std::string success_csv_header();
std::string success_csv_row(const SuccessRateResult& r);

}  // namespace eigenrec
