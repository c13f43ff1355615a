#include <doctest.h>

#include "eigenrec/bfgs_refiner.hpp"
#include "eigenrec/errors.hpp"
#include "eigenrec/metrics.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "test_support.hpp"

using namespace eigenrec;

TEST_CASE("BFGS solves a convex quadratic in a handful of iterations") {
  // f(x) = 1/2 x^T D x - b^T x with D = diag(1..5).
  const std::vector<double> b{1, -2, 3, -4, 5};
  auto f = [&](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += 0.5 * (i + 1.0) * x[i] * x[i] - b[i] * x[i];
    return s;
  };
  auto g = [&](std::span<const double> x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = (i + 1.0) * x[i] - b[i];
    return out;
  };
  // Finite termination needs near-exact line searches.
  BfgsOptions opt;
  opt.wolfe_c2 = 0.1;
  const BfgsResult r = bfgs_minimize(f, g, std::vector<double>(5, 0.0), opt);
  CHECK(r.converged);
  CHECK(r.iterations <= 10);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.x[i] == doctest::Approx(b[i] / (i + 1.0)).epsilon(1e-8));
}

TEST_CASE("BFGS finds the Rosenbrock minimum") {
  auto f = [](std::span<const double> x) {
    return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
  };
  auto g = [](std::span<const double> x) {
    return std::vector<double>{-400.0 * x[0] * (x[1] - x[0] * x[0]) - 2.0 * (1.0 - x[0]),
                               200.0 * (x[1] - x[0] * x[0])};
  };
  const BfgsResult r = bfgs_minimize(f, g, {-1.2, 1.0});
  CHECK(r.converged);
  CHECK(std::abs(r.x[0] - 1.0) <= 1e-6);
  CHECK(std::abs(r.x[1] - 1.0) <= 1e-6);
}

TEST_CASE("central differences agree with analytic gradients") {
  auto f = [](std::span<const double> x) { return std::sin(x[0]) * std::exp(x[1]); };
  const auto g = central_gradient(f, std::vector<double>{0.4, -0.3});
  CHECK(g[0] == doctest::Approx(std::cos(0.4) * std::exp(-0.3)).epsilon(1e-8));
  CHECK(g[1] == doctest::Approx(std::sin(0.4) * std::exp(-0.3)).epsilon(1e-8));
}

TEST_CASE("refinement objective gradient matches finite differences") {
  Rng rng(15);
  const OperatorSet ops = build_local_set(InteractionGraph::ring(3), 15);
  ObjectiveContext ctx;
  ctx.ops = &ops;
  ctx.a = forward_map(testsupport::uniform_vector(rng, 3), ops, 0).a;
  ctx.beta = 5.0;
  for (int t = 0; t < 5; ++t) {
    const auto x = testsupport::uniform_vector(rng, 3);
    const auto analytic = gradient(x, ctx);
    const auto numeric = central_gradient([&](std::span<const double> y) { return objective(y, ctx); }, x);
    const double scale = std::max(1e-8, testsupport::norm(numeric));
    std::vector<double> diff(3);
    for (std::size_t i = 0; i < 3; ++i) diff[i] = analytic[i] - numeric[i];
    CHECK(testsupport::norm(diff) / scale <= 1e-5);
  }
}

TEST_CASE("the exact coefficients minimize the objective and refinement recovers them") {
  Rng rng(16);
  const OperatorSet ops = build_local_set(InteractionGraph::ring(3), 16);
  auto c = testsupport::uniform_vector(rng, 3);
  ObjectiveContext ctx;
  ctx.ops = &ops;
  ctx.a = forward_map(c, ops, 0).a;
  const double nc = testsupport::norm(c);
  for (auto& v : c) v /= nc;
  CHECK(objective(c, ctx) <= 1e-12);

  std::vector<double> x0(c);
  x0[0] += 0.02;
  const RefineResult r = refine(x0, ctx);
  CHECK(testsupport::norm(r.x_star) == doctest::Approx(1.0));
  const GramMatrix gram(ops);
  CHECK(fidelity(r.x_star, c, gram) > kSuccessFidelity);
  CHECK_THROWS_AS(refine(std::vector<double>{0.0, 0.0, 0.0}, ctx), InvalidInput);
}

TEST_CASE("Wilson interval reference values") {
  auto [lo, hi] = wilson_interval(0, 10);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(0.27753).epsilon(1e-4));
  std::tie(lo, hi) = wilson_interval(5, 10);
  CHECK(lo == doctest::Approx(0.23659).epsilon(1e-4));
  CHECK(hi == doctest::Approx(0.76341).epsilon(1e-4));
  std::tie(lo, hi) = wilson_interval(300, 300);
  CHECK(hi == doctest::Approx(1.0));
  CHECK(lo > 0.98);
}

TEST_CASE("success-rate runs are reproducible") {
  const OperatorSet ops = build_local_set(InteractionGraph::ring(3), 4);
  SuccessRateConfig cfg;
  cfg.n_trials = 4;
  cfg.seed = 9;
  cfg.bfgs.max_iter = 50;
  const SuccessRateResult a = success_rate(ops, cfg);
  const SuccessRateResult b = success_rate(ops, cfg);
  CHECK(a.successes == b.successes);
  CHECK(a.final_fidelity == b.final_fidelity);
  CHECK(a.trials == 4);
  CHECK(a.rate == doctest::Approx(static_cast<double>(a.successes) / 4.0));
  CHECK(success_csv_header() == "level,init_policy,trials,successes,rate,ci_low,ci_high\n");
  cfg.policy = InitPolicy::network;
  CHECK_THROWS_AS(success_rate(ops, cfg), InvalidInput);
}
