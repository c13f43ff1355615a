#include "eigenrec/bfgs_refiner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/metrics.hpp"
#include "eigenrec/parallel.hpp"
#include "eigenrec/rng.hpp"
#include "eigenrec/spectral_engine.hpp"

namespace eigenrec {

namespace {

double dotp(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm2(std::span<const double> a) { return std::sqrt(dotp(a, a)); }

}  // namespace

void ObjectiveContext::validate() const {
  if (!ops) throw InvalidInput("objective context has no operator set");
  if (a.size() != ops->size()) throw InvalidInput("target expectation vector length does not match N");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be finite and > 0");
}

double objective(std::span<const double> x, const ObjectiveContext& ctx) {
  ctx.validate();
  for (double v : x) {
    if (!std::isfinite(v)) throw InvalidInput("objective: non-finite coordinate");
  }
  const GibbsMoments m = gibbs_moments(x, ctx.a, *ctx.ops, ctx.beta);
  double total = 0.0;
  for (std::size_t i = 0; i < ctx.a.size(); ++i) {
    const double r = m.op_expectations[i] - ctx.a[i];
    total += r * r;
  }
  return total + m.h_tilde_sq;
}

std::vector<double> central_gradient(const ScalarFunction& f, std::span<const double> x) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    // (x + h) - (x - h) may differ from 2h after rounding; use the realized step.
    g[i] = (up - down) / ((x[i] + h) - (x[i] - h));
  }
  return g;
}

std::vector<double> gradient(std::span<const double> x, const ObjectiveContext& ctx) {
  return central_gradient([&](std::span<const double> p) { return objective(p, ctx); }, x);
}

namespace {

struct LinePoint {
  double alpha = 0.0;
  double f = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();  // phi'(alpha), NaN if not evaluated
  std::vector<double> x;
  std::vector<double> g;
};

class LineSearch {
 public:
  LineSearch(const ScalarFunction& f, const GradientFunction& grad, const BfgsOptions& opt,
             std::span<const double> x0, double f0, std::span<const double> dir, double slope0)
      : f_(f), grad_(grad), opt_(opt), x0_(x0), dir_(dir), f0_(f0), slope0_(slope0) {}

  std::size_t evaluations() const noexcept { return evals_; }

  // Returns a point satisfying the strong Wolfe conditions, or failing that
  // the lowest sufficient-decrease point seen; nullopt if none decreased f.
  std::optional<LinePoint> run(double alpha_init) {
    LinePoint prev{0.0, f0_, slope0_, {x0_.begin(), x0_.end()}, {}};
    double alpha = alpha_init;
    for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
      LinePoint cur = value_at(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.wolfe_c1 * alpha * slope0_ || (i > 0 && cur.f >= prev.f)) {
        return zoom(prev, cur);
      }
      note_armijo(cur);
      with_slope(cur);
      if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) return cur;
      if (cur.slope >= 0.0) return zoom(cur, prev);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return fallback();
  }

 private:
  LinePoint value_at(double alpha) {
    LinePoint p;
    p.alpha = alpha;
    p.x.resize(x0_.size());
    for (std::size_t i = 0; i < x0_.size(); ++i) p.x[i] = x0_[i] + alpha * dir_[i];
    p.f = f_(p.x);
    ++evals_;
    return p;
  }

  void with_slope(LinePoint& p) {
    if (!std::isnan(p.slope)) return;
    p.g = grad_(p.x);
    ++evals_;
    p.slope = dotp(p.g, dir_);
    if (best_ && best_->alpha == p.alpha) *best_ = p;
  }

  void note_armijo(const LinePoint& p) {
    if (!best_ || p.f < best_->f) best_ = p;
  }

  std::optional<LinePoint> fallback() {
    if (!best_ || !(best_->f < f0_)) return std::nullopt;
    with_slope(*best_);
    return best_;
  }

  std::optional<LinePoint> zoom(LinePoint lo, LinePoint hi) {
    for (std::size_t i = 0; i < opt_.max_line_search; ++i) {
      const double width = hi.alpha - lo.alpha;
      if (std::abs(width) <= 1e-14 * std::max(1.0, std::abs(lo.alpha))) break;
      double alpha = interpolate(lo, hi);
      const double a = std::min(lo.alpha, hi.alpha), b = std::max(lo.alpha, hi.alpha);
      const double margin = 0.1 * (b - a);
      if (!std::isfinite(alpha) || alpha < a + margin || alpha > b - margin) alpha = 0.5 * (a + b);
      LinePoint cur = value_at(alpha);
      if (!std::isfinite(cur.f) || cur.f > f0_ + opt_.wolfe_c1 * alpha * slope0_ || cur.f >= lo.f) {
        hi = std::move(cur);
        continue;
      }
      note_armijo(cur);
      with_slope(cur);
      if (std::abs(cur.slope) <= -opt_.wolfe_c2 * slope0_) return cur;
      if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(cur);
    }
    return fallback();
  }

  static double interpolate(const LinePoint& lo, const LinePoint& hi) {
    const double da = hi.alpha - lo.alpha;
    if (!std::isnan(lo.slope) && !std::isnan(hi.slope)) {
      const double d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
      const double disc = d1 * d1 - lo.slope * hi.slope;
      if (disc >= 0.0) {
        const double d2 = std::copysign(std::sqrt(disc), da);
        return hi.alpha - da * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
      }
    }
    if (!std::isnan(lo.slope)) {
      const double denom = 2.0 * (hi.f - lo.f - lo.slope * da);
      if (denom > 0.0) return lo.alpha - lo.slope * da * da / denom;
    }
    return std::numeric_limits<double>::quiet_NaN();
  }

  const ScalarFunction& f_;
  const GradientFunction& grad_;
  const BfgsOptions& opt_;
  std::span<const double> x0_;
  std::span<const double> dir_;
  double f0_;
  double slope0_;
  std::size_t evals_ = 0;
  std::optional<LinePoint> best_;
};

}  // namespace

BfgsResult bfgs_minimize(const ScalarFunction& f, const GradientFunction& grad, std::vector<double> x0,
                         const BfgsOptions& options) {
  const std::size_t n = x0.size();
  if (n == 0) throw InvalidInput("bfgs_minimize: empty starting point");
  for (double v : x0) {
    if (!std::isfinite(v)) throw InvalidInput("bfgs_minimize: non-finite starting point");
  }

  BfgsResult res;
  res.x = std::move(x0);
  res.value = f(res.x);
  std::vector<double> g = grad(res.x);
  res.evaluations = 2;
  if (!std::isfinite(res.value)) throw NumericError("objective is not finite at the starting point");

  std::vector<double> hinv(n * n, 0.0);
  auto reset_identity = [&](double scale) {
    std::fill(hinv.begin(), hinv.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) hinv[i * n + i] = scale;
  };
  reset_identity(1.0);

  std::vector<double> dir(n), s(n), y(n), hy(n);
  for (res.iterations = 0; res.iterations < options.max_iter; ++res.iterations) {
    res.grad_norm = norm2(g);
    if (res.grad_norm <= options.tol) {
      res.converged = true;
      res.stop_reason = "gradient tolerance reached";
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * g[j];
      dir[i] = -acc;
    }
    double slope = dotp(g, dir);
    if (!(slope < 0.0)) {
      reset_identity(1.0);
      for (std::size_t i = 0; i < n; ++i) dir[i] = -g[i];
      slope = -res.grad_norm * res.grad_norm;
    }
    const double alpha0 = res.iterations == 0 ? std::min(1.0, 1.0 / res.grad_norm) : 1.0;
    LineSearch ls(f, grad, options, res.x, res.value, dir, slope);
    auto step = ls.run(alpha0);
    res.evaluations += ls.evaluations();
    if (!step) {
      res.stop_reason = "line search failed to decrease the objective";
      return res;
    }
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = step->x[i] - res.x[i];
      y[i] = step->g[i] - g[i];
    }
    const double sy = dotp(s, y);
    if (res.iterations == 0 && sy > 0.0) reset_identity(sy / dotp(y, y));
    if (sy > 1e-12 * norm2(s) * norm2(y)) {
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += hinv[i * n + j] * y[j];
        hy[i] = acc;
      }
      const double yhy = dotp(y, hy);
      const double a = (sy + yhy) / (sy * sy);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          hinv[i * n + j] += a * s[i] * s[j] - (hy[i] * s[j] + s[i] * hy[j]) / sy;
        }
      }
    }
    res.x = std::move(step->x);
    res.value = step->f;
    g = std::move(step->g);
  }
  res.grad_norm = norm2(g);
  res.converged = res.grad_norm <= options.tol;
  res.stop_reason = res.converged ? "gradient tolerance reached" : "iteration limit reached";
  return res;
}

RefineResult refine(std::span<const double> x0, const ObjectiveContext& ctx, const BfgsOptions& options) {
  ctx.validate();
  if (x0.size() != ctx.a.size()) throw InvalidInput("initial point length does not match N");
  if (!(norm2(x0) > 0.0)) throw InvalidInput("initial point must be nonzero");
  const ScalarFunction f = [&](std::span<const double> x) { return objective(x, ctx); };
  const GradientFunction g = [&](std::span<const double> x) { return central_gradient(f, x); };
  BfgsResult b = bfgs_minimize(f, g, {x0.begin(), x0.end()}, options);

  RefineResult out;
  out.objective_value = b.value;
  out.iterations = b.iterations;
  out.converged = b.converged;
  out.stop_reason = b.stop_reason;
  out.x_star = std::move(b.x);
  const double nx = norm2(out.x_star);
  if (nx > 0.0) {
    for (auto& v : out.x_star) v /= nx;
  }
  return out;
}

const char* to_string(InitPolicy policy) { return policy == InitPolicy::random ? "random" : "network"; }

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SuccessRateResult success_rate(const OperatorSet& ops, const SuccessRateConfig& cfg) {
  if (cfg.n_trials == 0) throw InvalidInput("success_rate needs at least one trial");
  if (cfg.level >= ops.dim()) throw InvalidInput("level outside the spectrum");
  if (cfg.policy == InitPolicy::network && !cfg.network) {
    throw InvalidInput("network init policy requires a trained network");
  }
  const GramMatrix gram(ops);
  const std::size_t n = ops.size();
  SuccessRateResult res;
  res.level = cfg.level;
  res.policy = cfg.policy;
  res.trials = cfg.n_trials;
  res.initial_fidelity.assign(cfg.n_trials, 0.0);
  res.final_fidelity.assign(cfg.n_trials, 0.0);
  std::vector<char> converged(cfg.n_trials, 0);

  parallel_for(cfg.n_trials, [&](std::size_t t) {
    Rng rng(derive_seed(cfg.seed, t));
    std::vector<double> c(n);
    ExpectationVector ev;
    do {
      for (auto& v : c) v = rng.uniform(-1.0, 1.0);
      ev = forward_map(c, ops, cfg.level);
    } while (ev.degenerate);

    std::vector<double> x0(n);
    if (cfg.policy == InitPolicy::random) {
      double nx = 0.0;
      while (nx == 0.0) {
        for (auto& v : x0) v = rng.uniform(-1.0, 1.0);
        nx = norm2(x0);
      }
      for (auto& v : x0) v /= nx;
    } else {
      x0 = predict_coefficients(*cfg.network, ev.a);
    }
    res.initial_fidelity[t] = fidelity(x0, c, gram);
    ObjectiveContext ctx{&ops, ev.a, cfg.beta};
    const RefineResult r = refine(x0, ctx, cfg.bfgs);
    res.final_fidelity[t] = fidelity(r.x_star, c, gram);
    converged[t] = r.converged ? 1 : 0;
  });

  for (std::size_t t = 0; t < cfg.n_trials; ++t) {
    if (res.final_fidelity[t] > kSuccessFidelity) ++res.successes;
    res.converged.push_back(converged[t] != 0);
  }
  res.rate = static_cast<double>(res.successes) / static_cast<double>(res.trials);
  std::tie(res.ci_low, res.ci_high) = wilson_interval(res.successes, res.trials);
  return res;
}

std::string success_csv_header() { return "level,init_policy,trials,successes,rate,ci_low,ci_high\n"; }

std::string success_csv_row(const SuccessRateResult& r) {
  return std::to_string(r.level) + "," + to_string(r.policy) + "," + std::to_string(r.trials) + "," +
         std::to_string(r.successes) + "," + format_double(r.rate) + "," + format_double(r.ci_low) + "," +
         format_double(r.ci_high) + "\n";
}

}  // namespace eigenrec
