#include "eigenrec/spectral_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "eigenrec/errors.hpp"
#include "eigenrec/kernels.hpp"

namespace eigenrec {

namespace {

using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Weights below this fraction of the largest contribute nothing in double precision.
constexpr double kNegligibleWeight = 1e-18;

void fix_phase(std::span<cplx> v) {
  std::size_t best = 0;
  double best_abs = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best_abs * (1.0 + 1e-12)) {
      best_abs = m;
      best = i;
    }
  }
  if (best_abs <= 0.0) return;
  const cplx phase = std::conj(v[best]) / best_abs;
  for (auto& z : v) z *= phase;
  v[best] = cplx(std::abs(v[best]), 0.0);
}

double norm2(std::span<const cplx> v) {
  double s = 0.0;
  for (const auto& z : v) s += std::norm(z);
  return std::sqrt(s);
}

}  // namespace

double Spectrum::spectral_norm() const noexcept {
  if (eigenvalues.empty()) return 0.0;
  return std::max(std::abs(eigenvalues.front()), std::abs(eigenvalues.back()));
}

HermitianOp assemble(std::span<const double> c, const OperatorSet& ops) {
  if (c.size() != ops.size()) {
    throw InvalidInput("coefficient vector has length " + std::to_string(c.size()) +
                       ", operator set has N = " + std::to_string(ops.size()));
  }
  HermitianOp h(ops.dim());
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i])) throw InvalidInput("non-finite coefficient");
    if (c[i] != 0.0) h.add_scaled(c[i], ops.ops[i]);
  }
  return h;
}

Spectrum eigendecompose(const HermitianOp& h) {
  const std::size_t d = h.dim();
  const double scale = std::max(1.0, h.max_abs());
  if (h.hermiticity_residual() > 1e-10 * scale) {
    throw InvalidInput("eigendecompose: matrix is not Hermitian within tolerance");
  }
  Eigen::Map<const RowMajorMatrix> m(h.data().data(), static_cast<Eigen::Index>(d),
                                     static_cast<Eigen::Index>(d));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw NumericError("Hermitian eigensolver did not converge");

  Spectrum s;
  s.eigenvalues.resize(d);
  s.eigenvectors.resize(d * d);
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  for (std::size_t k = 0; k < d; ++k) {
    s.eigenvalues[k] = vals(static_cast<Eigen::Index>(k));
    cplx* dst = s.eigenvectors.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) dst[i] = vecs(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
    fix_phase({dst, d});
  }
  s.min_gap = d > 1 ? std::numeric_limits<double>::infinity() : 0.0;
  for (std::size_t k = 1; k < d; ++k) s.min_gap = std::min(s.min_gap, s.eigenvalues[k] - s.eigenvalues[k - 1]);
  return s;
}

std::vector<double> expectations(std::span<const cplx> state, const OperatorSet& ops) {
  if (state.size() != ops.dim()) throw InvalidInput("state dimension does not match operator set");
  if (std::abs(norm2(state) - 1.0) > 1e-10) throw InvalidInput("state is not normalized");
  std::vector<double> a(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) a[i] = kernels::herm_quadratic(ops.ops[i].data(), state);
  return a;
}

bool is_degenerate_level(const Spectrum& spectrum, std::size_t k, double rel_tol) {
  const double tol = rel_tol * std::max(1.0, spectrum.spectral_norm());
  const auto& ev = spectrum.eigenvalues;
  if (k > 0 && ev[k] - ev[k - 1] < tol) return true;
  if (k + 1 < ev.size() && ev[k + 1] - ev[k] < tol) return true;
  return false;
}

std::vector<ExpectationVector> forward_map_levels(std::span<const double> c, const OperatorSet& ops,
                                                  std::span<const std::size_t> levels) {
  const Spectrum spec = eigendecompose(assemble(c, ops));
  std::vector<ExpectationVector> out;
  out.reserve(levels.size());
  for (std::size_t k : levels) {
    if (k >= spec.dim()) {
      throw InvalidInput("level " + std::to_string(k) + " outside [0, " + std::to_string(spec.dim()) + ")");
    }
    ExpectationVector ev;
    ev.a = expectations(spec.vector(k), ops);
    ev.level = k;
    ev.degenerate = is_degenerate_level(spec, k);
    ev.energy = spec.eigenvalues[k];
    out.push_back(std::move(ev));
  }
  return out;
}

ExpectationVector forward_map(std::span<const double> c, const OperatorSet& ops, std::size_t k) {
  const std::size_t levels[] = {k};
  return std::move(forward_map_levels(c, ops, levels).front());
}

double DensityMatrix::trace() const noexcept {
  double t = 0.0;
  for (std::size_t i = 0; i < dim; ++i) t += entries[i * dim + i].real();
  return t;
}

HermitianOp shifted_hamiltonian(std::span<const double> x, std::span<const double> a,
                                const OperatorSet& ops) {
  if (a.size() != ops.size()) throw InvalidInput("target expectation vector length mismatch");
  HermitianOp h = assemble(x, ops);
  double shift = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) shift += x[i] * a[i];
  for (std::size_t i = 0; i < h.dim(); ++i) h(i, i) -= shift;
  return h;
}

namespace {

struct GibbsWeights {
  Spectrum spectrum;         // of sum x_i A_i
  std::vector<double> sq;    // eigenvalues of H~^2
  std::vector<double> prob;  // normalized weights, zero where negligible
};

GibbsWeights gibbs_weights(std::span<const double> x, std::span<const double> a,
                           const OperatorSet& ops, double beta) {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be finite and >= 0");
  if (a.size() != ops.size()) throw InvalidInput("target expectation vector length mismatch");
  GibbsWeights g;
  // H~ = H - (x.a) I shares eigenvectors with H = sum x_i A_i.
  g.spectrum = eigendecompose(assemble(x, ops));
  double shift = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) shift += x[i] * a[i];
  const std::size_t d = g.spectrum.dim();
  g.sq.resize(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double t = g.spectrum.eigenvalues[k] - shift;
    g.sq[k] = t * t;
  }
  const double floor = *std::min_element(g.sq.begin(), g.sq.end());
  g.prob.resize(d);
  double z = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    const double w = std::exp(-beta * (g.sq[k] - floor));
    g.prob[k] = w < kNegligibleWeight ? 0.0 : w;
    z += g.prob[k];
  }
  for (auto& p : g.prob) p /= z;
  return g;
}

}  // namespace

DensityMatrix gibbs_of_squared(std::span<const double> x, std::span<const double> a,
                               const OperatorSet& ops, double beta) {
  const GibbsWeights g = gibbs_weights(x, a, ops, beta);
  const std::size_t d = g.spectrum.dim();
  DensityMatrix rho{d, std::vector<cplx>(d * d)};
  for (std::size_t k = 0; k < d; ++k) {
    if (g.prob[k] == 0.0) continue;
    const auto v = g.spectrum.vector(k);
    for (std::size_t r = 0; r < d; ++r) {
      const cplx vr = g.prob[k] * v[r];
      for (std::size_t c = 0; c < d; ++c) rho.entries[r * d + c] += vr * std::conj(v[c]);
    }
  }
  // Symmetrize so Hermiticity holds exactly.
  for (std::size_t r = 0; r < d; ++r) {
    rho.entries[r * d + r] = rho.entries[r * d + r].real();
    for (std::size_t c = r + 1; c < d; ++c) {
      const cplx avg = 0.5 * (rho.entries[r * d + c] + std::conj(rho.entries[c * d + r]));
      rho.entries[r * d + c] = avg;
      rho.entries[c * d + r] = std::conj(avg);
    }
  }
  return rho;
}

GibbsMoments gibbs_moments(std::span<const double> x, std::span<const double> a,
                           const OperatorSet& ops, double beta) {
  const GibbsWeights g = gibbs_weights(x, a, ops, beta);
  GibbsMoments m;
  m.op_expectations.assign(ops.size(), 0.0);
  for (std::size_t k = 0; k < g.prob.size(); ++k) {
    if (g.prob[k] == 0.0) continue;
    const auto v = g.spectrum.vector(k);
    for (std::size_t i = 0; i < ops.size(); ++i) {
      m.op_expectations[i] += g.prob[k] * kernels::herm_quadratic(ops.ops[i].data(), v);
    }
    m.h_tilde_sq += g.prob[k] * g.sq[k];
  }
  return m;
}

}  // namespace eigenrec
