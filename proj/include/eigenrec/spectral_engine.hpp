#pragma once

#include <span>
#include <vector>

#include "eigenrec/operator_models.hpp"
#include "eigenrec/pauli_algebra.hpp"

namespace eigenrec {

/// Ascending eigenvalues with orthonormal eigenvectors. Eigenvector k is
/// stored contiguously and its largest-magnitude component is real positive.
struct Spectrum {
  std::vector<double> eigenvalues;
  std::vector<cplx> eigenvectors;  // dim blocks of dim entries
  double min_gap = 0.0;

  std::size_t dim() const noexcept { return eigenvalues.size(); }
  std::span<const cplx> vector(std::size_t k) const noexcept {
    return {eigenvectors.data() + k * dim(), dim()};
  }
  /// max |lambda|, i.e. the spectral norm.
  double spectral_norm() const noexcept;
};

struct ExpectationVector {
  std::vector<double> a;
  std::size_t level = 0;
  bool degenerate = false;
  double energy = 0.0;
};

/// Relative gap threshold for the degenerate flag: gap < kDegeneracyTol * max(1, ||H||_2).
inline constexpr double kDegeneracyTol = 1e-8;

/// H = sum_i c_i A_i.
HermitianOp assemble(std::span<const double> c, const OperatorSet& ops);

/// Dense Hermitian diagonalization (Eigen: Householder tridiagonalization +
/// implicit symmetric QR). Rejects input whose Hermiticity residual exceeds 1e-10 * max(1, max|H_ij|).
Spectrum eigendecompose(const HermitianOp& h);

/// a_i = <psi|A_i|psi>; psi must have unit norm within 1e-10.
std::vector<double> expectations(std::span<const cplx> state, const OperatorSet& ops);

/// True when lambda_k is within gap_tol of either neighbour.
bool is_degenerate_level(const Spectrum& spectrum, std::size_t k, double rel_tol = kDegeneracyTol);

/// assemble -> eigendecompose -> expectations on eigenvector k.
ExpectationVector forward_map(std::span<const double> c, const OperatorSet& ops, std::size_t k);

/// Expectation vectors for several levels from a single diagonalization.
std::vector<ExpectationVector> forward_map_levels(std::span<const double> c, const OperatorSet& ops,
                                                  std::span<const std::size_t> levels);

struct DensityMatrix {
  std::size_t dim = 0;
  std::vector<cplx> entries;  // row-major

  cplx operator()(std::size_t r, std::size_t c) const noexcept { return entries[r * dim + c]; }
  double trace() const noexcept;
};

/// H~ = sum_i x_i (A_i - a_i I)
HermitianOp shifted_hamiltonian(std::span<const double> x, std::span<const double> a,
                                const OperatorSet& ops);

/// rho = exp(-beta H~^2) / Tr(...), evaluated spectrally with the smallest
/// H~^2 eigenvalue factored out so the weights never all underflow.
/// beta = 0 gives the maximally mixed state.
DensityMatrix gibbs_of_squared(std::span<const double> x, std::span<const double> a,
                               const OperatorSet& ops, double beta);

/// Scalars the refinement objective needs from rho(x), without forming rho:
/// tr(A_i rho) for every i and tr(H~^2 rho).
struct GibbsMoments {
  std::vector<double> op_expectations;
  double h_tilde_sq = 0.0;
};
GibbsMoments gibbs_moments(std::span<const double> x, std::span<const double> a,
                           const OperatorSet& ops, double beta);

}  // namespace eigenrec
