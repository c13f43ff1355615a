#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eigenrec {

using cplx = std::complex<double>;

/// Word over {I, X, Y, Z}. Position 0 is qubit 1, the most significant
/// Kronecker factor.
class PauliString {
 public:
  PauliString() = default;
  /// Throws InvalidInput on an empty word or a letter outside IXYZ.
  explicit PauliString(std::string word);

  const std::string& word() const noexcept { return word_; }
  std::size_t n_qubits() const noexcept { return word_.size(); }
  /// True when every letter outside `positions` (0-based) is 'I'.
  bool identity_outside(std::span<const std::size_t> positions) const;

  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::string word_;
};

struct PauliTerm {
  PauliString string;
  double coeff = 0.0;

  friend bool operator==(const PauliTerm&, const PauliTerm&) = default;
};

/// Dense Hermitian matrix, row-major complex<double> storage (interleaved re/im).
class HermitianOp {
 public:
  HermitianOp() = default;
  /// Zero matrix; dim must be a power of two.
  explicit HermitianOp(std::size_t dim);
  static HermitianOp identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  cplx& operator()(std::size_t row, std::size_t col) noexcept { return data_[row * dim_ + col]; }
  const cplx& operator()(std::size_t row, std::size_t col) const noexcept {
    return data_[row * dim_ + col];
  }
  std::span<const cplx> data() const noexcept { return data_; }
  std::span<cplx> data() noexcept { return data_; }
  /// Real view: 2*dim*dim doubles.
  std::span<const double> real_view() const noexcept {
    return {reinterpret_cast<const double*>(data_.data()), data_.size() * 2};
  }
  std::span<double> real_view() noexcept {
    return {reinterpret_cast<double*>(data_.data()), data_.size() * 2};
  }

  /// this += alpha * other.
  void add_scaled(double alpha, const HermitianOp& other);
  void scale(double alpha);
  /// max |A_ij - conj(A_ji)|
  double hermiticity_residual() const;
  double max_abs() const;

 private:
  std::size_t dim_ = 0;
  std::vector<cplx> data_;
};

/// Kronecker product of single-qubit Pauli matrices in word order.
HermitianOp pauli_matrix(const PauliString& word);

/// sum_t coeff_t * pauli_matrix(word_t); every word must have length n.
HermitianOp synthesize(std::span<const PauliTerm> terms, std::size_t n_qubits);

/// Tr(A B) for Hermitian A, B.
double hs_inner(const HermitianOp& a, const HermitianOp& b);

/// Text form used by term lists: "<word> <coeff>", coefficient with 17
/// significant digits. parse_term_line rejects complex or non-finite values.
std::string format_term_line(const PauliTerm& term);
PauliTerm parse_term_line(std::string_view line, long line_no = 0);

/// All 4^n words in lexicographic I < X < Y < Z order.
std::vector<PauliString> all_pauli_words(std::size_t n_qubits);

}  // namespace eigenrec
