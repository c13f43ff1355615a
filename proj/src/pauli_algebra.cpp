#include "eigenrec/pauli_algebra.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/kernels.hpp"

namespace eigenrec {

PauliString::PauliString(std::string word) : word_(std::move(word)) {
  if (word_.empty()) throw InvalidInput("Pauli word must be non-empty");
  for (char ch : word_) {
    if (ch != 'I' && ch != 'X' && ch != 'Y' && ch != 'Z') {
      throw InvalidInput("Pauli word '" + word_ + "' contains letter outside IXYZ");
    }
  }
}

bool PauliString::identity_outside(std::span<const std::size_t> positions) const {
  for (std::size_t q = 0; q < word_.size(); ++q) {
    if (word_[q] == 'I') continue;
    if (std::find(positions.begin(), positions.end(), q) == positions.end()) return false;
  }
  return true;
}

HermitianOp::HermitianOp(std::size_t dim) : dim_(dim), data_(dim * dim) {
  if (dim == 0 || !std::has_single_bit(dim)) {
    throw InvalidInput("operator dimension " + std::to_string(dim) + " is not a power of two");
  }
}

HermitianOp HermitianOp::identity(std::size_t dim) {
  HermitianOp id(dim);
  for (std::size_t i = 0; i < dim; ++i) id(i, i) = 1.0;
  return id;
}

void HermitianOp::add_scaled(double alpha, const HermitianOp& other) {
  if (other.dim_ != dim_) throw InvalidInput("add_scaled: dimension mismatch");
  kernels::axpy(alpha, other.real_view(), real_view());
}

void HermitianOp::scale(double alpha) {
  for (auto& v : data_) v *= alpha;
}

double HermitianOp::hermiticity_residual() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i; j < dim_; ++j) {
      worst = std::max(worst, std::abs((*this)(i, j) - std::conj((*this)(j, i))));
    }
  }
  return worst;
}

double HermitianOp::max_abs() const {
  double worst = 0.0;
  for (const auto& v : data_) worst = std::max(worst, std::abs(v));
  return worst;
}

namespace {

// Nonzero pattern of a Pauli product: row r couples to column r ^ flip_mask.
struct PauliPattern {
  std::size_t flip_mask = 0;
  std::vector<cplx> row_phase;  // value at (r, r ^ flip_mask)
};

PauliPattern pattern_of(const PauliString& p) {
  const std::size_t n = p.n_qubits();
  const std::size_t dim = std::size_t{1} << n;
  PauliPattern pat;
  for (std::size_t q = 0; q < n; ++q) {
    const char ch = p.word()[q];
    if (ch == 'X' || ch == 'Y') pat.flip_mask |= std::size_t{1} << (n - 1 - q);
  }
  pat.row_phase.assign(dim, cplx(1.0, 0.0));
  for (std::size_t r = 0; r < dim; ++r) {
    cplx phase(1.0, 0.0);
    for (std::size_t q = 0; q < n; ++q) {
      const bool bit = (r >> (n - 1 - q)) & 1U;
      switch (p.word()[q]) {
        case 'Y': phase *= bit ? cplx(0.0, 1.0) : cplx(0.0, -1.0); break;
        case 'Z': if (bit) phase = -phase; break;
        default: break;
      }
    }
    pat.row_phase[r] = phase;
  }
  return pat;
}

}  // namespace

HermitianOp pauli_matrix(const PauliString& word) {
  if (word.n_qubits() == 0) throw InvalidInput("Pauli word must be non-empty");
  const PauliPattern pat = pattern_of(word);
  HermitianOp m(std::size_t{1} << word.n_qubits());
  for (std::size_t r = 0; r < m.dim(); ++r) m(r, r ^ pat.flip_mask) = pat.row_phase[r];
  return m;
}

HermitianOp synthesize(std::span<const PauliTerm> terms, std::size_t n_qubits) {
  if (n_qubits == 0) throw InvalidInput("synthesize: n_qubits must be >= 1");
  HermitianOp m(std::size_t{1} << n_qubits);
  for (const auto& t : terms) {
    if (t.string.n_qubits() != n_qubits) {
      throw InvalidInput("Pauli word '" + t.string.word() + "' has length " +
                         std::to_string(t.string.n_qubits()) + ", expected " +
                         std::to_string(n_qubits));
    }
    if (!std::isfinite(t.coeff)) throw InvalidInput("non-finite Pauli coefficient");
    if (t.coeff == 0.0) continue;
    const PauliPattern pat = pattern_of(t.string);
    for (std::size_t r = 0; r < m.dim(); ++r) m(r, r ^ pat.flip_mask) += t.coeff * pat.row_phase[r];
  }
  return m;
}

double hs_inner(const HermitianOp& a, const HermitianOp& b) {
  if (a.dim() != b.dim()) {
    throw InvalidInput("hs_inner: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                       std::to_string(b.dim()) + ")");
  }
  // Tr(AB) = sum_ij A_ij conj(B_ij) for Hermitian B; its real part is the
  // plain dot product of the interleaved arrays.
  return kernels::dot(a.real_view(), b.real_view());
}

std::string format_term_line(const PauliTerm& term) {
  return term.string.word() + " " + format_double(term.coeff);
}

PauliTerm parse_term_line(std::string_view line, long line_no) {
  std::istringstream in{std::string(line)};
  std::string word, coeff_text, extra;
  if (!(in >> word >> coeff_text)) throw ParseError("expected '<word> <coeff>'", line_no);
  if (in >> extra) throw ParseError("trailing field '" + extra + "' in term line", line_no);
  char* end = nullptr;
  const double coeff = std::strtod(coeff_text.c_str(), &end);
  if (end == coeff_text.c_str() || *end != '\0') {
    if (coeff_text.back() == 'j' || coeff_text.back() == 'i') {
      throw ParseError("complex coefficient '" + coeff_text + "' is not supported", line_no);
    }
    throw ParseError("bad coefficient '" + coeff_text + "'", line_no);
  }
  if (!std::isfinite(coeff)) throw ParseError("non-finite coefficient '" + coeff_text + "'", line_no);
  try {
    return PauliTerm{PauliString(word), coeff};
  } catch (const InvalidInput& e) {
    throw ParseError(e.what(), line_no);
  }
}

std::vector<PauliString> all_pauli_words(std::size_t n_qubits) {
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  const std::size_t count = std::size_t{1} << (2 * n_qubits);
  std::vector<PauliString> words;
  words.reserve(count);
  std::string w(n_qubits, 'I');
  for (std::size_t idx = 0; idx < count; ++idx) {
    std::size_t v = idx;
    for (std::size_t q = n_qubits; q-- > 0;) {
      w[q] = kLetters[v & 3U];
      v >>= 2;
    }
    words.emplace_back(w);
  }
  return words;
}

}  // namespace eigenrec
