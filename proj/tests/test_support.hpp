#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "eigenrec/pauli_algebra.hpp"
#include "eigenrec/rng.hpp"

namespace testsupport {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    eigenrec::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(::time(nullptr)));
    path_ = std::filesystem::temp_directory_path() / ("eigenrec_" + tag + "_" + std::to_string(rng.next() % 1000000));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> uniform_vector(eigenrec::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const eigenrec::HermitianOp& a, const eigenrec::HermitianOp& b) {
  double m = 0.0;
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t c = 0; c < a.dim(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
  return m;
}

/// Plain triple-loop product; the reference every optimized path is compared to.
inline std::vector<eigenrec::cplx> matmul(const eigenrec::HermitianOp& a, const eigenrec::HermitianOp& b) {
  const std::size_t d = a.dim();
  std::vector<eigenrec::cplx> out(d * d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += a(i, k) * b(k, j);
  return out;
}

}  // namespace testsupport
