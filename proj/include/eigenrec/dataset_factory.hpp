#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eigenrec/operator_models.hpp"
#include "eigenrec/rng.hpp"

namespace eigenrec {

/// One supervised pair. `seed` is the coefficient-draw seed; every level of
/// one draw shares it, which is what split() groups on.
struct Sample {
  std::vector<double> a;
  std::vector<double> c;
  std::size_t k = 0;
  bool degenerate = false;
  std::uint64_t seed = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class SplitTag { train, val, test, unsplit };
const char* to_string(SplitTag tag);
SplitTag split_tag_from_string(const std::string& text);

struct Dataset {
  int n_qubits = 0;
  std::size_t n_coeffs = 0;
  std::string operator_set_hash;
  std::string operator_set_path;
  double noise_ratio = 0.0;
  SplitTag split_tag = SplitTag::unsplit;
  std::vector<Sample> samples;

  /// Number of distinct coefficient draws.
  std::size_t draw_count() const;
};

struct NoiseSpec {
  double ratio = 0.0;  // |delta a| / |a|
};

/// a + delta with |delta| = ratio * |a| and direction uniform on the sphere.
std::vector<double> inject_noise(std::span<const double> a, const NoiseSpec& spec, Rng& rng);

struct GenerateOptions {
  std::size_t n_sets = 1000;
  /// Empty means the lower half, 0 .. 2^(n-1) - 1.
  std::vector<std::size_t> levels;
  std::uint64_t seed = 0;
  bool keep_degenerate = false;
  double noise_ratio = 0.0;
  /// Restricts draws to one orthant: '+' or '-' per coefficient.
  std::optional<std::string> sign_pattern;
  /// Offset added to the draw index before sub-seeding, so disjoint
  /// datasets can be cut from one seed.
  std::uint64_t draw_offset = 0;
};

struct GenerateReport {
  std::size_t draws = 0;
  std::size_t emitted = 0;
  std::size_t degenerate = 0;
  std::size_t degenerate_excluded = 0;
};

struct GenerateResult {
  Dataset dataset;
  GenerateReport report;
};

std::vector<std::size_t> lower_half_levels(int n_qubits);

/// Draws c uniform on [-1, 1)^N per set, diagonalizes once, emits a sample
/// per requested level. Draws run in parallel with per-draw sub-seeds.
GenerateResult generate(const OperatorSet& ops, const GenerateOptions& options);

struct SplitFractions {
  double train = 0.8, val = 0.1, test = 0.1;
};

struct SplitResult {
  Dataset train, val, test;
};

/// Partitions by coefficient draw. Draw counts: train = round(f_train * D),
/// val = round(f_val * D), test gets the rest; each must be non-empty.
SplitResult split(const Dataset& ds, const SplitFractions& fractions, std::uint64_t seed);

/// Line 1 is the header object; then one sample per line.
void save_jsonl(const Dataset& ds, const std::filesystem::path& path);

struct LoadOptions {
  /// If set, the header hash must match.
  const OperatorSet* ops = nullptr;
  /// Re-checks <c, a> = lambda_k (1e-8) for every noiseless sample; needs ops.
  bool verify = false;
};
Dataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options = {});

std::string dataset_to_jsonl(const Dataset& ds);
Dataset dataset_from_jsonl(const std::string& text, const LoadOptions& options = {});

}  // namespace eigenrec
