#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eigenrec/operator_models.hpp"

namespace eigenrec {

/// H(theta) = cos(theta) A_1 + sin(theta) A_2 on theta_j = 2 pi j / theta_points.
struct SweepConfig {
  std::size_t theta_points = 2000;
  std::vector<std::size_t> levels;  // empty means every level
  OperatorSet ops;                  // exactly two operators

  void validate() const;
};

struct LevelTrajectory {
  std::size_t level = 0;
  std::vector<double> theta, a1, a2, lambda;
};

struct Crossing {
  double theta = 0.0;  // in [0, 2 pi)
  std::size_t lower = 0;  // the pair (lower, lower + 1)
  double min_gap = 0.0;
};

struct SweepResult {
  std::vector<LevelTrajectory> levels;
  std::vector<double> theta;
  std::vector<double> spectra;  // theta_points x dim, ascending per row
  std::size_t dim = 0;
  double max_norm = 0.0;  // max over the grid of ||H(theta)||_2
  OperatorSet ops;

  const LevelTrajectory& level(std::size_t k) const;
  double eigenvalue(std::size_t point, std::size_t k) const noexcept { return spectra[point * dim + k]; }
};

SweepResult sweep(const SweepConfig& cfg);

/// gap_tol < 0 selects the default 1e-6 * max_norm.
inline constexpr double kDefaultGapTol = -1.0;
inline constexpr double kDefaultGapTolRel = 1e-6;

/// Local minima of every adjacent gap over the periodic grid, refined by
/// golden-section search until the bracket is below 1e-10 in theta; kept when
/// the refined gap is strictly below gap_tol. Sorted by (theta, lower).
std::vector<Crossing> detect_crossings(const SweepResult& result, double gap_tol = kDefaultGapTol);

/// Distinct crossing angles in [0, 2 pi); angles within tol of each other
/// (cyclically) merge.
std::vector<double> crossing_angles(const std::vector<Crossing>& crossings, double tol = 1e-4);

/// Proper intersections between non-adjacent segments of the closed (a1, a2)
/// polyline of one level.
std::size_t polyline_self_intersections(const LevelTrajectory& traj);

enum class SweepKind { general, chain2local };
const char* to_string(SweepKind kind);
SweepKind sweep_kind_from_string(const std::string& text);

/// general: two random general operators on n qubits. chain2local: the
/// 3-qubit chain with A_1 on (1,2) and A_2 on (2,3); n must be 3.
OperatorSet sweep_operators(SweepKind kind, int n_qubits, std::uint64_t seed);

/// level_<k>.csv (theta,a1,a2,lambda) per level and crossings.csv
/// (theta,lower,upper,min_gap) in dir. Returns the files written.
std::vector<std::filesystem::path> export_plot_data(const SweepResult& result,
                                                    const std::vector<Crossing>& crossings,
                                                    const std::filesystem::path& dir);

/// Parses a level CSV back; throws ParseError on a bad header or row.
LevelTrajectory read_level_csv(const std::filesystem::path& path, std::size_t level);

}  // namespace eigenrec
