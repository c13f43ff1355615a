#include "eigenrec/trajectory_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/parallel.hpp"
#include "eigenrec/spectral_engine.hpp"

namespace eigenrec {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRefineWidth = 1e-10;

Spectrum spectrum_at(const OperatorSet& ops, double theta) {
  const double c[2] = {std::cos(theta), std::sin(theta)};
  return eigendecompose(assemble(c, ops));
}

double wrap_angle(double t) {
  t = std::fmod(t, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t -= kTwoPi;
  return t;
}

double cross2(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

}  // namespace

void SweepConfig::validate() const {
  if (theta_points < 16) throw InvalidInput("theta_points must be at least 16");
  if (ops.size() != 2) throw InvalidInput("a sweep needs exactly two operators");
  for (std::size_t k : levels) {
    if (k >= ops.dim()) throw InvalidInput("sweep level out of range");
  }
}

const LevelTrajectory& SweepResult::level(std::size_t k) const {
  for (const auto& t : levels) {
    if (t.level == k) return t;
  }
  throw InvalidInput("sweep has no trajectory for level " + std::to_string(k));
}

SweepResult sweep(const SweepConfig& cfg) {
  cfg.validate();
  SweepResult out;
  out.ops = cfg.ops;
  out.dim = cfg.ops.dim();
  const std::size_t points = cfg.theta_points;
  std::vector<std::size_t> levels = cfg.levels;
  if (levels.empty()) {
    for (std::size_t k = 0; k < out.dim; ++k) levels.push_back(k);
  }

  out.theta.resize(points);
  out.spectra.resize(points * out.dim);
  for (auto k : levels) {
    LevelTrajectory t;
    t.level = k;
    t.theta.resize(points);
    t.a1.resize(points);
    t.a2.resize(points);
    t.lambda.resize(points);
    out.levels.push_back(std::move(t));
  }

  std::vector<double> norms(points);
  parallel_for(points, [&](std::size_t j) {
    const double theta = kTwoPi * static_cast<double>(j) / static_cast<double>(points);
    out.theta[j] = theta;
    const Spectrum s = spectrum_at(cfg.ops, theta);
    std::copy(s.eigenvalues.begin(), s.eigenvalues.end(), out.spectra.begin() + j * out.dim);
    norms[j] = s.spectral_norm();
    for (auto& t : out.levels) {
      const auto a = expectations(s.vector(t.level), cfg.ops);
      t.theta[j] = theta;
      t.a1[j] = a[0];
      t.a2[j] = a[1];
      t.lambda[j] = s.eigenvalues[t.level];
    }
  });
  out.max_norm = *std::max_element(norms.begin(), norms.end());
  return out;
}

std::vector<Crossing> detect_crossings(const SweepResult& result, double gap_tol) {
  if (gap_tol < 0.0) gap_tol = kDefaultGapTolRel * result.max_norm;
  std::vector<Crossing> out;
  if (gap_tol == 0.0 || result.dim < 2) return out;

  const std::size_t points = result.theta.size();
  const double step = kTwoPi / static_cast<double>(points);
  for (std::size_t k = 0; k + 1 < result.dim; ++k) {
    auto gap = [&](std::size_t j) { return result.eigenvalue(j, k + 1) - result.eigenvalue(j, k); };
    for (std::size_t j = 0; j < points; ++j) {
      const double g = gap(j);
      const double left = gap((j + points - 1) % points);
      const double right = gap((j + 1) % points);
      if (!(g < left && g <= right)) continue;

      auto gap_at = [&](double theta) {
        const Spectrum s = spectrum_at(result.ops, theta);
        return s.eigenvalues[k + 1] - s.eigenvalues[k];
      };
      double best_t = result.theta[j], best_g = g;
      double lo = result.theta[j] - step, hi = result.theta[j] + step;
      const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
      double f1 = gap_at(x1), f2 = gap_at(x2);
      while (hi - lo > kRefineWidth) {
        if (f1 < f2) {
          hi = x2;
          x2 = x1;
          f2 = f1;
          x1 = hi - inv_phi * (hi - lo);
          f1 = gap_at(x1);
        } else {
          lo = x1;
          x1 = x2;
          f1 = f2;
          x2 = lo + inv_phi * (hi - lo);
          f2 = gap_at(x2);
        }
        if (f1 < best_g) best_g = f1, best_t = x1;
        if (f2 < best_g) best_g = f2, best_t = x2;
      }
      if (best_g < gap_tol) out.push_back({wrap_angle(best_t), k, std::max(best_g, 0.0)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) {
    return x.theta != y.theta ? x.theta < y.theta : x.lower < y.lower;
  });
  return out;
}

std::vector<double> crossing_angles(const std::vector<Crossing>& crossings, double tol) {
  std::vector<double> angles;
  for (const auto& c : crossings) {
    double t = c.theta;
    if (kTwoPi - t <= tol) t = 0.0;
    angles.push_back(t);
  }
  std::sort(angles.begin(), angles.end());
  std::vector<double> out;
  for (double t : angles) {
    if (out.empty() || t - out.back() > tol) out.push_back(t);
  }
  return out;
}

std::size_t polyline_self_intersections(const LevelTrajectory& traj) {
  const std::size_t n = traj.a1.size();
  if (n < 4) return 0;
  std::size_t count = 0;
  auto px = [&](std::size_t i) { return traj.a1[i % n]; };
  auto py = [&](std::size_t i) { return traj.a2[i % n]; };
  for (std::size_t i = 0; i < n; ++i) {
    const double ax = px(i), ay = py(i), bx = px(i + 1), by = py(i + 1);
    const double minx = std::min(ax, bx), maxx = std::max(ax, bx);
    const double miny = std::min(ay, by), maxy = std::max(ay, by);
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // closing segment shares a vertex with the first
      const double cx = px(j), cy = py(j), dx = px(j + 1), dy = py(j + 1);
      if (std::max(cx, dx) < minx || std::min(cx, dx) > maxx || std::max(cy, dy) < miny ||
          std::min(cy, dy) > maxy) {
        continue;
      }
      const double d1 = cross2(bx - ax, by - ay, cx - ax, cy - ay);
      const double d2 = cross2(bx - ax, by - ay, dx - ax, dy - ay);
      const double d3 = cross2(dx - cx, dy - cy, ax - cx, ay - cy);
      const double d4 = cross2(dx - cx, dy - cy, bx - cx, by - cy);
      if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) ++count;
    }
  }
  return count;
}

const char* to_string(SweepKind kind) { return kind == SweepKind::general ? "general" : "chain2local"; }

SweepKind sweep_kind_from_string(const std::string& text) {
  if (text == "general") return SweepKind::general;
  if (text == "chain2local") return SweepKind::chain2local;
  throw InvalidInput("unknown sweep kind: " + text);
}

OperatorSet sweep_operators(SweepKind kind, int n_qubits, std::uint64_t seed) {
  if (kind == SweepKind::general) return build_general_set(n_qubits, 2, seed);
  if (n_qubits != 3) throw InvalidInput("chain2local sweeps use exactly 3 qubits");
  return build_local_set(InteractionGraph::chain(3), seed);
}

std::vector<std::filesystem::path> export_plot_data(const SweepResult& result,
                                                    const std::vector<Crossing>& crossings,
                                                    const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (const auto& t : result.levels) {
    std::string text = "theta,a1,a2,lambda\n";
    for (std::size_t j = 0; j < t.theta.size(); ++j) {
      text += format_double(t.theta[j]) + "," + format_double(t.a1[j]) + "," + format_double(t.a2[j]) + "," +
              format_double(t.lambda[j]) + "\n";
    }
    written.push_back(dir / ("level_" + std::to_string(t.level) + ".csv"));
    write_text_file(written.back(), text);
  }
  std::string text = "theta,lower,upper,min_gap\n";
  for (const auto& c : crossings) {
    text += format_double(c.theta) + "," + std::to_string(c.lower) + "," + std::to_string(c.lower + 1) + "," +
            format_double(c.min_gap) + "\n";
  }
  written.push_back(dir / "crossings.csv");
  write_text_file(written.back(), text);
  return written;
}

LevelTrajectory read_level_csv(const std::filesystem::path& path, std::size_t level) {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "theta,a1,a2,lambda") throw ParseError("bad level CSV header", 1);
  LevelTrajectory t;
  t.level = level;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    double v[4];
    std::size_t pos = 0;
    for (int col = 0; col < 4; ++col) {
      const std::size_t end = line.find(',', pos);
      if ((col < 3) == (end == std::string::npos)) throw ParseError("expected 4 columns", line_no);
      const std::string cell = line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
      char* stop = nullptr;
      v[col] = std::strtod(cell.c_str(), &stop);
      if (cell.empty() || *stop != '\0') throw ParseError("bad number '" + cell + "'", line_no);
      pos = end + 1;
    }
    t.theta.push_back(v[0]);
    t.a1.push_back(v[1]);
    t.a2.push_back(v[2]);
    t.lambda.push_back(v[3]);
  }
  return t;
}

}  // namespace eigenrec
