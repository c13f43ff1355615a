#include "eigenrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/parallel.hpp"

namespace eigenrec {

namespace {

double fidelity_from_traces(double cross, double rec_sq, double ref_sq) {
  if (!(rec_sq > 0.0) || !(ref_sq > 0.0)) throw InvalidInput("fidelity of a zero operator is undefined");
  const double f = 0.5 + cross / (2.0 * std::sqrt(rec_sq) * std::sqrt(ref_sq));
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace

double fidelity(const HermitianOp& h_rec, const HermitianOp& h) {
  if (h_rec.dim() != h.dim()) throw InvalidInput("fidelity: dimension mismatch");
  return fidelity_from_traces(hs_inner(h_rec, h), hs_inner(h_rec, h_rec), hs_inner(h, h));
}

GramMatrix::GramMatrix(const OperatorSet& ops) : n_(ops.size()), g_(n_ * n_) {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i; j < n_; ++j) {
      g_[i * n_ + j] = g_[j * n_ + i] = hs_inner(ops.ops[i], ops.ops[j]);
    }
  }
}

double GramMatrix::inner(std::span<const double> u, std::span<const double> v) const {
  if (u.size() != n_ || v.size() != n_) throw InvalidInput("Gram inner product: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n_; ++j) row += g_[i * n_ + j] * v[j];
    s += u[i] * row;
  }
  return s;
}

double fidelity(std::span<const double> c_rec, std::span<const double> c, const GramMatrix& gram) {
  return fidelity_from_traces(gram.inner(c_rec, c), gram.inner(c_rec, c_rec), gram.inner(c, c));
}

const LevelStats& FidelityReport::at(std::size_t level) const {
  for (const auto& s : levels) {
    if (s.level == level) return s;
  }
  throw InvalidInput("report has no samples at level " + std::to_string(level));
}

FidelityReport evaluate(const Predictor& predictor, const Dataset& test, const OperatorSet& ops,
                        std::string tag) {
  return evaluate_samples([&](const Sample& s) { return predictor(s.a); }, test, ops, std::move(tag));
}

FidelityReport evaluate_samples(const SamplePredictor& predictor, const Dataset& test, const OperatorSet& ops,
                                std::string tag) {
  if (test.n_coeffs != ops.size()) throw InvalidInput("test set N does not match operator set");
  const GramMatrix gram(ops);
  std::vector<double> scores(test.samples.size());
  parallel_for(test.samples.size(), [&](std::size_t i) {
    const auto& s = test.samples[i];
    scores[i] = fidelity(predictor(s), s.c, gram);
  });

  std::map<std::size_t, LevelStats> by_level;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    auto& st = by_level[test.samples[i].k];
    if (st.count == 0) {
      st.level = test.samples[i].k;
      st.min = std::numeric_limits<double>::infinity();
      st.max = -std::numeric_limits<double>::infinity();
    }
    st.mean += scores[i];
    st.min = std::min(st.min, scores[i]);
    st.max = std::max(st.max, scores[i]);
    ++st.count;
  }
  FidelityReport report;
  report.tag = std::move(tag);
  report.noise_ratio = test.noise_ratio;
  for (auto& [level, st] : by_level) {
    st.mean /= static_cast<double>(st.count);
    report.levels.push_back(st);
  }
  return report;
}

std::string report_csv(const FidelityReport& report) {
  std::string out = "level,mean_f,min_f,max_f,count\n";
  for (const auto& s : report.levels) {
    out += std::to_string(s.level) + "," + format_double(s.mean) + "," + format_double(s.min) + "," +
           format_double(s.max) + "," + std::to_string(s.count) + "\n";
  }
  return out;
}

std::string report_json(const FidelityReport& report) {
  std::string out = "{\"tag\": \"" + report.tag + "\", \"noise_ratio\": " + format_double(report.noise_ratio) +
                    ", \"levels\": [";
  for (std::size_t i = 0; i < report.levels.size(); ++i) {
    const auto& s = report.levels[i];
    out += (i ? ",\n  " : "\n  ");
    out += "{\"level\": " + std::to_string(s.level) + ", \"mean\": " + format_double(s.mean) +
           ", \"min\": " + format_double(s.min) + ", \"max\": " + format_double(s.max) +
           ", \"count\": " + std::to_string(s.count) + "}";
  }
  out += "\n]}\n";
  return out;
}

}  // namespace eigenrec
