#include "eigenrec/dataset_factory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/parallel.hpp"
#include "eigenrec/spectral_engine.hpp"

namespace eigenrec {

using nlohmann::json;

const char* to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::train: return "train";
    case SplitTag::val: return "val";
    case SplitTag::test: return "test";
    case SplitTag::unsplit: return "unsplit";
  }
  return "unsplit";
}

SplitTag split_tag_from_string(const std::string& text) {
  if (text == "train") return SplitTag::train;
  if (text == "val") return SplitTag::val;
  if (text == "test") return SplitTag::test;
  if (text == "unsplit") return SplitTag::unsplit;
  throw InvalidInput("unknown split tag '" + text + "'");
}

std::size_t Dataset::draw_count() const {
  std::unordered_set<std::uint64_t> seeds;
  for (const auto& s : samples) seeds.insert(s.seed);
  return seeds.size();
}

std::vector<double> inject_noise(std::span<const double> a, const NoiseSpec& spec, Rng& rng) {
  if (!std::isfinite(spec.ratio) || spec.ratio < 0.0) throw InvalidInput("noise ratio must be finite and >= 0");
  std::vector<double> out(a.begin(), a.end());
  if (spec.ratio == 0.0) return out;
  double norm_a = 0.0;
  for (double v : a) norm_a += v * v;
  norm_a = std::sqrt(norm_a);
  if (norm_a == 0.0) throw InvalidInput("cannot apply a relative noise ratio to a zero vector");
  std::vector<double> u(a.size());
  double norm_u = 0.0;
  while (norm_u == 0.0) {
    for (auto& v : u) v = rng.normal();
    norm_u = std::sqrt(std::inner_product(u.begin(), u.end(), u.begin(), 0.0));
  }
  const double scale = spec.ratio * norm_a / norm_u;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * u[i];
  return out;
}

std::vector<std::size_t> lower_half_levels(int n_qubits) {
  const std::size_t half = std::size_t{1} << (n_qubits - 1);
  std::vector<std::size_t> levels(half);
  std::iota(levels.begin(), levels.end(), std::size_t{0});
  return levels;
}

namespace {
constexpr std::uint64_t kNoiseStream = 0x6e6f6973655f7631ULL;  // "noise_v1"
}

GenerateResult generate(const OperatorSet& ops, const GenerateOptions& options) {
  if (options.n_sets < 1) throw InvalidInput("n_sets must be >= 1");
  const std::vector<std::size_t> levels =
      options.levels.empty() ? lower_half_levels(ops.n_qubits) : options.levels;
  for (std::size_t k : levels) {
    if (k >= ops.dim()) throw InvalidInput("level " + std::to_string(k) + " outside the spectrum");
  }
  const std::size_t n = ops.size();
  if (options.sign_pattern && options.sign_pattern->size() != n) {
    throw InvalidInput("sign pattern length does not match N");
  }

  std::vector<std::vector<Sample>> per_draw(options.n_sets);
  parallel_for(options.n_sets, [&](std::size_t draw) {
    const std::uint64_t draw_seed = derive_seed(options.seed, options.draw_offset + draw);
    Rng rng(draw_seed);
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (options.sign_pattern) {
        const double u = rng.uniform();
        c[j] = (*options.sign_pattern)[j] == '-' ? -(1.0 - u) : u;
      } else {
        c[j] = rng.uniform(-1.0, 1.0);
      }
    }
    auto evs = forward_map_levels(c, ops, levels);
    auto& out = per_draw[draw];
    out.reserve(evs.size());
    for (auto& ev : evs) {
      Sample s;
      s.c = c;
      s.k = ev.level;
      s.degenerate = ev.degenerate;
      s.seed = draw_seed;
      if (options.noise_ratio > 0.0) {
        Rng noise(derive_seed(draw_seed ^ kNoiseStream, ev.level));
        s.a = inject_noise(ev.a, NoiseSpec{options.noise_ratio}, noise);
      } else {
        s.a = std::move(ev.a);
      }
      out.push_back(std::move(s));
    }
  });

  GenerateResult result;
  Dataset& ds = result.dataset;
  ds.n_qubits = ops.n_qubits;
  ds.n_coeffs = n;
  ds.operator_set_hash = ops.hash();
  ds.noise_ratio = options.noise_ratio;
  result.report.draws = options.n_sets;
  for (auto& draw : per_draw) {
    for (auto& s : draw) {
      if (s.degenerate) {
        ++result.report.degenerate;
        if (!options.keep_degenerate) {
          ++result.report.degenerate_excluded;
          continue;
        }
      }
      ds.samples.push_back(std::move(s));
    }
  }
  result.report.emitted = ds.samples.size();
  return result;
}

SplitResult split(const Dataset& ds, const SplitFractions& f, std::uint64_t seed) {
  if (!(f.train > 0 && f.val > 0 && f.test > 0)) throw InvalidInput("split fractions must be positive");
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) throw InvalidInput("split fractions must sum to 1");

  std::vector<std::uint64_t> draws;
  std::unordered_set<std::uint64_t> seen;
  for (const auto& s : ds.samples) {
    if (seen.insert(s.seed).second) draws.push_back(s.seed);
  }
  const auto total = static_cast<long long>(draws.size());
  const long long n_train = std::llround(f.train * static_cast<double>(total));
  const long long n_val = std::llround(f.val * static_cast<double>(total));
  const long long n_test = total - n_train - n_val;
  if (n_train <= 0 || n_val <= 0 || n_test <= 0) {
    throw InvalidInput("split of " + std::to_string(total) + " draws leaves an empty partition");
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::uint64_t>(draws));
  std::unordered_map<std::uint64_t, SplitTag> assignment;
  for (long long i = 0; i < total; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    assignment[draws[idx]] = i < n_train ? SplitTag::train : (i < n_train + n_val ? SplitTag::val : SplitTag::test);
  }

  SplitResult out;
  for (Dataset* part : {&out.train, &out.val, &out.test}) {
    part->n_qubits = ds.n_qubits;
    part->n_coeffs = ds.n_coeffs;
    part->operator_set_hash = ds.operator_set_hash;
    part->operator_set_path = ds.operator_set_path;
    part->noise_ratio = ds.noise_ratio;
  }
  out.train.split_tag = SplitTag::train;
  out.val.split_tag = SplitTag::val;
  out.test.split_tag = SplitTag::test;
  for (const auto& s : ds.samples) {
    switch (assignment[s.seed]) {
      case SplitTag::train: out.train.samples.push_back(s); break;
      case SplitTag::val: out.val.samples.push_back(s); break;
      default: out.test.samples.push_back(s); break;
    }
  }
  return out;
}

std::string dataset_to_jsonl(const Dataset& ds) {
  json header;
  header["version"] = 1;
  header["operator_set_hash"] = ds.operator_set_hash;
  header["operator_set_path"] = ds.operator_set_path;
  header["n_qubits"] = ds.n_qubits;
  header["N"] = ds.n_coeffs;
  header["noise_ratio"] = ds.noise_ratio;
  header["split_tag"] = to_string(ds.split_tag);
  std::string out = header.dump() + "\n";
  for (const auto& s : ds.samples) {
    out += "{\"a\":" + format_array(s.a) + ",\"c\":" + format_array(s.c) + ",\"k\":" +
           std::to_string(s.k) + ",\"deg\":" + (s.degenerate ? "true" : "false") +
           ",\"seed\":" + std::to_string(s.seed) + "}\n";
  }
  return out;
}

namespace {

std::vector<double> finite_array(const json& j, const char* key, long line_no) {
  if (!j.contains(key) || !j[key].is_array()) throw ParseError(std::string("missing array '") + key + "'", line_no);
  std::vector<double> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) {
    if (!v.is_number()) throw ParseError(std::string("non-numeric entry in '") + key + "'", line_no);
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ParseError(std::string("non-finite entry in '") + key + "'", line_no);
    out.push_back(x);
  }
  return out;
}

void verify_energy_identity(const Dataset& ds, const OperatorSet& ops) {
  std::uint64_t cached_seed = 0;
  std::vector<double> cached_c;
  std::optional<Spectrum> spec;
  for (std::size_t idx = 0; idx < ds.samples.size(); ++idx) {
    const auto& s = ds.samples[idx];
    if (!spec || s.seed != cached_seed || s.c != cached_c) {
      spec = eigendecompose(assemble(s.c, ops));
      cached_seed = s.seed;
      cached_c = s.c;
    }
    if (s.k >= spec->dim()) throw IntegrityError("sample " + std::to_string(idx) + ": level out of range");
    const double energy = std::inner_product(s.c.begin(), s.c.end(), s.a.begin(), 0.0);
    if (std::abs(energy - spec->eigenvalues[s.k]) > 1e-8) {
      throw IntegrityError("sample " + std::to_string(idx) + ": <c,a> = " + format_double(energy) +
                           " but lambda_k = " + format_double(spec->eigenvalues[s.k]));
    }
  }
}

}  // namespace

Dataset dataset_from_jsonl(const std::string& text, const LoadOptions& options) {
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  Dataset ds;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
    }
    if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
    try {
      if (!have_header) {
        if (j.value("version", 0) != 1) throw ParseError("unsupported dataset version", line_no);
        ds.operator_set_hash = j.at("operator_set_hash").get<std::string>();
        ds.operator_set_path = j.value("operator_set_path", std::string{});
        ds.n_qubits = j.at("n_qubits").get<int>();
        ds.n_coeffs = j.at("N").get<std::size_t>();
        ds.noise_ratio = j.at("noise_ratio").get<double>();
        ds.split_tag = split_tag_from_string(j.at("split_tag").get<std::string>());
        have_header = true;
        continue;
      }
      Sample s;
      s.a = finite_array(j, "a", line_no);
      s.c = finite_array(j, "c", line_no);
      if (s.a.size() != ds.n_coeffs || s.c.size() != ds.n_coeffs) {
        throw IntegrityError("line " + std::to_string(line_no) + ": sample has length " +
                             std::to_string(s.a.size()) + "/" + std::to_string(s.c.size()) +
                             ", header says N = " + std::to_string(ds.n_coeffs));
      }
      s.k = j.at("k").get<std::size_t>();
      s.degenerate = j.at("deg").get<bool>();
      s.seed = j.at("seed").get<std::uint64_t>();
      ds.samples.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad field: ") + e.what(), line_no);
    } catch (const InvalidInput& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  if (!have_header) throw ParseError("empty dataset file (no header line)", line_no);
  if (!text.empty() && text.back() != '\n') {
    throw ParseError("truncated final line", line_no);
  }
  if (options.ops) {
    if (options.ops->hash() != ds.operator_set_hash) {
      throw IntegrityError("dataset was generated for operator set " + ds.operator_set_hash +
                           ", got " + options.ops->hash());
    }
    if (options.ops->size() != ds.n_coeffs) throw IntegrityError("dataset N does not match operator set");
    if (options.verify && ds.noise_ratio == 0.0) verify_energy_identity(ds, *options.ops);
  } else if (options.verify) {
    throw InvalidInput("verification needs the operator set");
  }
  return ds;
}

void save_jsonl(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_jsonl(ds));
}

Dataset load_jsonl(const std::filesystem::path& path, const LoadOptions& options) {
  return dataset_from_jsonl(read_text_file(path), options);
}

}  // namespace eigenrec
