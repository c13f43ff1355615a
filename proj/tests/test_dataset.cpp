#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <set>

#include "eigenrec/dataset_factory.hpp"
#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "test_support.hpp"

using namespace eigenrec;

namespace {

Dataset small_dataset(const OperatorSet& ops, std::size_t sets, std::uint64_t seed = 3) {
  GenerateOptions g;
  g.n_sets = sets;
  g.seed = seed;
  Dataset ds = generate(ops, g).dataset;
  ds.operator_set_hash = ops.hash();
  return ds;
}

std::multiset<std::pair<std::uint64_t, std::size_t>> keys(const Dataset& ds) {
  std::multiset<std::pair<std::uint64_t, std::size_t>> out;
  for (const auto& s : ds.samples) out.insert({s.seed, s.k});
  return out;
}

}  // namespace

TEST_CASE("generate emits one sample per draw and level") {
  const OperatorSet ops = build_general_set(3, 3, 1);
  GenerateOptions g;
  g.n_sets = 1;
  g.levels = {0};
  g.seed = 4;
  const GenerateResult one = generate(ops, g);
  CHECK(one.dataset.samples.size() == 1);
  CHECK(one.report.draws == 1);

  g.n_sets = 50;
  g.levels = {};
  const GenerateResult r = generate(ops, g);
  CHECK(r.report.emitted + r.report.degenerate_excluded == 50 * 4);
  CHECK(r.dataset.samples.size() == r.report.emitted);
  CHECK(r.dataset.draw_count() == 50);
  CHECK(lower_half_levels(3) == std::vector<std::size_t>{0, 1, 2, 3});
  for (const auto& s : r.dataset.samples) {
    CHECK(s.k < 4);
    for (double c : s.c) {
      CHECK(c >= -1.0);
      CHECK(c < 1.0);
    }
  }
}

TEST_CASE("every emitted sample satisfies the energy identity") {
  const OperatorSet ops = build_local_set(InteractionGraph::ring(4), 6);
  const Dataset ds = small_dataset(ops, 40);
  for (const auto& s : ds.samples) {
    const Spectrum sp = eigendecompose(assemble(s.c, ops));
    double e = 0.0;
    for (std::size_t i = 0; i < s.c.size(); ++i) e += s.c[i] * s.a[i];
    CHECK(std::abs(e - sp.eigenvalues[s.k]) <= 1e-8);
  }
}

TEST_CASE("generation is deterministic and independent of the worker count") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  const Dataset a = small_dataset(ops, 30, 77);
  const Dataset b = small_dataset(ops, 30, 77);
  CHECK(a.samples == b.samples);
  // Draw offsets cut the same stream.
  GenerateOptions g;
  g.seed = 77;
  g.n_sets = 10;
  g.draw_offset = 20;
  const Dataset tail = generate(ops, g).dataset;
  std::vector<Sample> expected(a.samples.end() - static_cast<long>(tail.samples.size()), a.samples.end());
  CHECK(tail.samples == expected);
}

TEST_CASE("sign-pattern restricted draws stay in their orthant") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  GenerateOptions g;
  g.n_sets = 20;
  g.sign_pattern = "+-+";
  for (const auto& s : generate(ops, g).dataset.samples) {
    CHECK(s.c[0] >= 0.0);
    CHECK(s.c[1] < 0.0);
    CHECK(s.c[2] >= 0.0);
  }
  g.sign_pattern = "+-";
  CHECK_THROWS_AS(generate(ops, g), InvalidInput);
}

TEST_CASE("noise has the exact relative norm") {
  Rng rng(1);
  const std::vector<double> a{0.3, -0.4, 1.2, 0.05};
  const double na = testsupport::norm(a);
  CHECK(inject_noise(a, NoiseSpec{0.0}, rng) == a);
  for (double ratio : {0.2, 1.0}) {
    for (int t = 0; t < 100; ++t) {
      const auto out = inject_noise(a, NoiseSpec{ratio}, rng);
      std::vector<double> d(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) d[i] = out[i] - a[i];
      CHECK(std::abs(testsupport::norm(d) - ratio * na) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(inject_noise(std::vector<double>{0.0, 0.0}, NoiseSpec{0.1}, rng), InvalidInput);
  CHECK_THROWS_AS(inject_noise(a, NoiseSpec{-0.1}, rng), InvalidInput);
}

TEST_CASE("noise directions are isotropic") {
  Rng rng(2024);
  const std::vector<double> a{1.0, 0.0, 0.0, 0.0, 0.0};
  std::vector<double> mean(a.size(), 0.0);
  const int n = 10000;
  for (int t = 0; t < n; ++t) {
    const auto out = inject_noise(a, NoiseSpec{0.5}, rng);
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = out[i] - a[i];
    const double nd = testsupport::norm(d);
    for (std::size_t i = 0; i < a.size(); ++i) mean[i] += d[i] / nd / n;
  }
  CHECK(testsupport::norm(mean) <= 0.05);
}

TEST_CASE("split partitions by draw without leakage") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  GenerateOptions g;
  g.n_sets = 1000;
  g.levels = {0, 1};
  g.seed = 5;
  const Dataset ds = generate(ops, g).dataset;
  REQUIRE(ds.draw_count() == 1000);
  const SplitResult s = split(ds, {}, 11);
  CHECK(s.train.draw_count() == 800);
  CHECK(s.val.draw_count() == 100);
  CHECK(s.test.draw_count() == 100);

  std::set<std::uint64_t> tr, va, te;
  for (const auto& x : s.train.samples) tr.insert(x.seed);
  for (const auto& x : s.val.samples) va.insert(x.seed);
  for (const auto& x : s.test.samples) te.insert(x.seed);
  for (auto seed : va) CHECK_FALSE(tr.contains(seed));
  for (auto seed : te) {
    CHECK_FALSE(tr.contains(seed));
    CHECK_FALSE(va.contains(seed));
  }

  auto all = keys(s.train);
  for (const auto& k : keys(s.val)) all.insert(k);
  for (const auto& k : keys(s.test)) all.insert(k);
  CHECK(all == keys(ds));

  const SplitResult again = split(ds, {}, 11);
  CHECK(again.train.samples == s.train.samples);
  CHECK(again.test.samples == s.test.samples);
  CHECK(s.train.split_tag == SplitTag::train);
}

TEST_CASE("split rejects empty partitions and bad fractions") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  const Dataset ds = small_dataset(ops, 3);
  CHECK_THROWS_AS(split(ds, {0.98, 0.01, 0.01}, 1), InvalidInput);
  CHECK_THROWS_AS(split(ds, {0.5, 0.5, 0.5}, 1), InvalidInput);
}

TEST_CASE("JSONL round-trip is bit-exact") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  Dataset ds = small_dataset(ops, 10);
  ds.noise_ratio = 0.0;
  testsupport::TempDir dir("jsonl");
  save_jsonl(ds, dir / "d.jsonl");
  LoadOptions opts;
  opts.ops = &ops;
  opts.verify = true;
  const Dataset back = load_jsonl(dir / "d.jsonl", opts);
  CHECK(back.samples == ds.samples);
  CHECK(back.n_qubits == 3);
  CHECK(back.n_coeffs == 3);
  CHECK(back.operator_set_hash == ops.hash());
  CHECK(dataset_to_jsonl(back) == dataset_to_jsonl(ds));
}

TEST_CASE("JSONL integrity and parse failures") {
  const OperatorSet ops = build_general_set(3, 3, 2);
  const OperatorSet other = build_general_set(3, 3, 99);
  const Dataset ds = small_dataset(ops, 4);
  const std::string text = dataset_to_jsonl(ds);

  LoadOptions wrong;
  wrong.ops = &other;
  CHECK_THROWS_AS(dataset_from_jsonl(text, wrong), IntegrityError);

  // Tampered target breaks the energy identity.
  Dataset bad = ds;
  bad.samples[0].c[0] += 0.1;
  LoadOptions verify;
  verify.ops = &ops;
  verify.verify = true;
  CHECK_THROWS_AS(dataset_from_jsonl(dataset_to_jsonl(bad), verify), IntegrityError);

  CHECK_THROWS_AS(dataset_from_jsonl(""), ParseError);
  CHECK_THROWS_AS(dataset_from_jsonl(text.substr(0, text.size() - 20)), ParseError);
  std::string garbage = text;
  garbage.insert(text.find('\n') + 1, "{\"a\": oops}\n");
  try {
    dataset_from_jsonl(garbage);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}
