#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/sign_router.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "test_support.hpp"

using namespace eigenrec;

namespace {

OperatorSet xz_set() {
  return make_operator_set(1, OperatorKind::general, std::nullopt, 0,
                           {{{PauliString("X"), 1.0}}, {{PauliString("Z"), 1.0}}});
}

/// Network whose output is the constant `out` whatever the input.
MLPParams constant_net(std::size_t n_in, std::vector<double> out, OutputHead head = OutputHead::identity) {
  MLPParams p = init_params({n_in, 3, 3, out.size()}, 1, head);
  for (auto& w : p.weights) std::fill(w.begin(), w.end(), 0.0);
  p.biases.back() = std::move(out);
  return p;
}

/// Joint classifier over N = 2 whose ranking is fixed by the given logits.
SignClassifier fixed_classifier(std::vector<double> logits) {
  return {HeadKind::joint, constant_net(2, std::move(logits), OutputHead::softmax)};
}

std::vector<std::pair<std::string, double>> drain(PatternRanking r) {
  std::vector<std::pair<std::string, double>> out;
  while (auto next = r.next()) out.emplace_back(next->first.str(), next->second);
  return out;
}

}  // namespace

TEST_CASE("sign patterns") {
  const std::vector<double> c{0.5, -0.1, 0.0, -2.0};
  const SignPattern p = SignPattern::of(c);
  CHECK(p.str() == "+-+-");
  CHECK(p.index() == 0b0101);
  CHECK(SignPattern::from_index(0b0101, 4) == p);
  CHECK(p.complement().str() == "-+-+");
  CHECK(SignPattern("++") < SignPattern("+-"));
  CHECK(SignPattern("+-") < SignPattern("-+"));
  CHECK_THROWS_AS(SignPattern("+x"), InvalidInput);
  for (std::uint64_t i = 0; i < 64; ++i) CHECK(SignPattern::from_index(i, 6).index() == i);
}

TEST_CASE("Gray order") {
  const auto g2 = gray_order(2);
  REQUIRE(g2.size() == 4);
  CHECK(g2[0].str() == "++");
  CHECK(g2[1].str() == "+-");
  CHECK(g2[2].str() == "--");
  CHECK(g2[3].str() == "-+");
  const auto g6 = gray_order(6);
  std::vector<SignPattern> sorted(g6);
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  for (std::size_t i = 0; i + 1 < g6.size(); ++i) {
    int diff = 0;
    for (std::size_t j = 0; j < 6; ++j) diff += g6[i].str()[j] != g6[i + 1].str()[j];
    CHECK(diff == 1);
  }
  CHECK_THROWS_AS(gray_order(25), ResourceLimit);
}

TEST_CASE("sign partition covers every sample exactly once") {
  const OperatorSet ops = build_general_set(3, 3, 5);
  GenerateOptions g;
  g.n_sets = 60;
  g.levels = {0, 2};
  Dataset ds = generate(ops, g).dataset;
  const auto parts = sign_partition(ds);
  std::size_t total = 0;
  for (const auto& [pattern, part] : parts) {
    total += part.samples.size();
    for (const auto& s : part.samples) CHECK(SignPattern::of(s.c) == pattern);
    CHECK(part.n_coeffs == ds.n_coeffs);
  }
  CHECK(total == ds.samples.size());
}

TEST_CASE("factorized ranking of two coordinates") {
  const auto r = drain(PatternRanking::factorized({0.9, 0.8}));
  REQUIRE(r.size() == 4);
  CHECK(r[0].first == "++");
  CHECK(r[0].second == doctest::Approx(0.72));
  CHECK(r[1].first == "+-");
  CHECK(r[1].second == doctest::Approx(0.18));
  CHECK(r[2].first == "-+");
  CHECK(r[2].second == doctest::Approx(0.08));
  CHECK(r[3].first == "--");
  CHECK(r[3].second == doctest::Approx(0.02));
}

TEST_CASE("factorized ranking matches brute-force enumeration") {
  Rng rng(31);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng.below(7);
    std::vector<double> p(n);
    for (auto& x : p) x = rng.uniform(0.01, 0.99);
    std::vector<std::pair<double, std::string>> brute;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << n); ++i) {
      const SignPattern s = SignPattern::from_index(i, n);
      double prob = 1.0;
      for (std::size_t j = 0; j < n; ++j) prob *= s.str()[j] == '+' ? p[j] : 1.0 - p[j];
      brute.emplace_back(prob, s.str());
      CHECK(std::exp(factorized_log_likelihood(p, s)) == doctest::Approx(prob).epsilon(1e-12));
    }
    std::sort(brute.begin(), brute.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const auto ranked = drain(PatternRanking::factorized(p));
    REQUIRE(ranked.size() == brute.size());
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i].second == doctest::Approx(brute[i].first).epsilon(1e-12));
  }
}

TEST_CASE("ties are broken lexicographically") {
  const auto fact = drain(PatternRanking::factorized({0.5, 0.5}));
  CHECK(fact[0].first == "++");
  CHECK(fact[1].first == "+-");
  CHECK(fact[2].first == "-+");
  CHECK(fact[3].first == "--");
  const auto joint = drain(PatternRanking::joint({0.1, 0.4, 0.1, 0.4}, 2));
  CHECK(joint[0].first == "+-");
  CHECK(joint[1].first == "--");
  CHECK(joint[2].first == "++");
  CHECK(joint[3].first == "-+");
}

TEST_CASE("classifier head selection") {
  Rng rng(3);
  auto fake = [&](std::size_t n, std::size_t count) {
    Dataset ds;
    ds.n_coeffs = n;
    for (std::size_t i = 0; i < count; ++i) {
      Sample s;
      s.a = testsupport::uniform_vector(rng, n);
      s.c = testsupport::uniform_vector(rng, n);
      s.seed = i;
      ds.samples.push_back(s);
    }
    return ds;
  };
  TrainConfig cfg;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const Dataset small = fake(3, 40);
  const ClassifierTrainResult joint = train_classifier(small, small, cfg);
  CHECK(joint.classifier.kind == HeadKind::joint);
  CHECK(joint.classifier.net.output_dim() == 8);
  const auto probs = joint.classifier.probabilities(small.samples[0].a);
  CHECK(std::accumulate(probs.begin(), probs.end(), 0.0) == doctest::Approx(1.0));

  const Dataset wide = fake(13, 40);
  const ClassifierTrainResult fact = train_classifier(wide, wide, cfg);
  CHECK(fact.classifier.kind == HeadKind::factorized);
  CHECK(fact.classifier.net.output_dim() == 13);
  for (double p : fact.classifier.probabilities(wide.samples[0].a)) {
    CHECK(p > 0.0);
    CHECK(p < 1.0);
  }
  // Two samples cannot cover all 8 joint classes.
  const Dataset tiny = fake(3, 2);
  CHECK_FALSE(train_classifier(tiny, tiny, cfg).empty_classes.empty());
}

TEST_CASE("part regressors are chained in Gray order") {
  const OperatorSet ops = xz_set();
  std::map<SignPattern, PartData> parts;
  for (const char* pat : {"++", "+-", "-+"}) {
    GenerateOptions g;
    g.n_sets = 20;
    g.sign_pattern = pat;
    g.levels = {0};
    parts[SignPattern(pat)] = {generate(ops, g).dataset, {}};
  }
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.patience = 5;
  PartsTrainReport rep;
  const auto trained = train_parts(parts, 2, cfg, &rep);
  REQUIRE(rep.order.size() == 3);
  CHECK(rep.order[0].str() == "++");
  CHECK(rep.order[1].str() == "+-");
  CHECK(rep.order[2].str() == "-+");
  REQUIRE(rep.missing.size() == 1);
  CHECK(rep.missing[0].str() == "--");
  CHECK_FALSE(trained.at(SignPattern("--")).has_value());
  CHECK_FALSE(rep.reports.at(SignPattern("++")).transfer_init);
  CHECK(rep.reports.at(SignPattern("+-")).transfer_init);
  CHECK(rep.reports.at(SignPattern("-+")).transfer_init);
}

TEST_CASE("forward residual of exact and wrong candidates") {
  const OperatorSet ops = xz_set();
  const std::vector<double> c{std::cos(0.3), std::sin(0.3)};
  const auto a = forward_map(c, ops, 0).a;
  const auto [res, level] = forward_residual(c, a, ops);
  CHECK(res <= 1e-12);
  CHECK(level == 0);
  // -c reproduces a on the other level.
  const auto [res_neg, level_neg] = forward_residual(std::vector<double>{-c[0], -c[1]}, a, ops);
  CHECK(res_neg <= 1e-12);
  CHECK(level_neg == 1);
  const auto [res_bad, lvl] = forward_residual(std::vector<double>{std::cos(-1.2), std::sin(-1.2)}, a, ops);
  CHECK(res_bad > 0.5);
  (void)lvl;
  CHECK(std::isinf(forward_residual(c, std::vector<double>{0.0, 0.0}, ops).first));
}

namespace {

RouterModel hand_built_router(const OperatorSet& ops) {
  const std::vector<double> truth{std::cos(0.3), std::sin(0.3)};  // "++"
  RouterModel r;
  r.n_coeffs = 2;
  r.gray = gray_order(2);
  r.ops_hash = ops.hash();
  // Ranking: "+-" first, then "++", then "-+", then "--".
  r.classifier = fixed_classifier({2.0, 3.0, 0.0, 1.0});
  r.parts[SignPattern("++")] = constant_net(2, truth);
  r.parts[SignPattern("+-")] = constant_net(2, {std::cos(-1.2), std::sin(-1.2)});
  r.parts[SignPattern("-+")] = std::nullopt;
  r.parts[SignPattern("--")] = constant_net(2, {-0.7, -0.7});
  return r;
}

}  // namespace

TEST_CASE("routing walks the ranking until a candidate verifies") {
  const OperatorSet ops = xz_set();
  const RouterModel router = hand_built_router(ops);
  const auto a = forward_map(std::vector<double>{std::cos(0.3), std::sin(0.3)}, ops, 0).a;
  const RouteResult r = route_and_predict(router, a, ops);
  CHECK(r.verified);
  CHECK(r.pattern.str() == "++");
  REQUIRE(r.candidates.size() == 2);
  CHECK(r.candidates[0].pattern.str() == "+-");
  CHECK(r.candidates[0].residual > 0.05);
  CHECK(r.c[0] == doctest::Approx(std::cos(0.3)));
  CHECK(testsupport::norm(r.c) == doctest::Approx(1.0));

  VerificationPolicy one;
  one.max_candidates = 1;
  const RouteResult r1 = route_and_predict(router, a, ops, one);
  CHECK_FALSE(r1.verified);
  CHECK(r1.candidates.size() == 1);
}

TEST_CASE("missing parts and zero input never verify") {
  const OperatorSet ops = xz_set();
  RouterModel router = hand_built_router(ops);
  router.parts[SignPattern("++")] = std::nullopt;
  const auto a = forward_map(std::vector<double>{std::cos(0.3), std::sin(0.3)}, ops, 0).a;
  VerificationPolicy p;
  p.max_candidates = 3;
  const RouteResult r = route_and_predict(router, a, ops, p);
  CHECK_FALSE(r.verified);
  CHECK(r.candidates[1].missing);

  const RouteResult z = route_and_predict(hand_built_router(ops), std::vector<double>{0.0, 0.0}, ops);
  CHECK_FALSE(z.verified);
  CHECK(std::isinf(z.residual));
}

TEST_CASE("router bundle round-trip and integrity checks") {
  const OperatorSet ops = xz_set();
  const RouterModel router = hand_built_router(ops);
  testsupport::TempDir dir("router");
  save_router(router, dir.path());
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "classifier.json"));
  CHECK(std::filesystem::exists(dir / "++.json"));
  CHECK_FALSE(std::filesystem::exists(dir / "-+.json"));
  const RouterModel back = load_router(dir.path());
  CHECK(back.gray == router.gray);
  CHECK(back.ops_hash == router.ops_hash);
  CHECK(back.classifier.net == router.classifier.net);
  CHECK_FALSE(back.parts.at(SignPattern("-+")).has_value());
  CHECK(*back.parts.at(SignPattern("++")) == *router.parts.at(SignPattern("++")));

  const OperatorSet other = build_general_set(1, 2, 3);
  CHECK_THROWS_AS(route_and_predict(back, std::vector<double>{0.1, 0.2}, other), IntegrityError);

  // A part checkpoint from a different operator set is refused.
  std::string text = read_text_file(dir / "++.json");
  const auto pos = text.find(router.ops_hash);
  REQUIRE(pos != std::string::npos);
  text.replace(pos, router.ops_hash.size(), std::string(router.ops_hash.size(), '0'));
  write_text_file(dir / "++.json", text);
  CHECK_THROWS_AS(load_router(dir.path()), IntegrityError);
}

TEST_CASE("verification policy validation") {
  VerificationPolicy p;
  p.residual_tol = -1.0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
  p = {};
  p.max_candidates = 0;
  CHECK_THROWS_AS(p.validate(), InvalidInput);
}
