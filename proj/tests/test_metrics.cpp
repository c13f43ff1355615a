#include <doctest.h>

#include <algorithm>

#include "eigenrec/errors.hpp"
#include "eigenrec/metrics.hpp"
#include "eigenrec/spectral_engine.hpp"
#include "test_support.hpp"

using namespace eigenrec;

TEST_CASE("fidelity reference values") {
  Rng rng(1);
  const OperatorSet ops = build_general_set(3, 3, 1);
  const HermitianOp h = assemble(testsupport::uniform_vector(rng, 3), ops);
  HermitianOp neg = h, twice = h;
  neg.scale(-1.0);
  twice.scale(2.0);
  CHECK(fidelity(h, h) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fidelity(h, neg) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(fidelity(h, twice) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fidelity(pauli_matrix(PauliString("X")), pauli_matrix(PauliString("Z"))) == doctest::Approx(0.5));
  CHECK_THROWS_AS(fidelity(h, HermitianOp(8)), InvalidInput);
}

TEST_CASE("fidelity is symmetric, bounded and scale invariant") {
  Rng rng(2);
  const OperatorSet ops = build_general_set(3, 4, 2);
  for (int t = 0; t < 50; ++t) {
    const auto u = testsupport::uniform_vector(rng, 4);
    const auto v = testsupport::uniform_vector(rng, 4);
    const HermitianOp a = assemble(u, ops), b = assemble(v, ops);
    const double f = fidelity(a, b);
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(fidelity(b, a) == doctest::Approx(f).epsilon(1e-13));
    HermitianOp a3 = a;
    a3.scale(3.7);
    CHECK(fidelity(a3, b) == doctest::Approx(f).epsilon(1e-13));
  }
}

TEST_CASE("Gram-matrix fidelity equals the matrix formula") {
  Rng rng(3);
  for (auto ops : {build_general_set(3, 4, 3), build_local_set(InteractionGraph::ring(4), 3)}) {
    const GramMatrix gram(ops);
    for (std::size_t i = 0; i < ops.size(); ++i)
      for (std::size_t j = 0; j < ops.size(); ++j) CHECK(gram(i, j) == doctest::Approx(hs_inner(ops.ops[i], ops.ops[j])));
    for (int t = 0; t < 30; ++t) {
      const auto u = testsupport::uniform_vector(rng, ops.size());
      const auto v = testsupport::uniform_vector(rng, ops.size());
      CHECK(std::abs(fidelity(u, v, gram) - fidelity(assemble(u, ops), assemble(v, ops))) <= 1e-12);
    }
  }
}

TEST_CASE("evaluate groups by level") {
  const OperatorSet ops = build_general_set(3, 3, 4);
  GenerateOptions g;
  g.n_sets = 20;
  const Dataset ds = generate(ops, g).dataset;

  const FidelityReport perfect = evaluate_samples([](const Sample& s) { return s.c; }, ds, ops, "perfect");
  REQUIRE(perfect.levels.size() == 4);
  for (const auto& l : perfect.levels) {
    CHECK(l.mean == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(l.count == 20);
  }
  const FidelityReport anti = evaluate_samples(
      [](const Sample& s) {
        auto c = s.c;
        for (auto& x : c) x = -x;
        return c;
      },
      ds, ops);
  for (const auto& l : anti.levels) CHECK(l.mean == doctest::Approx(0.0).epsilon(1e-12));
  CHECK_THROWS_AS(perfect.at(7), InvalidInput);

  const std::string csv = report_csv(perfect);
  CHECK(csv.rfind("level,mean_f,min_f,max_f,count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
