#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "eigenrec/pauli_algebra.hpp"
#include "eigenrec/rng.hpp"

namespace eigenrec {

enum class GraphKind { chain, ring, fully_connected, custom };
enum class OperatorKind { general, two_local };

const char* to_string(GraphKind kind);
const char* to_string(OperatorKind kind);
GraphKind graph_kind_from_string(const std::string& text);

/// 1-based qubit pair with first < second.
using Edge = std::pair<int, int>;

struct InteractionGraph {
  int n_qubits = 0;
  std::vector<Edge> edges;
  GraphKind kind = GraphKind::custom;

  /// (1,2), (2,3), ..., (n-1,n)
  static InteractionGraph chain(int n);
  /// chain plus the closing edge (1,n), listed last. Needs n >= 3.
  static InteractionGraph ring(int n);
  /// all pairs i < j in lexicographic order.
  static InteractionGraph fully_connected(int n);
  static InteractionGraph custom(int n, std::vector<Edge> edges);

  /// Throws InvalidInput on self-loops, duplicates, out-of-range qubits or a
  /// kind whose edge count is wrong.
  void validate() const;
};

/// A synthesized operator together with the Pauli terms it came from.
struct GeneratedOperator {
  HermitianOp matrix;
  std::vector<PauliTerm> terms;
};

inline constexpr int kMaxQubits = 10;

/// All 4^n Pauli coefficients i.i.d. uniform on [-1, 1). n in [1, kMaxQubits].
GeneratedOperator random_general_operator(int n, Rng& rng);

/// The 16 coefficients on qubits edge.first, edge.second (including I x I)
/// drawn uniform on [-1, 1); every other Pauli coefficient is zero.
GeneratedOperator random_local_operator(int n, Edge edge, Rng& rng);

struct OperatorSet {
  int n_qubits = 0;
  OperatorKind kind = OperatorKind::general;
  std::optional<InteractionGraph> graph;
  std::uint64_t seed = 0;
  std::vector<HermitianOp> ops;
  std::vector<std::vector<PauliTerm>> terms;

  std::size_t size() const noexcept { return ops.size(); }
  std::size_t dim() const noexcept { return std::size_t{1} << n_qubits; }

  /// Content hash over kind, n, seed and the term lists (format-independent).
  std::string hash() const;
};

/// N general operators (default N = n), operator i seeded with derive_seed(seed, i).
OperatorSet build_general_set(int n, int count, std::uint64_t seed);
/// One two-local operator per edge, in edge order.
OperatorSet build_local_set(const InteractionGraph& graph, std::uint64_t seed);

/// Builds an operator set from explicit term lists; validates everything.
OperatorSet make_operator_set(int n, OperatorKind kind, std::optional<InteractionGraph> graph,
                              std::uint64_t seed, std::vector<std::vector<PauliTerm>> terms);

std::string operator_set_to_json(const OperatorSet& set);
OperatorSet operator_set_from_json(const std::string& text);
void save_operator_set(const OperatorSet& set, const std::filesystem::path& path);
/// Matrices are re-synthesized from the stored terms.
OperatorSet load_operator_set(const std::filesystem::path& path);

}  // namespace eigenrec
