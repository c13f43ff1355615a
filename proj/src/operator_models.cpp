#include "eigenrec/operator_models.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <json.hpp>

#include "eigenrec/errors.hpp"
#include "eigenrec/io_util.hpp"
#include "eigenrec/parallel.hpp"

namespace eigenrec {

using nlohmann::json;

const char* to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::chain: return "chain";
    case GraphKind::ring: return "ring";
    case GraphKind::fully_connected: return "fully_connected";
    case GraphKind::custom: return "custom";
  }
  return "custom";
}

const char* to_string(OperatorKind kind) {
  return kind == OperatorKind::general ? "general" : "two_local";
}

GraphKind graph_kind_from_string(const std::string& text) {
  if (text == "chain") return GraphKind::chain;
  if (text == "ring") return GraphKind::ring;
  if (text == "fully_connected" || text == "fully-connected" || text == "full") {
    return GraphKind::fully_connected;
  }
  if (text == "custom") return GraphKind::custom;
  throw InvalidInput("unknown graph kind '" + text + "'");
}

InteractionGraph InteractionGraph::chain(int n) {
  InteractionGraph g{n, {}, GraphKind::chain};
  for (int q = 1; q < n; ++q) g.edges.emplace_back(q, q + 1);
  g.validate();
  return g;
}

InteractionGraph InteractionGraph::ring(int n) {
  if (n < 3) throw InvalidInput("ring needs at least 3 qubits");
  InteractionGraph g{n, {}, GraphKind::ring};
  for (int q = 1; q < n; ++q) g.edges.emplace_back(q, q + 1);
  g.edges.emplace_back(1, n);
  g.validate();
  return g;
}

InteractionGraph InteractionGraph::fully_connected(int n) {
  InteractionGraph g{n, {}, GraphKind::fully_connected};
  for (int i = 1; i <= n; ++i)
    for (int j = i + 1; j <= n; ++j) g.edges.emplace_back(i, j);
  g.validate();
  return g;
}

InteractionGraph InteractionGraph::custom(int n, std::vector<Edge> edges) {
  InteractionGraph g{n, std::move(edges), GraphKind::custom};
  g.validate();
  return g;
}

void InteractionGraph::validate() const {
  if (n_qubits < 2 || n_qubits > kMaxQubits) {
    throw InvalidInput("graph qubit count " + std::to_string(n_qubits) + " outside [2, " +
                       std::to_string(kMaxQubits) + "]");
  }
  std::set<Edge> seen;
  for (const auto& [a, b] : edges) {
    if (a == b) throw InvalidInput("self-loop on qubit " + std::to_string(a));
    if (a < 1 || b > n_qubits || a > b) {
      throw InvalidInput("edge (" + std::to_string(a) + "," + std::to_string(b) +
                         ") must satisfy 1 <= a < b <= n");
    }
    if (!seen.insert({a, b}).second) {
      throw InvalidInput("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
    }
  }
  const auto n = static_cast<std::size_t>(n_qubits);
  std::size_t expected = edges.size();
  switch (kind) {
    case GraphKind::chain: expected = n - 1; break;
    case GraphKind::ring: expected = n; break;
    case GraphKind::fully_connected: expected = n * (n - 1) / 2; break;
    case GraphKind::custom: break;
  }
  if (edges.size() != expected) {
    throw InvalidInput(std::string(to_string(kind)) + " graph on " + std::to_string(n) +
                       " qubits must have " + std::to_string(expected) + " edges");
  }
  if (edges.empty()) throw InvalidInput("graph has no edges");
}

GeneratedOperator random_general_operator(int n, Rng& rng) {
  if (n < 1 || n > kMaxQubits) {
    throw ResourceLimit("general operator qubit count " + std::to_string(n) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
  GeneratedOperator out;
  const auto words = all_pauli_words(static_cast<std::size_t>(n));
  out.terms.reserve(words.size());
  for (const auto& w : words) out.terms.push_back({w, rng.uniform(-1.0, 1.0)});
  out.matrix = synthesize(out.terms, static_cast<std::size_t>(n));
  return out;
}

GeneratedOperator random_local_operator(int n, Edge edge, Rng& rng) {
  if (n < 2 || n > kMaxQubits) {
    throw InvalidInput("local operator qubit count " + std::to_string(n) + " outside [2, " +
                       std::to_string(kMaxQubits) + "]");
  }
  const auto [alpha, beta] = edge;
  if (alpha < 1 || beta > n || alpha >= beta) {
    throw InvalidInput("edge (" + std::to_string(alpha) + "," + std::to_string(beta) +
                       ") invalid for " + std::to_string(n) + " qubits");
  }
  static constexpr char kLetters[] = {'I', 'X', 'Y', 'Z'};
  GeneratedOperator out;
  out.terms.reserve(16);
  std::string w(static_cast<std::size_t>(n), 'I');
  for (char pa : kLetters) {
    for (char pb : kLetters) {
      w[static_cast<std::size_t>(alpha - 1)] = pa;
      w[static_cast<std::size_t>(beta - 1)] = pb;
      out.terms.push_back({PauliString(w), rng.uniform(-1.0, 1.0)});
    }
  }
  out.matrix = synthesize(out.terms, static_cast<std::size_t>(n));
  return out;
}

std::string OperatorSet::hash() const {
  std::string canon = "eigenrec-opset-v1|";
  canon += to_string(kind);
  canon += '|' + std::to_string(n_qubits) + '|' + std::to_string(seed) + '\n';
  for (std::size_t i = 0; i < terms.size(); ++i) {
    canon += "#" + std::to_string(i) + '\n';
    for (const auto& t : terms[i]) canon += format_term_line(t) + '\n';
  }
  return fnv1a_hex(canon);
}

OperatorSet build_general_set(int n, int count, std::uint64_t seed) {
  if (count < 2) throw InvalidInput("an operator set needs N >= 2 operators");
  if (n < 1 || n > kMaxQubits) {
    throw ResourceLimit("qubit count " + std::to_string(n) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
  OperatorSet set;
  set.n_qubits = n;
  set.kind = OperatorKind::general;
  set.seed = seed;
  set.ops.resize(static_cast<std::size_t>(count));
  set.terms.resize(static_cast<std::size_t>(count));
  parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    auto gen = random_general_operator(n, rng);
    set.ops[i] = std::move(gen.matrix);
    set.terms[i] = std::move(gen.terms);
  });
  return set;
}

OperatorSet build_local_set(const InteractionGraph& graph, std::uint64_t seed) {
  graph.validate();
  if (graph.edges.size() < 2) throw InvalidInput("an operator set needs N >= 2 operators");
  OperatorSet set;
  set.n_qubits = graph.n_qubits;
  set.kind = OperatorKind::two_local;
  set.graph = graph;
  set.seed = seed;
  const std::size_t count = graph.edges.size();
  set.ops.resize(count);
  set.terms.resize(count);
  parallel_for(count, [&](std::size_t i) {
    Rng rng(derive_seed(seed, i));
    auto gen = random_local_operator(graph.n_qubits, graph.edges[i], rng);
    set.ops[i] = std::move(gen.matrix);
    set.terms[i] = std::move(gen.terms);
  });
  return set;
}

OperatorSet make_operator_set(int n, OperatorKind kind, std::optional<InteractionGraph> graph,
                              std::uint64_t seed, std::vector<std::vector<PauliTerm>> terms) {
  if (n < 1 || n > kMaxQubits) {
    throw ResourceLimit("qubit count " + std::to_string(n) + " outside [1, " +
                        std::to_string(kMaxQubits) + "]");
  }
  if (terms.size() < 2) throw InvalidInput("an operator set needs N >= 2 operators");
  if (kind == OperatorKind::two_local) {
    if (!graph) throw InvalidInput("two_local operator set requires a graph");
    graph->validate();
    if (graph->n_qubits != n) throw InvalidInput("graph qubit count does not match n_qubits");
    if (graph->edges.size() != terms.size()) {
      throw InvalidInput("two_local set needs one operator per edge");
    }
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const auto [a, b] = graph->edges[i];
      const std::size_t support[] = {static_cast<std::size_t>(a - 1), static_cast<std::size_t>(b - 1)};
      for (const auto& t : terms[i]) {
        if (t.string.n_qubits() == static_cast<std::size_t>(n) && !t.string.identity_outside(support)) {
          throw InvalidInput("operator " + std::to_string(i) + " term '" + t.string.word() +
                             "' acts outside its edge");
        }
      }
    }
  }
  OperatorSet set;
  set.n_qubits = n;
  set.kind = kind;
  set.graph = std::move(graph);
  set.seed = seed;
  set.ops.reserve(terms.size());
  for (const auto& list : terms) set.ops.push_back(synthesize(list, static_cast<std::size_t>(n)));
  set.terms = std::move(terms);
  return set;
}

std::string operator_set_to_json(const OperatorSet& set) {
  json doc;
  doc["version"] = 1;
  doc["kind"] = to_string(set.kind);
  doc["n_qubits"] = set.n_qubits;
  if (set.graph) {
    json edges = json::array();
    for (const auto& [a, b] : set.graph->edges) edges.push_back({a, b});
    doc["graph"] = {{"kind", to_string(set.graph->kind)}, {"edges", edges}};
  } else {
    doc["graph"] = nullptr;
  }
  doc["seed"] = set.seed;
  doc["prng"] = Rng::kGeneratorName;
  json ops = json::array();
  for (std::size_t i = 0; i < set.terms.size(); ++i) {
    json op;
    op["index"] = i;
    if (set.kind == OperatorKind::two_local && set.graph) {
      op["support"] = {set.graph->edges[i].first, set.graph->edges[i].second};
    } else {
      op["support"] = "all";
    }
    json terms = json::array();
    for (const auto& t : set.terms[i]) terms.push_back({t.string.word(), t.coeff});
    op["terms"] = std::move(terms);
    ops.push_back(std::move(op));
  }
  doc["operators"] = std::move(ops);
  return doc.dump(1) + "\n";
}

namespace {

long line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<long>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

template <class T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(where + ": field '" + key + "' has the wrong type");
  }
}

PauliTerm parse_json_term(const json& t, std::size_t n, const std::string& where) {
  PauliTerm term;
  if (t.is_string()) {
    term = parse_term_line(t.get<std::string>());
  } else if (t.is_array() && t.size() == 2 && t[0].is_string()) {
    if (!t[1].is_number()) throw ParseError(where + ": coefficient must be a real number");
    const double c = t[1].get<double>();
    if (!std::isfinite(c)) throw ParseError(where + ": non-finite coefficient");
    try {
      term = {PauliString(t[0].get<std::string>()), c};
    } catch (const InvalidInput& e) {
      throw ParseError(where + ": " + e.what());
    }
  } else {
    throw ParseError(where + ": term must be [word, coeff] or \"<word> <coeff>\"");
  }
  if (term.string.n_qubits() != n) {
    throw ParseError(where + ": word '" + term.string.word() + "' has length " +
                     std::to_string(term.string.n_qubits()) + ", expected " + std::to_string(n));
  }
  return term;
}

}  // namespace

OperatorSet operator_set_from_json(const std::string& text) {
  json doc;
  try {
    // nlohmann accepts NaN/Infinity tokens nowhere, so non-finite values fail here.
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(),
                     line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0));
  }
  if (!doc.is_object()) throw ParseError("operator set must be a JSON object");
  const int version = field<int>(doc, "version", "root");
  if (version != 1) throw ParseError("unsupported operator set version " + std::to_string(version));
  const std::string kind_text = field<std::string>(doc, "kind", "root");
  OperatorKind kind;
  if (kind_text == "general") kind = OperatorKind::general;
  else if (kind_text == "two_local") kind = OperatorKind::two_local;
  else throw ParseError("root: unknown kind '" + kind_text + "'");
  const int n = field<int>(doc, "n_qubits", "root");
  if (n < 1 || n > kMaxQubits) throw ParseError("root: n_qubits out of range");
  const auto seed = field<std::uint64_t>(doc, "seed", "root");

  std::optional<InteractionGraph> graph;
  if (doc.contains("graph") && !doc["graph"].is_null()) {
    const json& g = doc["graph"];
    InteractionGraph ig;
    ig.n_qubits = n;
    try {
      ig.kind = graph_kind_from_string(field<std::string>(g, "kind", "graph"));
    } catch (const InvalidInput& e) {
      throw ParseError(std::string("graph: ") + e.what());
    }
    const auto edges = field<std::vector<std::vector<int>>>(g, "edges", "graph");
    for (std::size_t e = 0; e < edges.size(); ++e) {
      if (edges[e].size() != 2) throw ParseError("graph.edges[" + std::to_string(e) + "]: need 2 qubits");
      ig.edges.emplace_back(edges[e][0], edges[e][1]);
    }
    try {
      ig.validate();
    } catch (const InvalidInput& e) {
      throw ParseError(std::string("graph: ") + e.what());
    }
    graph = std::move(ig);
  }

  if (!doc.contains("operators") || !doc["operators"].is_array()) {
    throw ParseError("root: missing array 'operators'");
  }
  std::vector<std::vector<PauliTerm>> terms;
  const json& ops = doc["operators"];
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const std::string where = "operators[" + std::to_string(i) + "]";
    const auto index = field<std::size_t>(ops[i], "index", where);
    if (index != i) throw ParseError(where + ": index " + std::to_string(index) + " out of order");
    if (!ops[i].contains("terms") || !ops[i]["terms"].is_array()) {
      throw ParseError(where + ": missing array 'terms'");
    }
    std::vector<PauliTerm> list;
    const json& jt = ops[i]["terms"];
    for (std::size_t t = 0; t < jt.size(); ++t) {
      list.push_back(parse_json_term(jt[t], static_cast<std::size_t>(n),
                                     where + ".terms[" + std::to_string(t) + "]"));
    }
    terms.push_back(std::move(list));
  }
  try {
    return make_operator_set(n, kind, std::move(graph), seed, std::move(terms));
  } catch (const InvalidInput& e) {
    throw ParseError(e.what());
  } catch (const ResourceLimit& e) {
    throw ParseError(e.what());
  }
}

void save_operator_set(const OperatorSet& set, const std::filesystem::path& path) {
  write_text_file(path, operator_set_to_json(set));
}

OperatorSet load_operator_set(const std::filesystem::path& path) {
  return operator_set_from_json(read_text_file(path));
}

}  // namespace eigenrec
