#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hlm/ast.hpp"

namespace hlm {

// Child slot of a production alternative. `symbol` is a nonterminal name or
// a terminal class ("$id" draws from the identifier pool, "$num" from the
// number pool). `fill=true` marks the growth point: the generator keeps
// appending expansions of this symbol until the tree reaches its target
// node count. A fill slot must be the last child of its alternative.
struct ChildSpec {
  std::string symbol;
  int min_rep = 1;
  int max_rep = 1;
  bool fill = false;
};

struct Alternative {
  std::string token;  // node token; "$id"/"$num" draw from the pools
  std::vector<ChildSpec> children;
  double weight = 1.0;
};

struct GrammarConfig {
  std::map<std::string, std::vector<Alternative>> rules;
  std::string start = "function";
  int identifier_pool = 40;  // identifiers "v0".."v{n-1}"
  int number_pool = 20;      // numbers "0".."{n-1}"
  int max_depth = 24;
  int min_nodes = 100;
  int max_nodes = 10000;
  double rename_fraction = 0.0;  // applied to identifier leaves after generation
  std::uint64_t seed = 1;
};

// Java-ish function grammar: function -> name, parameter list, statement
// block; statements over assignments, conditionals, loops, returns and
// calls; expressions over identifiers, numbers and binary operators.
GrammarConfig default_grammar();

GrammarConfig grammar_from_json(const std::string& json_text);
std::string grammar_to_json(const GrammarConfig& config);

std::vector<std::string> identifier_pool_tokens(const GrammarConfig& config);

// Deterministic for a fixed config (seed included); every generated tree has
// a node count within [min_nodes, max_nodes].
std::vector<Ast> synth_generate(const GrammarConfig& config, std::size_t count);

// Replaces each leaf whose token is in `pool` with a fresh name ("u0",
// "u1", ...) with probability `fraction`; fresh names are unique across the
// whole call. Simulates cross-project unseen identifiers.
std::vector<Ast> rename_identifiers(const std::vector<Ast>& trees,
                                    double fraction,
                                    const std::vector<std::string>& pool,
                                    std::uint64_t seed);

}  // namespace hlm
