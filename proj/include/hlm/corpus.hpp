#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "hlm/ast.hpp"

namespace hlm {

inline constexpr const char* kUnkToken = "<unk>";

// Token<->id table built from the training split only. The `unk_k` least
// frequent distinct training tokens (ties broken by token string) are
// dropped from the table and remapped to UNK, so UNK stays a rare word.
// Ids: UNK is 0; retained tokens are ordered by descending frequency, then
// ascending token string.
struct Vocab {
  std::vector<std::string> tokens;       // id -> token
  std::vector<std::int64_t> frequency;   // id -> training frequency
  std::unordered_map<std::string, int> index;
  int unk_id = 0;
  int unk_k = 0;

  int size() const { return static_cast<int>(tokens.size()); }
  bool contains(const std::string& token) const { return index.count(token) != 0; }
  int encode(const std::string& token) const {
    auto it = index.find(token);
    return it == index.end() ? unk_id : it->second;
  }
  const std::string& decode(int id) const { return tokens.at(static_cast<std::size_t>(id)); }
};

// Tree with tokens mapped through a vocabulary. `oov[i]` records whether the
// original token of node i was out of vocabulary; such nodes are never
// scored as correct predictions.
struct EncodedAst {
  Ast tree;
  std::vector<int> ids;
  std::vector<std::uint8_t> oov;

  std::size_t size() const { return ids.size(); }
};

struct SplitManifest {
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.60, 0.15, 0.25};
  std::array<std::size_t, 3> sizes{0, 0, 0};
};

struct CorpusSplit {
  std::vector<Ast> train;
  std::vector<Ast> valid;
  std::vector<Ast> test;
  SplitManifest manifest;
};

// JSONL AST format, one object per line:
//   {"tokens":["if",">","a","b"],"parents":[-1,0,1,1]}
// `tokens` in pre-order, `parents` as pre-order parent indices (-1 for the
// root), optional trailing `meta` object. save_corpus emits this canonical
// form; load(save(trees)) is byte-identical.
std::vector<Ast> load_corpus(const std::string& path);
void save_corpus(const std::vector<Ast>& trees, const std::string& path);

Ast parse_tree_line(const std::string& line, std::size_t line_number);
std::string serialize_tree(const Ast& tree);

// Keeps trees with min_nodes <= node count <= max_nodes (both inclusive),
// preserving order.
std::vector<Ast> filter_functions(const std::vector<Ast>& trees,
                                  std::size_t min_nodes = 100,
                                  std::size_t max_nodes = 10000);

// Total node count divided by the number of functions.
double score_file(const std::vector<Ast>& function_trees);

// Seeded Fisher-Yates shuffle, then contiguous partition with boundaries at
// floor(n * cumulative_ratio), so 20 trees split 60/15/25 into 12/3/5 and
// 4 trees into 2/1/1.
CorpusSplit split_corpus(std::vector<Ast> trees,
                         const std::array<double, 3>& ratios,
                         std::uint64_t seed);

Vocab build_vocab(const std::vector<Ast>& train_trees, int unk_k = 3);

EncodedAst encode_tree(const Ast& tree, const Vocab& vocab);
std::vector<EncodedAst> encode_trees(const std::vector<Ast>& trees, const Vocab& vocab);

}  // namespace hlm
