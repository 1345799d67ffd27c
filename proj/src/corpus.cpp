#include "hlm/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <map>

#include <json.hpp>

#include "hlm/rng.hpp"

namespace hlm {

using ordered_json = nlohmann::ordered_json;

Ast parse_tree_line(const std::string& line, std::size_t line_number) {
  const std::string where = "line " + std::to_string(line_number);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, where + ": " + e.what());
  }
  if (!obj.is_object() || !obj.contains("tokens") || !obj.contains("parents"))
    fail(ErrorCode::ParseError, where + ": expected an object with tokens and parents");
  const auto& tokens = obj["tokens"];
  const auto& parents = obj["parents"];
  if (!tokens.is_array() || !parents.is_array() || tokens.size() != parents.size())
    fail(ErrorCode::ParseError, where + ": tokens and parents must be arrays of equal length");

  std::vector<ParentLink> entries;
  entries.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!tokens[i].is_string())
      fail(ErrorCode::ParseError, where + ": tokens[" + std::to_string(i) + "] is not a string");
    if (!parents[i].is_number_integer())
      fail(ErrorCode::ParseError, where + ": parents[" + std::to_string(i) + "] is not an integer");
    const std::int64_t parent = parents[i].get<std::int64_t>();
    if (parent < -1 || parent >= static_cast<std::int64_t>(tokens.size()))
      fail(ErrorCode::InvalidTree, where + ": parent index " + std::to_string(parent) + " out of range");
    entries.emplace_back(tokens[i].get<std::string>(),
                         parent < 0 ? std::nullopt
                                    : std::optional<std::size_t>(static_cast<std::size_t>(parent)));
  }

  Ast tree = [&] {
    try {
      return Ast::from_parent_links(entries);
    } catch (const Error& e) {
      fail(ErrorCode::InvalidTree, where + ": " + e.what());
    }
  }();
  if (obj.contains("meta")) tree.set_meta_json(obj["meta"].dump());
  return tree;
}

std::string serialize_tree(const Ast& tree) {
  ordered_json tokens = ordered_json::array();
  ordered_json parents = ordered_json::array();
  for (const Node& node : tree.nodes()) {
    tokens.push_back(node.token);
    parents.push_back(static_cast<int>(node.parent));
  }
  ordered_json obj;
  obj["tokens"] = std::move(tokens);
  obj["parents"] = std::move(parents);
  if (!tree.meta_json().empty()) obj["meta"] = ordered_json::parse(tree.meta_json());
  return obj.dump();
}

std::vector<Ast> load_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open corpus file: " + path);
  std::vector<Ast> trees;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    trees.push_back(parse_tree_line(line, line_number));
  }
  return trees;
}

void save_corpus(const std::vector<Ast>& trees, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write corpus file: " + path);
  for (const Ast& tree : trees) out << serialize_tree(tree) << '\n';
  if (!out) fail(ErrorCode::Io, "failed writing corpus file: " + path);
}

std::vector<Ast> filter_functions(const std::vector<Ast>& trees,
                                  std::size_t min_nodes,
                                  std::size_t max_nodes) {
  std::vector<Ast> kept;
  for (const Ast& tree : trees)
    if (tree.size() >= min_nodes && tree.size() <= max_nodes) kept.push_back(tree);
  return kept;
}

double score_file(const std::vector<Ast>& function_trees) {
  if (function_trees.empty())
    fail(ErrorCode::EmptyFile, "cannot score a file with no functions");
  std::size_t total = 0;
  for (const Ast& tree : function_trees) total += tree.size();
  return static_cast<double>(total) / static_cast<double>(function_trees.size());
}

CorpusSplit split_corpus(std::vector<Ast> trees,
                         const std::array<double, 3>& ratios,
                         std::uint64_t seed) {
  double sum = 0;
  for (double r : ratios) {
    if (r < 0) fail(ErrorCode::BadRatios, "split ratios must be nonnegative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::BadRatios, "split ratios must sum to 1");

  Rng rng(seed);
  rng.shuffle(trees);

  const std::size_t n = trees.size();
  const auto cut1 = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios[0]));
  const auto cut2 = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (ratios[0] + ratios[1])));

  CorpusSplit split;
  split.train.assign(trees.begin(), trees.begin() + static_cast<std::ptrdiff_t>(cut1));
  split.valid.assign(trees.begin() + static_cast<std::ptrdiff_t>(cut1),
                     trees.begin() + static_cast<std::ptrdiff_t>(cut2));
  split.test.assign(trees.begin() + static_cast<std::ptrdiff_t>(cut2), trees.end());
  split.manifest.seed = seed;
  split.manifest.ratios = ratios;
  split.manifest.sizes = {split.train.size(), split.valid.size(), split.test.size()};
  return split;
}

Vocab build_vocab(const std::vector<Ast>& train_trees, int unk_k) {
  if (train_trees.empty()) fail(ErrorCode::EmptyCorpus, "cannot build a vocabulary from no trees");
  if (unk_k < 1) fail(ErrorCode::InvalidArgument, "unk_k must be at least 1");

  // std::map keeps token iteration order deterministic.
  std::map<std::string, std::int64_t> counts;
  for (const Ast& tree : train_trees)
    for (const Node& node : tree.nodes()) ++counts[node.token];

  std::vector<std::pair<std::string, std::int64_t>> by_rarity(counts.begin(), counts.end());
  std::sort(by_rarity.begin(), by_rarity.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });

  // Keep at least one real token in the table.
  const std::size_t dropped =
      std::min<std::size_t>(static_cast<std::size_t>(unk_k),
                            by_rarity.empty() ? 0 : by_rarity.size() - 1);

  std::int64_t unk_frequency = 0;
  for (std::size_t i = 0; i < dropped; ++i) unk_frequency += by_rarity[i].second;

  std::vector<std::pair<std::string, std::int64_t>> retained(by_rarity.begin() + static_cast<std::ptrdiff_t>(dropped),
                                                             by_rarity.end());
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocab vocab;
  vocab.unk_id = 0;
  vocab.unk_k = static_cast<int>(dropped);
  vocab.tokens.push_back(kUnkToken);
  vocab.frequency.push_back(unk_frequency);
  for (const auto& [token, freq] : retained) {
    vocab.index.emplace(token, static_cast<int>(vocab.tokens.size()));
    vocab.tokens.push_back(token);
    vocab.frequency.push_back(freq);
  }
  return vocab;
}

EncodedAst encode_tree(const Ast& tree, const Vocab& vocab) {
  EncodedAst encoded;
  encoded.tree = tree;
  encoded.ids.reserve(tree.size());
  encoded.oov.reserve(tree.size());
  for (const Node& node : tree.nodes()) {
    const bool in_vocab = vocab.contains(node.token);
    encoded.ids.push_back(in_vocab ? vocab.encode(node.token) : vocab.unk_id);
    encoded.oov.push_back(in_vocab ? 0 : 1);
  }
  return encoded;
}

std::vector<EncodedAst> encode_trees(const std::vector<Ast>& trees, const Vocab& vocab) {
  std::vector<EncodedAst> out;
  out.reserve(trees.size());
  for (const Ast& tree : trees) out.push_back(encode_tree(tree, vocab));
  return out;
}

}  // namespace hlm
