#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "hlm/corpus.hpp"
#include "hlm/synth.hpp"
#include "test_util.hpp"

using namespace hlm;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("hlm_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Ast tree_of_size(std::size_t n) {
  std::vector<ParentLink> entries;
  entries.emplace_back("r", std::nullopt);
  for (std::size_t i = 1; i < n; ++i) entries.emplace_back("n", i - 1);
  return build_ast(entries);
}

}  // namespace

TEST_CASE("parse_tree_line basics") {
  Ast one = parse_tree_line(R"({"tokens":["if"],"parents":[-1]})", 1);
  CHECK(one.size() == 1);
  CHECK(one.node(0).token == "if");

  try {
    parse_tree_line(R"({"tokens":["a","b"],"parents":[1,0]})", 3);
    FAIL("expected InvalidTree");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidTree);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }

  try {
    parse_tree_line("{not json", 2);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}

TEST_CASE("corpus round trip is byte identical") {
  const std::string line =
      R"({"tokens":["if",">","a","b","=","a","+","b","5"],"parents":[-1,0,1,1,0,4,4,6,6]})";
  Ast tree = parse_tree_line(line, 1);
  CHECK(serialize_tree(tree) == line);

  const auto path = temp_path("roundtrip.jsonl");
  std::vector<Ast> trees = {tree, test::example_tree(), tree_of_size(5)};
  save_corpus(trees, path.string());
  const std::string first_pass = slurp(path);
  save_corpus(load_corpus(path.string()), path.string());
  CHECK(slurp(path) == first_pass);
  std::filesystem::remove(path);
}

TEST_CASE("meta field round trips") {
  const std::string line =
      R"({"tokens":["f","x"],"parents":[-1,0],"meta":{"file":"A.java","project":"p"}})";
  Ast tree = parse_tree_line(line, 1);
  CHECK(serialize_tree(tree) == line);
}

TEST_CASE("load_corpus reports missing files") {
  try {
    load_corpus("/nonexistent/corpus.jsonl");
    FAIL("expected Io");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Io);
  }
}

TEST_CASE("filter_functions keeps the inclusive bounds") {
  std::vector<Ast> trees = {tree_of_size(99), tree_of_size(100), tree_of_size(101),
                            tree_of_size(10000), tree_of_size(10001)};
  auto kept = filter_functions(trees);
  REQUIRE(kept.size() == 3);
  CHECK(kept[0].size() == 100);
  CHECK(kept[1].size() == 101);
  CHECK(kept[2].size() == 10000);
}

TEST_CASE("score_file") {
  CHECK(score_file({tree_of_size(150)}) == doctest::Approx(150.0));
  CHECK(score_file({tree_of_size(100), tree_of_size(200)}) == doctest::Approx(150.0));
  try {
    score_file({});
    FAIL("expected EmptyFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyFile);
  }
}

TEST_CASE("split_corpus sizes and determinism") {
  std::vector<Ast> twenty;
  for (int i = 0; i < 20; ++i) twenty.push_back(tree_of_size(static_cast<std::size_t>(3 + i)));

  CorpusSplit split = split_corpus(twenty, {0.60, 0.15, 0.25}, 7);
  CHECK(split.train.size() == 12);
  CHECK(split.valid.size() == 3);
  CHECK(split.test.size() == 5);

  CorpusSplit again = split_corpus(twenty, {0.60, 0.15, 0.25}, 7);
  for (std::size_t i = 0; i < split.train.size(); ++i)
    CHECK(serialize_tree(split.train[i]) == serialize_tree(again.train[i]));

  // Rounding rule: boundaries at floor(n * cumulative ratio).
  std::vector<Ast> four(twenty.begin(), twenty.begin() + 4);
  CorpusSplit small = split_corpus(four, {0.60, 0.15, 0.25}, 1);
  CHECK(small.train.size() == 2);
  CHECK(small.valid.size() == 1);
  CHECK(small.test.size() == 1);

  try {
    split_corpus(four, {0.6, 0.3, 0.3}, 1);
    FAIL("expected BadRatios");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadRatios);
  }
}

TEST_CASE("split_corpus is disjoint and exhaustive, conserving nodes") {
  Rng rng(5);
  std::vector<Ast> trees;
  std::size_t total_nodes = 0;
  for (int i = 0; i < 33; ++i) {
    trees.push_back(test::random_tree(rng, 2 + rng.below(30)));
    total_nodes += trees.back().size();
  }
  CorpusSplit split = split_corpus(trees, {0.60, 0.15, 0.25}, 99);
  std::multiset<std::string> all;
  std::size_t split_nodes = 0;
  for (const auto* part : {&split.train, &split.valid, &split.test}) {
    for (const Ast& tree : *part) {
      all.insert(serialize_tree(tree));
      split_nodes += tree.size();
    }
  }
  CHECK(all.size() == trees.size());
  CHECK(split_nodes == total_nodes);
  std::multiset<std::string> original;
  for (const Ast& tree : trees) original.insert(serialize_tree(tree));
  CHECK(all == original);
}

TEST_CASE("build_vocab drops the rarest tokens into UNK") {
  // {a:5, b:5, c:1}, k=1 -> c remapped.
  std::vector<ParentLink> entries;
  entries.emplace_back("a", std::nullopt);
  for (int i = 0; i < 4; ++i) entries.emplace_back("a", 0);
  for (int i = 0; i < 5; ++i) entries.emplace_back("b", 0);
  entries.emplace_back("c", 0);
  Vocab vocab = build_vocab({build_ast(entries)}, 1);
  CHECK(vocab.size() == 3);  // UNK, a, b
  CHECK(vocab.contains("a"));
  CHECK(vocab.contains("b"));
  CHECK_FALSE(vocab.contains("c"));
  CHECK(vocab.encode("c") == vocab.unk_id);
  CHECK(vocab.unk_k == 1);

  // encode/decode identity on in-vocabulary tokens.
  for (const std::string token : {"a", "b"})
    CHECK(vocab.decode(vocab.encode(token)) == token);
}

TEST_CASE("build_vocab k=3 with ties broken lexicographically") {
  // {a:1, b:1, c:1, d:9}, k=3 -> a, b, c remapped.
  std::vector<ParentLink> entries;
  entries.emplace_back("d", std::nullopt);
  for (int i = 0; i < 8; ++i) entries.emplace_back("d", 0);
  entries.emplace_back("a", 0);
  entries.emplace_back("b", 0);
  entries.emplace_back("c", 0);
  Vocab vocab = build_vocab({build_ast(entries)}, 3);
  CHECK(vocab.size() == 2);
  CHECK(vocab.contains("d"));
  CHECK_FALSE(vocab.contains("a"));
  CHECK_FALSE(vocab.contains("b"));
  CHECK_FALSE(vocab.contains("c"));

  try {
    build_vocab({}, 3);
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCorpus);
  }
}

TEST_CASE("UNK stays rarer than the most common retained token") {
  GrammarConfig grammar = default_grammar();
  grammar.min_nodes = 40;
  grammar.max_nodes = 200;
  grammar.seed = 3;
  auto trees = synth_generate(grammar, 30);
  Vocab vocab = build_vocab(trees, 3);
  std::int64_t unk_count = 0, max_retained = 0;
  for (const Ast& tree : trees)
    for (const Node& node : tree.nodes())
      if (!vocab.contains(node.token)) ++unk_count;
  for (int id = 0; id < vocab.size(); ++id)
    if (id != vocab.unk_id) max_retained = std::max(max_retained, vocab.frequency[static_cast<std::size_t>(id)]);
  CHECK(unk_count == vocab.frequency[static_cast<std::size_t>(vocab.unk_id)]);
  CHECK(unk_count <= max_retained);
}

TEST_CASE("encode_tree marks OOV and maps ids") {
  std::vector<ParentLink> entries;
  entries.emplace_back("a", std::nullopt);
  entries.emplace_back("a", 0);
  entries.emplace_back("b", 0);
  entries.emplace_back("b", 0);
  entries.emplace_back("rare", 0);
  Ast train = build_ast(entries);
  Vocab vocab = build_vocab({train}, 1);  // drops "rare"

  EncodedAst encoded = encode_tree(train, vocab);
  int oov_count = 0;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded.oov[i]) {
      ++oov_count;
      CHECK(encoded.ids[i] == vocab.unk_id);
      CHECK(train.node(static_cast<NodeId>(i)).token == "rare");
    } else {
      CHECK(vocab.decode(encoded.ids[i]) == train.node(static_cast<NodeId>(i)).token);
    }
  }
  // Train-set trees have no OOV entries except the remapped rare tokens.
  CHECK(oov_count == 1);

  Ast test_tree = build_ast({{"a", std::nullopt}, {"unseen", 0}});
  EncodedAst test_encoded = encode_tree(test_tree, vocab);
  CHECK(test_encoded.oov[0] == 0);
  CHECK(test_encoded.oov[1] == 1);
  CHECK(test_encoded.ids[1] == vocab.unk_id);
}

TEST_CASE("synth_generate is deterministic and respects bounds") {
  GrammarConfig grammar = default_grammar();
  grammar.min_nodes = 100;
  grammar.max_nodes = 300;
  grammar.seed = 42;

  auto first = synth_generate(grammar, 12);
  auto second = synth_generate(grammar, 12);
  REQUIRE(first.size() == 12);
  for (std::size_t i = 0; i < first.size(); ++i)
    CHECK(serialize_tree(first[i]) == serialize_tree(second[i]));

  for (const Ast& tree : first) {
    CHECK(tree.size() >= 100);
    CHECK(tree.size() <= 300);
  }
  CHECK(filter_functions(first, 100, 300).size() == first.size());

  CHECK(synth_generate(grammar, 0).empty());
}

TEST_CASE("synth_generate reports unsatisfiable grammars") {
  GrammarConfig grammar = default_grammar();
  grammar.min_nodes = 100;
  grammar.max_nodes = 300;
  // A grammar whose start has no fill slot cannot reach min_nodes.
  grammar.rules["function"] = {{"function", {{"$id"}, {"params"}}, 1.0}};
  try {
    synth_generate(grammar, 1);
    FAIL("expected GrammarUnsatisfiable");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GrammarUnsatisfiable);
  }
}

TEST_CASE("rename_identifiers renames about the requested fraction") {
  GrammarConfig grammar = default_grammar();
  grammar.min_nodes = 100;
  grammar.max_nodes = 300;
  grammar.seed = 9;
  auto trees = synth_generate(grammar, 40);
  const auto pool = identifier_pool_tokens(grammar);
  const std::set<std::string> pool_set(pool.begin(), pool.end());

  std::size_t identifier_leaves = 0;
  for (const Ast& tree : trees)
    for (const Node& node : tree.nodes())
      if (node.children.empty() && pool_set.count(node.token)) ++identifier_leaves;
  REQUIRE(identifier_leaves > 500);

  auto renamed = rename_identifiers(trees, 0.3, pool, 77);
  std::size_t fresh = 0;
  for (std::size_t t = 0; t < renamed.size(); ++t) {
    REQUIRE(renamed[t].size() == trees[t].size());
    for (const Node& node : renamed[t].nodes()) {
      if (!pool_set.count(node.token) && node.token.size() > 1 && node.token[0] == 'u' &&
          std::isdigit(static_cast<unsigned char>(node.token[1])))
        ++fresh;
    }
  }
  const double fraction = static_cast<double>(fresh) / static_cast<double>(identifier_leaves);
  CHECK(fraction > 0.25);
  CHECK(fraction < 0.35);

  // Renaming with fraction 0 is the identity.
  auto untouched = rename_identifiers(trees, 0.0, pool, 77);
  for (std::size_t t = 0; t < trees.size(); ++t)
    CHECK(serialize_tree(untouched[t]) == serialize_tree(trees[t]));
}

TEST_CASE("grammar config JSON round trip") {
  GrammarConfig grammar = default_grammar();
  grammar.min_nodes = 50;
  grammar.max_nodes = 120;
  grammar.seed = 5;
  GrammarConfig parsed = grammar_from_json(grammar_to_json(grammar));
  CHECK(parsed.min_nodes == 50);
  CHECK(parsed.max_nodes == 120);
  CHECK(parsed.seed == 5);
  auto a = synth_generate(grammar, 3);
  auto b = synth_generate(parsed, 3);
  for (std::size_t i = 0; i < a.size(); ++i)
    CHECK(serialize_tree(a[i]) == serialize_tree(b[i]));
}
