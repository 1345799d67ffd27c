#include "hlm/synth.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "hlm/rng.hpp"

namespace hlm {

namespace {

bool is_terminal_class(const std::string& symbol) {
  return symbol == "$id" || symbol == "$num";
}

// Minimum expansion depth per symbol, so the generator can avoid
// alternatives that cannot finish within the remaining depth budget.
std::map<std::string, int> min_depths(const GrammarConfig& config) {
  constexpr int kInf = std::numeric_limits<int>::max() / 4;
  std::map<std::string, int> depth;
  for (const auto& [name, alts] : config.rules) {
    (void)alts;
    depth[name] = kInf;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& [name, alts] : config.rules) {
      for (const Alternative& alt : alts) {
        int need = 1;
        for (const ChildSpec& child : alt.children) {
          if (is_terminal_class(child.symbol)) {
            need = std::max(need, 2);
          } else {
            auto it = depth.find(child.symbol);
            if (it == depth.end())
              fail(ErrorCode::GrammarUnsatisfiable, "unknown symbol: " + child.symbol);
            need = std::max(need, it->second >= kInf ? kInf : it->second + 1);
          }
        }
        if (need < depth[name]) {
          depth[name] = need;
          changed = true;
        }
      }
    }
  }
  for (const auto& [name, d] : depth)
    if (d >= kInf)
      fail(ErrorCode::GrammarUnsatisfiable, "rule cannot terminate: " + name);
  return depth;
}

class Generator {
 public:
  Generator(const GrammarConfig& config, Rng& rng)
      : config_(config), rng_(rng), min_depth_(min_depths(config)) {
    if (config.rules.find(config.start) == config.rules.end())
      fail(ErrorCode::GrammarUnsatisfiable, "missing start rule: " + config.start);
    if (config.min_nodes > config.max_nodes)
      fail(ErrorCode::GrammarUnsatisfiable, "min_nodes exceeds max_nodes");
  }

  Ast generate() {
    entries_.clear();
    fill_parent_ = -1;
    fill_symbol_.clear();
    fill_depth_ = 0;

    // Keep the default corpus desk-sized even when max_nodes is large.
    const std::uint64_t hi =
        std::min<std::uint64_t>(static_cast<std::uint64_t>(config_.max_nodes),
                                static_cast<std::uint64_t>(config_.min_nodes) * 3);
    const std::size_t target = static_cast<std::size_t>(
        rng_.range(static_cast<std::uint64_t>(config_.min_nodes), hi));

    int rejected = 0;
    while (true) {
      entries_.clear();
      fill_parent_ = -1;
      expand(config_.start, 0, std::nullopt);
      if (entries_.size() <= static_cast<std::size_t>(config_.max_nodes)) break;
      if (++rejected > 64)
        fail(ErrorCode::GrammarUnsatisfiable, "start expansion exceeds max_nodes");
    }

    rejected = 0;
    while (entries_.size() < target) {
      if (fill_parent_ < 0)
        fail(ErrorCode::GrammarUnsatisfiable,
             "grammar has no fill slot and cannot reach min_nodes");
      const std::size_t before = entries_.size();
      expand(fill_symbol_, fill_depth_, static_cast<std::size_t>(fill_parent_));
      if (entries_.size() == before)
        fail(ErrorCode::GrammarUnsatisfiable, "fill symbol expands to nothing");
      if (entries_.size() > static_cast<std::size_t>(config_.max_nodes)) {
        // Roll back the expansion that overshot; it was appended contiguously.
        entries_.resize(before);
        if (before >= static_cast<std::size_t>(config_.min_nodes)) break;
        if (++rejected > 64)
          fail(ErrorCode::GrammarUnsatisfiable,
               "cannot reach min_nodes without exceeding max_nodes");
      } else {
        rejected = 0;
      }
    }
    return Ast::from_parent_links(entries_);
  }

 private:
  std::string draw_token(const std::string& spec) {
    if (spec == "$id")
      return "v" + std::to_string(rng_.below(static_cast<std::uint64_t>(config_.identifier_pool)));
    if (spec == "$num")
      return std::to_string(rng_.below(static_cast<std::uint64_t>(config_.number_pool)));
    return spec;
  }

  const Alternative& pick_alternative(const std::string& symbol, int depth) {
    const auto& alts = config_.rules.at(symbol);
    const int remaining = config_.max_depth - depth;
    double total = 0;
    viable_.clear();
    for (const Alternative& alt : alts) {
      int need = 1;
      for (const ChildSpec& child : alt.children) {
        need = std::max(need, is_terminal_class(child.symbol)
                                  ? 2
                                  : min_depth_.at(child.symbol) + 1);
      }
      if (need <= remaining) {
        viable_.push_back(&alt);
        total += alt.weight;
      }
    }
    if (viable_.empty())
      fail(ErrorCode::GrammarUnsatisfiable,
           "no alternative of " + symbol + " fits in depth " + std::to_string(remaining));
    double pick = rng_.next_double() * total;
    for (const Alternative* alt : viable_) {
      pick -= alt->weight;
      if (pick < 0) return *alt;
    }
    return *viable_.back();
  }

  void expand(const std::string& symbol, int depth, std::optional<std::size_t> parent) {
    if (is_terminal_class(symbol)) {
      entries_.emplace_back(draw_token(symbol), parent);
      return;
    }
    const Alternative& alt = pick_alternative(symbol, depth);
    const std::size_t self = entries_.size();
    entries_.emplace_back(draw_token(alt.token), parent);
    for (const ChildSpec& child : alt.children) {
      if (child.fill && fill_parent_ < 0) {
        fill_parent_ = static_cast<std::ptrdiff_t>(self);
        fill_symbol_ = child.symbol;
        fill_depth_ = depth + 1;
      }
      const int reps = child.min_rep == child.max_rep
                           ? child.min_rep
                           : static_cast<int>(rng_.range(static_cast<std::uint64_t>(child.min_rep),
                                                         static_cast<std::uint64_t>(child.max_rep)));
      for (int r = 0; r < reps; ++r) expand(child.symbol, depth + 1, self);
    }
  }

  const GrammarConfig& config_;
  Rng& rng_;
  std::map<std::string, int> min_depth_;
  std::vector<ParentLink> entries_;
  std::vector<const Alternative*> viable_;
  std::ptrdiff_t fill_parent_ = -1;
  std::string fill_symbol_;
  int fill_depth_ = 0;
};

}  // namespace

GrammarConfig default_grammar() {
  GrammarConfig g;
  g.start = "function";
  g.rules["function"] = {
      {"function", {{"$id"}, {"params"}, {"block"}}, 1.0},
  };
  g.rules["params"] = {
      {"params", {{"$id", 0, 3}}, 1.0},
  };
  g.rules["block"] = {
      {"block", {{"stmt", 1, 1, true}}, 1.0},
  };
  g.rules["stmt"] = {
      {"=", {{"$id"}, {"expr"}}, 4.0},
      {"if", {{"cond"}, {"block2"}}, 1.5},
      {"while", {{"cond"}, {"block2"}}, 1.0},
      {"return", {{"expr"}}, 1.0},
      {"call", {{"$id"}, {"args"}}, 1.5},
  };
  g.rules["block2"] = {
      {"block", {{"stmt", 1, 3}}, 1.0},
  };
  g.rules["cond"] = {
      {"<", {{"expr"}, {"expr"}}, 1.0},
      {"==", {{"expr"}, {"expr"}}, 1.0},
  };
  g.rules["expr"] = {
      {"$id", {}, 3.0},
      {"$num", {}, 2.0},
      {"+", {{"expr"}, {"expr"}}, 1.0},
      {"-", {{"expr"}, {"expr"}}, 0.7},
      {"*", {{"expr"}, {"expr"}}, 0.5},
      {"call", {{"$id"}, {"args"}}, 0.6},
  };
  g.rules["args"] = {
      {"args", {{"expr", 0, 2}}, 1.0},
  };
  return g;
}

std::vector<std::string> identifier_pool_tokens(const GrammarConfig& config) {
  std::vector<std::string> pool;
  pool.reserve(static_cast<std::size_t>(config.identifier_pool));
  for (int i = 0; i < config.identifier_pool; ++i) pool.push_back("v" + std::to_string(i));
  return pool;
}

std::vector<Ast> synth_generate(const GrammarConfig& config, std::size_t count) {
  Rng rng(config.seed);
  Generator gen(config, rng);
  std::vector<Ast> trees;
  trees.reserve(count);
  for (std::size_t i = 0; i < count; ++i) trees.push_back(gen.generate());
  if (config.rename_fraction > 0)
    trees = rename_identifiers(trees, config.rename_fraction,
                               identifier_pool_tokens(config),
                               config.seed ^ 0x5eedeed5eedeedull);
  return trees;
}

std::vector<Ast> rename_identifiers(const std::vector<Ast>& trees,
                                    double fraction,
                                    const std::vector<std::string>& pool,
                                    std::uint64_t seed) {
  if (fraction < 0 || fraction > 1)
    fail(ErrorCode::InvalidArgument, "rename fraction must be in [0, 1]");
  const std::unordered_set<std::string> pool_set(pool.begin(), pool.end());
  Rng rng(seed);
  std::size_t fresh = 0;
  std::vector<Ast> out;
  out.reserve(trees.size());
  for (const Ast& tree : trees) {
    std::vector<std::string> tokens;
    tokens.reserve(tree.size());
    for (const Node& node : tree.nodes()) {
      if (node.children.empty() && pool_set.count(node.token) && rng.bernoulli(fraction)) {
        tokens.push_back("u" + std::to_string(fresh++));
      } else {
        tokens.push_back(node.token);
      }
    }
    out.push_back(with_tokens(tree, tokens));
  }
  return out;
}

namespace {

nlohmann::ordered_json child_to_json(const ChildSpec& child) {
  nlohmann::ordered_json obj;
  obj["symbol"] = child.symbol;
  if (child.min_rep != 1 || child.max_rep != 1) {
    obj["min"] = child.min_rep;
    obj["max"] = child.max_rep;
  }
  if (child.fill) obj["fill"] = true;
  return obj;
}

ChildSpec child_from_json(const nlohmann::json& obj) {
  ChildSpec child;
  if (obj.is_string()) {
    child.symbol = obj.get<std::string>();
    return child;
  }
  child.symbol = obj.at("symbol").get<std::string>();
  child.min_rep = obj.value("min", 1);
  child.max_rep = obj.value("max", child.min_rep);
  child.fill = obj.value("fill", false);
  return child;
}

}  // namespace

std::string grammar_to_json(const GrammarConfig& config) {
  nlohmann::ordered_json obj;
  obj["start"] = config.start;
  obj["identifier_pool"] = config.identifier_pool;
  obj["number_pool"] = config.number_pool;
  obj["max_depth"] = config.max_depth;
  obj["min_nodes"] = config.min_nodes;
  obj["max_nodes"] = config.max_nodes;
  obj["rename_fraction"] = config.rename_fraction;
  obj["seed"] = config.seed;
  auto& rules = obj["rules"] = nlohmann::ordered_json::object();
  for (const auto& [name, alts] : config.rules) {
    auto& list = rules[name] = nlohmann::ordered_json::array();
    for (const Alternative& alt : alts) {
      nlohmann::ordered_json a;
      a["token"] = alt.token;
      a["weight"] = alt.weight;
      auto& children = a["children"] = nlohmann::ordered_json::array();
      for (const ChildSpec& child : alt.children) children.push_back(child_to_json(child));
      list.push_back(a);
    }
  }
  return obj.dump(2);
}

GrammarConfig grammar_from_json(const std::string& json_text) {
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("grammar config: ") + e.what());
  }
  GrammarConfig config = default_grammar();
  try {
    config.start = obj.value("start", config.start);
    config.identifier_pool = obj.value("identifier_pool", config.identifier_pool);
    config.number_pool = obj.value("number_pool", config.number_pool);
    config.max_depth = obj.value("max_depth", config.max_depth);
    config.min_nodes = obj.value("min_nodes", config.min_nodes);
    config.max_nodes = obj.value("max_nodes", config.max_nodes);
    config.rename_fraction = obj.value("rename_fraction", config.rename_fraction);
    config.seed = obj.value("seed", config.seed);
    if (obj.contains("rules")) {
      config.rules.clear();
      for (const auto& [name, alts] : obj.at("rules").items()) {
        std::vector<Alternative> list;
        for (const auto& a : alts) {
          Alternative alt;
          alt.token = a.at("token").get<std::string>();
          alt.weight = a.value("weight", 1.0);
          if (a.contains("children"))
            for (const auto& c : a.at("children")) alt.children.push_back(child_from_json(c));
          list.push_back(alt);
        }
        config.rules[name] = list;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("grammar config: ") + e.what());
  }
  return config;
}

}  // namespace hlm
