#include "hlm/hlm_c.h"

#include <array>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "hlm/eval.hpp"
#include "hlm/model.hpp"
#include "hlm/synth.hpp"
#include "hlm/trainer.hpp"

struct hlm_corpus {
  std::vector<hlm::Ast> trees;
};

struct hlm_model {
  hlm::Model model;
};

namespace {

thread_local std::string g_last_error;

hlm_status status_for(hlm::ErrorCode code) {
  using hlm::ErrorCode;
  switch (code) {
    case ErrorCode::Io:
      return HLM_ERROR_IO;
    case ErrorCode::ParseError:
      return HLM_ERROR_PARSE;
    case ErrorCode::InvalidTree:
    case ErrorCode::MultipleRoots:
    case ErrorCode::CycleDetected:
    case ErrorCode::DanglingParent:
    case ErrorCode::NodeNotFound:
    case ErrorCode::InvalidPrefix:
      return HLM_ERROR_INVALID_TREE;
    case ErrorCode::GrammarUnsatisfiable:
      return HLM_ERROR_UNSATISFIABLE;
    case ErrorCode::InvalidArgument:
    case ErrorCode::BadRatios:
    case ErrorCode::EmptyFile:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::EmptySplit:
    case ErrorCode::ShapeMismatch:
      return HLM_ERROR_INVALID_ARGUMENT;
  }
  return HLM_ERROR_INTERNAL;
}

template <class Fn>
hlm_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return HLM_OK;
  } catch (const hlm::Error& e) {
    g_last_error = e.what();
    return status_for(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return HLM_ERROR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HLM_ERROR_INTERNAL;
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

hlm_status invalid(const char* message) {
  g_last_error = message;
  return HLM_ERROR_INVALID_ARGUMENT;
}

nlohmann::json parse_options(const char* options_json) {
  if (options_json == nullptr || options_json[0] == '\0')
    return nlohmann::json::object();
  try {
    return nlohmann::json::parse(options_json);
  } catch (const nlohmann::json::exception& e) {
    hlm::fail(hlm::ErrorCode::ParseError, std::string("options json: ") + e.what());
  }
}

}  // namespace

extern "C" {

const char* hlm_version(void) { return hlm::kToolVersion; }

const char* hlm_last_error(void) { return g_last_error.c_str(); }

void hlm_string_free(char* s) { std::free(s); }

hlm_status hlm_corpus_open(const char* jsonl_path, hlm_corpus** out) {
  if (!jsonl_path || !out) return invalid("hlm_corpus_open: null argument");
  return guarded([&] {
    auto corpus = std::make_unique<hlm_corpus>();
    corpus->trees = hlm::load_corpus(jsonl_path);
    *out = corpus.release();
  });
}

hlm_status hlm_corpus_save(const hlm_corpus* corpus, const char* jsonl_path) {
  if (!corpus || !jsonl_path) return invalid("hlm_corpus_save: null argument");
  return guarded([&] { hlm::save_corpus(corpus->trees, jsonl_path); });
}

void hlm_corpus_free(hlm_corpus* corpus) { delete corpus; }

size_t hlm_corpus_size(const hlm_corpus* corpus) {
  return corpus ? corpus->trees.size() : 0;
}

hlm_status hlm_corpus_synth(const char* config_json, hlm_corpus** out) {
  if (!out) return invalid("hlm_corpus_synth: null output");
  return guarded([&] {
    const nlohmann::json options = parse_options(config_json);
    hlm::GrammarConfig grammar =
        hlm::grammar_from_json(config_json ? config_json : "{}");
    const auto count = options.value("count", std::size_t{100});
    auto corpus = std::make_unique<hlm_corpus>();
    corpus->trees = hlm::synth_generate(grammar, count);
    *out = corpus.release();
  });
}

hlm_status hlm_corpus_filter(hlm_corpus* corpus, size_t min_nodes, size_t max_nodes) {
  if (!corpus) return invalid("hlm_corpus_filter: null corpus");
  return guarded([&] {
    corpus->trees = hlm::filter_functions(corpus->trees, min_nodes, max_nodes);
  });
}

hlm_status hlm_corpus_stats(const hlm_corpus* corpus, char** stats_json) {
  if (!corpus || !stats_json) return invalid("hlm_corpus_stats: null argument");
  return guarded([&] {
    std::size_t nodes = 0;
    for (const hlm::Ast& tree : corpus->trees) nodes += tree.size();
    nlohmann::ordered_json obj;
    obj["functions"] = corpus->trees.size();
    obj["nodes"] = nodes;
    if (!corpus->trees.empty()) obj["score"] = hlm::score_file(corpus->trees);
    *stats_json = copy_string(obj.dump());
  });
}

hlm_status hlm_prepare(const char* options_json, char** manifest_json) {
  if (!options_json) return invalid("hlm_prepare: null options");
  return guarded([&] {
    const nlohmann::json options = parse_options(options_json);
    const std::string input = options.at("input").get<std::string>();
    const std::string out_base = options.at("out").get<std::string>();
    const auto min_nodes = options.value("min", std::size_t{100});
    const auto max_nodes = options.value("max", std::size_t{10000});
    const auto seed = options.value("seed", std::uint64_t{1});
    const int unk_k = options.value("unk_k", 3);
    std::array<double, 3> ratios{0.60, 0.15, 0.25};
    if (options.contains("split")) {
      const auto& arr = options.at("split");
      if (!arr.is_array() || arr.size() != 3)
        hlm::fail(hlm::ErrorCode::BadRatios, "split must be an array of three ratios");
      for (std::size_t i = 0; i < 3; ++i) ratios[i] = arr[i].get<double>();
    }

    std::vector<hlm::Ast> trees = hlm::load_corpus(input);
    const std::size_t loaded = trees.size();
    trees = hlm::filter_functions(trees, min_nodes, max_nodes);
    hlm::CorpusSplit split = hlm::split_corpus(trees, ratios, seed);

    const std::filesystem::path base(out_base);
    const std::string stem = (base.parent_path() / base.stem()).string();
    hlm::save_corpus(trees, out_base);
    hlm::save_corpus(split.train, stem + ".train.jsonl");
    hlm::save_corpus(split.valid, stem + ".valid.jsonl");
    hlm::save_corpus(split.test, stem + ".test.jsonl");

    nlohmann::ordered_json manifest;
    manifest["tool"] = hlm::kToolVersion;
    manifest["command"] = "prepare";
    manifest["input"] = input;
    manifest["out"] = out_base;
    manifest["loaded_functions"] = loaded;
    manifest["kept_functions"] = trees.size();
    manifest["min_nodes"] = min_nodes;
    manifest["max_nodes"] = max_nodes;
    manifest["split"] = ratios;
    manifest["split_sizes"] = split.manifest.sizes;
    manifest["seed"] = seed;
    manifest["unk_k"] = unk_k;
    const std::string text = manifest.dump(2);
    {
      std::ofstream out(stem + ".manifest.json", std::ios::binary);
      if (!out) hlm::fail(hlm::ErrorCode::Io, "cannot write manifest");
      out << text << '\n';
    }
    if (manifest_json) *manifest_json = copy_string(text);
  });
}

hlm_status hlm_train(const char* options_json, const hlm_corpus* train_corpus,
                     const hlm_corpus* valid_corpus, hlm_model** out_model,
                     char** log_jsonl) {
  if (!train_corpus || !valid_corpus || !out_model)
    return invalid("hlm_train: null argument");
  return guarded([&] {
    const nlohmann::json options = parse_options(options_json);
    hlm::TrainConfig config;
    config.kind = hlm::model_kind_from_string(options.value("model", "hlm"));
    config.d = options.value("d", 128);
    config.seed = options.value("seed", std::uint64_t{1});
    config.adam.lr = options.value("lr", config.adam.lr);
    config.max_epochs = options.value("max_epochs", config.max_epochs);
    config.patience = options.value("patience", config.patience);
    config.eval_every = options.value("eval_every", config.eval_every);
    config.unk_k = options.value("unk_k", config.unk_k);

    hlm::TrainResult result = hlm::train(train_corpus->trees, valid_corpus->trees, config);
    if (log_jsonl) *log_jsonl = copy_string(hlm::train_log_to_jsonl(result.log));
    auto model = std::make_unique<hlm_model>();
    model->model = std::move(result.model);
    *out_model = model.release();
  });
}

hlm_status hlm_model_save(const hlm_model* model, const char* path) {
  if (!model || !path) return invalid("hlm_model_save: null argument");
  return guarded([&] { hlm::save_checkpoint(model->model, path); });
}

hlm_status hlm_model_open(const char* path, hlm_model** out) {
  if (!path || !out) return invalid("hlm_model_open: null argument");
  return guarded([&] {
    auto model = std::make_unique<hlm_model>();
    model->model = hlm::load_checkpoint(path);
    *out = model.release();
  });
}

void hlm_model_free(hlm_model* model) { delete model; }

hlm_status hlm_model_info(const hlm_model* model, char** info_json) {
  if (!model || !info_json) return invalid("hlm_model_info: null argument");
  return guarded([&] {
    nlohmann::ordered_json obj;
    obj["model"] = hlm::to_string(model->model.kind);
    obj["v"] = model->model.vocab.size();
    obj["d"] = model->model.d;
    obj["seed"] = model->model.seed;
    obj["equations"] = hlm::kEquationsVersion;
    *info_json = copy_string(obj.dump());
  });
}

hlm_status hlm_evaluate(const hlm_model* model, const hlm_corpus* test_corpus,
                        const char* options_json, char** report_json) {
  if (!model || !test_corpus || !report_json)
    return invalid("hlm_evaluate: null argument");
  return guarded([&] {
    const nlohmann::json options = parse_options(options_json);
    const int workers = options.value("workers", 1);
    const std::vector<hlm::EncodedAst> encoded =
        hlm::encode_trees(test_corpus->trees, model->model.vocab);
    hlm::EvalReport report = hlm::evaluate(model->model, encoded, workers);
    report.dataset = options.value("dataset", "");
    *report_json = copy_string(hlm::report_to_json({report}));
  });
}

hlm_status hlm_complete(const hlm_model* model, const char* prefix_line, int k,
                        char** completion_json) {
  if (!model || !prefix_line || !completion_json)
    return invalid("hlm_complete: null argument");
  return guarded([&] {
    hlm::Ast prefix = [&] {
      try {
        return hlm::parse_tree_line(prefix_line, 1);
      } catch (const hlm::Error& e) {
        hlm::fail(hlm::ErrorCode::InvalidPrefix, e.what());
      }
    }();
    const hlm::Completion completion = hlm::complete(model->model, prefix, k);
    nlohmann::ordered_json obj;
    obj["position"] = completion.position;
    auto& list = obj["candidates"] = nlohmann::ordered_json::array();
    for (const auto& [token, prob] : completion.candidates)
      list.push_back({{"token", token}, {"prob", prob}});
    *completion_json = copy_string(obj.dump());
  });
}

hlm_status hlm_report_render(const char* reports_json, char** table_text) {
  if (!reports_json || !table_text) return invalid("hlm_report_render: null argument");
  return guarded([&] {
    *table_text = copy_string(hlm::render_report_table(hlm::report_from_json(reports_json)));
  });
}

}  // extern "C"
