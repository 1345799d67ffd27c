// hlm command line: corpus preparation, synthetic generation, training,
// evaluation, completion and report rendering. Talks to the library
// exclusively through the C API in hlm/hlm_c.h.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hlm/hlm_c.h"

namespace {

using nlohmann::ordered_json;

struct StringOut {
  char* value = nullptr;
  ~StringOut() { hlm_string_free(value); }
  std::string str() const { return value ? value : ""; }
};

struct CorpusHandle {
  hlm_corpus* value = nullptr;
  ~CorpusHandle() { hlm_corpus_free(value); }
};

struct ModelHandle {
  hlm_model* value = nullptr;
  ~ModelHandle() { hlm_model_free(value); }
};

[[noreturn]] void die(hlm_status status, const std::string& context) {
  ordered_json err;
  err["error"]["code"] = static_cast<int>(status);
  err["error"]["context"] = context;
  err["error"]["message"] = hlm_last_error();
  std::cerr << err.dump() << std::endl;
  std::exit(static_cast<int>(status) == 0 ? 1 : static_cast<int>(status));
}

void check(hlm_status status, const std::string& context) {
  if (status != HLM_OK) die(status, context);
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) die(HLM_ERROR_IO, "cannot write " + path);
  out << text;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die(HLM_ERROR_IO, "cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string first_line(const std::string& text) {
  const auto eol = text.find('\n');
  return eol == std::string::npos ? text : text.substr(0, eol);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void emit_manifest(const std::string& path, const ordered_json& manifest) {
  write_file(path, manifest.dump(2) + "\n");
}

ordered_json base_manifest(const std::string& command) {
  ordered_json manifest;
  manifest["tool"] = hlm_version();
  manifest["command"] = command;
  return manifest;
}

std::string stem_of(const std::string& path) {
  const auto slash = path.find_last_of('/');
  const auto dot = path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
  return path.substr(0, dot);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical language model for AST token completion"};
  app.require_subcommand(1);
  app.set_version_flag("--version", hlm_version());

  // prepare
  std::string prep_input, prep_out = "corpus.jsonl", prep_split = "60,15,25";
  std::size_t prep_min = 100, prep_max = 10000;
  std::uint64_t prep_seed = 1;
  int prep_unk_k = 3;
  auto* prepare = app.add_subcommand("prepare", "Filter and split a JSONL AST corpus");
  prepare->add_option("--input", prep_input, "input corpus (JSONL)")->required();
  prepare->add_option("--out", prep_out, "output corpus base path");
  prepare->add_option("--min", prep_min, "minimum AST nodes per function");
  prepare->add_option("--max", prep_max, "maximum AST nodes per function");
  prepare->add_option("--split", prep_split, "train,valid,test percentages");
  prepare->add_option("--seed", prep_seed, "shuffle seed");
  prepare->add_option("--unk-k", prep_unk_k, "rare tokens remapped to UNK (1-3)");

  // synth
  std::string synth_out = "synthetic.jsonl", synth_config;
  std::size_t synth_count = 100;
  std::uint64_t synth_seed = 1;
  int synth_min = 100, synth_max = 300;
  double synth_rename = 0.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic AST corpus");
  synth->add_option("--out", synth_out, "output corpus path");
  synth->add_option("--count", synth_count, "number of functions");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--min-nodes", synth_min, "minimum nodes per function");
  synth->add_option("--max-nodes", synth_max, "maximum nodes per function");
  synth->add_option("--rename-fraction", synth_rename,
                    "fraction of identifier leaves renamed to fresh names");
  synth->add_option("--config", synth_config, "grammar config JSON file");

  // train
  std::string train_model = "hlm", train_corpus, train_train, train_valid;
  std::string train_out = "model.ckpt", train_log;
  int train_d = 128, train_epochs = 20, train_patience = 1, train_eval_every = 1, train_unk_k = 3;
  std::uint64_t train_seed = 1;
  double train_lr = 1e-3;
  std::string train_split = "60,15,25";
  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--model", train_model, "hlm, lstm or rnn");
  train->add_option("--corpus", train_corpus, "unsplit corpus (split internally)");
  train->add_option("--train", train_train, "training split (JSONL)");
  train->add_option("--valid", train_valid, "validation split (JSONL)");
  train->add_option("--out", train_out, "checkpoint output path");
  train->add_option("--log", train_log, "training log output path (JSONL)");
  train->add_option("--d", train_d, "feature vector length");
  train->add_option("--seed", train_seed, "initialization/shuffle seed");
  train->add_option("--lr", train_lr, "Adam learning rate");
  train->add_option("--epochs", train_epochs, "maximum epochs");
  train->add_option("--patience", train_patience, "early-stopping patience");
  train->add_option("--eval-every", train_eval_every, "epochs between validations");
  train->add_option("--unk-k", train_unk_k, "rare tokens remapped to UNK (1-3)");
  train->add_option("--split", train_split, "ratios when splitting --corpus");

  // eval
  std::string eval_models, eval_test, eval_out, eval_dataset = "1";
  int eval_workers = 1;
  auto* eval = app.add_subcommand("eval", "Evaluate checkpoints on a test corpus");
  eval->add_option("--models", eval_models, "comma-separated checkpoint paths")->required();
  eval->add_option("--test", eval_test, "test corpus (JSONL)")->required();
  eval->add_option("--out", eval_out, "report JSON output path");
  eval->add_option("--dataset", eval_dataset, "dataset label for the table");
  eval->add_option("--workers", eval_workers, "parallel tree evaluation");

  // complete
  std::string complete_model, complete_prefix;
  int complete_k = 10;
  auto* complete = app.add_subcommand("complete", "Top-k completion for a prefix tree");
  complete->add_option("--model", complete_model, "checkpoint path")->required();
  complete->add_option("--prefix", complete_prefix, "prefix tree (JSONL, one line)")->required();
  complete->add_option("--k", complete_k, "number of candidates");

  // report
  std::string report_in;
  auto* report = app.add_subcommand("report", "Render a comparison table from report JSON");
  report->add_option("--in", report_in, "comma-separated report JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  if (prepare->parsed()) {
    ordered_json options;
    options["input"] = prep_input;
    options["out"] = prep_out;
    options["min"] = prep_min;
    options["max"] = prep_max;
    options["seed"] = prep_seed;
    options["unk_k"] = prep_unk_k;
    const auto parts = split_list(prep_split);
    if (parts.size() != 3) die(HLM_ERROR_INVALID_ARGUMENT, "--split needs three percentages");
    options["split"] = {std::stod(parts[0]) / 100.0, std::stod(parts[1]) / 100.0,
                        std::stod(parts[2]) / 100.0};
    StringOut manifest;
    check(hlm_prepare(options.dump().c_str(), &manifest.value), "prepare");
    std::cout << manifest.str() << std::endl;
    return 0;
  }

  if (synth->parsed()) {
    ordered_json config;
    if (!synth_config.empty()) config = ordered_json::parse(read_file(synth_config));
    config["count"] = synth_count;
    config["seed"] = synth_seed;
    if (synth->count("--min-nodes")) config["min_nodes"] = synth_min;
    if (synth->count("--max-nodes")) config["max_nodes"] = synth_max;
    if (synth->count("--rename-fraction")) config["rename_fraction"] = synth_rename;
    CorpusHandle corpus;
    check(hlm_corpus_synth(config.dump().c_str(), &corpus.value), "synth");
    check(hlm_corpus_save(corpus.value, synth_out.c_str()), "synth save");
    StringOut stats;
    check(hlm_corpus_stats(corpus.value, &stats.value), "synth stats");
    ordered_json manifest = base_manifest("synth");
    manifest["options"] = config;
    manifest["out"] = synth_out;
    manifest["stats"] = ordered_json::parse(stats.str());
    emit_manifest(stem_of(synth_out) + ".manifest.json", manifest);
    std::cout << manifest.dump(2) << std::endl;
    return 0;
  }

  if (train->parsed()) {
    CorpusHandle train_set, valid_set;
    if (!train_corpus.empty()) {
      // Split the corpus on the fly with the prepare pipeline.
      ordered_json options;
      options["input"] = train_corpus;
      options["out"] = stem_of(train_out) + ".corpus.jsonl";
      options["min"] = 1;
      options["max"] = std::size_t{1000000};
      options["seed"] = train_seed;
      options["unk_k"] = train_unk_k;
      const auto parts = split_list(train_split);
      if (parts.size() != 3) die(HLM_ERROR_INVALID_ARGUMENT, "--split needs three percentages");
      options["split"] = {std::stod(parts[0]) / 100.0, std::stod(parts[1]) / 100.0,
                          std::stod(parts[2]) / 100.0};
      StringOut manifest;
      check(hlm_prepare(options.dump().c_str(), &manifest.value), "train split");
      const std::string stem = stem_of(stem_of(train_out) + ".corpus.jsonl");
      check(hlm_corpus_open((stem + ".train.jsonl").c_str(), &train_set.value), "train corpus");
      check(hlm_corpus_open((stem + ".valid.jsonl").c_str(), &valid_set.value), "valid corpus");
    } else {
      if (train_train.empty() || train_valid.empty())
        die(HLM_ERROR_INVALID_ARGUMENT, "need --corpus or both --train and --valid");
      check(hlm_corpus_open(train_train.c_str(), &train_set.value), "train corpus");
      check(hlm_corpus_open(train_valid.c_str(), &valid_set.value), "valid corpus");
    }

    ordered_json options;
    options["model"] = train_model;
    options["d"] = train_d;
    options["seed"] = train_seed;
    options["lr"] = train_lr;
    options["max_epochs"] = train_epochs;
    options["patience"] = train_patience;
    options["eval_every"] = train_eval_every;
    options["unk_k"] = train_unk_k;

    ModelHandle model;
    StringOut log;
    check(hlm_train(options.dump().c_str(), train_set.value, valid_set.value, &model.value,
                    &log.value),
          "train");
    check(hlm_model_save(model.value, train_out.c_str()), "checkpoint save");
    if (!train_log.empty()) write_file(train_log, log.str());

    StringOut info;
    check(hlm_model_info(model.value, &info.value), "model info");
    ordered_json manifest = base_manifest("train");
    manifest["options"] = options;
    manifest["out"] = train_out;
    manifest["model"] = ordered_json::parse(info.str());
    emit_manifest(stem_of(train_out) + ".manifest.json", manifest);
    std::cout << manifest.dump(2) << std::endl;
    return 0;
  }

  if (eval->parsed()) {
    CorpusHandle test_set;
    check(hlm_corpus_open(eval_test.c_str(), &test_set.value), "test corpus");
    ordered_json reports = ordered_json::array();
    for (const std::string& path : split_list(eval_models)) {
      ModelHandle model;
      check(hlm_model_open(path.c_str(), &model.value), "checkpoint " + path);
      ordered_json options;
      options["workers"] = eval_workers;
      options["dataset"] = eval_dataset;
      StringOut report_json;
      check(hlm_evaluate(model.value, test_set.value, options.dump().c_str(),
                         &report_json.value),
            "evaluate " + path);
      for (auto& entry : ordered_json::parse(report_json.str())) reports.push_back(entry);
    }
    const std::string report_text = reports.dump(2);
    if (!eval_out.empty()) write_file(eval_out, report_text + "\n");
    StringOut table;
    check(hlm_report_render(report_text.c_str(), &table.value), "report table");
    std::cout << table.str();
    return 0;
  }

  if (complete->parsed()) {
    ModelHandle model;
    check(hlm_model_open(complete_model.c_str(), &model.value), "checkpoint");
    const std::string line = first_line(read_file(complete_prefix));
    StringOut completion;
    check(hlm_complete(model.value, line.c_str(), complete_k, &completion.value), "complete");
    std::cout << completion.str() << std::endl;
    return 0;
  }

  if (report->parsed()) {
    ordered_json merged = ordered_json::array();
    for (const std::string& path : split_list(report_in))
      for (auto& entry : ordered_json::parse(read_file(path))) merged.push_back(entry);
    StringOut table;
    check(hlm_report_render(merged.dump().c_str(), &table.value), "report table");
    std::cout << table.str();
    return 0;
  }

  return 0;
}
