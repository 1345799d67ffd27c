#include "hlm/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <thread>

#include <json.hpp>

namespace hlm {

int oracle_rank(std::span<const double> probs, int oracle) {
  const double p = probs[static_cast<std::size_t>(oracle)];
  int rank = 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (static_cast<int>(i) == oracle) continue;
    if (probs[i] > p || (probs[i] == p && static_cast<int>(i) < oracle)) ++rank;
  }
  return rank;
}

EvalReport metrics_from_judgments(std::span<const NodeJudgment> judgments) {
  EvalReport report;
  report.nodes = judgments.size();
  if (judgments.empty()) return report;
  std::size_t hit1 = 0, hit3 = 0, hit6 = 0, hit10 = 0;
  double rr_sum = 0;
  for (const NodeJudgment& j : judgments) {
    if (j.oov) {
      ++report.oov_nodes;
      continue;
    }
    if (j.rank <= 1) ++hit1;
    if (j.rank <= 3) ++hit3;
    if (j.rank <= 6) ++hit6;
    if (j.rank <= 10) ++hit10;
    rr_sum += 1.0 / static_cast<double>(j.rank);
  }
  const double n = static_cast<double>(judgments.size());
  report.top1 = 100.0 * static_cast<double>(hit1) / n;
  report.top3 = 100.0 * static_cast<double>(hit3) / n;
  report.top6 = 100.0 * static_cast<double>(hit6) / n;
  report.top10 = 100.0 * static_cast<double>(hit10) / n;
  report.mrr = rr_sum / n;
  return report;
}

namespace {

std::vector<NodeJudgment> judge_tree(const Model& model, const EncodedAst& tree) {
  const auto probs = node_predictions(model, tree);
  std::vector<NodeJudgment> judgments(tree.size());
  for (std::size_t i = 0; i < tree.size(); ++i) {
    judgments[i].oov = tree.oov[i] != 0;
    judgments[i].rank = oracle_rank(probs[i], tree.ids[i]);
  }
  return judgments;
}

}  // namespace

EvalReport evaluate(const Model& model, const std::vector<EncodedAst>& trees, int workers) {
  std::vector<std::vector<NodeJudgment>> per_tree(trees.size());
  if (workers <= 1 || trees.size() < 2) {
    for (std::size_t i = 0; i < trees.size(); ++i) per_tree[i] = judge_tree(model, trees[i]);
  } else {
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), trees.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t]() {
        for (std::size_t i = t; i < trees.size(); i += n_threads)
          per_tree[i] = judge_tree(model, trees[i]);
      });
    }
    for (std::thread& worker : pool) worker.join();
  }
  std::vector<NodeJudgment> all;
  for (const auto& chunk : per_tree) all.insert(all.end(), chunk.begin(), chunk.end());
  EvalReport report = metrics_from_judgments(all);
  report.model = to_string(model.kind);
  return report;
}

std::string report_to_json(const std::vector<EvalReport>& reports) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const EvalReport& r : reports) {
    nlohmann::ordered_json obj;
    obj["dataset"] = r.dataset;
    obj["model"] = r.model;
    obj["top1"] = r.top1;
    obj["top3"] = r.top3;
    obj["top6"] = r.top6;
    obj["top10"] = r.top10;
    obj["mrr"] = r.mrr;
    obj["nodes"] = r.nodes;
    obj["oov_nodes"] = r.oov_nodes;
    out.push_back(obj);
  }
  return out.dump(2);
}

std::vector<EvalReport> report_from_json(const std::string& json_text) {
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("report json: ") + e.what());
  }
  if (!parsed.is_array()) fail(ErrorCode::ParseError, "report json: expected an array");
  std::vector<EvalReport> reports;
  for (const auto& obj : parsed) {
    EvalReport r;
    r.dataset = obj.value("dataset", "");
    r.model = obj.value("model", "");
    r.top1 = obj.at("top1").get<double>();
    r.top3 = obj.at("top3").get<double>();
    r.top6 = obj.at("top6").get<double>();
    r.top10 = obj.at("top10").get<double>();
    r.mrr = obj.at("mrr").get<double>();
    r.nodes = obj.value("nodes", std::size_t{0});
    r.oov_nodes = obj.value("oov_nodes", std::size_t{0});
    reports.push_back(r);
  }
  return reports;
}

namespace {

int model_order(const std::string& name) {
  if (name == "rnn") return 0;
  if (name == "lstm") return 1;
  if (name == "hlm") return 2;
  return 3;
}

std::string fixed(double x, int digits) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.*f", digits, x);
  return buffer;
}

}  // namespace

std::string render_report_table(std::vector<EvalReport> reports) {
  if (reports.empty()) fail(ErrorCode::InvalidArgument, "nothing to report");
  std::stable_sort(reports.begin(), reports.end(), [](const EvalReport& a, const EvalReport& b) {
    if (a.dataset != b.dataset) return a.dataset < b.dataset;
    return model_order(a.model) < model_order(b.model);
  });
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"DS", "MD", "top1", "top3", "top6", "top10", "mrr"});
  for (const EvalReport& r : reports) {
    rows.push_back({r.dataset.empty() ? "-" : r.dataset, r.model, fixed(r.top1, 1),
                    fixed(r.top3, 1), fixed(r.top6, 1), fixed(r.top10, 1), fixed(r.mrr, 2)});
  }
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  std::string out;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += row[c];
      if (c + 1 < row.size()) out.append(widths[c] - row[c].size() + 2, ' ');
    }
    out += '\n';
  }
  return out;
}

}  // namespace hlm
