#include "hlm/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "hlm/rng.hpp"

namespace hlm {

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Hlm: return "hlm";
    case ModelKind::Lstm: return "lstm";
    case ModelKind::Rnn: return "rnn";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "hlm") return ModelKind::Hlm;
  if (name == "lstm") return ModelKind::Lstm;
  if (name == "rnn") return ModelKind::Rnn;
  fail(ErrorCode::InvalidArgument, "unknown model kind: " + name);
}

namespace {

// Registers every array of the kind, in checkpoint order, all zeros.
Model make_model(ModelKind kind, const Vocab& vocab, int d, std::uint64_t seed) {
  if (d < 1) fail(ErrorCode::InvalidArgument, "d must be at least 1");
  if (vocab.size() < 2) fail(ErrorCode::InvalidArgument, "vocabulary needs UNK plus one token");
  const int v = vocab.size();

  Model m;
  m.kind = kind;
  m.d = d;
  m.seed = seed;
  m.vocab = vocab;

  m.tok_embed = &m.params.add("tok_embed", v, d);
  m.out_proj = &m.params.add("out_proj", v, d);
  switch (kind) {
    case ModelKind::Hlm:
      m.dec_lstm = {&m.params.add("dec_lstm.W", 4 * d, 2 * d), &m.params.add("dec_lstm.b", 4 * d, 1)};
      m.dec_2d = {&m.params.add("dec_2d.W", 5 * d, 3 * d), &m.params.add("dec_2d.b", 5 * d, 1)};
      m.leaf_cell = &m.params.add("leaf_cell", v, d);
      m.leaf_h = &m.params.add("leaf_h", v, d);
      m.enc_lstm = {&m.params.add("enc_lstm.W", 4 * d, 2 * d), &m.params.add("enc_lstm.b", 4 * d, 1)};
      m.enc_fw = {&m.params.add("enc_fw.W", 4 * d, 2 * d), &m.params.add("enc_fw.b", 4 * d, 1)};
      m.enc_bw = {&m.params.add("enc_bw.W", 4 * d, 2 * d), &m.params.add("enc_bw.b", 4 * d, 1)};
      m.enc_2d = {&m.params.add("enc_2d.W", 5 * d, 3 * d), &m.params.add("enc_2d.b", 5 * d, 1)};
      m.comb = {&m.params.add("comb.W3", 5 * d, 2 * d), &m.params.add("comb.b3", 5 * d, 1)};
      m.empty_des_cell = &m.params.add("empty_des_cell", d, 1);
      m.empty_des_h = &m.params.add("empty_des_h", d, 1);
      break;
    case ModelKind::Lstm:
      m.seq_lstm = {&m.params.add("seq_lstm.W", 4 * d, 2 * d), &m.params.add("seq_lstm.b", 4 * d, 1)};
      break;
    case ModelKind::Rnn:
      m.rnn_W = &m.params.add("rnn.W", d, 2 * d);
      m.rnn_b = &m.params.add("rnn.b", d, 1);
      break;
  }
  return m;
}

bool is_bias(const Param& p) { return p.shape.cols == 1; }

void xavier_fill(Param& p, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(p.shape.rows + p.shape.cols));
  for (double& x : p.value) x = rng.uniform(-bound, bound);
}

void set_forget_bias(const LstmParams& lstm, double value) {
  const int d = lstm.b->shape.rows / 4;
  for (int i = d; i < 2 * d; ++i) lstm.b->value[static_cast<std::size_t>(i)] = value;
}

}  // namespace

Model init_params(ModelKind kind, const Vocab& vocab, int d, std::uint64_t seed) {
  Model m = make_model(kind, vocab, d, seed);
  Rng rng(seed);
  // Weight matrices are drawn in registration order; biases and the
  // empty-descendants pair stay zero and consume no draws.
  for (std::size_t i = 0; i < m.params.count(); ++i) {
    Param& p = m.params[i];
    if (is_bias(p)) continue;
    if (p.name == "empty_des_cell" || p.name == "empty_des_h") continue;
    xavier_fill(p, rng);
  }
  switch (kind) {
    case ModelKind::Hlm:
      set_forget_bias(m.dec_lstm, 1.0);
      set_forget_bias(m.enc_lstm, 1.0);
      set_forget_bias(m.enc_fw, 1.0);
      set_forget_bias(m.enc_bw, 1.0);
      break;
    case ModelKind::Lstm:
      set_forget_bias(m.seq_lstm, 1.0);
      break;
    case ModelKind::Rnn:
      break;
  }
  return m;
}

namespace {

void write_f64_le(std::ostream& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  unsigned char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFF);
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

double read_f64_le(std::istream& in) {
  unsigned char bytes[8];
  in.read(reinterpret_cast<char*>(bytes), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  double x;
  std::memcpy(&x, &bits, sizeof x);
  return x;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  nlohmann::ordered_json header;
  header["format"] = kCheckpointFormat;
  header["equations"] = kEquationsVersion;
  header["tool"] = kToolVersion;
  header["model"] = to_string(model.kind);
  header["v"] = model.vocab.size();
  header["d"] = model.d;
  header["seed"] = model.seed;
  auto& vocab = header["vocab"];
  vocab["unk_id"] = model.vocab.unk_id;
  vocab["unk_k"] = model.vocab.unk_k;
  vocab["tokens"] = model.vocab.tokens;
  vocab["frequency"] = model.vocab.frequency;
  auto& arrays = header["params"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < model.params.count(); ++i) {
    const Param& p = model.params[i];
    arrays.push_back({{"name", p.name}, {"rows", p.shape.rows}, {"cols", p.shape.cols}});
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint: " + path);
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < model.params.count(); ++i)
    for (double x : model.params[i].value) write_f64_le(out, x);
  if (!out) fail(ErrorCode::Io, "failed writing checkpoint: " + path);
}

Model load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line))
    fail(ErrorCode::ParseError, "checkpoint has no header: " + path);

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("checkpoint header: ") + e.what());
  }
  if (header.value("format", "") != kCheckpointFormat)
    fail(ErrorCode::ParseError, "unsupported checkpoint format");
  if (header.value("equations", "") != kEquationsVersion)
    fail(ErrorCode::ParseError, "checkpoint was written with different cell equations");

  Vocab vocab;
  const auto& vj = header.at("vocab");
  vocab.unk_id = vj.at("unk_id").get<int>();
  vocab.unk_k = vj.value("unk_k", 0);
  vocab.tokens = vj.at("tokens").get<std::vector<std::string>>();
  vocab.frequency = vj.at("frequency").get<std::vector<std::int64_t>>();
  for (std::size_t i = 0; i < vocab.tokens.size(); ++i)
    if (static_cast<int>(i) != vocab.unk_id)
      vocab.index.emplace(vocab.tokens[i], static_cast<int>(i));

  Model model = make_model(model_kind_from_string(header.at("model").get<std::string>()),
                           vocab, header.at("d").get<int>(),
                           header.at("seed").get<std::uint64_t>());

  const auto& arrays = header.at("params");
  if (arrays.size() != model.params.count())
    fail(ErrorCode::ParseError, "checkpoint parameter list does not match model kind");
  for (std::size_t i = 0; i < model.params.count(); ++i) {
    Param& p = model.params[i];
    const auto& meta = arrays[i];
    if (meta.at("name").get<std::string>() != p.name ||
        meta.at("rows").get<int>() != p.shape.rows ||
        meta.at("cols").get<int>() != p.shape.cols)
      fail(ErrorCode::ParseError, "checkpoint array mismatch at " + p.name);
    for (double& x : p.value) x = read_f64_le(in);
  }
  if (!in) fail(ErrorCode::Io, "checkpoint truncated: " + path);
  return model;
}

}  // namespace hlm
