#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hlm/decoder.hpp"
#include "hlm/optim.hpp"
#include "hlm/rng.hpp"
#include "test_util.hpp"

using namespace hlm;

namespace {

void randomize(ParamSet& params, std::uint64_t seed, double scale = 0.5) {
  Rng rng(seed);
  for (std::size_t i = 0; i < params.count(); ++i)
    for (double& x : params[i].value) x = rng.uniform(-scale, scale);
}

}  // namespace

TEST_CASE("softmax of equal logits is uniform") {
  auto probs = softmax(std::vector<double>{0.0, 0.0, 0.0});
  for (double p : probs) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("sigmoid and tanh at zero") {
  Tape tape;
  Value x = tape.zeros({3, 1});
  CHECK(tape.sigmoid(x).data()[0] == doctest::Approx(0.5));
  CHECK(tape.tanh(x).data()[1] == 0.0);
  CHECK(stable_sigmoid(0.0) == 0.5);
  CHECK(stable_sigmoid(-800.0) == doctest::Approx(0.0));
  CHECK(stable_sigmoid(800.0) == doctest::Approx(1.0));
}

TEST_CASE("split_rows and concat_rows are inverse") {
  const int d = 3;
  ParamSet params;
  Param& p = params.add("x", 5 * d, 1);
  Rng rng(1);
  for (double& x : p.value) x = rng.uniform(-1, 1);

  Tape tape;
  Value x = tape.param(p);
  auto parts = tape.split_rows(x, 5);
  REQUIRE(parts.size() == 5);
  for (const Value& part : parts) CHECK(part.shape() == Shape{d, 1});
  Value joined = tape.concat_rows(parts);
  REQUIRE(joined.shape() == Shape{5 * d, 1});
  for (int i = 0; i < 5 * d; ++i) CHECK(joined.data()[static_cast<std::size_t>(i)] == p.value[static_cast<std::size_t>(i)]);

  CHECK_THROWS_AS(tape.split_rows(x, 4), Error);
}

TEST_CASE("matmul rejects mismatched shapes") {
  Tape tape;
  Value a = tape.zeros({2, 3});
  Value b = tape.zeros({2, 3});
  try {
    tape.matmul(a, b);
    FAIL("expected ShapeMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ShapeMismatch);
  }
}

TEST_CASE("softmax_cross_entropy gradient is probs minus one-hot") {
  ParamSet params;
  Param& logits = params.add("logits", 4, 1);
  logits.value = {0.2, -1.3, 0.7, 0.1};
  const int oracle = 2;

  Tape tape;
  Value loss = tape.softmax_cross_entropy(tape.param(logits), oracle);
  params.zero_grads();
  tape.backward(loss);

  const auto probs = softmax(logits.value);
  for (int i = 0; i < 4; ++i) {
    const double expected = probs[static_cast<std::size_t>(i)] - (i == oracle ? 1.0 : 0.0);
    CHECK(logits.grad[static_cast<std::size_t>(i)] == doctest::Approx(expected).epsilon(1e-12));
  }
  CHECK(loss.scalar() == doctest::Approx(-std::log(probs[2])).epsilon(1e-12));
}

TEST_CASE("grad_check on x*x") {
  ParamSet params;
  Param& x = params.add("x", 1, 1);
  x.value[0] = 3.0;
  const auto build = [&](Tape& tape) {
    Value v = tape.param(x);
    return tape.elementwise_mul(v, v);
  };
  const double err = grad_check(params, build);
  CHECK(err < 1e-9);
  // Analytic derivative of x^2 at 3.
  params.zero_grads();
  Tape tape;
  tape.backward(build(tape));
  CHECK(x.grad[0] == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("fan-out accumulates like duplicated parameters") {
  ParamSet single;
  Param& p = single.add("p", 3, 1);
  p.value = {0.4, -0.2, 1.1};

  ParamSet twins;
  Param& p1 = twins.add("p1", 3, 1);
  Param& p2 = twins.add("p2", 3, 1);
  p1.value = p.value;
  p2.value = p.value;

  // f(p) = sum over softmax-xent of (p*p); p enters twice.
  {
    Tape tape;
    Value v = tape.param(p);
    Value prod = tape.elementwise_mul(v, v);
    Value loss = tape.softmax_cross_entropy(prod, 1);
    single.zero_grads();
    tape.backward(loss);
  }
  {
    Tape tape;
    Value prod = tape.elementwise_mul(tape.param(p1), tape.param(p2));
    Value loss = tape.softmax_cross_entropy(prod, 1);
    twins.zero_grads();
    tape.backward(loss);
  }
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(p.grad[i] == doctest::Approx(p1.grad[i] + p2.grad[i]).epsilon(1e-12));

  // Leasing the same parameter twice also accumulates.
  ParamSet leased;
  Param& q = leased.add("q", 3, 1);
  q.value = p.value;
  {
    Tape tape;
    Value prod = tape.elementwise_mul(tape.param(q), tape.param(q));
    Value loss = tape.softmax_cross_entropy(prod, 1);
    leased.zero_grads();
    tape.backward(loss);
  }
  for (std::size_t i = 0; i < 3; ++i)
    CHECK(q.grad[i] == doctest::Approx(p.grad[i]).epsilon(1e-12));
}

TEST_CASE("embedding_lookup gradient hits only the looked-up row") {
  ParamSet params;
  Param& table = params.add("table", 4, 3);
  randomize(params, 8);

  Tape tape;
  Value row = tape.embedding_lookup(table, 2);
  Value loss = tape.softmax_cross_entropy(row, 0);
  params.zero_grads();
  tape.backward(loss);

  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 3; ++c) {
      const double g = table.grad[static_cast<std::size_t>(r) * 3 + c];
      if (r == 2) {
        CHECK(std::abs(g) > 0);
      } else {
        CHECK(g == 0.0);
      }
    }
}

TEST_CASE("forward pass is deterministic across evaluations") {
  ParamSet params;
  Param& w = params.add("w", 4, 4);
  Param& x = params.add("x", 4, 1);
  randomize(params, 17);
  const auto build = [&](Tape& tape) {
    Value y = tape.matmul(tape.param(w), tape.param(x));
    return tape.softmax_cross_entropy(tape.tanh(y), 1);
  };
  Tape t1, t2;
  CHECK(build(t1).scalar() == build(t2).scalar());
}

TEST_CASE("adam leaves parameters unchanged on zero gradients") {
  ParamSet params;
  Param& p = params.add("p", 2, 2);
  p.value = {1.0, -2.0, 3.0, -4.0};
  const auto before = p.value;
  AdamState adam(params);
  params.zero_grads();
  adam.step(params, {});
  CHECK(p.value == before);
}

TEST_CASE("first adam step moves by about lr in the gradient sign direction") {
  ParamSet params;
  Param& p = params.add("p", 3, 1);
  p.value = {1.0, 1.0, 1.0};
  params.zero_grads();
  p.grad = {0.5, -2.0, 1e-3};
  AdamState adam(params);
  AdamConfig config;
  adam.step(params, config);
  CHECK(p.value[0] == doctest::Approx(1.0 - config.lr).epsilon(1e-3));
  CHECK(p.value[1] == doctest::Approx(1.0 + config.lr).epsilon(1e-3));
  CHECK(p.value[2] < 1.0);
}

TEST_CASE("adam drives x^2 toward zero") {
  ParamSet params;
  Param& x = params.add("x", 1, 1);
  x.value[0] = 1.0;
  AdamState adam(params);
  AdamConfig config;
  config.lr = 0.01;
  double previous = 1.0;
  int increases = 0;
  for (int step = 0; step < 100; ++step) {
    params.zero_grads();
    x.grad[0] = 2.0 * x.value[0];
    adam.step(params, config);
    const double loss = x.value[0] * x.value[0];
    if (loss > previous) ++increases;
    previous = loss;
  }
  CHECK(std::abs(x.value[0]) < 0.5);
  CHECK(increases <= 20);
}

TEST_CASE("full HLM loss on a 5-node tree passes grad_check at d=4") {
  Ast tree = build_ast({{"f", std::nullopt}, {"x", 0}, {"y", 0}, {"z", 2}, {"x", 2}});
  Vocab vocab = test::full_vocab({tree});
  Model model = init_params(ModelKind::Hlm, vocab, 4, 21);
  randomize(model.params, 22);
  EncodedAst encoded = encode_tree(tree, vocab);
  // eps 1e-3: central-difference roundoff at eps 1e-5 swamps coordinates
  // whose true gradient is near zero.
  const double err = grad_check(model.params, [&](Tape& tape) {
    return tree_loss(tape, model, encoded);
  }, 1e-3);
  CHECK(err < 1e-4);
}
