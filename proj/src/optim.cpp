#include "hlm/optim.hpp"

#include <cmath>

namespace hlm {

AdamState::AdamState(const ParamSet& params) {
  m_.reserve(params.count());
  v_.reserve(params.count());
  for (std::size_t i = 0; i < params.count(); ++i) {
    m_.emplace_back(params[i].value.size(), 0.0);
    v_.emplace_back(params[i].value.size(), 0.0);
  }
}

void AdamState::step(ParamSet& params, const AdamConfig& config) {
  if (m_.size() != params.count())
    fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameter set");
  ++step_;
  const double bc1 = 1.0 - std::pow(config.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(config.beta2, static_cast<double>(step_));
  for (std::size_t p = 0; p < params.count(); ++p) {
    Param& param = params[p];
    if (m_[p].size() != param.value.size())
      fail(ErrorCode::ShapeMismatch, "optimizer state shape mismatch: " + param.name);
    auto& m = m_[p];
    auto& v = v_[p];
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double g = param.grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      param.value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

double grad_check(ParamSet& params,
                  const std::function<Value(Tape&)>& build,
                  double eps) {
  params.zero_grads();
  {
    Tape tape;
    Value loss = build(tape);
    tape.backward(loss);
  }
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.count());
  for (std::size_t p = 0; p < params.count(); ++p) analytic.push_back(params[p].grad);

  const auto eval = [&]() {
    Tape tape;
    return build(tape).scalar();
  };

  double worst = 0;
  for (std::size_t p = 0; p < params.count(); ++p) {
    Param& param = params[p];
    for (std::size_t i = 0; i < param.value.size(); ++i) {
      const double saved = param.value[i];
      param.value[i] = saved + eps;
      const double plus = eval();
      param.value[i] = saved - eps;
      const double minus = eval();
      param.value[i] = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double ga = analytic[p][i];
      const double rel = std::abs(ga - numeric) / std::max(1e-8, std::abs(ga) + std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

}  // namespace hlm
