#pragma once

#include <functional>
#include <vector>

#include "hlm/tensor.hpp"

namespace hlm {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moment buffers per parameter, in ParamSet order.
class AdamState {
 public:
  explicit AdamState(const ParamSet& params);

  // Standard Adam update with bias correction, consuming Param::grad.
  void step(ParamSet& params, const AdamConfig& config);

  std::int64_t steps() const { return step_; }

 private:
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::int64_t step_ = 0;
};

// Compares the tape gradient of `build` against central finite differences
// over every coordinate of every parameter in `params`. Returns
// max over coordinates of |ga - gn| / max(1e-8, |ga| + |gn|).
double grad_check(ParamSet& params,
                  const std::function<Value(Tape&)>& build,
                  double eps = 1e-5);

}  // namespace hlm
