#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "salab/errors.hpp"

namespace salab {

// Polynomial step law alpha_k = alpha / (k + h)^xi.
template <typename Scalar>
class BasicStepSchedule {
 public:
  BasicStepSchedule(Scalar alpha, Scalar h, Scalar xi) : alpha_(alpha), h_(h), xi_(xi) {
    if (!(alpha > 0)) throw InvalidArgument("step schedule: alpha must be positive");
    if (!(h > 1)) throw InvalidArgument("step schedule: h must exceed 1");
    if (!(xi >= 0 && xi < 1)) throw InvalidArgument("step schedule: xi must lie in [0, 1)");
  }

  Scalar alpha() const { return alpha_; }
  Scalar h() const { return h_; }
  Scalar xi() const { return xi_; }

  Scalar step(std::int64_t k) const {
    using std::pow;
    return alpha_ / pow(static_cast<Scalar>(k) + h_, xi_);
  }
  Scalar operator()(std::int64_t k) const { return step(k); }

  // Sum of steps 0..k, accumulated term by term.
  Scalar partial_sum(std::int64_t k) const {
    Scalar s = 0;
    for (std::int64_t j = 0; j <= k; ++j) s += step(j);
    return s;
  }

  bool constant() const { return xi_ == 0; }

 private:
  Scalar alpha_;
  Scalar h_;
  Scalar xi_;
};

using StepSchedule = BasicStepSchedule<double>;

}  // namespace salab
