#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "mssit/tensor/ops.hpp"

namespace mssit::testing {

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8});
}

// Central finite differences against the tape gradients. `build` must be a
// deterministic function of the current parameter values and return a scalar
// loss; it is re-run many times with perturbed parameters.
inline void expect_gradients_match(
    std::vector<Tensor<double>> params,
    const std::function<Tensor<double>(Tape<double>*)>& build, double h = 1e-5,
    double tol = 1e-6, std::size_t max_coords_per_param = 0) {
  for (auto& p : params) {
    p.set_requires_grad();
    p.zero_grad();
  }
  Tape<double> tape;
  Tensor<double> loss = build(&tape);
  ASSERT_EQ(loss.numel(), 1u);
  tape.backward(loss);

  std::vector<std::vector<double>> analytic;
  for (auto& p : params) analytic.push_back(p.grad());

  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<double>& p = params[pi];
    const std::size_t n = p.numel();
    std::size_t stride = 1;
    if (max_coords_per_param > 0 && n > max_coords_per_param)
      stride = n / max_coords_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = p.data()[i];
      p.data()[i] = saved + h;
      const double fp = build(nullptr).item();
      p.data()[i] = saved - h;
      const double fm = build(nullptr).item();
      p.data()[i] = saved;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic[pi][i];
      EXPECT_LT(rel_err(a, numeric), tol)
          << "param " << pi << " coord " << i << ": analytic " << a << " numeric "
          << numeric;
    }
  }
}

}  // namespace mssit::testing
