#pragma once

// Central finite-difference gradient checking used across the neural tests
// and the acceptance suite.

#include <cmath>
#include <functional>
#include <vector>

#include "cutsel/tensor.hpp"

namespace gradcheck {

// Max scaled error between autodiff gradients and central differences over
// every entry of every parameter. forward() must rebuild the graph from the
// current parameter values.
inline double max_error(std::vector<cutsel::Tensor>& params,
                        const std::function<cutsel::Tensor()>& forward, double eps = 1e-5) {
  cutsel::Tensor loss = forward();
  loss.backward();
  std::vector<std::vector<double>> analytic;
  for (auto& p : params) analytic.push_back(p.grad());

  double worst = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& vals = params[pi].values();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double keep = vals[i];
      vals[i] = keep + eps;
      const double fp = forward().item();
      vals[i] = keep - eps;
      const double fm = forward().item();
      vals[i] = keep;
      const double fd = (fp - fm) / (2.0 * eps);
      const double ad = analytic[pi][i];
      const double err = std::fabs(fd - ad) / std::max({1.0, std::fabs(fd), std::fabs(ad)});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace gradcheck
