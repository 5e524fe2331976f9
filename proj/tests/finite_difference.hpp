#pragma once

// Central finite-difference gradients, independent of the analytic backward pass.

#include <functional>

#include "pvdqn/mlp.hpp"

namespace pvdqn::testing {

/// Perturbs every parameter by +-h and differentiates `loss(mlp)` numerically. Returned in
/// the same layout as analytic Gradients.
inline Gradients<double> numeric_gradients(Mlp mlp, const std::function<double(const Mlp&)>& loss, double h = 1e-5) {
  Gradients<double> g;
  auto layers = mlp.layers();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    RowMatrix<double> gw(layers[k].weights.rows(), layers[k].weights.cols());
    for (Eigen::Index r = 0; r < gw.rows(); ++r) {
      for (Eigen::Index c = 0; c < gw.cols(); ++c) {
        double& p = layers[k].weights(r, c);
        const double saved = p;
        p = saved + h;
        const double up = loss(mlp);
        p = saved - h;
        const double down = loss(mlp);
        p = saved;
        gw(r, c) = (up - down) / (2 * h);
      }
    }
    Vector<double> gb(layers[k].bias.size());
    for (Eigen::Index r = 0; r < gb.size(); ++r) {
      double& p = layers[k].bias[r];
      const double saved = p;
      p = saved + h;
      const double up = loss(mlp);
      p = saved - h;
      const double down = loss(mlp);
      p = saved;
      gb[r] = (up - down) / (2 * h);
    }
    g.weights.push_back(gw);
    g.bias.push_back(gb);
  }
  return g;
}

inline double relative_error(double analytic, double numeric, double floor = 1e-8) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

/// Largest per-coordinate relative error between two gradient sets.
inline double max_relative_error(const Gradients<double>& a, const Gradients<double>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.weights.size(); ++k) {
    for (Eigen::Index i = 0; i < a.weights[k].size(); ++i)
      worst = std::max(worst, relative_error(a.weights[k].data()[i], b.weights[k].data()[i]));
    for (Eigen::Index i = 0; i < a.bias[k].size(); ++i)
      worst = std::max(worst, relative_error(a.bias[k][i], b.bias[k][i]));
  }
  return worst;
}

}  // namespace pvdqn::testing
