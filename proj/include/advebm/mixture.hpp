#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advebm/error.hpp"
#include "advebm/rng.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

// Per-class diagonal Gaussian fit of a dataset; the informative initializer
// for sampling chains. Variances are floored so every class is sampleable
// even when degenerate.
struct MixtureStats {
  std::vector<Tensor> mean;      // K tensors of shape [D]
  std::vector<Tensor> variance;  // K tensors of shape [D], >= variance_floor
  double variance_floor = 1e-6;

  std::size_t num_classes() const { return mean.size(); }
  std::size_t dim() const { return mean.empty() ? 0 : mean[0].size(); }
};

// Population-convention per-class mean/variance over (inputs, labels).
// Every class in 0..num_classes-1 must be present.
inline MixtureStats estimate_mixture(const std::vector<Tensor>& inputs, const std::vector<int>& labels,
                                     std::size_t num_classes, double variance_floor = 1e-6) {
  if (inputs.empty()) throw ValueError("estimate_mixture: empty dataset");
  if (inputs.size() != labels.size()) throw ValueError("estimate_mixture: inputs/labels size mismatch");
  if (variance_floor <= 0.0) throw ValueError("estimate_mixture: variance_floor must be positive");
  const std::size_t d = inputs[0].size();

  MixtureStats st;
  st.variance_floor = variance_floor;
  st.mean.assign(num_classes, Tensor::zeros({d}));
  st.variance.assign(num_classes, Tensor::zeros({d}));
  std::vector<std::size_t> count(num_classes, 0);

  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes)
      throw ValueError("estimate_mixture: label " + std::to_string(y) + " out of range");
    if (inputs[i].size() != d) throw ShapeError("estimate_mixture", "inconsistent input dimension");
    axpy(1.0, inputs[i], st.mean[y]);
    ++count[y];
  }
  std::string missing;
  for (std::size_t k = 0; k < num_classes; ++k) {
    if (count[k] == 0) missing += (missing.empty() ? "" : ",") + std::to_string(k);
  }
  if (!missing.empty()) throw ValueError("estimate_mixture: classes absent from dataset: " + missing);
  for (std::size_t k = 0; k < num_classes; ++k) scale_inplace(st.mean[k], 1.0 / static_cast<double>(count[k]));

  // second pass keeps the variance numerically clean
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const int y = labels[i];
    for (std::size_t j = 0; j < d; ++j) {
      const double dlt = inputs[i][j] - st.mean[y][j];
      st.variance[y][j] += dlt * dlt;
    }
  }
  for (std::size_t k = 0; k < num_classes; ++k) {
    scale_inplace(st.variance[k], 1.0 / static_cast<double>(count[k]));
    for (double& v : st.variance[k].data) v = std::max(v, variance_floor);
  }
  return st;
}

// Draw a chain start from the mixture: x0 ~ N(mu_y, diag sigma^2_y), class
// drawn uniformly when not given. Result clamped to the data range.
// RNG consumption order: optional class draw, then D normals in index order.
inline Tensor sample_init(const MixtureStats& st, std::optional<int> y, Rng& rng, double clamp_lo = -1.0,
                          double clamp_hi = 1.0) {
  if (st.mean.empty()) throw ValueError("sample_init: empty mixture stats");
  int cls;
  if (y) {
    cls = *y;
    if (cls < 0 || static_cast<std::size_t>(cls) >= st.num_classes())
      throw ValueError("sample_init: class " + std::to_string(cls) + " out of range");
  } else {
    cls = static_cast<int>(rng.uniform_int(st.num_classes()));
  }
  const Tensor& mu = st.mean[cls];
  const Tensor& var = st.variance[cls];
  Tensor x({mu.size()});
  for (std::size_t j = 0; j < x.size(); ++j) x[j] = mu[j] + std::sqrt(var[j]) * rng.normal();
  clamp_inplace(x, clamp_lo, clamp_hi);
  return x;
}

// Plain-noise variant of the initializer: zero means, unit variances.
inline MixtureStats noise_stats(std::size_t num_classes, std::size_t dim) {
  MixtureStats st;
  st.variance_floor = 1e-6;
  st.mean.assign(num_classes, Tensor::zeros({dim}));
  st.variance.assign(num_classes, Tensor::full({dim}, 1.0));
  return st;
}

}  // namespace advebm
