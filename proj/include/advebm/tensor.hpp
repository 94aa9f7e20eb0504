#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "advebm/error.hpp"

namespace advebm {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

// Dense n-dimensional array of doubles, row-major. The carrier for inputs,
// logits, parameters and gradients throughout the library.
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
    check_consistent();
  }
  explicit Tensor(Shape s) : shape(std::move(s)), data(shape_numel(shape), 0.0) {}

  static Tensor zeros(Shape s) { return Tensor(std::move(s)); }
  static Tensor full(Shape s, double v) {
    Tensor t(std::move(s));
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor vec(std::initializer_list<double> vals) {
    return Tensor({vals.size()}, std::vector<double>(vals));
  }

  std::size_t size() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  // Scalar access for [1]-shaped tensors.
  double item() const {
    if (data.size() != 1) throw ShapeError("Tensor::item", "tensor is not scalar, shape " + shape_str(shape));
    return data[0];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void check_consistent() const {
    for (std::size_t d : shape)
      if (d == 0) throw ShapeError("Tensor", "zero dimension in shape " + shape_str(shape));
    if (shape_numel(shape) != data.size())
      throw ShapeError("Tensor", "shape " + shape_str(shape) + " does not match data length " +
                                     std::to_string(data.size()));
  }

  bool all_finite() const {
    for (double v : data)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

inline bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape == b.shape && a.data == b.data;
}

// y += c * x
inline void axpy(double c, const Tensor& x, Tensor& y) {
  if (!x.same_shape(y)) throw ShapeError("axpy", "shape mismatch " + shape_str(x.shape) + " vs " + shape_str(y.shape));
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline void scale_inplace(Tensor& t, double c) {
  for (double& v : t.data) v *= c;
}

inline void clamp_inplace(Tensor& t, double lo, double hi) {
  for (double& v : t.data) v = std::clamp(v, lo, hi);
}

inline double linf_dist(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ShapeError("linf_dist", "shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2_norm(const Tensor& t) {
  double s = 0.0;
  for (double v : t.data) s += v * v;
  return std::sqrt(s);
}

inline double mean_value(const Tensor& t) {
  double s = std::accumulate(t.data.begin(), t.data.end(), 0.0);
  return s / static_cast<double>(t.size());
}

// sign with sign(0) = 0; the subgradient convention relied on by the attack.
inline double sign0(double v) {
  return static_cast<double>(v > 0.0) - static_cast<double>(v < 0.0);
}

}  // namespace advebm
