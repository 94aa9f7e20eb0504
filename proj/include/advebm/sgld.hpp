#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "advebm/energy.hpp"
#include "advebm/error.hpp"
#include "advebm/rng.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

// Langevin sampler configuration: step size alpha, outer/inner loop counts,
// and the pixel clamp range. Noise std is sqrt(alpha) unless overridden.
struct SgldConfig {
  double alpha = 0.01;
  std::size_t outer_loops = 10;  // m
  std::size_t inner_loops = 5;   // n
  std::optional<double> noise_scale_override;
  double clamp_lo = -1.0;
  double clamp_hi = 1.0;

  void validate() const {
    if (!(alpha > 0.0)) throw ValueError("sgld: alpha must be > 0");
    if (outer_loops < 1) throw ValueError("sgld: outer_loops must be >= 1");
    if (!(clamp_lo < clamp_hi)) throw ValueError("sgld: clamp range is empty");
    if (noise_scale_override && *noise_scale_override < 0.0)
      throw ValueError("sgld: noise_scale_override must be >= 0");
  }

  double noise_std() const { return noise_scale_override ? *noise_scale_override : std::sqrt(alpha); }
};

// One chain: the current iterate, the step counter and the chain-owned RNG
// stream. Iterates stay inside the clamp range after every public step.
struct ChainState {
  Tensor x;
  std::uint64_t steps_taken = 0;
  Rng rng;

  ChainState(Tensor x0, std::uint64_t seed) : x(std::move(x0)), rng(seed) {}
  ChainState(Tensor x0, Rng stream) : x(std::move(x0)), rng(stream) {}
};

// Scalar energy with gradient: returns E(x) and fills grad (same shape as x).
using EnergyFn = std::function<double(const Tensor&, Tensor&)>;

// Single update  x' = clamp(x - (alpha/2) * dE/dx + beta),  beta ~ N(0, alpha)
// per coordinate. Noise is drawn in index order after the gradient, one
// projection per full step.
inline void sgld_step(ChainState& state, const EnergyFn& energy, const SgldConfig& cfg) {
  cfg.validate();
  Tensor grad;
  energy(state.x, grad);
  if (!grad.same_shape(state.x)) throw ShapeError("sgld_step", "energy gradient shape mismatch");
  if (!grad.all_finite())
    throw NumericError("sgld_step", "non-finite energy gradient at step " + std::to_string(state.steps_taken));
  const double drift = -0.5 * cfg.alpha;
  const double std = cfg.noise_std();
  for (std::size_t j = 0; j < state.x.size(); ++j) {
    double v = state.x[j] + drift * grad[j];
    if (std > 0.0) v += std * state.rng.normal();
    state.x[j] = std::clamp(v, cfg.clamp_lo, cfg.clamp_hi);
  }
  ++state.steps_taken;
}

// One diagnostics row per outer-loop boundary.
struct ChainRecord {
  std::uint64_t step;
  double energy;
  double grad_norm;
};
using ChainDiagnostics = std::vector<ChainRecord>;

inline EnergyFn make_energy_fn(const EnergyView& ev, std::optional<int> y) {
  if (y) {
    const int cls = *y;
    return [&ev, cls](const Tensor& x, Tensor& g) { return ev.joint_energy_grad_x(x, cls, g); };
  }
  return [&ev](const Tensor& x, Tensor& g) { return ev.marginal_energy_grad_x(x, g); };
}

// Runs m outer loops of n inner steps (m*n flat Eq.-style updates; the outer
// boundary is a diagnostics point only, the dynamics are the flat
// concatenation). Joint energy when a class is given, marginal otherwise.
inline ChainState run_chain(ChainState state, const EnergyFn& energy, const SgldConfig& cfg,
                            ChainDiagnostics* diag = nullptr) {
  cfg.validate();
  auto record = [&](std::uint64_t step) {
    if (!diag) return;
    Tensor g;
    const double e = energy(state.x, g);
    diag->push_back({step, e, l2_norm(g)});
  };
  record(0);
  for (std::size_t outer = 0; outer < cfg.outer_loops; ++outer) {
    for (std::size_t inner = 0; inner < cfg.inner_loops; ++inner) sgld_step(state, energy, cfg);
    record(static_cast<std::uint64_t>((outer + 1) * cfg.inner_loops));
  }
  return state;
}

inline ChainState run_chain(ChainState state, std::optional<int> y, const EnergyView& ev, const SgldConfig& cfg,
                            ChainDiagnostics* diag = nullptr) {
  return run_chain(std::move(state), make_energy_fn(ev, y), cfg, diag);
}

}  // namespace advebm
