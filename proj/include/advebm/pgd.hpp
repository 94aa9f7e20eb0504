#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "advebm/energy.hpp"
#include "advebm/error.hpp"
#include "advebm/tensor.hpp"

namespace advebm {

enum class AttackMode { untargeted, targeted };

// l-infinity PGD parameters. Step size defaults to 2.5*eps/steps, which
// makes every corner of the eps box reachable within the step budget.
struct AttackSpec {
  double epsilon = 0.1;
  std::optional<double> step_size;
  std::size_t steps = 15;
  AttackMode mode = AttackMode::untargeted;
  double clamp_lo = -1.0;
  double clamp_hi = 1.0;

  void validate() const {
    if (epsilon < 0.0) throw ValueError("pgd: epsilon must be >= 0");
    if (step_size && !(*step_size > 0.0)) throw ValueError("pgd: step_size must be > 0");
    if (!(clamp_lo < clamp_hi)) throw ValueError("pgd: clamp range is empty");
  }

  double resolved_step_size() const {
    if (step_size) return *step_size;
    return steps == 0 ? 0.0 : 2.5 * epsilon / static_cast<double>(steps);
  }
};

// Iterated signed-gradient attack on the cross-entropy of `label`:
//   untargeted: ascend CE on the true label,
//   targeted:   descend CE on the target label.
// Each iterate is projected onto the l-inf ball of radius eps around x0 and
// then clamped to the data range; both are boxes, so the composition is the
// exact projection onto their intersection. sign(0) = 0, start point is x0
// itself. The result always satisfies ||result - x0||_inf <= eps.
inline Tensor pgd_attack(const EnergyView& ev, const Tensor& x0, int label, const AttackSpec& spec) {
  spec.validate();
  if (label < 0 || static_cast<std::size_t>(label) >= ev.num_classes())
    throw ValueError("pgd: label " + std::to_string(label) + " out of range");
  const double step = spec.resolved_step_size();
  const double dir = spec.mode == AttackMode::untargeted ? 1.0 : -1.0;
  Tensor x = x0;
  Tensor grad;
  for (std::size_t it = 0; it < spec.steps; ++it) {
    ev.cross_entropy_grad_x(x, label, grad);
    if (!grad.all_finite())
      throw NumericError("pgd_attack", "non-finite loss gradient at iteration " + std::to_string(it));
    for (std::size_t j = 0; j < x.size(); ++j) {
      double v = x[j] + dir * step * sign0(grad[j]);
      v = std::clamp(v, x0[j] - spec.epsilon, x0[j] + spec.epsilon);
      x[j] = std::clamp(v, spec.clamp_lo, spec.clamp_hi);
    }
  }
  return x;
}

// Targeted attack used as a sampling prior; also reports the posterior mass
// the attack achieved on the target class.
struct PriorSample {
  Tensor x;
  double target_posterior = 0.0;
};

inline PriorSample targeted_prior(const EnergyView& ev, const Tensor& x0, int target_class, AttackSpec spec) {
  spec.mode = AttackMode::targeted;
  PriorSample out;
  out.x = pgd_attack(ev, x0, target_class, spec);
  out.target_posterior = ev.posterior(out.x)[static_cast<std::size_t>(target_class)];
  return out;
}

}  // namespace advebm
