#pragma once

#include <string>
#include <string_view>

#include "safe_el/numerics.hpp"

namespace safe_el {

// a * sin(f t) applied identically to every component.
struct SineSignal {
  double amplitude = 0.0;
  double frequency = 1.0;

  Vec value(double t, int dim) const;
  Vec rate(double t, int dim) const;
};

// Preset ids: "zero", "10*sin(t)", "0.2*sin(2t)". Throws UnknownPreset.
SineSignal signal_preset(std::string_view id);

// Disturbance tau_d(t), velocity measurement error xi(t) and its derivative,
// plus the declared bounds D0 >= ||tau_d||, D1 >= ||xi||, D2 >= ||xi_dot||.
// Only D1 is visible to the controller.
struct UncertaintySignals {
  SineSignal tau_d;
  SineSignal xi;
  double d0 = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  int dim = 2;

  Vec tau_d_at(double t) const { return tau_d.value(t, dim); }
  Vec xi_at(double t) const { return xi.value(t, dim); }
  Vec xi_dot_at(double t) const { return xi.rate(t, dim); }
};

struct RefSample {
  Vec pos;
  Vec vel;
  Vec acc;
};

// Closed-form reference trajectories.
//   sine3  : 3 sin t on both joints
//   hold   : constant at a fixed point
//   line_x : (1.5 - 0.3 t, 0)
//   circle : (1.5 cos t, 1.5 sin t)
class Reference {
 public:
  enum class Kind { Sine3, Hold, LineX, Circle };

  static Reference from_id(std::string_view id, const Vec& hold_point);
  static Reference hold(const Vec& point);

  RefSample at(double t) const;
  Kind kind() const { return kind_; }
  std::string id() const;

 private:
  Reference(Kind kind, Vec hold) : kind_(kind), hold_(std::move(hold)) {}

  Kind kind_;
  Vec hold_;
};

}  // namespace safe_el
