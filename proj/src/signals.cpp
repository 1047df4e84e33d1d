#include "safe_el/signals.hpp"

#include <cmath>

#include "safe_el/errors.hpp"

namespace safe_el {

Vec SineSignal::value(double t, int dim) const {
  return Vec::Constant(dim, amplitude * std::sin(frequency * t));
}

Vec SineSignal::rate(double t, int dim) const {
  return Vec::Constant(dim, amplitude * frequency * std::cos(frequency * t));
}

SineSignal signal_preset(std::string_view id) {
  if (id == "zero") return {0.0, 1.0};
  if (id == "10*sin(t)") return {10.0, 1.0};
  if (id == "0.2*sin(2t)") return {0.2, 2.0};
  throw Error(ErrorKind::UnknownPreset, "unknown signal preset '" + std::string(id) + "'");
}

Reference Reference::from_id(std::string_view id, const Vec& hold_point) {
  if (id == "sine3") return {Kind::Sine3, Vec()};
  if (id == "hold") return hold(hold_point);
  if (id == "line_x") return {Kind::LineX, Vec()};
  if (id == "circle") return {Kind::Circle, Vec()};
  throw Error(ErrorKind::UnknownPreset, "unknown reference preset '" + std::string(id) + "'");
}

Reference Reference::hold(const Vec& point) { return {Kind::Hold, point}; }

std::string Reference::id() const {
  switch (kind_) {
    case Kind::Sine3: return "sine3";
    case Kind::Hold: return "hold";
    case Kind::LineX: return "line_x";
    case Kind::Circle: return "circle";
  }
  return "";
}

RefSample Reference::at(double t) const {
  const double s = std::sin(t), c = std::cos(t);
  switch (kind_) {
    case Kind::Sine3:
      return {Vec::Constant(2, 3.0 * s), Vec::Constant(2, 3.0 * c), Vec::Constant(2, -3.0 * s)};
    case Kind::Hold:
      return {hold_, Vec::Zero(hold_.size()), Vec::Zero(hold_.size())};
    case Kind::LineX: {
      Vec pos(2), vel(2);
      pos << 1.5 - 0.3 * t, 0.0;
      vel << -0.3, 0.0;
      return {pos, vel, Vec::Zero(2)};
    }
    case Kind::Circle: {
      Vec pos(2), vel(2), acc(2);
      pos << 1.5 * c, 1.5 * s;
      vel << -1.5 * s, 1.5 * c;
      acc << -1.5 * c, -1.5 * s;
      return {pos, vel, acc};
    }
  }
  throw Error(ErrorKind::InvalidConfig, "reference: bad kind");
}

}  // namespace safe_el
