#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <type_traits>
#include <variant>

#include "emqs/incidence.hpp"

namespace emqs {

struct Sine {
  double frequency = 1.0;  // Hz
  bool operator==(const Sine&) const = default;
};
struct GaussianPulse {
  double t0 = 0.0;
  double sigma = 1.0;
  bool operator==(const GaussianPulse&) const = default;
};
/// Quintic smoothstep from 0 to 1 over [0, t_rise]; C2 at both ends.
struct SmoothRamp {
  double t_rise = 1.0;
  bool operator==(const SmoothRamp&) const = default;
};

using Profile = std::variant<Sine, GaussianPulse, SmoothRamp>;

inline double evaluate(const Profile& p, double t) {
  return std::visit(
      [t](const auto& q) -> double {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sine>) {
          return std::sin(2.0 * std::numbers::pi * q.frequency * t);
        } else if constexpr (std::is_same_v<T, GaussianPulse>) {
          const double s = (t - q.t0) / q.sigma;
          return std::exp(-0.5 * s * s);
        } else {
          const double s = std::clamp(t / q.t_rise, 0.0, 1.0);
          return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
        }
      },
      p);
}

/// Same profile running `factor` times slower.
inline Profile slowed(const Profile& p, double factor) {
  return std::visit(
      [factor](auto q) -> Profile {
        using T = std::decay_t<decltype(q)>;
        if constexpr (std::is_same_v<T, Sine>) {
          q.frequency /= factor;
        } else if constexpr (std::is_same_v<T, GaussianPulse>) {
          q.t0 *= factor;
          q.sigma *= factor;
        } else {
          q.t_rise *= factor;
        }
        return q;
      },
      p);
}

/// u(t) = amplitude * profile(t) * pattern, with the pattern in edge-integrated
/// current on interior edges.
struct SourceWaveform {
  Vector pattern;
  Profile profile = Sine{};
  double amplitude = 1.0;

  Vector operator()(double t) const { return (amplitude * evaluate(profile, t)) * pattern; }

  static SourceWaveform none(Index edges) { return {Vector::Zero(edges), Sine{}, 0.0}; }
};

}  // namespace emqs
