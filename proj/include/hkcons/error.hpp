#pragma once

#include <stdexcept>
#include <string>

namespace hkcons {

/// Malformed input: bad files, bad flags, out-of-range parameters.
class input_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A mathematical precondition does not hold (disconnected graph, singular system).
class precondition_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw input_error("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
}

inline void require_time(double t) {
  if (!(t >= 0.0)) throw input_error("time t must be nonnegative, got " + std::to_string(t));
}

}  // namespace hkcons
