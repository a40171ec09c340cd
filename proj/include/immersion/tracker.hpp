#pragma once

// Threshold learning for the manipulation table: environment feedback summed
// over an evaluation window, with annealed proposals around the best thresholds.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "immersion/motor.hpp"
#include "immersion/random.hpp"

namespace immersion {

struct TrackerParams {
  bool enabled = true;
  double t0 = 8.0;       // px
  double cooling = 0.98;
  double t_floor = 0.05;  // px
  double delta = 0.1;          // approach feedback while offline
  double recede_delta = 0.3;   // recede penalty while offline
  double theta_min = 0.0;
  double theta_max = 48.0;
  bool metropolis = false;

  void validate() const {
    if (!(t0 > 0.0)) throw std::invalid_argument("tracker.t0 must be positive");
    if (!(cooling > 0.0 && cooling < 1.0)) throw std::invalid_argument("tracker.cooling must lie in (0, 1)");
    if (!(t_floor > 0.0)) throw std::invalid_argument("tracker.t_floor must be positive");
    if (!(theta_min < theta_max)) throw std::invalid_argument("tracker theta bounds are empty");
    if (!(delta >= 0.0 && recede_delta >= 0.0)) throw std::invalid_argument("tracker feedback magnitudes must be non-negative");
  }

  double midpoint() const { return 0.5 * (theta_min + theta_max); }
};

struct TrackerState {
  Thetas thetas{};
  double temperature = 0.0;
  Thetas best_thetas{};
  std::optional<double> best_feedback;
  double accumulated_feedback = 0.0;  // current window
  std::vector<std::pair<Thetas, double>> history;

  static TrackerState initial(const TrackerParams& p) {
    TrackerState s;
    s.thetas.fill(p.midpoint());
    s.best_thetas = s.thetas;
    s.temperature = p.t0;
    return s;
  }
};

enum class FeedbackKind { offline_to_online, online_to_offline, approaching_while_offline, receding_while_offline };

struct FeedbackEvent {
  FeedbackKind kind;
  double magnitude;
};

/// Feedback for one frame transition. `recede_delta` defaults to `delta`.
inline std::optional<FeedbackEvent> feedback_from_transition(bool prev_online, double prev_offset, bool next_online,
                                                             double next_offset, double delta,
                                                             std::optional<double> recede_delta = std::nullopt) {
  if (!prev_online && next_online) return FeedbackEvent{FeedbackKind::offline_to_online, 1.0};
  if (prev_online && !next_online) return FeedbackEvent{FeedbackKind::online_to_offline, -1.0};
  if (!prev_online && !next_online) {
    const double before = std::abs(prev_offset), after = std::abs(next_offset);
    if (after < before) return FeedbackEvent{FeedbackKind::approaching_while_offline, delta};
    if (after > before) return FeedbackEvent{FeedbackKind::receding_while_offline, -recede_delta.value_or(delta)};
  }
  return std::nullopt;
}

/// Best thresholds perturbed by temperature-scaled Gaussian noise, clamped.
inline Thetas propose_thetas(const TrackerState& s, const TrackerParams& p, Rng& rng) {
  if (!(s.temperature > 0.0)) throw std::invalid_argument("propose_thetas: temperature must be positive");
  Thetas out = s.best_thetas;
  for (auto& th : out) th = std::clamp(th + s.temperature * rng.normal(0.0, 1.0), p.theta_min, p.theta_max);
  return out;
}

/// Closes an evaluation window run under `s.thetas`. Greedy acceptance keeps
/// the best thresholds seen so far; the Metropolis variant also accepts worse
/// windows with probability exp(diff / T).
inline TrackerState update_tracker(TrackerState s, double window_feedback, const TrackerParams& p,
                                   Rng* rng = nullptr) {
  s.history.emplace_back(s.thetas, window_feedback);
  bool accept = !s.best_feedback || window_feedback > *s.best_feedback;
  if (!accept && p.metropolis && rng) {
    const double diff = window_feedback - *s.best_feedback;
    accept = rng->uniform_open() < std::exp(diff / s.temperature);
  }
  if (accept) {
    s.best_thetas = s.thetas;
    s.best_feedback = window_feedback;
  }
  s.temperature = std::max(p.t_floor, s.temperature * p.cooling);
  s.accumulated_feedback = 0.0;
  return s;
}

}  // namespace immersion
