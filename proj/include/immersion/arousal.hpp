#pragma once

// Reward-derived arousal coefficient r(t) and the score goal it tracks.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace immersion {

enum class ArousalMode { fixed_neutral, score_tracking };

inline const char* to_string(ArousalMode m) {
  return m == ArousalMode::fixed_neutral ? "fixed-neutral" : "score-tracking";
}

inline ArousalMode parse_arousal_mode(const std::string& s) {
  if (s == "fixed-neutral") return ArousalMode::fixed_neutral;
  if (s == "score-tracking") return ArousalMode::score_tracking;
  throw std::invalid_argument("unknown arousal mode: " + s);
}

struct ArousalState {
  ArousalMode mode = ArousalMode::fixed_neutral;
  double alpha = 1.25;
  std::optional<double> score_goal;  // online percentage; unset during round 1
  double current_r = 1.0;
};

/// alpha (100 - |goal - current|) / 100, scores in percent.
inline double compute_r(double score_goal, double score_t, double alpha) {
  auto in_range = [](double s) { return s >= 0.0 && s <= 100.0; };
  if (!in_range(score_goal) || !in_range(score_t)) throw std::out_of_range("compute_r: scores must lie in [0, 100]");
  if (!(alpha > 0.0)) throw std::out_of_range("compute_r: alpha must be positive");
  return alpha * (100.0 - std::abs(score_goal - score_t)) / 100.0;
}

/// The goal is the best score of the rounds completed so far.
inline ArousalState update_goal_score(ArousalState state, std::span<const double> completed_round_scores) {
  if (completed_round_scores.empty()) {
    state.score_goal.reset();
    state.current_r = 1.0;
    return state;
  }
  state.score_goal = *std::max_element(completed_round_scores.begin(), completed_round_scores.end());
  return state;
}

inline double r_for_frame(const ArousalState& state, double running_online_pct) {
  if (state.mode == ArousalMode::fixed_neutral || !state.score_goal) return 1.0;
  return compute_r(*state.score_goal, std::clamp(running_online_pct, 0.0, 100.0), state.alpha);
}

}  // namespace immersion
