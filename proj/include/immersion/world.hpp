#pragma once

#include <cmath>

#include "immersion/course.hpp"

namespace immersion {

enum class KeyState { none, left, right };

/// Circle speed while a directional key is down.
inline constexpr double kCircleStepPx = 2.0;

struct WorldState {
  long frame = 0;        // frames elapsed == scrolled pixels
  double sim_time = 0.0;  // s
  double circle_x = kCourseStartX;
  double line_x_at_circle = kCourseStartX;
  KeyState key_state = KeyState::none;
  bool online = true;
  // Current round.
  long frames_total = 0;
  long frames_online = 0;

  double offset() const { return circle_x - line_x_at_circle; }
};

inline bool is_online(double offset_px, double tolerance_px) { return std::abs(offset_px) <= tolerance_px; }
inline bool is_online(const WorldState& w, double tolerance_px) { return is_online(w.offset(), tolerance_px); }

/// Initial world: circle on the line, no key down.
inline WorldState initial_world(const CourseSpec& course) {
  WorldState w;
  w.line_x_at_circle = course.line_x(0);
  w.circle_x = w.line_x_at_circle;
  return w;
}

/// Advances one frame: the course scrolls one pixel and the circle moves two
/// pixels if `key` is down during the frame.
inline WorldState step_world(const WorldState& w, const CourseSpec& course, KeyState key, double tolerance_px,
                             double frame_s) {
  WorldState n = w;
  n.key_state = key;
  if (key == KeyState::left) n.circle_x -= kCircleStepPx;
  if (key == KeyState::right) n.circle_x += kCircleStepPx;
  n.frame = w.frame + 1;
  n.sim_time = static_cast<double>(n.frame) * frame_s;
  n.line_x_at_circle = course.line_x(n.frame);
  n.online = is_online(n, tolerance_px);
  ++n.frames_total;
  if (n.online) ++n.frames_online;
  return n;
}

struct RoundWindow {
  double start_s;
  double end_s;
};

/// Consecutive fixed-length analysis windows covering the run.
inline std::vector<RoundWindow> round_boundaries(double duration_s, double round_s = 60.0) {
  if (!(duration_s > 0.0) || !(round_s > 0.0)) throw std::invalid_argument("round_boundaries: positive durations");
  std::vector<RoundWindow> out;
  const int n = static_cast<int>(std::ceil(duration_s / round_s - 1e-9));
  for (int i = 0; i < n; ++i) out.push_back({i * round_s, std::min(duration_s, (i + 1) * round_s)});
  return out;
}

inline double offline_ratio(long frames_online, long frames_total) {
  if (frames_total <= 0) throw std::invalid_argument("offline_ratio: empty round");
  return 1.0 - static_cast<double>(frames_online) / static_cast<double>(frames_total);
}

}  // namespace immersion
