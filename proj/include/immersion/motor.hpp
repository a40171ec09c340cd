#pragma once

// Condition-action table for manipulation. Thresholds theta[0..5] are the
// tracker-tuned corrections (theta_1 .. theta_6).

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace immersion {

enum class MotorCommand { Stop, Left, Right, Continue, LeftPunch, RightPunch, Space };

inline const char* to_string(MotorCommand c) {
  switch (c) {
    case MotorCommand::Stop: return "stop";
    case MotorCommand::Left: return "left";
    case MotorCommand::Right: return "right";
    case MotorCommand::Continue: return "continue";
    case MotorCommand::LeftPunch: return "left-punch";
    case MotorCommand::RightPunch: return "right-punch";
    case MotorCommand::Space: return "space";
  }
  return "?";
}

/// Number of brief key presses a command emits.
inline int press_count(MotorCommand c) {
  switch (c) {
    case MotorCommand::LeftPunch:
    case MotorCommand::RightPunch: return 2;
    case MotorCommand::Left:
    case MotorCommand::Right:
    case MotorCommand::Space: return 1;
    default: return 0;
  }
}

/// What the hands are doing: holding a key or not.
enum class CurrentAction { Stop, Left, Right };

using Thetas = std::array<double, 6>;

enum class Side { Left, Right };
enum class GoalRange { Far, Near };

/// Geometry read from the goal buffer. Distances in px.
struct Percept {
  double vl = 0.0;    // horizontal distance to the line at the read-ahead row
  double vg_x = 0.0;  // horizontal distance to the next turn
  double vg_y = 0.0;  // scroll distance to the next turn
  Side position = Side::Left;  // side of the line the circle is on
  bool online = true;

  double vg() const { return std::hypot(vg_x, vg_y); }
};

inline Percept make_percept(double circle_x, double line_x, double turn_x, double turn_dy, bool online) {
  Percept p;
  p.vl = std::abs(circle_x - line_x);
  p.vg_x = std::abs(turn_x - circle_x);
  p.vg_y = turn_dy;
  p.position = circle_x > line_x ? Side::Right : Side::Left;
  p.online = online;
  return p;
}

/// Far: the circle has lost the line and heads for the next turn instead.
/// Near: the line itself is the target.
inline GoalRange classify_goal(const Percept& p, double far_radius_px) {
  return p.vl > far_radius_px ? GoalRange::Far : GoalRange::Near;
}

/// Evaluates the table rows for the current action. Rows are mutually
/// exclusive; when none matches the previous operation continues.
inline MotorCommand select_motor_action(CurrentAction current, const Percept& p, const Thetas& th,
                                        double far_radius_px) {
  const double t1 = th[0], t2 = th[1], t3 = th[2], t4 = th[3], t5 = th[4], t6 = th[5];
  const double vl = p.vl, vg = p.vg(), vgx = p.vg_x, vgy = p.vg_y;
  const GoalRange goal = classify_goal(p, far_radius_px);

  if (current == CurrentAction::Stop) {
    // Move toward the line: right of it -> Left, left of it -> Right.
    const bool toward_left = p.position == Side::Right;
    const MotorCommand hold = toward_left ? MotorCommand::Left : MotorCommand::Right;
    const MotorCommand punch = toward_left ? MotorCommand::LeftPunch : MotorCommand::RightPunch;
    if (goal == GoalRange::Far) {
      if (vgx > t1 && vl >= vg + t4) return vgx >= vgy + t5 ? hold : punch;
    } else {
      if (vl > t1 && vl < vg + t4) {
        if (vl > t2 && p.online) return hold;
        if (vl <= t2) return punch;
      }
    }
    return MotorCommand::Continue;
  }

  // Holding a key: stop once past the line or close enough.
  const Side moving_toward = current == CurrentAction::Left ? Side::Right : Side::Left;
  if (p.position != moving_toward) return MotorCommand::Stop;
  if (goal == GoalRange::Far) {
    if (vl >= vg + t6 && vgx <= t3) return MotorCommand::Stop;
  } else {
    if (vl <= vg + t6 && vl <= t3) return MotorCommand::Stop;
  }
  return MotorCommand::Continue;
}

/// Hand state after a command has executed.
inline CurrentAction action_after(CurrentAction current, MotorCommand c) {
  switch (c) {
    case MotorCommand::Stop: return CurrentAction::Stop;
    case MotorCommand::Left: return CurrentAction::Left;
    case MotorCommand::Right: return CurrentAction::Right;
    case MotorCommand::LeftPunch:
    case MotorCommand::RightPunch: return CurrentAction::Stop;
    default: return current;
  }
}

}  // namespace immersion
