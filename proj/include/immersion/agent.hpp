#pragma once

// Goal buffer, production timing, and the individual productions of the
// perception -> objective -> (manipulation | probe) loop.

#include <array>
#include <optional>
#include <stdexcept>
#include <string>

#include "immersion/config.hpp"
#include "immersion/course.hpp"
#include "immersion/memory.hpp"
#include "immersion/motor.hpp"
#include "immersion/world.hpp"

namespace immersion {

enum class GoalKind { main, sub };

inline const char* to_string(GoalKind g) { return g == GoalKind::main ? "main" : "sub"; }

inline const Source kFlagOn{"flag", "on"};

struct GoalBuffer {
  GoalKind current_goal = GoalKind::main;
  double circle_pos = kCourseStartX;
  double line_pos = kCourseStartX;
  double turn_x = kCourseStartX;
  double turn_dy = 0.0;
  bool online = true;
  bool flag = false;  // probe seen

  /// Spreading sources at retrieval time.
  SpreadingContext context(SpreadingContextKind kind) const {
    if (kind == SpreadingContextKind::flag_only) {
      if (flag) return {kFlagOn};
      return {};
    }
    return {Source{"circle_pos", "position"}, Source{"next_turn_pos", "position"},
            flag ? kFlagOn : Source{"flag", "off"}};
  }
};

/// Simulated time of the production cycle. Each firing costs one production.
struct CycleClock {
  double now = 0.0;
  double production_s = 0.050;
  // Perceptual-motor time noise: with n > 0 a module duration t is drawn
  // uniformly from [t(n-1)/n, t(n+1)/n]. Production firings stay exact.
  int randomize_time = 0;
  Rng* timing_rng = nullptr;

  double duration(double t) {
    if (randomize_time <= 0 || !timing_rng) return t;
    const double n = randomize_time;
    return t * ((n - 1.0) / n + (2.0 / n) * timing_rng->uniform_open());
  }
  void fire() { now += production_s; }
  void advance(double s) {
    if (s < 0.0) throw std::invalid_argument("CycleClock: time cannot run backwards");
    now += s;
  }
  void wait_until(double t) {
    if (t > now) now = t;
  }
};

enum class Rule { confirm_probe, perception, objective, manipulation, probe };

inline const char* to_string(Rule r) {
  switch (r) {
    case Rule::confirm_probe: return "confirm-probe";
    case Rule::perception: return "perception";
    case Rule::objective: return "objective";
    case Rule::manipulation: return "manipulation";
    case Rule::probe: return "probe";
  }
  return "?";
}

/// Copies the circle, the line `lookahead_px` rows above it, the online state
/// and the next turn into the buffer. Leaves the goal and the flag alone.
inline void perception(GoalBuffer& buf, const WorldState& world, const CourseSpec& course, long lookahead_px = 0) {
  buf.circle_pos = world.circle_x;
  buf.line_pos = course.line_x(world.frame + lookahead_px);
  buf.online = world.online;
  const TurnAhead turn = course.next_turn(world.frame);
  buf.turn_x = turn.x;
  buf.turn_dy = static_cast<double>(turn.dy);
}

struct ObjectiveResult {
  RetrievalOutcome outcome;
  std::optional<double> a_main;
  std::optional<double> a_sub;
};

/// Retrieves a goal chunk with the goal buffer as spreading context. The
/// winner becomes the current goal and gets one more presentation; a failed
/// retrieval leaves the current goal in place.
inline ObjectiveResult objective(GoalBuffer& buf, DeclarativeMemory& memory, double r, CycleClock& clock, Rng* rng,
                                 SpreadingContextKind context_kind) {
  static constexpr std::array kGoalKinds{ChunkKind::main_goal, ChunkKind::sub_goal};
  ObjectiveResult res;
  clock.fire();
  res.outcome = memory.retrieve(kGoalKinds, buf.context(context_kind), r, clock.now, rng);
  for (const auto& c : res.outcome.candidates) {
    const auto kind = memory.at(c.index).kind;
    if (kind == ChunkKind::main_goal) res.a_main = c.activation;
    if (kind == ChunkKind::sub_goal) res.a_sub = c.activation;
  }
  clock.advance(res.outcome.latency);
  if (!res.outcome.failed()) {
    const auto idx = *res.outcome.chunk;
    buf.current_goal = memory.at(idx).kind == ChunkKind::sub_goal ? GoalKind::sub : GoalKind::main;
    memory.at(idx) = record_presentation(memory.at(idx), clock.now);
  }
  return res;
}

/// Percept for the manipulation table from the buffered positions.
inline Percept percept_from(const GoalBuffer& buf) {
  return make_percept(buf.circle_pos, buf.line_pos, buf.turn_x, buf.turn_dy, buf.online);
}

/// Space press for a seen probe; clears the flag. Not applicable unless the
/// sub goal is current and the flag is on.
inline std::optional<MotorCommand> probe_respond(GoalBuffer& buf) {
  if (buf.current_goal != GoalKind::sub || !buf.flag) return std::nullopt;
  buf.flag = false;
  return MotorCommand::Space;
}

/// Buffer-stuffed probe: fires for a visible, unconfirmed probe.
inline bool confirm_probe(bool probe_visible_unconfirmed, GoalBuffer& buf) {
  if (!probe_visible_unconfirmed) return false;
  buf.flag = true;
  return true;
}

}  // namespace immersion
