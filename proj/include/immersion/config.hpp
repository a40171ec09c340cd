#pragma once

// Run configuration and its JSON file form. Every key is optional; missing
// keys keep the defaults below.
//
//   {
//     "memory":  {"decay", "base_offset", "noise_s", "max_assoc", "retrieval_threshold",
//                 "latency_factor", "spreading_mode", "fan_includes_self", "spreading_context"},
//     "arousal": {"mode", "alpha"},
//     "env":     {"tolerance_px", "frame_ms", "probe_mean_s", "probe_sd_s", "duration_s",
//                 "round_s", "course_simple", "course_difficult", "course_seed"},
//     "agent":   {"production_s", "visual_encoding_s", "press_s", "punch_press_s", "far_radius_px",
//                 "lookahead_px", "randomize_time"},
//     "tracker": {"enabled", "t0", "cooling", "t_floor", "delta", "recede_delta", "theta_min", "theta_max",
//                 "metropolis"},
//     "trace":   bool
//   }

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "immersion/arousal.hpp"
#include "immersion/course.hpp"
#include "immersion/memory.hpp"
#include "immersion/tracker.hpp"

namespace immersion {

enum class Condition { mLAD, mHAD };

inline const char* to_string(Condition c) { return c == Condition::mLAD ? "mlad" : "mhad"; }

inline Condition parse_condition(const std::string& s) {
  if (s == "mlad" || s == "mLAD") return Condition::mLAD;
  if (s == "mhad" || s == "mHAD") return Condition::mHAD;
  throw std::invalid_argument("unknown condition: " + s + " (expected mlad or mhad)");
}

/// Which goal-buffer slots act as spreading sources.
enum class SpreadingContextKind {
  goal_buffer,  // circle position, next turn, and flag: W = 1/3
  flag_only,    // the flag alone, and only while it is on: W = 1
};

struct ChunkInit {
  long num;
  double life;  // s since first presentation at task start
};

/// Instruction-phase history of the two goal chunks.
struct ParamSet {
  int id;
  ChunkInit main_goal;
  ChunkInit sub_goal;
};

inline ParamSet param_set(int id) {
  if (id == 1) return {1, {1800, 1800.0}, {5, 1800.0}};
  if (id == 2) return {2, {500, 1800.0}, {2, 1000.0}};
  throw std::invalid_argument("param set must be 1 or 2");
}

struct EnvParams {
  double tolerance_px = 10.0;
  double frame_ms = 40.0;
  double probe_mean_s = 50.0;
  double probe_sd_s = 5.0;
  double duration_s = 1800.0;
  double round_s = 60.0;
  std::string course_simple;  // empty: generate from course_seed
  std::string course_difficult;
  std::uint64_t course_seed = 20231;

  double frame_s() const { return frame_ms / 1000.0; }
};

struct AgentParams {
  double production_s = 0.050;
  double visual_encoding_s = 0.085;
  double press_s = 0.100;
  double punch_press_s = 0.050;
  double far_radius_px = 48.0;
  long lookahead_px = 10;  // rows above the circle where the line is read
  int randomize_time = 3;  // action-time noise divisor; 0 disables
  SpreadingContextKind context = SpreadingContextKind::goal_buffer;
};

struct RunConfig {
  Condition condition = Condition::mLAD;
  int param_set = 1;
  std::uint64_t seed = 1;
  ActivationParams memory;
  double alpha = 1.25;  // smallest 0.05 step with batch mean r > 1 from round 2 in both parameter sets
  EnvParams env;
  AgentParams agent;
  TrackerParams tracker;
  bool trace = false;

  /// mLAD: neutral arousal on the simple course. mHAD: score tracking on the
  /// difficult course.
  ArousalMode arousal_mode() const {
    return condition == Condition::mLAD ? ArousalMode::fixed_neutral : ArousalMode::score_tracking;
  }
  CourseKind course_kind() const { return condition == Condition::mLAD ? CourseKind::simple : CourseKind::difficult; }

  void validate() const {
    memory.validate();
    tracker.validate();
    (void)immersion::param_set(param_set);
    if (!(alpha > 0.0)) throw std::invalid_argument("arousal.alpha must be positive");
    if (!(env.frame_ms > 0.0)) throw std::invalid_argument("env.frame_ms must be positive");
    if (!(env.duration_s > 0.0)) throw std::invalid_argument("env.duration_s must be positive");
    if (!(env.tolerance_px >= 0.0)) throw std::invalid_argument("env.tolerance_px must be non-negative");
    if (!(agent.production_s > 0.0)) throw std::invalid_argument("agent.production_s must be positive");
    if (agent.lookahead_px < 0) throw std::invalid_argument("agent.lookahead_px must be non-negative");
    if (agent.randomize_time < 0 || agent.randomize_time == 1)
      throw std::invalid_argument("agent.randomize_time must be 0 (off) or at least 2");
  }
};

namespace detail {

template <typename T>
void read_key(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

inline void check_keys(const nlohmann::json& obj, const std::string& section,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw std::invalid_argument("unknown config key: " + section + "." + it.key());
  }
}

}  // namespace detail

/// Applies a parsed config document on top of `cfg`.
inline void apply_config(RunConfig& cfg, const nlohmann::json& doc) {
  using detail::check_keys;
  using detail::read_key;
  if (!doc.is_object()) throw std::invalid_argument("config root must be an object");
  check_keys(doc, "", {"memory", "arousal", "env", "agent", "tracker", "trace"});
  if (doc.contains("memory")) {
    const auto& m = doc.at("memory");
    check_keys(m, "memory",
               {"decay", "base_offset", "noise_s", "max_assoc", "retrieval_threshold", "latency_factor",
                "spreading_mode", "fan_includes_self", "spreading_context"});
    read_key(m, "decay", cfg.memory.decay);
    read_key(m, "base_offset", cfg.memory.base_offset);
    read_key(m, "noise_s", cfg.memory.noise_s);
    read_key(m, "max_assoc", cfg.memory.max_assoc);
    read_key(m, "retrieval_threshold", cfg.memory.retrieval_threshold);
    read_key(m, "latency_factor", cfg.memory.latency_factor);
    read_key(m, "fan_includes_self", cfg.memory.fan_includes_self);
    if (m.contains("spreading_mode")) {
      const auto s = m.at("spreading_mode").get<std::string>();
      if (s == "indicator") cfg.memory.spreading = SpreadingMode::indicator;
      else if (s == "literal") cfg.memory.spreading = SpreadingMode::literal;
      else throw std::invalid_argument("memory.spreading_mode must be indicator or literal");
    }
    if (m.contains("spreading_context")) {
      const auto s = m.at("spreading_context").get<std::string>();
      if (s == "goal-buffer") cfg.agent.context = SpreadingContextKind::goal_buffer;
      else if (s == "flag-only") cfg.agent.context = SpreadingContextKind::flag_only;
      else throw std::invalid_argument("memory.spreading_context must be goal-buffer or flag-only");
    }
  }
  if (doc.contains("arousal")) {
    const auto& a = doc.at("arousal");
    check_keys(a, "arousal", {"mode", "alpha"});
    read_key(a, "alpha", cfg.alpha);
    if (a.contains("mode")) {
      // The condition fixes the mode; a config may only restate it.
      const auto mode = parse_arousal_mode(a.at("mode").get<std::string>());
      if (mode != cfg.arousal_mode())
        throw std::invalid_argument(std::string("arousal.mode conflicts with condition ") + to_string(cfg.condition));
    }
  }
  if (doc.contains("env")) {
    const auto& e = doc.at("env");
    check_keys(e, "env",
               {"tolerance_px", "frame_ms", "probe_mean_s", "probe_sd_s", "duration_s", "round_s", "course_simple",
                "course_difficult", "course_seed"});
    read_key(e, "tolerance_px", cfg.env.tolerance_px);
    read_key(e, "frame_ms", cfg.env.frame_ms);
    read_key(e, "probe_mean_s", cfg.env.probe_mean_s);
    read_key(e, "probe_sd_s", cfg.env.probe_sd_s);
    read_key(e, "duration_s", cfg.env.duration_s);
    read_key(e, "round_s", cfg.env.round_s);
    read_key(e, "course_simple", cfg.env.course_simple);
    read_key(e, "course_difficult", cfg.env.course_difficult);
    read_key(e, "course_seed", cfg.env.course_seed);
  }
  if (doc.contains("agent")) {
    const auto& g = doc.at("agent");
    check_keys(g, "agent", {"production_s", "visual_encoding_s", "press_s", "punch_press_s", "far_radius_px", "lookahead_px",
                            "randomize_time"});
    read_key(g, "production_s", cfg.agent.production_s);
    read_key(g, "visual_encoding_s", cfg.agent.visual_encoding_s);
    read_key(g, "press_s", cfg.agent.press_s);
    read_key(g, "punch_press_s", cfg.agent.punch_press_s);
    read_key(g, "far_radius_px", cfg.agent.far_radius_px);
    read_key(g, "lookahead_px", cfg.agent.lookahead_px);
    read_key(g, "randomize_time", cfg.agent.randomize_time);
  }
  if (doc.contains("tracker")) {
    const auto& t = doc.at("tracker");
    check_keys(t, "tracker", {"enabled", "t0", "cooling", "t_floor", "delta", "recede_delta", "theta_min", "theta_max",
                             "metropolis"});
    read_key(t, "enabled", cfg.tracker.enabled);
    read_key(t, "t0", cfg.tracker.t0);
    read_key(t, "cooling", cfg.tracker.cooling);
    read_key(t, "t_floor", cfg.tracker.t_floor);
    read_key(t, "delta", cfg.tracker.delta);
    read_key(t, "recede_delta", cfg.tracker.recede_delta);
    read_key(t, "theta_min", cfg.tracker.theta_min);
    read_key(t, "theta_max", cfg.tracker.theta_max);
    read_key(t, "metropolis", cfg.tracker.metropolis);
  }
  read_key(doc, "trace", cfg.trace);
  cfg.validate();
}

inline void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  apply_config(cfg, doc);
}

/// The effective configuration, for provenance next to the outputs.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["condition"] = to_string(c.condition);
  j["param_set"] = c.param_set;
  j["seed"] = c.seed;
  j["memory"] = {{"decay", c.memory.decay},
                 {"base_offset", c.memory.base_offset},
                 {"noise_s", c.memory.noise_s},
                 {"max_assoc", c.memory.max_assoc},
                 {"retrieval_threshold", c.memory.retrieval_threshold},
                 {"latency_factor", c.memory.latency_factor},
                 {"spreading_mode", c.memory.spreading == SpreadingMode::indicator ? "indicator" : "literal"},
                 {"fan_includes_self", c.memory.fan_includes_self},
                 {"spreading_context",
                  c.agent.context == SpreadingContextKind::goal_buffer ? "goal-buffer" : "flag-only"}};
  j["arousal"] = {{"mode", to_string(c.arousal_mode())}, {"alpha", c.alpha}};
  j["env"] = {{"tolerance_px", c.env.tolerance_px},   {"frame_ms", c.env.frame_ms},
              {"probe_mean_s", c.env.probe_mean_s},   {"probe_sd_s", c.env.probe_sd_s},
              {"duration_s", c.env.duration_s},       {"round_s", c.env.round_s},
              {"course_simple", c.env.course_simple}, {"course_difficult", c.env.course_difficult},
              {"course_seed", c.env.course_seed}};
  j["agent"] = {{"production_s", c.agent.production_s},
                {"visual_encoding_s", c.agent.visual_encoding_s},
                {"press_s", c.agent.press_s},
                {"punch_press_s", c.agent.punch_press_s},
                {"far_radius_px", c.agent.far_radius_px},
                {"lookahead_px", c.agent.lookahead_px},
                {"randomize_time", c.agent.randomize_time}};
  j["tracker"] = {{"enabled", c.tracker.enabled},     {"t0", c.tracker.t0},
                  {"cooling", c.tracker.cooling},     {"t_floor", c.tracker.t_floor},
                  {"delta", c.tracker.delta},         {"recede_delta", c.tracker.recede_delta},
                  {"theta_min", c.tracker.theta_min},
                  {"theta_max", c.tracker.theta_max}, {"metropolis", c.tracker.metropolis}};
  j["trace"] = c.trace;
  return j;
}

}  // namespace immersion
