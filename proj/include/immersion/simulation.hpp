#pragma once

// One seeded run: agent, world, probes, arousal and tracker stepped together
// as a single deterministic state machine.

#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "immersion/agent.hpp"
#include "immersion/arousal.hpp"
#include "immersion/config.hpp"
#include "immersion/course.hpp"
#include "immersion/memory.hpp"
#include "immersion/motor.hpp"
#include "immersion/probes.hpp"
#include "immersion/random.hpp"
#include "immersion/tracker.hpp"
#include "immersion/world.hpp"

namespace immersion {

struct TraceRecord {
  long frame = 0;
  double time = 0.0;
  Rule rule = Rule::perception;
  GoalKind goal = GoalKind::main;
  std::optional<double> a_main;
  std::optional<double> a_sub;
  double r = 1.0;
  std::optional<MotorCommand> command;
};

struct RunResult {
  std::uint64_t seed = 0;
  std::vector<double> offline_ratio;  // per round
  std::vector<double> online_pct;     // per round
  std::vector<double> mean_r;         // per round, averaged over frames
  std::vector<ProbeRecord> probes;
  std::vector<TraceRecord> trace;
  std::vector<std::pair<Thetas, double>> tracker_history;
  Thetas final_best_thetas{};
  long main_retrievals = 0;
  long sub_retrievals = 0;
  long failed_retrievals = 0;
  long space_presses = 0;
  long final_main_num = 0;
  long final_sub_num = 0;
  long cycles = 0;

  /// Stuck controller: the circle keeps crossing the line or stops short.
  bool degenerate() const { return !offline_ratio.empty() && offline_ratio.back() > 0.95; }
};

/// Commands and trace of one production loop.
struct CycleReport {
  std::vector<MotorCommand> commands;
  std::vector<TraceRecord> trace;
  std::optional<GoalKind> retrieved;
};

inline CourseSpec seeded_course(CourseKind kind, std::uint64_t course_seed) {
  Rng rng = make_stream(course_seed + static_cast<std::uint64_t>(kind), Stream::course);
  return generate_course(kind, rng);
}

inline CourseSpec course_for(const RunConfig& cfg) {
  const CourseKind kind = cfg.course_kind();
  const std::string& path = kind == CourseKind::simple ? cfg.env.course_simple : cfg.env.course_difficult;
  if (!path.empty()) {
    CourseSpec c = load_course(path);
    if (c.kind() != kind) throw std::invalid_argument(path + ": course kind does not match the condition");
    return c;
  }
  return seeded_course(kind, cfg.env.course_seed);
}

class Simulation {
 public:
  Simulation(const RunConfig& cfg, CourseSpec course)
      : cfg_(cfg),
        course_(std::move(course)),
        frame_s_(cfg.env.frame_s()),
        total_frames_(std::llround(cfg.env.duration_s / frame_s_)),
        frames_per_round_(std::llround(cfg.env.round_s / frame_s_)),
        memory_(cfg.memory),
        noise_rng_(make_stream(cfg.seed, Stream::memory_noise)),
        tracker_rng_(make_stream(cfg.seed, Stream::tracker)),
        timing_rng_(make_stream(cfg.seed, Stream::timing)) {
    cfg_.validate();
    Rng probe_rng = make_stream(cfg.seed, Stream::probes);
    probes_ = ProbeState(schedule_probes(cfg.env.duration_s, cfg.env.probe_mean_s, cfg.env.probe_sd_s, probe_rng));

    const ParamSet ps = param_set(cfg.param_set);
    main_idx_ = memory_.add(Chunk{"main-goal", ChunkKind::main_goal, ps.main_goal.num, -ps.main_goal.life, {}});
    sub_idx_ = memory_.add(Chunk{"sub-goal", ChunkKind::sub_goal, ps.sub_goal.num, -ps.sub_goal.life, {{"flag", "on"}}});
    memory_.associations().associate(kFlagOn, "sub-goal");

    arousal_.mode = cfg.arousal_mode();
    arousal_.alpha = cfg.alpha;
    tracker_ = TrackerState::initial(cfg.tracker);
    clock_.production_s = cfg.agent.production_s;
    clock_.randomize_time = cfg.agent.randomize_time;
    clock_.timing_rng = &timing_rng_;
    world_ = initial_world(course_);
    result_.seed = cfg.seed;
    probes_.tick(0.0);
  }

  // The clock holds a pointer into this object.
  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  bool finished() const { return clock_.now >= cfg_.env.duration_s; }

  /// One pass of the loop: confirm probe (when one is waiting), perception,
  /// objective, then manipulation or probe response.
  CycleReport run_cycle() {
    CycleReport rep;
    ++result_.cycles;
    sync(clock_.now);

    if (probes_.visible() && !probes_.active_confirmed()) {
      clock_.fire();
      confirm_probe(true, buffer_);
      probes_.confirm();
      rep.trace.push_back(record(Rule::confirm_probe));
    }

    // The vision module re-encodes the scene before it is transferred.
    clock_.advance(clock_.duration(cfg_.agent.visual_encoding_s));
    sync(clock_.now);
    clock_.fire();
    perception(buffer_, world_, course_, cfg_.agent.lookahead_px);
    rep.trace.push_back(record(Rule::perception));

    sync(clock_.now);
    const double r = arousal_.current_r;
    ObjectiveResult obj = objective(buffer_, memory_, r, clock_, &noise_rng_, cfg_.agent.context);
    last_a_main_ = obj.a_main;
    last_a_sub_ = obj.a_sub;
    if (obj.outcome.failed()) {
      ++result_.failed_retrievals;
    } else {
      rep.retrieved = buffer_.current_goal;
      if (buffer_.current_goal == GoalKind::main) ++result_.main_retrievals;
      else ++result_.sub_retrievals;
    }
    rep.trace.push_back(record(Rule::objective));

    sync(clock_.now);
    if (buffer_.current_goal == GoalKind::main) {
      clock_.wait_until(motor_free_);
      sync(clock_.now);
      const MotorCommand cmd =
          select_motor_action(hand_, percept_from(buffer_), tracker_.thetas,
                              cfg_.agent.far_radius_px);
      clock_.fire();
      issue(cmd, clock_.now);
      rep.commands.push_back(cmd);
      auto rec = record(Rule::manipulation);
      rec.command = cmd;
      rep.trace.push_back(rec);
    } else if (auto space = probe_respond(buffer_)) {
      clock_.wait_until(motor_free_);
      clock_.fire();
      clock_.advance(clock_.duration(cfg_.agent.press_s));
      motor_free_ = clock_.now;
      ++result_.space_presses;
      rep.commands.push_back(*space);
      auto rec = record(Rule::probe);
      rec.command = *space;
      rep.trace.push_back(rec);
      if (clock_.now <= cfg_.env.duration_s) {
        sync(clock_.now);
        probes_.tick(clock_.now, /*response=*/true);
      }
    }
    if (cfg_.trace) result_.trace.insert(result_.trace.end(), rep.trace.begin(), rep.trace.end());
    return rep;
  }

  RunResult run() {
    while (!finished()) run_cycle();
    sync(cfg_.env.duration_s);
    probes_.finish();
    result_.probes = probes_.log();
    result_.tracker_history = tracker_.history;
    result_.final_best_thetas = tracker_.best_thetas;
    result_.final_main_num = memory_.at(main_idx_).num;
    result_.final_sub_num = memory_.at(sub_idx_).num;
    return result_;
  }

  const WorldState& world() const { return world_; }
  const GoalBuffer& buffer() const { return buffer_; }
  GoalBuffer& buffer() { return buffer_; }
  const CycleClock& clock() const { return clock_; }
  const ProbeState& probes() const { return probes_; }
  const DeclarativeMemory& memory() const { return memory_; }
  DeclarativeMemory& memory() { return memory_; }
  const ArousalState& arousal() const { return arousal_; }
  const TrackerState& tracker() const { return tracker_; }
  const CourseSpec& course() const { return course_; }
  const RunResult& partial_result() const { return result_; }
  CurrentAction hand() const { return hand_; }
  void set_thetas(const Thetas& th) { tracker_.thetas = th; tracker_.best_thetas = th; }

 private:
  struct KeyEvent {
    long frame;
    KeyState state;
  };

  TraceRecord record(Rule rule) const {
    TraceRecord t;
    t.frame = world_.frame;
    t.time = clock_.now;
    t.rule = rule;
    t.goal = buffer_.current_goal;
    t.a_main = last_a_main_;
    t.a_sub = last_a_sub_;
    t.r = arousal_.current_r;
    return t;
  }

  /// First frame starting at or after `t`.
  long frame_at_or_after(double t) const { return static_cast<long>(std::ceil(t / frame_s_ - 1e-9)); }

  void issue(MotorCommand cmd, double t) {
    const double press = clock_.duration(cfg_.agent.press_s);
    const long press_frame = frame_at_or_after(t + press);
    switch (cmd) {
      case MotorCommand::Left:
        keys_.push_back({press_frame, KeyState::left});
        motor_free_ = t + press;
        break;
      case MotorCommand::Right:
        keys_.push_back({press_frame, KeyState::right});
        motor_free_ = t + press;
        break;
      case MotorCommand::Stop:
        keys_.push_back({press_frame, KeyState::none});
        motor_free_ = t + press;
        break;
      case MotorCommand::LeftPunch:
      case MotorCommand::RightPunch: {
        // Two one-frame taps.
        const KeyState dir = cmd == MotorCommand::LeftPunch ? KeyState::left : KeyState::right;
        const double tap = clock_.duration(cfg_.agent.punch_press_s);
        const long f1 = frame_at_or_after(t + tap);
        const long f2 = std::max(frame_at_or_after(t + 2.0 * tap), f1 + 2);
        keys_.push_back({f1, dir});
        keys_.push_back({f1 + 1, KeyState::none});
        keys_.push_back({f2, dir});
        keys_.push_back({f2 + 1, KeyState::none});
        motor_free_ = t + 2.0 * tap;
        break;
      }
      case MotorCommand::Continue:
      case MotorCommand::Space: break;
    }
    hand_ = action_after(hand_, cmd);
  }

  /// Steps every frame that has ended by `t`.
  void sync(double t) {
    const long target = std::min(total_frames_, static_cast<long>(std::floor(t / frame_s_ + 1e-9)));
    while (world_.frame < target) step_frame();
    probes_.tick(std::max(t_probe_floor(), std::min(t, cfg_.env.duration_s)));
  }

  double t_probe_floor() const { return static_cast<double>(world_.frame) * frame_s_; }

  void step_frame() {
    const long f = world_.frame;
    while (!keys_.empty() && keys_.front().frame <= f) {
      key_ = keys_.front().state;
      keys_.pop_front();
    }
    const WorldState prev = world_;
    world_ = step_world(world_, course_, key_, cfg_.env.tolerance_px, frame_s_);
    probes_.tick(world_.sim_time);

    if (cfg_.tracker.enabled) {
      if (auto fb = feedback_from_transition(prev.online, prev.offset(), world_.online, world_.offset(),
                                             cfg_.tracker.delta, cfg_.tracker.recede_delta))
        tracker_.accumulated_feedback += fb->magnitude;
    }

    const double running = 100.0 * static_cast<double>(world_.frames_online) / static_cast<double>(world_.frames_total);
    arousal_.current_r = r_for_frame(arousal_, running);
    round_r_sum_ += arousal_.current_r;

    if (world_.frames_total == frames_per_round_ || world_.frame == total_frames_) {
      const double online = running;
      result_.online_pct.push_back(online);
      result_.offline_ratio.push_back(offline_ratio(world_.frames_online, world_.frames_total));
      result_.mean_r.push_back(round_r_sum_ / static_cast<double>(world_.frames_total));
      round_r_sum_ = 0.0;
      world_.frames_total = 0;
      world_.frames_online = 0;
      if (arousal_.mode == ArousalMode::score_tracking) arousal_ = update_goal_score(arousal_, result_.online_pct);
    }

    if (cfg_.tracker.enabled && world_.frame % course_.frames_per_lap() == 0) {
      tracker_ = update_tracker(tracker_, tracker_.accumulated_feedback, cfg_.tracker, &tracker_rng_);
      tracker_.thetas = propose_thetas(tracker_, cfg_.tracker, tracker_rng_);
    }
  }

  RunConfig cfg_;
  CourseSpec course_;
  double frame_s_;
  long total_frames_;
  long frames_per_round_;

  DeclarativeMemory memory_;
  std::size_t main_idx_ = 0;
  std::size_t sub_idx_ = 0;
  Rng noise_rng_;
  Rng tracker_rng_;
  Rng timing_rng_;

  WorldState world_;
  ProbeState probes_;
  ArousalState arousal_;
  TrackerState tracker_;
  GoalBuffer buffer_;
  CycleClock clock_;
  CurrentAction hand_ = CurrentAction::Stop;
  std::deque<KeyEvent> keys_;
  KeyState key_ = KeyState::none;
  double motor_free_ = 0.0;
  double round_r_sum_ = 0.0;
  std::optional<double> last_a_main_;
  std::optional<double> last_a_sub_;

  RunResult result_;
};

inline RunResult simulate_run(const RunConfig& cfg, const CourseSpec& course) { return Simulation(cfg, course).run(); }

inline RunResult simulate_run(const RunConfig& cfg) { return simulate_run(cfg, course_for(cfg)); }

}  // namespace immersion
