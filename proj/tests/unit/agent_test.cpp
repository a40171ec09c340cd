#include <cmath>

#include <gtest/gtest.h>

#include "immersion/agent.hpp"
#include "immersion/simulation.hpp"
#include "immersion/stats.hpp"

using namespace immersion;

namespace {

DeclarativeMemory param_one_memory() {
  DeclarativeMemory m;
  m.add(Chunk{"main-goal", ChunkKind::main_goal, 1800, -1800.0, {}});
  m.add(Chunk{"sub-goal", ChunkKind::sub_goal, 5, -1800.0, {}});
  m.associations().associate(kFlagOn, "sub-goal");
  return m;
}

Thetas flat(double v) {
  Thetas t;
  t.fill(v);
  return t;
}

}  // namespace

TEST(Perception, CopiesWorldAndKeepsFlag) {
  const auto course = seeded_course(CourseKind::simple, 1);
  WorldState w = initial_world(course);
  w.circle_x = 300;
  GoalBuffer buf;
  buf.flag = true;
  buf.current_goal = GoalKind::sub;
  perception(buf, w, course);
  EXPECT_EQ(buf.circle_pos, 300);
  EXPECT_EQ(buf.line_pos, course.line_x(0));
  EXPECT_TRUE(buf.flag);
  EXPECT_EQ(buf.current_goal, GoalKind::sub);
  const GoalBuffer once = buf;
  perception(buf, w, course);
  EXPECT_EQ(buf.circle_pos, once.circle_pos);
  EXPECT_EQ(buf.line_pos, once.line_pos);
  EXPECT_EQ(buf.turn_x, once.turn_x);
  EXPECT_EQ(buf.turn_dy, once.turn_dy);
}

TEST(Objective, MainGoalWithoutFlag) {
  for (auto ctx : {SpreadingContextKind::flag_only, SpreadingContextKind::goal_buffer}) {
    auto m = param_one_memory();
    GoalBuffer buf;
    CycleClock clock;
    const auto res = objective(buf, m, 1.0, clock, nullptr, ctx);
    EXPECT_EQ(buf.current_goal, GoalKind::main);
    EXPECT_EQ(m.at(0).num, 1801);
    EXPECT_GE(clock.now, 0.05);
    ASSERT_TRUE(res.a_main && res.a_sub);
    EXPECT_GT(*res.a_main, *res.a_sub);
  }
}

TEST(Objective, SubGoalWithFlagInFlagOnlyContext) {
  auto m = param_one_memory();
  GoalBuffer buf;
  buf.flag = true;
  CycleClock clock;
  objective(buf, m, 1.0, clock, nullptr, SpreadingContextKind::flag_only);
  EXPECT_EQ(buf.current_goal, GoalKind::sub);
  EXPECT_EQ(m.at(1).num, 6);
}

TEST(Objective, HighArousalWinsSubGoalLessOften) {
  // Goal-buffer context: the flag's share of spreading leaves the sub goal
  // just below the main goal, so noise decides.
  auto m = param_one_memory();
  GoalBuffer buf;
  buf.flag = true;
  const auto ctx = buf.context(SpreadingContextKind::goal_buffer);
  const ChunkKind kinds[] = {ChunkKind::main_goal, ChunkKind::sub_goal};
  auto wins = [&](double r, std::uint64_t seed) {
    Rng rng(seed);
    long w = 0;
    for (int i = 0; i < 100000; ++i) w += *m.retrieve(kinds, ctx, r, 0.0, &rng).chunk == 1;
    return w;
  };
  const long at1 = wins(1.0, 1), at15 = wins(1.5, 2);
  EXPECT_LT(at15, at1);
  EXPECT_LT(wilson_interval(at15, 100000, 0.99).hi, wilson_interval(at1, 100000, 0.99).lo);
}

TEST(ProbeRespond, NeedsSubGoalAndFlag) {
  GoalBuffer buf;
  EXPECT_FALSE(probe_respond(buf));
  buf.current_goal = GoalKind::sub;
  EXPECT_FALSE(probe_respond(buf));
  buf.flag = true;
  EXPECT_EQ(probe_respond(buf), MotorCommand::Space);
  EXPECT_FALSE(buf.flag);
}

TEST(ProbeRespond, MainGoalReturnsAfterResponse) {
  auto m = param_one_memory();
  GoalBuffer buf;
  buf.flag = true;
  CycleClock clock;
  objective(buf, m, 1.0, clock, nullptr, SpreadingContextKind::flag_only);
  ASSERT_EQ(buf.current_goal, GoalKind::sub);
  probe_respond(buf);
  objective(buf, m, 1.0, clock, nullptr, SpreadingContextKind::flag_only);
  EXPECT_EQ(buf.current_goal, GoalKind::main);
}

TEST(ConfirmProbe, OnlyForVisibleProbe) {
  GoalBuffer buf;
  EXPECT_FALSE(confirm_probe(false, buf));
  EXPECT_FALSE(buf.flag);
  EXPECT_TRUE(confirm_probe(true, buf));
  EXPECT_TRUE(buf.flag);
}

TEST(Manipulation, LeftTowardFarGoal) {
  // Circle 100 px right of the line; the next turn sits on the line's side.
  const Percept p = make_percept(400, 300, 310, 0, false);
  ASSERT_EQ(classify_goal(p, 48), GoalRange::Far);
  Thetas th = flat(5);
  EXPECT_EQ(select_motor_action(CurrentAction::Stop, p, th, 48), MotorCommand::Left);
  EXPECT_EQ(select_motor_action(CurrentAction::Stop, make_percept(200, 300, 290, 0, false), th, 48),
            MotorCommand::Right);
}

TEST(Manipulation, StopWhenCloseEnough) {
  const Percept p = make_percept(305, 300, 300, 50, true);
  Thetas th = flat(10);
  th[5] = 0;
  EXPECT_EQ(select_motor_action(CurrentAction::Left, p, th, 48), MotorCommand::Stop);
}

TEST(Manipulation, StopAfterCrossingTheLine) {
  const Percept p = make_percept(290, 300, 300, 50, false);
  EXPECT_EQ(select_motor_action(CurrentAction::Left, p, flat(0), 48), MotorCommand::Stop);
}

TEST(Manipulation, ContinueWhenNoRowHolds) {
  const Percept p = make_percept(300, 300, 300, 50, true);
  EXPECT_EQ(select_motor_action(CurrentAction::Stop, p, flat(5), 48), MotorCommand::Continue);
}

TEST(Manipulation, HandState) {
  EXPECT_EQ(action_after(CurrentAction::Stop, MotorCommand::Left), CurrentAction::Left);
  EXPECT_EQ(action_after(CurrentAction::Left, MotorCommand::Continue), CurrentAction::Left);
  EXPECT_EQ(action_after(CurrentAction::Right, MotorCommand::RightPunch), CurrentAction::Stop);
  EXPECT_EQ(press_count(MotorCommand::LeftPunch), 2);
  EXPECT_EQ(press_count(MotorCommand::Continue), 0);
}

TEST(Clock, DurationNoiseStaysInBand) {
  Rng rng(5);
  CycleClock c;
  EXPECT_EQ(c.duration(0.1), 0.1);
  c.randomize_time = 3;
  c.timing_rng = &rng;
  for (int i = 0; i < 1000; ++i) {
    const double d = c.duration(0.3);
    ASSERT_GE(d, 0.2);
    ASSERT_LE(d, 0.4);
  }
  c.fire();
  EXPECT_DOUBLE_EQ(c.now, 0.05);
  EXPECT_THROW(c.advance(-1), std::invalid_argument);
}

TEST(Cycle, MainGoalCycleEmitsOneCommandAndTakesThreeFirings) {
  RunConfig cfg;
  cfg.env.probe_mean_s = 5000;  // no probe in the window below
  Simulation sim(cfg, course_for(cfg));
  for (int i = 0; i < 200; ++i) {
    const double t0 = sim.clock().now;
    const auto rep = sim.run_cycle();
    ASSERT_EQ(rep.commands.size(), 1u);
    EXPECT_NE(rep.commands[0], MotorCommand::Space);
    EXPECT_GE(sim.clock().now - t0, 0.15 - 1e-12);
  }
}

TEST(Cycle, FlagRaisedOnlyAtCycleBoundary) {
  RunConfig cfg;
  Simulation sim(cfg, course_for(cfg));
  const double onset = sim.probes().onsets().front();
  while (sim.clock().now < onset) {
    sim.run_cycle();
    if (sim.clock().now < onset) {
      EXPECT_FALSE(sim.buffer().flag);
    }
  }
  const auto rep = sim.run_cycle();
  ASSERT_FALSE(rep.trace.empty());
  EXPECT_EQ(rep.trace.front().rule, Rule::confirm_probe);
}

TEST(Cycle, OneSpacePerAnsweredProbe) {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    RunConfig cfg;
    cfg.seed = seed;
    const auto r = simulate_run(cfg);
    long responded = 0;
    for (const auto& p : r.probes) responded += p.response_time.has_value();
    EXPECT_EQ(r.space_presses, responded);
  }
}
