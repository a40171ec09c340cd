#include <vector>

#include <gtest/gtest.h>

#include "immersion/arousal.hpp"
#include "immersion/memory.hpp"
#include "immersion/stats.hpp"

using namespace immersion;

TEST(ComputeR, ZeroMismatchGivesAlpha) {
  for (double a : {0.5, 1.0, 1.15, 2.0}) EXPECT_DOUBLE_EQ(compute_r(73.0, 73.0, a), a);
}

TEST(ComputeR, Examples) {
  EXPECT_NEAR(compute_r(100, 0, 1.0), 0.0, 1e-12);
  EXPECT_NEAR(compute_r(90, 70, 1.2), 0.96, 1e-12);
}

TEST(ComputeR, RejectsOutOfRange) {
  EXPECT_THROW(compute_r(101, 50, 1.0), std::out_of_range);
  EXPECT_THROW(compute_r(50, -1, 1.0), std::out_of_range);
  EXPECT_THROW(compute_r(50, 50, 0.0), std::out_of_range);
}

TEST(GoalScore, BestCompletedRound) {
  ArousalState s;
  s.mode = ArousalMode::score_tracking;
  std::vector<double> one{62};
  EXPECT_EQ(*update_goal_score(s, one).score_goal, 62);
  std::vector<double> three{62, 70, 65};
  EXPECT_EQ(*update_goal_score(s, three).score_goal, 70);
}

TEST(GoalScore, UnsetBeforeFirstRound) {
  ArousalState s;
  s.mode = ArousalMode::score_tracking;
  s.score_goal = 50;
  s.current_r = 0.7;
  const auto u = update_goal_score(s, {});
  EXPECT_FALSE(u.score_goal);
  EXPECT_EQ(u.current_r, 1.0);
  EXPECT_EQ(r_for_frame(u, 10.0), 1.0);
}

TEST(RForFrame, FixedNeutralIgnoresScores) {
  ArousalState s;
  s.score_goal = 80;
  for (double run : {0.0, 40.0, 80.0, 100.0}) EXPECT_EQ(r_for_frame(s, run), 1.0);
}

TEST(RForFrame, TrackingExamples) {
  ArousalState s;
  s.mode = ArousalMode::score_tracking;
  s.alpha = 1.15;
  s.score_goal = 80;
  EXPECT_NEAR(r_for_frame(s, 80), 1.15, 1e-12);
  EXPECT_NEAR(r_for_frame(s, 40), 0.69, 1e-12);
}

TEST(RForFrame, DefaultAlphaIsCalibrated) { EXPECT_DOUBLE_EQ(ArousalState{}.alpha, 1.25); }

// Two goal chunks whose B + S differ by 0.5 (literal spreading, W = 1/2)
// under logistic noise with s = 0.13.
static long sub_wins(double r, long trials, std::uint64_t seed) {
  ActivationParams p;
  p.spreading = SpreadingMode::literal;
  DeclarativeMemory m(p);
  m.add(Chunk{"main-goal", ChunkKind::main_goal, 10, -100.0, {}});
  m.add(Chunk{"sub-goal", ChunkKind::sub_goal, 10, -100.0, {}});
  m.associations().associate({"cue", "main"}, "main-goal");
  const SpreadingContext ctx{{"cue", "main"}, {"other", "x"}};
  const ChunkKind kinds[] = {ChunkKind::main_goal, ChunkKind::sub_goal};
  Rng rng(seed);
  long wins = 0;
  for (long i = 0; i < trials; ++i) wins += m.at(*m.retrieve(kinds, ctx, r, 0.0, &rng).chunk).kind == ChunkKind::sub_goal;
  return wins;
}

TEST(ArousalScaling, HighArousalDampsNoise) {
  const long n = 100000;
  const auto lo = wilson_interval(sub_wins(0.5, n, 1), n, 0.99);
  const auto mid = wilson_interval(sub_wins(1.0, n, 2), n, 0.99);
  const auto hi = wilson_interval(sub_wins(1.5, n, 3), n, 0.99);
  EXPECT_LT(hi.hi, mid.lo);
  EXPECT_LT(mid.hi, lo.lo);
}
