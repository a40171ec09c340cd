#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "immersion/stats.hpp"
#include "immersion/tracker.hpp"

using namespace immersion;

TEST(Feedback, Transitions) {
  auto on = feedback_from_transition(false, 12, true, 9, 0.1);
  ASSERT_TRUE(on);
  EXPECT_EQ(on->kind, FeedbackKind::offline_to_online);
  EXPECT_EQ(on->magnitude, 1.0);
  auto off = feedback_from_transition(true, 9, false, 12, 0.1);
  ASSERT_TRUE(off);
  EXPECT_EQ(off->magnitude, -1.0);
  auto approach = feedback_from_transition(false, 20, false, 15, 0.1);
  ASSERT_TRUE(approach);
  EXPECT_EQ(approach->kind, FeedbackKind::approaching_while_offline);
  EXPECT_NEAR(approach->magnitude, 0.1, 1e-15);
  auto recede = feedback_from_transition(false, -15, false, -20, 0.1, 0.3);
  ASSERT_TRUE(recede);
  EXPECT_NEAR(recede->magnitude, -0.3, 1e-15);
  EXPECT_NEAR(feedback_from_transition(false, 15, false, 20, 0.1)->magnitude, -0.1, 1e-15);
  EXPECT_FALSE(feedback_from_transition(true, 1, true, 2, 0.1));
  EXPECT_FALSE(feedback_from_transition(false, 20, false, 20, 0.1));
}

TEST(Proposal, ColdTemperatureConvergesToBest) {
  TrackerParams p;
  auto s = TrackerState::initial(p);
  s.best_thetas = {1, 2, 3, 4, 5, 6};
  s.temperature = 1e-9;
  Rng rng(1);
  const auto th = propose_thetas(s, p, rng);
  for (std::size_t i = 0; i < th.size(); ++i) EXPECT_NEAR(th[i], s.best_thetas[i], 1e-7);
}

TEST(Proposal, SameSeedSameProposal) {
  TrackerParams p;
  const auto s = TrackerState::initial(p);
  Rng a(9), b(9);
  EXPECT_EQ(propose_thetas(s, p, a), propose_thetas(s, p, b));
}

TEST(Proposal, SpreadScalesWithTemperature) {
  TrackerParams p;
  auto s = TrackerState::initial(p);  // thetas at 24, far from the bounds
  auto spread = [&](double temp) {
    s.temperature = temp;
    Rng rng(4);
    std::vector<double> first;
    for (int i = 0; i < 1000; ++i) first.push_back(propose_thetas(s, p, rng)[0]);
    return sample_sd(first);
  };
  const double lo = spread(1.0), hi = spread(4.0);
  EXPECT_NEAR(lo, 1.0, 0.1);
  EXPECT_NEAR(hi / lo, 4.0, 0.2);
}

TEST(Proposal, ClampedToBounds) {
  TrackerParams p;
  auto s = TrackerState::initial(p);
  s.temperature = 1000;
  Rng rng(2);
  for (int i = 0; i < 100; ++i)
    for (double th : propose_thetas(s, p, rng)) {
      ASSERT_GE(th, p.theta_min);
      ASSERT_LE(th, p.theta_max);
    }
}

TEST(Update, GreedyKeepsTheBest) {
  TrackerParams p;
  auto s = TrackerState::initial(p);
  s.thetas = {1, 1, 1, 1, 1, 1};
  s = update_tracker(s, 5.0, p);
  EXPECT_EQ(s.best_thetas, s.thetas);
  EXPECT_EQ(*s.best_feedback, 5.0);

  const Thetas good = s.best_thetas;
  s.thetas = {2, 2, 2, 2, 2, 2};
  s = update_tracker(s, 3.0, p);
  EXPECT_EQ(s.best_thetas, good);

  s.thetas = {3, 3, 3, 3, 3, 3};
  s = update_tracker(s, 7.0, p);
  EXPECT_EQ(s.best_thetas, s.thetas);
  EXPECT_EQ(s.history.size(), 3u);
  EXPECT_EQ(s.accumulated_feedback, 0.0);
}

TEST(Update, GeometricCooling) {
  TrackerParams p;
  auto s = TrackerState::initial(p);
  for (int k = 1; k <= 20; ++k) {
    s = update_tracker(s, 0.0, p);
    EXPECT_NEAR(s.temperature, p.t0 * std::pow(p.cooling, k), 1e-12);
  }
}

TEST(Update, MetropolisSometimesTakesWorse) {
  TrackerParams p;
  p.metropolis = true;
  Rng rng(3);
  int taken = 0;
  for (int i = 0; i < 200; ++i) {
    auto s = TrackerState::initial(p);
    s = update_tracker(s, 10.0, p, &rng);
    s.thetas = {0, 0, 0, 0, 0, 0};
    s = update_tracker(s, 9.0, p, &rng);
    taken += s.best_thetas == s.thetas;
  }
  EXPECT_GT(taken, 0);
  EXPECT_LT(taken, 200);
}
