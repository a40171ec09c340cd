// Batch-level acceptance checks. Prints one PASS/FAIL line per criterion and
// leaves the four main batches under --out for inspection with `report`.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "immersion/batch.hpp"
#include "immersion/report.hpp"

namespace fs = std::filesystem;
using namespace immersion;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Kernel values against independently evaluated references.

Outcome kernel_exactness() {
  struct Case {
    const char* what;
    double got;
    double want;
  };
  const auto ref = load_human_reference();
  ActivationParams p;
  p.fan_includes_self = false;
  AssociationTable assoc;
  assoc.associate(kFlagOn, "sub-goal");
  const Chunk sub{"sub-goal", ChunkKind::sub_goal, 5, 0.0, {}};
  const Chunk main{"main-goal", ChunkKind::main_goal, 1800, 0.0, {}};
  ArousalState tracking;
  tracking.mode = ArousalMode::score_tracking;
  tracking.alpha = 1.15;
  tracking.score_goal = 80;
  const auto had_sd = ref.coefficients(Indicator::rt_std, HumanCondition::HAD);

  // Base levels evaluated with Python's math module.
  const Case cases[] = {
      {"B(5, 1800)", base_level(5, 1800, 0.5, 4), 2.5548141210519177},
      {"B(1800, 1800)", base_level(1800, 1800, 0.5, 4), 8.440918152502073},
      {"B(1, 1)", base_level(1, 1, 0.5, 0), 0.6931471805599453},
      {"r(g=c)", compute_r(55, 55, 1.3), 1.3},
      {"r(100, 0)", compute_r(100, 0, 1.0), 0.0},
      {"r(90, 70)", compute_r(90, 70, 1.2), 0.96},
      {"r tracking 80/80", r_for_frame(tracking, 80), 1.15},
      {"r tracking 80/40", r_for_frame(tracking, 40), 0.69},
      {"S no flag", spreading({}, sub, assoc, p), 0.0},
      {"S flag->sub", spreading({kFlagOn}, sub, assoc, p), 16.84},
      {"S flag->main", spreading({kFlagOn}, main, assoc, p), 0.0},
      {"LAD rt at x=0", eval_quadratic(ref.coefficients(Indicator::rt_mean, HumanCondition::LAD), 0), 3.1077},
      {"LAD offline at x=1", human_curve(ref, Indicator::offline_ratio, HumanCondition::LAD)[0], 0.0436},
      {"HAD rt_std b0", had_sd[0], 3.6245},
      {"HAD rt_std b1", had_sd[1], 0.2876},
      {"HAD rt_std b2", had_sd[2], -0.0076},
  };
  double worst = 0.0;
  std::string bad;
  for (const auto& c : cases) {
    const double err = std::abs(c.got - c.want);
    if (err > worst) worst = err;
    if (err > 1e-6) bad += std::string(" ") + c.what;
  }
  return {bad.empty(), fmt("%zu values, max abs error %.2e", std::size(cases), worst) + (bad.empty() ? "" : "; off:" + bad)};
}

// ---------------------------------------------------------------------------
// 2. Arousal damps noise: P(sub wins) with a 0.5 gap in B + S.

Outcome arousal_scaling() {
  // Literal spreading with W = 1/2 puts the main goal exactly 0.5 above the
  // sub goal, whose base level is identical.
  ActivationParams p;
  p.spreading = SpreadingMode::literal;
  DeclarativeMemory m(p);
  m.add(Chunk{"main-goal", ChunkKind::main_goal, 10, -100.0, {}});
  m.add(Chunk{"sub-goal", ChunkKind::sub_goal, 10, -100.0, {}});
  m.associations().associate({"cue", "main"}, "main-goal");
  const SpreadingContext ctx{{"cue", "main"}, {"other", "x"}};
  const ChunkKind kinds[] = {ChunkKind::main_goal, ChunkKind::sub_goal};
  const long n = 100000;
  const double rs[] = {0.5, 1.0, 1.5};
  Interval ci[3];
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    Rng rng(1000 + i);
    long wins = 0;
    for (long t = 0; t < n; ++t) wins += *m.retrieve(kinds, ctx, rs[i], 0.0, &rng).chunk == 1;
    ci[i] = wilson_interval(wins, n, 0.99);
    detail += fmt("r=%.1f P=%.4f [%.4f, %.4f]  ", rs[i], double(wins) / n, ci[i].lo, ci[i].hi);
  }
  return {ci[2].hi < ci[1].lo && ci[1].hi < ci[0].lo, detail};
}

// ---------------------------------------------------------------------------
// Batches.

struct RunSet {
  RunConfig config;
  Batch batch;
  BatchSummary summary;
  std::vector<double> trace_mean_r;  // per run, trace records from round 2 on
  long scheduled = 0;
};

RunSet collect(RunConfig cfg, int n, std::uint64_t seed, const HumanReference& ref, const fs::path& out) {
  RunSet s;
  cfg.seed = seed;
  s.config = cfg;
  const CourseSpec course = course_for(cfg);
  s.batch.config = cfg;
  for (int i = 0; i < n; ++i) {
    RunConfig rc = cfg;
    rc.seed = seed + static_cast<std::uint64_t>(i);
    rc.trace = true;
    RunResult r = simulate_run(rc, course);
    double sum = 0.0;
    long k = 0;
    for (const auto& t : r.trace)
      if (t.time >= cfg.env.round_s) sum += t.r, ++k;
    s.trace_mean_r.push_back(k ? sum / k : std::nan(""));
    r.trace.clear();
    r.trace.shrink_to_fit();
    Rng prng = make_stream(rc.seed, Stream::probes);
    s.scheduled += static_cast<long>(
        schedule_probes(cfg.env.duration_s, cfg.env.probe_mean_s, cfg.env.probe_sd_s, prng).size());
    s.batch.runs.push_back({i, rc.seed, std::move(r), {}});
  }
  s.summary = summarize(batch_data(s.batch), ref);
  if (!out.empty()) {
    emit_batch(s.batch, out);
    write_analysis(s.summary, out);
    write_plots(s.summary, ref, out);
  }
  return s;
}

RunConfig make(Condition c, int param) {
  RunConfig cfg;
  cfg.condition = c;
  cfg.param_set = param;
  return cfg;
}

std::optional<FitMetrics> fit_against(const BatchSummary& s, HumanCondition h, Indicator i) {
  for (const auto& f : s.human_fits)
    if (f.human == h && f.indicator == i) return f.metrics;
  return std::nullopt;
}

// 3. Sub-goal learning in mLAD / param 1.
Outcome subgoal_learning(const RunSet& lad1) {
  const auto& s = lad1.summary;
  if (!s.rt_fit) return {false, "RT series has too few defined rounds"};
  const auto fit = fit_against(s, HumanCondition::LAD, Indicator::rt_mean);
  const bool slope = s.rt_fit->coef[1] < 0.0 && s.rt_fit->p[1] < 0.05;
  const bool good = fit && fit->r && *fit->r >= 0.6 && fit->rmse <= 2.5;
  return {slope && good, fmt("linear %.4f (p=%.2g), vs LAD R=%.3f RMSE=%.3f", s.rt_fit->coef[1], s.rt_fit->p[1],
                             fit && fit->r ? *fit->r : std::nan(""), fit ? fit->rmse : std::nan(""))};
}

// 4. Missing-probe deficit.
Outcome missing_deficit(const RunSet& had2, const RunSet& had1, const RunSet& lad1) {
  const double frac = double(had2.summary.probes.missing) / double(had2.scheduled);
  const bool pass = frac > 0.5 && had1.summary.probes.missing == 0 && lad1.summary.probes.missing == 0;
  return {pass, fmt("mHAD/2 missing %ld of %ld scheduled (%.1f%%); mHAD/1 missing %ld; mLAD/1 missing %ld",
                    had2.summary.probes.missing, had2.scheduled, 100.0 * frac, had1.summary.probes.missing,
                    lad1.summary.probes.missing)};
}

// 5. mHAD above mLAD in mean RT and across-run STD, per parameter set.
Outcome ordering(const RunSet& lad, const RunSet& had, int param) {
  const auto m = pair_defined(had.summary.rt.mean, lad.summary.rt.mean);
  const auto d = pair_defined(had.summary.rt.sd, lad.summary.rt.sd);
  const auto tm = paired_t(m.a, m.b);
  const auto td = paired_t(d.a, d.b);
  const double hm = defined_mean(had.summary.rt.mean), lm = defined_mean(lad.summary.rt.mean);
  const double hs = defined_mean(had.summary.rt.sd), ls = defined_mean(lad.summary.rt.sd);
  const bool pass = hm > lm && hs > ls && tm.p_greater < 0.05 && td.p_greater < 0.05;
  return {pass, fmt("param %d: RT %.3f vs %.3f (t(%g)=%.2f, p=%.3g); STD %.3f vs %.3f (t(%g)=%.2f, p=%.3g)", param, hm,
                    lm, tm.df, tm.t, tm.p_greater, hs, ls, td.df, td.t, td.p_greater)};
}

// 6. Main-goal learning with and without the tracker.
PairedT early_late(const RunSet& s) {
  std::vector<double> early, late;
  for (const auto* r : s.batch.ok()) {
    double e = 0, l = 0;
    for (int k = 0; k < 5; ++k) e += r->offline_ratio[k];
    for (int k = 24; k < 30; ++k) l += r->offline_ratio[k];
    early.push_back(e / 5);
    late.push_back(l / 6);
  }
  return paired_t(late, early);
}

Outcome main_goal_learning(const RunSet& lad1, const RunSet& frozen) {
  const auto on = early_late(lad1), off = early_late(frozen);
  const bool pass = on.mean_diff < 0 && on.p_less < 0.05 && !(off.mean_diff < 0 && off.p_less < 0.05);
  return {pass, fmt("late-early %.4f (t=%.2f, p=%.3g); tracker off %.4f (t=%.2f, p=%.3g)", on.mean_diff, on.t,
                    on.p_less, off.mean_diff, off.t, off.p_less)};
}

// 7. Mean r from round 2 on, from the activation traces.
Outcome arousal_constraint(const RunSet& had1, const RunSet& had2) {
  const double m1 = mean(had1.trace_mean_r), m2 = mean(had2.trace_mean_r);
  return {m1 > 1.0 && m2 > 1.0, fmt("alpha %.2f: param 1 %.4f, param 2 %.4f", had1.config.alpha, m1, m2)};
}

// 8. Two `simulate` executions with the same seed and config.
Outcome determinism(const std::string& cli, const fs::path& out) {
  if (cli.empty()) return {false, "no --cli given"};
  const fs::path a = out / "determinism_a", b = out / "determinism_b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto run = [&](const fs::path& dir) {
    const std::string cmd = "\"" + cli + "\" simulate --condition mhad --param-set 1 --runs 5 --seed 77 --out \"" +
                            dir.string() + "\" > /dev/null";
    return std::system(cmd.c_str()) == 0;
  };
  if (!run(a) || !run(b)) return {false, "simulate exited with an error"};
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool same = true;
  std::string sizes;
  for (const char* f : {"rounds.csv", "probes.csv"}) {
    const auto x = slurp(a / f), y = slurp(b / f);
    same = same && !x.empty() && x == y;
    sizes += fmt("%s %zu bytes ", f, x.size());
  }
  return {same, sizes + (same ? "identical" : "differ")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli, out = "acceptance_out";
  int runs = 150;
  std::uint64_t seed = 1;
  std::vector<int> expect_fail;
  app.add_option("--cli", cli, "Path to the immersion executable");
  app.add_option("--out", out, "Directory for batch outputs");
  app.add_option("--runs", runs, "Runs per batch")->check(CLI::Range(2, 100000));
  app.add_option("--seed", seed, "Base seed");
  app.add_option("--expect-fail", expect_fail, "Criteria known not to hold; reported but not fatal");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(out);
  fs::create_directories(dir);
  const auto ref = load_human_reference();

  std::vector<std::pair<int, std::function<Outcome()>>> checks;
  checks.emplace_back(1, kernel_exactness);
  checks.emplace_back(2, arousal_scaling);

  std::printf("running batches: %d runs, base seed %llu\n", runs, static_cast<unsigned long long>(seed));
  std::fflush(stdout);
  const auto lad1 = collect(make(Condition::mLAD, 1), runs, seed, ref, dir / "mlad_p1");
  const auto had1 = collect(make(Condition::mHAD, 1), runs, seed, ref, dir / "mhad_p1");
  const auto lad2 = collect(make(Condition::mLAD, 2), runs, seed, ref, dir / "mlad_p2");
  const auto had2 = collect(make(Condition::mHAD, 2), runs, seed, ref, dir / "mhad_p2");
  auto frozen_cfg = make(Condition::mLAD, 1);
  frozen_cfg.tracker.enabled = false;
  const auto frozen = collect(frozen_cfg, runs, seed, ref, {});

  checks.emplace_back(3, [&] { return subgoal_learning(lad1); });
  checks.emplace_back(4, [&] { return missing_deficit(had2, had1, lad1); });
  checks.emplace_back(5, [&] {
    const auto a = ordering(lad1, had1, 1), b = ordering(lad2, had2, 2);
    return Outcome{a.pass && b.pass, a.detail + "; " + b.detail};
  });
  checks.emplace_back(6, [&] { return main_goal_learning(lad1, frozen); });
  checks.emplace_back(7, [&] { return arousal_constraint(had1, had2); });
  checks.emplace_back(8, [&] { return determinism(cli, dir); });

  const std::set<int> tolerated(expect_fail.begin(), expect_fail.end());
  int fatal = 0;
  for (auto& [id, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool known = tolerated.count(id) > 0;
    std::printf("criterion %d: %s  %s%s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(),
                !o.pass && known ? "  [known infeasible, not fatal]" : "");
    if (!o.pass && !known) ++fatal;
    if (o.pass && known) std::printf("criterion %d: passed although listed as expected to fail\n", id);
  }
  std::fflush(stdout);
  return fatal == 0 ? 0 : 1;
}
