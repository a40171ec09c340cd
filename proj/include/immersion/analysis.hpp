#pragma once

// Per-round series from run results, across-run aggregation, and the human
// reference curves.

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "immersion/probes.hpp"
#include "immersion/stats.hpp"

namespace immersion {

inline constexpr std::size_t kRounds = 30;

enum class Indicator { offline_ratio, rt_mean, rt_std };
enum class HumanCondition { LAD, HAD };

inline const char* to_string(Indicator i) {
  switch (i) {
    case Indicator::offline_ratio: return "offline_ratio";
    case Indicator::rt_mean: return "rt_mean";
    case Indicator::rt_std: return "rt_std";
  }
  return "?";
}
inline const char* to_string(HumanCondition c) { return c == HumanCondition::LAD ? "LAD" : "HAD"; }

inline Indicator parse_indicator(const std::string& s) {
  if (s == "offline_ratio") return Indicator::offline_ratio;
  if (s == "rt_mean") return Indicator::rt_mean;
  if (s == "rt_std") return Indicator::rt_std;
  throw std::invalid_argument("unknown indicator: " + s);
}
inline HumanCondition parse_human_condition(const std::string& s) {
  if (s == "LAD") return HumanCondition::LAD;
  if (s == "HAD") return HumanCondition::HAD;
  throw std::invalid_argument("unknown human condition: " + s);
}

/// Quadratic coefficients (intercept, x, x^2) per indicator and condition.
struct HumanReference {
  std::map<std::pair<Indicator, HumanCondition>, std::array<double, 3>> curves;

  const std::array<double, 3>& coefficients(Indicator i, HumanCondition c) const {
    auto it = curves.find({i, c});
    if (it == curves.end())
      throw std::out_of_range(std::string("no human reference for ") + to_string(i) + "/" + to_string(c));
    return it->second;
  }
};

inline HumanReference parse_human_reference(const nlohmann::json& doc) {
  HumanReference ref;
  for (const auto& block : doc.at("regression")) {
    const auto key = std::make_pair(parse_indicator(block.at("indicator").get<std::string>()),
                                    parse_human_condition(block.at("condition").get<std::string>()));
    std::array<double, 3> c{};
    bool seen[3] = {false, false, false};
    for (const auto& row : block.at("rows")) {
      const auto var = row.at("variable").get<std::string>();
      const int k = var == "intercept" ? 0 : var == "x" ? 1 : var == "x2" ? 2 : -1;
      if (k < 0) throw std::invalid_argument("human reference: unknown variable " + var);
      c[k] = row.at("coefficient").get<double>();
      seen[k] = true;
    }
    if (!(seen[0] && seen[1] && seen[2]))
      throw std::invalid_argument("human reference: incomplete coefficients for " + std::string(to_string(key.first)));
    ref.curves[key] = c;
  }
  return ref;
}

#ifndef IMMERSION_DATA_DIR
#define IMMERSION_DATA_DIR "data"
#endif

inline HumanReference load_human_reference(const std::string& path = IMMERSION_DATA_DIR "/human_reference.json") {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open human reference: " + path);
  try {
    return parse_human_reference(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

inline double eval_quadratic(const std::array<double, 3>& c, double x) { return c[0] + c[1] * x + c[2] * x * x; }

/// The reference polynomial at rounds 1..n.
inline std::vector<double> human_curve(const HumanReference& ref, Indicator i, HumanCondition c,
                                       std::size_t n = kRounds) {
  const auto& coef = ref.coefficients(i, c);
  std::vector<double> y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = eval_quadratic(coef, static_cast<double>(k + 1));
  return y;
}

inline constexpr double kTimeoutRtS = 50.0;

/// Per-round mean RT. Timeouts count as 50 s; missing probes are dropped.
/// Rounds without a usable probe are empty.
inline std::vector<std::optional<double>> postprocess_probes(const std::vector<ProbeRecord>& log,
                                                             double round_s = 60.0,
                                                             std::size_t n_rounds = kRounds) {
  std::vector<double> sum(n_rounds, 0.0);
  std::vector<int> count(n_rounds, 0);
  for (const auto& p : log) {
    double rt;
    if (p.status == ProbeStatus::answered) {
      if (!p.response_time) throw std::invalid_argument("answered probe without a response time");
      rt = *p.response_time;
    } else if (p.status == ProbeStatus::timeout) {
      rt = kTimeoutRtS;
    } else {
      continue;
    }
    auto r = static_cast<std::size_t>(std::floor(p.onset / round_s));
    if (r >= n_rounds) r = n_rounds - 1;
    sum[r] += rt;
    ++count[r];
  }
  std::vector<std::optional<double>> out(n_rounds);
  for (std::size_t r = 0; r < n_rounds; ++r)
    if (count[r] > 0) out[r] = sum[r] / count[r];
  return out;
}

struct ProbeCounts {
  long answered = 0;
  long timeout = 0;
  long missing = 0;

  long total() const { return answered + timeout + missing; }
  ProbeCounts& operator+=(const ProbeCounts& o) {
    answered += o.answered;
    timeout += o.timeout;
    missing += o.missing;
    return *this;
  }
};

inline ProbeCounts count_probes(const std::vector<ProbeRecord>& log) {
  ProbeCounts c;
  for (const auto& p : log) {
    if (p.status == ProbeStatus::answered) ++c.answered;
    else if (p.status == ProbeStatus::timeout) ++c.timeout;
    else ++c.missing;
  }
  return c;
}

/// Across-run statistics for one indicator. Rounds where fewer than two runs
/// have data carry NaN for the STD; rounds with none carry NaN for both.
struct RoundSeries {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<std::size_t> n;

  /// Indices of rounds with a defined mean.
  std::vector<std::size_t> defined_rounds() const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < mean.size(); ++i)
      if (!std::isnan(mean[i])) idx.push_back(i);
    return idx;
  }
};

inline RoundSeries aggregate(const std::vector<std::vector<std::optional<double>>>& runs,
                             std::size_t n_rounds = kRounds) {
  if (runs.size() < 2) throw std::invalid_argument("aggregate: across-run STD needs at least two runs");
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RoundSeries s{std::vector<double>(n_rounds, nan), std::vector<double>(n_rounds, nan),
                std::vector<std::size_t>(n_rounds, 0)};
  for (std::size_t r = 0; r < n_rounds; ++r) {
    std::vector<double> vals;
    for (const auto& run : runs) {
      if (run.size() != n_rounds) throw std::invalid_argument("aggregate: run has wrong number of rounds");
      if (run[r]) vals.push_back(*run[r]);
    }
    s.n[r] = vals.size();
    if (!vals.empty()) s.mean[r] = mean(vals);
    if (vals.size() >= 2) s.sd[r] = sample_sd(vals);
  }
  return s;
}

inline RoundSeries aggregate(const std::vector<std::vector<double>>& runs, std::size_t n_rounds = kRounds) {
  std::vector<std::vector<std::optional<double>>> wrapped;
  wrapped.reserve(runs.size());
  for (const auto& run : runs) wrapped.emplace_back(run.begin(), run.end());
  return aggregate(wrapped, n_rounds);
}

/// Pairs of (round x, value) where both a and b are defined.
struct Paired {
  std::vector<double> x, a, b;
};

inline Paired pair_defined(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("pair_defined: series differ in length");
  Paired p;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::isnan(a[i]) || std::isnan(b[i])) continue;
    p.x.push_back(static_cast<double>(i + 1));
    p.a.push_back(a[i]);
    p.b.push_back(b[i]);
  }
  return p;
}

/// Quadratic fit over the defined rounds of a series (x = round index).
inline QuadFit quad_regression_defined(const std::vector<double>& y) {
  const auto p = pair_defined(y, y);
  return quad_regression(p.x, p.a);
}

}  // namespace immersion
