#pragma once

// Batch summaries (what analyze prints and writes) and static SVG plots.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "immersion/analysis.hpp"
#include "immersion/batch.hpp"

namespace immersion {

struct HumanFit {
  HumanCondition human;
  Indicator indicator;
  std::size_t n_points = 0;
  FitMetrics metrics;
};

struct BatchSummary {
  RunConfig config;
  std::size_t runs = 0;
  int failed_runs = 0;
  ProbeCounts probes;
  RoundSeries offline;
  RoundSeries rt;  // per-run round means, then across-run mean and STD
  std::optional<QuadFit> offline_fit;
  std::optional<QuadFit> rt_fit;
  std::optional<QuadFit> rt_sd_fit;
  std::vector<HumanFit> human_fits;
  std::vector<double> mean_r;  // across-run mean per round
  double mean_r_after_first = 0.0;
};

namespace detail {

inline std::optional<QuadFit> try_quad(const std::vector<double>& y) {
  const auto p = pair_defined(y, y);
  if (p.x.size() < 4) return std::nullopt;
  try {
    return quad_regression(p.x, p.a);
  } catch (const std::domain_error&) {
    return std::nullopt;
  }
}

}  // namespace detail

inline BatchSummary summarize(const BatchData& d, const HumanReference& ref) {
  BatchSummary s;
  s.config = d.config;
  s.runs = d.offline.size();
  s.failed_runs = d.failed_runs;
  std::vector<std::vector<std::optional<double>>> rt_runs;
  for (const auto& log : d.probes) {
    s.probes += count_probes(log);
    rt_runs.push_back(postprocess_probes(log, d.config.env.round_s));
  }
  s.offline = aggregate(d.offline);
  s.rt = aggregate(rt_runs);
  s.offline_fit = detail::try_quad(s.offline.mean);
  s.rt_fit = detail::try_quad(s.rt.mean);
  s.rt_sd_fit = detail::try_quad(s.rt.sd);

  for (HumanCondition h : {HumanCondition::LAD, HumanCondition::HAD}) {
    for (Indicator ind : {Indicator::offline_ratio, Indicator::rt_mean, Indicator::rt_std}) {
      const auto& model = ind == Indicator::offline_ratio ? s.offline.mean
                          : ind == Indicator::rt_mean     ? s.rt.mean
                                                          : s.rt.sd;
      const auto p = pair_defined(model, human_curve(ref, ind, h));
      HumanFit f{h, ind, p.x.size(), {}};
      if (p.x.size() >= 2) f.metrics = fit_metrics(p.a, p.b);
      s.human_fits.push_back(f);
    }
  }

  s.mean_r.assign(kRounds, 0.0);
  double tail = 0.0;
  std::size_t tail_n = 0;
  for (const auto& run : d.mean_r) {
    for (std::size_t k = 0; k < kRounds && k < run.size(); ++k) {
      s.mean_r[k] += run[k] / static_cast<double>(d.mean_r.size());
      if (k >= 1) {
        tail += run[k];
        ++tail_n;
      }
    }
  }
  s.mean_r_after_first = tail_n ? tail / static_cast<double>(tail_n) : 0.0;
  return s;
}

namespace detail {

inline std::string cell(double v) { return std::isnan(v) ? std::string() : fmt_num(v); }

inline nlohmann::json quad_json(const std::optional<QuadFit>& f) {
  if (!f) return nullptr;
  nlohmann::json j;
  const char* names[3] = {"intercept", "x", "x2"};
  for (int k = 0; k < 3; ++k)
    j[names[k]] = {{"coefficient", f->coef[k]}, {"se", f->se[k]}, {"t", f->t[k]}, {"p", f->p[k]}};
  return j;
}

}  // namespace detail

/// series.csv, regression.csv, fit.csv and summary.json.
inline void write_analysis(const BatchSummary& s, const std::filesystem::path& dir) {
  using detail::cell;
  {
    const auto p = dir / "series.csv";
    auto out = detail::open_out(p);
    out << "round,offline_mean,offline_sd,rt_mean,rt_sd,rt_runs,mean_r\n";
    for (std::size_t k = 0; k < kRounds; ++k)
      out << k + 1 << ',' << cell(s.offline.mean[k]) << ',' << cell(s.offline.sd[k]) << ',' << cell(s.rt.mean[k])
          << ',' << cell(s.rt.sd[k]) << ',' << s.rt.n[k] << ',' << cell(s.mean_r[k]) << '\n';
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "regression.csv";
    auto out = detail::open_out(p);
    out << "indicator,term,coefficient,se,t,p\n";
    const std::pair<const char*, const std::optional<QuadFit>*> fits[] = {
        {"offline_ratio", &s.offline_fit}, {"rt_mean", &s.rt_fit}, {"rt_std", &s.rt_sd_fit}};
    const char* terms[3] = {"intercept", "x", "x2"};
    for (const auto& [name, f] : fits) {
      if (!*f) continue;
      for (int k = 0; k < 3; ++k)
        out << name << ',' << terms[k] << ',' << cell((*f)->coef[k]) << ',' << cell((*f)->se[k]) << ','
            << cell((*f)->t[k]) << ',' << cell((*f)->p[k]) << '\n';
    }
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "fit.csv";
    auto out = detail::open_out(p);
    out << "human_condition,indicator,n_points,R,RMSE\n";
    for (const auto& f : s.human_fits) {
      out << to_string(f.human) << ',' << to_string(f.indicator) << ',' << f.n_points << ','
          << (f.metrics.r ? cell(*f.metrics.r) : "undefined") << ','
          << (f.n_points >= 2 ? cell(f.metrics.rmse) : "") << '\n';
    }
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "summary.json";
    nlohmann::json j;
    j["condition"] = to_string(s.config.condition);
    j["param_set"] = s.config.param_set;
    j["runs"] = s.runs;
    j["failed_runs"] = s.failed_runs;
    j["probes"] = {{"answered", s.probes.answered},
                   {"timeout", s.probes.timeout},
                   {"missing", s.probes.missing},
                   {"total", s.probes.total()}};
    j["regression"] = {{"offline_ratio", detail::quad_json(s.offline_fit)},
                       {"rt_mean", detail::quad_json(s.rt_fit)},
                       {"rt_std", detail::quad_json(s.rt_sd_fit)}};
    j["mean_r_from_round_2"] = s.mean_r_after_first;
    auto out = detail::open_out(p);
    out << j.dump(2) << '\n';
    detail::check_written(out, p);
  }
}

// ---- plots ---------------------------------------------------------------

struct PlotLine {
  std::string label;
  std::vector<double> y;  // NaN gaps allowed
  std::string colour;
  bool dashed = false;
  std::vector<double> band;  // optional +/- half-width per point
};

/// A minimal line chart over rounds 1..n.
inline std::string svg_line_chart(const std::string& title, const std::string& y_label,
                                  const std::vector<PlotLine>& lines) {
  const double W = 640, H = 400, L = 70, R = 170, T = 40, B = 50;
  double lo = 0.0, hi = 0.0;
  bool first = true;
  std::size_t n = 0;
  for (const auto& l : lines) {
    n = std::max(n, l.y.size());
    for (std::size_t i = 0; i < l.y.size(); ++i) {
      if (std::isnan(l.y[i])) continue;
      const double b = l.band.empty() || std::isnan(l.band[i]) ? 0.0 : l.band[i];
      if (first) lo = l.y[i] - b, hi = l.y[i] + b, first = false;
      lo = std::min(lo, l.y[i] - b);
      hi = std::max(hi, l.y[i] + b);
    }
  }
  lo = std::min(lo, 0.0);
  if (hi <= lo) hi = lo + 1.0;
  hi += (hi - lo) * 0.05;
  auto px = [&](double x) { return L + (x - 1.0) / std::max<double>(1.0, static_cast<double>(n) - 1.0) * (W - L - R); };
  auto py = [&](double y) { return T + (hi - y) / (hi - lo) * (H - T - B); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 5; ++k) {
    const double v = lo + (hi - lo) * k / 5.0;
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">" << detail::fmt_num(std::round(v * 1000) / 1000)
      << "</text>\n";
  }
  for (std::size_t x = 1; x <= n; x += (n > 10 ? 5 : 1)) {
    o << "<text x=\"" << px(static_cast<double>(x)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << x
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">round</text>\n";
  o << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const auto& l = lines[li];
    if (!l.band.empty()) {
      for (std::size_t i = 0; i < l.y.size(); ++i) {
        if (std::isnan(l.y[i]) || std::isnan(l.band[i])) continue;
        const double x = px(static_cast<double>(i + 1));
        o << "<line x1=\"" << x << "\" y1=\"" << py(l.y[i] - l.band[i]) << "\" x2=\"" << x << "\" y2=\""
          << py(l.y[i] + l.band[i]) << "\" stroke=\"" << l.colour << "\" stroke-opacity=\"0.35\"/>\n";
      }
    }
    o << "<polyline fill=\"none\" stroke=\"" << l.colour << "\" stroke-width=\"1.8\""
      << (l.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < l.y.size(); ++i) {
      if (std::isnan(l.y[i])) continue;
      o << px(static_cast<double>(i + 1)) << ',' << py(l.y[i]) << ' ';
    }
    o << "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(li);
    o << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << l.colour << "\" stroke-width=\"1.8\"" << (l.dashed ? " stroke-dasharray=\"5,4\"" : "")
      << "/>\n";
    o << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\">" << l.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  auto out = detail::open_out(p);
  out << text;
  detail::check_written(out, p);
}

/// Per-batch plots: offline ratio, probe RT mean and RT STD with the human
/// reference curves dashed.
inline void write_plots(const BatchSummary& s, const HumanReference& ref, const std::filesystem::path& dir) {
  const std::string tag = std::string(to_string(s.config.condition)) + " / param " + std::to_string(s.config.param_set);
  const std::string model = s.config.condition == Condition::mLAD ? "mLAD" : "mHAD";
  write_text(dir / "offline_ratio.svg",
             svg_line_chart("Offline ratio (" + tag + ")", "offline ratio",
                            {{model, s.offline.mean, "#1f77b4", false, s.offline.sd},
                             {"human LAD", human_curve(ref, Indicator::offline_ratio, HumanCondition::LAD), "#2ca02c", true, {}},
                             {"human HAD", human_curve(ref, Indicator::offline_ratio, HumanCondition::HAD), "#d62728", true, {}}}));
  write_text(dir / "rt_mean.svg",
             svg_line_chart("Probe RT mean (" + tag + ")", "RT (s)",
                            {{model, s.rt.mean, "#1f77b4", false, s.rt.sd},
                             {"human LAD", human_curve(ref, Indicator::rt_mean, HumanCondition::LAD), "#2ca02c", true, {}},
                             {"human HAD", human_curve(ref, Indicator::rt_mean, HumanCondition::HAD), "#d62728", true, {}}}));
  write_text(dir / "rt_std.svg",
             svg_line_chart("Probe RT STD (" + tag + ")", "STD (s)",
                            {{model, s.rt.sd, "#1f77b4", false, {}},
                             {"human LAD", human_curve(ref, Indicator::rt_std, HumanCondition::LAD), "#2ca02c", true, {}},
                             {"human HAD", human_curve(ref, Indicator::rt_std, HumanCondition::HAD), "#d62728", true, {}}}));
}

/// Side-by-side bars of batch mean RT and mean across-run STD.
inline std::string svg_bar_pairs(const std::string& title, const std::vector<std::string>& labels,
                                 const std::vector<double>& mean_rt, const std::vector<double>& sd_rt) {
  const double W = 640, H = 360, L = 60, T = 40, B = 60;
  double hi = 0.0;
  for (double v : mean_rt) hi = std::max(hi, v);
  for (double v : sd_rt) hi = std::max(hi, v);
  if (hi <= 0.0) hi = 1.0;
  hi *= 1.1;
  const double slot = (W - L - 20) / std::max<double>(1.0, static_cast<double>(labels.size()));
  auto py = [&](double y) { return T + (hi - y) / hi * (H - T - B); };
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - 20 << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x0 = L + slot * static_cast<double>(i) + slot * 0.15;
    const double bw = slot * 0.33;
    o << "<rect x=\"" << x0 << "\" y=\"" << py(mean_rt[i]) << "\" width=\"" << bw << "\" height=\""
      << (H - B) - py(mean_rt[i]) << "\" fill=\"#1f77b4\"/>\n";
    o << "<rect x=\"" << x0 + bw << "\" y=\"" << py(sd_rt[i]) << "\" width=\"" << bw << "\" height=\""
      << (H - B) - py(sd_rt[i]) << "\" fill=\"#ff7f0e\"/>\n";
    o << "<text x=\"" << x0 + bw << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << labels[i]
      << "</text>\n";
  }
  o << "<rect x=\"" << L << "\" y=\"" << H - 22 << "\" width=\"12\" height=\"10\" fill=\"#1f77b4\"/><text x=\""
    << L + 16 << "\" y=\"" << H - 13 << "\">mean RT (s)</text>\n";
  o << "<rect x=\"" << L + 120 << "\" y=\"" << H - 22 << "\" width=\"12\" height=\"10\" fill=\"#ff7f0e\"/><text x=\""
    << L + 136 << "\" y=\"" << H - 13 << "\">across-run STD (s)</text>\n";
  o << "</svg>\n";
  return o.str();
}

/// Mean over the defined points of a series.
inline double defined_mean(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v)
    if (!std::isnan(x)) s += x, ++n;
  return n ? s / static_cast<double>(n) : std::nan("");
}

}  // namespace immersion
