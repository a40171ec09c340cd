// Command-line front end: simulate, analyze, report, course.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "immersion/batch.hpp"
#include "immersion/report.hpp"

namespace fs = std::filesystem;
using namespace immersion;

namespace {

bool is_batch_dir(const fs::path& p) { return fs::exists(p / "runs.csv") && fs::exists(p / "config.json"); }

void print_summary(const BatchSummary& s, std::ostream& os) {
  os << to_string(s.config.condition) << " param " << s.config.param_set << ": " << s.runs << " runs";
  if (s.failed_runs) os << " (" << s.failed_runs << " failed)";
  os << "\n  probes: " << s.probes.answered << " answered, " << s.probes.timeout << " timeout, " << s.probes.missing
     << " missing of " << s.probes.total() << "\n";
  os << "  mean offline ratio " << defined_mean(s.offline.mean) << ", mean probe RT " << defined_mean(s.rt.mean)
     << " s, mean across-run STD " << defined_mean(s.rt.sd) << " s\n";
  if (s.rt_fit)
    os << "  RT quadratic: x coef " << s.rt_fit->coef[1] << " (p=" << s.rt_fit->p[1] << "), x2 coef "
       << s.rt_fit->coef[2] << " (p=" << s.rt_fit->p[2] << ")\n";
  for (const auto& f : s.human_fits) {
    if (f.indicator != Indicator::rt_mean) continue;
    os << "  RT fit vs " << to_string(f.human) << ": R=";
    if (f.metrics.r) os << *f.metrics.r;
    else os << "undefined";
    os << " RMSE=" << f.metrics.rmse << "\n";
  }
  if (s.config.condition == Condition::mHAD) os << "  mean r from round 2: " << s.mean_r_after_first << "\n";
}

BatchSummary analyze_dir(const fs::path& dir, const HumanReference& ref) {
  const auto s = summarize(load_batch(dir), ref);
  write_analysis(s, dir);
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arousal-modulated goal retrieval in a dual-task tracking simulation"};
  app.require_subcommand(1);
  std::string reference = IMMERSION_DATA_DIR "/human_reference.json";
  app.add_option("--reference", reference, "Human reference fixture")->check(CLI::ExistingFile);

  auto* sim = app.add_subcommand("simulate", "Run a seeded batch and write CSVs");
  std::string condition = "mlad", config_file, out_dir;
  int param = 1, runs = 150;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  bool trace = false;
  sim->add_option("--condition", condition, "mlad or mhad")->required()->check(CLI::IsMember({"mlad", "mhad"}));
  sim->add_option("--param-set", param, "Chunk history set")->required()->check(CLI::IsMember({1, 2}));
  sim->add_option("--runs", runs, "Number of runs")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Base seed; run i uses seed+i");
  sim->add_option("--config", config_file, "JSON config overriding defaults")->check(CLI::ExistingFile);
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--threads", threads, "Worker threads (0: all cores)");
  sim->add_flag("--trace", trace, "Write per-run activation traces");

  auto* ana = app.add_subcommand("analyze", "Aggregate, regress and fit a batch directory");
  std::string in_dir;
  ana->add_option("--in", in_dir, "Batch directory")->required()->check(CLI::ExistingDirectory);

  auto* rep = app.add_subcommand("report", "Plot a batch directory, or a directory of batches");
  rep->add_option("--in", in_dir, "Batch directory or parent of batch directories")
      ->required()
      ->check(CLI::ExistingDirectory);

  auto* crs = app.add_subcommand("course", "Write the generated course for a condition");
  std::string kind = "simple", course_out;
  std::uint64_t course_seed = EnvParams{}.course_seed;
  crs->add_option("--kind", kind, "simple or difficult")->check(CLI::IsMember({"simple", "difficult"}));
  crs->add_option("--course-seed", course_seed, "Generator seed");
  crs->add_option("--out", course_out, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      RunConfig cfg;
      cfg.condition = parse_condition(condition);
      cfg.param_set = param;
      if (!config_file.empty()) load_config_file(cfg, config_file);
      if (trace) cfg.trace = true;
      cfg.seed = seed;
      const auto batch = run_batch(cfg, runs, seed, threads);
      emit_batch(batch, out_dir);
      int failed = 0;
      for (const auto& r : batch.runs)
        if (!r.result) ++failed, std::cerr << "run " << r.run_id << " failed: " << r.error << "\n";
      std::cout << "wrote " << runs - failed << " runs to " << out_dir << "\n";
      if (runs - failed >= 2) print_summary(analyze_dir(out_dir, load_human_reference(reference)), std::cout);
      return failed == runs ? 1 : 0;
    }
    if (*ana) {
      print_summary(analyze_dir(in_dir, load_human_reference(reference)), std::cout);
      return 0;
    }
    if (*rep) {
      const auto ref = load_human_reference(reference);
      std::vector<fs::path> dirs;
      if (is_batch_dir(in_dir)) {
        dirs.push_back(in_dir);
      } else {
        for (const auto& e : fs::directory_iterator(in_dir))
          if (e.is_directory() && is_batch_dir(e.path())) dirs.push_back(e.path());
        std::sort(dirs.begin(), dirs.end());
      }
      if (dirs.empty()) throw std::runtime_error("no batch directories under " + in_dir);
      std::vector<std::string> labels;
      std::vector<double> means, sds;
      for (const auto& d : dirs) {
        const auto s = analyze_dir(d, ref);
        write_plots(s, ref, d);
        labels.push_back(d.filename().string());
        means.push_back(defined_mean(s.rt.mean));
        sds.push_back(defined_mean(s.rt.sd));
        std::cout << "plots written to " << d.string() << "\n";
      }
      if (dirs.size() > 1) {
        write_text(fs::path(in_dir) / "rt_comparison.svg",
                   svg_bar_pairs("Probe RT by batch", labels, means, sds));
        std::cout << "comparison written to " << (fs::path(in_dir) / "rt_comparison.svg").string() << "\n";
      }
      return 0;
    }
    if (*crs) {
      const CourseKind k = kind == "simple" ? CourseKind::simple : CourseKind::difficult;
      const auto c = seeded_course(k, course_seed);
      std::ofstream out(course_out);
      if (!out) throw std::runtime_error("cannot write " + course_out);
      write_course(out, c);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
