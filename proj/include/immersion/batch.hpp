#pragma once

// Seeded batches and the CSV files they leave behind.
//
//   rounds.csv   run_id,round,offline_ratio
//   probes.csv   run_id,onset_s,rt_s,status        (rt_s empty unless answered)
//   arousal.csv  run_id,round,mean_r
//   runs.csv     run_id,seed,ok,degenerate,error
//   config.json  the full run configuration
//   traces/run_<id>.csv  frame,sim_time,fired_rule,goal,A_main,A_sub,r   (optional)

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "immersion/analysis.hpp"
#include "immersion/simulation.hpp"

namespace immersion {

struct BatchRun {
  int run_id = 0;
  std::uint64_t seed = 0;
  std::optional<RunResult> result;
  std::string error;  // set when the run threw
};

struct Batch {
  RunConfig config;
  std::vector<BatchRun> runs;

  std::vector<const RunResult*> ok() const {
    std::vector<const RunResult*> v;
    for (const auto& r : runs)
      if (r.result) v.push_back(&*r.result);
    return v;
  }
};

/// Runs seeds base_seed..base_seed+n-1. Each run depends only on its seed,
/// so the worker count does not affect the results.
inline Batch run_batch(RunConfig cfg, int n_runs, std::uint64_t base_seed, unsigned threads = 0) {
  if (n_runs < 1) throw std::invalid_argument("run_batch: n_runs must be at least 1");
  cfg.validate();
  const CourseSpec course = course_for(cfg);
  Batch b{cfg, std::vector<BatchRun>(static_cast<std::size_t>(n_runs))};
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n_runs));

  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < n_runs; i = next++) {
      BatchRun& slot = b.runs[static_cast<std::size_t>(i)];
      slot.run_id = i;
      slot.seed = base_seed + static_cast<std::uint64_t>(i);
      RunConfig rc = cfg;
      rc.seed = slot.seed;
      try {
        slot.result = simulate_run(rc, course);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return b;
}

namespace detail {

inline std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

inline void check_written(std::ofstream& out, const std::filesystem::path& p) {
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

}  // namespace detail

inline void write_trace(const std::filesystem::path& p, const std::vector<TraceRecord>& trace) {
  auto out = detail::open_out(p);
  out << "frame,sim_time,fired_rule,goal,A_main,A_sub,r\n";
  for (const auto& t : trace) {
    out << t.frame << ',' << detail::fmt_num(t.time) << ',' << to_string(t.rule) << ',' << to_string(t.goal) << ','
        << (t.a_main ? detail::fmt_num(*t.a_main) : "") << ',' << (t.a_sub ? detail::fmt_num(*t.a_sub) : "") << ','
        << detail::fmt_num(t.r) << '\n';
  }
  detail::check_written(out, p);
}

/// Writes the raw per-run files of a batch into dir.
inline void emit_batch(const Batch& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    const auto p = dir / "config.json";
    auto out = detail::open_out(p);
    out << to_json(b.config).dump(2) << '\n';
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "runs.csv";
    auto out = detail::open_out(p);
    out << "run_id,seed,ok,degenerate,error\n";
    for (const auto& r : b.runs) {
      std::string err = r.error;
      std::replace(err.begin(), err.end(), ',', ';');
      std::replace(err.begin(), err.end(), '\n', ' ');
      out << r.run_id << ',' << r.seed << ',' << (r.result ? 1 : 0) << ','
          << (r.result && r.result->degenerate() ? 1 : 0) << ',' << err << '\n';
    }
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "rounds.csv";
    auto out = detail::open_out(p);
    out << "run_id,round,offline_ratio\n";
    for (const auto& r : b.runs) {
      if (!r.result) continue;
      for (std::size_t k = 0; k < r.result->offline_ratio.size(); ++k)
        out << r.run_id << ',' << k + 1 << ',' << detail::fmt_num(r.result->offline_ratio[k]) << '\n';
    }
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "probes.csv";
    auto out = detail::open_out(p);
    out << "run_id,onset_s,rt_s,status\n";
    for (const auto& r : b.runs) {
      if (!r.result) continue;
      for (const auto& pr : r.result->probes)
        out << r.run_id << ',' << detail::fmt_num(pr.onset) << ','
            << (pr.response_time ? detail::fmt_num(*pr.response_time) : "") << ',' << to_string(pr.status) << '\n';
    }
    detail::check_written(out, p);
  }
  {
    const auto p = dir / "arousal.csv";
    auto out = detail::open_out(p);
    out << "run_id,round,mean_r\n";
    for (const auto& r : b.runs) {
      if (!r.result) continue;
      for (std::size_t k = 0; k < r.result->mean_r.size(); ++k)
        out << r.run_id << ',' << k + 1 << ',' << detail::fmt_num(r.result->mean_r[k]) << '\n';
    }
    detail::check_written(out, p);
  }
  if (b.config.trace) {
    std::filesystem::create_directories(dir / "traces");
    for (const auto& r : b.runs)
      if (r.result) write_trace(dir / "traces" / ("run_" + std::to_string(r.run_id) + ".csv"), r.result->trace);
  }
}

/// What analyze needs from a batch, whether fresh or read back from disk.
struct BatchData {
  RunConfig config;
  std::vector<std::vector<double>> offline;               // per run, per round
  std::vector<std::vector<ProbeRecord>> probes;           // per run
  std::vector<std::vector<double>> mean_r;                // per run, per round
  int failed_runs = 0;
};

inline BatchData batch_data(const Batch& b) {
  BatchData d{b.config, {}, {}, {}, 0};
  for (const auto& r : b.runs) {
    if (!r.result) {
      ++d.failed_runs;
      continue;
    }
    d.offline.push_back(r.result->offline_ratio);
    d.probes.push_back(r.result->probes);
    d.mean_r.push_back(r.result->mean_r);
  }
  return d;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

/// Rows of a CSV file after checking its header.
inline std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p, const std::string& header) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw std::runtime_error(p.string() + ": expected header '" + header + "'");
  const auto width = split_csv_line(header).size();
  std::vector<std::vector<std::string>> rows;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != width)
      throw std::runtime_error(p.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(width) +
                               " columns");
    rows.push_back(std::move(cells));
  }
  return rows;
}

}  // namespace detail

/// Reads back the files written by emit_batch.
inline BatchData load_batch(const std::filesystem::path& dir) {
  BatchData d;
  {
    const auto p = dir / "config.json";
    std::ifstream in(p);
    if (!in) throw std::runtime_error("cannot open " + p.string());
    try {
      auto doc = nlohmann::json::parse(in);
      d.config.condition = parse_condition(doc.at("condition").get<std::string>());
      d.config.param_set = doc.at("param_set").get<int>();
      d.config.seed = doc.at("seed").get<std::uint64_t>();
      doc.erase("condition");
      doc.erase("param_set");
      doc.erase("seed");
      apply_config(d.config, doc);
    } catch (const std::exception& e) {
      throw std::runtime_error(p.string() + ": " + e.what());
    }
  }
  std::map<int, std::size_t> index;  // run_id -> slot
  for (const auto& row : detail::read_csv(dir / "runs.csv", "run_id,seed,ok,degenerate,error")) {
    if (row[2] != "1") {
      ++d.failed_runs;
      continue;
    }
    index[std::stoi(row[0])] = index.size();
  }
  const std::size_t n = index.size();
  d.offline.assign(n, std::vector<double>(kRounds, 0.0));
  d.mean_r.assign(n, std::vector<double>(kRounds, 0.0));
  d.probes.assign(n, {});
  auto slot = [&](const std::string& id, const char* file) {
    auto it = index.find(std::stoi(id));
    if (it == index.end()) throw std::runtime_error(std::string(file) + ": unknown run_id " + id);
    return it->second;
  };
  auto round_index = [](const std::string& s) {
    const int k = std::stoi(s);
    if (k < 1 || k > static_cast<int>(kRounds)) throw std::runtime_error("round out of range: " + s);
    return static_cast<std::size_t>(k - 1);
  };
  for (const auto& row : detail::read_csv(dir / "rounds.csv", "run_id,round,offline_ratio"))
    d.offline[slot(row[0], "rounds.csv")][round_index(row[1])] = std::stod(row[2]);
  for (const auto& row : detail::read_csv(dir / "arousal.csv", "run_id,round,mean_r"))
    d.mean_r[slot(row[0], "arousal.csv")][round_index(row[1])] = std::stod(row[2]);
  for (const auto& row : detail::read_csv(dir / "probes.csv", "run_id,onset_s,rt_s,status")) {
    ProbeRecord pr;
    pr.onset = std::stod(row[1]);
    if (!row[2].empty()) pr.response_time = std::stod(row[2]);
    pr.status = parse_probe_status(row[3]);
    d.probes[slot(row[0], "probes.csv")].push_back(pr);
  }
  return d;
}

}  // namespace immersion
