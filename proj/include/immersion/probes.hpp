#pragma once

// Probe schedule and the answered / timeout / missing bookkeeping.

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "immersion/random.hpp"

namespace immersion {

/// Inter-onset gaps below this are redrawn up to it.
inline constexpr double kMinProbeGapS = 1.0;

/// Onsets at cumulative gaps drawn from Normal(mean, sd), floored at 1 s.
inline std::vector<double> schedule_probes(double duration_s, double mean_s, double sd_s, Rng& rng) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("schedule_probes: duration must be positive");
  std::vector<double> onsets;
  double t = 0.0;
  for (;;) {
    t += std::max(kMinProbeGapS, rng.normal(mean_s, sd_s));
    if (t >= duration_s) break;
    onsets.push_back(t);
  }
  return onsets;
}

enum class ProbeStatus { answered, timeout, missing };

inline const char* to_string(ProbeStatus s) {
  switch (s) {
    case ProbeStatus::answered: return "answered";
    case ProbeStatus::timeout: return "timeout";
    case ProbeStatus::missing: return "missing";
  }
  return "?";
}

inline ProbeStatus parse_probe_status(const std::string& s) {
  if (s == "answered") return ProbeStatus::answered;
  if (s == "timeout") return ProbeStatus::timeout;
  if (s == "missing") return ProbeStatus::missing;
  throw std::invalid_argument("unknown probe status: " + s);
}

struct ProbeRecord {
  double onset = 0.0;
  std::optional<double> response_time;  // s after onset; empty when never answered
  ProbeStatus status = ProbeStatus::answered;
};

/// Probe display state. At most one probe is visible; a probe left
/// unanswered at the next onset is replaced by it, and that successor was on
/// screen continuously so it is excluded from the analysis.
class ProbeState {
 public:
  ProbeState() = default;
  explicit ProbeState(std::vector<double> onsets) : onsets_(std::move(onsets)) {
    if (!std::is_sorted(onsets_.begin(), onsets_.end())) throw std::invalid_argument("probe onsets must be sorted");
  }

  /// Advances to `now`, optionally with a response at `now`. Returns true if
  /// the response hit a visible probe.
  bool tick(double now, bool response = false) {
    if (now < last_) throw std::invalid_argument("probe_tick: time must be monotone");
    last_ = now;
    while (next_ < onsets_.size() && onsets_[next_] <= now) open(onsets_[next_++]);
    if (!response || !visible()) return false;
    auto& rec = log_.back();
    rec.response_time = now - rec.onset;
    rec.status = successor_missing_ ? ProbeStatus::missing : ProbeStatus::answered;
    successor_missing_ = false;
    answered_active_ = true;
    return true;
  }

  bool visible() const { return !log_.empty() && !answered_active_ && !closed_; }
  std::optional<std::size_t> active() const {
    if (!visible()) return std::nullopt;
    return log_.size() - 1;
  }
  double onset_of_active() const { return log_.empty() ? 0.0 : log_.back().onset; }
  bool active_confirmed() const { return visible() && confirmed_; }
  void confirm() {
    if (visible()) confirmed_ = true;
  }

  /// Closes the run. A probe still on screen never reached its outcome and is
  /// dropped from the log.
  void finish() {
    if (visible()) log_.pop_back();
    closed_ = true;
  }

  const std::vector<ProbeRecord>& log() const { return log_; }
  const std::vector<double>& onsets() const { return onsets_; }

 private:
  void open(double onset) {
    if (visible()) {
      // Replaced before an answer.
      auto& rec = log_.back();
      if (!successor_missing_) rec.status = ProbeStatus::timeout;
      successor_missing_ = true;
    }
    ProbeRecord rec;
    rec.onset = onset;
    rec.status = successor_missing_ ? ProbeStatus::missing : ProbeStatus::answered;
    log_.push_back(rec);
    answered_active_ = false;
    confirmed_ = false;
  }

  std::vector<double> onsets_;
  std::vector<ProbeRecord> log_;
  std::size_t next_ = 0;
  double last_ = 0.0;
  bool answered_active_ = false;
  bool confirmed_ = false;
  bool successor_missing_ = false;
  bool closed_ = false;
};

}  // namespace immersion
