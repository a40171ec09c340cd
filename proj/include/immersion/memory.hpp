#pragma once

// Declarative memory: chunks, activation (base level, spreading, arousal
// scaling, logistic noise) and latency-bearing retrieval.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "immersion/random.hpp"

namespace immersion {

enum class ChunkKind { main_goal, sub_goal, other };

inline const char* to_string(ChunkKind k) {
  switch (k) {
    case ChunkKind::main_goal: return "main";
    case ChunkKind::sub_goal: return "sub";
    case ChunkKind::other: return "other";
  }
  return "?";
}

struct Chunk {
  std::string id;
  ChunkKind kind = ChunkKind::other;
  long num = 1;                     // presentation count
  double first_presentation = 0.0;  // s relative to run start; negative = before the task
  std::map<std::string, std::string> slots;

  /// Life of the chunk at `now`.
  double life(double now) const { return now - first_presentation; }
};

enum class SpreadingMode {
  indicator,  // S_ji = max_assoc - ln(fan_j) for associated pairs
  literal,    // S_ji = 1 for associated pairs
};

struct ActivationParams {
  double decay = 0.5;
  double base_offset = 4.0;
  double noise_s = 0.13;
  double max_assoc = 16.84;
  double retrieval_threshold = 0.0;
  double latency_factor = 1.0;
  SpreadingMode spreading = SpreadingMode::indicator;
  // ACT-R counts the source itself in its fan.
  bool fan_includes_self = true;

  void validate() const {
    if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("memory.decay must lie in (0, 1)");
    if (!(noise_s > 0.0)) throw std::invalid_argument("memory.noise_s must be positive");
    if (!(latency_factor > 0.0)) throw std::invalid_argument("memory.latency_factor must be positive");
  }
};

/// A spreading source: one filled goal-buffer slot and its value.
struct Source {
  std::string slot;
  std::string value;
  auto operator<=>(const Source&) const = default;
};

/// Snapshot of the sources active at retrieval time. Every filled slot counts
/// toward the 1/n weight, associated or not.
using SpreadingContext = std::vector<Source>;

class AssociationTable {
 public:
  void associate(const Source& source, const std::string& chunk_id) { entries_[source].insert(chunk_id); }

  bool associated(const Source& source, const std::string& chunk_id) const {
    auto it = entries_.find(source);
    return it != entries_.end() && it->second.count(chunk_id) > 0;
  }

  int fan(const Source& source, bool include_self) const {
    auto it = entries_.find(source);
    int n = it == entries_.end() ? 0 : static_cast<int>(it->second.size());
    return n + (include_self ? 1 : 0);
  }

  /// Effective S_ji. Zero when the pair is not associated.
  double strength(const Source& source, const std::string& chunk_id, const ActivationParams& p) const {
    if (!associated(source, chunk_id)) return 0.0;
    if (p.spreading == SpreadingMode::literal) return 1.0;
    double s = p.max_assoc - std::log(static_cast<double>(fan(source, p.fan_includes_self)));
    return std::max(0.0, s);
  }

 private:
  std::map<Source, std::set<std::string>> entries_;
};

/// Optimized-learning base level: ln(num / (1 - d)) - d ln(L) + beta.
inline double base_level(double num, double life, double decay, double beta) {
  if (!(num >= 1.0)) throw std::domain_error("base_level: presentation count must be >= 1");
  if (!(life > 0.0)) throw std::domain_error("base_level: chunk life must be positive");
  if (!(decay > 0.0 && decay < 1.0)) throw std::domain_error("base_level: decay must lie in (0, 1)");
  return std::log(num / (1.0 - decay)) - decay * std::log(life) + beta;
}

inline double base_level(const Chunk& c, double now, const ActivationParams& p) {
  return base_level(static_cast<double>(c.num), c.life(now), p.decay, p.base_offset);
}

inline double spreading(const SpreadingContext& context, const Chunk& target, const AssociationTable& assoc,
                        const ActivationParams& p) {
  if (context.empty()) return 0.0;
  const double w = 1.0 / static_cast<double>(context.size());
  double total = 0.0;
  for (const auto& src : context) total += w * assoc.strength(src, target.id, p);
  return total;
}

/// Logistic(0, s) draw by inversion.
inline double sample_noise(double s, Rng& rng) {
  if (!(s > 0.0)) throw std::invalid_argument("sample_noise: scale must be positive");
  const double u = rng.uniform_open();
  return s * std::log(u / (1.0 - u));
}

/// r (B + S): the arousal-scaled, noise-free part of the activation.
inline double scaled_activation(const Chunk& chunk, const SpreadingContext& context, const AssociationTable& assoc,
                                double r, double now, const ActivationParams& p) {
  if (!(r >= 0.0)) throw std::invalid_argument("activation coefficient must be non-negative");
  return r * (base_level(chunk, now, p) + spreading(context, chunk, assoc, p));
}

/// r (B + S) + eps. The noise term is not scaled by r. `rng == nullptr`
/// suppresses the noise.
inline double total_activation(const Chunk& chunk, const SpreadingContext& context, const AssociationTable& assoc,
                               double r, double now, const ActivationParams& p, Rng* rng) {
  const double a = scaled_activation(chunk, context, assoc, r, now, p);
  return rng ? a + sample_noise(p.noise_s, *rng) : a;
}

struct Candidate {
  std::size_t index;
  double activation;
};

struct RetrievalOutcome {
  std::optional<std::size_t> chunk;  // index into the store; empty on failure
  double activation = 0.0;           // winning (or best) activation
  double latency = 0.0;              // s
  std::vector<Candidate> candidates;

  bool failed() const { return !chunk.has_value(); }
};

class EmptyCandidateSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Chunk store with the retrieval rule: argmax activation over the chunks of
/// the requested kind, failing below the retrieval threshold.
class DeclarativeMemory {
 public:
  DeclarativeMemory() = default;
  explicit DeclarativeMemory(ActivationParams params) : params_(params) { params_.validate(); }

  std::size_t add(Chunk c) {
    chunks_.push_back(std::move(c));
    return chunks_.size() - 1;
  }

  const Chunk& at(std::size_t i) const { return chunks_.at(i); }
  Chunk& at(std::size_t i) { return chunks_.at(i); }
  std::span<const Chunk> chunks() const { return chunks_; }

  std::optional<std::size_t> find(ChunkKind kind) const {
    for (std::size_t i = 0; i < chunks_.size(); ++i)
      if (chunks_[i].kind == kind) return i;
    return std::nullopt;
  }

  AssociationTable& associations() { return assoc_; }
  const AssociationTable& associations() const { return assoc_; }
  const ActivationParams& params() const { return params_; }

  /// `kinds` filters candidates; noise is drawn fresh per candidate.
  RetrievalOutcome retrieve(std::span<const ChunkKind> kinds, const SpreadingContext& context, double r, double now,
                            Rng* rng) const {
    RetrievalOutcome out;
    double best = -std::numeric_limits<double>::infinity();
    std::optional<std::size_t> best_idx;
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
      bool match = false;
      for (auto k : kinds) match = match || chunks_[i].kind == k;
      if (!match) continue;
      const double a = total_activation(chunks_[i], context, assoc_, r, now, params_, rng);
      out.candidates.push_back({i, a});
      if (a > best) {
        best = a;
        best_idx = i;
      }
    }
    if (!best_idx) throw EmptyCandidateSet("retrieve: no chunk matches the request");
    out.activation = best;
    if (best >= params_.retrieval_threshold) {
      out.chunk = best_idx;
      out.latency = params_.latency_factor * std::exp(-best);
    } else {
      out.latency = params_.latency_factor * std::exp(-params_.retrieval_threshold);
    }
    return out;
  }

 private:
  ActivationParams params_{};
  AssociationTable assoc_;
  std::vector<Chunk> chunks_;
};

/// One more presentation of the chunk; its first presentation stays put.
inline Chunk record_presentation(Chunk c, double now) {
  if (now < c.first_presentation) throw std::invalid_argument("record_presentation: time precedes first presentation");
  ++c.num;
  return c;
}

}  // namespace immersion
