#pragma once

// Scrolling polyline courses. A course is a closed loop of 48 px segments; the
// line under the circle moves by the segment's dx for every scrolled pixel.

#include <array>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "immersion/random.hpp"

namespace immersion {

inline constexpr int kSegmentHeight = 48;
inline constexpr double kCourseStartX = 320.0;
inline constexpr double kCourseHalfWidth = 240.0;

enum class CourseKind { simple, difficult };

inline const char* to_string(CourseKind k) { return k == CourseKind::simple ? "simple" : "difficult"; }

inline CourseKind parse_course_kind(const std::string& s) {
  if (s == "simple") return CourseKind::simple;
  if (s == "difficult") return CourseKind::difficult;
  throw std::invalid_argument("unknown course kind: " + s);
}

inline int frames_per_lap(CourseKind k) { return k == CourseKind::simple ? 1500 : 4500; }

/// Horizontal line displacement per scrolled pixel for an angle label.
/// 30/150 move two pixels so a held key tracks them exactly; 45/135 move one.
inline int dx_for_angle(int angle_label) {
  switch (angle_label) {
    case 30: return 2;
    case 45: return 1;
    case 90: return 0;
    case 135: return -1;
    case 150: return -2;
    default: throw std::invalid_argument("angle label must be one of 30, 45, 90, 135, 150");
  }
}

struct Segment {
  int angle_label = 90;
  int height = kSegmentHeight;
  int dx_per_scroll_px = 0;

  static Segment make(int angle_label, int height = kSegmentHeight) {
    return Segment{angle_label, height, dx_for_angle(angle_label)};
  }
  bool operator==(const Segment&) const = default;
};

/// Line vertex ahead of the circle.
struct TurnAhead {
  double x = 0.0;
  long dy = 0;  // scroll pixels until the vertex reaches the circle row
};

class CourseSpec {
 public:
  CourseSpec() = default;

  /// Validates and closes the course. When the 48 px segments fall short of
  /// the lap length the remainder is a vertical filler.
  CourseSpec(CourseKind kind, std::vector<Segment> segments, int lap_frames)
      : kind_(kind), segments_(std::move(segments)), frames_per_lap_(lap_frames) {
    if (lap_frames <= 0) throw std::invalid_argument("frames_per_lap must be positive");
    long total = 0;
    for (const auto& s : segments_) {
      if (s.height != kSegmentHeight) throw std::invalid_argument("course segments must be 48 px high");
      if (s.dx_per_scroll_px != dx_for_angle(s.angle_label)) throw std::invalid_argument("segment dx inconsistent");
      total += s.height;
    }
    if (total > lap_frames) throw std::invalid_argument("course segments exceed the lap length");
    filler_ = static_cast<int>(lap_frames - total);

    xs_.assign(static_cast<std::size_t>(lap_frames) + 1, kCourseStartX);
    long y = 0;
    for (const auto& s : segments_)
      for (int k = 0; k < s.height; ++k, ++y) xs_[y + 1] = xs_[y] + s.dx_per_scroll_px;
    for (; y < lap_frames; ++y) xs_[y + 1] = xs_[y];
    if (xs_.back() != xs_.front()) throw std::invalid_argument("course is not a closed loop");

    // Vertices where the direction changes; the wrap point counts too.
    std::vector<int> dxs;
    for (long i = 0; i < lap_frames; ++i) dxs.push_back(static_cast<int>(xs_[i + 1] - xs_[i]));
    for (long i = 0; i < lap_frames; ++i) {
      const int before = dxs[(i + lap_frames - 1) % lap_frames];
      if (before != dxs[i]) turns_.push_back(i);
    }
  }

  CourseKind kind() const { return kind_; }
  const std::vector<Segment>& segments() const { return segments_; }
  int frames_per_lap() const { return frames_per_lap_; }
  int filler_height() const { return filler_; }
  const std::vector<long>& turns() const { return turns_; }

  double line_x(long scroll) const { return xs_[static_cast<std::size_t>(wrap(scroll))]; }

  TurnAhead next_turn(long scroll) const {
    if (turns_.empty()) return {line_x(scroll), frames_per_lap_};
    const long s = wrap(scroll);
    for (long t : turns_)
      if (t > s) return {line_x(t), t - s};
    const long t = turns_.front() + frames_per_lap_;
    return {line_x(t), t - s};
  }

  /// Fraction of segments labelled 45 or 135.
  double shallow_fraction() const {
    if (segments_.empty()) return 0.0;
    int n = 0;
    for (const auto& s : segments_) n += (s.angle_label == 45 || s.angle_label == 135);
    return static_cast<double>(n) / static_cast<double>(segments_.size());
  }

  /// Direction changes per 100 scrolled pixels.
  double turn_density() const { return 100.0 * static_cast<double>(turns_.size()) / frames_per_lap_; }

 private:
  long wrap(long scroll) const {
    long s = scroll % frames_per_lap_;
    return s < 0 ? s + frames_per_lap_ : s;
  }

  CourseKind kind_ = CourseKind::simple;
  std::vector<Segment> segments_;
  int frames_per_lap_ = 0;
  int filler_ = 0;
  std::vector<double> xs_;
  std::vector<long> turns_;
};

namespace detail {

struct CourseProfile {
  std::array<double, 5> weights;  // 30, 45, 90, 135, 150
  int min_run;
  int max_run;
  int vertical_min = 0;  // 90-degree run inserted after every sloped run
  int vertical_max = 0;
};

inline CourseProfile profile_for(CourseKind k) {
  // Simple: short shallow runs between long vertical stretches, so turns are
  // sparse. Difficult: back-to-back short runs dominated by the 45/135 lines
  // that need press-and-release control.
  if (k == CourseKind::simple) return {{0.45, 0.05, 0.0, 0.05, 0.45}, 1, 2, 2, 4};
  return {{0.10, 0.30, 0.25, 0.30, 0.05}, 1, 2, 0, 0};
}

inline constexpr std::array<int, 5> kAngles{30, 45, 90, 135, 150};

}  // namespace detail

/// Random closed course with the lap length of `kind`.
inline CourseSpec generate_course(CourseKind kind, Rng& rng) {
  const int lap = frames_per_lap(kind);
  const int n_segments = lap / kSegmentHeight;
  const auto prof = detail::profile_for(kind);
  const long max_step = 2L * kSegmentHeight;

  std::vector<Segment> segs;
  long offset = 0;  // px from the start x
  auto feasible = [&](int angle, long remaining_after) {
    const long next = offset + static_cast<long>(dx_for_angle(angle)) * kSegmentHeight;
    return std::labs(next) <= remaining_after * max_step && std::labs(next) <= static_cast<long>(kCourseHalfWidth);
  };
  auto pick = [&]() {
    double total = 0.0;
    for (double w : prof.weights) total += w;
    double u = rng.uniform_open() * total;
    for (std::size_t i = 0; i < prof.weights.size(); ++i) {
      if (u < prof.weights[i]) return detail::kAngles[i];
      u -= prof.weights[i];
    }
    return detail::kAngles.back();
  };

  int previous = -1;
  while (static_cast<int>(segs.size()) < n_segments) {
    const bool vertical_run = prof.vertical_max > 0 && previous != -1 && previous != 90;
    int angle = vertical_run ? 90 : pick();
    if (angle == previous) continue;  // each run starts with a direction change
    const int lo = vertical_run ? prof.vertical_min : prof.min_run;
    const int hi = vertical_run ? prof.vertical_max : prof.max_run;
    int run = lo + static_cast<int>(rng.bits() % static_cast<std::uint64_t>(hi - lo + 1));
    for (int k = 0; k < run && static_cast<int>(segs.size()) < n_segments; ++k) {
      const long remaining_after = n_segments - static_cast<long>(segs.size()) - 1;
      int chosen = angle;
      if (!feasible(chosen, remaining_after)) {
        // Forced return toward the start: pick the candidate that brings the
        // offset closest to zero.
        long best = -1;
        for (int a : detail::kAngles) {
          if (!feasible(a, remaining_after)) continue;
          const long d = std::labs(offset + static_cast<long>(dx_for_angle(a)) * kSegmentHeight);
          if (best < 0 || d < best) {
            best = d;
            chosen = a;
          }
        }
      }
      segs.push_back(Segment::make(chosen));
      offset += static_cast<long>(dx_for_angle(chosen)) * kSegmentHeight;
      if (chosen != angle) break;
    }
    previous = segs.back().angle_label;
  }
  return CourseSpec(kind, std::move(segs), lap);
}

// Course file: '#' comments, a header with `kind` and `frames_per_lap`, then
// one `<angle_label> <repeat_count>` line per run of identical segments.

inline void write_course(std::ostream& os, const CourseSpec& c) {
  os << "# line-following course\n";
  os << "kind " << to_string(c.kind()) << "\n";
  os << "frames_per_lap " << c.frames_per_lap() << "\n";
  const auto& segs = c.segments();
  for (std::size_t i = 0; i < segs.size();) {
    std::size_t j = i;
    while (j < segs.size() && segs[j].angle_label == segs[i].angle_label) ++j;
    os << segs[i].angle_label << " " << (j - i) << "\n";
    i = j;
  }
}

inline CourseSpec read_course(std::istream& is) {
  std::optional<CourseKind> kind;
  std::optional<int> lap;
  std::vector<Segment> segs;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string head;
    if (!(ls >> head)) continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error("course file line " + std::to_string(lineno) + ": " + what);
    };
    if (head == "kind") {
      std::string k;
      if (!(ls >> k)) fail("missing kind");
      kind = parse_course_kind(k);
    } else if (head == "frames_per_lap") {
      int n = 0;
      if (!(ls >> n)) fail("missing frames_per_lap");
      lap = n;
    } else {
      int angle = 0, count = 0;
      try {
        angle = std::stoi(head);
      } catch (const std::exception&) {
        fail("expected '<angle_label> <repeat_count>'");
      }
      if (!(ls >> count) || count <= 0) fail("bad repeat count");
      for (int k = 0; k < count; ++k) segs.push_back(Segment::make(angle));
    }
  }
  if (!kind || !lap) throw std::runtime_error("course file: header needs kind and frames_per_lap");
  return CourseSpec(*kind, std::move(segs), *lap);
}

inline CourseSpec load_course(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open course file: " + path);
  try {
    return read_course(in);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

}  // namespace immersion
