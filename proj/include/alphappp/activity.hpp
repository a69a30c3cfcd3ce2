#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace alphappp {

/// Declaration order doubles as display order: ▶ first, ■ last.
enum class ActivityKind : std::uint8_t { start = 0, observed = 1, loop = 2, skip = 3, end = 4 };

/// An activity label. Artificial activities (▶, ■, loop and skip τs) are
/// identified structurally, so they can never collide with an observed name.
class Activity {
 public:
  Activity() = default;

  static Activity observed(std::string name) { return Activity(ActivityKind::observed, std::move(name), {}); }
  static Activity start() { return Activity(ActivityKind::start, {}, {}); }
  static Activity end() { return Activity(ActivityKind::end, {}, {}); }

  /// Loop-back activity placed between `from` (b) and `to` (a) of a detected loop (b,a).
  static Activity loop(std::string from, std::string to) {
    return Activity(ActivityKind::loop, std::move(from), {std::move(to)});
  }

  /// Skip activity placed after `anchor` whenever none of `skippable` follows it.
  static Activity skip(std::string anchor, std::vector<std::string> skippable) {
    std::sort(skippable.begin(), skippable.end());
    skippable.erase(std::unique(skippable.begin(), skippable.end()), skippable.end());
    return Activity(ActivityKind::skip, std::move(anchor), std::move(skippable));
  }

  ActivityKind kind() const noexcept { return kind_; }
  bool is_observed() const noexcept { return kind_ == ActivityKind::observed; }
  bool is_endpoint() const noexcept { return kind_ == ActivityKind::start || kind_ == ActivityKind::end; }
  bool is_artificial() const noexcept { return kind_ == ActivityKind::loop || kind_ == ActivityKind::skip; }

  /// Observed name; for loop activities the loop-back source; for skips the anchor.
  const std::string& name() const noexcept { return name_; }
  const std::string& loop_target() const { return payload_.at(0); }
  const std::vector<std::string>& skippable() const noexcept { return payload_; }

  std::string label() const {
    switch (kind_) {
      case ActivityKind::start: return "▶";
      case ActivityKind::end: return "■";
      case ActivityKind::observed: return name_;
      case ActivityKind::loop: return "τ_loop(" + name_ + "," + payload_.at(0) + ")";
      case ActivityKind::skip: {
        std::string out = "τ_skip(" + name_ + ",{";
        for (std::size_t i = 0; i < payload_.size(); ++i) {
          if (i) out += ",";
          out += payload_[i];
        }
        return out + "})";
      }
    }
    return name_;
  }

  auto operator<=>(const Activity&) const = default;
  bool operator==(const Activity&) const = default;

 private:
  Activity(ActivityKind kind, std::string name, std::vector<std::string> payload)
      : kind_(kind), name_(std::move(name)), payload_(std::move(payload)) {}

  ActivityKind kind_ = ActivityKind::observed;
  std::string name_;
  std::vector<std::string> payload_;
};

using Trace = std::vector<Activity>;

inline Trace make_trace(std::initializer_list<const char*> names) {
  Trace out;
  out.reserve(names.size());
  for (const char* n : names) out.push_back(Activity::observed(n));
  return out;
}

inline std::vector<std::string> labels(const Trace& trace) {
  std::vector<std::string> out;
  out.reserve(trace.size());
  for (const auto& a : trace) out.push_back(a.label());
  return out;
}

}  // namespace alphappp
