#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "alphappp/activity.hpp"
#include "alphappp/error.hpp"

namespace alphappp {

using ActivityMultiset = std::map<Activity, std::uint64_t>;

/// A multiset of traces stored as variants with positive counts.
class EventLog {
 public:
  using VariantMap = std::map<Trace, std::uint64_t>;

  EventLog() = default;
  explicit EventLog(VariantMap variants, bool augmented = false) : augmented_(augmented) {
    for (auto& [trace, count] : variants) add_trace(trace, count);
  }

  /// Adds `count` copies of `trace`; zero counts are ignored.
  void add_trace(const Trace& trace, std::uint64_t count = 1) {
    if (count == 0) return;
    variants_[trace] += count;
  }

  const VariantMap& variants() const noexcept { return variants_; }
  bool augmented() const noexcept { return augmented_; }
  bool empty() const noexcept { return variants_.empty(); }
  std::size_t num_variants() const noexcept { return variants_.size(); }

  std::uint64_t total_cases() const {
    std::uint64_t n = 0;
    for (const auto& [_, c] : variants_) n += c;
    return n;
  }

  std::uint64_t total_events() const {
    std::uint64_t n = 0;
    for (const auto& [t, c] : variants_) n += t.size() * c;
    return n;
  }

  bool operator==(const EventLog&) const = default;

 private:
  friend EventLog augment_endpoints(const EventLog& log);

  VariantMap variants_;
  bool augmented_ = false;
};

/// Occurrences of each activity, weighted by variant count.
inline ActivityMultiset activity_multiset(const EventLog& log) {
  ActivityMultiset out;
  for (const auto& [trace, count] : log.variants())
    for (const auto& a : trace) out[a] += count;
  return out;
}

inline std::set<Activity> activities(const EventLog& log) {
  std::set<Activity> out;
  for (const auto& [trace, _] : log.variants()) out.insert(trace.begin(), trace.end());
  return out;
}

/// Wraps every trace as ⟨▶⟩·σ·⟨■⟩.
inline EventLog augment_endpoints(const EventLog& log) {
  if (log.augmented()) throw Error("event log is already endpoint-augmented");
  EventLog out;
  out.augmented_ = true;
  for (const auto& [trace, count] : log.variants()) {
    Trace wrapped;
    wrapped.reserve(trace.size() + 2);
    wrapped.push_back(Activity::start());
    wrapped.insert(wrapped.end(), trace.begin(), trace.end());
    wrapped.push_back(Activity::end());
    out.add_trace(wrapped, count);
  }
  return out;
}

/// Deletes every activity outside `keep` in place; colliding projections merge.
inline EventLog project(const EventLog& log, const std::set<Activity>& keep) {
  EventLog out(EventLog::VariantMap{}, log.augmented());
  for (const auto& [trace, count] : log.variants()) {
    Trace kept;
    kept.reserve(trace.size());
    for (const auto& a : trace)
      if (a.is_endpoint() || keep.contains(a)) kept.push_back(a);
    out.add_trace(kept, count);
  }
  return out;
}

struct VariantFilter {
  enum class Mode { top_k, coverage };
  Mode mode = Mode::top_k;
  std::size_t k = 0;
  double fraction = 1.0;

  static VariantFilter top(std::size_t k) { return {Mode::top_k, k, 1.0}; }
  static VariantFilter coverage(double fraction) {
    if (!(fraction > 0.0 && fraction <= 1.0))
      throw ConfigError("coverage fraction must be in (0, 1], got " + std::to_string(fraction));
    return {Mode::coverage, 0, fraction};
  }

  /// Accepts "top:<k>" or "coverage:<fraction>".
  static VariantFilter parse(std::string_view spec) {
    auto colon = spec.find(':');
    if (colon == std::string_view::npos) throw ConfigError("variant filter must be top:<k> or coverage:<f>");
    std::string kind(spec.substr(0, colon));
    std::string value(spec.substr(colon + 1));
    try {
      std::size_t used = 0;
      if (kind == "top") {
        long long k = std::stoll(value, &used);
        if (used != value.size() || k < 0) throw ConfigError("bad k");
        return top(static_cast<std::size_t>(k));
      }
      if (kind == "coverage") {
        double f = std::stod(value, &used);
        if (used != value.size()) throw ConfigError("bad fraction");
        return coverage(f);
      }
    } catch (const std::logic_error&) {
    } catch (const ConfigError&) {
    }
    throw ConfigError("invalid variant filter '" + std::string(spec) + "'; expected top:<k> or coverage:<fraction>");
  }
};

namespace detail {

/// Variants by descending count; ties by lexicographic label sequence.
inline std::vector<std::pair<const Trace*, std::uint64_t>> ranked_variants(const EventLog& log) {
  std::vector<std::pair<const Trace*, std::uint64_t>> ranked;
  ranked.reserve(log.num_variants());
  for (const auto& [trace, count] : log.variants()) ranked.emplace_back(&trace, count);
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return labels(*x.first) < labels(*y.first);
  });
  return ranked;
}

}  // namespace detail

inline EventLog filter_variants(const EventLog& log, const VariantFilter& filter) {
  EventLog out(EventLog::VariantMap{}, log.augmented());
  auto ranked = detail::ranked_variants(log);
  if (filter.mode == VariantFilter::Mode::top_k) {
    for (std::size_t i = 0; i < ranked.size() && i < filter.k; ++i) out.add_trace(*ranked[i].first, ranked[i].second);
    return out;
  }
  const double needed = filter.fraction * static_cast<double>(log.total_cases());
  std::uint64_t covered = 0;
  for (const auto& [trace, count] : ranked) {
    if (static_cast<double>(covered) >= needed) break;
    out.add_trace(*trace, count);
    covered += count;
  }
  return out;
}

// Canonical JSON form:
//   { "variants": [ { "trace": ["a","b"], "count": 2 } ], "augmented": false }
// Augmented logs list traces without ▶/■. Artificial activities are objects.

inline nlohmann::json activity_to_json(const Activity& a) {
  switch (a.kind()) {
    case ActivityKind::observed: return a.name();
    case ActivityKind::loop: return {{"kind", "loop"}, {"from", a.name()}, {"to", a.loop_target()}};
    case ActivityKind::skip: return {{"kind", "skip"}, {"anchor", a.name()}, {"skippable", a.skippable()}};
    case ActivityKind::start: return {{"kind", "start"}};
    case ActivityKind::end: return {{"kind", "end"}};
  }
  return nullptr;
}

inline Activity activity_from_json(const nlohmann::json& j) {
  if (j.is_string()) return Activity::observed(j.get<std::string>());
  if (!j.is_object() || !j.contains("kind")) throw ParseError("activity must be a string or an object with 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "loop") return Activity::loop(j.at("from").get<std::string>(), j.at("to").get<std::string>());
  if (kind == "skip")
    return Activity::skip(j.at("anchor").get<std::string>(), j.at("skippable").get<std::vector<std::string>>());
  if (kind == "start") return Activity::start();
  if (kind == "end") return Activity::end();
  throw ParseError("unknown activity kind '" + kind + "'");
}

inline nlohmann::json to_json(const EventLog& log) {
  nlohmann::json variants = nlohmann::json::array();
  for (const auto& [trace, count] : log.variants()) {
    nlohmann::json t = nlohmann::json::array();
    std::size_t lo = 0, hi = trace.size();
    if (log.augmented() && trace.size() >= 2) lo = 1, hi = trace.size() - 1;
    for (std::size_t i = lo; i < hi; ++i) t.push_back(activity_to_json(trace[i]));
    variants.push_back({{"trace", std::move(t)}, {"count", count}});
  }
  return {{"variants", std::move(variants)}, {"augmented", log.augmented()}};
}

inline EventLog event_log_from_json(const nlohmann::json& j) {
  try {
    EventLog plain;
    for (const auto& v : j.at("variants")) {
      Trace trace;
      for (const auto& a : v.at("trace")) {
        auto act = activity_from_json(a);
        if (act.is_endpoint()) throw ParseError("▶/■ must not appear in canonical traces; use \"augmented\"");
        trace.push_back(std::move(act));
      }
      auto count = v.at("count").get<std::int64_t>();
      if (count <= 0) throw ParseError("variant count must be positive");
      plain.add_trace(trace, static_cast<std::uint64_t>(count));
    }
    return j.value("augmented", false) ? augment_endpoints(plain) : plain;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid log JSON: ") + e.what());
  }
}

}  // namespace alphappp
