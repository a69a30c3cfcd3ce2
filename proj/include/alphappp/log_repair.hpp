#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "alphappp/dfg.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"

namespace alphappp {

/// A detected loop: `from` (b) directly followed by `to` (a), with b reachable from a.
struct LoopEndpoints {
  Activity from;
  Activity to;
  auto operator<=>(const LoopEndpoints&) const = default;
  bool operator==(const LoopEndpoints&) const = default;
};

/// Activities in `skippable` are optional right after `anchor`.
struct SkipRule {
  Activity anchor;
  std::set<Activity> skippable;
  auto operator<=>(const SkipRule&) const = default;
  bool operator==(const SkipRule&) const = default;
};

using SkipRules = std::map<Activity, std::set<Activity>>;

struct RepairReport {
  std::set<Activity> removed_activities;
  std::set<LoopEndpoints> loops;
  std::vector<SkipRule> skip_rules;
  std::uint64_t loop_insertions = 0;
  std::uint64_t skip_insertions = 0;
};

struct RepairConfig {
  DfThreshold d = DfThreshold::absolute(1.0);
  double problem_threshold = 1.0;
};

namespace detail {

/// Arcs of weight ≥ cutoff that actually exist.
inline bool strong_arc(const Dfg& dfg, const Activity& a, const Activity& b, double cutoff) {
  const auto w = dfg.weight(a, b);
  return w > 0 && static_cast<double>(w) >= cutoff;
}

inline double resolve_or_zero(const DfThreshold& d, const Dfg& dfg) {
  return dfg.arcs().empty() ? 0.0 : resolve(d, dfg);
}

}  // namespace detail

/// Fraction of x's distinct non-endpoint neighbours related to x in both directions.
inline double problem_score(const Dfg& dfg, const Activity& x) {
  if (!dfg.nodes().contains(x)) throw Error("activity '" + x.label() + "' does not occur in the log");
  std::set<Activity> neighbours;
  for (const auto& [arc, _] : dfg.arcs()) {
    if (arc.first == x && arc.second != x && !arc.second.is_endpoint()) neighbours.insert(arc.second);
    if (arc.second == x && arc.first != x && !arc.first.is_endpoint()) neighbours.insert(arc.first);
  }
  if (neighbours.empty()) return 0.0;
  std::size_t both = 0;
  for (const auto& y : neighbours)
    if (dfg.weight(x, y) > 0 && dfg.weight(y, x) > 0) ++both;
  return static_cast<double>(both) / static_cast<double>(neighbours.size());
}

inline double problem_score(const EventLog& log, const Activity& x) { return problem_score(build_dfg(log), x); }

/// Activities whose problem score is at most `threshold`, plus ▶ and ■.
inline std::set<Activity> select_activities(const EventLog& log, double threshold) {
  const Dfg dfg = build_dfg(log);
  std::set<Activity> keep{Activity::start(), Activity::end()};
  for (const auto& a : dfg.nodes())
    if (!a.is_endpoint() && problem_score(dfg, a) <= threshold) keep.insert(a);
  return keep;
}

namespace detail {

/// Adjacency over arcs of weight ≥ cutoff, excluding arcs into ■.
inline std::map<Activity, std::vector<Activity>> strong_successors(const Dfg& dfg, double cutoff) {
  std::map<Activity, std::vector<Activity>> succ;
  for (const auto& [arc, w] : dfg.arcs()) {
    if (arc.second == Activity::end()) continue;
    if (strong_arc(dfg, arc.first, arc.second, cutoff)) succ[arc.first].push_back(arc.second);
  }
  return succ;
}

/// Whether `to` is reachable from `from` without entering a blocked node.
inline bool reachable_avoiding(const std::map<Activity, std::vector<Activity>>& succ, const Activity& from,
                               const Activity& to, const std::set<Activity>& blocked) {
  if (from == to) return true;
  std::set<Activity> seen{from};
  std::vector<Activity> stack{from};
  while (!stack.empty()) {
    const Activity x = stack.back();
    stack.pop_back();
    auto it = succ.find(x);
    if (it == succ.end()) continue;
    for (const auto& y : it->second) {
      if (y == to) return true;
      if (blocked.contains(y) || !seen.insert(y).second) continue;
      stack.push_back(y);
    }
  }
  return false;
}

/// Whether a simple path ▶ = x₁ ⇒ … ⇒ a ⇒ … ⇒ b exists. The prefix up to a is
/// searched by backtracking; the suffix only needs reachability outside the prefix.
class LoopPathSearch {
 public:
  LoopPathSearch(const std::map<Activity, std::vector<Activity>>& succ, Activity a, Activity b)
      : succ_(succ), a_(std::move(a)), b_(std::move(b)) {}

  bool run() {
    visited_.insert(Activity::start());
    return extend(Activity::start());
  }

 private:
  bool extend(const Activity& v) {
    if (v == a_) {
      std::set<Activity> blocked = visited_;
      blocked.erase(a_);
      return reachable_avoiding(succ_, a_, b_, blocked);
    }
    auto it = succ_.find(v);
    if (it == succ_.end()) return false;
    for (const auto& y : it->second) {
      if (visited_.contains(y) || (y == b_ && b_ != a_)) continue;
      std::set<Activity> blocked = visited_;
      blocked.insert(b_);
      blocked.erase(a_);
      if (!reachable_avoiding(succ_, y, a_, blocked)) continue;
      visited_.insert(y);
      const bool found = extend(y);
      visited_.erase(y);
      if (found) return true;
    }
    return false;
  }

  const std::map<Activity, std::vector<Activity>>& succ_;
  Activity a_;
  Activity b_;
  std::set<Activity> visited_;
};

}  // namespace detail

/// (b,a) such that b ⇒ a and some simple path from ▶, over arcs of weight ≥ d,
/// visits a and then ends in b. The arc b ⇒ a closes a cycle along that path.
inline std::set<LoopEndpoints> detect_loops(const Dfg& dfg, const DfThreshold& d) {
  const double cutoff = detail::resolve_or_zero(d, dfg);
  const auto succ = detail::strong_successors(dfg, cutoff);
  if (!dfg.nodes().contains(Activity::start())) return {};
  std::set<LoopEndpoints> loops;
  for (const auto& [b, targets] : succ) {
    if (b.is_endpoint()) continue;
    for (const auto& a : targets) {
      if (a.is_endpoint()) continue;
      if (detail::LoopPathSearch(succ, a, b).run()) loops.insert({b, a});
    }
  }
  return loops;
}

/// Inserts τ_{b,a} between every adjacent (b,a) pair, matching greedily left to right.
inline Trace repair_loops(const Trace& trace, const std::set<LoopEndpoints>& loops) {
  Trace out;
  out.reserve(trace.size());
  std::size_t i = 0;
  while (i < trace.size()) {
    if (i + 1 < trace.size()) {
      const LoopEndpoints pair{trace[i], trace[i + 1]};
      if (loops.contains(pair)) {
        out.push_back(trace[i]);
        out.push_back(Activity::loop(trace[i].name(), trace[i + 1].name()));
        out.push_back(trace[i + 1]);
        i += 2;
        continue;
      }
    }
    out.push_back(trace[i]);
    ++i;
  }
  return out;
}

/// skips(a) for every anchor a with a non-empty result.
inline SkipRules detect_skips(const Dfg& dfg, const DfThreshold& d) {
  const double cutoff = detail::resolve_or_zero(d, dfg);
  std::map<Activity, std::set<Activity>> strong_succ;
  for (const auto& [arc, w] : dfg.arcs())
    if (detail::strong_arc(dfg, arc.first, arc.second, cutoff)) strong_succ[arc.first].insert(arc.second);
  auto succ_of = [&](const Activity& x) -> const std::set<Activity>& {
    static const std::set<Activity> none;
    auto it = strong_succ.find(x);
    return it == strong_succ.end() ? none : it->second;
  };

  SkipRules rules;
  for (const auto& a : dfg.nodes()) {
    if (a.is_endpoint() || dfg.weight(a, a) > 0) continue;
    const auto& succ_a = succ_of(a);
    std::set<Activity> skippable;
    for (const auto& [arc, w] : dfg.arcs()) {
      if (arc.first != a) continue;
      const Activity& b = arc.second;
      if (b.is_endpoint()) continue;
      if (detail::strong_arc(dfg, b, a, cutoff) || detail::strong_arc(dfg, b, b, cutoff)) continue;
      const auto& succ_b = succ_of(b);
      if (succ_b.empty()) continue;
      if (std::includes(succ_a.begin(), succ_a.end(), succ_b.begin(), succ_b.end())) skippable.insert(b);
    }
    if (!skippable.empty()) rules.emplace(a, std::move(skippable));
  }
  return rules;
}

namespace detail {

inline Activity skip_activity(const Activity& anchor, const std::set<Activity>& skippable) {
  std::vector<std::string> names;
  for (const auto& b : skippable) names.push_back(b.name());
  return Activity::skip(anchor.name(), std::move(names));
}

}  // namespace detail

/// Inserts τ_{a,B} after every rule anchor a that is not directly followed by a member of B.
inline Trace repair_skips(const Trace& trace, const SkipRules& rules) {
  Trace out;
  out.reserve(trace.size() + 2);
  std::size_t i = 0;
  while (i < trace.size()) {
    auto rule = rules.find(trace[i]);
    if (rule == rules.end()) {
      out.push_back(trace[i]);
      ++i;
      continue;
    }
    if (i + 1 >= trace.size())
      throw Error("skip anchor '" + trace[i].label() + "' ends the trace; skip repair needs augmented traces");
    if (rule->second.contains(trace[i + 1])) {
      out.push_back(trace[i]);
      out.push_back(trace[i + 1]);
      i += 2;
    } else {
      out.push_back(trace[i]);
      out.push_back(detail::skip_activity(rule->first, rule->second));
      ++i;
    }
  }
  return out;
}

/// Problematic-activity removal, then loop repair, then skip repair. Both
/// detections read the DFG of the projected (unrepaired) log.
inline std::pair<EventLog, RepairReport> repair_log(const EventLog& input, const RepairConfig& cfg) {
  const EventLog log = input.augmented() ? input : augment_endpoints(input);
  RepairReport report;

  const auto keep = select_activities(log, cfg.problem_threshold);
  for (const auto& a : activities(log))
    if (!keep.contains(a)) report.removed_activities.insert(a);
  const EventLog projected = project(log, keep);

  const Dfg dfg = build_dfg(projected);
  report.loops = detect_loops(dfg, cfg.d);
  const SkipRules rules = detect_skips(dfg, cfg.d);
  for (const auto& [a, bs] : rules) report.skip_rules.push_back({a, bs});

  EventLog repaired(EventLog::VariantMap{}, true);
  for (const auto& [trace, count] : projected.variants()) {
    Trace fixed = repair_skips(repair_loops(trace, report.loops), rules);
    for (const auto& x : fixed) {
      if (x.kind() == ActivityKind::loop) report.loop_insertions += count;
      if (x.kind() == ActivityKind::skip) report.skip_insertions += count;
    }
    repaired.add_trace(fixed, count);
  }
  return {std::move(repaired), std::move(report)};
}

inline nlohmann::json to_json(const RepairReport& r) {
  nlohmann::json removed = nlohmann::json::array(), loops = nlohmann::json::array(),
                 skips = nlohmann::json::array();
  for (const auto& a : r.removed_activities) removed.push_back(a.label());
  for (const auto& l : r.loops) loops.push_back({{"from", l.from.label()}, {"to", l.to.label()}});
  for (const auto& s : r.skip_rules) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& b : s.skippable) members.push_back(b.label());
    skips.push_back({{"anchor", s.anchor.label()}, {"skippable", std::move(members)}});
  }
  return {{"removed_activities", std::move(removed)},
          {"loops", std::move(loops)},
          {"skip_rules", std::move(skips)},
          {"insertions", {{"loop", r.loop_insertions}, {"skip", r.skip_insertions}}}};
}

}  // namespace alphappp
