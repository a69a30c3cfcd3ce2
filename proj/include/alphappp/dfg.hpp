#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#include "alphappp/activity.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"

namespace alphappp {

/// Weighted directly-follows graph. Arc weights are strictly positive; absent arcs weigh 0.
class Dfg {
 public:
  using Arc = std::pair<Activity, Activity>;

  void add_node(const Activity& a) { nodes_.insert(a); }

  void add_arc(const Activity& from, const Activity& to, std::uint64_t weight) {
    if (weight == 0) return;
    if (to.kind() == ActivityKind::start || from.kind() == ActivityKind::end)
      throw Error("DFG arcs may not enter ▶ or leave ■");
    nodes_.insert(from);
    nodes_.insert(to);
    arcs_[{from, to}] += weight;
  }

  const std::set<Activity>& nodes() const noexcept { return nodes_; }
  const std::map<Arc, std::uint64_t>& arcs() const noexcept { return arcs_; }

  std::uint64_t weight(const Activity& a, const Activity& b) const {
    auto it = arcs_.find({a, b});
    return it == arcs_.end() ? 0 : it->second;
  }

  std::uint64_t outgoing(const Activity& a) const {
    std::uint64_t sum = 0;
    for (auto it = arcs_.lower_bound({a, Activity::start()}); it != arcs_.end() && it->first.first == a; ++it)
      sum += it->second;
    return sum;
  }

  std::uint64_t incoming(const Activity& b) const {
    std::uint64_t sum = 0;
    for (const auto& [arc, w] : arcs_)
      if (arc.second == b) sum += w;
    return sum;
  }

  bool operator==(const Dfg&) const = default;

 private:
  std::set<Activity> nodes_;
  std::map<Arc, std::uint64_t> arcs_;
};

enum class ThresholdMode { absolute, relative };

/// A directly-follows weight threshold, either absolute or a multiple of the mean arc weight.
struct DfThreshold {
  double value = 1.0;
  ThresholdMode mode = ThresholdMode::absolute;

  static DfThreshold absolute(double v) { return {v, ThresholdMode::absolute}; }
  static DfThreshold relative(double v) { return {v, ThresholdMode::relative}; }

  bool operator==(const DfThreshold&) const = default;
};

/// DFG of the endpoint-augmented log (augmenting first when needed).
inline Dfg build_dfg(const EventLog& log) {
  const EventLog* source = &log;
  EventLog augmented;
  if (!log.augmented()) {
    augmented = augment_endpoints(log);
    source = &augmented;
  }
  Dfg dfg;
  for (const auto& [trace, count] : source->variants()) {
    for (const auto& a : trace) dfg.add_node(a);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) dfg.add_arc(trace[i], trace[i + 1], count);
  }
  return dfg;
}

inline std::uint64_t weight(const Dfg& dfg, const Activity& a, const Activity& b) { return dfg.weight(a, b); }

inline double mean_weight(const Dfg& dfg) {
  if (dfg.arcs().empty()) throw Error("mean weight of a DFG without arcs is undefined");
  double sum = 0;
  for (const auto& [_, w] : dfg.arcs()) sum += static_cast<double>(w);
  return sum / static_cast<double>(dfg.arcs().size());
}

/// Absolute cutoff a threshold stands for on `dfg`.
inline double resolve(const DfThreshold& t, const Dfg& dfg) {
  if (t.mode == ThresholdMode::absolute) return t.value;
  return t.value * mean_weight(dfg);
}

inline bool df_holds(const Dfg& dfg, const Activity& a, const Activity& b, const DfThreshold& t) {
  return static_cast<double>(dfg.weight(a, b)) >= resolve(t, dfg);
}

/// Drops every arc lighter than max(n, fraction·min(in(b), out(a))), sums taken on the unpruned DFG.
/// The node set is kept intact.
inline Dfg build_advising_dfg(const EventLog& repaired_log, std::uint64_t n, double min_weight_fraction = 0.01) {
  const Dfg full = build_dfg(repaired_log);
  std::map<Activity, std::uint64_t> in, out;
  for (const auto& [arc, w] : full.arcs()) {
    out[arc.first] += w;
    in[arc.second] += w;
  }
  Dfg advising;
  for (const auto& a : full.nodes()) advising.add_node(a);
  for (const auto& [arc, w] : full.arcs()) {
    const double min_w =
        min_weight_fraction * static_cast<double>(std::min(in[arc.second], out[arc.first]));
    const double cutoff = std::max(static_cast<double>(n), min_w);
    if (static_cast<double>(w) >= cutoff) advising.add_arc(arc.first, arc.second, w);
  }
  return advising;
}

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

/// Graphviz rendering with weight labels; nodes ordered ▶ first, ■ last.
inline std::string to_dot(const Dfg& dfg) {
  std::ostringstream os;
  os << "digraph dfg {\n  rankdir=LR;\n  node [shape=box, style=rounded];\n";
  std::map<Activity, std::size_t> id;
  for (const auto& a : dfg.nodes()) {
    const std::size_t n = id.size();
    id.emplace(a, n);
    os << "  n" << n << " [label=\"" << detail::dot_escape(a.label()) << "\"";
    if (a.is_endpoint()) os << ", shape=circle";
    os << "];\n";
  }
  for (const auto& [arc, w] : dfg.arcs())
    os << "  n" << id.at(arc.first) << " -> n" << id.at(arc.second) << " [label=\"" << w << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace alphappp
