#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "alphappp/activity.hpp"
#include "alphappp/candidates.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"

namespace alphappp {

struct PlaceId {
  std::size_t value = 0;
  auto operator<=>(const PlaceId&) const = default;
};

struct TransitionId {
  std::size_t value = 0;
  auto operator<=>(const TransitionId&) const = default;
};

struct Place {
  std::string name;
  /// The candidate the place was built from; empty for source/sink places.
  std::optional<PlaceCandidate> origin;

  bool operator==(const Place&) const = default;
};

struct Transition {
  Activity activity;
  /// Visible label; nullopt for silent (τ) transitions.
  std::optional<std::string> label;

  bool silent() const noexcept { return !label.has_value(); }
  bool operator==(const Transition&) const = default;
};

using Marking = std::map<PlaceId, std::uint64_t>;

/// Labeled Petri net. Places and transitions live in separate index spaces,
/// so they are disjoint by construction.
class PetriNet {
 public:
  PlaceId add_place(Place p) {
    places_.push_back(std::move(p));
    return {places_.size() - 1};
  }
  TransitionId add_transition(Transition t) {
    transitions_.push_back(std::move(t));
    return {transitions_.size() - 1};
  }
  void add_arc(PlaceId p, TransitionId t) {
    check(p, t);
    inputs_.insert({p, t});
  }
  void add_arc(TransitionId t, PlaceId p) {
    check(p, t);
    outputs_.insert({t, p});
  }

  const std::vector<Place>& places() const noexcept { return places_; }
  const std::vector<Transition>& transitions() const noexcept { return transitions_; }
  const Place& place(PlaceId p) const { return places_.at(p.value); }
  const Transition& transition(TransitionId t) const { return transitions_.at(t.value); }
  /// Arcs place → transition.
  const std::set<std::pair<PlaceId, TransitionId>>& input_arcs() const noexcept { return inputs_; }
  /// Arcs transition → place.
  const std::set<std::pair<TransitionId, PlaceId>>& output_arcs() const noexcept { return outputs_; }

  std::vector<PlaceId> preset(TransitionId t) const {
    std::vector<PlaceId> out;
    for (const auto& [p, u] : inputs_)
      if (u == t) out.push_back(p);
    return out;
  }
  std::vector<PlaceId> postset(TransitionId t) const {
    std::vector<PlaceId> out;
    for (const auto& [u, p] : outputs_)
      if (u == t) out.push_back(p);
    return out;
  }

  std::optional<TransitionId> find_transition(const Activity& a) const {
    for (std::size_t i = 0; i < transitions_.size(); ++i)
      if (transitions_[i].activity == a) return TransitionId{i};
    return std::nullopt;
  }

  bool operator==(const PetriNet&) const = default;

 private:
  void check(PlaceId p, TransitionId t) const {
    if (p.value >= places_.size() || t.value >= transitions_.size()) throw Error("arc endpoint does not exist");
  }

  std::vector<Place> places_;
  std::vector<Transition> transitions_;
  std::set<std::pair<PlaceId, TransitionId>> inputs_;
  std::set<std::pair<TransitionId, PlaceId>> outputs_;
};

struct AcceptingPetriNet {
  PetriNet net;
  Marking initial;
  Marking final;

  bool operator==(const AcceptingPetriNet&) const = default;
};

/// One place per candidate, one transition per activity except ▶/■. Artificial
/// activities become silent transitions; ▶ ∈ A1 marks a place initially, ■ ∈ A2 finally.
inline AcceptingPetriNet construct_net(const std::vector<PlaceCandidate>& selected, const std::set<Activity>& acts) {
  AcceptingPetriNet out;
  std::map<Activity, TransitionId> tid;
  for (const auto& a : acts) {
    if (a.is_endpoint()) continue;
    std::optional<std::string> label;
    if (a.is_observed()) label = a.name();
    tid.emplace(a, out.net.add_transition({a, label}));
  }
  for (const auto& cand : selected) {
    const PlaceId p = out.net.add_place({"p_" + cand.label(), cand});
    for (const auto& a : cand.producers) {
      if (a.kind() == ActivityKind::start) {
        out.initial[p] += 1;
      } else if (!a.is_endpoint()) {
        auto it = tid.find(a);
        if (it == tid.end()) throw Error("candidate activity '" + a.label() + "' has no transition");
        out.net.add_arc(it->second, p);
      }
    }
    for (const auto& a : cand.consumers) {
      if (a.kind() == ActivityKind::end) {
        out.final[p] += 1;
      } else if (!a.is_endpoint()) {
        auto it = tid.find(a);
        if (it == tid.end()) throw Error("candidate activity '" + a.label() + "' has no transition");
        out.net.add_arc(p, it->second);
      }
    }
  }
  return out;
}

/// Single-place token game: consume before produce, start empty, must end empty.
/// ▶ and ■ act through their membership in A1/A2.
inline bool replay_place(const PlaceCandidate& place, const Trace& trace) {
  return replays_strictly(trace, [&](const Activity& a) { return place.producers.contains(a); },
                          [&](const Activity& a) { return place.consumers.contains(a); });
}

/// Replay score of a place over its relevant traces; nullopt when none is relevant.
inline std::optional<double> place_replay_score(const PlaceCandidate& place, const EventLog& repaired_log) {
  const EventLog rel = relevant_traces(repaired_log, place);
  if (rel.empty()) return std::nullopt;
  std::uint64_t ok = 0;
  for (const auto& [trace, count] : rel.variants())
    if (replay_place(place, trace)) ok += count;
  return static_cast<double>(ok) / static_cast<double>(rel.total_cases());
}

namespace detail {

/// Keeps the places flagged in `keep`, renumbering ids; transitions are untouched.
inline AcceptingPetriNet restrict_places(const AcceptingPetriNet& net, const std::vector<bool>& keep) {
  AcceptingPetriNet out;
  for (const auto& t : net.net.transitions()) out.net.add_transition(t);
  std::map<PlaceId, PlaceId> remap;
  for (std::size_t i = 0; i < net.net.places().size(); ++i)
    if (keep[i]) remap.emplace(PlaceId{i}, out.net.add_place(net.net.places()[i]));
  for (const auto& [p, t] : net.net.input_arcs())
    if (auto it = remap.find(p); it != remap.end()) out.net.add_arc(it->second, t);
  for (const auto& [t, p] : net.net.output_arcs())
    if (auto it = remap.find(p); it != remap.end()) out.net.add_arc(t, it->second);
  for (const auto& [p, n] : net.initial)
    if (auto it = remap.find(p); it != remap.end()) out.initial[it->second] = n;
  for (const auto& [p, n] : net.final)
    if (auto it = remap.find(p); it != remap.end()) out.final[it->second] = n;
  return out;
}

}  // namespace detail

/// Drops places whose replay score over their relevant traces is below r (or
/// that have no relevant trace). Places without an origin candidate are kept.
inline AcceptingPetriNet prune_places(const AcceptingPetriNet& net, const EventLog& repaired_log, double r) {
  const CompiledLog compiled(repaired_log);
  std::vector<bool> keep(net.net.places().size(), true);
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto& origin = net.net.places()[i].origin;
    if (!origin) continue;
    std::optional<double> score;
    bool known = true;
    for (const auto* side : {&origin->producers, &origin->consumers})
      for (const auto& a : *side)
        if (!compiled.index().find(a)) known = false;
    if (known) {
      score = compiled.replay_score(to_indexed(compiled.index(), *origin));
    } else {
      score = place_replay_score(*origin, repaired_log);
    }
    keep[i] = score && *score >= r;
  }
  return detail::restrict_places(net, keep);
}

/// Labeled transitions with empty preset and postset.
inline std::vector<TransitionId> disconnected_transitions(const AcceptingPetriNet& net) {
  std::vector<bool> connected(net.net.transitions().size(), false);
  for (const auto& [p, t] : net.net.input_arcs()) connected[t.value] = true;
  for (const auto& [t, p] : net.net.output_arcs()) connected[t.value] = true;
  std::vector<TransitionId> out;
  for (std::size_t i = 0; i < connected.size(); ++i)
    if (!connected[i] && !net.net.transitions()[i].silent()) out.push_back({i});
  return out;
}

/// Disconnected labeled transitions by ascending log frequency, ties by label.
inline std::vector<TransitionId> greedy_removal_order(const AcceptingPetriNet& net, const ActivityMultiset& counts) {
  auto order = disconnected_transitions(net);
  auto freq = [&](TransitionId t) -> std::uint64_t {
    auto it = counts.find(net.net.transition(t).activity);
    return it == counts.end() ? 0 : it->second;
  };
  std::stable_sort(order.begin(), order.end(), [&](TransitionId x, TransitionId y) {
    const auto fx = freq(x), fy = freq(y);
    if (fx != fy) return fx < fy;
    return *net.net.transition(x).label < *net.net.transition(y).label;
  });
  return order;
}

/// Removes disconnected transitions; ids of the remaining transitions are renumbered.
inline AcceptingPetriNet remove_transitions(const AcceptingPetriNet& net, const std::vector<TransitionId>& victims) {
  std::set<TransitionId> doomed(victims.begin(), victims.end());
  for (const auto& [p, t] : net.net.input_arcs())
    if (doomed.contains(t)) throw Error("transition '" + net.net.transition(t).activity.label() + "' has flow arcs");
  for (const auto& [t, p] : net.net.output_arcs())
    if (doomed.contains(t)) throw Error("transition '" + net.net.transition(t).activity.label() + "' has flow arcs");
  AcceptingPetriNet out;
  for (const auto& p : net.net.places()) out.net.add_place(p);
  std::map<TransitionId, TransitionId> remap;
  for (std::size_t i = 0; i < net.net.transitions().size(); ++i)
    if (!doomed.contains(TransitionId{i})) remap.emplace(TransitionId{i}, out.net.add_transition(net.net.transitions()[i]));
  for (const auto& [p, t] : net.net.input_arcs()) out.net.add_arc(p, remap.at(t));
  for (const auto& [t, p] : net.net.output_arcs()) out.net.add_arc(remap.at(t), p);
  out.initial = net.initial;
  out.final = net.final;
  return out;
}

// ---------------------------------------------------------------------------
// Whole-net token replay.

struct ReplayResult {
  bool fits = false;
  /// Index into the replayed trace of the first event that could not fire;
  /// equal to the trace length when only the final marking was missed.
  std::optional<std::size_t> failed_at;
};

namespace detail {

class TokenGame {
 public:
  explicit TokenGame(const AcceptingPetriNet& net) : net_(net), tokens_(net.net.places().size(), 0) {
    pre_.resize(net.net.transitions().size());
    post_.resize(net.net.transitions().size());
    for (const auto& [p, t] : net.net.input_arcs()) pre_[t.value].push_back(p.value);
    for (const auto& [t, p] : net.net.output_arcs()) post_[t.value].push_back(p.value);
    for (const auto& [p, n] : net.initial) tokens_[p.value] += static_cast<std::int64_t>(n);
  }

  bool enabled(std::size_t t, const std::vector<std::int64_t>& m) const {
    return std::all_of(pre_[t].begin(), pre_[t].end(), [&](std::size_t p) { return m[p] > 0; });
  }
  bool enabled(std::size_t t) const { return enabled(t, tokens_); }

  std::vector<std::int64_t> after(std::size_t t, std::vector<std::int64_t> m) const {
    for (auto p : pre_[t]) --m[p];
    for (auto p : post_[t]) ++m[p];
    return m;
  }
  void fire(std::size_t t) { tokens_ = after(t, std::move(tokens_)); }

  bool is_final(const std::vector<std::int64_t>& m) const {
    for (std::size_t p = 0; p < m.size(); ++p) {
      auto it = net_.final.find(PlaceId{p});
      const std::int64_t want = it == net_.final.end() ? 0 : static_cast<std::int64_t>(it->second);
      if (m[p] != want) return false;
    }
    return true;
  }
  bool is_final() const { return is_final(tokens_); }

  /// The unique enabled silent transition whose firing satisfies `goal`, if exactly one exists.
  template <class Goal>
  std::optional<std::size_t> unique_silent(Goal&& goal) const {
    std::optional<std::size_t> found;
    for (std::size_t s = 0; s < pre_.size(); ++s) {
      if (!net_.net.transitions()[s].silent() || !enabled(s)) continue;
      if (!goal(after(s, tokens_))) continue;
      if (found) return std::nullopt;
      found = s;
    }
    return found;
  }

 private:
  const AcceptingPetriNet& net_;
  std::vector<std::vector<std::size_t>> pre_, post_;
  std::vector<std::int64_t> tokens_;
};

}  // namespace detail

/// Replays a trace on the whole net. Observed activities fire their labeled
/// transition, artificial ones their silent transition, ▶/■ are skipped. When a
/// transition is not enabled, a single silent transition is fired first if it
/// is the unique enabled one that enables it (depth-1 lookahead); the same rule
/// applies once at the end to reach the final marking. Conservative: never searches.
inline ReplayResult replay_net(const AcceptingPetriNet& net, const Trace& trace) {
  detail::TokenGame game(net);
  std::map<Activity, std::size_t> by_activity;
  for (std::size_t i = 0; i < net.net.transitions().size(); ++i)
    by_activity.emplace(net.net.transitions()[i].activity, i);
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].is_endpoint()) continue;
    auto it = by_activity.find(trace[i]);
    if (it == by_activity.end()) return {false, i};
    const std::size_t t = it->second;
    if (!game.enabled(t)) {
      auto s = game.unique_silent([&](const std::vector<std::int64_t>& m) { return game.enabled(t, m); });
      if (!s) return {false, i};
      game.fire(*s);
    }
    game.fire(t);
  }
  if (!game.is_final()) {
    auto s = game.unique_silent([&](const std::vector<std::int64_t>& m) { return game.is_final(m); });
    if (!s) return {false, trace.size()};
    game.fire(*s);
  }
  return {true, std::nullopt};
}

/// Weighted fraction of traces that replay to the final marking.
inline double fitting_fraction(const AcceptingPetriNet& net, const EventLog& log) {
  if (log.empty()) return 1.0;
  std::uint64_t ok = 0;
  for (const auto& [trace, count] : log.variants())
    if (replay_net(net, trace).fits) ok += count;
  return static_cast<double>(ok) / static_cast<double>(log.total_cases());
}

}  // namespace alphappp
