#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/dynamic_bitset.hpp>
#include <json.hpp>

#include "alphappp/activity.hpp"
#include "alphappp/dfg.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"

namespace alphappp {

/// A place candidate (A1, A2): A1 produces into the place, A2 consumes from it.
struct PlaceCandidate {
  std::set<Activity> producers;
  std::set<Activity> consumers;

  auto operator<=>(const PlaceCandidate&) const = default;
  bool operator==(const PlaceCandidate&) const = default;

  std::string label() const {
    auto side = [](const std::set<Activity>& s) {
      std::string out = "{";
      bool first = true;
      for (const auto& a : s) {
        if (!first) out += ",";
        out += a.label();
        first = false;
      }
      return out + "}";
    };
    return "(" + side(producers) + "," + side(consumers) + ")";
  }
};

/// Canonical order: by |A1|+|A2|, then lexicographically by (A1, A2).
inline bool canonical_less(const PlaceCandidate& x, const PlaceCandidate& y) {
  const auto sx = x.producers.size() + x.consumers.size();
  const auto sy = y.producers.size() + y.consumers.size();
  if (sx != sy) return sx < sy;
  return x < y;
}

struct CandidateStageCounts {
  std::uint64_t cnd0 = 0;
  std::uint64_t cnd1 = 0;
  std::uint64_t cnd2 = 0;
  std::uint64_t sel = 0;
};

struct CandidateFitness {
  double overall = 0.0;
  double mfit = 0.0;
};

// ---------------------------------------------------------------------------
// Token-counting semantics shared by the value and indexed paths.

/// Local fitness: produce-only +1, consume-only -1 (failing at zero), others no-op; accept at zero.
template <class Seq, class Produces, class Consumes>
bool fits_locally(const Seq& seq, Produces&& produces, Consumes&& consumes) {
  std::uint64_t tokens = 0;
  for (const auto& a : seq) {
    const bool p = produces(a);
    const bool c = consumes(a);
    if (p && !c) {
      ++tokens;
    } else if (c && !p) {
      if (tokens == 0) return false;
      --tokens;
    }
  }
  return tokens == 0;
}

/// Single-place replay: consume before produce, so self-loop activities need a token.
template <class Seq, class Produces, class Consumes>
bool replays_strictly(const Seq& seq, Produces&& produces, Consumes&& consumes) {
  std::uint64_t tokens = 0;
  for (const auto& a : seq) {
    if (consumes(a)) {
      if (tokens == 0) return false;
      --tokens;
    }
    if (produces(a)) ++tokens;
  }
  return tokens == 0;
}

// ---------------------------------------------------------------------------
// Indexed representation used by the pipeline.

using ActivityBits = boost::dynamic_bitset<std::uint64_t>;

/// Dense numbering of a sorted activity set.
class ActivityIndex {
 public:
  ActivityIndex() = default;
  explicit ActivityIndex(const std::set<Activity>& acts) : acts_(acts.begin(), acts.end()) {
    for (std::size_t i = 0; i < acts_.size(); ++i) ids_.emplace(acts_[i], i);
  }

  std::size_t size() const noexcept { return acts_.size(); }
  const Activity& operator[](std::size_t i) const { return acts_[i]; }
  const std::vector<Activity>& activities() const noexcept { return acts_; }

  std::optional<std::size_t> find(const Activity& a) const {
    auto it = ids_.find(a);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  ActivityBits bits(const std::set<Activity>& s) const {
    ActivityBits out(size());
    for (const auto& a : s) {
      auto id = find(a);
      if (!id) throw Error("activity '" + a.label() + "' is not indexed");
      out.set(*id);
    }
    return out;
  }

  std::set<Activity> to_set(const ActivityBits& bits) const {
    std::set<Activity> out;
    for (auto i = bits.find_first(); i != ActivityBits::npos; i = bits.find_next(i)) out.insert(acts_[i]);
    return out;
  }

 private:
  std::vector<Activity> acts_;
  std::map<Activity, std::size_t> ids_;
};

struct IndexedCandidate {
  ActivityBits producers;
  ActivityBits consumers;

  bool operator==(const IndexedCandidate&) const = default;
};

inline PlaceCandidate to_candidate(const ActivityIndex& index, const IndexedCandidate& c) {
  return {index.to_set(c.producers), index.to_set(c.consumers)};
}

inline IndexedCandidate to_indexed(const ActivityIndex& index, const PlaceCandidate& c) {
  return {index.bits(c.producers), index.bits(c.consumers)};
}

namespace detail {

inline std::vector<std::size_t> members(const ActivityBits& b) {
  std::vector<std::size_t> out;
  for (auto i = b.find_first(); i != ActivityBits::npos; i = b.find_next(i)) out.push_back(i);
  return out;
}

inline bool indexed_canonical_less(const IndexedCandidate& x, const IndexedCandidate& y) {
  const auto sx = x.producers.count() + x.consumers.count();
  const auto sy = y.producers.count() + y.consumers.count();
  if (sx != sy) return sx < sy;
  const auto px = members(x.producers), py = members(y.producers);
  if (px != py) return px < py;
  return members(x.consumers) < members(y.consumers);
}

}  // namespace detail

/// An event log compiled against an activity index: integer traces plus
/// per-variant activity sets and per-activity tallies.
class CompiledLog {
 public:
  CompiledLog(const EventLog& log, ActivityIndex index) : index_(std::move(index)) {
    const std::size_t n = index_.size();
    act_mult_.assign(n, 0);
    rel_single_.assign(n, 0);
    for (const auto& [trace, count] : log.variants()) {
      std::vector<std::uint32_t> ids;
      ids.reserve(trace.size());
      ActivityBits present(n);
      for (const auto& a : trace) {
        auto id = index_.find(a);
        if (!id) throw Error("activity '" + a.label() + "' missing from the index");
        ids.push_back(static_cast<std::uint32_t>(*id));
        present.set(*id);
        act_mult_[*id] += count;
      }
      for (auto i = present.find_first(); i != ActivityBits::npos; i = present.find_next(i)) rel_single_[i] += count;
      traces_.push_back(std::move(ids));
      present_.push_back(std::move(present));
      counts_.push_back(count);
    }
  }

  explicit CompiledLog(const EventLog& log) : CompiledLog(log, ActivityIndex(activities(log))) {}

  const ActivityIndex& index() const noexcept { return index_; }
  std::size_t num_variants() const noexcept { return traces_.size(); }
  const std::vector<std::uint32_t>& trace(std::size_t v) const { return traces_[v]; }
  std::uint64_t count(std::size_t v) const { return counts_[v]; }
  const ActivityBits& present(std::size_t v) const { return present_[v]; }
  std::uint64_t activity_count(std::size_t a) const { return act_mult_[a]; }
  std::uint64_t traces_containing(std::size_t a) const { return rel_single_[a]; }

  /// |count(A1) - count(A2)| / max(count(A1), count(A2)).
  double balance(const IndexedCandidate& c) const {
    std::uint64_t in = 0, out = 0;
    for (auto i = c.producers.find_first(); i != ActivityBits::npos; i = c.producers.find_next(i)) in += act_mult_[i];
    for (auto i = c.consumers.find_first(); i != ActivityBits::npos; i = c.consumers.find_next(i)) out += act_mult_[i];
    if (in == 0 && out == 0) throw Error("balance undefined: candidate activities never occur");
    const auto diff = in > out ? in - out : out - in;
    return static_cast<double>(diff) / static_cast<double>(std::max(in, out));
  }

  /// Overall and per-activity-minimum local fitness; nullopt when no trace is relevant.
  std::optional<CandidateFitness> fitness(const IndexedCandidate& c) const {
    return score(c, [&](const std::vector<std::uint32_t>& t) {
      return fits_locally(t, [&](std::uint32_t a) { return c.producers.test(a); },
                          [&](std::uint32_t a) { return c.consumers.test(a); });
    });
  }

  /// Fraction of relevant traces the single place replays strictly; nullopt when none is relevant.
  std::optional<double> replay_score(const IndexedCandidate& c) const {
    auto s = score(c, [&](const std::vector<std::uint32_t>& t) {
      return replays_strictly(t, [&](std::uint32_t a) { return c.producers.test(a); },
                              [&](std::uint32_t a) { return c.consumers.test(a); });
    });
    if (!s) return std::nullopt;
    return s->overall;
  }

 private:
  template <class Check>
  std::optional<CandidateFitness> score(const IndexedCandidate& c, Check&& check) const {
    const ActivityBits involved = c.producers | c.consumers;
    const auto ids = detail::members(involved);
    std::vector<std::uint64_t> fitting_with(ids.size(), 0);
    std::uint64_t relevant = 0, fitting = 0;
    for (std::size_t v = 0; v < traces_.size(); ++v) {
      if (!present_[v].intersects(involved)) continue;
      relevant += counts_[v];
      if (!check(traces_[v])) continue;
      fitting += counts_[v];
      for (std::size_t j = 0; j < ids.size(); ++j)
        if (present_[v].test(ids[j])) fitting_with[j] += counts_[v];
    }
    if (relevant == 0) return std::nullopt;
    CandidateFitness out;
    out.overall = static_cast<double>(fitting) / static_cast<double>(relevant);
    out.mfit = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto rel = rel_single_[ids[j]];
      if (rel == 0) continue;
      out.mfit = std::min(out.mfit, static_cast<double>(fitting_with[j]) / static_cast<double>(rel));
    }
    if (out.mfit == std::numeric_limits<double>::infinity()) out.mfit = out.overall;
    return out;
  }

  ActivityIndex index_;
  std::vector<std::vector<std::uint32_t>> traces_;
  std::vector<ActivityBits> present_;
  std::vector<std::uint64_t> counts_;
  std::vector<std::uint64_t> act_mult_;
  std::vector<std::uint64_t> rel_single_;
};

// ---------------------------------------------------------------------------
// Cnd₀ enumeration.

struct EnumerationResult {
  std::vector<IndexedCandidate> candidates;
  /// True when the |A1|+|A2| cap cut off at least one extension.
  bool cap_hit = false;
};

namespace detail {

/// Backtracking over per-activity roles with pairwise forward checking. Every
/// Cnd₀ clause except the final existential one is a pairwise constraint on
/// the roles {unused, producer-only (X), consumer-only (Y), both (Z)}.
class CandidateEnumerator {
 public:
  /// `classic` drops the both-role and the existential clause, which yields the
  /// classical Alpha place pairs (A, B) with A × B ⊆ ⇒ and A, B internally independent.
  CandidateEnumerator(std::vector<ActivityBits> succ, std::optional<std::size_t> cap, bool classic = false)
      : succ_(std::move(succ)), n_(succ_.size()), cap_(cap), classic_(classic), role_(n_, unused) {}

  EnumerationResult run() {
    std::vector<std::uint8_t> allowed(n_, 0);
    for (std::size_t v = 0; v < n_; ++v) {
      allowed[v] = bit(unused);
      if (rel(v, v)) {
        if (!classic_) allowed[v] |= bit(both);
      } else {
        allowed[v] |= bit(producer) | bit(consumer);
      }
    }
    descend(0, allowed);
    std::sort(result_.candidates.begin(), result_.candidates.end(), indexed_canonical_less);
    return std::move(result_);
  }

 private:
  enum Role : std::uint8_t { unused = 0, producer = 1, consumer = 2, both = 3 };
  static constexpr std::uint8_t bit(Role r) { return static_cast<std::uint8_t>(1u << r); }

  bool rel(std::size_t u, std::size_t v) const { return succ_[u].test(v); }

  /// Whether u in role ru and v in role rv may coexist.
  bool compatible(std::size_t u, Role ru, std::size_t v, Role rv) const {
    if (ru == unused || rv == unused) return true;
    if (ru > rv) return compatible(v, rv, u, ru);
    switch (ru) {
      case producer:
        if (rv == producer) return !rel(u, v) && !rel(v, u);
        if (rv == consumer) return rel(u, v);
        return rel(u, v) && !rel(v, u);  // rv == both
      case consumer:
        if (rv == consumer) return !rel(u, v) && !rel(v, u);
        return rel(v, u) && !rel(u, v);  // rv == both
      case both:
        return rel(u, v) && rel(v, u);
      default:
        return true;
    }
  }

  void descend(std::size_t pos, const std::vector<std::uint8_t>& allowed) {
    if (n_producers_ == 0 && !any_allows(pos, allowed, producer)) return;
    if (n_consumers_ == 0 && !any_allows(pos, allowed, consumer)) return;
    if (pos == n_) {
      emit();
      return;
    }
    descend(pos + 1, allowed);
    for (Role r : {producer, consumer, both}) {
      if (!(allowed[pos] & bit(r))) continue;
      const std::size_t grow = r == both ? 2 : 1;
      if (cap_ && size_ + grow > *cap_) {
        result_.cap_hit = true;
        continue;
      }
      std::vector<std::uint8_t> next(allowed);
      for (std::size_t w = pos + 1; w < n_; ++w)
        for (Role rw : {producer, consumer, both})
          if ((next[w] & bit(rw)) && !compatible(pos, r, w, rw)) next[w] &= static_cast<std::uint8_t>(~bit(rw));
      assign(pos, r, +1);
      descend(pos + 1, next);
      assign(pos, r, -1);
    }
  }

  bool any_allows(std::size_t pos, const std::vector<std::uint8_t>& allowed, Role r) const {
    for (std::size_t w = pos; w < n_; ++w)
      if (allowed[w] & bit(r)) return true;
    return false;
  }

  void assign(std::size_t v, Role r, int delta) {
    role_[v] = delta > 0 ? r : unused;
    if (r == producer) n_producers_ += delta;
    if (r == consumer) n_consumers_ += delta;
    size_ += static_cast<std::size_t>(static_cast<long>(r == both ? 2 : 1) * delta);
  }

  void emit() {
    bool witnessed = classic_;
    for (std::size_t x = 0; x < n_ && !witnessed; ++x) {
      if (role_[x] != producer) continue;
      for (std::size_t y = 0; y < n_; ++y)
        if (role_[y] == consumer && !rel(y, x)) {
          witnessed = true;
          break;
        }
    }
    if (!witnessed) return;
    IndexedCandidate c{ActivityBits(n_), ActivityBits(n_)};
    for (std::size_t v = 0; v < n_; ++v) {
      if (role_[v] == producer || role_[v] == both) c.producers.set(v);
      if (role_[v] == consumer || role_[v] == both) c.consumers.set(v);
    }
    result_.candidates.push_back(std::move(c));
  }

  std::vector<ActivityBits> succ_;
  std::size_t n_;
  std::optional<std::size_t> cap_;
  bool classic_;
  std::vector<Role> role_;
  long n_producers_ = 0;
  long n_consumers_ = 0;
  std::size_t size_ = 0;
  EnumerationResult result_;
};

}  // namespace detail

/// Adjacency rows (succ[u] has bit v iff u ⇒ v in `dfg`) over `index`.
inline std::vector<ActivityBits> adjacency(const Dfg& dfg, const ActivityIndex& index) {
  std::vector<ActivityBits> succ(index.size(), ActivityBits(index.size()));
  for (const auto& [arc, w] : dfg.arcs()) {
    auto u = index.find(arc.first), v = index.find(arc.second);
    if (!u || !v) throw Error("DFG arc over an activity missing from the index");
    succ[*u].set(*v);
  }
  return succ;
}

/// All Cnd₀ candidates over `adfg`, in canonical order.
inline EnumerationResult enumerate_indexed(const Dfg& adfg, const ActivityIndex& index,
                                           std::optional<std::size_t> size_cap = std::nullopt) {
  return detail::CandidateEnumerator(adjacency(adfg, index), size_cap).run();
}

inline std::vector<PlaceCandidate> enumerate_candidates(const Dfg& adfg,
                                                        std::optional<std::size_t> size_cap = std::nullopt) {
  const ActivityIndex index(adfg.nodes());
  std::vector<PlaceCandidate> out;
  for (const auto& c : enumerate_indexed(adfg, index, size_cap).candidates) out.push_back(to_candidate(index, c));
  return out;
}

// ---------------------------------------------------------------------------
// Pruning over value types.

inline double balance(const ActivityMultiset& counts, const PlaceCandidate& cand) {
  auto total = [&](const std::set<Activity>& s) {
    std::uint64_t n = 0;
    for (const auto& a : s) {
      auto it = counts.find(a);
      if (it != counts.end()) n += it->second;
    }
    return n;
  };
  const auto in = total(cand.producers), out = total(cand.consumers);
  if (in == 0 && out == 0) throw Error("balance undefined for " + cand.label() + ": both sides have zero count");
  const auto diff = in > out ? in - out : out - in;
  return static_cast<double>(diff) / static_cast<double>(std::max(in, out));
}

inline std::vector<PlaceCandidate> prune_balance(const std::vector<PlaceCandidate>& cands,
                                                 const ActivityMultiset& counts, double b) {
  std::vector<PlaceCandidate> out;
  for (const auto& c : cands)
    if (balance(counts, c) <= b) out.push_back(c);
  return out;
}

inline bool fit_trace(const Trace& trace, const PlaceCandidate& cand) {
  return fits_locally(trace, [&](const Activity& a) { return cand.producers.contains(a); },
                      [&](const Activity& a) { return cand.consumers.contains(a); });
}

/// Traces (with multiplicity) containing at least one activity of A1 ∪ A2.
inline EventLog relevant_traces(const EventLog& log, const PlaceCandidate& cand) {
  EventLog out(EventLog::VariantMap{}, log.augmented());
  for (const auto& [trace, count] : log.variants()) {
    const bool relevant = std::any_of(trace.begin(), trace.end(), [&](const Activity& a) {
      return cand.producers.contains(a) || cand.consumers.contains(a);
    });
    if (relevant) out.add_trace(trace, count);
  }
  return out;
}

inline std::optional<CandidateFitness> candidate_fitness(const EventLog& log, const PlaceCandidate& cand) {
  const EventLog rel = relevant_traces(log, cand);
  if (rel.empty()) return std::nullopt;
  std::uint64_t fitting = 0;
  for (const auto& [trace, count] : rel.variants())
    if (fit_trace(trace, cand)) fitting += count;
  CandidateFitness out{static_cast<double>(fitting) / static_cast<double>(rel.total_cases()),
                       std::numeric_limits<double>::infinity()};
  std::set<Activity> involved = cand.producers;
  involved.insert(cand.consumers.begin(), cand.consumers.end());
  for (const auto& a : involved) {
    const EventLog rel_a = relevant_traces(log, PlaceCandidate{{a}, {}});
    if (rel_a.empty()) continue;
    std::uint64_t fit_a = 0;
    for (const auto& [trace, count] : rel_a.variants())
      if (fit_trace(trace, cand)) fit_a += count;
    out.mfit = std::min(out.mfit, static_cast<double>(fit_a) / static_cast<double>(rel_a.total_cases()));
  }
  return out;
}

/// Cnd₂: keeps candidates with overall ≥ t and mfit ≥ t; candidates without relevant traces are dropped.
inline std::vector<PlaceCandidate> prune_fitness(const std::vector<PlaceCandidate>& cands, const EventLog& log,
                                                 double t) {
  std::vector<PlaceCandidate> out;
  for (const auto& c : cands) {
    auto f = candidate_fitness(log, c);
    if (f && f->overall >= t && f->mfit >= t) out.push_back(c);
  }
  return out;
}

inline bool dominated_by(const PlaceCandidate& x, const PlaceCandidate& y) {
  return std::includes(y.producers.begin(), y.producers.end(), x.producers.begin(), x.producers.end()) &&
         std::includes(y.consumers.begin(), y.consumers.end(), x.consumers.begin(), x.consumers.end());
}

/// Componentwise-⊆-maximal candidates, in input order.
inline std::vector<PlaceCandidate> select_maximal(const std::vector<PlaceCandidate>& cands) {
  std::vector<PlaceCandidate> out;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    bool maximal = true;
    for (std::size_t j = 0; j < cands.size() && maximal; ++j)
      if (cands[j] != cands[i] && dominated_by(cands[i], cands[j])) maximal = false;
    if (maximal && std::find(out.begin(), out.end(), cands[i]) == out.end()) out.push_back(cands[i]);
  }
  return out;
}

/// Indexed counterpart of select_maximal.
inline std::vector<IndexedCandidate> select_maximal(const std::vector<IndexedCandidate>& cands) {
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto size = [&](std::size_t i) { return cands[i].producers.count() + cands[i].consumers.count(); };
  std::vector<std::size_t> sizes(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) sizes[i] = size(i);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sizes[x] > sizes[y]; });
  std::vector<bool> keep(cands.size(), true);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    for (std::size_t j : order) {
      if (sizes[j] <= sizes[i]) break;
      if (cands[i].producers.is_subset_of(cands[j].producers) && cands[i].consumers.is_subset_of(cands[j].consumers)) {
        keep[i] = false;
        break;
      }
    }
  }
  std::vector<IndexedCandidate> out;
  for (std::size_t i = 0; i < cands.size(); ++i)
    if (keep[i]) out.push_back(cands[i]);
  return out;
}

}  // namespace alphappp
