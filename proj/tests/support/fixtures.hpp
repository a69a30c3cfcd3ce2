#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "alphappp/alphappp.hpp"

// Readable GoogleTest failure output.
namespace alphappp {
inline void PrintTo(const Activity& a, std::ostream* os) { *os << a.label(); }
inline void PrintTo(const LoopEndpoints& l, std::ostream* os) { *os << "(" << l.from.label() << "," << l.to.label() << ")"; }
inline void PrintTo(const PlaceCandidate& c, std::ostream* os) { *os << c.label(); }
}  // namespace alphappp

namespace fixtures {

using alphappp::Activity;
using alphappp::EventLog;
using alphappp::Trace;

/// One activity per character: tr("abc") = ⟨a,b,c⟩.
inline Trace tr(std::string_view letters) {
  Trace t;
  for (char c : letters) t.push_back(Activity::observed(std::string(1, c)));
  return t;
}

inline Trace augmented(std::string_view letters) {
  Trace t{Activity::start()};
  for (const auto& a : tr(letters)) t.push_back(a);
  t.push_back(Activity::end());
  return t;
}

inline EventLog log_of(std::initializer_list<std::pair<const char*, std::uint64_t>> variants) {
  EventLog log;
  for (const auto& [t, n] : variants) log.add_trace(tr(t), n);
  return log;
}

inline Activity act(const char* name) { return Activity::observed(name); }

/// [⟨a,b,c,d⟩⁴⁰⁰, ⟨a,b,d⟩²⁵⁰, ⟨d,a,b,c⟩⁴, ⟨d,a,b⟩²]
inline EventLog l1() { return log_of({{"abcd", 400}, {"abd", 250}, {"dabc", 4}, {"dab", 2}}); }

/// [⟨a,b,c,d⟩, ⟨a,b,c,a,b,c,d⟩]
inline EventLog l_loop() { return log_of({{"abcd", 1}, {"abcabcd", 1}}); }

/// [⟨a,b,d⟩, ⟨a,c,d⟩]
inline EventLog l2() { return log_of({{"abd", 1}, {"acd", 1}}); }

/// [⟨a,b,c,d⟩ⁿ, ⟨a,d⟩ᵐ]
inline EventLog skip_bypass(std::uint64_t n, std::uint64_t m) { return log_of({{"abcd", n}, {"ad", m}}); }

/// [⟨a,b,d⟩, ⟨a,c,d⟩, ⟨a,d⟩]: a choice between b and c that can be skipped.
inline EventLog skip_choice() { return log_of({{"abd", 1}, {"acd", 1}, {"ad", 1}}); }

/// Small deterministic PRNG wrapper that only uses raw mt19937 output, so the
/// generated logs do not depend on the standard library's distributions.
class Rng {
 public:
  explicit Rng(std::uint32_t seed) : gen_(seed) {}
  std::uint32_t below(std::uint32_t n) { return static_cast<std::uint32_t>(gen_() % n); }
  bool chance(std::uint32_t percent) { return below(100) < percent; }

 private:
  std::mt19937 gen_;
};

/// Hospital-style log: 16 activities, 1,050 cases, concurrent lab tests,
/// optional treatment, repeated admissions, alternative releases and noise.
inline EventLog sepsis_style(std::uint32_t seed = 7) {
  static const std::vector<std::string> labs{"Leucocytes", "CRP", "LacticAcid"};
  static const std::vector<std::string> releases{"Release A", "Release B", "Release C", "Release D", "Release E"};
  static const std::vector<std::string> all{"ER Registration", "ER Triage", "ER Sepsis Triage", "IV Liquid",
                                            "IV Antibiotics", "Leucocytes", "CRP", "LacticAcid", "Admission NC",
                                            "Admission IC", "Release A", "Release B", "Release C", "Release D",
                                            "Release E", "Return ER"};
  Rng rng(seed);
  EventLog log;
  for (int c = 0; c < 1050; ++c) {
    std::vector<std::string> t{"ER Registration"};
    if (rng.chance(85)) {
      t.push_back("ER Triage");
      t.push_back("ER Sepsis Triage");
    } else {
      t.push_back("ER Sepsis Triage");
      t.push_back("ER Triage");
    }
    std::vector<std::string> batch(labs);
    if (rng.chance(30)) batch.pop_back();
    for (std::size_t i = batch.size(); i > 1; --i) std::swap(batch[i - 1], batch[rng.below(static_cast<std::uint32_t>(i))]);
    t.insert(t.end(), batch.begin(), batch.end());
    if (rng.chance(75)) {
      if (rng.chance(80)) t.push_back("IV Liquid");
      t.push_back("IV Antibiotics");
    }
    if (rng.chance(80)) {
      t.push_back(rng.chance(90) ? "Admission NC" : "Admission IC");
      while (rng.chance(35)) {
        t.push_back(labs[rng.below(2)]);
        if (rng.chance(40)) t.push_back("Admission NC");
      }
      const std::uint32_t r = rng.below(100);
      t.push_back(r < 70 ? releases[0] : r < 85 ? releases[1] : r < 93 ? releases[2] : r < 97 ? releases[3] : releases[4]);
      if (rng.chance(25)) t.push_back("Return ER");
    }
    if (rng.chance(6) && t.size() > 3) t.erase(t.begin() + 1 + rng.below(static_cast<std::uint32_t>(t.size() - 1)));
    if (rng.chance(4)) t.insert(t.begin() + rng.below(static_cast<std::uint32_t>(t.size() + 1)), all[rng.below(16)]);
    Trace trace;
    for (const auto& name : t) trace.push_back(Activity::observed(name));
    log.add_trace(trace);
  }
  return log;
}

/// Road-traffic-fine-shaped log with the public log's headline statistics:
/// 11 activities, 150,370 cases, 231 variants, 561,470 events.
inline EventLog rtfm_shaped(std::uint32_t seed = 11) {
  const std::string create = "Create Fine", send = "Send Fine", notify = "Insert Fine Notification",
                    penalty = "Add penalty", pay = "Payment", collect = "Send for Credit Collection",
                    date_appeal = "Insert Date Appeal to Prefecture", send_appeal = "Send Appeal to Prefecture",
                    result_appeal = "Receive Result Appeal from Prefecture",
                    notify_result = "Notify Result Appeal to Offender", judge = "Appeal to Judge";
  Rng rng(seed);
  std::set<std::vector<std::string>> seen;
  std::vector<std::vector<std::string>> variants;
  // Two dominant short variants first, then random walks until 231 distinct variants exist.
  variants.push_back({create, pay});
  variants.push_back({create, send, notify, penalty, collect});
  seen.insert(variants[0]);
  seen.insert(variants[1]);
  while (variants.size() < 231) {
    std::vector<std::string> t{create};
    if (rng.chance(20)) {
      for (std::uint32_t k = 0, n = 1 + rng.below(3); k < n; ++k) t.push_back(pay);
    }
    if (rng.chance(85)) {
      t.push_back(send);
      if (rng.chance(80)) t.push_back(notify);
      if (rng.chance(40)) {
        t.push_back(date_appeal);
        if (rng.chance(60)) t.push_back(send_appeal);
        if (rng.chance(50)) t.push_back(result_appeal);
        if (rng.chance(40)) t.push_back(notify_result);
      }
      if (rng.chance(70)) t.push_back(penalty);
      if (rng.chance(15)) t.push_back(judge);
      for (std::uint32_t k = 0, n = rng.below(4); k < n; ++k) t.push_back(pay);
      if (rng.chance(40)) t.push_back(collect);
    }
    if (rng.chance(10) && t.size() > 2) std::swap(t[t.size() - 1], t[t.size() - 2]);
    if (seen.insert(t).second) variants.push_back(std::move(t));
  }
  // Zipf-like counts, scaled to the case total, then nudged to the event total.
  const std::uint64_t cases = 150370, events = 561470;
  std::vector<std::uint64_t> counts(variants.size());
  double zsum = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) zsum += 1.0 / std::pow(static_cast<double>(i + 1), 1.6);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    counts[i] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(cases / zsum / std::pow(static_cast<double>(i + 1), 1.6)));
    assigned += counts[i];
  }
  counts[0] += cases - assigned;
  auto total_events = [&] {
    std::uint64_t e = 0;
    for (std::size_t i = 0; i < counts.size(); ++i) e += counts[i] * variants[i].size();
    return e;
  };
  // Move single cases between a short and a longer variant until the event total matches.
  const std::size_t shortest = 0;
  std::size_t longest = 1;
  for (std::size_t i = 0; i < variants.size(); ++i)
    if (variants[i].size() > variants[longest].size()) longest = i;
  std::size_t by_one_long = 1;
  for (std::size_t i = 0; i < variants.size(); ++i)
    if (variants[i].size() == variants[shortest].size() + 1) by_one_long = i;
  while (total_events() != events) {
    const auto e = total_events();
    if (e < events) {
      const std::uint64_t gap = events - e;
      const std::size_t target =
          gap >= variants[longest].size() - variants[shortest].size() ? longest : by_one_long;
      --counts[shortest];
      ++counts[target];
    } else {
      --counts[longest];
      ++counts[shortest];
    }
  }
  EventLog log;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    Trace t;
    for (const auto& name : variants[i]) t.push_back(Activity::observed(name));
    log.add_trace(t, counts[i]);
  }
  return log;
}

}  // namespace fixtures

namespace oracle {

using alphappp::Activity;
using alphappp::Dfg;
using alphappp::PlaceCandidate;
using alphappp::Trace;

/// Single place token simulation. `consume_first` selects the replay order for
/// activities in A1 ∩ A2: consume then produce (replay) or net no-op (fit).
inline bool simulate_place(const Trace& trace, const std::set<Activity>& producers, const std::set<Activity>& consumers,
                           bool consume_first) {
  long tokens = 0;
  for (const auto& a : trace) {
    const bool p = producers.contains(a), c = consumers.contains(a);
    if (consume_first) {
      if (c && --tokens < 0) return false;
      if (p) ++tokens;
    } else if (p && !c) {
      ++tokens;
    } else if (c && !p) {
      if (tokens == 0) return false;
      --tokens;
    }
  }
  return tokens == 0;
}

inline std::vector<std::set<Activity>> subsets(const std::vector<Activity>& acts, bool include_empty) {
  std::vector<std::set<Activity>> out;
  for (std::uint32_t mask = include_empty ? 0 : 1; mask < (1u << acts.size()); ++mask) {
    std::set<Activity> s;
    for (std::size_t i = 0; i < acts.size(); ++i)
      if (mask & (1u << i)) s.insert(acts[i]);
    out.push_back(std::move(s));
  }
  return out;
}

inline bool rel(const Dfg& dfg, const Activity& a, const Activity& b) { return dfg.weight(a, b) > 0; }

/// Cnd₀ by checking the four conjuncts on every pair of subsets.
inline std::set<PlaceCandidate> brute_cnd0(const Dfg& adfg) {
  const std::vector<Activity> acts(adfg.nodes().begin(), adfg.nodes().end());
  const auto all = subsets(acts, true);
  std::set<PlaceCandidate> out;
  for (const auto& a1 : all) {
    for (const auto& a2 : all) {
      std::set<Activity> only1, only2;
      std::set_difference(a1.begin(), a1.end(), a2.begin(), a2.end(), std::inserter(only1, only1.end()));
      std::set_difference(a2.begin(), a2.end(), a1.begin(), a1.end(), std::inserter(only2, only2.end()));
      bool ok = true;
      for (const auto& x : a1)
        for (const auto& y : a2) ok = ok && rel(adfg, x, y);
      for (const auto& x : a1)
        for (const auto& y : only1) ok = ok && !rel(adfg, x, y);
      for (const auto& x : only2)
        for (const auto& y : a2) ok = ok && !rel(adfg, x, y);
      bool witness = false;
      for (const auto& x : only1)
        for (const auto& y : only2) witness = witness || !rel(adfg, y, x);
      if (ok && witness) out.insert({a1, a2});
    }
  }
  return out;
}

/// Maximal elements under componentwise ⊆.
inline std::set<PlaceCandidate> brute_maximal(const std::set<PlaceCandidate>& cands) {
  std::set<PlaceCandidate> out;
  for (const auto& c : cands) {
    bool dominated = false;
    for (const auto& d : cands)
      if (!(c == d) && std::includes(d.producers.begin(), d.producers.end(), c.producers.begin(), c.producers.end()) &&
          std::includes(d.consumers.begin(), d.consumers.end(), c.consumers.begin(), c.consumers.end()))
        dominated = true;
    if (!dominated) out.insert(c);
  }
  return out;
}

/// Classical Alpha Sel by checking every pair of non-empty subsets of act(L).
inline std::set<PlaceCandidate> brute_alpha_sel(const alphappp::EventLog& log) {
  Dfg relation;
  for (const auto& [trace, count] : log.variants()) {
    for (const auto& a : trace) relation.add_node(a);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) relation.add_arc(trace[i], trace[i + 1], count);
  }
  const std::vector<Activity> acts(relation.nodes().begin(), relation.nodes().end());
  const auto all = subsets(acts, false);
  std::set<PlaceCandidate> cnd;
  for (const auto& a : all) {
    for (const auto& b : all) {
      bool ok = true;
      for (const auto& x : a)
        for (const auto& y : b) ok = ok && rel(relation, x, y);
      for (const auto& x : a)
        for (const auto& y : a) ok = ok && !rel(relation, x, y);
      for (const auto& x : b)
        for (const auto& y : b) ok = ok && !rel(relation, x, y);
      if (ok) cnd.insert({a, b});
    }
  }
  return brute_maximal(cnd);
}

/// Loop pairs by enumerating every simple path from ▶ over arcs of weight ≥ cutoff.
inline std::set<alphappp::LoopEndpoints> brute_loops(const Dfg& dfg, double cutoff) {
  std::set<alphappp::LoopEndpoints> out;
  auto strong = [&](const Activity& a, const Activity& b) {
    const auto w = dfg.weight(a, b);
    return w > 0 && static_cast<double>(w) >= cutoff;
  };
  std::vector<Activity> path{Activity::start()};
  std::function<void()> walk = [&] {
    const Activity b = path.back();
    if (!b.is_endpoint()) {
      for (const auto& a : path)
        if (!a.is_endpoint() && strong(b, a)) out.insert({b, a});
    }
    for (const auto& y : dfg.nodes()) {
      if (y.is_endpoint() || !strong(b, y) || std::find(path.begin(), path.end(), y) != path.end()) continue;
      path.push_back(y);
      walk();
      path.pop_back();
    }
  };
  walk();
  return out;
}

}  // namespace oracle
