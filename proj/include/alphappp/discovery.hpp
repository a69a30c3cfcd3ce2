#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "alphappp/candidates.hpp"
#include "alphappp/dfg.hpp"
#include "alphappp/error.hpp"
#include "alphappp/event_log.hpp"
#include "alphappp/log_repair.hpp"
#include "alphappp/petri_net.hpp"

namespace alphappp {

struct DiscoveryConfig {
  DfThreshold d = DfThreshold::relative(2.0);
  std::uint64_t n = 0;
  double b = 0.5;
  double t = 0.5;
  double r = 0.5;
  double problem_threshold = 1.0;
  std::optional<std::size_t> candidate_size_cap;
  double min_weight_fraction = 0.01;

  void validate() const {
    auto unit = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(name) + " must be in [0, 1], got " + std::to_string(v));
    };
    unit(b, "b");
    unit(t, "t");
    unit(r, "r");
    unit(problem_threshold, "problem_threshold");
    if (!(d.value >= 0.0)) throw ConfigError("d must be non-negative");
    if (!(min_weight_fraction >= 0.0)) throw ConfigError("min_weight_fraction must be non-negative");
    if (candidate_size_cap && *candidate_size_cap == 0) throw ConfigError("candidate_size_cap must be positive");
  }

  RepairConfig repair() const { return {d, problem_threshold}; }

  bool operator==(const DiscoveryConfig&) const = default;
};

/// The ten evaluation presets: d ∈ {2.0, 4.0} (relative) × five (b, t, r) triples.
inline const std::map<std::string, DiscoveryConfig>& presets() {
  static const std::map<std::string, DiscoveryConfig> table = [] {
    std::map<std::string, DiscoveryConfig> out;
    const struct {
      const char* tag;
      double b, t, r;
    } triples[] = {{"b0.5t0.5r0.5", 0.5, 0.5, 0.5},
                   {"b0.3t0.7r0.6", 0.3, 0.7, 0.6},
                   {"b0.2t0.8r0.7", 0.2, 0.8, 0.7},
                   {"b0.2t0.8r0.8", 0.2, 0.8, 0.8},
                   {"b0.1t0.9r0.9", 0.1, 0.9, 0.9}};
    for (const char* d : {"2.0", "4.0"}) {
      for (const auto& tr : triples) {
        DiscoveryConfig c;
        c.d = DfThreshold::relative(std::stod(d));
        c.n = 0;
        c.b = tr.b;
        c.t = tr.t;
        c.r = tr.r;
        c.problem_threshold = 1.0;
        out.emplace(std::string(d) + "/" + tr.tag, c);
      }
    }
    return out;
  }();
  return table;
}

inline DiscoveryConfig preset(const std::string& name) {
  auto it = presets().find(name);
  if (it != presets().end()) return it->second;
  std::string valid;
  for (const auto& [k, _] : presets()) valid += (valid.empty() ? "" : ", ") + k;
  throw ConfigError("unknown preset '" + name + "'; valid presets: " + valid);
}

inline nlohmann::json to_json(const DiscoveryConfig& c) {
  nlohmann::json j{{"d", {{"value", c.d.value}, {"mode", c.d.mode == ThresholdMode::relative ? "relative" : "absolute"}}},
                   {"n", c.n},
                   {"b", c.b},
                   {"t", c.t},
                   {"r", c.r},
                   {"problem_threshold", c.problem_threshold},
                   {"min_weight_fraction", c.min_weight_fraction}};
  j["candidate_size_cap"] = c.candidate_size_cap ? nlohmann::json(*c.candidate_size_cap) : nlohmann::json(nullptr);
  return j;
}

/// Reads a config object; an optional "preset" key seeds the values that the other keys override.
inline DiscoveryConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  try {
    DiscoveryConfig c = j.contains("preset") ? preset(j.at("preset").get<std::string>()) : DiscoveryConfig{};
    if (j.contains("d")) {
      const auto& d = j.at("d");
      if (d.is_number()) {
        c.d.value = d.get<double>();
      } else {
        c.d.value = d.at("value").get<double>();
        const auto mode = d.value("mode", std::string("absolute"));
        if (mode == "relative") {
          c.d.mode = ThresholdMode::relative;
        } else if (mode == "absolute") {
          c.d.mode = ThresholdMode::absolute;
        } else {
          throw ConfigError("d.mode must be 'absolute' or 'relative'");
        }
      }
    }
    if (j.contains("n")) {
      if (!j.at("n").is_number_integer() || j.at("n").get<std::int64_t>() < 0)
        throw ConfigError("n must be a non-negative integer");
      c.n = j.at("n").get<std::uint64_t>();
    }
    if (j.contains("b")) c.b = j.at("b").get<double>();
    if (j.contains("t")) c.t = j.at("t").get<double>();
    if (j.contains("r")) c.r = j.at("r").get<double>();
    if (j.contains("problem_threshold")) c.problem_threshold = j.at("problem_threshold").get<double>();
    if (j.contains("min_weight_fraction")) c.min_weight_fraction = j.at("min_weight_fraction").get<double>();
    if (j.contains("candidate_size_cap") && !j.at("candidate_size_cap").is_null()) {
      if (!j.at("candidate_size_cap").is_number_integer() || j.at("candidate_size_cap").get<std::int64_t>() <= 0)
        throw ConfigError("candidate_size_cap must be a positive integer");
      c.candidate_size_cap = j.at("candidate_size_cap").get<std::size_t>();
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config JSON: ") + e.what());
  }
}

struct StageReport {
  RepairReport repair;
  std::size_t adfg_arcs_kept = 0;
  std::size_t adfg_arcs_removed = 0;
  CandidateStageCounts candidates;
  bool candidate_cap_hit = false;
  std::size_t places = 0;
  std::size_t places_pruned = 0;
  std::size_t disconnected_labeled = 0;
  bool repair_cached = false;
  bool candidates_cached = false;
  /// Structural issues worth surfacing, such as an empty initial marking.
  std::vector<std::string> warnings;
  /// Milliseconds per stage, monotonic clock.
  std::map<std::string, double> wall_ms;
};

inline nlohmann::json to_json(const StageReport& r) {
  return {{"repair", to_json(r.repair)},
          {"adfg", {{"arcs_kept", r.adfg_arcs_kept}, {"arcs_removed", r.adfg_arcs_removed}}},
          {"candidates",
           {{"cnd0", r.candidates.cnd0},
            {"cnd1", r.candidates.cnd1},
            {"cnd2", r.candidates.cnd2},
            {"sel", r.candidates.sel},
            {"cap_hit", r.candidate_cap_hit}}},
          {"places", r.places},
          {"places_pruned", r.places_pruned},
          {"disconnected_labeled", r.disconnected_labeled},
          {"cache", {{"repair", r.repair_cached}, {"candidates", r.candidates_cached}}},
          {"warnings", r.warnings},
          {"wall_ms", r.wall_ms}};
}

namespace detail {

class StageTimer {
 public:
  double lap_ms() {
    const auto now = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
    return ms;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace detail

/// Output of the log-repair stage; depends only on (problem_threshold, d).
struct RepairStage {
  EventLog repaired;
  RepairReport report;
  double wall_ms = 0;
};

/// Advising DFG and Cnd₀; depends on the repair stage plus (n, min_weight_fraction, cap).
struct CandidatePool {
  Dfg adfg;
  std::size_t arcs_kept = 0;
  std::size_t arcs_removed = 0;
  CompiledLog compiled;
  std::vector<IndexedCandidate> cnd0;
  bool cap_hit = false;
  double adfg_ms = 0;
  double enumerate_ms = 0;
};

/// Per-candidate evidence for the candidate dump.
struct CandidateRecord {
  PlaceCandidate candidate;
  double balance = 0;
  std::optional<CandidateFitness> fitness;
  std::string stage_survived;
};

struct DiscoveryResult {
  AcceptingPetriNet net;
  StageReport report;
  /// The repaired, augmented log the net was discovered from.
  EventLog repaired;
  std::vector<CandidateRecord> records;
};

inline RepairStage run_repair(const EventLog& log, const DiscoveryConfig& cfg) {
  if (log.empty()) throw Error("cannot discover a model from an empty event log");
  detail::StageTimer timer;
  auto [repaired, report] = repair_log(log, cfg.repair());
  return {std::move(repaired), std::move(report), timer.lap_ms()};
}

inline CandidatePool build_candidate_pool(const RepairStage& repair, const DiscoveryConfig& cfg) {
  detail::StageTimer timer;
  Dfg adfg = build_advising_dfg(repair.repaired, cfg.n, cfg.min_weight_fraction);
  const std::size_t total_arcs = build_dfg(repair.repaired).arcs().size();
  CompiledLog compiled(repair.repaired, ActivityIndex(adfg.nodes()));
  const double adfg_ms = timer.lap_ms();
  auto enumerated = enumerate_indexed(adfg, compiled.index(), cfg.candidate_size_cap);
  const std::size_t kept = adfg.arcs().size();
  return CandidatePool{std::move(adfg),          kept,
                       total_arcs - kept,        std::move(compiled),
                       std::move(enumerated.candidates), enumerated.cap_hit,
                       adfg_ms,                  timer.lap_ms()};
}

/// Balance and fitness pruning, maximal selection, net construction and place replay pruning.
inline DiscoveryResult finish_discovery(const RepairStage& repair, const CandidatePool& pool,
                                        const DiscoveryConfig& cfg, bool keep_records = false) {
  cfg.validate();
  detail::StageTimer timer;
  DiscoveryResult out;
  StageReport& report = out.report;
  out.repaired = repair.repaired;
  report.repair = repair.report;
  report.adfg_arcs_kept = pool.arcs_kept;
  report.adfg_arcs_removed = pool.arcs_removed;
  report.candidate_cap_hit = pool.cap_hit;
  report.wall_ms["repair"] = repair.wall_ms;
  report.wall_ms["advising_dfg"] = pool.adfg_ms;
  report.wall_ms["enumerate"] = pool.enumerate_ms;
  report.candidates.cnd0 = pool.cnd0.size();

  const CompiledLog& log = pool.compiled;
  std::vector<double> balances(pool.cnd0.size());
  std::vector<std::optional<CandidateFitness>> fitness(pool.cnd0.size());
  std::vector<std::size_t> cnd1, cnd2;
  for (std::size_t i = 0; i < pool.cnd0.size(); ++i) {
    balances[i] = log.balance(pool.cnd0[i]);
    if (balances[i] <= cfg.b) cnd1.push_back(i);
  }
  report.candidates.cnd1 = cnd1.size();
  report.wall_ms["balance"] = timer.lap_ms();

  for (std::size_t i : cnd1) {
    fitness[i] = log.fitness(pool.cnd0[i]);
    if (fitness[i] && fitness[i]->overall >= cfg.t && fitness[i]->mfit >= cfg.t) cnd2.push_back(i);
  }
  report.candidates.cnd2 = cnd2.size();
  report.wall_ms["fitness"] = timer.lap_ms();

  std::vector<IndexedCandidate> survivors;
  survivors.reserve(cnd2.size());
  for (std::size_t i : cnd2) survivors.push_back(pool.cnd0[i]);
  const auto selected = select_maximal(survivors);
  report.candidates.sel = selected.size();
  report.wall_ms["maximal"] = timer.lap_ms();

  std::vector<PlaceCandidate> sel;
  sel.reserve(selected.size());
  for (const auto& c : selected) sel.push_back(to_candidate(log.index(), c));
  const std::set<Activity> acts(log.index().activities().begin(), log.index().activities().end());
  const AcceptingPetriNet full = construct_net(sel, acts);
  report.wall_ms["construct"] = timer.lap_ms();

  std::vector<bool> keep(selected.size());
  for (std::size_t i = 0; i < selected.size(); ++i) {
    auto score = log.replay_score(selected[i]);
    keep[i] = score && *score >= cfg.r;
  }
  out.net = detail::restrict_places(full, keep);
  report.places = out.net.net.places().size();
  report.places_pruned = selected.size() - report.places;
  report.disconnected_labeled = disconnected_transitions(out.net).size();
  if (out.net.initial.empty()) report.warnings.push_back("initial marking is empty: no place with ▶ in A1 survived");
  if (out.net.final.empty()) report.warnings.push_back("final marking is empty: no place with ■ in A2 survived");
  report.wall_ms["replay"] = timer.lap_ms();

  if (keep_records) {
    std::set<std::size_t> in1(cnd1.begin(), cnd1.end()), in2(cnd2.begin(), cnd2.end());
    std::set<PlaceCandidate> in_sel(sel.begin(), sel.end());
    for (std::size_t i = 0; i < pool.cnd0.size(); ++i) {
      CandidateRecord rec{to_candidate(log.index(), pool.cnd0[i]), balances[i], fitness[i], "cnd0"};
      if (in1.contains(i)) rec.stage_survived = "cnd1";
      if (in2.contains(i)) rec.stage_survived = in_sel.contains(rec.candidate) ? "sel" : "cnd2";
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

/// augment → repair → advising DFG → Cnd₀ → balance → fitness → maximal → net → place replay.
inline DiscoveryResult discover_alphappp(const EventLog& log, const DiscoveryConfig& cfg, bool keep_records = false) {
  cfg.validate();
  const RepairStage repair = run_repair(log, cfg);
  if (activities(repair.repaired).empty()) throw Error("repaired log has no activities");
  const CandidatePool pool = build_candidate_pool(repair, cfg);
  return finish_discovery(repair, pool, cfg, keep_records);
}

inline nlohmann::json to_json(const CandidateRecord& r) {
  nlohmann::json a1 = nlohmann::json::array(), a2 = nlohmann::json::array();
  for (const auto& a : r.candidate.producers) a1.push_back(a.label());
  for (const auto& a : r.candidate.consumers) a2.push_back(a.label());
  nlohmann::json j{{"A1", std::move(a1)}, {"A2", std::move(a2)}, {"balance", r.balance}};
  j["overall"] = r.fitness ? nlohmann::json(r.fitness->overall) : nlohmann::json(nullptr);
  j["mfit"] = r.fitness ? nlohmann::json(r.fitness->mfit) : nlohmann::json(nullptr);
  j["stage_survived"] = r.stage_survived;
  return j;
}

/// One JSON object per line, in canonical candidate order.
inline std::string candidate_dump(const std::vector<CandidateRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Classical Alpha.

struct ClassicAlphaResult {
  AcceptingPetriNet net;
  std::vector<PlaceCandidate> selected;
};

/// Classical Alpha over the unthresholded directly-follows relation of an
/// unaugmented log: source place i_W, sink place o_W, one place per maximal candidate.
inline ClassicAlphaResult discover_alpha_classic_detailed(const EventLog& log) {
  if (log.augmented()) throw Error("classical Alpha expects a log without ▶/■");
  if (log.empty()) throw Error("cannot discover a model from an empty event log");
  Dfg relation;
  std::set<Activity> starts, ends;
  for (const auto& [trace, count] : log.variants()) {
    for (const auto& a : trace) relation.add_node(a);
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) relation.add_arc(trace[i], trace[i + 1], count);
    if (!trace.empty()) {
      starts.insert(trace.front());
      ends.insert(trace.back());
    }
  }
  const ActivityIndex index(relation.nodes());
  auto enumerated = detail::CandidateEnumerator(adjacency(relation, index), std::nullopt, true).run();
  const auto maximal = select_maximal(enumerated.candidates);

  ClassicAlphaResult out;
  auto& net = out.net;
  std::map<Activity, TransitionId> tid;
  for (const auto& a : index.activities()) tid.emplace(a, net.net.add_transition({a, a.label()}));
  const PlaceId source = net.net.add_place({"i_W", std::nullopt});
  for (const auto& c : maximal) {
    PlaceCandidate cand = to_candidate(index, c);
    const PlaceId p = net.net.add_place({"p_" + cand.label(), cand});
    for (const auto& a : cand.producers) net.net.add_arc(tid.at(a), p);
    for (const auto& a : cand.consumers) net.net.add_arc(p, tid.at(a));
    out.selected.push_back(std::move(cand));
  }
  const PlaceId sink = net.net.add_place({"o_W", std::nullopt});
  for (const auto& s : starts) net.net.add_arc(source, tid.at(s));
  for (const auto& e : ends) net.net.add_arc(tid.at(e), sink);
  net.initial[source] = 1;
  net.final[sink] = 1;
  return out;
}

inline AcceptingPetriNet discover_alpha_classic(const EventLog& log) { return discover_alpha_classic_detailed(log).net; }

}  // namespace alphappp
