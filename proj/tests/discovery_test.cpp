#include <gtest/gtest.h>

#include <chrono>

#include "fixtures.hpp"

using namespace alphappp;
using fixtures::act;
using fixtures::augmented;
using fixtures::tr;

namespace {

const Activity S = Activity::start();
const Activity E = Activity::end();

DiscoveryConfig absolute_config(double d, double b, double t, double r) {
  DiscoveryConfig c;
  c.d = DfThreshold::absolute(d);
  c.b = b;
  c.t = t;
  c.r = r;
  return c;
}

std::set<PlaceCandidate> origins(const AcceptingPetriNet& net) {
  std::set<PlaceCandidate> out;
  for (const auto& p : net.net.places())
    if (p.origin) out.insert(*p.origin);
  return out;
}

PlaceCandidate strip_endpoints(PlaceCandidate c) {
  c.producers.erase(S);
  c.consumers.erase(E);
  return c;
}

}  // namespace

TEST(Presets, TableHeads) {
  EXPECT_EQ(presets().size(), 10u);
  const auto first = preset("2.0/b0.5t0.5r0.5");
  EXPECT_EQ(first.d, DfThreshold::relative(2.0));
  EXPECT_EQ(first.n, 0u);
  EXPECT_DOUBLE_EQ(first.b, 0.5);
  EXPECT_DOUBLE_EQ(first.problem_threshold, 1.0);
  const auto last = preset("4.0/b0.1t0.9r0.9");
  EXPECT_EQ(last.d, DfThreshold::relative(4.0));
  EXPECT_DOUBLE_EQ(last.b, 0.1);
  EXPECT_DOUBLE_EQ(last.t, 0.9);
  EXPECT_DOUBLE_EQ(last.r, 0.9);
  EXPECT_EQ(DiscoveryConfig{}, first);
}

TEST(Presets, UnknownNameListsValidOnes) {
  try {
    preset("3.0/b0.5t0.5r0.5");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("2.0/b0.5t0.5r0.5"), std::string::npos);
    EXPECT_NE(msg.find("4.0/b0.1t0.9r0.9"), std::string::npos);
  }
}

TEST(Config, JsonRoundTrip) {
  auto c = preset("4.0/b0.2t0.8r0.7");
  c.candidate_size_cap = 9;
  EXPECT_EQ(config_from_json(to_json(c)), c);
  const auto j = to_json(DiscoveryConfig{});
  EXPECT_EQ(j["d"]["mode"], "relative");
  EXPECT_EQ(j["d"]["value"], 2.0);
  EXPECT_TRUE(j["candidate_size_cap"].is_null());
}

TEST(Config, PresetWithOverrides) {
  const auto c = config_from_json({{"preset", "2.0/b0.3t0.7r0.6"}, {"r", 0.9}, {"d", 3}});
  EXPECT_DOUBLE_EQ(c.b, 0.3);
  EXPECT_DOUBLE_EQ(c.r, 0.9);
  EXPECT_EQ(c.d, DfThreshold::relative(3.0));
  EXPECT_EQ(config_from_json({{"d", {{"value", 1}, {"mode", "absolute"}}}}).d, DfThreshold::absolute(1.0));
}

TEST(Config, Rejections) {
  EXPECT_THROW(config_from_json({{"b", 1.5}}), ConfigError);
  EXPECT_THROW(config_from_json({{"n", -1}}), ConfigError);
  EXPECT_THROW(config_from_json({{"d", {{"value", 1}, {"mode", "sideways"}}}}), ConfigError);
  EXPECT_THROW(config_from_json({{"t", "high"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"preset", "nope"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"candidate_size_cap", 0}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json::array()), ConfigError);
  EXPECT_THROW(discover_alphappp(fixtures::l1(), absolute_config(1, -0.1, 0.5, 0.5)), ConfigError);
}

TEST(Discover, EmptyLogIsAnError) {
  EXPECT_THROW(discover_alphappp(EventLog{}, DiscoveryConfig{}), Error);
}

TEST(Discover, LoopLogGetsSilentLoopBack) {
  const auto result = discover_alphappp(fixtures::l_loop(), absolute_config(1, 0.5, 0.5, 0.5));
  const Activity tau = Activity::loop("c", "a");
  const auto t = result.net.net.find_transition(tau);
  ASSERT_TRUE(t);
  EXPECT_TRUE(result.net.net.transition(*t).silent());
  EXPECT_FALSE(result.net.net.preset(*t).empty());
  EXPECT_FALSE(result.net.net.postset(*t).empty());
  for (const auto& [trace, n] : result.repaired.variants()) EXPECT_TRUE(replay_net(result.net, trace).fits);
  // The unrepaired traces replay too: the silent loop-back fires on demand.
  const auto raw = fixtures::l_loop();
  for (const auto& [trace, n] : raw.variants()) EXPECT_TRUE(replay_net(result.net, trace).fits);
  EXPECT_EQ(result.report.repair.loops, (std::set<LoopEndpoints>{{act("c"), act("a")}}));
}

TEST(Discover, L2MatchesClassicAlpha) {
  const auto plus = discover_alphappp(fixtures::l2(), absolute_config(1, 1.0, 0.0, 0.0));
  const auto classic = discover_alpha_classic_detailed(fixtures::l2());
  std::set<PlaceCandidate> inner;
  std::size_t sources = 0, sinks = 0;
  for (const auto& c : origins(plus.net)) {
    if (c == PlaceCandidate{{S}, {act("a")}}) ++sources;
    else if (c == PlaceCandidate{{act("d")}, {E}}) ++sinks;
    else inner.insert(strip_endpoints(c));
  }
  EXPECT_EQ(sources, 1u);
  EXPECT_EQ(sinks, 1u);
  EXPECT_EQ(inner, std::set<PlaceCandidate>(classic.selected.begin(), classic.selected.end()));
  EXPECT_EQ(plus.net.net.places().size(), classic.net.net.places().size());
}

TEST(Discover, ReportCountsAreConsistent) {
  const auto result = discover_alphappp(fixtures::sepsis_style(), preset("2.0/b0.3t0.7r0.6"), true);
  const auto& r = result.report;
  EXPECT_GE(r.candidates.cnd0, r.candidates.cnd1);
  EXPECT_GE(r.candidates.cnd1, r.candidates.cnd2);
  EXPECT_GE(r.candidates.cnd2, r.candidates.sel);
  EXPECT_EQ(r.candidates.sel, r.places + r.places_pruned);
  EXPECT_EQ(r.places, result.net.net.places().size());
  EXPECT_EQ(r.disconnected_labeled, disconnected_transitions(result.net).size());
  EXPECT_EQ(r.adfg_arcs_kept + r.adfg_arcs_removed, build_dfg(result.repaired).arcs().size());
  EXPECT_EQ(result.records.size(), r.candidates.cnd0);
  std::map<std::string, std::size_t> stages;
  for (const auto& rec : result.records) ++stages[rec.stage_survived];
  EXPECT_EQ(stages["sel"], r.candidates.sel);
  EXPECT_EQ(stages["sel"] + stages["cnd2"], r.candidates.cnd2);
  for (const char* key : {"repair", "advising_dfg", "enumerate", "balance", "fitness", "maximal", "construct", "replay"})
    EXPECT_TRUE(r.wall_ms.contains(key)) << key;
  const auto j = to_json(r);
  EXPECT_EQ(j["candidates"]["cnd0"], r.candidates.cnd0);
  EXPECT_TRUE(j["warnings"].is_array());
}

TEST(Discover, CandidateDumpLines) {
  const auto result = discover_alphappp(fixtures::l2(), absolute_config(1, 1.0, 0.0, 0.0), true);
  const std::string dump = candidate_dump(result.records);
  std::istringstream in(dump);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("A1") && j.contains("A2") && j.contains("balance") && j.contains("stage_survived"));
    ++n;
  }
  EXPECT_EQ(n, result.records.size());
}

TEST(Discover, SurvivingPlacesMeetReplayThreshold) {
  for (const auto& log : {fixtures::l1(), fixtures::sepsis_style(), fixtures::skip_choice()}) {
    for (double r : {0.5, 0.7, 0.9}) {
      auto cfg = DiscoveryConfig{};
      cfg.r = r;
      const auto result = discover_alphappp(log, cfg);
      for (const auto& p : result.net.net.places()) {
        const auto score = place_replay_score(*p.origin, result.repaired);
        ASSERT_TRUE(score);
        EXPECT_GE(*score, r) << p.name;
      }
    }
  }
}

TEST(Discover, MatchesStepwiseComposition) {
  const auto cfg = preset("2.0/b0.3t0.7r0.6");
  const auto log = fixtures::sepsis_style();
  const auto result = discover_alphappp(log, cfg);
  const auto [repaired, _] = repair_log(log, cfg.repair());
  auto cands = enumerate_candidates(build_advising_dfg(repaired, cfg.n));
  cands = prune_fitness(prune_balance(cands, activity_multiset(repaired), cfg.b), repaired, cfg.t);
  cands = select_maximal(cands);
  const auto stepwise = prune_places(construct_net(cands, activities(repaired)), repaired, cfg.r);
  EXPECT_EQ(origins(result.net), origins(stepwise));
  EXPECT_EQ(result.net.initial.size(), stepwise.initial.size());
  EXPECT_EQ(to_pnml(result.net), to_pnml(stepwise));
}

TEST(Discover, Deterministic) {
  for (const auto& log : {fixtures::l1(), fixtures::l_loop(), fixtures::sepsis_style()}) {
    const auto a = discover_alphappp(log, DiscoveryConfig{});
    const auto b = discover_alphappp(log, DiscoveryConfig{});
    EXPECT_EQ(to_pnml(a.net), to_pnml(b.net));
  }
}

TEST(Discover, EmptyMarkingsAreReported) {
  // With r = 1 on a noisy log no ▶ place survives.
  const auto log = fixtures::log_of({{"ab", 5}, {"ba", 5}});
  const auto result = discover_alphappp(log, absolute_config(100, 1.0, 0.0, 1.0));
  if (result.net.initial.empty()) {
    ASSERT_FALSE(result.report.warnings.empty());
    EXPECT_NE(result.report.warnings[0].find("initial marking"), std::string::npos);
  }
  const auto clean = discover_alphappp(fixtures::l2(), absolute_config(1, 1.0, 0.0, 0.0));
  EXPECT_TRUE(clean.report.warnings.empty());
}

TEST(ClassicAlpha, ChoiceLog) {
  const auto result = discover_alpha_classic_detailed(fixtures::l2());
  const std::set<PlaceCandidate> sel(result.selected.begin(), result.selected.end());
  EXPECT_EQ(sel, (std::set<PlaceCandidate>{{{act("a")}, {act("b"), act("c")}}, {{act("b"), act("c")}, {act("d")}}}));
  EXPECT_EQ(result.net.net.places().size(), 4u);
  EXPECT_EQ(result.net.net.place(result.net.initial.begin()->first).name, "i_W");
  EXPECT_EQ(result.net.net.place(result.net.final.begin()->first).name, "o_W");
  EXPECT_TRUE(replay_net(result.net, tr("abd")).fits);
  EXPECT_TRUE(replay_net(result.net, tr("acd")).fits);
  EXPECT_FALSE(replay_net(result.net, tr("ad")).fits);
}

TEST(ClassicAlpha, SingleActivity) {
  const auto result = discover_alpha_classic_detailed(fixtures::log_of({{"a", 1}}));
  EXPECT_TRUE(result.selected.empty());
  EXPECT_EQ(result.net.net.places().size(), 2u);
  EXPECT_TRUE(replay_net(result.net, tr("a")).fits);
}

TEST(ClassicAlpha, MutualFollowingStaysApart) {
  const auto result = discover_alpha_classic_detailed(fixtures::log_of({{"ab", 1}, {"ba", 1}}));
  for (const auto& c : result.selected) {
    EXPECT_FALSE(c.producers.contains(act("a")) && c.producers.contains(act("b")));
    EXPECT_FALSE(c.consumers.contains(act("a")) && c.consumers.contains(act("b")));
  }
}

TEST(ClassicAlpha, RejectsAugmentedAndEmpty) {
  EXPECT_THROW(discover_alpha_classic(augment_endpoints(fixtures::l2())), Error);
  EXPECT_THROW(discover_alpha_classic(EventLog{}), Error);
}

TEST(ClassicAlpha, MatchesBruteForce) {
  std::mt19937 rng(3);
  for (int round = 0; round < 30; ++round) {
    EventLog log;
    const int alphabet = 3 + round % 3;
    for (int v = 0, nv = 1 + static_cast<int>(rng() % 4); v < nv; ++v) {
      std::string s;
      for (std::size_t k = 0, len = 1 + rng() % 5; k < len; ++k) s += static_cast<char>('a' + rng() % alphabet);
      log.add_trace(tr(s), 1 + rng() % 3);
    }
    const auto result = discover_alpha_classic_detailed(log);
    EXPECT_EQ(std::set<PlaceCandidate>(result.selected.begin(), result.selected.end()), oracle::brute_alpha_sel(log))
        << round;
  }
}

TEST(ClassicAlpha, L1TopVariant) {
  const auto top = filter_variants(fixtures::l1(), VariantFilter::top(1));
  const auto net = discover_alpha_classic(top);
  EXPECT_TRUE(replay_net(net, tr("abcd")).fits);
}

TEST(Discover, RtfmShapedScale) {
  const auto log = fixtures::rtfm_shaped();
  const auto start = std::chrono::steady_clock::now();
  const auto result = discover_alphappp(log, preset("2.0/b0.5t0.5r0.5"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double fraction = fitting_fraction(result.net, result.repaired);
  RecordProperty("seconds", std::to_string(secs));
  RecordProperty("fitting_fraction", std::to_string(fraction));
  EXPECT_LT(secs, 600.0);
  EXPECT_GE(fraction, 0.5);
}
