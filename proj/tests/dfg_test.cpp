#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace alphappp;
using fixtures::act;

namespace {

const Activity S = Activity::start();
const Activity E = Activity::end();

}  // namespace

TEST(Dfg, L1ArcWeights) {
  const Dfg dfg = build_dfg(fixtures::l1());
  const std::map<Dfg::Arc, std::uint64_t> expected{
      {{S, act("a")}, 650}, {{S, act("d")}, 6},     {{act("a"), act("b")}, 656}, {{act("b"), act("c")}, 404},
      {{act("b"), act("d")}, 250}, {{act("b"), E}, 2}, {{act("c"), act("d")}, 400}, {{act("c"), E}, 4},
      {{act("d"), act("a")}, 6},   {{act("d"), E}, 650}};
  EXPECT_EQ(dfg.arcs(), expected);
  EXPECT_EQ(weight(dfg, act("b"), act("c")), 404u);
  EXPECT_EQ(weight(dfg, act("c"), act("b")), 0u);
  EXPECT_EQ(weight(dfg, E, S), 0u);
  // The ten weights sum to 3028.
  EXPECT_DOUBLE_EQ(mean_weight(dfg), 302.8);
  EXPECT_EQ(build_dfg(augment_endpoints(fixtures::l1())), dfg);
}

TEST(Dfg, EmptyTracesAndSelfLoops) {
  EventLog empty;
  empty.add_trace({}, 3);
  EXPECT_EQ(build_dfg(empty).weight(S, E), 3u);
  EventLog self;
  self.add_trace(fixtures::tr("aa"));
  EXPECT_EQ(build_dfg(self).weight(act("a"), act("a")), 1u);
}

TEST(Dfg, ForbiddenArcDirections) {
  Dfg dfg;
  EXPECT_THROW(dfg.add_arc(act("a"), S, 1), Error);
  EXPECT_THROW(dfg.add_arc(E, act("a"), 1), Error);
}

TEST(Dfg, ThresholdRelation) {
  const Dfg dfg = build_dfg(fixtures::l1());
  EXPECT_TRUE(df_holds(dfg, act("b"), act("d"), DfThreshold::absolute(250)));
  EXPECT_FALSE(df_holds(dfg, act("b"), act("d"), DfThreshold::absolute(251)));
  EXPECT_TRUE(df_holds(dfg, act("c"), act("b"), DfThreshold::absolute(0)));
  EXPECT_TRUE(df_holds(dfg, act("b"), act("c"), DfThreshold::relative(1.0)));
  EXPECT_FALSE(df_holds(dfg, act("b"), act("c"), DfThreshold::relative(1.5)));
  EXPECT_FALSE(df_holds(dfg, act("b"), act("d"), DfThreshold::relative(1.0)));
}

TEST(Dfg, MeanWeight) {
  Dfg two;
  two.add_arc(act("x"), act("y"), 2);
  two.add_arc(act("y"), act("x"), 4);
  EXPECT_DOUBLE_EQ(mean_weight(two), 3.0);
  Dfg one;
  one.add_arc(act("x"), act("y"), 7);
  EXPECT_DOUBLE_EQ(mean_weight(one), 7.0);
  EXPECT_THROW(mean_weight(Dfg{}), Error);
}

TEST(Dfg, AdvisingDfgOfL1) {
  const auto log = augment_endpoints(fixtures::l1());
  const Dfg full = build_dfg(log);
  const Dfg adfg = build_advising_dfg(log, 0);
  EXPECT_EQ(adfg.nodes(), full.nodes());
  EXPECT_EQ(adfg.weight(act("b"), E), 0u);
  EXPECT_EQ(adfg.weight(act("a"), act("b")), 656u);
  // 0.01·min(in(d), out(▶)) = 6.56 and 0.01·min(in(a), out(d)) = 6.56: both weight-6 arcs fall below.
  EXPECT_EQ(adfg.weight(S, act("d")), 0u);
  EXPECT_EQ(adfg.weight(act("d"), act("a")), 0u);
  // c→■: 0.01·min(656, 404) = 4.04 > 4.
  EXPECT_EQ(adfg.weight(act("c"), E), 0u);
  EXPECT_EQ(adfg.arcs().size(), 6u);
  for (const auto& [arc, w] : adfg.arcs()) EXPECT_EQ(full.weight(arc.first, arc.second), w);
}

TEST(Dfg, AdvisingBoundaryIsInclusive) {
  // in(b) = out(a) = 100, so minW(a,b) = 1.0 and a weight-1 arc survives.
  EventLog log;
  log.add_trace(fixtures::tr("ab"), 1);
  log.add_trace(fixtures::tr("ac"), 99);
  log.add_trace(fixtures::tr("db"), 99);
  const Dfg adfg = build_advising_dfg(log, 0);
  EXPECT_EQ(adfg.weight(act("a"), act("b")), 1u);
  EXPECT_EQ(build_advising_dfg(log, 2).weight(act("a"), act("b")), 0u);
}

TEST(Dfg, AdvisingWithLargeCutoffKeepsNodes) {
  const auto log = fixtures::l1();
  const Dfg adfg = build_advising_dfg(log, 10000);
  EXPECT_TRUE(adfg.arcs().empty());
  EXPECT_EQ(adfg.nodes().size(), 6u);
}

TEST(Dfg, FlowConservation) {
  for (const auto& log : {fixtures::l1(), fixtures::sepsis_style(), fixtures::l_loop()}) {
    const Dfg dfg = build_dfg(log);
    EXPECT_EQ(dfg.outgoing(S), log.total_cases());
    EXPECT_EQ(dfg.incoming(E), log.total_cases());
    const auto counts = activity_multiset(log);
    for (const auto& [a, n] : counts) {
      EXPECT_EQ(dfg.incoming(a), n) << a.label();
      EXPECT_EQ(dfg.outgoing(a), n) << a.label();
    }
  }
}

TEST(Dfg, AdditiveOverLogUnion) {
  const auto x = fixtures::l1(), y = fixtures::l_loop();
  EventLog both = x;
  for (const auto& [t, n] : y.variants()) both.add_trace(t, n);
  const Dfg dx = build_dfg(x), dy = build_dfg(y), db = build_dfg(both);
  for (const auto& [arc, w] : db.arcs()) EXPECT_EQ(w, dx.weight(arc.first, arc.second) + dy.weight(arc.first, arc.second));
}

TEST(Dfg, DotHasStableOrder) {
  const Dfg dfg = build_dfg(fixtures::l1());
  const std::string dot = to_dot(dfg);
  EXPECT_EQ(dot, to_dot(build_dfg(fixtures::l1())));
  EXPECT_LT(dot.find("▶"), dot.find("\"a\""));
  EXPECT_LT(dot.find("\"d\""), dot.find("■"));
  EXPECT_NE(dot.find("label=\"650\""), std::string::npos);
}
