#pragma once

#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "alphappp/dfg.hpp"
#include "alphappp/petri_net.hpp"

namespace alphappp {

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string place_xml_id(PlaceId p) { return "p" + std::to_string(p.value); }
inline std::string transition_xml_id(TransitionId t) { return "t" + std::to_string(t.value); }

}  // namespace detail

/// PNML place/transition net. Silent transitions carry the ProM
/// `activity="$invisible$"` toolspecific marker; the final marking is written in
/// a `<finalmarkings>` block after the page.
inline std::string to_pnml(const AcceptingPetriNet& net, const std::string& name = "alphappp") {
  using detail::xml_escape;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<pnml>\n"
     << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n"
     << "    <name><text>" << xml_escape(name) << "</text></name>\n"
     << "    <page id=\"n0\">\n";
  const auto& places = net.net.places();
  for (std::size_t i = 0; i < places.size(); ++i) {
    const PlaceId p{i};
    os << "      <place id=\"" << detail::place_xml_id(p) << "\">\n"
       << "        <name><text>" << xml_escape(places[i].name) << "</text></name>\n";
    if (auto it = net.initial.find(p); it != net.initial.end())
      os << "        <initialMarking><text>" << it->second << "</text></initialMarking>\n";
    os << "      </place>\n";
  }
  const auto& transitions = net.net.transitions();
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    os << "      <transition id=\"" << detail::transition_xml_id({i}) << "\">\n"
       << "        <name><text>" << xml_escape(t.label.value_or(t.activity.label())) << "</text></name>\n";
    if (t.silent())
      os << "        <toolspecific tool=\"ProM\" version=\"6.4\" activity=\"$invisible$\" localNodeID=\""
         << detail::transition_xml_id({i}) << "\"/>\n";
    os << "      </transition>\n";
  }
  std::size_t arc = 0;
  for (const auto& [p, t] : net.net.input_arcs())
    os << "      <arc id=\"a" << arc++ << "\" source=\"" << detail::place_xml_id(p) << "\" target=\""
       << detail::transition_xml_id(t) << "\"/>\n";
  for (const auto& [t, p] : net.net.output_arcs())
    os << "      <arc id=\"a" << arc++ << "\" source=\"" << detail::transition_xml_id(t) << "\" target=\""
       << detail::place_xml_id(p) << "\"/>\n";
  os << "    </page>\n"
     << "    <finalmarkings>\n"
     << "      <marking>\n";
  for (const auto& [p, n] : net.final)
    os << "        <place idref=\"" << detail::place_xml_id(p) << "\"><text>" << n << "</text></place>\n";
  os << "      </marking>\n"
     << "    </finalmarkings>\n"
     << "  </net>\n"
     << "</pnml>\n";
  return os.str();
}

struct NetDotOptions {
  /// Adds ▶/■ boxes wired to the marked places and a hub place wired to every
  /// disconnected transition. Presentation only.
  bool connect_fragments = false;
};

/// Graphviz rendering: places as circles, transitions as boxes, silent transitions filled black.
inline std::string to_dot(const AcceptingPetriNet& net, const NetDotOptions& opts = {}) {
  std::ostringstream os;
  os << "digraph petrinet {\n  rankdir=LR;\n";
  const auto& places = net.net.places();
  for (std::size_t i = 0; i < places.size(); ++i) {
    const PlaceId p{i};
    std::string label;
    if (auto it = net.initial.find(p); it != net.initial.end()) label = std::string(it->second, '*');
    os << "  " << detail::place_xml_id(p) << " [shape=circle, label=\"" << label << "\", tooltip=\""
       << detail::dot_escape(places[i].name) << "\"";
    if (net.final.contains(p)) os << ", peripheries=2";
    os << "];\n";
  }
  const auto& transitions = net.net.transitions();
  for (std::size_t i = 0; i < transitions.size(); ++i) {
    const auto& t = transitions[i];
    os << "  " << detail::transition_xml_id({i});
    if (t.silent()) {
      os << " [shape=box, style=filled, fillcolor=black, label=\"\", width=0.2, tooltip=\""
         << detail::dot_escape(t.activity.label()) << "\"];\n";
    } else {
      os << " [shape=box, label=\"" << detail::dot_escape(*t.label) << "\"];\n";
    }
  }
  for (const auto& [p, t] : net.net.input_arcs())
    os << "  " << detail::place_xml_id(p) << " -> " << detail::transition_xml_id(t) << ";\n";
  for (const auto& [t, p] : net.net.output_arcs())
    os << "  " << detail::transition_xml_id(t) << " -> " << detail::place_xml_id(p) << ";\n";
  if (opts.connect_fragments) {
    os << "  start [shape=box, label=\"▶\"];\n  end [shape=box, label=\"■\"];\n"
       << "  hub [shape=circle, label=\"\", style=dashed];\n";
    for (const auto& [p, _] : net.initial) os << "  start -> " << detail::place_xml_id(p) << " [style=dashed];\n";
    for (const auto& [p, _] : net.final) os << "  " << detail::place_xml_id(p) << " -> end [style=dashed];\n";
    for (auto t : disconnected_transitions(net)) {
      os << "  hub -> " << detail::transition_xml_id(t) << " [style=dashed];\n";
      os << "  " << detail::transition_xml_id(t) << " -> hub [style=dashed];\n";
    }
  }
  os << "}\n";
  return os.str();
}

inline nlohmann::json to_json(const AcceptingPetriNet& net) {
  nlohmann::json places = nlohmann::json::array(), transitions = nlohmann::json::array(),
                 arcs = nlohmann::json::array();
  for (std::size_t i = 0; i < net.net.places().size(); ++i) {
    const PlaceId p{i};
    const auto& place = net.net.places()[i];
    nlohmann::json j{{"id", detail::place_xml_id(p)}, {"name", place.name}};
    if (place.origin) {
      nlohmann::json a1 = nlohmann::json::array(), a2 = nlohmann::json::array();
      for (const auto& a : place.origin->producers) a1.push_back(a.label());
      for (const auto& a : place.origin->consumers) a2.push_back(a.label());
      j["producers"] = std::move(a1);
      j["consumers"] = std::move(a2);
    }
    auto init = net.initial.find(p);
    auto fin = net.final.find(p);
    j["initial"] = init == net.initial.end() ? 0 : init->second;
    j["final"] = fin == net.final.end() ? 0 : fin->second;
    places.push_back(std::move(j));
  }
  for (std::size_t i = 0; i < net.net.transitions().size(); ++i) {
    const auto& t = net.net.transitions()[i];
    transitions.push_back({{"id", detail::transition_xml_id({i})},
                           {"label", t.label ? nlohmann::json(*t.label) : nlohmann::json(nullptr)},
                           {"activity", t.activity.label()},
                           {"silent", t.silent()}});
  }
  for (const auto& [p, t] : net.net.input_arcs())
    arcs.push_back({{"source", detail::place_xml_id(p)}, {"target", detail::transition_xml_id(t)}});
  for (const auto& [t, p] : net.net.output_arcs())
    arcs.push_back({{"source", detail::transition_xml_id(t)}, {"target", detail::place_xml_id(p)}});
  return {{"places", std::move(places)}, {"transitions", std::move(transitions)}, {"arcs", std::move(arcs)}};
}

}  // namespace alphappp
