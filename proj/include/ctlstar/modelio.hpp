/// Machine-readable model output (JSON, DOT) and the matching JSON loader.

#pragma once

#include <ctlstar/model.hpp>

#include <json.hpp>

#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace ctlstar {

// ─────────────────────────────────────────────────────────────────────────────
// JSON
// ─────────────────────────────────────────────────────────────────────────────

/// Schema: {"states":[{"id":int,"atoms":[string]}], "edges":[[int,int]],
/// "initial":int, "witness":{"prefix":[int],"loop":[int]}}
inline nlohmann::json model_to_json(const TransitionStructure& m,
                                    std::size_t initial, const Lasso& w) {
  nlohmann::json j;
  j["states"] = nlohmann::json::array();
  for (std::size_t s = 0; s < m.num_states; ++s) {
    nlohmann::json st;
    st["id"] = s;
    st["atoms"] = nlohmann::json::array();
    for (const std::string& a : m.atoms[s]) st["atoms"].push_back(a);
    j["states"].push_back(std::move(st));
  }
  j["edges"] = nlohmann::json::array();
  for (std::size_t s = 0; s < m.num_states; ++s)
    for (std::size_t t : m.succ[s])
      j["edges"].push_back(nlohmann::json::array({s, t}));
  j["initial"] = initial;
  j["witness"]["prefix"] = w.prefix;
  j["witness"]["loop"] = w.loop;
  return j;
}

struct LoadedModel {
  TransitionStructure m;
  std::size_t initial = 0;
  Lasso witness;
};

/// Inverse of model_to_json; throws nlohmann::json::exception on malformed
/// input and std::out_of_range on dangling state ids.
inline LoadedModel model_from_json(const nlohmann::json& j) {
  LoadedModel out;
  out.m.num_states = j.at("states").size();
  out.m.succ.assign(out.m.num_states, {});
  out.m.atoms.assign(out.m.num_states, {});
  for (const auto& st : j.at("states")) {
    const auto id = st.at("id").get<std::size_t>();
    for (const auto& a : st.at("atoms"))
      out.m.atoms.at(id).insert(a.get<std::string>());
  }
  for (const auto& e : j.at("edges"))
    out.m.succ.at(e.at(0).get<std::size_t>())
        .push_back(e.at(1).get<std::size_t>());
  out.initial = j.at("initial").get<std::size_t>();
  if (j.contains("witness")) {
    out.witness.prefix =
        j.at("witness").at("prefix").get<std::vector<std::size_t>>();
    out.witness.loop =
        j.at("witness").at("loop").get<std::vector<std::size_t>>();
  }
  return out;
}

// ─────────────────────────────────────────────────────────────────────────────
// DOT
// ─────────────────────────────────────────────────────────────────────────────

/// Nodes carry their atom sets; edges on the witness lasso are highlighted.
inline void model_to_dot(std::ostream& os, const TransitionStructure& m,
                         std::size_t initial, const Lasso& w) {
  std::set<std::pair<std::size_t, std::size_t>> lasso_edges;
  std::vector<std::size_t> flat = w.prefix;
  flat.insert(flat.end(), w.loop.begin(), w.loop.end());
  for (std::size_t i = 0; i + 1 < flat.size(); ++i)
    lasso_edges.insert({flat[i], flat[i + 1]});
  if (!w.loop.empty()) lasso_edges.insert({w.loop.back(), w.loop.front()});

  os << "digraph model {\n";
  for (std::size_t s = 0; s < m.num_states; ++s) {
    os << "  s" << s << " [label=\"s" << s << " {";
    bool first = true;
    for (const std::string& a : m.atoms[s]) {
      if (!first) os << ",";
      first = false;
      os << a;
    }
    os << "}\"";
    if (s == initial) os << " shape=doublecircle";
    os << "];\n";
  }
  for (std::size_t s = 0; s < m.num_states; ++s)
    for (std::size_t t : m.succ[s]) {
      os << "  s" << s << " -> s" << t;
      if (lasso_edges.count({s, t})) os << " [penwidth=2 color=red]";
      os << ";\n";
    }
  os << "}\n";
}

}  // namespace ctlstar
