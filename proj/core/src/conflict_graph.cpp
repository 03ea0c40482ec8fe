#include "cmat/conflict_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace cmat {

ConflictGraph::ConflictGraph(std::vector<ConflictNode> nodes,
                             std::vector<Arc> arcs,
                             std::vector<Movement> movements)
    : nodes_(std::move(nodes)),
      arcs_(std::move(arcs)),
      movements_(std::move(movements)) {
  std::sort(nodes_.begin(), nodes_.end(),
            [](const ConflictNode& a, const ConflictNode& b) { return a.id < b.id; });
  std::sort(arcs_.begin(), arcs_.end(), [](const Arc& a, const Arc& b) {
    return std::tie(a.from, a.to) < std::tie(b.from, b.to);
  });
  std::sort(movements_.begin(), movements_.end(),
            [](const Movement& a, const Movement& b) { return a.id < b.id; });
}

const ConflictNode* ConflictGraph::find_node(const std::string& id) const {
  auto it = std::lower_bound(
      nodes_.begin(), nodes_.end(), id,
      [](const ConflictNode& n, const std::string& key) { return n.id < key; });
  return (it != nodes_.end() && it->id == id) ? &*it : nullptr;
}

const Movement* ConflictGraph::find_movement(const std::string& id) const {
  auto it = std::lower_bound(
      movements_.begin(), movements_.end(), id,
      [](const Movement& m, const std::string& key) { return m.id < key; });
  return (it != movements_.end() && it->id == id) ? &*it : nullptr;
}

const Arc* ConflictGraph::find_arc(const std::string& from,
                                   const std::string& to) const {
  auto key = std::tie(from, to);
  auto it = std::lower_bound(arcs_.begin(), arcs_.end(), key,
                             [](const Arc& a, const decltype(key)& k) {
                               return std::tie(a.from, a.to) < k;
                             });
  return (it != arcs_.end() && it->from == from && it->to == to) ? &*it : nullptr;
}

std::vector<const Movement*> ConflictGraph::movements_at(
    const std::string& node_id) const {
  std::vector<const Movement*> out;
  for (const Movement& m : movements_) {
    if (std::find(m.nodes.begin(), m.nodes.end(), node_id) != m.nodes.end()) {
      out.push_back(&m);
    }
  }
  return out;
}

ValidationReport validate_graph(const ConflictGraph& g) {
  ValidationReport report;
  auto flag = [&report](std::string where, std::string what) {
    report.issues.push_back({std::move(where), std::move(what)});
  };

  std::set<std::string> node_ids;
  for (const ConflictNode& n : g.nodes()) {
    if (!node_ids.insert(n.id).second) flag(n.id, "duplicate node id");
  }

  for (const Arc& a : g.arcs()) {
    std::string id = a.from + "->" + a.to;
    if (a.length_m <= 0.0) flag(id, "arc length must be positive");
    if (!node_ids.count(a.from)) flag(id, "arc tail is not a node");
    if (!node_ids.count(a.to)) flag(id, "arc head is not a node");
  }

  std::set<std::string> movement_ids;
  for (const Movement& m : g.movements()) {
    if (!movement_ids.insert(m.id).second) flag(m.id, "duplicate movement id");
    if (m.nodes.empty()) {
      flag(m.id, "movement has no conflict points");
      continue;
    }
    std::set<std::string> seen;
    for (const std::string& n : m.nodes) {
      if (!node_ids.count(n)) flag(m.id, "references unknown node " + n);
      if (!seen.insert(n).second) flag(m.id, "repeats node " + n);
    }
    for (size_t i = 0; i + 1 < m.nodes.size(); ++i) {
      if (!g.find_arc(m.nodes[i], m.nodes[i + 1])) {
        flag(m.id, "no arc " + m.nodes[i] + "->" + m.nodes[i + 1] +
                       " joining consecutive conflict points");
      }
    }
  }

  // Exactly two distinct movements per conflict point.
  for (const ConflictNode& n : g.nodes()) {
    auto at = g.movements_at(n.id);
    if (at.size() != 2) {
      flag(n.id, "traversed by " + std::to_string(at.size()) +
                     " movements, expected exactly 2");
    }
  }

  // Any two movements share at most one conflict point.
  std::map<std::pair<std::string, std::string>, int> shared;
  for (const ConflictNode& n : g.nodes()) {
    auto at = g.movements_at(n.id);
    if (at.size() == 2) {
      ++shared[{at[0]->id, at[1]->id}];
    }
  }
  for (const auto& [pair, count] : shared) {
    if (count > 1) {
      flag(pair.first + "/" + pair.second,
           "movements share " + std::to_string(count) + " conflict points");
    }
  }

  return report;
}

double travel_time(const ConflictGraph& g, const Movement& p,
                   const std::string& node_id, double v_f) {
  double dist = 0.0;
  for (size_t i = 0; i < p.nodes.size(); ++i) {
    if (p.nodes[i] == node_id) return dist / v_f;
    if (i + 1 < p.nodes.size()) {
      const Arc* a = g.find_arc(p.nodes[i], p.nodes[i + 1]);
      if (!a) {
        throw std::invalid_argument("movement " + p.id + " has no arc after " +
                                    p.nodes[i]);
      }
      dist += a->length_m;
    }
  }
  throw std::invalid_argument("node " + node_id + " is not on movement " + p.id);
}

}  // namespace cmat
