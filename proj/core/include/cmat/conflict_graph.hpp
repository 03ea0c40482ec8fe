#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmat/parameters.hpp"

namespace cmat {

/// Conflict points come in three flavors. The optimizer treats them all the
/// same; the distinction matters to signal-plan validation, where only
/// crossing conflicts forbid two movements from sharing a phase.
enum class NodeKind { crossing, merging, diverging };

enum class MovementKind { through, left, right };

struct ConflictNode {
  std::string id;
  NodeKind kind = NodeKind::crossing;
};

/// Directed road segment between two conflict points.
struct Arc {
  std::string from;
  std::string to;
  double length_m = 0.0;
};

/// One origin-destination trajectory through the control area, given as the
/// ordered sequence of conflict points it traverses.
struct Movement {
  std::string id;
  std::vector<std::string> nodes;
  MovementKind kind = MovementKind::through;
};

/// Directed graph of conflict points and the movements that cross them.
/// Immutable once built; every accessor keeps a deterministic (sorted) order.
class ConflictGraph {
 public:
  ConflictGraph() = default;
  ConflictGraph(std::vector<ConflictNode> nodes, std::vector<Arc> arcs,
                std::vector<Movement> movements);

  const std::vector<ConflictNode>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::vector<Movement>& movements() const { return movements_; }

  const ConflictNode* find_node(const std::string& id) const;
  const Movement* find_movement(const std::string& id) const;
  const Arc* find_arc(const std::string& from, const std::string& to) const;

  /// Movements traversing node n, in movement-id order.
  std::vector<const Movement*> movements_at(const std::string& node_id) const;

 private:
  std::vector<ConflictNode> nodes_;      // sorted by id
  std::vector<Arc> arcs_;                // sorted by (from, to)
  std::vector<Movement> movements_;      // sorted by id
};

struct ValidationIssue {
  std::string where;  // node / movement / arc id
  std::string what;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

/// Checks the structural assumptions the scheduling model relies on:
/// positive arc lengths, movements of >= 1 node without repeats and with an
/// arc between each consecutive pair, exactly two distinct movements per
/// node, and at most one shared node per movement pair. Violations become
/// report entries; the call itself never fails.
ValidationReport validate_graph(const ConflictGraph& g);

/// Seconds from movement p's first conflict point to node n at speed v_f:
/// the sum of arc lengths along p up to n, divided by v_f. Zero at the first
/// node. Throws std::invalid_argument if n is not on p.
double travel_time(const ConflictGraph& g, const Movement& p,
                   const std::string& node_id, double v_f);

}  // namespace cmat
