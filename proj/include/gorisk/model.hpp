#pragma once

// Goal/obstacle graph types and structural validation.

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace gorisk {

/// Identifier of a goal or obstacle. Matches `[A-Za-z_][A-Za-z0-9_]*`.
class NodeId {
 public:
  NodeId() = default;
  explicit NodeId(std::string value) : value_(std::move(value)) {}

  const std::string& str() const noexcept { return value_; }
  bool empty() const noexcept { return value_.empty(); }

  static bool is_valid(std::string_view text) noexcept {
    if (text.empty()) return false;
    auto head = [](char c) {
      return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
    };
    if (!head(text.front())) return false;
    return std::all_of(text.begin() + 1, text.end(), [&](char c) {
      return head(c) || (c >= '0' && c <= '9');
    });
  }
  bool valid() const noexcept { return is_valid(value_); }

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
  friend bool operator==(const NodeId&, const NodeId&) = default;

  friend std::ostream& operator<<(std::ostream& os, const NodeId& id) {
    return os << id.value_;
  }

 private:
  std::string value_;
};

namespace literals {
inline NodeId operator""_id(const char* text, std::size_t size) {
  return NodeId(std::string(text, size));
}
}  // namespace literals

struct SourcePosition {
  int line = 1;
  int column = 1;  // in code points

  friend auto operator<=>(const SourcePosition&, const SourcePosition&) = default;
};

enum class Severity { error, warning, info };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::info: return "info";
  }
  return "error";
}

struct Diagnostic {
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  std::optional<SourcePosition> location;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

using Diagnostics = std::vector<Diagnostic>;

/// "line:col: severity: message [code]", location omitted when absent.
inline std::string format_diagnostic(const Diagnostic& d) {
  std::string out;
  if (d.location) {
    out += std::to_string(d.location->line) + ":" +
           std::to_string(d.location->column) + ": ";
  }
  out += std::string(to_string(d.severity)) + ": " + d.message + " [" +
         d.code + "]";
  return out;
}

inline bool has_errors(const Diagnostics& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Severity::error;
  });
}

/// Either a value or the diagnostics explaining why there is none.
template <class T>
class Checked {
 public:
  Checked(T value) : state_(std::move(value)) {}
  Checked(Diagnostics diags) : state_(std::move(diags)) {}

  bool ok() const noexcept { return std::holds_alternative<T>(state_); }
  explicit operator bool() const noexcept { return ok(); }

  const T& value() const& {
    if (!ok()) throw std::logic_error("Checked::value() on a failed result");
    return std::get<T>(state_);
  }
  T&& value() && {
    if (!ok()) throw std::logic_error("Checked::value() on a failed result");
    return std::get<T>(std::move(state_));
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

  const Diagnostics& diagnostics() const {
    static const Diagnostics none;
    return ok() ? none : std::get<Diagnostics>(state_);
  }

 private:
  std::variant<T, Diagnostics> state_;
};

struct GoalNode {
  NodeId id;
  std::string display_name;
  std::optional<std::string> category;
  std::optional<std::string> definition;
  std::optional<std::string> formal_spec;  // opaque, never interpreted
  std::optional<double> rds;               // absent means 1.0
  double weight = 1.0;

  double required_satisfaction() const noexcept { return rds.value_or(1.0); }

  friend bool operator==(const GoalNode&, const GoalNode&) = default;
};

struct ObstacleNode {
  NodeId id;
  std::string display_name;
  std::optional<std::string> definition;
  std::optional<std::string> formal_spec;
  std::optional<double> probability;  // present iff unrefined

  friend bool operator==(const ObstacleNode&, const ObstacleNode&) = default;
};

enum class RefinementKind { And, Or };

inline std::string_view to_string(RefinementKind k) {
  return k == RefinementKind::And ? "and" : "or";
}

struct Refinement {
  NodeId parent;
  RefinementKind kind = RefinementKind::And;
  std::vector<NodeId> children;
  /// P(parent | all children); AND only.
  double and_conditional = 1.0;
  /// P(parent | child_i); OR only. Empty means all 1.0.
  std::vector<double> or_conditionals;

  double child_conditional(std::size_t i) const {
    if (kind == RefinementKind::And) return 1.0;
    return i < or_conditionals.size() ? or_conditionals[i] : 1.0;
  }

  friend bool operator==(const Refinement&, const Refinement&) = default;
};

/// Root obstacle -> leaf goal, with P(not goal | obstacle).
struct Obstruction {
  NodeId obstacle;
  NodeId goal;
  double conditional = 1.0;

  friend bool operator==(const Obstruction&, const Obstruction&) = default;
};

/// Unvalidated model content, as produced by a parser or by hand.
struct ModelParts {
  std::string name;
  std::vector<GoalNode> goals;
  std::vector<ObstacleNode> obstacles;
  std::vector<Refinement> refinements;
  std::vector<Obstruction> obstructions;
};

/// Source locations for model parts, used to position semantic diagnostics.
struct SourceMap {
  std::map<NodeId, SourcePosition> declarations;
  /// (node, attribute) -> position of the attribute value.
  std::map<std::pair<NodeId, std::string>, SourcePosition> attributes;
  /// (parent, child index) -> position of the child identifier.
  std::map<std::pair<NodeId, std::size_t>, SourcePosition> children;
  /// (parent, child index) -> position of an OR child's conditional.
  std::map<std::pair<NodeId, std::size_t>, SourcePosition> child_conditionals;
  struct ObstructionSpan {
    SourcePosition obstacle;
    SourcePosition goal;
    std::optional<SourcePosition> conditional;
  };
  /// Indexed like ModelParts::obstructions.
  std::vector<ObstructionSpan> obstructions;

  std::optional<SourcePosition> declaration(const NodeId& id) const {
    auto it = declarations.find(id);
    if (it == declarations.end()) return std::nullopt;
    return it->second;
  }
  std::optional<SourcePosition> attribute(const NodeId& id,
                                          const std::string& key) const {
    auto it = attributes.find({id, key});
    if (it == attributes.end()) return declaration(id);
    return it->second;
  }
  std::optional<SourcePosition> child(const NodeId& parent,
                                      std::size_t index) const {
    auto it = children.find({parent, index});
    if (it == children.end()) return attribute(parent, "refine");
    return it->second;
  }
};

class GoalModel;
inline Checked<GoalModel> build_model(ModelParts parts,
                                      const SourceMap* sources = nullptr);

/// A structurally valid goal/obstacle graph. Only build_model creates one.
class GoalModel {
 public:
  GoalModel() = default;

  const std::string& name() const noexcept { return parts_.name; }
  const std::vector<GoalNode>& goals() const noexcept { return parts_.goals; }
  const std::vector<ObstacleNode>& obstacles() const noexcept {
    return parts_.obstacles;
  }
  const std::vector<Refinement>& refinements() const noexcept {
    return parts_.refinements;
  }
  const std::vector<Obstruction>& obstructions() const noexcept {
    return parts_.obstructions;
  }
  const ModelParts& parts() const noexcept { return parts_; }

  const GoalNode* find_goal(const NodeId& id) const {
    auto it = std::lower_bound(
        parts_.goals.begin(), parts_.goals.end(), id,
        [](const GoalNode& g, const NodeId& key) { return g.id < key; });
    return it != parts_.goals.end() && it->id == id ? &*it : nullptr;
  }
  const ObstacleNode* find_obstacle(const NodeId& id) const {
    auto it = std::lower_bound(
        parts_.obstacles.begin(), parts_.obstacles.end(), id,
        [](const ObstacleNode& o, const NodeId& key) { return o.id < key; });
    return it != parts_.obstacles.end() && it->id == id ? &*it : nullptr;
  }
  bool is_goal(const NodeId& id) const { return find_goal(id) != nullptr; }
  bool is_obstacle(const NodeId& id) const {
    return find_obstacle(id) != nullptr;
  }
  bool contains(const NodeId& id) const { return is_goal(id) || is_obstacle(id); }

  /// The refinement whose parent is `id`, or null.
  const Refinement* refinement_of(const NodeId& id) const {
    auto it = std::lower_bound(
        parts_.refinements.begin(), parts_.refinements.end(), id,
        [](const Refinement& r, const NodeId& key) { return r.parent < key; });
    return it != parts_.refinements.end() && it->parent == id ? &*it : nullptr;
  }

  std::vector<const Obstruction*> obstructions_of(const NodeId& goal) const {
    std::vector<const Obstruction*> out;
    for (const auto& o : parts_.obstructions)
      if (o.goal == goal) out.push_back(&o);
    return out;
  }

  /// Parents of refinements in which `id` appears as a child.
  std::vector<NodeId> refinement_parents(const NodeId& id) const {
    std::vector<NodeId> out;
    for (const auto& r : parts_.refinements)
      if (std::find(r.children.begin(), r.children.end(), id) != r.children.end())
        out.push_back(r.parent);
    return out;
  }

  friend bool operator==(const GoalModel& a, const GoalModel& b) {
    return a.parts_.name == b.parts_.name && a.parts_.goals == b.parts_.goals &&
           a.parts_.obstacles == b.parts_.obstacles &&
           a.parts_.refinements == b.parts_.refinements &&
           a.parts_.obstructions == b.parts_.obstructions;
  }

 private:
  friend Checked<GoalModel> build_model(ModelParts parts, const SourceMap* sources);
  explicit GoalModel(ModelParts parts) : parts_(std::move(parts)) {}

  ModelParts parts_;
};

namespace detail {

inline bool in_unit_interval(double v) { return v >= 0.0 && v <= 1.0; }

// Kahn's algorithm with a min-heap so ties resolve lexicographically.
// Edges: refinement child -> parent, obstruction obstacle -> goal.
// Nodes left unplaced sit on (or behind) a cycle.
struct OrderResult {
  std::vector<NodeId> order;
  std::vector<NodeId> unplaced;
};

inline OrderResult kahn_order(const ModelParts& parts) {
  std::map<NodeId, std::vector<NodeId>> successors;
  std::map<NodeId, std::size_t> indegree;
  for (const auto& g : parts.goals) indegree.emplace(g.id, 0);
  for (const auto& o : parts.obstacles) indegree.emplace(o.id, 0);
  auto add_edge = [&](const NodeId& from, const NodeId& to) {
    if (!indegree.count(from) || !indegree.count(to)) return;
    successors[from].push_back(to);
    ++indegree[to];
  };
  for (const auto& r : parts.refinements)
    for (const auto& c : r.children) add_edge(c, r.parent);
  for (const auto& o : parts.obstructions) add_edge(o.obstacle, o.goal);

  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (const auto& [id, deg] : indegree)
    if (deg == 0) ready.push(id);
  OrderResult result;
  while (!ready.empty()) {
    NodeId id = ready.top();
    ready.pop();
    result.order.push_back(id);
    for (const auto& next : successors[id])
      if (--indegree[next] == 0) ready.push(next);
  }
  for (const auto& [id, deg] : indegree)
    if (deg > 0) result.unplaced.push_back(id);
  return result;
}

}  // namespace detail

/// Checks every structural rule and returns the canonicalized model, or all
/// error diagnostics found. Positions come from `sources` when given.
inline Checked<GoalModel> build_model(ModelParts parts,
                                      const SourceMap* sources) {
  Diagnostics diags;
  auto error = [&](std::string code, std::string message,
                   std::optional<SourcePosition> where) {
    diags.push_back({Severity::error, std::move(code), std::move(message), where});
  };
  auto decl_pos = [&](const NodeId& id) -> std::optional<SourcePosition> {
    return sources ? sources->declaration(id) : std::nullopt;
  };
  auto attr_pos = [&](const NodeId& id,
                      const std::string& key) -> std::optional<SourcePosition> {
    return sources ? sources->attribute(id, key) : std::nullopt;
  };
  auto child_pos = [&](const NodeId& parent,
                       std::size_t i) -> std::optional<SourcePosition> {
    return sources ? sources->child(parent, i) : std::nullopt;
  };
  auto obstruction_pos = [&](std::size_t i, int which)
      -> std::optional<SourcePosition> {
    if (!sources || i >= sources->obstructions.size()) return std::nullopt;
    const auto& span = sources->obstructions[i];
    if (which == 0) return span.obstacle;
    if (which == 1) return span.goal;
    return span.conditional ? span.conditional : span.obstacle;
  };

  enum class Kind { goal, obstacle };
  std::map<NodeId, Kind> kinds;

  for (const auto& g : parts.goals) {
    if (!g.id.valid())
      error("bad-id", "invalid identifier '" + g.id.str() + "'", decl_pos(g.id));
    if (!kinds.emplace(g.id, Kind::goal).second)
      error("duplicate-id", "duplicate declaration of '" + g.id.str() + "'",
            decl_pos(g.id));
    if (g.rds && !detail::in_unit_interval(*g.rds))
      error("rds-range", "rds of goal '" + g.id.str() + "' must lie in [0,1]",
            attr_pos(g.id, "rds"));
    if (!(g.weight >= 0.0) || !std::isfinite(g.weight))
      error("weight-range",
            "weight of goal '" + g.id.str() + "' must be finite and >= 0",
            attr_pos(g.id, "weight"));
  }
  for (const auto& o : parts.obstacles) {
    if (!o.id.valid())
      error("bad-id", "invalid identifier '" + o.id.str() + "'", decl_pos(o.id));
    if (!kinds.emplace(o.id, Kind::obstacle).second)
      error("duplicate-id", "duplicate declaration of '" + o.id.str() + "'",
            decl_pos(o.id));
    if (o.probability && !detail::in_unit_interval(*o.probability))
      error("prob-range",
            "probability of obstacle '" + o.id.str() + "' must lie in [0,1]",
            attr_pos(o.id, "probability"));
  }

  bool dangling = false;
  std::set<NodeId> refined;
  for (auto& r : parts.refinements) {
    auto parent_kind = kinds.find(r.parent);
    if (parent_kind == kinds.end()) {
      error("dangling-ref", "refinement of undeclared node '" + r.parent.str() + "'",
            decl_pos(r.parent));
      dangling = true;
      continue;
    }
    if (!refined.insert(r.parent).second)
      error("multiple-refinements",
            "'" + r.parent.str() + "' is refined more than once",
            attr_pos(r.parent, "refine"));
    if (r.children.empty())
      error("empty-refinement",
            "refinement of '" + r.parent.str() + "' has no children",
            attr_pos(r.parent, "refine"));
    if (r.kind == RefinementKind::Or && r.or_conditionals.empty())
      r.or_conditionals.assign(r.children.size(), 1.0);
    if (r.kind == RefinementKind::And && !r.or_conditionals.empty())
      error("conditional-count",
            "AND refinement of '" + r.parent.str() + "' has per-child conditionals",
            attr_pos(r.parent, "refine"));
    if (r.kind == RefinementKind::Or &&
        r.or_conditionals.size() != r.children.size())
      error("conditional-count",
            "OR refinement of '" + r.parent.str() +
                "' needs one conditional per child",
            attr_pos(r.parent, "refine"));
    if (!detail::in_unit_interval(r.and_conditional))
      error("conditional-range",
            "conditional of '" + r.parent.str() + "' must lie in [0,1]",
            attr_pos(r.parent, "conditional"));
    for (std::size_t i = 0; i < r.or_conditionals.size(); ++i) {
      if (detail::in_unit_interval(r.or_conditionals[i])) continue;
      std::optional<SourcePosition> where;
      if (sources) {
        auto it = sources->child_conditionals.find({r.parent, i});
        where = it != sources->child_conditionals.end() ? std::optional(it->second)
                                                        : child_pos(r.parent, i);
      }
      error("conditional-range",
            "conditional of child " + std::to_string(i + 1) + " of '" +
                r.parent.str() + "' must lie in [0,1]",
            where);
    }
    std::set<NodeId> seen;
    for (std::size_t i = 0; i < r.children.size(); ++i) {
      const auto& c = r.children[i];
      auto child_kind = kinds.find(c);
      if (child_kind == kinds.end()) {
        error("dangling-ref", "undeclared node '" + c.str() + "'", child_pos(r.parent, i));
        dangling = true;
        continue;
      }
      if (child_kind->second != parent_kind->second)
        error("cross-kind",
              "'" + c.str() + "' and its parent '" + r.parent.str() +
                  "' are of different kinds",
              child_pos(r.parent, i));
      if (!seen.insert(c).second)
        error("duplicate-child",
              "'" + c.str() + "' appears twice under '" + r.parent.str() + "'",
              child_pos(r.parent, i));
    }
  }

  std::set<NodeId> refinement_children;
  for (const auto& r : parts.refinements)
    refinement_children.insert(r.children.begin(), r.children.end());

  for (const auto& o : parts.obstacles) {
    bool is_refined = refined.count(o.id) > 0;
    if (is_refined && o.probability)
      error("prob-on-refined",
            "refined obstacle '" + o.id.str() + "' must not carry a probability",
            attr_pos(o.id, "probability"));
    if (!is_refined && !o.probability)
      error("missing-prob",
            "leaf obstacle '" + o.id.str() + "' needs a probability",
            decl_pos(o.id));
  }

  std::set<std::pair<NodeId, NodeId>> obstruction_pairs;
  for (std::size_t i = 0; i < parts.obstructions.size(); ++i) {
    const auto& ob = parts.obstructions[i];
    auto src = kinds.find(ob.obstacle);
    auto dst = kinds.find(ob.goal);
    if (src == kinds.end()) {
      error("dangling-ref", "undeclared obstacle '" + ob.obstacle.str() + "'",
            obstruction_pos(i, 0));
      dangling = true;
    } else if (src->second != Kind::obstacle) {
      error("obstruction-kind", "'" + ob.obstacle.str() + "' is not an obstacle",
            obstruction_pos(i, 0));
    } else if (refinement_children.count(ob.obstacle)) {
      error("obstruction-source-not-root",
            "obstacle '" + ob.obstacle.str() +
                "' is refined into a parent and cannot obstruct a goal directly",
            obstruction_pos(i, 0));
    }
    if (dst == kinds.end()) {
      error("dangling-ref", "undeclared goal '" + ob.goal.str() + "'",
            obstruction_pos(i, 1));
      dangling = true;
    } else if (dst->second != Kind::goal) {
      error("obstruction-kind", "'" + ob.goal.str() + "' is not a goal",
            obstruction_pos(i, 1));
    } else if (refined.count(ob.goal)) {
      error("obstruction-target-refined",
            "goal '" + ob.goal.str() + "' is refined; obstructions attach to leaf goals",
            obstruction_pos(i, 1));
    }
    if (!detail::in_unit_interval(ob.conditional))
      error("conditional-range", "obstruction conditional must lie in [0,1]",
            obstruction_pos(i, 2));
    if (!obstruction_pairs.insert({ob.obstacle, ob.goal}).second)
      error("duplicate-obstruction",
            "'" + ob.obstacle.str() + "' obstructs '" + ob.goal.str() + "' twice",
            obstruction_pos(i, 0));
  }

  if (!dangling) {
    auto order = detail::kahn_order(parts);
    if (!order.unplaced.empty()) {
      // Report the lexicographically first refinement parent still waiting.
      for (const auto& id : order.unplaced) {
        if (!refined.count(id)) continue;
        error("cycle", "refinement cycle through '" + id.str() + "'",
              attr_pos(id, "refine"));
        break;
      }
    }
  }

  for (auto& g : parts.goals)
    if (g.display_name.empty()) g.display_name = g.id.str();
  for (auto& o : parts.obstacles)
    if (o.display_name.empty()) o.display_name = o.id.str();

  if (has_errors(diags)) return diags;

  std::sort(parts.goals.begin(), parts.goals.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(parts.obstacles.begin(), parts.obstacles.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(parts.refinements.begin(), parts.refinements.end(),
            [](const auto& a, const auto& b) { return a.parent < b.parent; });
  std::sort(parts.obstructions.begin(), parts.obstructions.end(),
            [](const auto& a, const auto& b) {
              return std::tie(a.obstacle, a.goal) < std::tie(b.obstacle, b.goal);
            });
  return GoalModel(std::move(parts));
}

/// Every child precedes its refinement parent and every obstacle precedes the
/// goals it obstructs. Ties break by NodeId.
inline std::vector<NodeId> topological_order(const GoalModel& model) {
  auto result = detail::kahn_order(model.parts());
  if (!result.unplaced.empty())
    throw std::logic_error("topological_order: model contains a cycle");
  return std::move(result.order);
}

/// Obstacles carrying a probability annotation, in NodeId order.
inline std::vector<NodeId> leaf_obstacles(const GoalModel& model) {
  std::vector<NodeId> out;
  for (const auto& o : model.obstacles())
    if (o.probability) out.push_back(o.id);
  return out;
}

/// Nodes at which two or more inputs share a descendant. Analytic
/// propagation assumes independent inputs, so it is exact only when this is
/// empty.
inline std::vector<NodeId> reconvergent_nodes(const GoalModel& model) {
  std::map<NodeId, std::vector<NodeId>> inputs;
  for (const auto& r : model.refinements()) inputs[r.parent] = r.children;
  for (const auto& ob : model.obstructions()) inputs[ob.goal].push_back(ob.obstacle);

  std::map<NodeId, std::set<NodeId>> below;  // node plus all descendants
  std::vector<NodeId> out;
  for (const auto& id : topological_order(model)) {
    auto& mine = below[id];
    mine.insert(id);
    bool shared = false;
    for (const auto& in : inputs[id]) {
      for (const auto& d : below[in])
        if (!mine.insert(d).second) shared = true;
    }
    if (shared) out.push_back(id);
  }
  return out;
}

inline bool is_tree(const GoalModel& model) {
  return reconvergent_nodes(model).empty();
}

/// Warnings and notes for a built model. Pure and order-stable.
inline Diagnostics validate(const GoalModel& model) {
  Diagnostics out;
  std::map<NodeId, std::size_t> parent_count;
  for (const auto& r : model.refinements())
    for (const auto& c : r.children) ++parent_count[c];
  for (const auto& [id, n] : parent_count) {
    if (n < 2) continue;
    out.push_back({Severity::warning, "shared-child",
                   "'" + id.str() + "' is a child of " + std::to_string(n) +
                       " refinements; analytic propagation assumes independence",
                   std::nullopt});
  }
  for (const auto& id : reconvergent_nodes(model)) {
    out.push_back({Severity::warning, "reconvergent",
                   "inputs of '" + id.str() +
                       "' share a descendant; analytic propagation assumes "
                       "independence and simulation is the reference",
                   std::nullopt});
  }
  for (const auto& g : model.goals()) {
    if (!g.rds && parent_count[g.id] == 0)
      out.push_back({Severity::info, "default-rds",
                     "root goal '" + g.id.str() + "' has no rds; 1.0 applied",
                     std::nullopt});
  }
  std::set<NodeId> obstructed;
  std::set<NodeId> obstructing;
  for (const auto& ob : model.obstructions()) {
    obstructed.insert(ob.goal);
    obstructing.insert(ob.obstacle);
  }
  for (const auto& g : model.goals()) {
    if (!model.refinement_of(g.id) && !obstructed.count(g.id))
      out.push_back({Severity::info, "unobstructed-goal",
                     "goal '" + g.id.str() + "' has no refinement or obstruction; "
                     "its EPS is 1",
                     std::nullopt});
  }
  for (const auto& o : model.obstacles()) {
    if (parent_count[o.id] == 0 && !obstructing.count(o.id))
      out.push_back({Severity::info, "unused-obstacle",
                     "root obstacle '" + o.id.str() + "' obstructs no goal",
                     std::nullopt});
  }
  return out;
}

}  // namespace gorisk
