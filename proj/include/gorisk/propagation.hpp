#pragma once

// Bottom-up probability propagation: leaf obstacles -> root obstacles ->
// leaf goals -> root goals.

#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gorisk/model.hpp"

namespace gorisk {

/// A probability together with the conditional that it actually causes
/// (or, for goals, contributes to) the parent.
struct CausalInput {
  double probability = 0.0;
  double conditional = 1.0;
};

/// P(O) = P(SO_1) * ... * P(SO_n) * P(O | SO_1..SO_n)
inline double and_obstacle_probability(std::span<const double> children,
                                       double joint_conditional) {
  if (children.empty())
    throw std::invalid_argument("and_obstacle_probability: no children");
  double p = 1.0;
  for (double c : children) p *= c;
  return p * joint_conditional;
}

/// P(O) = 1 - prod_i (1 - P(SO_i) * P(O | SO_i))
inline double or_obstacle_probability(std::span<const CausalInput> children) {
  if (children.empty())
    throw std::invalid_argument("or_obstacle_probability: no children");
  double none = 1.0;
  for (const auto& c : children) none *= 1.0 - c.probability * c.conditional;
  return 1.0 - none;
}

/// P(LG) = prod_i (1 - P(O_i) * P(not LG | O_i)); 1 when unobstructed.
inline double leaf_goal_eps(std::span<const CausalInput> obstructions) {
  double eps = 1.0;
  for (const auto& o : obstructions) eps *= 1.0 - o.probability * o.conditional;
  return eps;
}

/// Parent goal satisfaction from independent children. AND multiplies the
/// child EPS values by the joint conditional; OR is satisfied unless no child
/// both holds and carries the parent.
inline double goal_eps_from_children(RefinementKind kind,
                                     std::span<const CausalInput> children,
                                     double and_conditional = 1.0) {
  if (children.empty())
    throw std::invalid_argument("goal_eps_from_children: no children");
  if (kind == RefinementKind::And) {
    double eps = 1.0;
    for (const auto& c : children) eps *= c.probability;
    return eps * and_conditional;
  }
  return or_obstacle_probability(children);
}

/// SV(G) = RDS(G) - EPS(G), signed.
inline double severity(double rds, double eps) { return rds - eps; }

struct AnalysisReport {
  std::string model;
  std::map<NodeId, double> obstacle_probabilities;
  std::set<NodeId> leaf_obstacles;
  std::map<NodeId, double> goal_eps;
  std::map<NodeId, double> goal_rds;
  std::map<NodeId, double> goal_weight;
  std::map<NodeId, double> goal_sv;
  std::map<NodeId, bool> violated;

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

inline AnalysisReport propagate(const GoalModel& model) {
  AnalysisReport report;
  report.model = model.name();
  std::vector<CausalInput> inputs;
  std::vector<double> values;

  for (const auto& id : topological_order(model)) {
    if (const auto* obstacle = model.find_obstacle(id)) {
      double p = 0.0;
      if (obstacle->probability) {
        p = *obstacle->probability;
        report.leaf_obstacles.insert(id);
      } else {
        const Refinement& r = *model.refinement_of(id);
        if (r.kind == RefinementKind::And) {
          values.clear();
          for (const auto& c : r.children)
            values.push_back(report.obstacle_probabilities.at(c));
          p = and_obstacle_probability(values, r.and_conditional);
        } else {
          inputs.clear();
          for (std::size_t i = 0; i < r.children.size(); ++i)
            inputs.push_back({report.obstacle_probabilities.at(r.children[i]),
                              r.child_conditional(i)});
          p = or_obstacle_probability(inputs);
        }
      }
      report.obstacle_probabilities[id] = p;
      continue;
    }

    const GoalNode& goal = *model.find_goal(id);
    double eps = 1.0;
    if (const auto* r = model.refinement_of(id)) {
      inputs.clear();
      for (std::size_t i = 0; i < r->children.size(); ++i)
        inputs.push_back({report.goal_eps.at(r->children[i]), r->child_conditional(i)});
      eps = goal_eps_from_children(r->kind, inputs, r->and_conditional);
    } else {
      inputs.clear();
      for (const auto* ob : model.obstructions_of(id))
        inputs.push_back({report.obstacle_probabilities.at(ob->obstacle), ob->conditional});
      eps = leaf_goal_eps(inputs);
    }
    double rds = goal.required_satisfaction();
    report.goal_eps[id] = eps;
    report.goal_rds[id] = rds;
    report.goal_weight[id] = goal.weight;
    report.goal_sv[id] = severity(rds, eps);
    report.violated[id] = eps < rds;
  }
  return report;
}

}  // namespace gorisk
