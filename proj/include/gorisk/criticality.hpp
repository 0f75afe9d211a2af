#pragma once

// Critical obstacle identification: activate a combination of leaf
// obstacles (all others at probability 0), propagate, and score the
// resulting goal violations.

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gorisk/model.hpp"
#include "gorisk/propagation.hpp"

namespace gorisk {

struct CriticalityRecord {
  std::vector<NodeId> combination;      // sorted leaf obstacle ids
  std::map<NodeId, double> per_goal_sv; // max(0, rds - eps)
  double score = 0.0;                   // sum of weight * per_goal_sv

  friend bool operator==(const CriticalityRecord&, const CriticalityRecord&) = default;
};

struct RankOptions {
  std::size_t max_combo_size = 1;
  std::size_t top = 10;
  /// Refuse to enumerate more combinations than this.
  double combination_cap = 1e6;
};

class CombinationBudgetExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Copy of `model` in which every leaf obstacle outside `active` has
/// probability 0.
inline GoalModel restrict_to(const GoalModel& model, std::span<const NodeId> active) {
  if (active.empty())
    throw std::invalid_argument("restrict_to: empty combination");
  std::set<NodeId> keep(active.begin(), active.end());
  for (const auto& id : keep) {
    const auto* o = model.find_obstacle(id);
    if (!o || !o->probability)
      throw std::invalid_argument("restrict_to: '" + id.str() + "' is not a leaf obstacle");
  }
  ModelParts parts = model.parts();
  for (auto& o : parts.obstacles)
    if (o.probability && !keep.count(o.id)) o.probability = 0.0;
  return build_model(std::move(parts)).value();
}

/// Clamped per-goal severities and weighted score of an analysis.
inline CriticalityRecord score_report(const AnalysisReport& report,
                                      std::vector<NodeId> combination) {
  CriticalityRecord record;
  record.combination = std::move(combination);
  for (const auto& [id, sv] : report.goal_sv) {
    double clamped = std::max(0.0, sv);
    record.per_goal_sv[id] = clamped;
    record.score += report.goal_weight.at(id) * clamped;
  }
  return record;
}

/// Number of non-empty subsets of size <= k drawn from n items, as a double
/// so large counts saturate instead of overflowing.
inline double combination_count(std::size_t n, std::size_t k) {
  double total = 0.0;
  double term = 1.0;  // C(n, 0)
  for (std::size_t i = 1; i <= k && i <= n; ++i) {
    term = term * static_cast<double>(n - i + 1) / static_cast<double>(i);
    total += term;
  }
  return total;
}

inline bool ranks_before(const CriticalityRecord& a, const CriticalityRecord& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.combination.size() != b.combination.size())
    return a.combination.size() < b.combination.size();
  return a.combination < b.combination;
}

/// Evaluates every leaf combination of size 1..max_combo_size and returns
/// the `top` highest-scoring ones: score descending, then smaller
/// combinations, then identifiers.
inline std::vector<CriticalityRecord> rank_critical(const GoalModel& model,
                                                    const RankOptions& options = {}) {
  const auto leaves = leaf_obstacles(model);
  if (options.max_combo_size == 0)
    throw std::invalid_argument("rank_critical: max_combo_size must be >= 1");
  if (options.top == 0) throw std::invalid_argument("rank_critical: top must be >= 1");
  if (options.max_combo_size > leaves.size())
    throw std::invalid_argument("rank_critical: max_combo_size exceeds the " +
                                std::to_string(leaves.size()) + " leaf obstacles");
  double count = combination_count(leaves.size(), options.max_combo_size);
  if (count > options.combination_cap)
    throw CombinationBudgetExceeded("rank_critical: " + std::to_string(count) +
                                    " combinations exceed the cap");

  std::vector<CriticalityRecord> records;
  std::vector<NodeId> combo;
  auto visit = [&](auto&& self, std::size_t start) -> void {
    if (!combo.empty()) {
      auto report = propagate(restrict_to(model, combo));
      records.push_back(score_report(report, combo));
    }
    if (combo.size() == options.max_combo_size) return;
    for (std::size_t i = start; i < leaves.size(); ++i) {
      combo.push_back(leaves[i]);
      self(self, i + 1);
      combo.pop_back();
    }
  };
  visit(visit, 0);

  std::sort(records.begin(), records.end(), ranks_before);
  if (records.size() > options.top) records.resize(options.top);
  return records;
}

}  // namespace gorisk
