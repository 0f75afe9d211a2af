#pragma once

// Rendering of analysis, criticality, simulation and what-if results as
// JSON (full precision, sorted keys) or aligned text (rounded on output).

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "gorisk/criticality.hpp"
#include "gorisk/montecarlo.hpp"
#include "gorisk/propagation.hpp"

namespace gorisk {

struct SimulationSection {
  SimulationResult result;
  /// "analytic", "exact" or empty when no reference was available.
  std::string reference_kind;
  std::vector<Deviation> deviations;
};

struct WhatIfSection {
  AnalysisReport baseline;
  std::vector<std::string> overrides;
};

struct ReportDocument {
  AnalysisReport analysis;
  std::optional<std::vector<CriticalityRecord>> critical;
  std::optional<SimulationSection> simulation;
  std::optional<WhatIfSection> whatif;
};

namespace detail {

inline std::string fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s = buf;
  if (s.size() > 1 && s[0] == '-' &&
      s.find_first_not_of("-0.") == std::string::npos)
    s.erase(0, 1);  // no "-0.0000"
  return s;
}

inline std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

inline std::string lpad(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

inline bool numeric_cell(const std::string& s) {
  std::size_t i = !s.empty() && s[0] == '-' ? 1 : 0;
  return i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]));
}

// Aligned table; the first row is a header. Columns whose body cells are all
// numbers are right-aligned.
inline std::string table(const std::vector<std::vector<std::string>>& rows,
                         std::size_t indent = 2) {
  std::vector<std::size_t> width;
  std::vector<bool> right;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    width.resize(std::max(width.size(), row.size()), 0);
    right.resize(width.size(), true);
    for (std::size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
      if (r > 0 && !numeric_cell(row[i])) right[i] = false;
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line(indent, ' ');
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += "  ";
      line += right[i] ? lpad(row[i], width[i]) : pad(row[i], width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const ReportDocument& doc) {
  using nlohmann::json;
  const auto& a = doc.analysis;
  json root = json::object();
  root["model"] = a.model;

  json obstacles = json::array();
  for (const auto& [id, p] : a.obstacle_probabilities)
    obstacles.push_back({{"id", id.str()}, {"probability", p}, {"leaf", a.leaf_obstacles.count(id) > 0}});
  root["obstacles"] = std::move(obstacles);

  json goals = json::array();
  for (const auto& [id, eps] : a.goal_eps)
    goals.push_back({{"id", id.str()},
                     {"eps", eps},
                     {"rds", a.goal_rds.at(id)},
                     {"sv", a.goal_sv.at(id)},
                     {"violated", a.violated.at(id)},
                     {"weight", a.goal_weight.at(id)}});
  root["goals"] = std::move(goals);

  if (doc.critical) {
    json critical = json::array();
    for (const auto& r : *doc.critical) {
      json combo = json::array();
      for (const auto& id : r.combination) combo.push_back(id.str());
      json sv = json::object();
      for (const auto& [id, v] : r.per_goal_sv) sv[id.str()] = v;
      critical.push_back({{"combination", std::move(combo)}, {"per_goal_sv", std::move(sv)}, {"score", r.score}});
    }
    root["critical"] = std::move(critical);
  }

  if (doc.simulation) {
    const auto& s = *doc.simulation;
    json nodes = json::array();
    std::map<NodeId, const Deviation*> by_id;
    for (const auto& d : s.deviations) by_id[d.id] = &d;
    auto emit = [&](const std::map<NodeId, double>& freq, const char* kind) {
      for (const auto& [id, f] : freq) {
        json n = {{"id", id.str()},
                  {"kind", kind},
                  {"empirical", f},
                  {"radius", s.result.confidence_radius.at(id)}};
        if (auto it = by_id.find(id); it != by_id.end()) {
          n["reference"] = it->second->reference;
          n["within"] = it->second->within;
        }
        nodes.push_back(std::move(n));
      }
    };
    emit(s.result.empirical_obstacle_freq, "obstacle");
    emit(s.result.empirical_goal_freq, "goal");
    std::sort(nodes.begin(), nodes.end(),
              [](const json& x, const json& y) { return x["id"] < y["id"]; });
    json sim = {{"samples", s.result.samples}, {"seed", s.result.seed}, {"nodes", std::move(nodes)}};
    if (!s.reference_kind.empty()) sim["reference"] = s.reference_kind;
    root["simulation"] = std::move(sim);
  }

  if (doc.whatif) {
    const auto& w = *doc.whatif;
    json goals_delta = json::array();
    for (const auto& [id, eps] : a.goal_eps) {
      double eps0 = w.baseline.goal_eps.at(id);
      double sv0 = w.baseline.goal_sv.at(id);
      double sv1 = a.goal_sv.at(id);
      goals_delta.push_back({{"id", id.str()},
                             {"eps_before", eps0},
                             {"eps_after", eps},
                             {"eps_delta", eps - eps0},
                             {"sv_before", sv0},
                             {"sv_after", sv1},
                             {"sv_delta", sv1 - sv0}});
    }
    root["whatif"] = {{"overrides", w.overrides}, {"goals", std::move(goals_delta)}};
  }
  return root;
}

/// Compact JSON with sorted keys and a trailing newline.
inline std::string render_json(const ReportDocument& doc) { return to_json(doc).dump() + "\n"; }

inline std::string render_text(const ReportDocument& doc, int precision = 4) {
  using detail::fixed;
  const auto& a = doc.analysis;
  std::string out = "model " + a.model + "\n";

  out += "\nobstacles\n";
  std::vector<std::vector<std::string>> rows{{"id", "probability", "kind"}};
  for (const auto& [id, p] : a.obstacle_probabilities)
    rows.push_back({id.str(), fixed(p, precision), a.leaf_obstacles.count(id) ? "leaf" : "derived"});
  out += detail::table(rows);

  out += "\ngoals\n";
  rows = {{"id", "eps", "rds", "sv", "weight", "status"}};
  for (const auto& [id, eps] : a.goal_eps)
    rows.push_back({id.str(), fixed(eps, precision), fixed(a.goal_rds.at(id), precision),
                    fixed(a.goal_sv.at(id), precision), fixed(a.goal_weight.at(id), precision),
                    a.violated.at(id) ? "VIOLATED" : "ok"});
  out += detail::table(rows);

  if (doc.critical) {
    out += "\ncritical obstacles\n";
    rows = {{"rank", "score", "combination", "violated goals (clamped sv)"}};
    std::size_t rank = 0;
    for (const auto& r : *doc.critical) {
      std::string combo;
      for (const auto& id : r.combination) combo += (combo.empty() ? "" : "+") + id.str();
      std::string goals;
      for (const auto& [id, sv] : r.per_goal_sv)
        if (sv > 0) goals += (goals.empty() ? "" : ", ") + id.str() + "=" + fixed(sv, precision);
      rows.push_back({std::to_string(++rank), fixed(r.score, precision), combo, goals.empty() ? "-" : goals});
    }
    out += detail::table(rows);
  }

  if (doc.simulation) {
    const auto& s = *doc.simulation;
    out += "\nsimulation (" + std::to_string(s.result.samples) + " samples, seed " +
           std::to_string(s.result.seed) + ")\n";
    std::map<NodeId, const Deviation*> by_id;
    for (const auto& d : s.deviations) by_id[d.id] = &d;
    rows = {{"id", "empirical", "radius"}};
    if (!s.reference_kind.empty()) {
      rows[0].push_back(s.reference_kind);
      rows[0].push_back("check");
    }
    std::map<NodeId, double> all = s.result.empirical_obstacle_freq;
    all.insert(s.result.empirical_goal_freq.begin(), s.result.empirical_goal_freq.end());
    for (const auto& [id, f] : all) {
      std::vector<std::string> row{id.str(), fixed(f, precision),
                                   fixed(s.result.confidence_radius.at(id), precision)};
      if (auto it = by_id.find(id); it != by_id.end()) {
        row.push_back(fixed(it->second->reference, precision));
        row.push_back(it->second->within ? "ok" : "OUTSIDE");
      }
      rows.push_back(std::move(row));
    }
    out += detail::table(rows);
  }

  if (doc.whatif) {
    const auto& w = *doc.whatif;
    out += "\nwhat-if";
    for (const auto& o : w.overrides) out += " " + o;
    out += "\n";
    rows = {{"id", "eps before", "eps after", "delta eps", "sv before", "sv after", "delta sv"}};
    for (const auto& [id, eps] : a.goal_eps) {
      double eps0 = w.baseline.goal_eps.at(id);
      double sv0 = w.baseline.goal_sv.at(id);
      double sv1 = a.goal_sv.at(id);
      rows.push_back({id.str(), fixed(eps0, precision), fixed(eps, precision), fixed(eps - eps0, precision),
                      fixed(sv0, precision), fixed(sv1, precision), fixed(sv1 - sv0, precision)});
    }
    out += detail::table(rows);
  }
  return out;
}

}  // namespace gorisk
