#pragma once

// Command-line front end: validate, analyze, critical, simulate, whatif,
// tactics. Exit codes: 0 success, 1 validation errors or failed --compare,
// 2 usage error, 3 I/O or parse failure.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gorisk/criticality.hpp"
#include "gorisk/model.hpp"
#include "gorisk/montecarlo.hpp"
#include "gorisk/parser.hpp"
#include "gorisk/propagation.hpp"
#include "gorisk/report.hpp"
#include "gorisk/tactics.hpp"

namespace gorisk::cli {

enum ExitCode : int { kOk = 0, kInvalid = 1, kUsage = 2, kInputFailure = 3 };

namespace detail {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool is_syntax_code(const std::string& code) {
  static const std::set<std::string> codes{"syntax",         "bad-number",  "unterminated-string",
                                           "bad-escape",     "unexpected-char", "duplicate-attr",
                                           "unknown-attr"};
  return codes.count(code) > 0;
}

inline void print_diagnostics(std::ostream& err, const std::string& file, const Diagnostics& diags) {
  for (const auto& d : diags) err << file << ":" << format_diagnostic(d) << "\n";
}

/// Reads and parses a model file; on failure prints diagnostics and returns
/// the exit code to use.
struct Loaded {
  std::optional<GoalModel> model;
  int exit_code = kOk;
};

inline Loaded load_model(const std::string& path, std::ostream& err) {
  auto text = read_file(path);
  if (!text) {
    err << path << ": cannot read file\n";
    return {std::nullopt, kInputFailure};
  }
  auto parsed = parse(*text);
  if (!parsed.ok()) {
    print_diagnostics(err, path, parsed.diagnostics());
    bool syntax = std::any_of(parsed.diagnostics().begin(), parsed.diagnostics().end(),
                              [](const Diagnostic& d) { return is_syntax_code(d.code); });
    return {std::nullopt, syntax ? kInputFailure : kInvalid};
  }
  return {parsed.value(), kOk};
}

/// Applies one `ID.field=VALUE` or `PARENT.CHILD.conditional=VALUE` override.
inline void apply_override(ModelParts& parts, const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos) throw UsageError("override '" + spec + "' lacks '='");
  std::string lhs = spec.substr(0, eq);
  std::string rhs = spec.substr(eq + 1);
  double value = 0.0;
  {
    auto [ptr, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), value);
    if (ec != std::errc() || ptr != rhs.data() + rhs.size() || rhs.empty())
      throw UsageError("override '" + spec + "': '" + rhs + "' is not a number");
  }
  std::vector<std::string> path;
  std::stringstream ss(lhs);
  for (std::string part; std::getline(ss, part, '.');) path.push_back(part);

  auto find_goal = [&](const std::string& id) {
    auto it = std::find_if(parts.goals.begin(), parts.goals.end(),
                           [&](const GoalNode& g) { return g.id.str() == id; });
    return it == parts.goals.end() ? nullptr : &*it;
  };
  auto find_obstacle = [&](const std::string& id) {
    auto it = std::find_if(parts.obstacles.begin(), parts.obstacles.end(),
                           [&](const ObstacleNode& o) { return o.id.str() == id; });
    return it == parts.obstacles.end() ? nullptr : &*it;
  };
  auto find_refinement = [&](const std::string& id) {
    auto it = std::find_if(parts.refinements.begin(), parts.refinements.end(),
                           [&](const Refinement& r) { return r.parent.str() == id; });
    return it == parts.refinements.end() ? nullptr : &*it;
  };

  if (path.size() == 2) {
    const auto& id = path[0];
    const auto& field = path[1];
    if (field == "probability") {
      auto* o = find_obstacle(id);
      if (!o) throw UsageError("override '" + spec + "': no obstacle '" + id + "'");
      o->probability = value;
      return;
    }
    if (field == "rds" || field == "weight") {
      auto* g = find_goal(id);
      if (!g) throw UsageError("override '" + spec + "': no goal '" + id + "'");
      if (field == "rds")
        g->rds = value;
      else
        g->weight = value;
      return;
    }
    if (field == "conditional") {
      auto* r = find_refinement(id);
      if (!r || r->kind != RefinementKind::And)
        throw UsageError("override '" + spec + "': '" + id + "' has no AND refinement");
      r->and_conditional = value;
      return;
    }
  } else if (path.size() == 3 && path[2] == "conditional") {
    if (auto* r = find_refinement(path[0]); r && r->kind == RefinementKind::Or) {
      auto it = std::find(r->children.begin(), r->children.end(), NodeId(path[1]));
      if (it != r->children.end()) {
        r->or_conditionals.resize(r->children.size(), 1.0);
        r->or_conditionals[static_cast<std::size_t>(it - r->children.begin())] = value;
        return;
      }
    }
    for (auto& ob : parts.obstructions) {
      if (ob.obstacle.str() == path[0] && ob.goal.str() == path[1]) {
        ob.conditional = value;
        return;
      }
    }
    throw UsageError("override '" + spec + "': no OR child or obstruction " + path[0] + " -> " + path[1]);
  }
  throw UsageError("override '" + spec +
                   "': expected ID.probability, ID.rds, ID.weight, ID.conditional or "
                   "PARENT.CHILD.conditional");
}

struct Options {
  std::string file;
  std::string format = "text";
  int precision = 4;
  std::size_t max_combo = 1;
  std::size_t top = 10;
  std::size_t samples = 200000;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  bool compare = false;
  std::vector<std::string> overrides;
  std::string catalog;
  bool critical_only = false;
};

inline void emit(const ReportDocument& doc, const Options& opt, std::ostream& out) {
  out << (opt.format == "json" ? render_json(doc) : render_text(doc, opt.precision));
}

inline int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  const auto& model = *loaded.model;
  print_diagnostics(err, opt.file, validate(model));
  out << opt.file << ": ok (" << model.goals().size() << " goals, " << model.obstacles().size()
      << " obstacles, " << leaf_obstacles(model).size() << " leaf obstacles)\n";
  return kOk;
}

inline int cmd_analyze(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  ReportDocument doc{propagate(*loaded.model), std::nullopt, std::nullopt, std::nullopt};
  emit(doc, opt, out);
  return kOk;
}

inline int cmd_critical(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  RankOptions rank{opt.max_combo, opt.top};
  ReportDocument doc{propagate(*loaded.model), rank_critical(*loaded.model, rank), std::nullopt,
                     std::nullopt};
  emit(doc, opt, out);
  return kOk;
}

inline int cmd_simulate(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  const auto& model = *loaded.model;
  SimulationSection section;
  section.result = estimate(model, opt.samples, opt.seed, opt.workers);

  std::map<NodeId, double> reference;
  if (is_tree(model)) {
    auto report = propagate(model);
    reference.insert(report.obstacle_probabilities.begin(), report.obstacle_probabilities.end());
    reference.insert(report.goal_eps.begin(), report.goal_eps.end());
    section.reference_kind = "analytic";
  } else if (stochastic_coin_count(model) <= kDefaultCoinBudget) {
    reference = brute_force_exact(model);
    section.reference_kind = "exact";
  }
  if (!reference.empty()) section.deviations = compare_to_reference(section.result, reference);

  ReportDocument doc{propagate(model), std::nullopt, section, std::nullopt};
  emit(doc, opt, out);

  if (!opt.compare) return kOk;
  if (section.reference_kind.empty()) {
    err << opt.file << ": --compare needs a tree-shaped model or one small enough to enumerate\n";
    return kInvalid;
  }
  bool all_within = std::all_of(section.deviations.begin(), section.deviations.end(),
                                [](const Deviation& d) { return d.within; });
  if (!all_within) {
    for (const auto& d : section.deviations)
      if (!d.within)
        err << opt.file << ": " << d.id << " empirical " << d.empirical << " outside "
            << d.reference << " +/- " << d.radius << "\n";
    return kInvalid;
  }
  return kOk;
}

inline int cmd_whatif(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  const auto& base = *loaded.model;
  if (opt.overrides.empty()) {
    ReportDocument doc{propagate(base), std::nullopt, std::nullopt, std::nullopt};
    emit(doc, opt, out);
    return kOk;
  }
  ModelParts parts = base.parts();
  for (const auto& o : opt.overrides) apply_override(parts, o);
  auto changed = build_model(std::move(parts));
  if (!changed.ok()) {
    print_diagnostics(err, opt.file, changed.diagnostics());
    return kInvalid;
  }
  ReportDocument doc{propagate(*changed), std::nullopt, std::nullopt,
                     WhatIfSection{propagate(base), opt.overrides}};
  emit(doc, opt, out);
  return kOk;
}

inline int cmd_tactics(const Options& opt, std::ostream& out, std::ostream& err) {
  auto loaded = load_model(opt.file, err);
  if (!loaded.model) return loaded.exit_code;
  const auto& model = *loaded.model;

  Catalog catalog;
  if (opt.catalog.empty()) {
    catalog = default_catalog();
  } else {
    auto text = read_file(opt.catalog);
    if (!text) {
      err << opt.catalog << ": cannot read file\n";
      return kInputFailure;
    }
    auto loaded_catalog = load_catalog(*text);
    if (!loaded_catalog.ok()) {
      print_diagnostics(err, opt.catalog, loaded_catalog.diagnostics());
      return kInputFailure;
    }
    catalog = loaded_catalog.value();
  }

  std::set<NodeId> selected;
  if (opt.critical_only) {
    auto leaves = leaf_obstacles(model);
    if (!leaves.empty()) {
      for (const auto& r : rank_critical(model, {1, leaves.size()}))
        if (r.score > 0) selected.insert(r.combination.begin(), r.combination.end());
    }
  } else {
    for (const auto& o : model.obstacles()) selected.insert(o.id);
  }

  std::vector<std::string> names;
  for (const auto& id : selected) names.push_back(model.find_obstacle(id)->display_name);
  auto matches = match_tactics(names, catalog);
  for (const auto& id : selected) {
    const auto& name = model.find_obstacle(id)->display_name;
    const auto& hits = matches.at(name);
    out << id << " " << quote(name) << ": ";
    if (hits.empty()) out << "(no tactics)";
    for (std::size_t i = 0; i < hits.size(); ++i) out << (i ? "; " : "") << hits[i];
    out << "\n";
  }
  return kOk;
}

}  // namespace detail

/// Runs the CLI. `args[0]` is the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::Options opt;
  CLI::App app{"Goal-obstacle risk analysis", args.empty() ? "gorisk" : args.front()};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  auto add_file = [&](CLI::App* sub) {
    sub->add_option("FILE", opt.file, "Goal model file")->required();
  };
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", opt.format, "Output format")
        ->check(CLI::IsMember({"text", "json"}))
        ->capture_default_str();
    sub->add_option("--precision", opt.precision, "Decimal places in text output")
        ->check(CLI::Range(0, 17))
        ->capture_default_str();
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check a model and list diagnostics");
  add_file(validate_cmd);

  auto* analyze_cmd = app.add_subcommand("analyze", "Propagate probabilities; report EPS and SV");
  add_file(analyze_cmd);
  add_format(analyze_cmd);

  auto* critical_cmd = app.add_subcommand("critical", "Rank critical leaf-obstacle combinations");
  add_file(critical_cmd);
  add_format(critical_cmd);
  critical_cmd->add_option("--max-combo", opt.max_combo, "Largest combination size")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  critical_cmd->add_option("--top", opt.top, "Records to print")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo estimate of every node");
  add_file(simulate_cmd);
  add_format(simulate_cmd);
  simulate_cmd->add_option("--samples", opt.samples, "Number of sampled worlds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate_cmd->add_option("--seed", opt.seed, "Random seed")->capture_default_str();
  simulate_cmd->add_option("--workers", opt.workers, "Sampling threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate_cmd->add_flag("--compare", opt.compare,
                         "Fail when a node leaves its confidence radius of the reference");

  auto* whatif_cmd = app.add_subcommand("whatif", "Re-analyze with overridden values");
  add_file(whatif_cmd);
  add_format(whatif_cmd);
  whatif_cmd->add_option("--set", opt.overrides, "ID.probability=V, ID.rds=V, ID.weight=V, ...");

  auto* tactics_cmd = app.add_subcommand("tactics", "Suggest resolution tactics for obstacles");
  add_file(tactics_cmd);
  tactics_cmd->add_option("--catalog", opt.catalog, "Tactic catalog file (default: built-in)");
  tactics_cmd->add_flag("--critical-only", opt.critical_only,
                        "Only leaf obstacles whose single-obstacle score is positive");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << "Run with --help for usage.\n";
    return kUsage;
  }

  try {
    if (*validate_cmd) return detail::cmd_validate(opt, out, err);
    if (*analyze_cmd) return detail::cmd_analyze(opt, out, err);
    if (*critical_cmd) return detail::cmd_critical(opt, out, err);
    if (*simulate_cmd) return detail::cmd_simulate(opt, out, err);
    if (*whatif_cmd) return detail::cmd_whatif(opt, out, err);
    if (*tactics_cmd) return detail::cmd_tactics(opt, out, err);
  } catch (const detail::UsageError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const std::length_error& e) {
    err << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace gorisk::cli
