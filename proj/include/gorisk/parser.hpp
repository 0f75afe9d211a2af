#pragma once

// Goal-model DSL: parsing with positioned diagnostics, and canonical
// serialization.
//
//   model "name"
//   goal G { name: "..." rds: 0.95 refine and { A, B } }
//   obstacle O { probability: 0.2 }
//   obstacle P { refine or { O @0.99, Q } }
//   obstructs P -> A conditional 0.9

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gorisk/lexer.hpp"
#include "gorisk/model.hpp"

namespace gorisk {

namespace detail {

class ModelParser {
 public:
  explicit ModelParser(std::string_view text) {
    tokens_ = Lexer(text).tokenize(syntax_);
  }

  Checked<GoalModel> run() {
    parse_header();
    while (!peek_is(TokenKind::end)) {
      try {
        if (peek().is_word("goal")) {
          parse_node(/*is_goal=*/true);
        } else if (peek().is_word("obstacle")) {
          parse_node(/*is_goal=*/false);
        } else if (peek().is_word("obstructs")) {
          parse_obstruction();
        } else {
          fail("expected 'goal', 'obstacle' or 'obstructs'");
        }
      } catch (const Abort&) {
        synchronize();
      }
    }

    if (has_errors(syntax_)) return sorted(std::move(syntax_));
    auto built = build_model(std::move(parts_), &sources_);
    if (built.ok() && semantic_.empty()) return built;
    Diagnostics all = std::move(semantic_);
    for (const auto& d : built.diagnostics()) all.push_back(d);
    return sorted(std::move(all));
  }

 private:
  struct Abort {};

  static Diagnostics sorted(Diagnostics diags) {
    std::stable_sort(diags.begin(), diags.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return a.location.value_or(SourcePosition{}) <
                              b.location.value_or(SourcePosition{});
                     });
    return diags;
  }

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = std::min(index_ + ahead, tokens_.size() - 1);
    return tokens_[i];
  }
  bool peek_is(TokenKind kind) const { return peek().kind == kind; }
  const Token& take() {
    const Token& t = tokens_[index_];
    if (index_ + 1 < tokens_.size()) ++index_;
    return t;
  }

  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = peek();
    // Lexical errors were reported by the lexer already.
    if (t.kind != TokenKind::invalid) {
      std::string found = t.kind == TokenKind::identifier
                              ? "'" + t.text + "'"
                              : std::string(describe(t.kind));
      syntax_.push_back({Severity::error, "syntax",
                         expected + ", found " + found, t.position});
    }
    throw Abort{};
  }

  const Token& expect(TokenKind kind, std::string_view what) {
    if (!peek_is(kind)) fail("expected " + std::string(what));
    return take();
  }
  const Token& expect_word(std::string_view word) {
    if (!peek().is_word(word)) fail("expected '" + std::string(word) + "'");
    return take();
  }

  static bool is_top_level(const Token& t) {
    return t.is_word("goal") || t.is_word("obstacle") || t.is_word("obstructs");
  }

  void synchronize() {
    while (!peek_is(TokenKind::end) && !is_top_level(peek())) take();
  }

  void parse_header() {
    try {
      expect_word("model");
      parts_.name = expect(TokenKind::string, "model name string").text;
    } catch (const Abort&) {
      synchronize();
    }
  }

  void note_duplicate_attr(std::set<std::string>& seen, const Token& key) {
    if (!seen.insert(key.text).second)
      syntax_.push_back({Severity::error, "duplicate-attr",
                         "attribute '" + key.text + "' given twice", key.position});
  }

  void parse_node(bool is_goal) {
    take();  // goal | obstacle
    const Token& id_tok = expect(TokenKind::identifier, "identifier");
    NodeId id(id_tok.text);
    bool duplicate = !declared_.insert(id).second;
    if (duplicate)
      semantic_.push_back({Severity::error, "duplicate-id",
                           "duplicate declaration of '" + id.str() + "'",
                           id_tok.position});
    else
      sources_.declarations[id] = id_tok.position;

    GoalNode goal;
    ObstacleNode obstacle;
    goal.id = id;
    obstacle.id = id;
    std::optional<Refinement> refinement;
    std::set<std::string> seen;

    expect(TokenKind::lbrace, "'{'");
    while (!peek_is(TokenKind::rbrace)) {
      const Token& key = expect(TokenKind::identifier, "attribute or '}'");
      note_duplicate_attr(seen, key);
      if (key.text == "refine") {
        auto r = parse_refine(id, key, duplicate);
        if (!refinement) refinement = std::move(r);
        continue;
      }
      expect(TokenKind::colon, "':'");
      auto text_value = [&]() { return expect(TokenKind::string, "string").text; };
      auto number_value = [&]() {
        const Token& t = expect(TokenKind::number, "number");
        if (!duplicate) sources_.attributes[{id, key.text}] = t.position;
        return t.number;
      };
      if (key.text == "name") {
        auto v = text_value();
        goal.display_name = v;
        obstacle.display_name = v;
      } else if (key.text == "definition") {
        auto v = text_value();
        goal.definition = v;
        obstacle.definition = v;
      } else if (key.text == "formal") {
        auto v = text_value();
        goal.formal_spec = v;
        obstacle.formal_spec = v;
      } else if (is_goal && key.text == "category") {
        goal.category = text_value();
      } else if (is_goal && key.text == "rds") {
        goal.rds = number_value();
      } else if (is_goal && key.text == "weight") {
        goal.weight = number_value();
      } else if (!is_goal && key.text == "probability") {
        obstacle.probability = number_value();
      } else {
        syntax_.push_back({Severity::error, "unknown-attr",
                           "unknown attribute '" + key.text + "' for " +
                               (is_goal ? "goal" : "obstacle"),
                           key.position});
        throw Abort{};
      }
    }
    take();  // }

    if (duplicate) return;
    if (is_goal)
      parts_.goals.push_back(std::move(goal));
    else
      parts_.obstacles.push_back(std::move(obstacle));
    if (refinement) parts_.refinements.push_back(std::move(*refinement));
  }

  Refinement parse_refine(const NodeId& parent, const Token& keyword,
                          bool duplicate) {
    Refinement r;
    r.parent = parent;
    if (!duplicate) sources_.attributes[{parent, "refine"}] = keyword.position;
    if (peek().is_word("and")) {
      take();
      r.kind = RefinementKind::And;
      if (peek().is_word("conditional")) {
        take();
        const Token& t = expect(TokenKind::number, "number");
        r.and_conditional = t.number;
        if (!duplicate) sources_.attributes[{parent, "conditional"}] = t.position;
      }
    } else if (peek().is_word("or")) {
      take();
      r.kind = RefinementKind::Or;
    } else {
      fail("expected 'and' or 'or'");
    }
    expect(TokenKind::lbrace, "'{'");
    for (;;) {
      const Token& child = expect(TokenKind::identifier, "child identifier");
      std::size_t index = r.children.size();
      r.children.emplace_back(child.text);
      if (!duplicate) sources_.children[{parent, index}] = child.position;
      if (r.kind == RefinementKind::Or) {
        double c = 1.0;
        if (peek_is(TokenKind::at)) {
          take();
          const Token& t = expect(TokenKind::number, "number");
          c = t.number;
          if (!duplicate) sources_.child_conditionals[{parent, index}] = t.position;
        }
        r.or_conditionals.push_back(c);
      }
      if (peek_is(TokenKind::comma)) {
        take();
        continue;
      }
      expect(TokenKind::rbrace, "',' or '}'");
      break;
    }
    return r;
  }

  void parse_obstruction() {
    take();  // obstructs
    const Token& from = expect(TokenKind::identifier, "obstacle identifier");
    expect(TokenKind::arrow, "'->'");
    const Token& to = expect(TokenKind::identifier, "goal identifier");
    Obstruction ob{NodeId(from.text), NodeId(to.text), 1.0};
    SourceMap::ObstructionSpan span{from.position, to.position, std::nullopt};
    if (peek().is_word("conditional")) {
      take();
      const Token& t = expect(TokenKind::number, "number");
      ob.conditional = t.number;
      span.conditional = t.position;
    }
    parts_.obstructions.push_back(std::move(ob));
    sources_.obstructions.push_back(span);
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  Diagnostics syntax_;    // lexical and syntax errors; block semantic checks
  Diagnostics semantic_;  // found while parsing but not structural syntax
  ModelParts parts_;
  SourceMap sources_;
  std::set<NodeId> declared_;
};

inline void append_text_attr(std::string& out, std::string_view key,
                             const std::optional<std::string>& value) {
  if (value) out += "  " + std::string(key) + ": " + quote(*value) + "\n";
}

inline void append_refinement(std::string& out, const Refinement& r) {
  out += "  refine ";
  out += to_string(r.kind);
  if (r.kind == RefinementKind::And && r.and_conditional != 1.0)
    out += " conditional " + format_number(r.and_conditional);
  out += " { ";
  for (std::size_t i = 0; i < r.children.size(); ++i) {
    if (i) out += ", ";
    out += r.children[i].str();
    double c = r.child_conditional(i);
    if (r.kind == RefinementKind::Or && c != 1.0) out += " @" + format_number(c);
  }
  out += " }\n";
}

}  // namespace detail

/// Parses DSL text. Never stops at the first problem: after a syntax error it
/// resumes at the next `goal`, `obstacle` or `obstructs`. Every diagnostic
/// carries a source position. Structural rules are checked by build_model
/// once the text is syntactically clean.
inline Checked<GoalModel> parse(std::string_view text) {
  return detail::ModelParser(text).run();
}

/// Canonical DSL text: goals, then obstacles, then obstructions, each sorted
/// by identifier; attributes in fixed order; defaults omitted.
inline std::string serialize(const GoalModel& model) {
  std::string out = "model " + quote(model.name()) + "\n";
  for (const auto& g : model.goals()) {
    out += "\ngoal " + g.id.str() + " {\n";
    if (g.display_name != g.id.str())
      out += "  name: " + quote(g.display_name) + "\n";
    detail::append_text_attr(out, "category", g.category);
    detail::append_text_attr(out, "definition", g.definition);
    detail::append_text_attr(out, "formal", g.formal_spec);
    if (g.rds) out += "  rds: " + format_number(*g.rds) + "\n";
    if (g.weight != 1.0) out += "  weight: " + format_number(g.weight) + "\n";
    if (const auto* r = model.refinement_of(g.id)) detail::append_refinement(out, *r);
    out += "}\n";
  }
  for (const auto& o : model.obstacles()) {
    out += "\nobstacle " + o.id.str() + " {\n";
    if (o.display_name != o.id.str())
      out += "  name: " + quote(o.display_name) + "\n";
    detail::append_text_attr(out, "definition", o.definition);
    detail::append_text_attr(out, "formal", o.formal_spec);
    if (o.probability) out += "  probability: " + format_number(*o.probability) + "\n";
    if (const auto* r = model.refinement_of(o.id)) detail::append_refinement(out, *r);
    out += "}\n";
  }
  if (!model.obstructions().empty()) out += "\n";
  for (const auto& ob : model.obstructions()) {
    out += "obstructs " + ob.obstacle.str() + " -> " + ob.goal.str();
    if (ob.conditional != 1.0) out += " conditional " + format_number(ob.conditional);
    out += "\n";
  }
  return out;
}

}  // namespace gorisk
