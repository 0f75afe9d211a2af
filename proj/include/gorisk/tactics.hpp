#pragma once

// Resolution-tactic catalog and matching of tactics to obstacles by
// normalized display name.
//
// Catalog format (same lexical rules as the model DSL):
//   tactic "Encrypt data" {
//     definition: "..."
//     resolves: ["Data disclosure", "Session hijacking"]
//   }

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gorisk/lexer.hpp"
#include "gorisk/model.hpp"

namespace gorisk {

struct Tactic {
  std::string name;
  std::string definition;
  std::vector<std::string> resolves;  // normalized obstacle names

  friend bool operator==(const Tactic&, const Tactic&) = default;
};

using Catalog = std::vector<Tactic>;

/// ASCII case-folded, surrounding whitespace trimmed, inner runs collapsed
/// to one space.
inline std::string normalize_obstacle_name(std::string_view name) {
  std::string out;
  bool pending_space = false;
  for (char c : name) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

namespace detail {

class CatalogParser {
 public:
  explicit CatalogParser(std::string_view text) { tokens_ = Lexer(text).tokenize(diags_); }

  Checked<Catalog> run() {
    Catalog catalog;
    std::set<std::string> names;
    while (peek().kind != TokenKind::end) {
      try {
        if (!peek().is_word("tactic")) fail("expected 'tactic'");
        take();
        const Token& name = expect(TokenKind::string, "tactic name string");
        Tactic t{name.text, {}, {}};
        parse_body(t, name.position);
        if (!names.insert(t.name).second) {
          diags_.push_back({Severity::error, "duplicate-tactic",
                            "tactic '" + t.name + "' is defined twice", name.position});
          continue;
        }
        catalog.push_back(std::move(t));
      } catch (const Abort&) {
        while (peek().kind != TokenKind::end && !peek().is_word("tactic")) take();
      }
    }
    if (has_errors(diags_)) {
      std::stable_sort(diags_.begin(), diags_.end(), [](const auto& a, const auto& b) {
        return a.location.value_or(SourcePosition{}) < b.location.value_or(SourcePosition{});
      });
      return diags_;
    }
    return catalog;
  }

 private:
  struct Abort {};

  const Token& peek() const { return tokens_[std::min(index_, tokens_.size() - 1)]; }
  const Token& take() {
    const Token& t = tokens_[index_];
    if (index_ + 1 < tokens_.size()) ++index_;
    return t;
  }
  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = peek();
    if (t.kind != TokenKind::invalid) {
      std::string found = t.kind == TokenKind::identifier ? "'" + t.text + "'"
                                                          : std::string(describe(t.kind));
      diags_.push_back({Severity::error, "syntax", expected + ", found " + found, t.position});
    }
    throw Abort{};
  }
  const Token& expect(TokenKind kind, std::string_view what) {
    if (peek().kind != kind) fail("expected " + std::string(what));
    return take();
  }

  void parse_body(Tactic& t, SourcePosition name_pos) {
    expect(TokenKind::lbrace, "'{'");
    std::set<std::string> seen;
    bool has_resolves = false;
    while (peek().kind != TokenKind::rbrace) {
      const Token& key = expect(TokenKind::identifier, "attribute or '}'");
      if (!seen.insert(key.text).second)
        diags_.push_back({Severity::error, "duplicate-attr",
                          "attribute '" + key.text + "' given twice", key.position});
      expect(TokenKind::colon, "':'");
      if (key.text == "definition") {
        t.definition = expect(TokenKind::string, "string").text;
      } else if (key.text == "resolves") {
        has_resolves = true;
        expect(TokenKind::lbracket, "'['");
        for (;;) {
          auto key_text = normalize_obstacle_name(expect(TokenKind::string, "string").text);
          if (std::find(t.resolves.begin(), t.resolves.end(), key_text) == t.resolves.end())
            t.resolves.push_back(std::move(key_text));
          if (peek().kind == TokenKind::comma) {
            take();
            continue;
          }
          expect(TokenKind::rbracket, "',' or ']'");
          break;
        }
      } else {
        diags_.push_back({Severity::error, "unknown-attr",
                          "unknown tactic attribute '" + key.text + "'", key.position});
        throw Abort{};
      }
    }
    take();
    if (!has_resolves)
      diags_.push_back({Severity::error, "empty-resolves",
                        "tactic '" + t.name + "' resolves no obstacle", name_pos});
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  Diagnostics diags_;
};

}  // namespace detail

inline Checked<Catalog> load_catalog(std::string_view text) {
  return detail::CatalogParser(text).run();
}

inline std::string serialize_catalog(std::span<const Tactic> catalog) {
  std::string out;
  for (std::size_t i = 0; i < catalog.size(); ++i) {
    const auto& t = catalog[i];
    if (i) out += "\n";
    out += "tactic " + quote(t.name) + " {\n";
    out += "  definition: " + quote(t.definition) + "\n";
    out += "  resolves: [";
    for (std::size_t k = 0; k < t.resolves.size(); ++k) {
      if (k) out += ", ";
      out += quote(t.resolves[k]);
    }
    out += "]\n}\n";
  }
  return out;
}

/// For each obstacle display name, the names of tactics that resolve it,
/// sorted. Unknown obstacles map to an empty list.
inline std::map<std::string, std::vector<std::string>> match_tactics(
    std::span<const std::string> obstacle_names, std::span<const Tactic> catalog) {
  std::map<std::string, std::vector<std::string>> out;
  for (const auto& name : obstacle_names) {
    auto key = normalize_obstacle_name(name);
    auto& hits = out[name];
    for (const auto& t : catalog)
      if (std::find(t.resolves.begin(), t.resolves.end(), key) != t.resolves.end())
        hits.push_back(t.name);
    std::sort(hits.begin(), hits.end());
  }
  return out;
}

/// Built-in catalog of cloud-migration resolution tactics.
inline std::string_view default_catalog_text() {
  return R"CATALOG(# Resolution tactics for cloud-migration obstacles.
#
# Layout judgments:
# - The adaptor row carries a stray "cloud APIs" fragment. It is read as the
#   tail of "API incompatibility across multiple cloud", giving
#   "API incompatibility across multiple cloud APIs".
# - The "Add intermediation" definition spans two table lines; both parts are
#   kept in one definition.

tactic "Develop adaptor/wrapper" {
  definition: "Add adaptors that resolve runtime mismatches between legacy components and cloud services."
  resolves: ["Incompatible pluggable services", "Incomplete data types",
             "Operating system incompatibility", "Machine-image incompatibility",
             "Virtual machine contextualization incompatibility",
             "API incompatibility across multiple cloud APIs", "Proprietary APIs"]
}

tactic "Decouple system components" {
  definition: "Loosen coupling between legacy components; mediate and synchronise their interaction in the cloud."
  resolves: ["Tight dependencies"]
}

tactic "Encrypt/decrypt message passing" {
  definition: "Encrypt and decrypt messages exchanged between on-premise and cloud components at runtime."
  resolves: ["Message passing", "Data disclosure"]
}

tactic "Obfuscate code" {
  definition: "Protect component code from access, reading or alteration by co-located tenants."
  resolves: ["Code disruption", "System source codes propriety", "Data disclosure"]
}

tactic "Isolate tenant" {
  definition: "Support multi-tenancy with tenant identification, hierarchical access control and separated tenant data."
  resolves: ["Tenant interfere", "Data disclosure"]
}

tactic "Tune message granularity" {
  definition: "Size messages between local and cloud components to the functionality offered and the consumer's capacity."
  resolves: ["Message passing"]
}

tactic "Adapt data" {
  definition: "Convert legacy data types to the target cloud database and emulate missing database operations."
  resolves: ["Incompatible data types", "Incompatible data operations"]
}

tactic "Involve staff with cloud adoption process" {
  definition: "Engage staff and stakeholders in the adoption process and explain its organisational effects."
  resolves: ["Department downsizing", "Resistance to change"]
}

tactic "Define an authorization" {
  definition: "Check whether a tenant may perform a given action on the database."
  resolves: ["Tenant interfere"]
}

tactic "Encrypt data" {
  definition: "Encrypt system data before outsourcing or hosting it in the cloud."
  resolves: ["Data remanence", "Data interruption", "Data disclosure",
             "Session hijacking", "Insecure data location"]
}

tactic "Filter unauthorised requests" {
  definition: "Drop unauthorised data access requests at the edge of the premise or cloud network."
  resolves: ["Tenant interfere", "Data interruption"]
}

tactic "Use multiple cloud servers" {
  definition: "Deploy and replicate components across several clouds."
  resolves: ["Performance variability of cloud service"]
}

tactic "Add intermediation" {
  definition: "Place mediator components between the legacy system and cloud services to decouple it from provider-specific APIs."
  resolves: ["Scaling latency", "Low middleware performance", "Service latency"]
}

tactic "Make system stateless" {
  definition: "Keep tenant sessions safe and traceable when several system instances run in the cloud."
  resolves: ["State-based dependency"]
}

tactic "Prioritize tests" {
  definition: "Order test cases by importance and criticality."
  resolves: ["Extra testing effort"]
}

tactic "Resolve licensing issue" {
  definition: "Negotiate a suitable licensing model, reach cloud services indirectly, or track licence use through monitored connections."
  resolves: ["Licensing issue"]
}

tactic "Update patches" {
  definition: "Apply patches regularly across system components in the cloud."
  resolves: ["Session hijacking"]
}
)CATALOG";
}

inline Catalog default_catalog() { return load_catalog(default_catalog_text()).value(); }

}  // namespace gorisk
