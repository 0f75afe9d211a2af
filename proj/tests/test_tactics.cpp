#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gorisk/tactics.hpp"

using namespace gorisk;

namespace {

std::vector<std::string> tactics_for(const std::string& obstacle, const Catalog& catalog) {
  std::vector<std::string> names{obstacle};
  return match_tactics(names, catalog).at(obstacle);
}

}  // namespace

TEST(Normalize, CaseAndWhitespace) {
  EXPECT_EQ(normalize_obstacle_name("  Session   Hijacking\t"), "session hijacking");
  EXPECT_EQ(normalize_obstacle_name("DATA disclosure"), "data disclosure");
  EXPECT_EQ(normalize_obstacle_name(""), "");
}

TEST(DefaultCatalog, Loads) {
  auto catalog = default_catalog();
  EXPECT_EQ(catalog.size(), 17u);
  std::set<std::string> names;
  for (const auto& t : catalog) {
    EXPECT_FALSE(t.definition.empty()) << t.name;
    EXPECT_FALSE(t.resolves.empty()) << t.name;
    names.insert(t.name);
  }
  EXPECT_EQ(names.size(), catalog.size());
}

TEST(DefaultCatalog, SessionHijacking) {
  EXPECT_EQ(tactics_for("Session hijacking", default_catalog()),
            (std::vector<std::string>{"Encrypt data", "Update patches"}));
}

TEST(DefaultCatalog, DataDisclosure) {
  auto hits = tactics_for("Data disclosure", default_catalog());
  EXPECT_TRUE(std::find(hits.begin(), hits.end(), "Encrypt data") != hits.end());
  EXPECT_EQ(hits, (std::vector<std::string>{"Encrypt data", "Encrypt/decrypt message passing",
                                            "Isolate tenant", "Obfuscate code"}));
}

TEST(DefaultCatalog, CaseInsensitiveAndUnknown) {
  auto catalog = default_catalog();
  EXPECT_EQ(tactics_for("  insecure DATA location ", catalog),
            std::vector<std::string>{"Encrypt data"});
  EXPECT_TRUE(tactics_for("Alien invasion", catalog).empty());
  EXPECT_EQ(tactics_for("Department downsizing", catalog),
            std::vector<std::string>{"Involve staff with cloud adoption process"});
}

TEST(LoadCatalog, RoundTrip) {
  auto catalog = default_catalog();
  auto text = serialize_catalog(catalog);
  auto again = load_catalog(text);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again.value(), catalog);
}

TEST(LoadCatalog, Errors) {
  auto codes_of = [](std::string_view text) {
    std::set<std::string> out;
    auto loaded = load_catalog(text);
    EXPECT_FALSE(loaded.ok()) << text;
    if (!loaded.ok())
      for (const auto& d : loaded.diagnostics()) out.insert(d.code);
    return out;
  };
  EXPECT_TRUE(codes_of(R"(tactic "A" { resolves: ["x"] } tactic "A" { resolves: ["y"] })")
                  .count("duplicate-tactic"));
  EXPECT_TRUE(codes_of(R"(tactic "A" { definition: "d" })").count("empty-resolves"));
  EXPECT_TRUE(codes_of(R"(tactic "A" { cost: 3 })").count("unknown-attr"));
  EXPECT_TRUE(codes_of(R"(tactic "A" { resolves: ["x"] resolves: ["y"] })").count("duplicate-attr"));
  EXPECT_TRUE(codes_of(R"(tactic A { resolves: ["x"] })").count("syntax"));
  EXPECT_TRUE(codes_of(R"(strategy "A" { })").count("syntax"));
}

TEST(LoadCatalog, CustomCatalog) {
  auto loaded = load_catalog(R"(# custom
tactic "Add cache" {
  definition: "Cache responses."
  resolves: ["Service   LATENCY", "Scaling latency"]
})");
  ASSERT_TRUE(loaded.ok());
  EXPECT_EQ(loaded.value()[0].resolves, (std::vector<std::string>{"service latency", "scaling latency"}));
  EXPECT_EQ(tactics_for("Service latency", loaded.value()), std::vector<std::string>{"Add cache"});
}
