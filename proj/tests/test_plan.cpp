#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <set>

#include "floorpp/plan.hpp"

using namespace floorpp;

namespace {

int count_of(const std::string& s, const std::string& needle) {
  int n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

// Tags open and close in a balanced, properly nested way.
bool tags_balanced(const std::string& xml) {
  std::vector<std::string> stack;
  const std::regex tag(R"(<(/?)([A-Za-z?][^\s/>]*)[^>]*?(/?)>)");
  for (auto it = std::sregex_iterator(xml.begin(), xml.end(), tag); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    const std::string name = m[2];
    if (name.starts_with("?")) continue;
    if (m[3] == "/") continue;
    if (m[1] == "/") {
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
    } else {
      stack.push_back(name);
    }
  }
  return stack.empty();
}

FloorPlan random_plan(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  FloorPlan p;
  for (int k = 0; k < n; ++k) p.corners.push_back({u(rng), u(rng)});
  for (int a = 0; a + 1 < n; a += 2) p.edges.push_back({a, a + 1});
  return p;
}

}  // namespace

TEST(Assemble, SingleTileIsIdentity) {
  TileResult t{{0, 0}, {{0, 0}, {5, 0}, {5, 4}}, {{0, 1}, {1, 2}}};
  const auto plan = assemble(std::vector{t}, 0.1);
  EXPECT_EQ(plan.corners, t.corners);
  EXPECT_EQ(plan.edges, t.edges);
}

TEST(Assemble, OverlapDuplicatesMergeToMidpoint) {
  TileResult a{{0, 0}, {{1.0, 1.0}, {4.0, 1.0}}, {{0, 1}}};
  TileResult b{{448, 0}, {{4.02, 1.0}, {1.02, 1.0}}, {{0, 1}}};
  const auto plan = assemble(std::vector{a, b}, 0.1);
  ASSERT_EQ(plan.corners.size(), 2u);
  EXPECT_NEAR(plan.corners[0].x, 1.01, 1e-12);
  EXPECT_NEAR(plan.corners[1].x, 4.01, 1e-12);
  ASSERT_EQ(plan.edges.size(), 1u);
  EXPECT_EQ(plan.edges[0], (IndexPair{0, 1}));
  EXPECT_NO_THROW(plan.validate());
}

TEST(Assemble, SelfLoopsDroppedAndIdempotent) {
  FloorPlan p;
  p.corners = {{0, 0}, {0.05, 0}, {0.12, 0}, {3, 0}, {3, 3}};
  p.edges = {{0, 1}, {1, 3}, {2, 3}, {3, 4}};
  const auto once = assemble(p, 0.1);
  EXPECT_EQ(once.corners.size(), 3u);
  EXPECT_EQ(once.edges.size(), 2u);
  const auto twice = assemble(once, 0.1);
  EXPECT_EQ(twice.corners, once.corners);
  EXPECT_EQ(twice.edges, once.edges);
  for (std::size_t a = 0; a < once.corners.size(); ++a)
    for (std::size_t b = a + 1; b < once.corners.size(); ++b)
      EXPECT_GT(distance(once.corners[a], once.corners[b]), 0.1);
}

TEST(Assemble, RandomIdempotenceAndShrinkage) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    FloorPlan p;
    for (int k = 0; k < 40; ++k) p.corners.push_back({u(rng), u(rng)});
    std::uniform_int_distribution<int> pick(0, 39);
    for (int k = 0; k < 60; ++k) {
      const int a = pick(rng), b = pick(rng);
      if (a != b) p.edges.push_back(std::minmax(a, b));
    }
    const auto once = assemble(p, 0.2);
    const auto twice = assemble(once, 0.2);
    EXPECT_LE(once.corners.size(), p.corners.size());
    EXPECT_LE(once.edges.size(), p.edges.size());
    EXPECT_EQ(twice.corners, once.corners);
    EXPECT_EQ(twice.edges, once.edges);
    EXPECT_NO_THROW(once.validate());
  }
}

TEST(PlanJson, EmptyPlan) {
  const auto j = plan_to_json(FloorPlan{});
  EXPECT_TRUE(j["corners"].is_array() && j["corners"].empty());
  EXPECT_TRUE(j["edges"].is_array() && j["edges"].empty());
  EXPECT_EQ(j["version"], 1);
  EXPECT_EQ(j["units"], "m");
  EXPECT_TRUE(plan_from_json(nlohmann::json::parse(R"({"corners": [], "edges": []})")).empty());
}

TEST(PlanJson, RandomRoundTripThroughFile) {
  std::mt19937_64 rng(2);
  const auto path = std::filesystem::temp_directory_path() / "floorpp_plan_rt.json";
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_plan(rng, 2 + trial);
    save_plan(p, path);
    const auto back = load_plan(path);
    ASSERT_EQ(back.corners.size(), p.corners.size());
    for (std::size_t k = 0; k < p.corners.size(); ++k) {
      EXPECT_NEAR(back.corners[k].x, p.corners[k].x, 1e-6);
      EXPECT_NEAR(back.corners[k].y, p.corners[k].y, 1e-6);
    }
    EXPECT_EQ(back.edges, p.edges);
  }
  std::filesystem::remove(path);
}

TEST(PlanJson, SchemaErrors) {
  auto parse = [](const char* s) { return plan_from_json(nlohmann::json::parse(s)); };
  try {
    parse(R"({"corners": [[0, 0], [1, 0]], "edges": [[0, 1], [1, 2]]})");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("edge 1"), std::string::npos);
  }
  EXPECT_THROW(parse(R"({"corners": []})"), FormatError);
  EXPECT_THROW(parse(R"({"corners": [[0]], "edges": []})"), FormatError);
  EXPECT_THROW(parse(R"({"corners": [[0, 0], [1, 0]], "edges": [[0, 0]]})"), FormatError);
  EXPECT_THROW(parse(R"({"corners": [[0, 0], [1, 0]], "edges": [[0, 1], [1, 0]]})"), FormatError);
  EXPECT_THROW(parse(R"({"version": 2, "corners": [], "edges": []})"), FormatError);
  EXPECT_THROW(parse(R"([1, 2])"), FormatError);
  EXPECT_THROW(load_plan("/nonexistent/plan.json"), std::runtime_error);
  const auto bad = std::filesystem::temp_directory_path() / "floorpp_bad_plan.json";
  std::ofstream(bad) << "{not json";
  EXPECT_THROW(load_plan(bad), FormatError);
  std::filesystem::remove(bad);
}

TEST(Svg, ElementCountsAndViewBox) {
  FloorPlan one;
  one.corners = {{0, 0}, {10, 5}};
  one.edges = {{0, 1}};
  const auto svg = plan_to_svg(one, 0.05);
  EXPECT_EQ(count_of(svg, "<line"), 1);
  EXPECT_EQ(count_of(svg, "<circle"), 2);
  EXPECT_NE(svg.find("viewBox=\"-0.5 -0.25 11 5.5\""), std::string::npos) << svg;
  EXPECT_TRUE(tags_balanced(svg));
}

TEST(Svg, YAxisIsFlipped) {
  FloorPlan p;
  p.corners = {{0, 0}, {0, 4}};
  p.edges = {{0, 1}};
  const auto svg = plan_to_svg(p, 0.05);
  // World (0, 4) is the top of the box, so its SVG y is the smallest.
  EXPECT_NE(svg.find("<circle cx=\"0\" cy=\"4\""), std::string::npos);
  EXPECT_NE(svg.find("<circle cx=\"0\" cy=\"0\""), std::string::npos);
  EXPECT_NE(svg.find("y1=\"4\" x2=\"0\" y2=\"0\""), std::string::npos);
}

TEST(Svg, EmptyPlanWarns) {
  Warnings w;
  const auto svg = plan_to_svg(FloorPlan{}, 0.05, &w);
  EXPECT_FALSE(w.empty());
  EXPECT_TRUE(tags_balanced(svg));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
}
