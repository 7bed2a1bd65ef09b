#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "wsconf/dataset_io.hpp"
#include "wsconf/error.hpp"

using namespace wsconf;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = std::filesystem::temp_directory_path() / ("wsconf_io_" + name);
  std::ofstream(path) << body;
  return path.string();
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Records, IdsAreOneBasedOnDisk) {
  std::istringstream in(R"({"x": [0.5], "weak": {"type": "set", "labels": [1, 3], "k": 3}, "y": 3})");
  const auto rs = read_records(in);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(std::get<ExplicitSet>(rs[0].weak).labels, (std::vector<Label>{0, 2}));
  EXPECT_EQ(std::get<Label>(*rs[0].y), 2);
  const Json j = record_to_json(rs[0]);
  EXPECT_EQ(j["y"], 3);
  EXPECT_EQ(j["weak"]["labels"], Json::array({1, 3}));
}

TEST(Records, RoundTripAllVariants) {
  std::vector<Record> rs(4);
  rs[0] = {0, {1.0, -2.0}, ExplicitSet{{1, 4}, 5}, Label{4}};
  rs[1] = {1, {0.25}, Interval{-0.5, 0.75}, 0.1};
  rs[2] = {2, {}, RankingPrefix{{2, 0}, 4}, Ranking{{2, 0, 3, 1}}};
  rs[3] = {3, {0.0}, PartialMatching{{{1, 0}}, 3}, std::nullopt};
  std::ostringstream out;
  write_records(out, rs);
  std::istringstream in(out.str());
  const auto back = read_records(in);
  ASSERT_EQ(back.size(), 4u);
  std::ostringstream again;
  write_records(again, back);
  EXPECT_EQ(again.str(), out.str());
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(back[i].id, i);
  EXPECT_EQ(std::get<Ranking>(*back[2].y).perm, (std::vector<int>{2, 0, 3, 1}));
  EXPECT_FALSE(back[3].y.has_value());
  EXPECT_DOUBLE_EQ(std::get<double>(*back[1].y), 0.1);
}

TEST(Records, BlankLinesAreSkipped) {
  std::istringstream in(
      "\n{\"x\": [], \"weak\": {\"type\": \"interval\", \"lo\": 0, \"hi\": 1}}\n\n"
      "{\"x\": [], \"weak\": {\"type\": \"interval\", \"lo\": 1, \"hi\": 2}}\n");
  const auto rs = read_records(in);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[1].id, 1u);
}

TEST(Records, ParseErrorsNameTheLine) {
  std::istringstream bad_json("{\"x\": [], \"weak\": {\"type\": \"interval\", \"lo\": 0, \"hi\": 1}}\n{oops\n");
  EXPECT_EQ(code_of([&] { read_records(bad_json, "data.jsonl"); }), ErrorCode::kParse);
  std::istringstream bad_json2("{\"x\": [], \"weak\": {\"type\": \"interval\", \"lo\": 0, \"hi\": 1}}\n{oops\n");
  EXPECT_NE(message_of([&] { read_records(bad_json2, "data.jsonl"); }).find("data.jsonl:2"), std::string::npos);

  std::istringstream unknown(R"({"x": [], "weak": {"type": "blob"}})");
  EXPECT_EQ(code_of([&] { read_records(unknown); }), ErrorCode::kParse);
  std::istringstream zero_id(R"({"x": [], "weak": {"type": "set", "labels": [0], "k": 2}})");
  EXPECT_EQ(code_of([&] { read_records(zero_id); }), ErrorCode::kParse);
  std::istringstream reversed(R"({"x": [], "weak": {"type": "interval", "lo": 2, "hi": 1}})");
  EXPECT_EQ(code_of([&] { read_records(reversed); }), ErrorCode::kParse);
}

TEST(Records, StrongOutsideWeakIsInconsistent) {
  std::istringstream in(R"({"x": [], "weak": {"type": "set", "labels": [1], "k": 2}, "y": 2})");
  EXPECT_EQ(code_of([&] { read_records(in); }), ErrorCode::kInconsistentData);
}

TEST(Records, MissingFileIsIoError) {
  EXPECT_EQ(code_of([] { read_records("/nonexistent/wsconf.jsonl"); }), ErrorCode::kIo);
}

TEST(Sets, RoundTrip) {
  const std::vector<PredictionSet> sets{
      LabelSet{{0, 2}},
      Interval{0.1, 0.4},
      RankingSet{{Ranking{{1, 0}}, Ranking{{0, 1}}}, true},
      AssignmentSet{{Assignment{{0, 1}}}, false},
  };
  for (const auto& s : sets) {
    const Json j = set_to_json(s);
    EXPECT_EQ(set_to_json(set_from_json(j)), j);
  }
  EXPECT_EQ(set_to_json(sets[0])["labels"], Json::array({1, 3}));
  EXPECT_EQ(set_to_json(sets[2])["truncated"], true);
}

TEST(Scores, OnePerLine) {
  std::istringstream in("0.5\n\n1e-3\n-2\n");
  EXPECT_EQ(read_scores(in), (std::vector<double>{0.5, 1e-3, -2}));
  std::istringstream bad("0.5\n0.1,0.2\n");
  EXPECT_EQ(code_of([&] { read_scores(bad); }), ErrorCode::kParse);
  std::istringstream text("0.5\nabc\n");
  EXPECT_EQ(code_of([&] { read_scores(text); }), ErrorCode::kParse);
}

TEST(CostMatrices, CsvBlocksAndJson) {
  const auto csv = read_cost_matrices(temp_file("costs.csv", "2\n0,1\n1,0\n1\n7\n"));
  ASSERT_EQ(csv.size(), 2u);
  EXPECT_EQ(csv[0].k(), 2);
  EXPECT_DOUBLE_EQ(csv[0](0, 1), 1.0);
  EXPECT_DOUBLE_EQ(csv[1](0, 0), 7.0);

  const auto one = read_cost_matrices(temp_file("one.json", "[[0, 1], [2, 3]]"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_DOUBLE_EQ(one[0](1, 0), 2.0);
  const auto many = read_cost_matrices(temp_file("many.json", "[[[1]], [[0, 1], [2, 3]]]"));
  EXPECT_EQ(many.size(), 2u);
  const auto lines = read_cost_matrices(temp_file("lines.jsonl", "[[1]]\n[[2]]\n"));
  EXPECT_EQ(lines.size(), 2u);

  EXPECT_EQ(code_of([] { read_cost_matrices(temp_file("ragged.csv", "2\n0,1\n1\n")); }),
            ErrorCode::kParse);
}

TEST(Relevance, CsvRows) {
  const auto r = read_relevance_csv(temp_file("rel.csv", "0.9,0.5,0.1\n1,2,3\n"));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[1], (std::vector<double>{1, 2, 3}));
}

TEST(Distribution, JsonRoundTrip) {
  const Json j = Json::parse(R"({"k": 3, "atoms": [{"set": [1], "p": 0.5}, {"set": [2, 3], "p": 0.5}]})");
  const auto d = distribution_from_json(j);
  EXPECT_EQ(d.k(), 3);
  ASSERT_EQ(d.atoms().size(), 2u);
  EXPECT_EQ(d.atoms()[1].set, LabelMask{0b110});
  const auto back = distribution_from_json(distribution_to_json(d));
  EXPECT_EQ(back.atoms().size(), 2u);
  EXPECT_DOUBLE_EQ(back.coverage(0b001), 0.5);
  EXPECT_THROW(distribution_from_json(Json::parse(R"({"k": 2, "atoms": [{"set": [1], "p": 0.4}]})")),
               Error);
}

TEST(Report, Fields) {
  CoverageReport r;
  r.strong_coverage = 0.8;
  r.weak_coverage = 0.9;
  r.avg_size = 1.5;
  r.size_histogram = {{1, 2}, {2, 2}};
  r.n_test = 4;
  const Json j = report_to_json(r);
  EXPECT_DOUBLE_EQ(j["weak_coverage"].get<double>(), 0.9);
  EXPECT_EQ(j["n_test"], 4);
}
