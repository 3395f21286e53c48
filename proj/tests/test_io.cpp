#include <clocale>
#include <cstdio>
#include <fstream>

#include <gtest/gtest.h>

#include "gwlimits/io.hpp"

using namespace gwlimits;

TEST(Io, NumberFormatting) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1e-300), "1e-300");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(json_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(std::stod(format_number(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Io, LawJsonRoundTrip) {
  const OffspringLaw law = make_law({0.25, 0.0, 0.75});
  const OffspringLaw back = law_from_json(law_to_json(law));
  ASSERT_EQ(back.degree(), law.degree());
  for (std::size_t j = 0; j <= law.degree(); ++j) EXPECT_EQ(back.prob(j), law.prob(j));
  EXPECT_THROW(law_from_json(nlohmann::json{{"p", {0.5, 0.5}}}), Error);
  EXPECT_THROW(law_from_json(nlohmann::json{{"probs", {"a", 1}}}), Error);
}

TEST(Io, LawFile) {
  const std::string path = ::testing::TempDir() + "gw_law.json";
  std::ofstream(path) << R"({"probs": [0, 0.5, 0.5]})";
  EXPECT_DOUBLE_EQ(load_law_file(path).mean(), 1.5);
  std::remove(path.c_str());
  EXPECT_THROW(load_law_file(path), Error);
}

TEST(Io, CsvAndJsonRows) {
  const std::string csv = to_csv({"x", "y"}, {{1.0, 0.25}, {2.0, std::numeric_limits<double>::infinity()}});
  EXPECT_EQ(csv, "x,y\n1,0.25\n2,inf\n");
  const auto rows = rows_to_json({"x", "y"}, {{1.0, 0.25}});
  EXPECT_EQ(rows[0]["y"], 0.25);
}
