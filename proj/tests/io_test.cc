#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "gainpath/errors.h"
#include "gainpath/io.h"
#include "support/random_specs.h"

namespace gainpath {
namespace {

const char* kTwoNode = R"({
  "version": 1,
  "n": 2,
  "nodes": [
    {"id": 1, "maf": {"kind": "sum"},
     "neighbors": [{"j": 2, "gain": {"kind": "linear", "params": {"a": 2}}}]},
    {"id": 2, "maf": {"kind": "sum"},
     "neighbors": [{"j": 1, "gain": {"kind": "linear", "params": {"a": 0.125}}}]}
  ]
})";

std::string message_of(const std::string& text) {
  try {
    parse_network(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

TEST(ParseNetwork, TwoNode) {
  const auto doc = parse_network(kTwoNode);
  EXPECT_EQ(doc.spec.n, 2u);
  EXPECT_FALSE(doc.templated);
  EXPECT_FALSE(doc.dynamics.has_value());
  const GainOperator op(doc.spec);
  EXPECT_EQ(op.gamma({1.0, 1.0}), PlusVector({2.0, 0.125}));
}

TEST(ParseNetwork, SyntaxErrorNamesLineAndColumn) {
  const std::string msg = message_of("{\n  \"version\": 1,\n  \"n\": ,\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column"), std::string::npos) << msg;
}

TEST(ParseNetwork, FieldErrorNamesPath) {
  std::string text = kTwoNode;
  text.replace(text.find("\"sum\""), 5, "\"median\"");
  const std::string msg = message_of(text);
  EXPECT_NE(msg.find("$.nodes[0].maf.kind"), std::string::npos) << msg;
}

TEST(ParseNetwork, TemplateExpansion) {
  const std::string text = R"({"version": 1, "template": {"size": 10, "maf": {"kind": "sum"},
    "offsets": [{"offset": -1, "gain": {"kind": "linear", "params": {"a": 0.25}}},
                {"offset": 1, "gain": {"kind": "linear", "params": {"a": 0.25}}}]}})";
  EXPECT_EQ(parse_network(text).spec.n, 10u);
  const auto doc = parse_network(text, 50);
  EXPECT_TRUE(doc.templated);
  EXPECT_EQ(doc.spec.n, 50u);
  EXPECT_EQ(doc.spec.edge_count(), 98u);
  EXPECT_THROW(parse_network(kTwoNode, 5), ParseError);
}

TEST(ParseNetwork, DynamicsBlock) {
  const std::string text = R"({"version": 1, "template": {"size": 4, "maf": {"kind": "sum"},
    "offsets": [{"offset": 1, "gain": {"kind": "linear", "params": {"a": 0.25}}}]},
    "dynamics": {"template": {"kind": "linear", "a": 2, "c": 1,
                              "coupling": [{"offset": 1, "b": 0.25}]}}})";
  const auto doc = parse_network(text);
  ASSERT_TRUE(doc.dynamics.has_value());
  ASSERT_EQ(doc.dynamics->size(), 4u);
  EXPECT_EQ((*doc.dynamics)[0].coupling.size(), 1u);
  EXPECT_TRUE((*doc.dynamics)[3].coupling.empty());
}

TEST(SerializeNetwork, RoundTrip) {
  std::mt19937_64 rng(81);
  for (int c = 0; c < 30; ++c) {
    const std::size_t n = testing::uniform_index(rng, 1, 8);
    const auto spec = testing::random_spec(rng, n, testing::random_maf_kind(rng),
                                           testing::GainFamily::kMixed);
    const auto back = parse_network(serialize_network(spec)).spec;
    EXPECT_EQ(back.n, spec.n);
    EXPECT_EQ(back.neighbors, spec.neighbors);
    EXPECT_EQ(back.mafs, spec.mafs);
    EXPECT_EQ(back.gains, spec.gains);
  }
}

TEST(LoadNetwork, MissingFileAndInvalidSpec) {
  EXPECT_THROW(load_network("/nonexistent/network.json"), ParseError);
  const std::string path = ::testing::TempDir() + "zero_gain.json";
  std::ofstream(path) << R"({"version": 1, "n": 2, "nodes": [{"id": 1, "maf": {"kind": "sum"},
    "neighbors": [{"j": 2, "gain": {"kind": "zero"}}]}]})";
  EXPECT_THROW(load_network(path), InvalidNetworkError);
}

TEST(Flags, FunctionGridTruncation) {
  EXPECT_EQ(parse_function_flag("identity"), ScalarFn::Identity());
  EXPECT_EQ(parse_function_flag("linear:0.5"), ScalarFn::Linear(0.5));
  EXPECT_EQ(parse_function_flag("power:0.5,2"), ScalarFn::Power(0.5, 2));
  EXPECT_DOUBLE_EQ(parse_function_flag("piecewise-linear:0,0;1,2;3,3")(2.0), 2.5);
  EXPECT_THROW(parse_function_flag("cubic:1"), ParseError);
  EXPECT_THROW(parse_function_flag("linear:abc"), ParseError);
  EXPECT_EQ(parse_grid_flag("0.1:10:3").size(), 3u);
  EXPECT_THROW(parse_grid_flag("10:1:3"), ParseError);
  EXPECT_EQ(parse_truncation_flag("50,100,200"), (std::vector<std::size_t>{50, 100, 200}));
  EXPECT_THROW(parse_truncation_flag("0"), ParseError);
}

TEST(PathCsv, HeaderAndRows) {
  const GainOperator op(testing::two_node_linear());
  const auto csv = path_table_csv(build_path_table(op, {1.0, 2.0}));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "r,component,sigma");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 6);
  EXPECT_NE(csv.find("2,1,4\n"), std::string::npos) << csv;
}

TEST(CertificateJson, WitnessIsOneBased) {
  const GainOperator op(testing::two_node_identity(MafSpec::Max()));
  const auto cert = check_max_robust_sgc(op, ScalarFn::Linear(0.5), 100, 1);
  const auto j = nlohmann::json::parse(certificate_json(cert));
  EXPECT_EQ(j["property"], "max-robust-SGC");
  EXPECT_EQ(j["verdict"], "falsified");
  EXPECT_GE(j["witness"]["i"].get<int>(), 1);
  EXPECT_GE(j["witness"]["j"].get<int>(), 1);
  EXPECT_EQ(j["seed"], 1);
}

TEST(FormatDouble, RoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) {
    EXPECT_EQ(std::stod(format_double(v)), v);
  }
}

}  // namespace
}  // namespace gainpath
