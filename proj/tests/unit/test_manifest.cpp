#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "graded/manifest/executor.hpp"
#include "graded/manifest/parser.hpp"

using namespace graded::manifest;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string corpus(const std::string& name) { return slurp(fs::path(GRADED_MANIFEST_DIR) / name); }

std::vector<fs::path> corpus_files() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(GRADED_MANIFEST_DIR)) {
    if (e.path().extension() == ".gcm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Location error_site(const std::string& text) {
  try {
    Session s(parse_manifest(text));
    s.run("run");
  } catch (const InputError& e) {
    return e.loc;
  }
  return {};
}

const char* kLine = "chart M {\n  coord x weight 0;\n}\n";

}  // namespace

TEST(Parse, MinimalChart) {
  Manifest m = parse_manifest(kLine);
  ASSERT_EQ(m.decls.size(), 1u);
  EXPECT_EQ(m.decls[0].kind, Decl::Kind::chart);
  EXPECT_EQ(m.decls[0].coords.size(), 1u);
  EXPECT_TRUE(m.commands.empty());
}

TEST(Parse, CommentsAndWeights) {
  Manifest m = parse_manifest("# a line\nchart D { coord x weight 0, 0; coord w weight 1, 1; coord e weight 1 odd; }\n");
  ASSERT_EQ(m.decls[0].coords.size(), 3u);
  EXPECT_EQ(m.decls[0].coords[1].weight, (std::vector<int>{1, 1}));
  EXPECT_TRUE(m.decls[0].coords[2].odd);
}

TEST(Parse, ErrorCarriesLocationAndExpected) {
  try {
    parse_manifest(corpus("malformed.gcm"));
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_EQ(e.loc.line, 8);
    EXPECT_EQ(e.loc.column, 21);
    EXPECT_FALSE(e.expected.empty());
  }
}

TEST(Parse, DerivativeOperatorRejected) {
  EXPECT_THROW(parse_manifest(std::string(kLine) + "function f(x);\nchart F { coord x weight 0; coord y weight 1; }\n"
                                                   "transition t : F -> F { y = d/dx y; }\n"),
               InputError);
}

TEST(Semantics, DuplicateReportedAtSecondSite) {
  std::string text = std::string(kLine) + "chart M {\n  coord x weight 0;\n}\n";
  Location loc = error_site(text);
  EXPECT_EQ(loc.line, 4);
}

TEST(Semantics, UnknownNameLocated) {
  Location loc = error_site(std::string(kLine) + "algebroid TM = tangent(N);\n");
  EXPECT_EQ(loc.line, 4);
}

TEST(Semantics, WeightMismatchLocated) {
  std::string text = "chart F {\n  coord x weight 0;\n  coord y weight 1;\n  coord z weight 2;\n}\n"
                     "transition t : F -> F {\n  z = z + y;\n} inverse {\n  z = z - y;\n}\n";
  Location loc = error_site(text);
  EXPECT_EQ(loc.line, 7);
}

TEST(RoundTrip, CorpusFixpoint) {
  auto files = corpus_files();
  ASSERT_GE(files.size(), 3u);
  for (const auto& p : files) {
    if (p.stem() == "malformed") continue;
    Manifest m = parse_manifest(slurp(p));
    std::string printed = print_manifest(m);
    Manifest again = parse_manifest(printed);
    EXPECT_TRUE(again == m) << p;
    EXPECT_EQ(print_manifest(again), printed) << p;
  }
}

TEST(RoundTrip, ExpressionPrecedence) {
  Manifest m = parse_manifest(std::string(kLine) + "function f(x);\nchart F { coord x weight 0; coord y weight 2; }\n"
                                                   "transition t : F -> F { y = -(y - x^2*y)*2 + f{1}(x)^2*y/3; }\n");
  std::string printed = print_manifest(m);
  EXPECT_TRUE(parse_manifest(printed) == m) << printed;
}

TEST(Execute, ExitCodeContract) {
  EXPECT_EQ(run_manifest(corpus("tangent_r2.gcm"), "validate", {}, "tangent_r2.gcm").exit_code, 0);
  RunOutput bad = run_manifest(corpus("jacobi_violation.gcm"), "validate", {}, "jacobi_violation.gcm");
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.text.find("residual"), std::string::npos);
  RunOutput broken = run_manifest(corpus("malformed.gcm"), "validate", {}, "malformed.gcm");
  EXPECT_EQ(broken.exit_code, 2);
  EXPECT_NE(broken.text.find("malformed.gcm:8:21:"), std::string::npos) << broken.text;
  EXPECT_EQ(run_manifest(kLine, "bogus", {}, "x").exit_code, 2);
}

TEST(Execute, ElectromagneticCurvature) {
  RunOutput out = run_manifest(corpus("em_r2.gcm"), "curvature", {}, "em_r2.gcm");
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_NE(out.text.find("-A1{0,1}(x, y)*u*dx*dy + A2{1,0}(x, y)*u*dx*dy"), std::string::npos) << out.text;
}

TEST(Execute, DumpHasStableKeys) {
  RunOptions o;
  o.dump = true;
  RunOutput out = run_manifest(corpus("jacobi_violation.gcm"), "validate", o, "j");
  EXPECT_EQ(out.exit_code, 1);
  auto pos = [&](const char* k) { return out.text.find(k); };
  EXPECT_LT(pos("\"command\""), pos("\"exit_code\""));
  EXPECT_LT(pos("\"exit_code\""), pos("\"manifest\""));
  EXPECT_LT(pos("\"manifest\""), pos("\"results\""));
  RunOutput err = run_manifest(corpus("malformed.gcm"), "validate", o, "m");
  EXPECT_NE(err.text.find("\"line\": 8"), std::string::npos) << err.text;
}

TEST(Execute, DeterministicAcrossRuns) {
  for (const auto& p : corpus_files()) {
    std::string text = slurp(p);
    RunOutput first = run_manifest(text, "run", {}, p.filename().string());
    for (int i = 0; i < 2; ++i) EXPECT_EQ(run_manifest(text, "run", {}, p.filename().string()).text, first.text) << p;
  }
}

TEST(Execute, PropertiesSeeded) {
  RunOptions o;
  o.seed = 7;
  o.trials = 2;
  std::string text = corpus("tangent_r2.gcm");
  RunOutput a = run_manifest(text, "properties", o, "t");
  RunOutput b = run_manifest(text, "properties", o, "t");
  EXPECT_EQ(a.exit_code, 0) << a.text;
  EXPECT_EQ(a.text, b.text);
  EXPECT_NE(a.text.find("seed 7"), std::string::npos);
}

TEST(Execute, DeclarationOrderOfIndependentObjects) {
  const std::string tail = "algebroid TM = tangent(M);\nvalidate TM;\n";
  std::string one = std::string(kLine) + "chart N {\n  coord y weight 0;\n}\n" + tail;
  std::string two = "chart N {\n  coord y weight 0;\n}\n" + std::string(kLine) + tail;
  EXPECT_EQ(run_manifest(one, "run", {}, "m").exit_code, 0);
  EXPECT_EQ(run_manifest(one, "validate", {}, "m").text, run_manifest(two, "validate", {}, "m").text);
}
