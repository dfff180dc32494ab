#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "capmod/studies.hpp"
#include "capmod/suites.hpp"

using namespace capmod;

TEST(Refine1d, ConvergesToTwo) {
  auto r = study_refine_1d(10.0, {251, 501, 1001, 2001});
  EXPECT_TRUE(r.pass()) << r.to_json().dump(2);
  auto caps = r.data()["capacity"].get<std::vector<double>>();
  EXPECT_NEAR(caps.back(), 2.0, 0.04);
  EXPECT_NEAR(r.data()["observed_order"].get<double>(), 2.0, 0.1);
  EXPECT_NEAR(r.data()["limit_estimate"].get<double>(), 2.0, 1e-5);
}

TEST(Refine1d, Validation) {
  EXPECT_THROW(study_refine_1d(4.0, {101}), Error);
  EXPECT_THROW(study_refine_1d(10.0, {201, 101}), Error);
  EXPECT_THROW(study_refine_1d(10.0, {101, 101}), Error);
  EXPECT_THROW(study_refine_1d(10.0, {}), Error);
}

TEST(Refine2d, PointCapacityDecays) {
  auto r = study_refine_2d({16, 32, 64});
  EXPECT_TRUE(r.pass()) << r.to_json().dump(2);
  EXPECT_LT(r.data()["ratio_last_first"].get<double>(), 0.9);
  EXPECT_THROW(study_refine_2d({16, 16}), Error);
  EXPECT_THROW(study_refine_2d({16, 1024}), Error);
}

TEST(Scenarios, DominatedConvergenceFailure) {
  auto r = scenario_dominated_convergence_failure(1001, 10);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(2);
  for (double c : r.data()["integral"].get<std::vector<double>>()) EXPECT_GT(c, 1.9);
  EXPECT_THROW(scenario_dominated_convergence_failure(101, 30), Error);
}

TEST(Scenarios, CapAeVsDcap) {
  auto r = scenario_capae_vs_dcap(1001, 10);
  EXPECT_TRUE(r.pass()) << r.to_json().dump(2);
}

TEST(Suites, UnknownNameListsValidSuites) {
  try {
    run_suite("bogus", 7);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    std::string msg = e.what();
    for (const auto& name : suite_names()) EXPECT_NE(msg.find(name), std::string::npos) << msg;
  }
}

TEST(Suites, EachSuitePassesAndIsDeterministic) {
  for (const std::string name : {"axioms", "outer", "capacity", "metrics", "modules"}) {
    auto a = run_suite(name, 7);
    EXPECT_TRUE(a.pass()) << a.to_json().dump(2);
    EXPECT_EQ(a.to_json().dump(), run_suite(name, 7).to_json().dump()) << name;
  }
}

TEST(Suites, WritesJsonAndCsv) {
  const std::string path = ::testing::TempDir() + "capmod_suite_report.json";
  auto r = run_suite("axioms", 3, path);
  std::ifstream js(path), cs(::testing::TempDir() + "capmod_suite_report.csv");
  ASSERT_TRUE(js.good());
  ASSERT_TRUE(cs.good());
  std::stringstream buf;
  buf << js.rdbuf();
  auto parsed = nlohmann::json::parse(buf.str());
  EXPECT_EQ(parsed["schema"], kReportSchema);
  EXPECT_EQ(parsed["pass"], r.pass());
  EXPECT_THROW(run_suite("axioms", 3, "/nonexistent-dir/x/report.json"), Error);
}
