#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "covsteer/covsteer.h"

namespace {

const std::string kScenarios = std::string(COVSTEER_SOURCE_DIR) + "/scenarios/";

struct ScenarioHandle {
  cs_scenario_t h = nullptr;
  ~ScenarioHandle() { cs_scenario_destroy(&h); }
};

struct ResultHandle {
  cs_result_t h = nullptr;
  ~ResultHandle() { cs_result_destroy(&h); }
};

}  // namespace

TEST(CApi, VersionAndNames) {
  EXPECT_STRNE(cs_version(), "");
  EXPECT_STREQ(cs_status_name(CS_ERR_SCHEMA), "SchemaError");
  EXPECT_STREQ(cs_status_name(CS_ERR_INVALID_HANDLE), "InvalidHandle");
}

TEST(CApi, NullHandlesRejected) {
  int n = 0;
  EXPECT_EQ(cs_scenario_dims(nullptr, &n, nullptr, nullptr, nullptr), CS_ERR_INVALID_HANDLE);
  double cost = 0.0;
  EXPECT_EQ(cs_result_cost(nullptr, &cost), CS_ERR_INVALID_HANDLE);
  EXPECT_EQ(cs_scenario_load(nullptr, nullptr), CS_ERR_INVALID_ARGUMENT);
  cs_scenario_t none = nullptr;
  EXPECT_EQ(cs_scenario_destroy(&none), CS_OK);
}

TEST(CApi, ErrorsCarryMessages) {
  ScenarioHandle sc;
  EXPECT_EQ(cs_scenario_parse("horizon: [", &sc.h), CS_ERR_PARSE);
  EXPECT_EQ(sc.h, nullptr);
  EXPECT_STRNE(cs_last_error_message(), "");
  EXPECT_EQ(cs_scenario_parse("horizon: 2\nbogus: 1\n", &sc.h), CS_ERR_SCHEMA);
  EXPECT_NE(std::strstr(cs_last_error_message(), "bogus"), nullptr);
  EXPECT_EQ(cs_scenario_load("/nonexistent/x.scn", &sc.h), CS_ERR_IO);
}

TEST(CApi, ValidateReportsIssuesWithoutFailing) {
  ScenarioHandle sc;
  const char* text = R"(
horizon: 2
system: {A: [[1]], B: [[1]], D: [[0.1]]}
cost: {Q: [[1]], R: [[0]]}
initial: {mean: [1], cov: [[0.2]]}
terminal: {mean: [0], cov: [[1]]}
)";
  ASSERT_EQ(cs_scenario_parse(text, &sc.h), CS_OK) << cs_last_error_message();
  size_t issues = 0;
  char buf[256];
  ASSERT_EQ(cs_scenario_validate(sc.h, &issues, buf, sizeof buf), CS_OK);
  EXPECT_EQ(issues, 2u);  // one per step
  EXPECT_NE(std::strstr(buf, "NotPD"), nullptr);
  char tiny[4];
  ASSERT_EQ(cs_scenario_validate(sc.h, &issues, tiny, sizeof tiny), CS_OK);
  EXPECT_EQ(std::strlen(tiny), 3u);
  ResultHandle r;
  EXPECT_EQ(cs_run(sc.h, CS_MODE_CHANCE, 0, &r.h), CS_ERR_VALIDATION);
}

TEST(CApi, RunDoubleIntegrator) {
  ScenarioHandle sc;
  ASSERT_EQ(cs_scenario_load((kScenarios + "di.scn").c_str(), &sc.h), CS_OK);
  int n = 0, nx = 0, nu = 0, nw = 0;
  cs_scenario_dims(sc.h, &n, &nx, &nu, &nw);
  EXPECT_EQ(n, 10);
  EXPECT_EQ(nx, 2);
  EXPECT_EQ(nu, 1);
  EXPECT_EQ(nw, 2);
  cs_scenario_set_samples(sc.h, 5000);
  cs_scenario_set_seed(sc.h, 3);

  ResultHandle r;
  ASSERT_EQ(cs_run(sc.h, CS_MODE_CHANCE, 1, &r.h), CS_OK) << cs_last_error_message();
  cs_solve_status_t status;
  ASSERT_EQ(cs_result_solve_status(r.h, &status), CS_OK);
  EXPECT_EQ(status, CS_SOLVE_OPTIMAL);
  double cost = 0.0, residual = 0.0, slack = 0.0, freq = -1.0;
  int row = -1, passed = 0;
  cs_result_cost(r.h, &cost);
  cs_result_max_row_residual(r.h, &residual, &row);
  cs_result_terminal_cov_slack(r.h, &slack);
  cs_result_checks_passed(r.h, &passed);
  ASSERT_EQ(cs_result_union_violation(r.h, &freq), CS_OK);
  EXPECT_NEAR(cost, 24.16, 0.15);
  EXPECT_LE(residual, 1e-6);
  EXPECT_GE(row, 0);
  EXPECT_GE(slack, -1e-6);
  EXPECT_EQ(passed, 1);
  EXPECT_GE(freq, 0.0);

  size_t needed = 0;
  ASSERT_EQ(cs_result_summary_json(r.h, nullptr, 0, &needed), CS_OK);
  std::vector<char> json(needed);
  ASSERT_EQ(cs_result_summary_json(r.h, json.data(), json.size(), &needed), CS_OK);
  EXPECT_EQ(std::strlen(json.data()) + 1, needed);
  EXPECT_NE(std::strstr(json.data(), "\"mode\": \"chance\""), nullptr);

  const auto dir = std::filesystem::temp_directory_path() / "covsteer_capi_emit";
  std::filesystem::remove_all(dir);
  ASSERT_EQ(cs_result_emit(r.h, dir.c_str()), CS_OK);
  EXPECT_TRUE(std::filesystem::exists(dir / "chance" / "summary.json"));
  std::filesystem::remove_all(dir);
}

TEST(CApi, UnsimulatedResultHasNoViolation) {
  ScenarioHandle sc;
  ASSERT_EQ(cs_scenario_load((kScenarios + "di.scn").c_str(), &sc.h), CS_OK);
  ResultHandle r;
  ASSERT_EQ(cs_run(sc.h, CS_MODE_MEAN_ONLY, 0, &r.h), CS_OK);
  cs_solve_status_t status;
  cs_result_solve_status(r.h, &status);
  EXPECT_EQ(status, CS_SOLVE_INFEASIBLE);
  double freq = 0.0;
  EXPECT_EQ(cs_result_union_violation(r.h, &freq), CS_ERR_INVALID_ARGUMENT);
}

TEST(CApi, DumpProgram) {
  ScenarioHandle sc;
  ASSERT_EQ(cs_scenario_load((kScenarios + "di.scn").c_str(), &sc.h), CS_OK);
  const auto path = std::filesystem::temp_directory_path() / "covsteer_capi_dump.txt";
  ASSERT_EQ(cs_dump_program(sc.h, CS_MODE_COV, path.c_str()), CS_OK) << cs_last_error_message();
  EXPECT_GT(std::filesystem::file_size(path), 100u);
  std::filesystem::remove(path);
  EXPECT_EQ(cs_dump_program(sc.h, CS_MODE_MEAN_ONLY, path.c_str()), CS_ERR_INVALID_ARGUMENT);
  cs_mode_t bogus = static_cast<cs_mode_t>(9);
  ResultHandle r;
  EXPECT_EQ(cs_run(sc.h, bogus, 0, &r.h), CS_ERR_INVALID_ARGUMENT);
}
