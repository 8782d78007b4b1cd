#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "tensormax/lab.hpp"
#include "tensormax/statcore.hpp"

using namespace tmax;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("tensormax_lab_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.grid = {Cell{40, 12, 2, PopulationSpec::standard_normal(), Sided::Two},
            Cell{30, 8, 3, PopulationSpec::rademacher(), Sided::One}};
  c.reps = 25;
  c.master_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("default z grid") {
  const auto z = default_z_grid();
  REQUIRE(z.size() == 101);
  CHECK(z.front() == -6.0);
  CHECK(z.back() == 12.0);
  CHECK(z[50] == 3.0);
  CHECK(z[12] == -3.84);
  CHECK(z[89] == 10.02);
}

TEST_CASE("ks distance of a stratified inverse-cdf sample") {
  const GumbelLimit limit(2, Sided::Two);
  std::vector<double> samples;
  const int R = 1000;
  for (int i = 1; i <= R; ++i) samples.push_back(limit.quantile((i - 0.5) / R));
  CHECK(ks_distance(samples, limit) == doctest::Approx(0.0005).epsilon(1e-9));
}

TEST_CASE("ks distance of a single sample at the median") {
  const GumbelLimit limit(3, Sided::One);
  const double med = limit.quantile(0.5);
  CHECK(ks_distance(std::vector<double>{med}, limit) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ks_distance(std::vector<double>{-INFINITY}, limit) == 1.0);
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, limit), ParameterError);
}

TEST_CASE("ks distance of samples drawn from the limit") {
  const GumbelLimit limit(2, Sided::Two);
  std::mt19937_64 g(2718);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 2; ++run) {
    std::vector<double> samples(2000);
    for (auto& s : samples) s = limit.quantile(u(g));
    CHECK(ks_distance(samples, limit) <= 0.04);
  }
}

TEST_CASE("configuration validation names the field") {
  auto c = small_config();
  c.reps = 0;
  try {
    c.validate();
    FAIL("expected a parameter error");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("reps") != std::string::npos);
  }
  c = small_config();
  c.grid[1].p = 2;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("grid[1].p"), DimensionError);
  c = small_config();
  c.grid[0].m = 13;
  CHECK_THROWS_AS(c.validate(), DimensionError);
  c = small_config();
  c.grid.clear();
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("budget is checked before any work") {
  auto c = small_config();
  c.grid.push_back(Cell{1000, 2000, 4, PopulationSpec::standard_normal(), Sided::Two});
  CHECK_THROWS_AS(run_experiment(c), BudgetError);
  c = small_config();
  c.total_budget = 1000;
  CHECK_THROWS_AS(run_experiment(c), BudgetError);
}

TEST_CASE("config json round trip and parsing errors") {
  auto c = small_config();
  c.output_path = "out/dir";
  nlohmann::json j = c;
  CHECK(j.get<ExperimentConfig>() == c);
  CHECK_THROWS_WITH_AS(nlohmann::json::parse(R"({"grid":[{"n":10,"p":5,"m":2}],"reps":0})").get<ExperimentConfig>(),
                       doctest::Contains("reps"), ParameterError);
  CHECK_THROWS_WITH_AS(nlohmann::json::parse(R"({"grid":[{"n":10,"m":2}],"reps":3})").get<ExperimentConfig>(),
                       doctest::Contains("p"), ParameterError);
  const auto parsed = nlohmann::json::parse(R"({"grid":[{"n":10,"p":5,"m":2}],"reps":3})").get<ExperimentConfig>();
  CHECK(parsed.grid[0].spec == PopulationSpec::standard_normal());
  CHECK(parsed.grid[0].sided == Sided::Two);
  CHECK(parsed.z_grid == default_z_grid());
}

TEST_CASE("records follow the normalization and cover every replicate") {
  const auto c = small_config();
  const auto report = run_experiment(c);
  REQUIRE(report.records.size() == 2 * c.reps);
  REQUIRE(report.cells.size() == 2);
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    const auto& r = report.records[i];
    const auto& cell = c.grid[r.cell_id];
    CHECK(r.cell_id == i / c.reps);
    CHECK(r.replicate == i % c.reps);
    CHECK(r.t_value == normalized_value(r.w_abs, static_cast<double>(cell.p), cell.m));
    CHECK(r.ratio == r.w_abs / std::sqrt(std::log(static_cast<double>(cell.p))));
    const auto x = sample_matrix(cell.spec, cell.n, cell.p, {c.master_seed, r.replicate});
    const auto st = max_entry(x, static_cast<std::size_t>(cell.m));
    CHECK(r.w_abs == st.w_abs);
    CHECK(r.w_signed == st.w_signed);
  }
  for (const auto& s : report.cells) {
    CHECK(s.ecdf.size() == 101);
    CHECK(std::is_sorted(s.ecdf.begin(), s.ecdf.end()));
    CHECK(s.type1.size() == 3);
    CHECK(s.ks_distance >= 0.0);
    CHECK(s.ks_distance <= 1.0);
  }
}

TEST_CASE("single replicate cell") {
  ExperimentConfig c;
  c.grid = {Cell{50, 10, 2, PopulationSpec::standard_normal(), Sided::Two}};
  c.reps = 1;
  c.master_seed = 4;
  const auto report = run_experiment(c);
  REQUIRE(report.records.size() == 1);
  const double t = report.records[0].t_value;
  const GumbelLimit limit(2, Sided::Two);
  CHECK(report.cells[0].ks_distance == std::max(limit.cdf(t), 1.0 - limit.cdf(t)));
  double grid_sup = 0.0;
  for (double z : c.z_grid) grid_sup = std::max(grid_sup, std::fabs((z >= t ? 1.0 : 0.0) - limit.cdf(z)));
  CHECK(report.cells[0].ks_distance >= grid_sup);
  CHECK(report.cells[0].ratio_sd == 0.0);
}

TEST_CASE("persist and load round trip") {
  const auto report = run_experiment(small_config());
  const auto dir = scratch("roundtrip");
  persist(report, dir);
  CHECK(load(dir) == report);
  std::ifstream csv(dir / "records.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "cell_id,replicate,w_abs,w_signed,t_value,ratio");
  const std::string bytes = slurp(dir / "records.csv");
  CHECK(bytes.find('\r') == std::string::npos);
  CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 51);
  const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(summary.at("cells").size() == 2);
  CHECK_FALSE(summary.at("cells")[0].contains("runtime_seconds"));
  fs::remove_all(dir);
}

TEST_CASE("output bytes do not depend on the worker count") {
  auto c = small_config();
  const auto d1 = scratch("w1");
  const auto d8 = scratch("w8");
  c.workers = 1;
  persist(run_experiment(c), d1);
  c.workers = 8;
  persist(run_experiment(c), d8);
  CHECK(slurp(d1 / "records.csv") == slurp(d8 / "records.csv"));
  CHECK(slurp(d1 / "summary.json") == slurp(d8 / "summary.json"));
  fs::remove_all(d1);
  fs::remove_all(d8);
}

TEST_CASE("io failures name the path") {
  const auto report = run_experiment(small_config());
  const auto file = scratch("blocker");
  fs::create_directories(file.parent_path());
  std::ofstream(file) << "x";
  CHECK_THROWS_WITH_AS(persist(report, file / "sub"), doctest::Contains("blocker"), IoError);
  CHECK_THROWS_WITH_AS(load(scratch("missing")), doctest::Contains("missing"), IoError);
  fs::remove(file);
}
