#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agestruct/cli.hpp"
#include "agestruct/reproduction.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"

using namespace agestruct;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "agestruct");
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

json baseline_doc() {
  return json::parse(R"({
    "model": {"kernel": "polynomial_age", "n": 1, "rho": 2.0,
              "beta": [{"family": "exp_decay", "b": 1.0, "k": 1.0},
                       {"family": "exp_decay", "b": 4.5, "k": 1.0}],
              "mu": {"family": "power", "m0": 1.0, "c": 1.0, "p": 2.0}},
    "initial": {"family": "exp_decay", "scale": 1.0, "rate": 1.0, "a_max": 50},
    "sim": {"t_end": 100, "rtol": 1e-8, "atol": 1e-12}
  })");
}

std::string write_config(const fs::path& dir, const std::string& name, const json& doc) {
  const auto path = dir / name;
  std::ofstream(path) << doc.dump(2);
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("validate") {
  const auto dir = fixtures::scratch_dir("cli_validate");
  const auto ok = write_config(dir, "ok.json", baseline_doc());
  CHECK(run({"validate", "--config", ok}).code == kExitOk);

  auto doc = baseline_doc();
  doc["model"]["mu"]["p"] = 0;
  const auto bad = write_config(dir, "constant_mu.json", doc);
  const auto r = run({"validate", "--config", bad, "--json"});
  CHECK(r.code == kExitAssumption);
  const auto report = json::parse(r.out);
  bool has_cmd = false;
  for (const auto& v : report["violations"]) has_cmd = has_cmd || v["condition"] == "cmd";
  CHECK(has_cmd);

  std::ofstream(dir / "broken.json") << "{\"model\": ";
  CHECK(run({"validate", "--config", (dir / "broken.json").string()}).code == kExitConfig);
  CHECK(run({"validate", "--config", (dir / "missing.json").string()}).code == kExitConfig);
  CHECK(run({"validate"}).code == kExitConfig);
  CHECK(run({"frobnicate"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
}

TEST_CASE("equilibrium") {
  const auto dir = fixtures::scratch_dir("cli_equilibrium");
  const auto base = write_config(dir, "base.json", baseline_doc());
  auto r = run({"equilibrium", "--config", base, "--json"});
  REQUIRE(r.code == kExitOk);
  auto j = json::parse(r.out);
  CHECK(j["regime"] == "subcritical");
  CHECK(j["r0"].get<double>() == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(j["nontrivial"] == false);
  CHECK(j["P_star"].get<double>() == 0.0);

  auto doc = baseline_doc();
  doc["model"]["fertility_scale"] = 2.0;
  r = run({"equilibrium", "--config", write_config(dir, "x2.json", doc), "--json", "--out", (dir / "o").string()});
  REQUIRE(r.code == kExitOk);
  j = json::parse(r.out);
  CHECK(j["regime"] == "supercritical");
  CHECK(j["P_star"].get<double>() == doctest::Approx(0.41985973623047398).epsilon(1e-11));
  CHECK(j["moments_star"][0].get<double>() == doctest::Approx(0.15548792664716130).epsilon(1e-11));
  CHECK(j["moments_star"][1].get<double>() == doctest::Approx(0.048952806126547368).epsilon(1e-11));
  CHECK(fs::exists(dir / "o" / "equilibrium.json"));

  doc["model"]["fertility_scale"] = 1.2;
  r = run({"equilibrium", "--config", write_config(dir, "crit.json", doc), "--json"});
  REQUIRE(r.code == kExitOk);
  j = json::parse(r.out);
  CHECK(j["regime"] == "critical");
  CHECK(j["nontrivial"] == false);

  doc["model"]["mu"]["p"] = 0;
  CHECK(run({"equilibrium", "--config", write_config(dir, "bad.json", doc)}).code == kExitAssumption);
}

TEST_CASE("simulate") {
  const auto dir = fixtures::scratch_dir("cli_simulate");
  const auto base = write_config(dir, "base.json", baseline_doc());
  const auto out = dir / "run";
  REQUIRE(run({"simulate", "--config", base, "--out", out.string()}).code == kExitOk);
  const auto rows = read_csv(out / "trajectory.csv");
  REQUIRE(rows.size() > 10);
  CHECK(rows[0] == std::vector<std::string>{"t", "P", "P0", "P1", "B", "Rn_of_P", "M"});
  CHECK(std::stod(rows.back()[1]) < 1e-8);
  CHECK(std::stod(rows[1][5]) == doctest::Approx(0.1954359531223287).epsilon(1e-10));
  double prev = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double rn = std::stod(rows[k][5]);
    CHECK(rn >= prev - 1e-12);
    CHECK(rn < 5.0 / 6.0 + 1e-12);
    prev = rn;
  }
  CHECK(std::stod(rows.back()[5]) == doctest::Approx(5.0 / 6.0).epsilon(1e-6));
  const auto monitors = json::parse(slurp(out / "monitors.json"));
  CHECK(monitors["positivity"]["conclusion_held"] == true);
  CHECK(monitors["ordering"]["conclusion_held"] == true);

  // determinism
  const auto again = dir / "again";
  REQUIRE(run({"simulate", "--config", base, "--out", again.string()}).code == kExitOk);
  CHECK(slurp(out / "trajectory.csv") == slurp(again / "trajectory.csv"));

  // zero horizon
  const auto zero = dir / "zero";
  REQUIRE(run({"simulate", "--config", base, "--out", zero.string(), "--t-end", "0"}).code == kExitOk);
  const auto z = read_csv(zero / "trajectory.csv");
  REQUIRE(z.size() == 2);
  CHECK(std::stod(z[1][0]) == 0.0);
  CHECK(std::stod(z[1][2]) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  CHECK(run({"simulate", "--config", base, "--t-end", "-1"}).code == kExitConfig);
}

TEST_CASE("simulate from the equilibrium") {
  const auto dir = fixtures::scratch_dir("cli_simulate_eq");
  auto doc = baseline_doc();
  doc["model"]["fertility_scale"] = 2.0;
  doc["initial"] = {{"family", "equilibrium"}};
  doc["sim"]["t_end"] = 10;
  const auto cfg = write_config(dir, "eq.json", doc);
  REQUIRE(run({"simulate", "--config", cfg, "--out", dir.string()}).code == kExitOk);
  const auto rows = read_csv(dir / "trajectory.csv");
  const double p_star = nontrivial_equilibrium(fixtures::baseline_model(2.0)).state.total;
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::abs(std::stod(rows[k][1]) - p_star) <= 1e-6);
}

TEST_CASE("reconstruct") {
  const auto dir = fixtures::scratch_dir("cli_reconstruct");
  auto doc = baseline_doc();
  doc["sim"]["t_end"] = 10;
  const auto cfg = write_config(dir, "base.json", doc);
  REQUIRE(run({"reconstruct", "--config", cfg, "--out", dir.string(), "--times", "0,2"}).code == kExitOk);
  const auto t0 = read_csv(dir / "density_t0.csv");
  CHECK(t0[0] == std::vector<std::string>{"a", "p", "phi"});
  CHECK(t0.size() == 2002);
  for (std::size_t k = 1; k < t0.size(); k += 100)
    CHECK(std::stod(t0[k][1]) == doctest::Approx(std::exp(-std::stod(t0[k][0]))).epsilon(1e-14));
  const auto consistency = json::parse(slurp(dir / "consistency.json"));
  REQUIRE(consistency.size() == 2);
  CHECK(consistency[1]["t"] == 2.0);
  CHECK(consistency[1]["max_relative_error"].get<double>() < 5e-3);

  CHECK(run({"reconstruct", "--config", cfg, "--out", dir.string(), "--times", "11"}).code == kExitNumerical);
  CHECK(run({"reconstruct", "--config", cfg, "--out", dir.string(), "--times", "x"}).code == kExitConfig);
}

TEST_CASE("sweep") {
  const auto dir = fixtures::scratch_dir("cli_sweep");
  auto doc = baseline_doc();
  doc["sweep"] = {{"parameter", "fertility_scale"}, {"values", {2.0, 0.5, 1.2, 1.0}}};
  const auto cfg = write_config(dir, "sweep.json", doc);
  REQUIRE(run({"sweep", "--config", cfg, "--out", dir.string()}).code == kExitOk);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"value", "R0", "regime", "P_star", "P_at_t_end"});
  const double values[] = {2.0, 0.5, 1.2, 1.0};
  const char* regimes[] = {"supercritical", "subcritical", "critical", "subcritical"};
  for (int k = 0; k < 4; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k) + 1];
    CHECK(std::stod(r[0]) == values[k]);
    CHECK(std::abs(std::stod(r[1]) - values[k] * 5.0 / 6.0) <= 1e-12);
    CHECK(r[2] == regimes[k]);
    CHECK(r[3].empty() == (k != 0));
  }
  CHECK(std::stod(rows[1][3]) == nontrivial_equilibrium(fixtures::baseline_model(2.0)).state.total);

  REQUIRE(run({"sweep", "--config", cfg, "--out", dir.string(), "--values", "1.5,0.7"}).code == kExitOk);
  CHECK(read_csv(dir / "sweep.csv").size() == 3);
  CHECK(run({"sweep", "--config", cfg, "--out", dir.string(), "--values", ""}).code == kExitConfig);

  doc["sweep"]["values"] = json::array();
  CHECK(run({"sweep", "--config", write_config(dir, "empty.json", doc)}).code == kExitConfig);
  doc["sweep"] = {{"parameter", "model.mu.p"}, {"values", {2.0, 0.0}}};
  CHECK(run({"sweep", "--config", write_config(dir, "inadmissible.json", doc), "--out", dir.string()}).code ==
        kExitAssumption);
}

TEST_CASE("compare") {
  const auto dir = fixtures::scratch_dir("cli_compare");
  const auto cfg = write_config(dir, "base.json", baseline_doc());
  auto r = run({"compare", "--config", cfg, "--out", dir.string(), "--t-end", "20"});
  REQUIRE(r.code == kExitOk);
  CHECK(json::parse(slurp(dir / "compare.json"))["holds"] == true);
  const auto rows = read_csv(dir / "compare.csv");
  CHECK(rows[0] == std::vector<std::string>{"t", "P", "P_bar"});
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(std::stod(rows[k][1]) <= std::stod(rows[k][2]) + 1e-10);

  r = run({"compare", "--config", cfg, "--out", dir.string(), "--t-end", "0"});
  REQUIRE(r.code == kExitOk);
  CHECK(read_csv(dir / "compare.csv").size() == 2);
  CHECK(json::parse(slurp(dir / "compare.json"))["holds"] == true);

  auto doc = baseline_doc();
  doc["model"]["fertility_scale"] = 2.0;
  REQUIRE(run({"compare", "--config", write_config(dir, "x2.json", doc), "--out", dir.string(), "--t-end", "20"})
              .code == kExitOk);
  CHECK(json::parse(slurp(dir / "compare.json"))["holds"] == true);
}

TEST_CASE("oracle-pde") {
  const auto dir = fixtures::scratch_dir("cli_oracle");
  const auto cfg = write_config(dir, "base.json", baseline_doc());
  auto max_err = [&](const std::string& dt) {
    REQUIRE(run({"oracle-pde", "--config", cfg, "--out", dir.string(), "--t-end", "5", "--dt", dt}).code == kExitOk);
    const auto rows = read_csv(dir / "oracle_pde.csv");
    CHECK(rows[0] == std::vector<std::string>{"t", "P_ode", "P_pde", "rel_err"});
    double worst = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) worst = std::max(worst, std::stod(rows[k][3]));
    return worst;
  };
  const double e1 = max_err("0.01");
  const double e2 = max_err("0.005");
  CHECK(e1 < 0.01);
  CHECK(e2 < e1);
  CHECK(run({"oracle-pde", "--config", cfg, "--out", dir.string(), "--t-end", "5", "--dt", "0.03"}).code ==
        kExitConfig);
}
