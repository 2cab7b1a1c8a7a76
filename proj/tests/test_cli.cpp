#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

int run_cmd(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

int run_cli(const std::string& args) {
  return run_cmd(std::string(QMARKET_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null");
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path("cli_scratch") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  REQUIRE(out.good());
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string model1_config(const fs::path& dir) {
  std::ostringstream ss;
  ss << R"({
  "schema": 1,
  "model": "model1",
  "time": {"t_max": 20.0, "n_samples": 200},
  "output": {"csv_prefix": ")"
     << (dir / "run").string() << R"(", "svg": ")" << (dir / "run.svg").string() << R"("},
  "traders": [
    {"omega_s": 1.0, "omega_c": 2.0, "Omega": 5.0, "lambda_inf": 0.5,
     "init": {"shares": 30, "cash": 15, "loi": 5}},
    {"omega_s": 1.0, "omega_c": 2.0, "Omega": 1.0, "lambda_inf": 0.5,
     "init": {"shares": 30, "cash": 15, "loi": 5}}
  ]
})";
  return ss.str();
}

}  // namespace

TEST_CASE("simulate writes conserved, deterministic trader series") {
  const fs::path dir = scratch("sim1");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, model1_config(dir));
  CHECK(run_cli("simulate " + cfg.string()) == 0);

  const fs::path csv1 = dir / "run_trader1.csv";
  const fs::path csv2 = dir / "run_trader2.csv";
  REQUIRE(fs::exists(csv1));
  REQUIRE(fs::exists(csv2));
  const auto rows = read_csv(csv1);
  REQUIRE(rows.size() == 201);
  REQUIRE(rows[0].size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"t", "n_shares", "n_cash", "n_loi",
                                            "portfolio", "conserved_M"});
  for (size_t i = 1; i < rows.size(); ++i) {
    const double ns = std::stod(rows[i][1]), nc = std::stod(rows[i][2]);
    const double pi = std::stod(rows[i][4]), cons = std::stod(rows[i][5]);
    CHECK(std::abs(cons - 50.0) < 1e-9);
    CHECK(std::abs(pi - (ns + nc)) < 1e-9);
  }

  const std::string svg = read_text(dir / "run.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("trader 2 portfolio") != std::string::npos);

  // Byte determinism across runs.
  const fs::path dir2 = scratch("sim1_repeat");
  write_text(dir2 / "cfg.json", model1_config(dir2));
  CHECK(run_cli("simulate " + (dir2 / "cfg.json").string()) == 0);
  CHECK(read_text(csv1) == read_text(dir2 / "run_trader1.csv"));
  CHECK(read_text(dir / "run.svg") == read_text(dir2 / "run.svg"));
}

TEST_CASE("simulate: decoupled trader keeps portfolio 45") {
  const fs::path dir = scratch("sim_flat");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model1",
  "time": {"t_max": 5.0, "n_samples": 10},
  "output": {"csv_prefix": ")" +
                     (dir / "flat").string() + R"("},
  "traders": [{"omega_s": 1.0, "omega_c": 2.0, "Omega": 3.0, "lambda_inf": 0.0,
               "init": {"shares": 30, "cash": 15, "loi": 5}}]
})");
  CHECK(run_cli("simulate " + cfg.string()) == 0);
  const auto rows = read_csv(dir / "flat_trader1.csv");
  REQUIRE(rows.size() == 11);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::abs(std::stod(rows[i][4]) - 45.0) < 1e-12);
}

TEST_CASE("simulate model2 conserves the share+cash+bath ledger") {
  const fs::path dir = scratch("sim2");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model2",
  "time": {"t_max": 2.0, "n_samples": 40},
  "output": {"csv_prefix": ")" +
                     (dir / "m2").string() + R"("},
  "traders": [{"omega": 2.0, "Omega": 3.0, "lambda_inf": 0.5, "n_loi_density": 5.0,
               "init": {"shares": 30, "cash": 15}}]
})");
  CHECK(run_cli("simulate " + cfg.string()) == 0);
  const auto rows = read_csv(dir / "m2_trader1.csv");
  REQUIRE(rows.size() == 41);
  for (size_t i = 1; i < rows.size(); ++i)
    CHECK(std::abs(std::stod(rows[i][5]) - 45.0) < 1e-9);
  // The weak-coupling market drains value from the traders.
  CHECK(std::stod(rows[40][4]) < 45.0);
}

TEST_CASE("config errors exit with code 2 and a machine-readable reason") {
  const fs::path dir = scratch("bad_cfg");
  CHECK(run_cli("simulate " + (dir / "missing.json").string()) == 2);

  const fs::path bad_json = dir / "broken.json";
  write_text(bad_json, "{ not json");
  CHECK(run_cli("simulate " + bad_json.string()) == 2);

  const fs::path unknown_key = dir / "unknown.json";
  write_text(unknown_key, R"({
  "schema": 1, "model": "model1", "bogus": 1,
  "time": {"t_max": 5.0, "n_samples": 10},
  "traders": [{"omega_s": 1, "omega_c": 2, "Omega": 3, "lambda_inf": 0.5,
               "init": {"shares": 1, "cash": 0, "loi": 0}}]
})");
  const fs::path err = dir / "err.txt";
  CHECK(run_cmd(std::string(QMARKET_CLI_PATH) + " simulate " + unknown_key.string() +
                " > /dev/null 2> " + err.string()) == 2);
  const std::string msg = read_text(err);
  CHECK(msg.find("{\"error\":{\"type\":\"config\"") == 0);
  CHECK(msg.find("bogus") != std::string::npos);

  const fs::path bad_schema = dir / "schema.json";
  write_text(bad_schema, R"({"schema": 2, "model": "model1",
    "time": {"t_max": 5.0, "n_samples": 10}, "traders": []})");
  CHECK(run_cli("simulate " + bad_schema.string()) == 2);

  const fs::path loi_in_m2 = dir / "m2loi.json";
  write_text(loi_in_m2, R"({
  "schema": 1, "model": "model2",
  "time": {"t_max": 2.0, "n_samples": 10},
  "output": {"csv_prefix": "x"},
  "traders": [{"omega": 2.0, "Omega": 3.0, "lambda_inf": 0.5, "n_loi_density": 5.0,
               "init": {"shares": 30, "cash": 15, "loi": 5}}]
})");
  CHECK(run_cli("simulate " + loi_in_m2.string()) == 2);

  // No subcommand and unknown flags are CLI parse failures.
  CHECK(run_cli("") == 2);
  CHECK(run_cli("simulate") == 2);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("oracle-check passes on the exact sector and writes a report") {
  const fs::path dir = scratch("oracle1");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model1",
  "time": {"t_max": 6.0, "n_samples": 10},
  "output": {"report": ")" +
                     (dir / "report.txt").string() + R"("},
  "oracle": {"n_times": 11},
  "traders": [{"omega_s": 2.0, "omega_c": 2.0, "Omega": 3.0, "lambda_inf": 0.5,
               "init": {"shares": 3, "cash": 2, "loi": 1}}]
})");
  CHECK(run_cmd(std::string(QMARKET_CLI_PATH) + " oracle-check " + cfg.string() + " > " +
                (dir / "stdout.txt").string() + " 2> /dev/null") == 0);
  const std::string out = read_text(dir / "stdout.txt");
  CHECK(out.find("oracle-check result: PASS") != std::string::npos);
  const std::string report = read_text(dir / "report.txt");
  CHECK(report.find("model1 trader 1") != std::string::npos);
  CHECK(report.find("oracle-check result: PASS") != std::string::npos);
}

TEST_CASE("oracle-check exits 4 when the tolerance cannot be met") {
  const fs::path dir = scratch("oracle_fail");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model1",
  "time": {"t_max": 6.0, "n_samples": 10},
  "oracle": {"n_times": 5, "tolerance": 1e-18},
  "traders": [{"omega_s": 2.0, "omega_c": 2.0, "Omega": 3.0, "lambda_inf": 0.5,
               "init": {"shares": 2, "cash": 1, "loi": 1}}]
})");
  CHECK(run_cli("oracle-check " + cfg.string()) == 4);
}

TEST_CASE("pilot-wave simulate writes portfolio and field tables") {
  const fs::path dir = scratch("pilot");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "pilotwave",
  "time": {"t_max": 0.2, "n_samples": 3},
  "output": {"csv_prefix": ")" +
                     (dir / "pw").string() + R"(", "fields_prefix": ")" +
                     (dir / "pw").string() + R"("},
  "grid": {"n1": 32, "n2": 32, "q1_min": -6.0, "q1_max": 6.0,
           "q2_min": -6.0, "q2_max": 6.0},
  "wave": {"sigma": 1.0},
  "potential": {"type": "harmonic", "k1": 0.5, "k2": 0.5}
})");
  CHECK(run_cli("simulate " + cfg.string()) == 0);
  const auto rows = read_csv(dir / "pw_portfolio.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"t", "pi1", "pi2", "q1", "q2", "norm"});
  for (size_t i = 1; i < rows.size(); ++i) {
    // Centered symmetric packet: no net force, unit norm.
    CHECK(std::abs(std::stod(rows[i][1])) < 1e-10);
    CHECK(std::abs(std::stod(rows[i][5]) - 1.0) < 1e-9);
  }
  const auto field = read_csv(dir / "pw_R.csv");
  REQUIRE(field.size() == 1 + 32 * 32);
  CHECK(field[0] == std::vector<std::string>{"q1", "q2", "value"});
  REQUIRE(fs::exists(dir / "pw_U.csv"));
}

TEST_CASE("pilot-wave path across dead amplitude exits 3") {
  const fs::path dir = scratch("pilot_masked");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "pilotwave",
  "time": {"t_max": 0.1, "n_samples": 2},
  "output": {"csv_prefix": ")" +
                     (dir / "pw").string() + R"("},
  "grid": {"n1": 64, "n2": 64, "q1_min": -8.0, "q1_max": 8.0,
           "q2_min": -8.0, "q2_max": 8.0},
  "wave": {"sigma": 1.0},
  "path": [7.9, 7.9]
})");
  const fs::path err = dir / "err.txt";
  CHECK(run_cmd(std::string(QMARKET_CLI_PATH) + " simulate " + cfg.string() +
                " > /dev/null 2> " + err.string()) == 3);
  CHECK(read_text(err).find("\"type\":\"numerical\"") != std::string::npos);
}

TEST_CASE("sweep tabulates the damping dependence of the gain") {
  const fs::path dir = scratch("sweep");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model3",
  "time": {"t_max": 10.0, "n_samples": 50},
  "traders": [{"omega_s": 1.0, "omega_c": 2.0, "Omega": 5.0, "Omega_r": 1.0,
               "gamma": 0.2, "lambda_inf": 0.1,
               "init": {"shares": 0, "cash": 0, "loi": 5}}]
})");
  const fs::path sw = dir / "sweep.json";
  write_text(sw, R"({
  "params": [{"pointer": "/traders/0/gamma", "min": 0.1, "max": 0.9, "steps": 3}],
  "objective": "delta_pi",
  "output": {"csv": ")" + (dir / "sweep.csv").string() +
                     R"("}
})");
  CHECK(run_cli("sweep " + cfg.string() + " --sweep " + sw.string()) == 0);
  const auto rows = read_csv(dir / "sweep.csv");
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"/traders/0/gamma", "delta_pi_1"});
  CHECK(std::stod(rows[1][0]) == doctest::Approx(0.1));
  CHECK(std::stod(rows[3][0]) == doctest::Approx(0.9));
  CHECK(std::stod(rows[1][1]) > std::stod(rows[2][1]));
  CHECK(std::stod(rows[2][1]) > std::stod(rows[3][1]));

  // Single-threaded run produces identical bytes.
  const fs::path sw1 = dir / "sweep1.json";
  write_text(sw1, R"({
  "params": [{"pointer": "/traders/0/gamma", "min": 0.1, "max": 0.9, "steps": 3}],
  "objective": "delta_pi",
  "output": {"csv": ")" + (dir / "sweep1.csv").string() +
                      R"("}
})");
  CHECK(run_cmd("QMARKET_THREADS=1 " + std::string(QMARKET_CLI_PATH) + " sweep " +
                cfg.string() + " --sweep " + sw1.string() + " > /dev/null 2>&1") == 0);
  CHECK(read_text(dir / "sweep.csv") == read_text(dir / "sweep1.csv"));

  // Bad thread budget and bad pointers are config errors.
  CHECK(run_cmd("QMARKET_THREADS=abc " + std::string(QMARKET_CLI_PATH) + " sweep " +
                cfg.string() + " --sweep " + sw.string() + " > /dev/null 2>&1") == 2);
  const fs::path sw_bad = dir / "bad.json";
  write_text(sw_bad, R"({
  "params": [{"pointer": "/traders/0/nope", "min": 0.1, "max": 0.9, "steps": 3}],
  "objective": "delta_pi",
  "output": {"csv": ")" + (dir / "bad.csv").string() +
                         R"("}
})");
  CHECK(run_cli("sweep " + cfg.string() + " --sweep " + sw_bad.string()) == 2);
  const fs::path sw_str = dir / "str.json";
  write_text(sw_str, R"({
  "params": [{"pointer": "/model", "min": 0.1, "max": 0.9, "steps": 3}],
  "objective": "delta_pi",
  "output": {"csv": ")" + (dir / "str.csv").string() +
                         R"("}
})");
  CHECK(run_cli("sweep " + cfg.string() + " --sweep " + sw_str.string()) == 2);
}

TEST_CASE("ordering sweep reports both gains and their sign") {
  const fs::path dir = scratch("sweep_order");
  const fs::path cfg = dir / "cfg.json";
  write_text(cfg, R"({
  "schema": 1, "model": "model3",
  "time": {"t_max": 10.0, "n_samples": 50},
  "traders": [
    {"omega_s": 1.0, "omega_c": 2.0, "Omega": 6.0, "Omega_r": 1.0,
     "gamma": 0.2, "lambda_inf": 0.1, "init": {"shares": 0, "cash": 0, "loi": 5}},
    {"omega_s": 1.0, "omega_c": 2.0, "Omega": 5.0, "Omega_r": 1.0,
     "gamma": 0.5, "lambda_inf": 0.1, "init": {"shares": 0, "cash": 0, "loi": 5}}
  ]
})");
  const fs::path sw = dir / "sweep.json";
  write_text(sw, R"({
  "params": [{"pointer": "/traders/0/gamma", "min": 0.1, "max": 1.2, "steps": 4}],
  "objective": "ordering",
  "output": {"csv": ")" + (dir / "order.csv").string() +
                     R"("}
})");
  CHECK(run_cli("sweep " + cfg.string() + " --sweep " + sw.string()) == 0);
  const auto rows = read_csv(dir / "order.csv");
  REQUIRE(rows.size() == 5);
  CHECK(rows[0] == std::vector<std::string>{"/traders/0/gamma", "delta_pi_1", "delta_pi_2",
                                            "sign_delta"});
  for (size_t i = 1; i < rows.size(); ++i) {
    const double d1 = std::stod(rows[i][1]), d2 = std::stod(rows[i][2]);
    const double sign = std::stod(rows[i][3]);
    CHECK(sign == doctest::Approx(d1 > d2 ? 1.0 : (d1 < d2 ? -1.0 : 0.0)));
  }
}

TEST_CASE("critical subcommand finds or reports the crossing") {
  const fs::path dir = scratch("critical");
  const fs::path out = dir / "out.txt";
  CHECK(run_cmd(std::string(QMARKET_CLI_PATH) +
                " critical --omega1 6 --omega2 5 --gamma2 1.0 > " + out.string() +
                " 2> /dev/null") == 0);
  const std::string found = read_text(out);
  CHECK(found.find("critical gamma1 = 0.688") != std::string::npos);

  CHECK(run_cmd(std::string(QMARKET_CLI_PATH) +
                " critical --omega1 6 --omega2 5 --gamma2 0.5 > " + out.string() +
                " 2> /dev/null") == 0);
  const std::string missed = read_text(out);
  CHECK(missed.find("no crossing in bracket") != std::string::npos);
}

TEST_CASE("figures command is deterministic and complete") {
  const fs::path d1 = scratch("figs_a");
  const fs::path d2 = scratch("figs_b");
  CHECK(run_cli("figures --out " + d1.string()) == 0);
  CHECK(run_cli("figures --out " + d2.string()) == 0);
  for (const char* name :
       {"fig1_left.csv", "fig1_right.csv", "fig1_left.svg", "fig1_right.svg",
        "fig2_trader1.csv", "fig2_trader2.csv", "fig2.svg", "fig3_trader1.csv",
        "fig3_trader2.csv", "fig3.svg"}) {
    REQUIRE(fs::exists(d1 / name));
    CHECK(read_text(d1 / name) == read_text(d2 / name));
  }
  const auto rows = read_csv(d1 / "fig1_left.csv");
  REQUIRE(rows.size() == 2001);
  for (size_t i = 1; i < rows.size(); i += 200)
    CHECK(std::abs(std::stod(rows[i][5]) - 50.0) < 1e-9);
}
