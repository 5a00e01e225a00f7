#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

// Integration tests that drive the installed CLI binary (path in the
// BGGM_CLI environment variable) through temporary directories.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "../tools/cli_io.hpp"

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
  if (const char* env = std::getenv("BGGM_CLI")) return env;
#ifdef BGGM_CLI_PATH
  return BGGM_CLI_PATH;
#else
  FAIL("BGGM_CLI must point at the bilevel-ggm binary");
  return "";
#endif
}

int run_cli(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("bggm_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE_MESSAGE(in.good(), path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string scenario_config(const std::string& out_dir, int threads, double rho = 0.2,
                            int n = 30) {
  std::ostringstream ss;
  ss << "{\n"
     << "  \"scenario\": {\"p\": 12, \"K\": 3, \"n\": " << n << ", \"rho_diff\": " << rho
     << ", \"graph_model\": \"scale_free\", \"seed\": 4242},\n"
     << "  \"threads\": " << threads << ",\n"
     << "  \"output_dir\": \"" << out_dir << "\"\n"
     << "}\n";
  return ss.str();
}

}  // namespace

TEST_CASE("csv matrices round-trip bit for bit") {
  const fs::path dir = fresh_dir("roundtrip");
  std::vector<double> values = {1.0 / 3.0, -2.7182818284590452, 1e-17, 4.0,
                                3.14159265358979312, -0.0, 123456789.123456789, 1e300, -1e-300};
  write_matrix_csv(dir / "m.csv", values.data(), 3, 3);
  std::int64_t rows = 0, cols = 0;
  const auto back = read_matrix_csv(dir / "m.csv", rows, cols);
  REQUIRE(rows == 3);
  REQUIRE(cols == 3);
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(back[i] == values[i]);
}

TEST_CASE("simulate is byte-identical across reruns") {
  const fs::path dir = fresh_dir("sim_determinism");
  write_file(dir / "run.json", scenario_config((dir / "out1").string(), 1));
  write_file(dir / "run2.json", scenario_config((dir / "out2").string(), 8));
  REQUIRE(run_cli("simulate --config " + (dir / "run.json").string()) == 0);
  REQUIRE(run_cli("simulate --config " + (dir / "run2.json").string()) == 0);
  for (const char* name : {"subject_1.csv", "subject_3.csv", "truth_group_edges.csv",
                           "truth_group_precision.csv", "truth_subject_2_edges.csv"}) {
    CHECK(slurp(dir / "out1" / name) == slurp(dir / "out2" / name));
  }

  // Rerunning from the manifest reproduces the outputs too.
  const fs::path rerun = dir / "rerun.json";
  std::string manifest = slurp(dir / "out1" / "manifest.json");
  const std::string needle = (dir / "out1").string();
  manifest.replace(manifest.find(needle), needle.size(), (dir / "out3").string());
  write_file(rerun, manifest);
  REQUIRE(run_cli("simulate --config " + rerun.string()) == 0);
  CHECK(slurp(dir / "out1" / "subject_2.csv") == slurp(dir / "out3" / "subject_2.csv"));
}

TEST_CASE("fit outputs are identical for 1 and 8 threads") {
  const fs::path dir = fresh_dir("fit_threads");
  write_file(dir / "sim.json", scenario_config((dir / "data").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  for (int threads : {1, 8}) {
    std::ostringstream cfg;
    cfg << "{ \"lambda\": {\"lambda1\": 0.15, \"lambda2\": 1.0, \"lambda3\": 0.3},\n"
        << "  \"threads\": " << threads << ",\n"
        << "  \"output_dir\": \"" << (dir / ("fit" + std::to_string(threads))).string()
        << "\" }\n";
    write_file(dir / ("fit" + std::to_string(threads) + ".json"), cfg.str());
    REQUIRE(run_cli("fit --config " + (dir / ("fit" + std::to_string(threads) + ".json")).string() +
                    " --data " + (dir / "data").string()) == 0);
  }
  for (const char* name : {"omega0.csv", "omega_1.csv", "omega_3.csv", "edges_group.csv",
                           "fit_report.json"}) {
    CHECK(slurp(dir / "fit1" / name) == slurp(dir / "fit8" / name));
  }
}

TEST_CASE("lambda2 = 0 fit matches the standalone glasso subcommand") {
  const fs::path dir = fresh_dir("decouple");
  // Larger n keeps the glasso solutions well conditioned, so two
  // independently converged runs agree entrywise at the 1e-6 level.
  write_file(dir / "sim.json", scenario_config((dir / "data").string(), 1, 0.2, 100));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  std::ostringstream cfg;
  cfg << "{ \"lambda\": {\"lambda1\": 0.2, \"lambda2\": 0.0, \"lambda3\": 0.0},\n"
      << "  \"solver\": {\"bcd_tol\": 1e-9, \"glasso_tol\": 1e-9},\n"
      << "  \"output_dir\": \"" << (dir / "fit").string() << "\" }\n";
  write_file(dir / "fit.json", cfg.str());
  REQUIRE(run_cli("fit --config " + (dir / "fit.json").string() + " --data " +
                  (dir / "data").string()) == 0);

  // Sample covariance of subject 1, computed here: centered Y^T Y / n.
  std::int64_t n = 0, p = 0;
  const auto y = read_matrix_csv(dir / "data" / "subject_1.csv", n, p);
  std::vector<double> mean(static_cast<std::size_t>(p), 0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < p; ++j) mean[static_cast<std::size_t>(j)] += y[i * p + j];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  std::vector<double> s(static_cast<std::size_t>(p * p), 0.0);
  for (std::int64_t a = 0; a < p; ++a) {
    for (std::int64_t b = 0; b < p; ++b) {
      double acc = 0.0;
      for (std::int64_t i = 0; i < n; ++i) {
        acc += (y[i * p + a] - mean[static_cast<std::size_t>(a)]) *
               (y[i * p + b] - mean[static_cast<std::size_t>(b)]);
      }
      s[a * p + b] = acc / static_cast<double>(n);
    }
  }
  write_matrix_csv(dir / "s1.csv", s.data(), p, p);

  REQUIRE(run_cli("glasso --input " + (dir / "s1.csv").string() +
                  " --lambda 0.2 --tol 1e-9 --output " + (dir / "omega_gl.csv").string()) == 0);
  std::int64_t rows = 0, cols = 0;
  const auto from_glasso = read_matrix_csv(dir / "omega_gl.csv", rows, cols);
  const auto from_fit = read_matrix_csv(dir / "fit" / "omega_1.csv", rows, cols);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < from_fit.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(from_fit[i] - from_glasso[i]));
  }
  CHECK(max_diff <= 1e-6);
}

TEST_CASE("single-point tune equals fit") {
  const fs::path dir = fresh_dir("tune_single");
  write_file(dir / "sim.json", scenario_config((dir / "data").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  std::ostringstream fit_cfg;
  fit_cfg << "{ \"lambda\": {\"lambda1\": 0.2, \"lambda2\": 0.5, \"lambda3\": 0.1},\n"
          << "  \"output_dir\": \"" << (dir / "fit").string() << "\" }\n";
  write_file(dir / "fit.json", fit_cfg.str());
  REQUIRE(run_cli("fit --config " + (dir / "fit.json").string() + " --data " +
                  (dir / "data").string()) == 0);

  std::ostringstream tune_cfg;
  tune_cfg << "{ \"grid\": {\"lambda1\": [0.2], \"lambda2\": [0.5], \"lambda3\": [0.1]},\n"
           << "  \"output_dir\": \"" << (dir / "tune").string() << "\" }\n";
  write_file(dir / "tune.json", tune_cfg.str());
  REQUIRE(run_cli("tune --config " + (dir / "tune.json").string() + " --data " +
                  (dir / "data").string()) == 0);

  for (const char* name : {"omega0.csv", "omega_2.csv", "edges_group.csv"}) {
    CHECK(slurp(dir / "fit" / name) == slurp(dir / "tune" / name));
  }
  // Table has exactly the one feasible row and it is the best.
  const std::string table = slurp(dir / "tune" / "tune_table.csv");
  const std::string expected_prefix =
      format_double(0.2) + "," + format_double(0.5) + "," + format_double(0.1);
  CHECK(table.find(expected_prefix) != std::string::npos);
  CHECK(std::count(table.begin(), table.end(), '\n') == 2);  // header + one row
}

TEST_CASE("evaluating the truth against itself is perfect") {
  const fs::path dir = fresh_dir("eval_perfect");
  write_file(dir / "sim.json", scenario_config((dir / "truth").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  // Build a fit directory whose artifacts are the truth itself.
  const fs::path fitdir = dir / "asfit";
  fs::create_directories(fitdir);
  fs::copy_file(dir / "truth" / "truth_group_precision.csv", fitdir / "omega0.csv");
  fs::copy_file(dir / "truth" / "truth_group_edges.csv", fitdir / "edges_group.csv");
  for (int k = 1; k <= 3; ++k) {
    fs::copy_file(dir / "truth" / ("truth_subject_" + std::to_string(k) + "_precision.csv"),
                  fitdir / ("omega_" + std::to_string(k) + ".csv"));
    fs::copy_file(dir / "truth" / ("truth_subject_" + std::to_string(k) + "_edges.csv"),
                  fitdir / ("edges_subject_" + std::to_string(k) + ".csv"));
  }
  REQUIRE(run_cli("evaluate --fit " + fitdir.string() + " --truth " + (dir / "truth").string()) ==
          0);
  const std::string metrics = slurp(fitdir / "metrics.csv");
  std::istringstream lines(metrics);
  std::string header, fit_row;
  std::getline(lines, header);
  std::getline(lines, fit_row);
  CHECK(fit_row == "fit,nan,1,0,1,0,0,0");
}

TEST_CASE("evaluating empty networks gives zero rates") {
  const fs::path dir = fresh_dir("eval_empty");
  write_file(dir / "sim.json", scenario_config((dir / "truth").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  const fs::path fitdir = dir / "emptyfit";
  fs::create_directories(fitdir);
  std::vector<double> eye(144, 0.0);
  for (int i = 0; i < 12; ++i) eye[static_cast<std::size_t>(i * 12 + i)] = 1.0;
  write_matrix_csv(fitdir / "omega0.csv", eye.data(), 12, 12);
  write_edges_csv(fitdir / "edges_group.csv", nullptr, 0);
  for (int k = 1; k <= 3; ++k) {
    write_matrix_csv(fitdir / ("omega_" + std::to_string(k) + ".csv"), eye.data(), 12, 12);
    write_edges_csv(fitdir / ("edges_subject_" + std::to_string(k) + ".csv"), nullptr, 0);
  }
  REQUIRE(run_cli("evaluate --fit " + fitdir.string() + " --truth " + (dir / "truth").string()) ==
          0);
  const std::string metrics = slurp(fitdir / "metrics.csv");
  std::istringstream lines(metrics);
  std::string header, fit_row;
  std::getline(lines, header);
  std::getline(lines, fit_row);
  CHECK(fit_row.substr(0, 12) == "fit,nan,0,0,");
}

TEST_CASE("exit codes") {
  const fs::path dir = fresh_dir("exit_codes");

  // 2: invalid config.
  write_file(dir / "bad.json", "{ not json }");
  CHECK(run_cli("simulate --config " + (dir / "bad.json").string()) == 2);
  write_file(dir / "nolambda.json", "{ \"output_dir\": \"x\" }");
  CHECK(run_cli("fit --config " + (dir / "nolambda.json").string() + " --data " +
                dir.string()) == 2);
  write_file(dir / "badlambda.json",
             "{ \"lambda\": {\"lambda1\": 0.1, \"lambda2\": 0.0, \"lambda3\": 0.5} }");

  // 3: data errors.
  write_file(dir / "okfit.json", "{ \"lambda\": {\"lambda1\": 0.1} }");
  CHECK(run_cli("fit --config " + (dir / "okfit.json").string() + " --data " +
                (dir / "missing").string()) == 3);

  // 2: invalid lambda combination (config-level).
  write_file(dir / "sim.json", scenario_config((dir / "data").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);
  CHECK(run_cli("fit --config " + (dir / "badlambda.json").string() + " --data " +
                (dir / "data").string()) == 2);

  // 4: non-convergence under --strict.
  std::ostringstream strict_cfg;
  strict_cfg << "{ \"lambda\": {\"lambda1\": 0.05, \"lambda2\": 0.5, \"lambda3\": 0.1},\n"
             << "  \"solver\": {\"max_bcd_iter\": 1, \"bcd_tol\": 1e-12},\n"
             << "  \"output_dir\": \"" << (dir / "strictfit").string() << "\" }\n";
  write_file(dir / "strict.json", strict_cfg.str());
  CHECK(run_cli("fit --config " + (dir / "strict.json").string() + " --data " +
                (dir / "data").string() + " --strict") == 4);

  // 0 without --strict (warning only).
  CHECK(run_cli("fit --config " + (dir / "strict.json").string() + " --data " +
                (dir / "data").string()) == 0);

  // CLI parse errors are invalid configuration.
  CHECK(run_cli("fit") == 2);
  CHECK(run_cli("unknown-subcommand") == 2);
}

TEST_CASE("env var overrides config threads without changing results") {
  const fs::path dir = fresh_dir("env_threads");
  write_file(dir / "sim.json", scenario_config((dir / "data").string(), 1));
  REQUIRE(run_cli("simulate --config " + (dir / "sim.json").string()) == 0);

  std::ostringstream cfg;
  cfg << "{ \"lambda\": {\"lambda1\": 0.15, \"lambda2\": 1.0, \"lambda3\": 0.3},\n"
      << "  \"threads\": 1,\n"
      << "  \"output_dir\": \"" << (dir / "fit_env").string() << "\" }\n";
  write_file(dir / "fit.json", cfg.str());
  const std::string cmd = "BILEVEL_GGM_THREADS=8 " + cli_path() + " fit --config " +
                          (dir / "fit.json").string() + " --data " + (dir / "data").string() +
                          " >/dev/null 2>&1";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);

  std::ostringstream cfg1;
  cfg1 << "{ \"lambda\": {\"lambda1\": 0.15, \"lambda2\": 1.0, \"lambda3\": 0.3},\n"
       << "  \"threads\": 1,\n"
       << "  \"output_dir\": \"" << (dir / "fit_plain").string() << "\" }\n";
  write_file(dir / "fit1.json", cfg1.str());
  REQUIRE(run_cli("fit --config " + (dir / "fit1.json").string() + " --data " +
                  (dir / "data").string()) == 0);
  CHECK(slurp(dir / "fit_env" / "omega0.csv") == slurp(dir / "fit_plain" / "omega0.csv"));
}
