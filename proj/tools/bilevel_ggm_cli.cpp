// Command-line front end for the bilevel_ggm library. Subcommands:
//   simulate  generate a synthetic multi-subject dataset with known truth
//   fit       joint group/individual precision estimation at fixed lambda
//   tune      grid search with BIC selection, then refit artifacts
//   evaluate  edge-recovery and error metrics of a fit against a truth dir
//   glasso    single-matrix graphical lasso on a covariance CSV
//
// All numeric outputs are CSV at 17 significant digits; reruns from the
// same config are byte-identical regardless of the thread count.

#include <CLI11.hpp>
#include <bilevel_ggm.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "cli_io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(int code, const std::string& message) {
  throw CliError{code, message};
}

void check(bggm_status status, int exit_code, const std::string& context) {
  if (status != BGGM_OK) {
    fail(exit_code, context + ": " + bggm_status_name(status) + " (" +
                        bggm_last_error_message() + ")");
  }
}

// ---------------------------------------------------------------------
// Configuration

struct Config {
  json raw;

  std::optional<bggm_sim_options> scenario;
  std::vector<std::int64_t> explicit_edges;  // storage behind scenario.explicit_edges
  std::optional<std::array<double, 3>> lambda;
  std::optional<std::vector<double>> grid_l1, grid_l2, grid_l3;
  int criterion = BGGM_CRITERION_BIC2;
  bggm_rcm_options solver{};
  int threads = 0;
  fs::path output_dir = "out";
};

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) fail(2, std::string("config: ") + key + " must be a number");
  return j[key].get<double>();
}

std::vector<double> get_list(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_array() || j[key].empty()) {
    fail(2, std::string("config: ") + key + " must be a non-empty array");
  }
  std::vector<double> out;
  for (const auto& v : j[key]) {
    if (!v.is_number()) fail(2, std::string("config: ") + key + " entries must be numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Config parse_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(2, "cannot open config " + path.string());
  Config cfg;
  try {
    cfg.raw = json::parse(in);
  } catch (const std::exception& e) {
    fail(2, "config parse error: " + std::string(e.what()));
  }
  const json& raw = cfg.raw;

  if (raw.contains("scenario")) {
    const json& sc = raw["scenario"];
    bggm_sim_options opts;
    bggm_sim_options_init(&opts);
    opts.p = static_cast<std::int64_t>(get_num(sc, "p", 100));
    opts.num_subjects = static_cast<std::int64_t>(get_num(sc, "K", 8));
    opts.n = static_cast<std::int64_t>(get_num(sc, "n", 50));
    opts.rho_diff = get_num(sc, "rho_diff", 0.0);
    const std::string model = sc.value("graph_model", std::string("scale_free"));
    if (model == "scale_free") {
      opts.graph_model = BGGM_GRAPH_SCALE_FREE;
    } else if (model == "erdos_renyi") {
      opts.graph_model = BGGM_GRAPH_ERDOS_RENYI;
    } else if (model == "explicit") {
      opts.graph_model = BGGM_GRAPH_EXPLICIT;
    } else {
      fail(2, "config: unknown graph_model '" + model + "'");
    }
    opts.er_edge_prob = get_num(sc, "er_edge_prob", 0.02);
    if (sc.contains("explicit_edges")) {
      for (const auto& e : sc["explicit_edges"]) {
        if (!e.is_array() || e.size() != 2) fail(2, "config: explicit_edges must be pairs");
        cfg.explicit_edges.push_back(e[0].get<std::int64_t>());
        cfg.explicit_edges.push_back(e[1].get<std::int64_t>());
      }
    }
    if (sc.contains("value_range")) {
      const auto range = get_list(sc, "value_range");
      if (range.size() != 2) fail(2, "config: value_range must have two entries");
      opts.value_lo = range[0];
      opts.value_hi = range[1];
    }
    if (sc.contains("seed")) opts.seed = sc["seed"].get<std::uint64_t>();
    cfg.scenario = opts;
  }

  if (raw.contains("lambda")) {
    const json& l = raw["lambda"];
    cfg.lambda = {get_num(l, "lambda1", 0.0), get_num(l, "lambda2", 0.0),
                  get_num(l, "lambda3", 0.0)};
  }
  if (raw.contains("grid")) {
    const json& g = raw["grid"];
    cfg.grid_l1 = get_list(g, "lambda1");
    cfg.grid_l2 = get_list(g, "lambda2");
    cfg.grid_l3 = get_list(g, "lambda3");
  }

  const std::string crit = raw.value("criterion", std::string("BIC2"));
  if (crit == "BIC1") {
    cfg.criterion = BGGM_CRITERION_BIC1;
  } else if (crit == "BIC2") {
    cfg.criterion = BGGM_CRITERION_BIC2;
  } else {
    fail(2, "config: criterion must be BIC1 or BIC2");
  }

  bggm_rcm_options_init(&cfg.solver);
  if (raw.contains("solver")) {
    const json& s = raw["solver"];
    cfg.solver.max_bcd_iter = static_cast<std::int32_t>(get_num(s, "max_bcd_iter", 100));
    cfg.solver.bcd_tol = get_num(s, "bcd_tol", 1e-4);
    cfg.solver.rho_init = get_num(s, "rho_init", 0.1);
    const std::string mode = s.value("init_mode", std::string("blend"));
    if (mode == "blend") {
      cfg.solver.init_mode = BGGM_INIT_BLEND;
    } else if (mode == "inverse_blend") {
      cfg.solver.init_mode = BGGM_INIT_INVERSE_BLEND;
    } else {
      fail(2, "config: init_mode must be blend or inverse_blend");
    }
    cfg.solver.glasso_max_iter = static_cast<std::int32_t>(get_num(s, "glasso_max_iter", 100));
    cfg.solver.glasso_tol = get_num(s, "glasso_tol", 1e-4);
    cfg.solver.sparsecov_max_iter =
        static_cast<std::int32_t>(get_num(s, "sparsecov_max_iter", 200));
    cfg.solver.sparsecov_tol = get_num(s, "sparsecov_tol", 1e-4);
  }

  cfg.threads = static_cast<int>(get_num(raw, "threads", 0));
  if (cfg.threads < 0) fail(2, "config: threads must be nonnegative");
  if (raw.contains("output_dir")) cfg.output_dir = raw["output_dir"].get<std::string>();
  return cfg;
}

// Env var takes precedence over the config value.
int resolve_threads(const Config& cfg) {
  if (const char* env = std::getenv("BILEVEL_GGM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0) {
      fail(2, "BILEVEL_GGM_THREADS must be a nonnegative integer");
    }
    return static_cast<int>(v);
  }
  return cfg.threads;
}

// ---------------------------------------------------------------------
// Handle wrappers

using SimHandle = std::unique_ptr<bggm_sim_result, decltype(&bggm_sim_result_destroy)>;
using DataHandle = std::unique_ptr<bggm_dataset, decltype(&bggm_dataset_destroy)>;
using FitHandle = std::unique_ptr<bggm_rcm_fit, decltype(&bggm_rcm_fit_destroy)>;
using TuneHandle = std::unique_ptr<bggm_tune_result, decltype(&bggm_tune_result_destroy)>;

// Subject CSVs in a directory, ordered by their numeric index.
std::vector<fs::path> find_subject_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(3, "data directory not found: " + dir.string());
  const std::regex pattern("subject_([0-9]+)\\.csv");
  std::map<long, fs::path> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch match;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, match, pattern)) {
      found[std::stol(match[1].str())] = entry.path();
    }
  }
  if (found.empty()) fail(3, "no subject_<k>.csv files in " + dir.string());
  std::vector<fs::path> out;
  for (const auto& [idx, path] : found) out.push_back(path);
  return out;
}

DataHandle load_dataset(const fs::path& dir) {
  DataHandle data(nullptr, &bggm_dataset_destroy);
  bggm_dataset* raw = nullptr;
  check(bggm_dataset_create(&raw), 3, "dataset");
  data.reset(raw);
  for (const fs::path& path : find_subject_files(dir)) {
    std::int64_t rows = 0, cols = 0;
    const std::vector<double> values = read_matrix_csv(path, rows, cols);
    check(bggm_dataset_add_subject(data.get(), values.data(), rows, cols), 3, path.string());
  }
  return data;
}

// ---------------------------------------------------------------------
// Shared fit reporting

void write_fit_artifacts(const Config& cfg, const bggm_rcm_fit* fit, const bggm_dataset* data,
                         const fs::path& out_dir, bool strict) {
  const std::int64_t p = bggm_rcm_fit_dim(fit);
  const std::int64_t k_count = bggm_rcm_fit_num_subjects(fit);
  fs::create_directories(out_dir);

  std::vector<double> matrix(static_cast<std::size_t>(p * p));
  std::vector<std::int64_t> edges(static_cast<std::size_t>(p * (p - 1)));
  std::int64_t edge_count = 0;

  check(bggm_rcm_fit_group_precision(fit, matrix.data()), 3, "group precision");
  write_matrix_csv(out_dir / "omega0.csv", matrix.data(), p, p);
  check(bggm_edges_from_precision(matrix.data(), p, 0.0, edges.data(), &edge_count), 3,
        "group edges");
  write_edges_csv(out_dir / "edges_group.csv", edges.data(), edge_count);

  for (std::int64_t k = 0; k < k_count; ++k) {
    check(bggm_rcm_fit_individual_precision(fit, k, matrix.data()), 3, "individual precision");
    const std::string suffix = std::to_string(k + 1);
    write_matrix_csv(out_dir / ("omega_" + suffix + ".csv"), matrix.data(), p, p);
    check(bggm_edges_from_precision(matrix.data(), p, 0.0, edges.data(), &edge_count), 3,
          "individual edges");
    write_edges_csv(out_dir / ("edges_subject_" + suffix + ".csv"), edges.data(), edge_count);
  }

  double l1 = 0.0, l2 = 0.0, l3 = 0.0;
  check(bggm_rcm_fit_lambda(fit, &l1, &l2, &l3), 3, "lambda");
  double kkt_individual = 0.0, kkt_group = 0.0;
  check(bggm_rcm_fit_kkt(fit, data, &kkt_individual, &kkt_group), 3, "kkt");

  const std::int64_t trace_len = bggm_rcm_fit_trace_length(fit);
  std::vector<double> trace(static_cast<std::size_t>(trace_len));
  if (trace_len > 0) check(bggm_rcm_fit_objective_trace(fit, trace.data()), 3, "trace");

  double bic1 = 0.0;
  check(bggm_rcm_fit_bic1(fit, data, &bic1), 3, "bic1");
  json bic2_value;
  double bic2 = 0.0;
  const bggm_status bic2_status = bggm_rcm_fit_bic2(fit, data, &bic2);
  if (bic2_status == BGGM_OK) {
    bic2_value = bic2;
  } else if (bic2_status == BGGM_ERR_UNEQUAL_SAMPLE_SIZES) {
    bic2_value = nullptr;  // undefined for unequal sample sizes
  } else {
    check(bic2_status, 3, "bic2");
  }

  const bool converged = bggm_rcm_fit_converged(fit) != 0;
  json report;
  report["lambda"] = {{"lambda1", l1}, {"lambda2", l2}, {"lambda3", l3}};
  report["criterion"] = cfg.criterion == BGGM_CRITERION_BIC1 ? "BIC1" : "BIC2";
  report["iterations"] = bggm_rcm_fit_iterations(fit);
  report["converged"] = converged;
  report["group_estimated"] = bggm_rcm_fit_group_estimated(fit) != 0;
  report["objective_trace"] = trace;
  report["kkt_individual"] = kkt_individual;
  report["kkt_group"] = kkt_group;
  report["df"] = bggm_rcm_fit_degrees_of_freedom(fit);
  report["bic1"] = bic1;
  report["bic2"] = bic2_value;
  report["bic"] = cfg.criterion == BGGM_CRITERION_BIC1 || bic2_value.is_null()
                      ? bic1
                      : bic2_value.get<double>();

  std::ofstream out(out_dir / "fit_report.json");
  if (!out) fail(3, "cannot write fit_report.json");
  out << report.dump(2) << "\n";

  if (!converged) {
    if (strict) fail(4, "solver did not converge (strict mode)");
    std::cerr << "warning: solver did not converge within max_bcd_iter\n";
  }
}

// ---------------------------------------------------------------------
// Subcommands

int cmd_simulate(const Config& cfg) {
  if (!cfg.scenario) fail(2, "simulate requires a scenario section in the config");
  bggm_sim_options opts = *cfg.scenario;
  if (opts.graph_model == BGGM_GRAPH_EXPLICIT) {
    opts.explicit_edges = cfg.explicit_edges.data();
    opts.explicit_edge_count = static_cast<std::int64_t>(cfg.explicit_edges.size() / 2);
  }

  bggm_sim_result* raw = nullptr;
  check(bggm_simulate(&opts, &raw), 2, "simulate");
  SimHandle sim(raw, &bggm_sim_result_destroy);

  const std::int64_t p = bggm_sim_result_p(sim.get());
  const std::int64_t n = bggm_sim_result_n(sim.get());
  const std::int64_t k_count = bggm_sim_result_num_subjects(sim.get());
  fs::create_directories(cfg.output_dir);

  std::vector<double> obs(static_cast<std::size_t>(n * p));
  std::vector<double> prec(static_cast<std::size_t>(p * p));
  std::vector<std::int64_t> edges(static_cast<std::size_t>(p * (p - 1)));

  check(bggm_sim_result_group_precision(sim.get(), prec.data()), 3, "group precision");
  write_matrix_csv(cfg.output_dir / "truth_group_precision.csv", prec.data(), p, p);
  check(bggm_sim_result_group_edges(sim.get(), edges.data()), 3, "group edges");
  write_edges_csv(cfg.output_dir / "truth_group_edges.csv", edges.data(),
                  bggm_sim_result_group_edge_count(sim.get()));

  for (std::int64_t k = 0; k < k_count; ++k) {
    const std::string suffix = std::to_string(k + 1);
    check(bggm_sim_result_observations(sim.get(), k, obs.data()), 3, "observations");
    write_matrix_csv(cfg.output_dir / ("subject_" + suffix + ".csv"), obs.data(), n, p);
    check(bggm_sim_result_individual_precision(sim.get(), k, prec.data()), 3, "precision");
    write_matrix_csv(cfg.output_dir / ("truth_subject_" + suffix + "_precision.csv"),
                     prec.data(), p, p);
    check(bggm_sim_result_individual_edges(sim.get(), k, edges.data()), 3, "edges");
    write_edges_csv(cfg.output_dir / ("truth_subject_" + suffix + "_edges.csv"), edges.data(),
                    bggm_sim_result_individual_edge_count(sim.get(), k));
  }

  // Manifest: the fully resolved configuration; feeding it back as --config
  // reproduces every output byte for byte.
  json manifest;
  manifest["command"] = "simulate";
  json sc;
  sc["p"] = opts.p;
  sc["K"] = opts.num_subjects;
  sc["n"] = opts.n;
  sc["rho_diff"] = opts.rho_diff;
  sc["graph_model"] = opts.graph_model == BGGM_GRAPH_SCALE_FREE     ? "scale_free"
                      : opts.graph_model == BGGM_GRAPH_ERDOS_RENYI ? "erdos_renyi"
                                                                    : "explicit";
  sc["er_edge_prob"] = opts.er_edge_prob;
  if (opts.graph_model == BGGM_GRAPH_EXPLICIT) {
    json list = json::array();
    for (std::size_t i = 0; i + 1 < cfg.explicit_edges.size(); i += 2) {
      list.push_back({cfg.explicit_edges[i], cfg.explicit_edges[i + 1]});
    }
    sc["explicit_edges"] = list;
  }
  sc["value_range"] = {opts.value_lo, opts.value_hi};
  sc["seed"] = opts.seed;
  manifest["scenario"] = sc;
  manifest["threads"] = cfg.threads;
  manifest["output_dir"] = cfg.output_dir.string();

  std::ofstream out(cfg.output_dir / "manifest.json");
  if (!out) fail(3, "cannot write manifest.json");
  out << manifest.dump(2) << "\n";
  std::cout << "simulate: wrote " << k_count << " subjects (n=" << n << ", p=" << p << ") to "
            << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_fit(Config& cfg, const fs::path& data_dir, bool strict) {
  if (!cfg.lambda || cfg.grid_l1) {
    fail(2, "fit requires a lambda section (and no grid) in the config");
  }
  DataHandle data = load_dataset(data_dir);
  cfg.solver.threads = resolve_threads(cfg);

  bggm_rcm_fit* raw = nullptr;
  const auto& l = *cfg.lambda;
  check(bggm_rcm_fit_create(data.get(), l[0], l[1], l[2], &cfg.solver, &raw), 2, "fit");
  FitHandle fit(raw, &bggm_rcm_fit_destroy);

  write_fit_artifacts(cfg, fit.get(), data.get(), cfg.output_dir, strict);
  std::cout << "fit: wrote artifacts to " << cfg.output_dir.string() << "\n";
  return 0;
}

int cmd_tune(Config& cfg, const fs::path& data_dir, bool strict) {
  if (cfg.lambda && cfg.grid_l1) fail(2, "tune: config has both lambda and grid");
  if (cfg.lambda) fail(2, "tune requires a grid section, not a fixed lambda");
  DataHandle data = load_dataset(data_dir);
  cfg.solver.threads = resolve_threads(cfg);

  std::vector<double> l1, l2, l3;
  if (cfg.grid_l1) {
    l1 = *cfg.grid_l1;
    l2 = *cfg.grid_l2;
    l3 = *cfg.grid_l3;
  } else {
    // No grid given: resolve the default grid for this problem size.
    l1.resize(BGGM_DEFAULT_GRID_LAMBDA1_COUNT);
    l2.resize(BGGM_DEFAULT_GRID_LAMBDA2_COUNT);
    l3.resize(BGGM_DEFAULT_GRID_LAMBDA3_COUNT);
    std::int64_t rows = 0, cols = 0;
    read_matrix_csv(find_subject_files(data_dir).front(), rows, cols);
    check(bggm_default_grid(cols, rows, l1.data(), l2.data(), l3.data()), 2, "default grid");
  }

  bggm_tune_result* raw = nullptr;
  check(bggm_tune(data.get(), l1.data(), static_cast<std::int64_t>(l1.size()), l2.data(),
                  static_cast<std::int64_t>(l2.size()), l3.data(),
                  static_cast<std::int64_t>(l3.size()), cfg.criterion, &cfg.solver, &raw),
        2, "tune");
  TuneHandle tuned(raw, &bggm_tune_result_destroy);

  fs::create_directories(cfg.output_dir);
  {
    std::ofstream out(cfg.output_dir / "tune_table.csv");
    if (!out) fail(3, "cannot write tune_table.csv");
    out << "lambda1,lambda2,lambda3,bic,df,converged\n";
    for (std::int64_t r = 0; r < bggm_tune_result_rows(tuned.get()); ++r) {
      double v1 = 0, v2 = 0, v3 = 0, bic = 0, df = 0;
      std::int32_t converged = 0;
      check(bggm_tune_result_row(tuned.get(), r, &v1, &v2, &v3, &bic, &df, &converged), 3,
            "tune table");
      out << format_double(v1) << ',' << format_double(v2) << ',' << format_double(v3) << ','
          << format_double(bic) << ',' << format_double(df) << ',' << (converged ? 1 : 0)
          << "\n";
    }
  }

  write_fit_artifacts(cfg, bggm_tune_result_best(tuned.get()), data.get(), cfg.output_dir,
                      strict);
  std::cout << "tune: " << bggm_tune_result_rows(tuned.get()) << " grid points ("
            << bggm_tune_result_infeasible_count(tuned.get()) << " infeasible), best written to "
            << cfg.output_dir.string() << "\n";
  return 0;
}

struct SubjectMetrics {
  double tpr_sum = 0.0, fpr_sum = 0.0, frob_sum = 0.0, l1_sum = 0.0;
};

int cmd_evaluate(const fs::path& fit_dir, const fs::path& truth_dir, bool offdiag_only,
                 const std::optional<fs::path>& output) {
  if (!fs::is_directory(fit_dir)) fail(3, "fit directory not found: " + fit_dir.string());
  if (!fs::is_directory(truth_dir)) fail(3, "truth directory not found: " + truth_dir.string());

  // Subject count from the fit artifacts.
  std::int64_t k_count = 0;
  while (fs::exists(fit_dir / ("edges_subject_" + std::to_string(k_count + 1) + ".csv"))) {
    ++k_count;
  }
  if (k_count == 0) fail(3, "no edges_subject_<k>.csv files in " + fit_dir.string());

  std::int64_t p = 0, cols = 0;
  std::vector<double> omega0 = read_matrix_csv(fit_dir / "omega0.csv", p, cols);
  if (p != cols) fail(3, "omega0.csv is not square");

  const auto require_truth = [&](const fs::path& path) {
    if (!fs::exists(path)) fail(3, "missing truth file: " + path.string());
    return path;
  };

  SubjectMetrics acc;
  std::vector<std::int64_t> all_est_edges;
  std::vector<std::int64_t> est_counts;
  for (std::int64_t k = 1; k <= k_count; ++k) {
    const std::string suffix = std::to_string(k);
    const auto est = read_edges_csv(fit_dir / ("edges_subject_" + suffix + ".csv"));
    const auto truth = read_edges_csv(
        require_truth(truth_dir / ("truth_subject_" + suffix + "_edges.csv")));
    double tpr = 0.0, fpr = 0.0;
    check(bggm_edge_confusion(p, est.data(), static_cast<std::int64_t>(est.size() / 2),
                              truth.data(), static_cast<std::int64_t>(truth.size() / 2), &tpr,
                              &fpr, nullptr, nullptr, nullptr, nullptr),
          3, "edge confusion");
    acc.tpr_sum += tpr;
    acc.fpr_sum += fpr;

    std::int64_t rows = 0;
    const auto est_prec = read_matrix_csv(fit_dir / ("omega_" + suffix + ".csv"), rows, cols);
    if (rows != p || cols != p) fail(3, "omega_" + suffix + ".csv dimension mismatch");
    const auto true_prec = read_matrix_csv(
        require_truth(truth_dir / ("truth_subject_" + suffix + "_precision.csv")), rows, cols);
    if (rows != p || cols != p) fail(3, "truth precision dimension mismatch");
    double frob = 0.0, l1 = 0.0;
    check(bggm_estimation_error(est_prec.data(), true_prec.data(), p, offdiag_only ? 1 : 0,
                                &frob, &l1),
          3, "estimation error");
    acc.frob_sum += frob;
    acc.l1_sum += l1;

    all_est_edges.insert(all_est_edges.end(), est.begin(), est.end());
    est_counts.push_back(static_cast<std::int64_t>(est.size() / 2));
  }

  const auto group_truth = read_edges_csv(require_truth(truth_dir / "truth_group_edges.csv"));
  const auto group_est = read_edges_csv(fit_dir / "edges_group.csv");
  double gtpr = 0.0, gfpr = 0.0;
  check(bggm_edge_confusion(p, group_est.data(), static_cast<std::int64_t>(group_est.size() / 2),
                            group_truth.data(),
                            static_cast<std::int64_t>(group_truth.size() / 2), &gtpr, &gfpr,
                            nullptr, nullptr, nullptr, nullptr),
        3, "group confusion");

  // Majority-vote baseline over the fitted individual networks.
  std::vector<std::int64_t> vote(static_cast<std::size_t>(p * (p - 1)));
  std::int64_t vote_count = 0;
  check(bggm_majority_vote(p, k_count, all_est_edges.data(), est_counts.data(), vote.data(),
                           &vote_count),
        3, "majority vote");
  double vote_tpr = 0.0, vote_fpr = 0.0;
  check(bggm_edge_confusion(p, vote.data(), vote_count, group_truth.data(),
                            static_cast<std::int64_t>(group_truth.size() / 2), &vote_tpr,
                            &vote_fpr, nullptr, nullptr, nullptr, nullptr),
        3, "vote confusion");

  // BIC of the fit, if a report is present.
  std::string bic_str = "nan";
  {
    std::ifstream in(fit_dir / "fit_report.json");
    if (in) {
      try {
        const json report = json::parse(in);
        if (report.contains("bic")) bic_str = format_double(report["bic"].get<double>());
      } catch (const std::exception&) {
        fail(3, "fit_report.json is malformed");
      }
    }
  }

  const double kd = static_cast<double>(k_count);
  const fs::path out_path = output.value_or(fit_dir / "metrics.csv");
  std::ofstream out(out_path);
  if (!out) fail(3, "cannot write " + out_path.string());
  out << "method,BIC,ITPR,IFPR,GTPR,GFPR,Frobenius,L1norm\n";
  out << "fit," << bic_str << ',' << format_double(acc.tpr_sum / kd) << ','
      << format_double(acc.fpr_sum / kd) << ',' << format_double(gtpr) << ','
      << format_double(gfpr) << ',' << format_double(acc.frob_sum / kd) << ','
      << format_double(acc.l1_sum / kd) << "\n";
  out << "majority_vote," << bic_str << ',' << format_double(acc.tpr_sum / kd) << ','
      << format_double(acc.fpr_sum / kd) << ',' << format_double(vote_tpr) << ','
      << format_double(vote_fpr) << ',' << format_double(acc.frob_sum / kd) << ','
      << format_double(acc.l1_sum / kd) << "\n";
  std::cout << "evaluate: wrote " << out_path.string() << "\n";
  return 0;
}

int cmd_glasso(const fs::path& input, double lambda, const fs::path& output, double tol,
               int max_iter, bool strict) {
  std::int64_t rows = 0, cols = 0;
  const std::vector<double> s = read_matrix_csv(input, rows, cols);
  if (rows != cols) fail(3, input.string() + " is not square");

  std::vector<double> omega(static_cast<std::size_t>(rows * cols));
  std::int32_t iterations = 0, converged = 0;
  double objective = 0.0;
  check(bggm_glasso_fit(s.data(), rows, lambda, max_iter, tol, nullptr, omega.data(),
                        &iterations, &converged, &objective),
        3, "glasso");
  write_matrix_csv(output, omega.data(), rows, cols);
  std::cout << "glasso: lambda=" << lambda << " iterations=" << iterations
            << " converged=" << (converged ? "yes" : "no") << " objective=" << objective
            << " -> " << output.string() << "\n";
  if (!converged) {
    if (strict) fail(4, "glasso did not converge (strict mode)");
    std::cerr << "warning: glasso did not converge within max_iter\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bi-level Gaussian graphical modeling: joint group and individual sparse "
               "precision estimation"};
  app.require_subcommand(1);

  std::string config_path, data_dir, fit_dir, truth_dir, input_path;
  std::string glasso_output = "omega.csv";
  std::string eval_output;
  double lambda = 0.0, tol = 1e-4;
  int max_iter = 100;
  bool strict = false, offdiag_only = false;

  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic dataset with truth");
  sim->add_option("--config", config_path, "Run configuration JSON")->required();

  CLI::App* fit = app.add_subcommand("fit", "Fit at a fixed lambda triple");
  fit->add_option("--config", config_path, "Run configuration JSON")->required();
  fit->add_option("--data", data_dir, "Directory with subject_<k>.csv files")->required();
  fit->add_flag("--strict", strict, "Exit with code 4 on non-convergence");

  CLI::App* tune = app.add_subcommand("tune", "Grid search with BIC selection");
  tune->add_option("--config", config_path, "Run configuration JSON")->required();
  tune->add_option("--data", data_dir, "Directory with subject_<k>.csv files")->required();
  tune->add_flag("--strict", strict, "Exit with code 4 on non-convergence");

  CLI::App* eval = app.add_subcommand("evaluate", "Score a fit against simulation truth");
  eval->add_option("--fit", fit_dir, "Directory with fit artifacts")->required();
  eval->add_option("--truth", truth_dir, "Directory with truth files")->required();
  eval->add_option("--output", eval_output, "Metrics CSV path (default: <fit>/metrics.csv)");
  eval->add_flag("--offdiag-only-norms", offdiag_only,
                 "Exclude the diagonal from the error norms");

  CLI::App* gl = app.add_subcommand("glasso", "Graphical lasso on a covariance CSV");
  gl->add_option("--input", input_path, "Covariance matrix CSV")->required();
  gl->add_option("--lambda", lambda, "L1 penalty")->required();
  gl->add_option("--output", glasso_output, "Output precision CSV");
  gl->add_option("--tol", tol, "Convergence tolerance");
  gl->add_option("--max-iter", max_iter, "Maximum sweeps");
  gl->add_flag("--strict", strict, "Exit with code 4 on non-convergence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (sim->parsed()) {
      Config cfg = parse_config(config_path);
      return cmd_simulate(cfg);
    }
    if (fit->parsed()) {
      Config cfg = parse_config(config_path);
      return cmd_fit(cfg, data_dir, strict);
    }
    if (tune->parsed()) {
      Config cfg = parse_config(config_path);
      return cmd_tune(cfg, data_dir, strict);
    }
    if (eval->parsed()) {
      return cmd_evaluate(fit_dir, truth_dir, offdiag_only,
                          eval_output.empty()
                              ? std::nullopt
                              : std::optional<fs::path>(fs::path(eval_output)));
    }
    if (gl->parsed()) {
      return cmd_glasso(input_path, lambda, glasso_output, tol, max_iter, strict);
    }
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
