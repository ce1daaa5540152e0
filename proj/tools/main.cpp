// transfusion: command-line front end (gen, fit, bench, csigma, validate).

#include "validate_suite.hpp"

#include "transfusion/dtransfusion.hpp"
#include "transfusion/harness.hpp"
#include "transfusion/keyvalue.hpp"
#include "transfusion/synthgen.hpp"
#include "transfusion/transfusion.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

using namespace tfusion;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string profile = "desk";
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config, "key=value configuration file")->check(CLI::ExistingFile);
  auto* out = cmd->add_option("--out", c.out, "output path");
  if (needs_out) out->required();
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--threads", c.threads, "worker threads (TF_THREADS overrides)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--profile", c.profile, "default scale")->check(CLI::IsMember({"desk", "paper"}));
}

void apply_threads(const Common& c) {
  int n = c.threads;
  if (const char* env = std::getenv("TF_THREADS"); env && *env) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw CLI::ValidationError("TF_THREADS", "must be an integer");
    }
  }
  if (n > 0) omp_set_num_threads(n);
}

ScenarioConfig scenario_from(const Common& c) {
  ScenarioConfig sc = c.profile == "paper" ? ScenarioConfig::paper() : ScenarioConfig::desk();
  if (!c.config.empty()) sc.apply(load_key_values(c.config));
  if (c.seed) sc.seed = *c.seed;
  sc.validate();
  return sc;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

int cmd_gen(const Common& c) {
  const ScenarioConfig sc = scenario_from(c);
  const auto [problem, truth] = gen_scenario(sc);
  export_csv(problem, c.out);
  const std::filesystem::path dir(c.out);
  {
    std::ofstream cfg((dir / "scenario.cfg").string());
    write_key_values(cfg, sc.to_key_values());
  }
  std::ofstream truth_out((dir / "truth.csv").string());
  truth_out << "j,beta0";
  for (std::size_t k = 0; k < truth.deltas.size(); ++k) truth_out << ",delta" << (k + 1);
  truth_out << '\n';
  for (Index j = 0; j < sc.p; ++j) {
    truth_out << (j + 1) << ',' << g17(truth.beta0(j));
    for (const auto& d : truth.deltas) truth_out << ',' << g17(d(j));
    truth_out << '\n';
  }
  std::cout << "wrote " << (1 + sc.k) << " task files to " << c.out << " (epsilon_D = " << g17(truth.epsilon_d)
            << ")\n";
  return 0;
}

int cmd_fit(const Common& c, const std::string& method_name, int folds) {
  const ScenarioConfig sc = scenario_from(c);
  const auto [problem, truth] = gen_scenario(sc);
  BenchPlan plan;
  plan.base = sc;
  plan.folds = folds;
  std::ostringstream report;
  report << "scenario: " << to_string(sc.shift_kind) << '/' << to_string(sc.design_kind) << " p=" << sc.p
         << " K=" << sc.k << " n_S=" << sc.n_s << " n_T=" << sc.n_t << " seed=" << sc.seed << '\n';

  std::optional<FitResult> fit;
  const std::uint64_t fold_seed = derive_seed(sc.seed, {0xF01D});
  TuningGrid grid;
  grid.folds = folds;
  const ValidationPlan vplan{folds, fold_seed};
  if (method_name == "auto") {
    fit = fit_auto(problem, grid, plan.solver, vplan);
  } else {
    const Method m = method_from_string(method_name);
    switch (m) {
      case Method::lasso: fit = lasso_baseline(problem.target(), grid, plan.solver, fold_seed); break;
      case Method::pooled: fit = pooled_baseline(problem, grid, plan.solver, fold_seed); break;
      case Method::tf1: fit = fit_one_step(problem, grid, plan.solver, vplan); break;
      case Method::tf2: {
        const AutoFitReport r = fit_auto_report(problem, grid, plan.solver, vplan);
        fit = r.candidates.empty() ? r.selected
                                   : r.candidates[1 + select_by_validation({r.candidates[1], r.candidates[2]})];
        break;
      }
      case Method::dtf1:
      case Method::dtf2: {
        std::vector<SourceMessage> msgs;
        for (const auto& s : problem.sources()) msgs.push_back(source_precompute(s, plan.solver));
        const DFitReport r = dtransfusion_fit_report(problem.target(), msgs, grid, plan.solver, vplan);
        if (r.candidates.empty()) fit = r.selected;
        else if (m == Method::dtf1) fit = r.candidates[0];
        else fit = r.candidates[1 + select_by_validation({r.candidates[1], r.candidates[2]})];
        const CommunicationReport comm = communication_report(msgs);
        report << "communication: rounds=" << comm.rounds << " bytes=" << comm.total_bytes
               << " raw_bytes=" << comm.raw_data_bytes << '\n';
        break;
      }
    }
  }
  report << "method: " << method_name << '\n'
         << "strategy: " << to_string(fit->strategy) << '\n'
         << "lambda0: " << g17(fit->lambda0) << '\n'
         << "tilde_lambda: " << (fit->tilde_lambda ? g17(*fit->tilde_lambda) : std::string("none")) << '\n'
         << "fusion_constant: " << (fit->fusion_constant ? g17(*fit->fusion_constant) : std::string("none")) << '\n'
         << "validation_error: " << g17(fit->validation_error) << '\n'
         << "kkt_residual: " << g17(fit->kkt_residual) << '\n'
         << "iterations: " << fit->iterations << '\n'
         << "converged: " << (fit->converged ? "true" : "false") << '\n'
         << "nonzeros: " << (fit->beta_target.array() != 0.0).count() << '\n'
         << "l2_error: " << g17(estimation_error(fit->beta_target, truth.beta0)) << '\n';
  std::cout << report.str();
  if (!c.out.empty()) {
    std::ofstream out(c.out);
    out << report.str();
  }
  return 0;
}

int cmd_bench(const Common& c, bool timing, const std::string& summary_path) {
  BenchPlan plan;
  plan.base = c.profile == "paper" ? ScenarioConfig::paper() : ScenarioConfig::desk();
  if (c.profile == "paper") {
    plan.trials = 100;
    plan.folds = 10;
    plan.values = {1, 3, 5, 7, 9};
  }
  if (!c.config.empty()) plan.apply(load_key_values(c.config));
  if (c.seed) plan.base.seed = *c.seed;
  if (timing) plan.record_timing = true;
  const auto records = run_bench(plan);
  {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + c.out);
    write_records(out, records);
  }
  const auto rows = summarize(records);
  if (!summary_path.empty()) {
    std::ofstream out(summary_path, std::ios::binary);
    write_summary(out, rows);
  }
  write_summary(std::cout, rows);
  return 0;
}

int cmd_csigma(const Common& c, const std::vector<int>& dims, double cval) {
  std::ofstream out(c.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + c.out);
  out << "p,c,c_sigma,c_sigma_identical\n";
  for (int p : dims) {
    const Matrix sigma = arrowhead_sigma(p, cval);
    const Matrix id = Matrix::Identity(p, p);
    const double cs = c_sigma({sigma}, id);
    const double same = c_sigma({id}, id);
    out << p << ',' << g17(cval) << ',' << g17(cs) << ',' << g17(same) << '\n';
    std::cout << "p=" << p << " C_Sigma=" << g17(cs) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transfer learning under covariate and model shift: data generation, fitting and benchmarks"};
  app.require_subcommand(1);

  Common gen_opts, fit_opts, bench_opts, cs_opts, val_opts;
  auto* gen = app.add_subcommand("gen", "write a synthetic scenario as CSV files (one per task)");
  add_common(gen, gen_opts, true);

  auto* fit = app.add_subcommand("fit", "fit one method on one scenario and print a summary");
  add_common(fit, fit_opts, false);
  std::string method = "auto";
  int folds = 5;
  fit->add_option("--method", method, "lasso|pooled|tf1|tf2|dtf1|dtf2|auto")
      ->check(CLI::IsMember({"lasso", "pooled", "tf1", "tf2", "dtf1", "dtf2", "auto"}));
  fit->add_option("--folds", folds, "target CV folds")->check(CLI::Range(2, 1000));

  auto* bench = app.add_subcommand("bench", "run a Monte-Carlo plan and write per-trial records");
  add_common(bench, bench_opts, true);
  bool timing = false;
  std::string summary;
  bench->add_flag("--timing", timing, "record wall-clock runtimes (output no longer reproducible)");
  bench->add_option("--summary", summary, "also write the per-point summary CSV");

  auto* csigma = app.add_subcommand("csigma", "C_Sigma on the arrowhead covariance family");
  add_common(csigma, cs_opts, true);
  std::vector<int> dims = {25, 100, 400};
  double cval = 0.5;
  csigma->add_option("--dims", dims, "dimensions p")->delimiter(',');
  csigma->add_option("--c", cval, "arrowhead parameter in (0, 1)")->check(CLI::Range(0.0, 1.0));

  auto* validate = app.add_subcommand("validate", "run the quick invariant suite");
  add_common(validate, val_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      apply_threads(gen_opts);
      return cmd_gen(gen_opts);
    }
    if (*fit) {
      apply_threads(fit_opts);
      return cmd_fit(fit_opts, method, folds);
    }
    if (*bench) {
      apply_threads(bench_opts);
      return cmd_bench(bench_opts, timing, summary);
    }
    if (*csigma) {
      apply_threads(cs_opts);
      return cmd_csigma(cs_opts, dims, cval);
    }
    if (*validate) {
      apply_threads(val_opts);
      const int failures = run_validate_suite(std::cout, val_opts.seed.value_or(20240601));
      return failures == 0 ? 0 : 2;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const CLI::Error& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
