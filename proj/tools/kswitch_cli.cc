// Command-line front end: dataset generation and ingestion, single runs,
// parameter sweeps, reach calibration and transcript audits.
//
// Exit codes: 0 success, 2 usage error, 3 data error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kswitch/harness.h"
#include "kswitch/k_switch.h"

namespace {

using namespace kswitch;

constexpr int kUsageError = 2;
constexpr int kDataError = 3;

struct CommonFlags {
  std::string method = "KS";
  int workers = 100;
  int tasks = 100;
  double epsilon = 0.4;
  double r = 1000.0;
  double reach = kDefaultReach;
  int k = 2;
  int lambda = 20;
  int trials = 1;
  uint64_t seed = 0;
  std::string out;
  std::string dataset;
  unsigned key_bits = 512;
  unsigned threads = 1;
  std::string external;
};

void add_experiment_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--workers", f.workers, "Number of workers")->check(CLI::NonNegativeNumber);
  cmd->add_option("--tasks", f.tasks, "Number of tasks")->check(CLI::NonNegativeNumber);
  cmd->add_option("--epsilon", f.epsilon, "Privacy level (per radius r)")->check(CLI::PositiveNumber);
  cmd->add_option("--r", f.r, "Protection radius in meters")->check(CLI::PositiveNumber);
  cmd->add_option("--reach", f.reach, "Worker reach in meters")->check(CLI::PositiveNumber);
  cmd->add_option("--k", f.k, "Group size")->check(CLI::Range(2, 64));
  cmd->add_option("--lambda", f.lambda, "Maximum k-Switch rounds")->check(CLI::Range(1, 1000));
  cmd->add_option("--trials", f.trials, "Trials per configuration")->check(CLI::Range(1, 1000000));
  cmd->add_option("--seed", f.seed, "Base seed");
  cmd->add_option("--dataset", f.dataset, "Instance CSV instead of synthetic data");
  cmd->add_option("--key-bits", f.key_bits, "Paillier modulus length")->check(CLI::Range(64, 8192));
  cmd->add_option("--threads", f.threads, "Parallel trials (0 = all cores)");
  cmd->add_option("--external", f.external, "CSV of method,utility rows to echo in the summary");
  cmd->add_option("--out", f.out, "Output prefix: writes <out>.csv and <out>.json");
}

ExperimentConfig to_config(const CommonFlags& f) {
  ExperimentConfig cfg;
  cfg.method = method_from_string(f.method);
  cfg.n_workers = f.workers;
  cfg.n_tasks = f.tasks;
  cfg.epsilon = f.epsilon;
  cfg.r = f.r;
  cfg.reach = f.reach;
  cfg.k = f.k;
  cfg.lambda = f.lambda;
  cfg.trials = f.trials;
  cfg.seed = f.seed;
  cfg.dataset = f.dataset;
  cfg.key_bits = f.key_bits;
  cfg.threads = f.threads;
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void emit(const CommonFlags& f, const std::vector<RunResult>& results) {
  std::vector<ExternalResult> external;
  if (!f.external.empty()) {
    std::ifstream in(f.external);
    if (!in) throw ParseError("cannot open '" + f.external + "'");
    external = read_external_results(in);
  }
  if (f.out.empty()) {
    write_results_csv(std::cout, results);
    std::cerr << summary_json(results, external) << '\n';
    return;
  }
  std::ofstream csv(f.out + ".csv");
  std::ofstream json(f.out + ".json");
  if (!csv || !json) throw ParseError("cannot write to '" + f.out + "'");
  write_results_csv(csv, results);
  json << summary_json(results, external) << '\n';
  std::cerr << "wrote " << f.out << ".csv and " << f.out << ".json\n";
}

int run_sweep(CommonFlags f, const std::string& param, const std::string& values,
              const std::string& methods) {
  std::vector<RunResult> all;
  for (const std::string& m : split_list(methods)) {
    for (const std::string& v : split_list(values)) {
      CommonFlags point = f;
      point.method = m;
      if (param == "epsilon") {
        point.epsilon = std::stod(v);
      } else if (param == "workers") {
        point.workers = point.tasks = std::stoi(v);
      } else if (param == "k") {
        point.k = std::stoi(v);
      } else if (param == "lambda") {
        point.lambda = std::stoi(v);
      } else if (param == "reach") {
        point.reach = std::stod(v);
      } else {
        throw ArgumentError("cannot sweep '" + param + "'");
      }
      auto rows = run_experiment(to_config(point));
      all.insert(all.end(), rows.begin(), rows.end());
    }
  }
  emit(f, all);
  return 0;
}

int run_audit(const CommonFlags& f, const std::string& transcript_path) {
  ExperimentConfig cfg = to_config(f);
  ProblemInstance inst = trial_instance(cfg, 0);
  Transcript transcript;
  if (!transcript_path.empty()) {
    std::ifstream in(transcript_path);
    if (!in) throw ParseError("cannot open '" + transcript_path + "'");
    transcript = Transcript::read_csv(in);
  } else {
    KSwitchConfig ks{cfg.k, cfg.lambda, GroupingMethod::kGreedy, cfg.seed, cfg.key_bits};
    ks.record_transcripts = true;
    KSwitchResult r = k_switch(inst, ks);
    transcript = std::move(r.transcript);
    if (!f.out.empty()) {
      std::ofstream out(f.out + ".transcript.csv");
      transcript.write_csv(out);
      std::cerr << "wrote " << f.out << ".transcript.csv\n";
    }
  }
  const bool ok = audit_transcript(transcript, inst);
  std::cout << (ok ? "PASS" : "FAIL") << ": " << transcript.entries().size()
            << " messages audited\n";
  return ok ? 0 : kDataError;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving batch task assignment experiments"};
  app.require_subcommand(1);
  CommonFlags flags;

  auto* gen = app.add_subcommand("gen", "Generate a synthetic instance as role,x,y CSV");
  add_experiment_flags(gen, flags);

  std::string ingest_path;
  auto* ingest = app.add_subcommand("ingest", "Convert a role,lat,lon CSV to role,x,y meters");
  ingest->add_option("path", ingest_path, "Input CSV")->required();
  add_experiment_flags(ingest, flags);

  auto* run = app.add_subcommand("run", "Run one method over a number of trials");
  run->add_option("--method", flags.method, "OM, ORR, KS or OPT");
  add_experiment_flags(run, flags);

  std::string sweep_param = "epsilon", sweep_values = "0.4,1.25,2.5", sweep_methods = "OM,KS";
  auto* sweep = app.add_subcommand("sweep", "Run methods over a grid of one parameter");
  sweep->add_option("--param", sweep_param, "epsilon, workers, k, lambda or reach");
  sweep->add_option("--values", sweep_values, "Comma-separated values");
  sweep->add_option("--methods", sweep_methods, "Comma-separated methods");
  add_experiment_flags(sweep, flags);

  double target = 0.9;
  auto* calibrate = app.add_subcommand("calibrate-reach", "Find the reach giving a target OPT fraction");
  calibrate->add_option("--target", target, "Target OPT / min(workers, tasks)");
  add_experiment_flags(calibrate, flags);

  std::string transcript_path;
  auto* audit = app.add_subcommand("audit", "Audit k-HE transcripts for plaintext leaks");
  audit->add_option("--transcript", transcript_path, "Transcript CSV (default: run k-Switch)");
  add_experiment_flags(audit, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      Rng rng = derive_rng(flags.seed, {0, 0});
      ProblemInstance inst = gen_synthetic(flags.workers, flags.tasks, flags.reach, rng);
      if (flags.out.empty()) {
        write_instance_csv(std::cout, inst);
      } else {
        std::ofstream out(flags.out);
        write_instance_csv(out, inst);
      }
    } else if (*ingest) {
      ProblemInstance inst = ingest_file(ingest_path, flags.reach);
      if (flags.out.empty()) {
        write_instance_csv(std::cout, inst);
      } else {
        std::ofstream out(flags.out);
        write_instance_csv(out, inst);
      }
    } else if (*run) {
      emit(flags, run_experiment(to_config(flags)));
    } else if (*sweep) {
      return run_sweep(flags, sweep_param, sweep_values, sweep_methods);
    } else if (*calibrate) {
      CalibrationResult c =
          calibrate_reach(flags.workers, flags.tasks, target, flags.trials, flags.seed);
      std::cout << "reach=" << c.reach << " opt_fraction=" << c.opt_fraction << '\n';
    } else if (*audit) {
      return run_audit(flags, transcript_path);
    }
  } catch (const ArgumentError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  }
  return 0;
}
