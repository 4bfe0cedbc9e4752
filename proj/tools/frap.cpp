#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "frap/commands.hpp"
#include "frap/errors.hpp"

namespace {

// Flags mirror Config; only flags actually given override the config file.
struct ConfigFlags {
  std::optional<std::string> config_file;
  std::optional<unsigned> iterations;
  std::optional<std::size_t> novelty_threshold;
  std::optional<std::size_t> hard_cap;
  std::optional<std::size_t> step;
  std::optional<std::string> metric;
  std::optional<double> epsilon;
  std::optional<double> slack;
  std::optional<std::string> merge_tol;
  std::optional<double> merge_gap;
  std::optional<double> theta;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> consecutive;
  std::optional<std::size_t> threads;

  void attach(CLI::App& app, bool learning) {
    app.add_option("--config", config_file, "key = value configuration file");
    app.add_option("--step", step, "edges to slide per window advance");
    app.add_option("--theta", theta, "fraction of flagged instances that suggests revision");
    app.add_option("--consecutive", consecutive, "consecutive anomalous windows that raise an alarm");
    app.add_option("--threads", threads, "worker threads (0 = all cores)");
    if (!learning) return;
    app.add_option("--iterations", iterations, "relabeling rounds");
    app.add_option("--novelty-threshold", novelty_threshold, "quiet edges that declare the window size");
    app.add_option("--hard-cap", hard_cap, "maximum window size");
    app.add_option("--metric", metric, "kld | hellinger | euclidean");
    app.add_option("--epsilon", epsilon, "back-off probability for absent labels");
    app.add_option("--slack", slack, "cluster radius multiplier");
    app.add_option("--merge-tol", merge_tol, "first-phase merge tolerance, or 'auto'");
    app.add_option("--merge-gap", merge_gap, "jump factor used by the automatic merge rule");
    app.add_option("--seed", seed, "clustering seed");
  }

  frap::Config resolve() const {
    frap::Config c = config_file ? frap::load_config_file(*config_file) : frap::Config{};
    auto set = [&c](const char* key, const auto& opt) {
      if (opt) frap::set_config_value(c, key, to_text(*opt));
    };
    set("iterations", iterations);
    set("novelty_threshold", novelty_threshold);
    set("hard_cap", hard_cap);
    set("step", step);
    set("metric", metric);
    set("epsilon", epsilon);
    set("slack", slack);
    set("merge_tol", merge_tol);
    set("merge_gap", merge_gap);
    set("theta", theta);
    set("seed", seed);
    set("consecutive", consecutive);
    set("threads", threads);
    c.validate();
    return c;
  }

  static std::string to_text(const std::string& s) { return s; }
  template <typename T>
  static std::string to_text(const T& v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
  }
};

std::vector<std::filesystem::path> as_paths(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frap: provenance-based anomaly detection (learn, detect, revise)"};
  app.require_subcommand(1);

  ConfigFlags learn_flags;
  std::vector<std::string> learn_files;
  std::string learn_out;
  auto* learn = app.add_subcommand("learn", "build a model from instance files");
  learn_flags.attach(*learn, true);
  learn->add_option("--out", learn_out, "model file to write")->required();
  learn->add_option("files", learn_files, "instance files (.prov)")->required();

  ConfigFlags detect_flags;
  std::string detect_model;
  std::vector<std::string> detect_files;
  std::string detect_out;
  auto* detect = app.add_subcommand("detect", "monitor instance files against a model");
  detect_flags.attach(*detect, false);
  detect->add_option("--model", detect_model, "model file")->required();
  detect->add_option("--out", detect_out, "verdict file (default: stdout)");
  detect->add_option("files", detect_files, "instance files (.prov)")->required();

  std::string revise_model;
  std::string revise_out;
  std::vector<std::string> revise_files;
  bool revise_confirm = false;
  auto* revise = app.add_subcommand("revise", "fold confirmed false positives into a model");
  revise->add_option("--model", revise_model, "model file")->required();
  revise->add_option("--out", revise_out, "revised model file")->required();
  revise->add_flag("--confirm", revise_confirm, "confirm that the instances are legitimate");
  revise->add_option("files", revise_files, "confirmed false-positive instance files")->required();

  std::string gen_scenario = "table1";
  std::string gen_scenario_file;
  std::string gen_dir;
  std::optional<std::uint64_t> gen_seed;
  auto* gen = app.add_subcommand("gen", "generate a synthetic scenario");
  gen->add_option("--scenario", gen_scenario, "built-in scenario: table1, homogeneous, novel");
  gen->add_option("--scenario-file", gen_scenario_file, "JSON scenario definition");
  gen->add_option("--out-dir", gen_dir, "output directory")->required();
  gen->add_option("--seed", gen_seed, "override the scenario seed");

  std::string inspect_model;
  auto* inspect = app.add_subcommand("inspect", "summarise a model file");
  inspect->add_option("model", inspect_model, "model file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : frap::kExitUsage;
  }

  try {
    if (*learn) {
      return frap::cmd_learn(as_paths(learn_files), learn_flags.resolve(), learn_out, std::cout, std::cerr);
    }
    if (*detect) {
      std::optional<std::filesystem::path> out;
      if (!detect_out.empty()) out = detect_out;
      return frap::cmd_detect(detect_model, as_paths(detect_files), detect_flags.resolve(), out, std::cout,
                              std::cerr);
    }
    if (*revise) {
      return frap::cmd_revise(revise_model, as_paths(revise_files), revise_confirm, revise_out, std::cout, std::cerr);
    }
    if (*gen) {
      std::optional<std::filesystem::path> file;
      if (!gen_scenario_file.empty()) file = gen_scenario_file;
      return frap::cmd_gen(gen_scenario, file, gen_dir, gen_seed, std::cout, std::cerr);
    }
    if (*inspect) return frap::cmd_inspect(inspect_model, std::cout, std::cerr);
  } catch (const frap::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return frap::exit_code_for(e);
  }
  return frap::kExitUsage;
}
