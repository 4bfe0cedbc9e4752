#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "frap/config.hpp"
#include "frap/detection.hpp"
#include "frap/errors.hpp"
#include "frap/modeling.hpp"

namespace frap {

enum ExitCode : int {
  kExitClean = 0,
  kExitAnomaly = 1,
  kExitUsage = 2,
  kExitData = 3,
};

/// Maps an error to the usage (2) or data (3) exit code.
int exit_code_for(const Error& error);

struct LearnResult {
  Model model;
  BuildReport report;
  std::vector<std::string> instances;
  std::vector<std::size_t> declared_sizes;  // per instance, before the max rule
};

/// Sizes windows (max over instances), extracts each instance's first window
/// and builds the model. Needs at least two instances.
LearnResult learn(const std::vector<std::filesystem::path>& files, const Config& config);

/// Vector of the first window of `file` against the model's label map.
FeatureVector first_window_vector(const Model& model, const std::filesystem::path& file);

struct InstanceReport {
  std::string instance_id;
  std::vector<Verdict> verdicts;
  bool alarm = false;
};

struct DetectResult {
  std::vector<InstanceReport> instances;
  bool revision_suggested = false;
};

/// One monitor per file, run in parallel; results keep the input order.
DetectResult detect_files(std::shared_ptr<const Model> model, const std::vector<std::filesystem::path>& files,
                          const Config& config);

std::string inspect_summary(const Model& model);
std::string learning_report(const LearnResult& result, const Config& config);

// Subcommands. Each returns the process exit code and never throws.
int cmd_learn(const std::vector<std::filesystem::path>& files, const Config& config,
              const std::filesystem::path& out, std::ostream& stdout_, std::ostream& stderr_);
int cmd_detect(const std::filesystem::path& model_path, const std::vector<std::filesystem::path>& files,
               const Config& config, const std::optional<std::filesystem::path>& verdict_out,
               std::ostream& stdout_, std::ostream& stderr_);
int cmd_revise(const std::filesystem::path& model_path, const std::vector<std::filesystem::path>& confirmed,
               bool confirm, const std::filesystem::path& out, std::ostream& stdout_, std::ostream& stderr_);
int cmd_inspect(const std::filesystem::path& model_path, std::ostream& stdout_, std::ostream& stderr_);
int cmd_gen(const std::string& scenario_name, const std::optional<std::filesystem::path>& scenario_file,
            const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed, std::ostream& stdout_,
            std::ostream& stderr_);

}  // namespace frap
