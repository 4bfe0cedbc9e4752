#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "frap/metrics.hpp"
#include "frap/modeling.hpp"
#include "frap/windowing.hpp"

namespace frap {

struct Config {
  unsigned iterations = 4;
  std::size_t novelty_threshold = 500;
  std::size_t hard_cap = 100000;
  std::size_t step = 1;
  MetricKind metric = MetricKind::SymmetricKLD;
  double epsilon = 1e-4;
  double slack = 1.0;
  double merge_tol = 0.0;  // 0 = gap rule
  double merge_gap = 8.0;
  double theta = 0.5;
  std::uint64_t seed = 0;
  std::size_t consecutive = 1;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void validate() const;
};

/// Sets one field from its text form; throws InvalidArgument for unknown keys
/// or bad values. Keys match the field names (`metric`, `epsilon`, ...).
void set_config_value(Config& config, std::string_view key, std::string_view value);

/// Applies a `key = value` file (blank lines and `#` comments ignored) on top of `base`.
Config load_config_file(const std::filesystem::path& path, Config base = {});

/// Effective configuration as `key=value` lines, in a fixed order.
std::string describe(const Config& config);

SizerOptions sizer_options(const Config& config);
ModelParams model_params(const Config& config, std::size_t window_size);

}  // namespace frap
