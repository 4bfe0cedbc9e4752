#include "frap/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "frap/errors.hpp"

namespace frap {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidArgument, "bad value '" + std::string(text) + "' for " + std::string(key));
  }
  return v;
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void Config::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidArgument, what); };
  if (novelty_threshold == 0) fail("novelty_threshold must be positive");
  if (hard_cap == 0) fail("hard_cap must be positive");
  if (step == 0) fail("step must be positive");
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("epsilon must be in (0, 1)");
  if (!(slack >= 0.0)) fail("slack must be non-negative");
  if (!(merge_tol >= 0.0)) fail("merge_tol must be non-negative");
  if (!(merge_gap > 1.0)) fail("merge_gap must exceed 1");
  if (!(theta >= 0.0 && theta <= 1.0)) fail("theta must be in [0, 1]");
  if (consecutive == 0) fail("consecutive must be positive");
}

void set_config_value(Config& c, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "iterations") {
    c.iterations = parse_value<unsigned>(key, value);
  } else if (key == "novelty_threshold") {
    c.novelty_threshold = parse_value<std::size_t>(key, value);
  } else if (key == "hard_cap") {
    c.hard_cap = parse_value<std::size_t>(key, value);
  } else if (key == "step") {
    c.step = parse_value<std::size_t>(key, value);
  } else if (key == "metric") {
    c.metric = parse_metric(value);
  } else if (key == "epsilon") {
    c.epsilon = parse_value<double>(key, value);
  } else if (key == "slack") {
    c.slack = parse_value<double>(key, value);
  } else if (key == "merge_tol") {
    c.merge_tol = value == "auto" ? 0.0 : parse_value<double>(key, value);
  } else if (key == "merge_gap") {
    c.merge_gap = parse_value<double>(key, value);
  } else if (key == "theta") {
    c.theta = parse_value<double>(key, value);
  } else if (key == "seed") {
    c.seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "consecutive") {
    c.consecutive = parse_value<std::size_t>(key, value);
  } else if (key == "threads") {
    c.threads = parse_value<std::size_t>(key, value);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown config key '" + std::string(key) + "'");
  }
}

Config load_config_file(const std::filesystem::path& path, Config base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open config " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    set_config_value(base, trim(text.substr(0, eq)), text.substr(eq + 1));
  }
  base.validate();
  return base;
}

std::string describe(const Config& c) {
  std::ostringstream out;
  out << "iterations=" << c.iterations << '\n'
      << "novelty_threshold=" << c.novelty_threshold << '\n'
      << "hard_cap=" << c.hard_cap << '\n'
      << "step=" << c.step << '\n'
      << "metric=" << to_string(c.metric) << '\n'
      << "epsilon=" << fmt(c.epsilon) << '\n'
      << "slack=" << fmt(c.slack) << '\n'
      << "merge_tol=" << (c.merge_tol > 0.0 ? fmt(c.merge_tol) : std::string("auto")) << '\n'
      << "merge_gap=" << fmt(c.merge_gap) << '\n'
      << "theta=" << fmt(c.theta) << '\n'
      << "seed=" << c.seed << '\n'
      << "threads=" << c.threads << '\n'
      << "consecutive=" << c.consecutive << '\n';
  return out.str();
}

SizerOptions sizer_options(const Config& c) { return {c.novelty_threshold, c.hard_cap}; }

ModelParams model_params(const Config& c, std::size_t window_size) {
  ModelParams p;
  p.metric = c.metric;
  p.epsilon = c.epsilon;
  p.iterations = c.iterations;
  p.window_size = window_size;
  p.step = c.step;
  p.novelty_threshold = c.novelty_threshold;
  p.hard_cap = c.hard_cap;
  p.slack = c.slack;
  p.merge_tol = c.merge_tol;
  p.merge_gap = c.merge_gap;
  p.seed = c.seed;
  return p;
}

}  // namespace frap
