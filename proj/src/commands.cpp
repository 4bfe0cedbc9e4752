#include "frap/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "frap/errors.hpp"
#include "frap/ingest.hpp"
#include "frap/synthgen.hpp"

namespace frap {

int exit_code_for(const Error& error) {
  switch (error.code()) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::MissingConfirmation:
    case ErrorCode::InvalidK:
      return kExitUsage;
    default:
      return kExitData;
  }
}

LearnResult learn(const std::vector<std::filesystem::path>& files, const Config& config) {
  config.validate();
  if (files.size() < 2) throw Error(ErrorCode::InvalidArgument, "learning needs at least two instance files");

  LearnResult result;
  std::vector<std::vector<ProvenanceEdge>> streams;
  for (const auto& f : files) {
    streams.push_back(read_instance(f));
    result.instances.push_back(instance_name(f));
    result.declared_sizes.push_back(size_window(streams.back(), sizer_options(config)));
  }
  const std::size_t w = *std::max_element(result.declared_sizes.begin(), result.declared_sizes.end());
  if (w == 0) throw Error(ErrorCode::InsufficientEdges, "all learning instances are empty");

  // Sequential so label ids, and with them the model bytes, are reproducible.
  auto map = std::make_shared<LabelMap>();
  std::vector<FeatureVector> vectors;
  for (std::size_t i = 0; i < streams.size(); ++i) {
    if (streams[i].size() < w) {
      throw Error(ErrorCode::InsufficientEdges, "instance '" + result.instances[i] + "' has " +
                                                    std::to_string(streams[i].size()) + " edges, window is " +
                                                    std::to_string(w));
    }
    const auto window = WindowGraph::init(streams[i], w, config.step);
    vectors.push_back(extract_features(window, config.iterations, *map, result.instances[i], 0));
  }
  result.model = build_model(std::move(vectors), model_params(config, w), map, &result.report);
  return result;
}

FeatureVector first_window_vector(const Model& model, const std::filesystem::path& file) {
  const auto edges = read_instance(file);
  const auto window = WindowGraph::init(edges, model.params.window_size, model.params.step);
  return extract_features(window, model.params.iterations, *model.label_map, instance_name(file), 0);
}

DetectResult detect_files(std::shared_ptr<const Model> model, const std::vector<std::filesystem::path>& files,
                          const Config& config) {
  DetectResult result;
  result.instances.resize(files.size());
  std::vector<std::exception_ptr> errors(files.size());
  MonitorOptions options{config.step, config.consecutive};

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      try {
        auto& report = result.instances[i];
        report.instance_id = instance_name(files[i]);
        const auto edges = read_instance(files[i]);
        if (edges.size() < model->params.window_size) {
          warn("instance '" + report.instance_id + "' has " + std::to_string(edges.size()) +
               " edges, window needs " + std::to_string(model->params.window_size) + "; no verdicts");
          continue;
        }
        InstanceMonitor mon(model, report.instance_id, options);
        for (const auto& e : edges) {
          if (auto v = mon.push(e)) report.verdicts.push_back(std::move(*v));
        }
        report.alarm = mon.alarm();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(files.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<Verdict> all;
  for (const auto& r : result.instances) all.insert(all.end(), r.verdicts.begin(), r.verdicts.end());
  result.revision_suggested = revision_trigger(all, config.theta);
  return result;
}

std::string inspect_summary(const Model& model) {
  std::ostringstream out;
  const auto& p = model.params;
  out << "window_size: " << p.window_size << '\n'
      << "step: " << p.step << '\n'
      << "metric: " << to_string(p.metric) << '\n'
      << "epsilon: " << p.epsilon << '\n'
      << "iterations: " << p.iterations << '\n'
      << "label_map_size: " << (model.label_map ? model.label_map->size() : 0) << '\n'
      << "vectors: " << model.vectors.size() << '\n'
      << "clusters: " << model.clusters.size() << '\n';
  for (std::size_t c = 0; c < model.clusters.size(); ++c) {
    const auto& cl = model.clusters[c];
    out << "cluster " << c << ": size " << cl.members.size() << " radius " << cl.radius << " members";
    for (auto m : cl.members) out << ' ' << model.vectors[m].instance_id;
    out << '\n';
  }
  return out.str();
}

std::string learning_report(const LearnResult& result, const Config& config) {
  std::ostringstream out;
  out << "# effective configuration\n" << describe(config);
  out << "# window sizes\n";
  for (std::size_t i = 0; i < result.instances.size(); ++i) {
    out << "declared " << result.instances[i] << ' ' << result.declared_sizes[i] << '\n';
  }
  out << "window_size " << result.model.params.window_size << '\n';
  out << "# clustering\n";
  out << "first_phase_populated " << result.report.partition.selection.populated << '\n';
  out << "selected_k " << result.report.partition.selection.k << '\n';
  out << "# discarded\n";
  for (const auto& d : result.report.discarded) {
    out << "discarded " << d.instance_id << " window " << d.window_index << " group " << d.group << '\n';
  }
  out << "# model\n" << inspect_summary(result.model);
  return out.str();
}

namespace {

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  // Route warnings to this command's stderr for its duration.
  struct SinkScope {
    WarningSink previous;
    ~SinkScope() { set_warning_sink(std::move(previous)); }
  } scope{set_warning_sink([&err](std::string_view m) { err << "warning: " << m << '\n'; })};
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace

int cmd_learn(const std::vector<std::filesystem::path>& files, const Config& config, const std::filesystem::path& out,
              std::ostream& stdout_, std::ostream& stderr_) {
  return guarded(stderr_, [&] {
    const auto result = learn(files, config);
    save_model(result.model, out);
    const auto report = learning_report(result, config);
    auto report_path = out;
    report_path += ".report";
    std::ofstream(report_path) << report;
    stdout_ << report;
    return kExitClean;
  });
}

int cmd_detect(const std::filesystem::path& model_path, const std::vector<std::filesystem::path>& files,
               const Config& config, const std::optional<std::filesystem::path>& verdict_out, std::ostream& stdout_,
               std::ostream& stderr_) {
  return guarded(stderr_, [&] {
    config.validate();
    auto model = std::make_shared<const Model>(load_model(model_path));
    const auto result = detect_files(model, files, config);

    std::ofstream file;
    if (verdict_out) {
      file.open(*verdict_out);
      if (!file) throw Error(ErrorCode::IoFailure, "cannot write " + verdict_out->string());
    }
    std::ostream& out = verdict_out ? static_cast<std::ostream&>(file) : stdout_;
    bool alarm = false;
    for (const auto& r : result.instances) {
      for (const auto& v : r.verdicts) out << format_verdict(v) << '\n';
      if (r.alarm) {
        alarm = true;
        stderr_ << "alarm: instance " << r.instance_id << '\n';
      }
    }
    if (result.revision_suggested) {
      stderr_ << "revision suggested: more than " << config.theta
              << " of the monitored instances were flagged; confirm false positives and run `frap revise`\n";
    }
    return alarm ? kExitAnomaly : kExitClean;
  });
}

int cmd_revise(const std::filesystem::path& model_path, const std::vector<std::filesystem::path>& confirmed,
               bool confirm, const std::filesystem::path& out, std::ostream& stdout_, std::ostream& stderr_) {
  return guarded(stderr_, [&] {
    if (!confirm) {
      throw Error(ErrorCode::MissingConfirmation, "revision folds the given instances into the model; pass --confirm");
    }
    if (confirmed.empty()) throw Error(ErrorCode::InvalidArgument, "no confirmed false-positive files given");
    const auto model = load_model(model_path);
    std::vector<FeatureVector> vectors;
    for (const auto& f : confirmed) vectors.push_back(first_window_vector(model, f));
    const auto revised = revise(model, std::move(vectors), model.params.seed);
    save_model(revised, out);
    stdout_ << inspect_summary(revised);
    return kExitClean;
  });
}

int cmd_inspect(const std::filesystem::path& model_path, std::ostream& stdout_, std::ostream& stderr_) {
  return guarded(stderr_, [&] {
    stdout_ << inspect_summary(load_model(model_path));
    return kExitClean;
  });
}

int cmd_gen(const std::string& scenario_name, const std::optional<std::filesystem::path>& scenario_file,
            const std::filesystem::path& out_dir, std::optional<std::uint64_t> seed, std::ostream& stdout_,
            std::ostream& stderr_) {
  return guarded(stderr_, [&] {
    Scenario scenario;
    if (scenario_file) {
      scenario = load_scenario(*scenario_file);
    } else if (auto s = find_builtin(scenario_name)) {
      scenario = *s;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + scenario_name + "'");
    }
    if (seed) scenario.seed = *seed;
    for (const auto& p : generate_scenario(scenario, out_dir)) stdout_ << p.string() << '\n';
    return kExitClean;
  });
}

}  // namespace frap
