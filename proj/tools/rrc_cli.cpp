#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "rrc/config.hpp"
#include "rrc/event_log.hpp"
#include "rrc/experiments.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode = "bayes";
  std::string format = "csv";
  std::string config;
  std::string events;
};

void write_file(const fs::path& path, const std::string& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw rrc::Error(rrc::ErrorCode::invalid_argument, "cannot write " + path.string());
  f << data;
}

std::string render(const rrc::ResultTable& t, const std::string& format) {
  return format == "json" ? t.to_json().dump(2) + "\n" : t.to_csv();
}

int run_experiment(const Options& o, const std::string& expected_type) {
  const auto cfg = rrc::load_config(o.config);
  const auto type = cfg.experiment.value("type", std::string());
  if (type != expected_type) {
    cfg.fail("/experiment/type", "expected an experiment of type '" + expected_type + "', found '" + type + "'");
  }
  const auto result = rrc::run_experiment(cfg, o.seed.value_or(cfg.seed));
  if (o.out.empty()) {
    for (std::size_t k = 0; k < result.tables.size(); ++k) {
      if (k) std::cout << '\n';
      std::cout << render(result.tables[k], o.format);
    }
    return 0;
  }
  fs::create_directories(o.out);
  const std::string ext = o.format == "json" ? ".json" : ".csv";
  for (const auto& t : result.tables) write_file(fs::path(o.out) / (t.name + ext), render(t, o.format));
  write_file(fs::path(o.out) / (type + "_metadata.json"), result.metadata.dump(2) + "\n");
  return 0;
}

int run_infer(const Options& o) {
  const auto cfg = rrc::load_config(o.config);
  std::ifstream in(o.events);
  if (!in) throw rrc::Error(rrc::ErrorCode::invalid_argument, "cannot open event log " + o.events);
  const auto events = rrc::read_event_log(cfg, in, o.events);
  const auto report = rrc::infer_report(cfg, events, rrc::inference_mode_from_string(o.mode));
  const std::string data = o.format == "json" ? report.dump(2) + "\n" : rrc::infer_report_csv(report);
  if (o.out.empty()) {
    std::cout << data;
  } else {
    fs::create_directories(o.out);
    write_file(fs::path(o.out) / (o.format == "json" ? "posterior.json" : "posterior.csv"), data);
  }
  return 0;
}

int run_validate(const Options& o) {
  const auto cfg = rrc::load_config(o.config);
  rrc::validate_experiment(cfg);
  nlohmann::json summary;
  summary["environments"] = cfg.env_order;
  summary["hypotheses"] = cfg.grid->size();
  auto chans = nlohmann::json::array();
  for (const auto& c : cfg.channels) {
    chans.push_back({{"id", c.spec.id}, {"kind", std::string(rrc::to_string(c.spec.kind))}, {"choices", c.channel->size()}});
  }
  summary["channels"] = std::move(chans);
  summary["experiment"] = cfg.experiment.value("type", std::string());
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward inference from reward-rational feedback"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "Override the config seed");
  app.add_option("--out", o.out, "Output directory (default: standard output)");
  app.add_option("--mode", o.mode, "Inference mode for infer")->check(CLI::IsMember({"bayes", "constraint"}));
  app.add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  auto* meta = app.add_subcommand("run-meta", "Meta-choice experiment");
  auto* active = app.add_subcommand("run-active", "Active feedback-selection experiment");
  auto* misspec = app.add_subcommand("run-misspec", "Meta-rationality misspecification experiment");
  auto* infer = app.add_subcommand("infer", "Posterior or feasible set after an event log");
  auto* validate = app.add_subcommand("validate", "Check a config");
  for (auto* sub : {meta, active, misspec, infer, validate}) {
    sub->add_option("config", o.config, "Config JSON")->required()->check(CLI::ExistingFile);
    sub->fallthrough();
  }
  infer->add_option("events", o.events, "Event log (JSON lines)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help() << "\nerror: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*meta) return run_experiment(o, "meta");
    if (*active) return run_experiment(o, "active");
    if (*misspec) return run_experiment(o, "misspec");
    if (*infer) return run_infer(o);
    return run_validate(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
