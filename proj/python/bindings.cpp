#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <optional>
#include <sstream>

#include "rrc/active.hpp"
#include "rrc/config.hpp"
#include "rrc/event_log.hpp"
#include "rrc/experiments.hpp"
#include "rrc/inference.hpp"
#include "rrc/meta_choice.hpp"

namespace py = pybind11;

namespace {

std::vector<rrc::FeedbackEvent> parse_events(const rrc::Config& cfg, const std::string& jsonl) {
  std::istringstream in(jsonl);
  return rrc::read_event_log(cfg, in);
}

std::vector<std::string> channel_ids(const rrc::Config& cfg) {
  std::vector<std::string> ids;
  for (const auto& c : cfg.channels) ids.push_back(c.spec.id);
  return ids;
}

}  // namespace

PYBIND11_MODULE(_rrc, m) {
  m.attr("__version__") = RRC_VERSION;
  m.attr("schema_version") = rrc::kSchemaVersion;

  static py::exception<rrc::Error> error(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const rrc::Error& e) {
      py::tuple args = py::make_tuple(std::string(rrc::to_string(e.code())), e.what());
      PyErr_SetObject(error.ptr(), args.ptr());
    }
  });

  py::class_<rrc::Config>(m, "Config")
      .def(py::init(&rrc::parse_config), py::arg("text"), py::arg("source") = "<config>")
      .def_property_readonly("hash", &rrc::Config::hash)
      .def_readonly("seed", &rrc::Config::seed)
      .def_readonly("source", &rrc::Config::source)
      .def_property_readonly("channel_ids", &channel_ids)
      .def_property_readonly("num_hypotheses", [](const rrc::Config& c) { return c.grid->size(); })
      .def_property_readonly("meta_enabled", [](const rrc::Config& c) { return c.meta.has_value(); })
      .def_property_readonly("experiment_type", [](const rrc::Config& c) {
        return c.experiment.value("type", std::string{});
      });

  m.def("validate_experiment", &rrc::validate_experiment, py::arg("config"));

  m.def(
      "infer",
      [](const rrc::Config& cfg, const std::string& events, const std::string& mode) {
        const auto parsed = parse_events(cfg, events);
        return rrc::infer_report(cfg, parsed, rrc::inference_mode_from_string(mode)).dump();
      },
      py::arg("config"), py::arg("events") = "", py::arg("mode") = "bayes");

  m.def(
      "choice_probabilities",
      [](const rrc::Config& cfg, const std::string& channel, std::vector<double> theta) {
        auto lp = rrc::choice_log_probs(*cfg.channel_ptr(channel), theta);
        for (auto& x : lp) x = std::exp(x);
        return lp;
      },
      py::arg("config"), py::arg("channel"), py::arg("theta"));

  m.def(
      "info_gains",
      [](const rrc::Config& cfg, const std::string& events) {
        const auto parsed = parse_events(cfg, events);
        const auto post = rrc::evidence_posterior(rrc::uniform_prior(cfg.grid), parsed, cfg.meta);
        std::vector<std::pair<std::string, double>> out;
        for (const auto& c : cfg.channels) out.emplace_back(c.spec.id, rrc::info_gain(post, *c.channel));
        return out;
      },
      py::arg("config"), py::arg("events") = "");

  m.def(
      "run_experiment",
      [](const rrc::Config& cfg, std::optional<std::uint64_t> seed) {
        rrc::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = rrc::run_experiment(cfg, seed.value_or(cfg.seed));
        }
        std::vector<std::pair<std::string, std::string>> tables;
        for (const auto& t : result.tables) tables.emplace_back(t.name, t.to_csv());
        return py::make_tuple(tables, result.metadata.dump());
      },
      py::arg("config"), py::arg("seed") = py::none());
}
