#include "rrc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rrc/human_sim.hpp"
#include "rrc/rng.hpp"

namespace rrc {

namespace {

class PointerScanner {
 public:
  explicit PointerScanner(const std::string& text) : s_(text) {}

  std::map<std::string, int> run() {
    skip_ws();
    if (i_ < s_.size()) value("");
    return std::move(lines_);
  }

 private:
  void skip_ws() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) {
      if (s_[i_] == '\n') ++line_;
      ++i_;
    }
  }

  std::string string_token() {
    std::string out;
    ++i_;
    while (i_ < s_.size() && s_[i_] != '"') {
      if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
        out += s_[i_ + 1];
        i_ += 2;
        continue;
      }
      out += s_[i_++];
    }
    ++i_;
    return out;
  }

  static std::string escape(const std::string& key) {
    std::string out;
    for (char c : key) {
      if (c == '~') {
        out += "~0";
      } else if (c == '/') {
        out += "~1";
      } else {
        out += c;
      }
    }
    return out;
  }

  void value(const std::string& ptr) {
    lines_.emplace(ptr, line_);
    if (i_ >= s_.size()) return;
    const char c = s_[i_];
    if (c == '{') {
      ++i_;
      for (;;) {
        skip_ws();
        if (i_ >= s_.size() || s_[i_] == '}') break;
        const std::string key = string_token();
        skip_ws();
        ++i_;  // ':'
        skip_ws();
        value(ptr + "/" + escape(key));
        skip_ws();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
      }
      ++i_;
    } else if (c == '[') {
      ++i_;
      for (std::size_t k = 0;; ++k) {
        skip_ws();
        if (i_ >= s_.size() || s_[i_] == ']') break;
        value(ptr + "/" + std::to_string(k));
        skip_ws();
        if (i_ < s_.size() && s_[i_] == ',') ++i_;
      }
      ++i_;
    } else if (c == '"') {
      string_token();
    } else {
      while (i_ < s_.size() && s_[i_] != ',' && s_[i_] != '}' && s_[i_] != ']' &&
             !std::isspace(static_cast<unsigned char>(s_[i_]))) {
        ++i_;
      }
    }
  }

  const std::string& s_;
  std::size_t i_ = 0;
  int line_ = 1;
  std::map<std::string, int> lines_;
};

int line_of(const std::map<std::string, int>& lines, std::string pointer) {
  for (;;) {
    if (auto it = lines.find(pointer); it != lines.end()) return it->second;
    if (pointer.empty()) return 1;
    pointer.erase(pointer.rfind('/'));
  }
}

const std::set<std::string> kTopLevelKeys = {"name",     "description", "version", "rng",  "seed",
                                             "environment", "environments", "hypotheses", "channels",
                                             "meta",     "human",       "experiment"};

}  // namespace

std::map<std::string, int> json_pointer_lines(const std::string& text) { return PointerScanner(text).run(); }

ConfigError::ConfigError(std::string source, int line, std::string pointer, const std::string& message)
    : Error(ErrorCode::config,
            source + ":" + std::to_string(line) + ": " + (pointer.empty() ? "/" : pointer) + ": " + message),
      pointer_(std::move(pointer)),
      line_(line) {}

void Config::fail(const std::string& pointer, const std::string& message) const {
  throw ConfigError(source, line_of(lines, pointer), pointer, message);
}

const GridEnvironment& Config::env(const std::string& name) const {
  const auto it = environments.find(name);
  if (it == environments.end()) throw Error(ErrorCode::not_found, "unknown environment '" + name + "'");
  return it->second;
}

const ChannelEntry& Config::channel(const std::string& id) const {
  for (const auto& c : channels) {
    if (c.spec.id == id) return c;
  }
  throw Error(ErrorCode::not_found, "unknown channel id '" + id + "'");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Config::hash() const { return fnv1a_hex(raw.dump()); }

Config parse_config(const std::string& text, const std::string& source) {
  Config cfg;
  cfg.source = source;
  try {
    cfg.raw = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int line = 1;
    for (std::size_t k = 0; k < e.byte && k < text.size(); ++k) line += text[k] == '\n';
    throw ConfigError(source, line, "", std::string("malformed JSON: ") + e.what());
  }
  cfg.lines = json_pointer_lines(text);
  const auto& j = cfg.raw;
  if (!j.is_object()) cfg.fail("", "config must be a JSON object");

  for (const auto& [key, _] : j.items()) {
    if (!kTopLevelKeys.contains(key)) cfg.fail("/" + key, "unknown top-level key '" + key + "'");
  }

  // Wraps library errors raised while interpreting the value at `ptr`.
  auto guarded = [&](const std::string& ptr, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      cfg.fail(ptr, e.what());
    }
  };

  if (j.contains("rng")) {
    if (!j["rng"].is_string() || j["rng"].get<std::string>() != Rng::algorithm) {
      cfg.fail("/rng", "rng must be \"" + std::string(Rng::algorithm) + "\"");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) cfg.fail("/seed", "seed must be a non-negative integer");
    cfg.seed = j["seed"].get<std::uint64_t>();
  }

  if (j.contains("environment") == j.contains("environments")) {
    cfg.fail("", "exactly one of 'environment' or 'environments' is required");
  }
  if (j.contains("environment")) {
    cfg.environments.emplace("default", guarded("/environment", [&] { return GridEnvironment::from_json(j["environment"]); }));
    cfg.env_order.push_back("default");
  } else {
    if (!j["environments"].is_object() || j["environments"].empty()) {
      cfg.fail("/environments", "environments must be a non-empty object");
    }
    for (const auto& [name, e] : j["environments"].items()) {
      const std::string ptr = "/environments/" + name;
      cfg.environments.emplace(name, guarded(ptr, [&] { return GridEnvironment::from_json(e); }));
      cfg.env_order.push_back(name);
    }
  }
  const std::size_t dim = cfg.environments.begin()->second.dim();
  for (const auto& name : cfg.env_order) {
    if (cfg.environments.at(name).dim() != dim) {
      cfg.fail(j.contains("environment") ? "/environment" : "/environments/" + name,
               "all environments must share one feature dimension");
    }
  }

  if (!j.contains("hypotheses")) cfg.fail("", "missing 'hypotheses'");
  cfg.grid = guarded("/hypotheses", [&] {
    const auto& h = j["hypotheses"];
    const std::string kind = h.value("kind", std::string("sphere"));
    if (kind == "sphere") {
      const std::size_t d = h.value("dim", dim);
      if (d != dim) cfg.fail("/hypotheses/dim", "dimension differs from the environment features");
      if (!h.contains("count")) cfg.fail("/hypotheses", "sphere hypotheses need 'count'");
      return std::make_shared<const HypothesisGrid>(
          sphere_discretization(d, h["count"].get<std::size_t>(), h.value("octant", false)));
    }
    if (kind == "explicit") {
      std::vector<RewardWeights> ws;
      for (const auto& t : h.at("thetas")) ws.push_back(RewardWeights::normalized(t.get<std::vector<double>>()));
      auto g = std::make_shared<const HypothesisGrid>(std::move(ws));
      if (g->dim() != dim) cfg.fail("/hypotheses/thetas", "dimension differs from the environment features");
      return g;
    }
    cfg.fail("/hypotheses/kind", "unknown hypotheses kind '" + kind + "'");
  });

  if (j.contains("meta")) {
    cfg.meta = guarded("/meta", [&] {
      MetaOptions m;
      m.beta0 = j["meta"].value("beta0", 0.0);
      m.mode = meta_mode_from_string(j["meta"].value("mode", std::string("observed_channel")));
      return m;
    });
  }
  if (j.contains("human")) {
    if (!j["human"].is_object()) cfg.fail("/human", "human must be an object");
    cfg.human = j["human"];
  }
  if (j.contains("experiment")) {
    if (!j["experiment"].is_object()) cfg.fail("/experiment", "experiment must be an object");
    cfg.experiment = j["experiment"];
  }

  ChannelBuildOptions opts;
  opts.grid = cfg.grid.get();
  const auto map0 = (*cfg.grid)[uniform_prior(cfg.grid).map_index()].values();
  opts.expected_theta = std::vector<double>(map0.begin(), map0.end());

  if (j.contains("channels")) {
    if (!j["channels"].is_array()) cfg.fail("/channels", "channels must be an array");
    std::set<std::string> seen;
    for (std::size_t k = 0; k < j["channels"].size(); ++k) {
      const std::string ptr = "/channels/" + std::to_string(k);
      const auto& cj = j["channels"][k];
      ChannelEntry entry;
      entry.spec = guarded(ptr, [&] { return ChannelSpec::from_json(cj); });
      if (!seen.insert(entry.spec.id).second) cfg.fail(ptr + "/id", "duplicate channel id '" + entry.spec.id + "'");
      if (cfg.human.contains("beta") && cfg.human["beta"].contains(entry.spec.id)) {
        entry.spec.beta = guarded("/human/beta/" + entry.spec.id, [&] { return cfg.human["beta"][entry.spec.id].get<double>(); });
      }
      if (cj.contains("env")) {
        entry.env = cj["env"].get<std::string>();
        if (!cfg.environments.contains(entry.env)) cfg.fail(ptr + "/env", "unknown environment '" + entry.env + "'");
      } else if (cfg.env_order.size() == 1) {
        entry.env = cfg.env_order.front();
      } else {
        cfg.fail(ptr, "channel must name its 'env' when several environments are declared");
      }
      entry.channel = guarded(ptr, [&] {
        return std::make_shared<const Channel>(make_channel(entry.spec, cfg.environments.at(entry.env), opts));
      });
      cfg.channels.push_back(std::move(entry));
    }
  }

  if (cfg.human.contains("epsilon")) {
    if (!cfg.human.contains("theta_star")) cfg.fail("/human", "epsilon needs a reference 'theta_star'");
    const auto theta = guarded("/human/theta_star", [&] {
      return RewardWeights::normalized(cfg.human["theta_star"].get<std::vector<double>>());
    });
    for (const auto& [id, eps] : cfg.human["epsilon"].items()) {
      const std::string ptr = "/human/epsilon/" + id;
      auto it = std::find_if(cfg.channels.begin(), cfg.channels.end(), [&](const auto& c) { return c.spec.id == id; });
      if (it == cfg.channels.end()) cfg.fail(ptr, "unknown channel id '" + id + "'");
      const double beta = guarded(ptr, [&] { return beta_from_epsilon(*it->channel, theta.values(), eps.get<double>()); });
      it->spec.beta = beta;
      it->channel = std::make_shared<const Channel>(it->channel->with_beta(beta));
    }
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), 1, "", "cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace rrc
