#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rrc/channels.hpp"
#include "rrc/error.hpp"
#include "rrc/grid.hpp"
#include "rrc/meta_choice.hpp"
#include "rrc/reward_space.hpp"

namespace rrc {

/// Line (1-based) at which the value addressed by each JSON pointer starts.
std::map<std::string, int> json_pointer_lines(const std::string& text);

/// A config problem anchored to a source location: "<source>:<line>: <pointer>: <message>".
class ConfigError : public Error {
 public:
  ConfigError(std::string source, int line, std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }
  int line() const { return line_; }

 private:
  std::string pointer_;
  int line_;
};

struct ChannelEntry {
  ChannelSpec spec;
  std::string env;
  ChannelPtr channel;
};

/// A fully loaded run description: environments, hypothesis grid, channels,
/// meta-choice settings, human parameters and the experiment block.
struct Config {
  std::string source = "<config>";
  nlohmann::json raw;
  std::uint64_t seed = 0;
  std::vector<std::string> env_order;
  std::map<std::string, GridEnvironment> environments;
  GridPtr grid;
  std::vector<ChannelEntry> channels;
  std::optional<MetaOptions> meta;
  nlohmann::json human = nlohmann::json::object();
  nlohmann::json experiment = nlohmann::json::object();

  const GridEnvironment& env(const std::string& name) const;
  /// Throws not_found for an unknown id.
  const ChannelEntry& channel(const std::string& id) const;
  ChannelPtr channel_ptr(const std::string& id) const { return channel(id).channel; }
  /// 64-bit FNV-1a of the canonical JSON dump, as hex.
  std::string hash() const;

  /// Throws ConfigError anchored at the line of `pointer` (or its nearest ancestor).
  [[noreturn]] void fail(const std::string& pointer, const std::string& message) const;

  std::map<std::string, int> lines;
};

/// Parses and validates `text`. Every error is a ConfigError naming the line.
Config parse_config(const std::string& text, const std::string& source = "<config>");
Config load_config(const std::filesystem::path& path);

std::string fnv1a_hex(const std::string& bytes);

}  // namespace rrc
