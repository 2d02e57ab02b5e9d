#include "rrc/language.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rrc/error.hpp"

namespace rrc {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::vector<std::string> split_and(const std::string& text) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    auto next = text.find(" AND ", pos);
    parts.push_back(trim(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos)));
    if (next == std::string::npos) break;
    pos = next + 5;
  }
  return parts;
}

}  // namespace

UtteranceSemantics UtteranceSemantics::parse(const std::string& text) {
  UtteranceSemantics out;
  out.text_ = text;
  for (const auto& part : split_and(text)) {
    const auto open = part.find('(');
    if (open == std::string::npos || part.back() != ')') {
      throw Error(ErrorCode::config, "malformed predicate '" + part + "' in utterance '" + text + "'");
    }
    const std::string op = trim(part.substr(0, open));
    const std::string arg = trim(part.substr(open + 1, part.size() - open - 2));
    if (arg.empty()) throw Error(ErrorCode::config, "predicate '" + op + "' needs an argument");
    if (arg.find_first_of("() \t") != std::string::npos) {
      throw Error(ErrorCode::config, "malformed argument '" + arg + "' in utterance '" + text + "'");
    }
    if (op == "AVOID") {
      out.atoms_.emplace_back(Avoid{arg});
    } else if (op == "VISIT") {
      out.atoms_.emplace_back(Visit{arg});
    } else if (op == "END_AT") {
      if (arg.find(',') != std::string::npos) {
        std::istringstream is(arg);
        Cell c;
        char comma = 0;
        if (!(is >> c.x >> comma >> c.y) || comma != ',') {
          throw Error(ErrorCode::config, "END_AT expects a type name or 'x,y', got '" + arg + "'");
        }
        out.atoms_.emplace_back(EndAtCell{c});
      } else {
        out.atoms_.emplace_back(EndAtType{arg});
      }
    } else {
      throw Error(ErrorCode::config, "unknown predicate '" + op + "'");
    }
  }
  return out;
}

bool UtteranceSemantics::holds(const GridEnvironment& env, const Trajectory& traj) const {
  auto visits = [&](const std::string& type) {
    return std::any_of(traj.cells.begin(), traj.cells.end(),
                       [&](Cell c) { return env.cell_type(c) == type; });
  };
  for (const auto& atom : atoms_) {
    const bool ok = std::visit(
        [&](const auto& a) -> bool {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, Avoid>) {
            return !visits(a.type);
          } else if constexpr (std::is_same_v<T, Visit>) {
            return visits(a.type);
          } else if constexpr (std::is_same_v<T, EndAtType>) {
            return env.cell_type(traj.back()) == a.type;
          } else {
            return traj.back() == a.cell;
          }
        },
        atom);
    if (!ok) return false;
  }
  return true;
}

}  // namespace rrc
