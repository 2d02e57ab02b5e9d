#pragma once

#include <string>
#include <variant>
#include <vector>

#include "rrc/grid.hpp"

namespace rrc {

/// Hand-specified utterance semantics: a conjunction of AVOID(type),
/// VISIT(type), and END_AT(type | x,y) atoms joined by AND.
class UtteranceSemantics {
 public:
  struct Avoid {
    std::string type;
  };
  struct Visit {
    std::string type;
  };
  struct EndAtType {
    std::string type;
  };
  struct EndAtCell {
    Cell cell;
  };
  using Atom = std::variant<Avoid, Visit, EndAtType, EndAtCell>;

  /// Throws config on malformed input, e.g. "AVOID(rug) AND END_AT(goal)".
  static UtteranceSemantics parse(const std::string& text);

  bool holds(const GridEnvironment& env, const Trajectory& traj) const;

  const std::string& text() const { return text_; }
  const std::vector<Atom>& atoms() const { return atoms_; }

 private:
  std::string text_;
  std::vector<Atom> atoms_;
};

}  // namespace rrc
