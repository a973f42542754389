#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quinelab/molecule.hpp"

namespace quinelab {

enum class GrowthClass : std::uint8_t { grow, slim, neutral };

std::string_view growth_name(GrowthClass g);

// A two-node pattern joined through (type_x, port_x) -- (type_y, port_y).
// For directed families port_x is an out-port and port_y an in-port; for
// the combinators both are principal. Patterns and replacements are kept
// in mol notation over formal tag names (the tag shared by the two lhs
// lines is the joining edge).
struct RewriteRule {
  std::string name;
  GrowthClass growth = GrowthClass::slim;
  NodeType type_x = NodeType::L;
  std::uint8_t port_x = 0;
  NodeType type_y = NodeType::A;
  std::uint8_t port_y = 0;
  std::string lhs_x;
  std::string lhs_y;
  std::vector<std::string> rhs;
  std::vector<std::pair<std::string, std::string>> wires;

  // Compiled form consumed by splice_into(). boundary_x/boundary_y give the
  // formal bound to each lhs port (unused for the joining port).
  std::vector<NodeTemplate> templates;
  std::vector<std::pair<Formal, Formal>> template_wires;
  std::array<Formal, 3> boundary_x{};
  std::array<Formal, 3> boundary_y{};

  int node_delta() const { return static_cast<int>(rhs.size()) - 2; }
};

enum class ChemistryId : std::uint8_t { chemlambda, diric, ic };

std::string_view chemistry_name(ChemistryId id);
std::optional<ChemistryId> parse_chemistry_id(std::string_view name);

class Chemistry {
 public:
  Chemistry(ChemistryId id, Family family, std::vector<RewriteRule> rules);

  ChemistryId id() const { return id_; }
  Family family() const { return family_; }
  const std::vector<RewriteRule>& rules() const { return rules_; }

  // Scheduled rules plus the COMB post-pass.
  std::vector<std::string> rule_names() const;
  bool has_rule(std::string_view name) const;

  struct Hit {
    const RewriteRule* rule = nullptr;
    bool swapped = false;  // edge endpoints are (y, x) rather than (x, y)
  };
  Hit lookup(NodeType a, std::uint8_t pa, NodeType b, std::uint8_t pb) const;

 private:
  static std::size_t key(NodeType a, std::uint8_t pa, NodeType b, std::uint8_t pb);

  ChemistryId id_;
  Family family_;
  std::vector<RewriteRule> rules_;
  std::vector<std::pair<std::int16_t, bool>> table_;
};

// Immutable, shared rule tables.
const Chemistry& ruleset(ChemistryId id);

// Types that dirIC molecules are built from; each has one active port.
std::span<const NodeType> diric_node_types();

struct Match {
  const RewriteRule* rule = nullptr;
  NodeId node_x = 0;
  NodeId node_y = 0;
  Tag edge;
  std::uint64_t age = 0;

  std::string_view rule_name() const { return rule->name; }
  GrowthClass growth() const { return rule->growth; }
};

// Ordered by (age, rule name, joining tag).
std::vector<Match> find_matches(const Molecule& m, const Chemistry& c);

// Index pairs (i < j) of matches sharing a node.
std::vector<std::pair<std::size_t, std::size_t>> conflict_pairs(const std::vector<Match>& matches);

class StaleMatch : public MolError {
 public:
  using MolError::MolError;
};

bool match_is_live(const Molecule& m, const Match& match);

SpliceOutcome apply_match_into(Molecule& m, const Match& match, std::uint64_t step);
Molecule apply_match(Molecule m, const Match& match, std::uint64_t step);

struct CombOutcome {
  std::size_t arrows_removed = 0;
  std::uint64_t loops = 0;
};

// Contracts every Arrow chain into a single edge; closed Arrow cycles are
// deleted and counted in loops_harvested.
CombOutcome comb_into(Molecule& m);
Molecule comb_pass(Molecule m);

// GROW / SLIM for scheduled rules, NEUTRAL for COMB. Throws on unknown names.
GrowthClass rewrite_class(std::string_view rule);

// One JSON object per line: name, lhs key, patterns, rhs, wires, class.
std::string export_rules(const Chemistry& c);

}  // namespace quinelab
