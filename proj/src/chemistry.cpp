#include "quinelab/chemistry.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

namespace quinelab {

std::string_view growth_name(GrowthClass g) {
  switch (g) {
    case GrowthClass::grow:
      return "GROW";
    case GrowthClass::slim:
      return "SLIM";
    case GrowthClass::neutral:
      return "NEUTRAL";
  }
  return "?";
}

std::string_view chemistry_name(ChemistryId id) {
  switch (id) {
    case ChemistryId::chemlambda:
      return "chemlambda";
    case ChemistryId::diric:
      return "diric";
    case ChemistryId::ic:
      return "ic";
  }
  return "?";
}

std::optional<ChemistryId> parse_chemistry_id(std::string_view name) {
  for (auto id : {ChemistryId::chemlambda, ChemistryId::diric, ChemistryId::ic}) {
    if (chemistry_name(id) == name) return id;
  }
  return std::nullopt;
}

namespace {

struct MolLine {
  NodeType type;
  std::vector<std::string> formals;
};

MolLine parse_line(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  in >> word;
  auto type = parse_node_type(word);
  if (!type) throw std::logic_error("rule table: unknown type " + word);
  MolLine line{*type, {}};
  while (in >> word) line.formals.push_back(word);
  if (line.formals.size() != arity(*type)) throw std::logic_error("rule table: arity in " + text);
  return line;
}

RewriteRule make_rule(std::string name, GrowthClass growth, std::string lhs_x, std::string lhs_y,
                      std::vector<std::string> rhs,
                      std::vector<std::pair<std::string, std::string>> wires = {}) {
  RewriteRule r;
  r.name = std::move(name);
  r.growth = growth;
  r.lhs_x = std::move(lhs_x);
  r.lhs_y = std::move(lhs_y);
  r.rhs = std::move(rhs);
  r.wires = std::move(wires);

  MolLine x = parse_line(r.lhs_x);
  MolLine y = parse_line(r.lhs_y);
  r.type_x = x.type;
  r.type_y = y.type;
  std::map<std::string, Formal> ids;
  auto id_of = [&](const std::string& f) {
    auto [it, fresh] = ids.try_emplace(f, static_cast<Formal>(ids.size()));
    return it->second;
  };
  int joins = 0;
  for (std::uint8_t i = 0; i < x.formals.size(); ++i) {
    for (std::uint8_t j = 0; j < y.formals.size(); ++j) {
      if (x.formals[i] == y.formals[j]) {
        r.port_x = i;
        r.port_y = j;
        ++joins;
      }
    }
  }
  if (joins != 1) throw std::logic_error("rule " + r.name + ": lhs must share exactly one tag");
  for (std::uint8_t i = 0; i < x.formals.size(); ++i) r.boundary_x[i] = id_of(x.formals[i]);
  for (std::uint8_t j = 0; j < y.formals.size(); ++j) r.boundary_y[j] = id_of(y.formals[j]);
  for (const auto& text : r.rhs) {
    MolLine line = parse_line(text);
    NodeTemplate t{line.type, {}};
    for (std::size_t k = 0; k < line.formals.size(); ++k) t.ports[k] = id_of(line.formals[k]);
    r.templates.push_back(t);
  }
  for (const auto& [a, b] : r.wires) r.template_wires.emplace_back(id_of(a), id_of(b));
  return r;
}

constexpr auto G = GrowthClass::grow;
constexpr auto S = GrowthClass::slim;

std::vector<RewriteRule> chemlambda_bare() {
  return {
      make_rule("A-L", S, "L a b x", "A x c d", {"Arrow a d", "Arrow c b"}),
      make_rule("FI-FOE", S, "FI a b x", "FOE x c d", {"Arrow a c", "Arrow b d"}),
      make_rule("L-FO", G, "L a b x", "FO x c d",
                {"FOE a u1 u2", "L u1 w1 c", "L u2 w2 d", "FI w1 w2 b"}),
      make_rule("L-FOE", G, "L a b x", "FOE x c d",
                {"FOE a u1 u2", "L u1 w1 c", "L u2 w2 d", "FI w1 w2 b"}),
      make_rule("FI-FO", G, "FI a b x", "FO x c d",
                {"FOE a u1 u2", "FOE b w1 w2", "FI u1 w1 c", "FI u2 w2 d"}),
      make_rule("FO-FOE", G, "FO a b x", "FOE x c d",
                {"FOE a u1 u2", "FO u1 w1 c", "FO u2 w2 d", "FI w1 w2 b"}),
      make_rule("FI-T", S, "FI a b x", "T x", {"T a", "T b"}),
      make_rule("FO-T:lo", S, "FO a x c", "T x", {"Arrow a c"}),
      make_rule("FO-T:ro", S, "FO a b x", "T x", {"Arrow a b"}),
      make_rule("Arrow-T", S, "Arrow a x", "T x", {"T a"}),
      make_rule("FRIN-T", S, "FRIN x", "T x", {}),
  };
}

// Terminations through auxiliary ports live here rather than in the shared
// part: in dirIC every node keeps a single active port.
std::vector<RewriteRule> chemlambda_end() {
  return {
      make_rule("A-FO", G, "A a b x", "FO x c d",
                {"FOE a u1 u2", "FOE b w1 w2", "A u1 w1 c", "A u2 w2 d"}),
      make_rule("A-FOE", G, "A a b x", "FOE x c d",
                {"FOE a u1 u2", "FOE b w1 w2", "A u1 w1 c", "A u2 w2 d"}),
      make_rule("A-T", S, "A a b x", "T x", {"T a", "T b"}),
      make_rule("FOE-T:lo", S, "FOE a x c", "T x", {"Arrow a c"}),
      make_rule("FOE-T:ro", S, "FOE a b x", "T x", {"Arrow a b"}),
      make_rule("L-T", S, "L a b x", "T x", {"T a", "FRIN b"}),
  };
}

std::vector<RewriteRule> diric_mod() {
  return {
      make_rule("FI-A", G, "FI a b x", "A x c d",
                {"A a u1 v1", "A b u2 v2", "FOE c u1 u2", "FI v1 v2 d"}),
      make_rule("L-T", S, "L a b x", "T x", {"T a", "FRIN b"}),
      make_rule("FRIN-A", S, "FRIN x", "A x c d", {"T c", "FRIN d"}),
      make_rule("FRIN-FOE", S, "FRIN x", "FOE x c d", {"FRIN c", "FRIN d"}),
  };
}

std::vector<RewriteRule> interaction_combinators() {
  return {
      make_rule("GG", S, "GAMMA x a1 a2", "GAMMA x b1 b2", {}, {{"a1", "b1"}, {"a2", "b2"}}),
      make_rule("DD", S, "DELTA x a1 a2", "DELTA x b1 b2", {}, {{"a1", "b1"}, {"a2", "b2"}}),
      make_rule("GD", G, "GAMMA x a1 a2", "DELTA x b1 b2",
                {"DELTA a1 s1 s2", "DELTA a2 s3 s4", "GAMMA b1 s1 s3", "GAMMA b2 s2 s4"}),
      make_rule("GE", S, "GAMMA x a1 a2", "E x", {"E a1", "E a2"}),
      make_rule("DE", S, "DELTA x a1 a2", "E x", {"E a1", "E a2"}),
      make_rule("EE", S, "E x", "E x", {}),
  };
}

std::vector<RewriteRule> concat(std::vector<RewriteRule> a, std::vector<RewriteRule> b) {
  for (auto& r : b) a.push_back(std::move(r));
  return a;
}

constexpr std::array<NodeType, 8> kDiricTypes{NodeType::A,     NodeType::L, NodeType::FI,
                                              NodeType::FOE,   NodeType::Arrow, NodeType::T,
                                              NodeType::FRIN, NodeType::FROUT};

}  // namespace

std::span<const NodeType> diric_node_types() { return kDiricTypes; }

std::size_t Chemistry::key(NodeType a, std::uint8_t pa, NodeType b, std::uint8_t pb) {
  return ((static_cast<std::size_t>(a) * 3 + pa) * kNodeTypeCount + static_cast<std::size_t>(b)) *
             3 +
         pb;
}

Chemistry::Chemistry(ChemistryId id, Family family, std::vector<RewriteRule> rules)
    : id_(id), family_(family), rules_(std::move(rules)) {
  table_.assign(kNodeTypeCount * 3 * kNodeTypeCount * 3, {-1, false});
  for (std::size_t i = 0; i < rules_.size(); ++i) {
    const auto& r = rules_[i];
    auto put = [&](std::size_t k, bool swapped) {
      if (table_[k].first >= 0 && table_[k].first != static_cast<std::int16_t>(i)) {
        throw std::logic_error("two rules share the lhs key of " + r.name);
      }
      table_[k] = {static_cast<std::int16_t>(i), swapped};
    };
    put(key(r.type_x, r.port_x, r.type_y, r.port_y), false);
    if (family_ == Family::undirected && r.type_x != r.type_y) {
      put(key(r.type_y, r.port_y, r.type_x, r.port_x), true);
    }
  }
}

std::vector<std::string> Chemistry::rule_names() const {
  std::vector<std::string> out;
  for (const auto& r : rules_) out.push_back(r.name);
  if (family_ == Family::directed) out.emplace_back("COMB");
  return out;
}

bool Chemistry::has_rule(std::string_view name) const {
  auto names = rule_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

Chemistry::Hit Chemistry::lookup(NodeType a, std::uint8_t pa, NodeType b, std::uint8_t pb) const {
  if (pa > 2 || pb > 2) return {};
  auto [idx, swapped] = table_[key(a, pa, b, pb)];
  if (idx < 0) return {};
  return {&rules_[static_cast<std::size_t>(idx)], swapped};
}

const Chemistry& ruleset(ChemistryId id) {
  static const Chemistry chemlambda(ChemistryId::chemlambda, Family::directed,
                                    concat(chemlambda_bare(), chemlambda_end()));
  static const Chemistry diric(ChemistryId::diric, Family::directed,
                               concat(chemlambda_bare(), diric_mod()));
  static const Chemistry ic(ChemistryId::ic, Family::undirected, interaction_combinators());
  switch (id) {
    case ChemistryId::chemlambda:
      return chemlambda;
    case ChemistryId::diric:
      return diric;
    case ChemistryId::ic:
      return ic;
  }
  throw std::invalid_argument("unknown chemistry");
}

std::vector<Match> find_matches(const Molecule& m, const Chemistry& c) {
  std::vector<Match> out;
  if (m.family() != c.family()) return out;
  for (const auto& [tag, e] : m.edges()) {
    if (!e.complete() || e.ends[0].node == e.ends[1].node) continue;
    const Node& a = m.node(e.ends[0].node);
    const Node& b = m.node(e.ends[1].node);
    auto hit = c.lookup(a.type, e.ends[0].port, b.type, e.ends[1].port);
    if (hit.rule == nullptr) continue;
    const Node& x = hit.swapped ? b : a;
    const Node& y = hit.swapped ? a : b;
    out.push_back(Match{hit.rule, x.id, y.id, tag, std::max(x.birth_step, y.birth_step)});
  }
  std::sort(out.begin(), out.end(), [](const Match& p, const Match& q) {
    if (p.age != q.age) return p.age < q.age;
    if (p.rule->name != q.rule->name) return p.rule->name < q.rule->name;
    return p.edge < q.edge;
  });
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> conflict_pairs(const std::vector<Match>& matches) {
  std::unordered_map<NodeId, std::vector<std::size_t>> by_node;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    by_node[matches[i].node_x].push_back(i);
    by_node[matches[i].node_y].push_back(i);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& [node, list] : by_node) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      for (std::size_t j = i + 1; j < list.size(); ++j) {
        out.emplace_back(std::min(list[i], list[j]), std::max(list[i], list[j]));
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool match_is_live(const Molecule& m, const Match& match) {
  const Node* x = m.find_node(match.node_x);
  const Node* y = m.find_node(match.node_y);
  if (x == nullptr || y == nullptr) return false;
  const RewriteRule& r = *match.rule;
  if (x->type != r.type_x || y->type != r.type_y) return false;
  if (x->tags[r.port_x] != match.edge || y->tags[r.port_y] != match.edge) return false;
  return true;
}

SpliceOutcome apply_match_into(Molecule& m, const Match& match, std::uint64_t step) {
  if (!match_is_live(m, match)) {
    throw StaleMatch("stale match " + match.rule->name + " on tag " + match.edge);
  }
  const RewriteRule& r = *match.rule;
  SpliceSpec spec;
  spec.remove = {match.node_x, match.node_y};
  spec.add = r.templates;
  spec.wires = r.template_wires;
  for (std::uint8_t k = 0; k < arity(r.type_x); ++k) {
    if (k != r.port_x) spec.boundary.emplace_back(r.boundary_x[k], Port{match.node_x, k});
  }
  for (std::uint8_t k = 0; k < arity(r.type_y); ++k) {
    if (k != r.port_y) spec.boundary.emplace_back(r.boundary_y[k], Port{match.node_y, k});
  }
  return splice_into(m, spec, step);
}

Molecule apply_match(Molecule m, const Match& match, std::uint64_t step) {
  apply_match_into(m, match, step);
  return m;
}

CombOutcome comb_into(Molecule& m) {
  CombOutcome out;
  if (m.family() != Family::directed) return out;
  SpliceSpec spec;
  Formal next = 0;
  for (const auto& [id, n] : m.nodes()) {
    if (n.type != NodeType::Arrow) continue;
    spec.remove.push_back(id);
    spec.boundary.emplace_back(next, Port{id, 0});
    spec.boundary.emplace_back(next + 1, Port{id, 1});
    spec.wires.emplace_back(next, next + 1);
    next += 2;
  }
  if (spec.remove.empty()) return out;
  out.arrows_removed = spec.remove.size();
  out.loops = splice_into(m, spec, 0).loops;
  return out;
}

Molecule comb_pass(Molecule m) {
  comb_into(m);
  return m;
}

GrowthClass rewrite_class(std::string_view rule) {
  if (rule == "COMB") return GrowthClass::neutral;
  for (auto id : {ChemistryId::chemlambda, ChemistryId::diric, ChemistryId::ic}) {
    for (const auto& r : ruleset(id).rules()) {
      if (r.name == rule) return r.growth;
    }
  }
  throw std::invalid_argument("unknown rule " + std::string(rule));
}

std::string export_rules(const Chemistry& c) {
  std::string out;
  for (const auto& r : c.rules()) {
    nlohmann::ordered_json j;
    j["chemistry"] = chemistry_name(c.id());
    j["name"] = r.name;
    j["lhs"] = {{"x", type_name(r.type_x)},
                {"port_x", signature(r.type_x).ports[r.port_x].role},
                {"y", type_name(r.type_y)},
                {"port_y", signature(r.type_y).ports[r.port_y].role}};
    j["pattern"] = {r.lhs_x, r.lhs_y};
    j["rhs"] = r.rhs;
    j["wires"] = nlohmann::json::array();
    for (const auto& [a, b] : r.wires) j["wires"].push_back({a, b});
    j["class"] = growth_name(r.growth);
    out += j.dump();
    out += '\n';
  }
  if (c.family() == Family::directed) {
    nlohmann::ordered_json j;
    j["chemistry"] = chemistry_name(c.id());
    j["name"] = "COMB";
    j["class"] = "NEUTRAL";
    j["post_pass"] = true;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace quinelab
