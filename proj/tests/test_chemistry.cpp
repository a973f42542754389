#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "quinelab/certificate.hpp"
#include "quinelab/chemistry.hpp"
#include "test_support.hpp"

using namespace quinelab;

namespace {

Molecule dir(std::string_view text) { return parse_mol(text, Family::directed); }

std::size_t count_type(const Molecule& m, NodeType t) {
  return m.type_counts()[static_cast<std::size_t>(t)];
}

bool has(const std::vector<std::string>& names, std::string_view n) {
  return std::find(names.begin(), names.end(), n) != names.end();
}

std::vector<NodeType> diric_types_vec() {
  auto s = diric_node_types();
  std::vector<NodeType> out;
  for (auto t : s) {
    if (t != NodeType::FRIN && t != NodeType::FROUT) out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("rule sets") {
  auto d = ruleset(ChemistryId::diric).rule_names();
  CHECK_FALSE(has(d, "A-FO"));
  CHECK_FALSE(has(d, "A-FOE"));
  CHECK(has(d, "FI-A"));

  auto c = ruleset(ChemistryId::chemlambda).rule_names();
  for (auto n : {"A-L", "FI-FOE", "L-FO", "L-FOE", "FI-FO", "FO-FOE", "A-FO", "A-FOE", "A-T", "FI-T",
                 "FO-T:lo", "FO-T:ro", "FOE-T:lo", "FOE-T:ro", "Arrow-T", "FRIN-T", "L-T", "COMB"}) {
    CHECK_MESSAGE(has(c, n), n);
  }
  CHECK_FALSE(has(c, "FI-A"));

  // both directed chemistries contain the shared part
  for (const auto& r : ruleset(ChemistryId::chemlambda).rules()) {
    if (r.name.starts_with("A-F") || r.name.starts_with("A-T") || r.name.starts_with("FOE-T") ||
        r.name == "L-T") {
      continue;
    }
    CHECK_MESSAGE(has(d, r.name), r.name);
  }

  auto ic = ruleset(ChemistryId::ic).rule_names();
  CHECK(ic == std::vector<std::string>{"GG", "DD", "GD", "GE", "DE", "EE"});

  CHECK(parse_chemistry_id("diric") == ChemistryId::diric);
  CHECK_FALSE(parse_chemistry_id("dirIC?").has_value());
}

TEST_CASE("rule tables: boundary maps are direction preserving bijections") {
  for (auto id : {ChemistryId::chemlambda, ChemistryId::diric, ChemistryId::ic}) {
    const Chemistry& c = ruleset(id);
    for (const auto& r : c.rules()) {
      CAPTURE(r.name);
      if (c.family() == Family::directed) {
        CHECK(port_dir(r.type_x, r.port_x) == Dir::out);
        CHECK(port_dir(r.type_y, r.port_y) == Dir::in);
      } else {
        CHECK(r.port_x == 0);
        CHECK(r.port_y == 0);
      }
      // count formal uses over rhs ports and wires
      std::map<Formal, int> uses;
      std::map<Formal, Dir> rhs_dir;
      for (const auto& t : r.templates) {
        for (std::uint8_t k = 0; k < arity(t.type); ++k) {
          ++uses[t.ports[k]];
          rhs_dir[t.ports[k]] = port_dir(t.type, k);
        }
      }
      for (auto [a, b] : r.template_wires) {
        ++uses[a];
        ++uses[b];
      }
      std::set<Formal> boundary;
      auto check_boundary = [&](NodeType type, std::uint8_t joined, const std::array<Formal, 3>& f) {
        for (std::uint8_t k = 0; k < arity(type); ++k) {
          if (k == joined) continue;
          CHECK(uses[f[k]] == 1);
          boundary.insert(f[k]);
          if (rhs_dir.count(f[k])) CHECK(rhs_dir[f[k]] == port_dir(type, k));
        }
      };
      check_boundary(r.type_x, r.port_x, r.boundary_x);
      check_boundary(r.type_y, r.port_y, r.boundary_y);
      for (auto [f, n] : uses) {
        if (!boundary.count(f)) CHECK(n == 2);
      }
    }
  }
}

TEST_CASE("find_matches examples") {
  CHECK(find_matches(Molecule{}, ruleset(ChemistryId::chemlambda)).empty());
  auto ms = find_matches(dir("L e e t\nA t z r"), ruleset(ChemistryId::chemlambda));
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].rule_name() == "A-L");
  CHECK(ms[0].edge == "t");
  CHECK(conflict_pairs(ms).empty());
}

TEST_CASE("chemlambda conflict witness") {
  // A.li fed by L.ro, A.mo feeding FOE.mi
  Molecule w = dir("L e e t\nA t c u\nFOE u d f\nFI d f c");
  CHECK(w.node_count() == 4);
  auto cm = find_matches(w, ruleset(ChemistryId::chemlambda));
  REQUIRE(cm.size() == 2);
  CHECK(cm[0].rule_name() == "A-FOE");
  CHECK(cm[1].rule_name() == "A-L");
  CHECK(cm[0].node_x == cm[1].node_y);  // the A node
  auto pairs = conflict_pairs(cm);
  CHECK(pairs.size() == 1);
  auto dm = find_matches(w, ruleset(ChemistryId::diric));
  REQUIRE(dm.size() == 1);
  CHECK(dm[0].rule_name() == "A-L");
  CHECK(conflict_pairs(dm).empty());
}

TEST_CASE("dirIC types have exactly one active port") {
  // Oracle: for each node type, collect the ports through which it occurs in
  // some rule's lhs.
  const Chemistry& d = ruleset(ChemistryId::diric);
  std::map<NodeType, std::set<int>> active;
  for (const auto& r : d.rules()) {
    active[r.type_x].insert(r.port_x);
    active[r.type_y].insert(r.port_y);
  }
  for (auto t : diric_node_types()) {
    CAPTURE(type_name(t));
    if (t == NodeType::FROUT) {
      CHECK(active[t].empty());
    } else {
      CHECK(active[t].size() == 1);
    }
  }
  // chemlambda breaks this for A, FO and FOE
  const Chemistry& c = ruleset(ChemistryId::chemlambda);
  std::map<NodeType, std::set<int>> cactive;
  for (const auto& r : c.rules()) {
    cactive[r.type_x].insert(r.port_x);
    cactive[r.type_y].insert(r.port_y);
  }
  CHECK(cactive[NodeType::A].size() == 2);
}

TEST_CASE("property: dirIC matches never conflict") {
  std::mt19937_64 rng(21);
  auto types = diric_types_vec();
  const Chemistry& d = ruleset(ChemistryId::diric);
  for (int i = 0; i < 2000; ++i) {
    Molecule m = testing::random_test_molecule(rng, Family::directed, types, 1 + rng() % 20);
    CHECK(conflict_pairs(find_matches(m, d)).empty());
  }
}

TEST_CASE("find_matches agrees with a brute-force scan") {
  std::mt19937_64 rng(4);
  for (auto id : {ChemistryId::chemlambda, ChemistryId::diric, ChemistryId::ic}) {
    const Chemistry& c = ruleset(id);
    bool ic = id == ChemistryId::ic;
    for (int i = 0; i < 300; ++i) {
      Molecule m = testing::random_test_molecule(
          rng, c.family(), ic ? testing::ic_types() : testing::chemlambda_types(), 1 + rng() % 15);
      std::set<std::string> expected;
      for (const auto& [tag, e] : m.edges()) {
        if (!e.complete() || e.ends[0].node == e.ends[1].node) continue;
        for (const auto& r : c.rules()) {
          for (int flip = 0; flip < 2; ++flip) {
            Port px = e.ends[flip];
            Port py = e.ends[1 - flip];
            if (m.node(px.node).type == r.type_x && px.port == r.port_x &&
                m.node(py.node).type == r.type_y && py.port == r.port_y) {
              expected.insert(r.name + "@" + tag);
            }
          }
        }
      }
      std::set<std::string> got;
      for (const auto& mt : find_matches(m, c)) got.insert(mt.rule->name + "@" + mt.edge);
      CHECK(got == expected);
    }
  }
}

TEST_CASE("apply_match examples") {
  const Chemistry& cl = ruleset(ChemistryId::chemlambda);
  Molecule m = dir("L e e t\nA t z r");
  auto ms = find_matches(m, cl);
  Molecule beta = apply_match(m, ms[0], 1);
  CHECK(count_type(beta, NodeType::Arrow) == 2);
  CHECK(validate(beta).empty());
  Molecule combed = comb_pass(beta);
  CHECK(isomorphic(combed, dir("FRIN z\nFROUT z")));
  CHECK(combed.loops_harvested() == 0);

  Molecule at = dir("A a b x\nT x");
  auto am = find_matches(at, cl);
  REQUIRE(am.size() == 1);
  CHECK(am[0].rule_name() == "A-T");
  CHECK(isomorphic(apply_match(at, am[0], 1), dir("T a\nT b")));

  Molecule lfoe = dir("L a b x\nFOE x c d");
  auto lm = find_matches(lfoe, cl);
  REQUIRE(lm.size() == 1);
  Molecule grown = apply_match(lfoe, lm[0], 3);
  CHECK(grown.node_count() - count_type(grown, NodeType::FRIN) - count_type(grown, NodeType::FROUT) == 4);
  CHECK(isomorphic(grown, dir("FOE a u1 u2\nL u1 w1 c\nL u2 w2 d\nFI w1 w2 b")));
  for (const auto& [id, n] : grown.nodes()) {
    if (!is_boundary(n.type)) CHECK(n.birth_step == 3);
  }

  CHECK_THROWS_AS(apply_match(grown, lm[0], 4), StaleMatch);
}

TEST_CASE("IC rules by hand") {
  const Chemistry& ic = ruleset(ChemistryId::ic);
  auto und = [](std::string_view t) { return parse_mol(t, Family::undirected); };
  auto one = [&](std::string_view t) {
    Molecule m = und(t);
    auto ms = find_matches(m, ic);
    REQUIRE(ms.size() == 1);
    return apply_match(m, ms[0], 1);
  };
  CHECK(isomorphic(one("GAMMA x a b\nGAMMA x c d"), und("FREE a\nFREE a\nFREE b\nFREE b")));
  CHECK(isomorphic(one("GAMMA x a b\nE x"), und("E a\nE b")));
  CHECK(one("E x\nE x").empty());
  CHECK(isomorphic(one("GAMMA x a b\nDELTA x c d"),
                   und("DELTA a s1 s2\nDELTA b s3 s4\nGAMMA c s1 s3\nGAMMA d s2 s4")));
  // annihilation on a pair wired into itself leaves a loop
  Molecule loop = one("GAMMA x a a\nGAMMA x b b");
  CHECK(loop.empty());
  CHECK(loop.loops_harvested() == 1);
}

TEST_CASE("comb_pass") {
  Molecule plain = dir("L e e t\nA t z r");
  CHECK(serialize_mol(comb_pass(plain)) == serialize_mol(plain));

  Molecule chain = dir("L a b x\nArrow x y\nArrow y z\nA z c d");
  Molecule c = comb_pass(chain);
  CHECK(count_type(c, NodeType::Arrow) == 0);
  CHECK(isomorphic(c, dir("L a b x\nA x c d")));

  Molecule cycle = dir("Arrow p q\nArrow q p\nT z");
  Molecule cc = comb_pass(cycle);
  CHECK(cc.loops_harvested() == 1);
  CHECK(isomorphic(cc, dir("T z")));
}

TEST_CASE("rewrite_class") {
  CHECK(rewrite_class("A-L") == GrowthClass::slim);
  CHECK(rewrite_class("L-FOE") == GrowthClass::grow);
  CHECK(rewrite_class("COMB") == GrowthClass::neutral);
  for (auto n : {"L-FO", "L-FOE", "A-FO", "A-FOE", "FI-FO", "FO-FOE", "FI-A", "GD"}) {
    CHECK(rewrite_class(n) == GrowthClass::grow);
  }
  for (auto n : {"A-L", "FI-FOE", "A-T", "FO-T:lo", "Arrow-T", "FRIN-T", "L-T", "FRIN-A", "GG", "DD",
                 "GE", "DE", "EE"}) {
    CHECK(rewrite_class(n) == GrowthClass::slim);
  }
  CHECK_THROWS_AS(rewrite_class("NOPE"), std::invalid_argument);
}

TEST_CASE("property: node-count ledger and boundary preservation") {
  std::mt19937_64 rng(99);
  for (auto id : {ChemistryId::chemlambda, ChemistryId::diric, ChemistryId::ic}) {
    const Chemistry& c = ruleset(id);
    bool ic = id == ChemistryId::ic;
    for (int i = 0; i < 400; ++i) {
      Molecule m = testing::random_test_molecule(
          rng, c.family(), ic ? testing::ic_types() : testing::chemlambda_types(), 1 + rng() % 15);
      for (const auto& match : find_matches(m, c)) {
        CAPTURE(match.rule->name);
        CAPTURE(serialize_mol(m));
        Molecule out = apply_match(m, match, 7);
        CHECK(validate(out).empty());
        // FRIN/FROUT/FREE closures are not counted: the rule only sees the
        // two lhs nodes, so real node count moves by |rhs| - 2 exactly
        CHECK(static_cast<long>(out.node_count()) - static_cast<long>(m.node_count()) ==
              match.rule->node_delta());
        for (const auto& [tag, e] : m.edges()) {
          bool touches = false;
          for (int k = 0; k < e.count; ++k) {
            touches = touches || e.ends[k].node == match.node_x || e.ends[k].node == match.node_y;
          }
          if (touches) continue;
          const Edge* after = out.find_edge(tag);
          REQUIRE(after);
          CHECK(after->ends == e.ends);
        }
        // determinism
        CHECK(serialize_mol(apply_match(m, match, 7)) == serialize_mol(out));
        Molecule combed = comb_pass(out);
        CHECK(count_type(combed, NodeType::Arrow) == 0);
        CHECK(out.node_count() - combed.node_count() == count_type(out, NodeType::Arrow));
      }
    }
  }
}

TEST_CASE("export_rules") {
  std::istringstream in(export_rules(ruleset(ChemistryId::chemlambda)));
  std::string line;
  std::size_t n = 0;
  bool saw_comb = false;
  while (std::getline(in, line)) {
    auto j = nlohmann::json::parse(line);
    CHECK(j.contains("name"));
    CHECK(j.contains("class"));
    saw_comb = saw_comb || j["name"] == "COMB";
    ++n;
  }
  CHECK(n == ruleset(ChemistryId::chemlambda).rule_names().size());
  CHECK(saw_comb);
}
