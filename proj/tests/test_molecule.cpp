#include <doctest.h>

#include <map>
#include <random>

#include "quinelab/certificate.hpp"
#include "quinelab/chemistry.hpp"
#include "quinelab/molecule.hpp"
#include "test_support.hpp"

using namespace quinelab;

namespace {

std::size_t count_type(const Molecule& m, NodeType t) {
  return m.type_counts()[static_cast<std::size_t>(t)];
}

Molecule dir(std::string_view text) { return parse_mol(text, Family::directed); }

}  // namespace

TEST_CASE("parse_mol: empty and comments") {
  CHECK(dir("").node_count() == 0);
  CHECK(dir("# only a comment\n\n   \n").node_count() == 0);
}

TEST_CASE("parse_mol closes free tags with FRIN/FROUT") {
  Molecule m = dir("L e e t\nA t z r");
  CHECK(m.node_count() == 4);
  CHECK(count_type(m, NodeType::L) == 1);
  CHECK(count_type(m, NodeType::A) == 1);
  CHECK(count_type(m, NodeType::FRIN) == 1);
  CHECK(count_type(m, NodeType::FROUT) == 1);
  const Edge* z = m.find_edge("z");
  REQUIRE(z);
  CHECK(m.node(z->ends[0].node).type == NodeType::FRIN);
  const Edge* r = m.find_edge("r");
  REQUIRE(r);
  CHECK(m.node(r->ends[1].node).type == NodeType::FROUT);
  for (const auto& [id, n] : m.nodes()) CHECK(n.birth_step == 0);
  CHECK(validate(m).empty());
}

TEST_CASE("parse_mol errors") {
  CHECK_THROWS_AS(dir("A x x x"), MolError);                   // tag used 3 times
  CHECK_THROWS_AS(dir("Q a b"), MolError);                     // unknown type
  CHECK_THROWS_AS(dir("A a b"), MolError);                     // wrong tag count
  CHECK_THROWS_AS(dir("A a b c\nFI a d e"), MolError);         // two in-ports
  CHECK_THROWS_AS(dir("L a b c\nFO d b e"), MolError);         // L.lo out, FO.lo out
  CHECK_THROWS_AS(dir("GAMMA a b c"), MolError);               // mixed families
  CHECK_THROWS_AS(parse_mol("L a b c", Family::undirected), MolError);
}

TEST_CASE("undirected parse closes free ports with FREE") {
  Molecule m = parse_mol("GAMMA x a b\nDELTA x a c", Family::undirected);
  CHECK(m.node_count() == 4);
  CHECK(count_type(m, NodeType::FREE) == 2);
  CHECK(validate(m).empty());
}

TEST_CASE("serialize_mol") {
  CHECK(serialize_mol(Molecule{}) == "");
  Molecule m = dir("A t z r\nL e e t");
  CHECK(serialize_mol(m) == "L e e t\nA t z r\n");
  CHECK(isomorphic(dir(serialize_mol(m)), m));

  // boundary nodes joined to each other are kept
  Molecule wire = dir("FRIN z\nFROUT z");
  CHECK(wire.node_count() == 2);
  CHECK(serialize_mol(wire) == "FRIN z\nFROUT z\n");
}

TEST_CASE("serialize_mol after tag renaming differs only in tag names") {
  Molecule a = dir("L e e t\nA t z r");
  Molecule b = dir("L q q w\nA w y s");
  std::string sa = serialize_mol(a);
  std::string sb = serialize_mol(b);
  CHECK(sa != sb);
  CHECK(isomorphic(dir(sa), dir(sb)));
  // same skeleton once tag names are blanked
  auto skeleton = [](std::string s) {
    for (auto& c : s) {
      if (c >= 'a' && c <= 'z') c = '_';
    }
    return s;
  };
  CHECK(skeleton(sa) == skeleton(sb));
}

TEST_CASE("validate reports violations as data") {
  CHECK(validate(dir("L e e t\nA t z r")).empty());

  std::vector<NodeSpec> two_out{{NodeType::L, {"a", "x", "b"}, 0},
                                {NodeType::FO, {"c", "x", "d"}, 0}};
  auto m = Molecule::from_specs_unchecked(Family::directed, two_out);
  auto report = validate(m);
  std::size_t about_x = 0;
  for (const auto& v : report) about_x += v.find("tag x") != std::string::npos;
  CHECK(about_x == 1);

  std::vector<NodeSpec> short_a{{NodeType::A, {"a", "b"}, 0}, {NodeType::FRIN, {"a"}, 0},
                                {NodeType::FRIN, {"b"}, 0}};
  auto bad = validate(Molecule::from_specs_unchecked(Family::directed, short_a));
  REQUIRE(bad.size() == 1);
  CHECK(bad[0].find("node 1 (A)") != std::string::npos);
}

TEST_CASE("certificates ignore names, ids and order") {
  Molecule a = dir("L e e t\nA t z r");
  Molecule b = dir("A w y s\nL q q w");
  CHECK(canonical_certificate(a) == canonical_certificate(b));
  CHECK(isomorphic(a, b));
  Molecule c = dir("L e e t\nA t z r\nT q\nFRIN q");
  CHECK(canonical_certificate(a) != canonical_certificate(c));
  CHECK_FALSE(isomorphic(a, c));
}

TEST_CASE("isomorphic basics") {
  Molecule m = dir("L e e t\nA t z r");
  CHECK(isomorphic(m, m));
  CHECK_FALSE(isomorphic(m, dir("L e e t\nA t z r\nT q")));
  // same node multiset, different wiring: L.lo vs L.ro feeding A.li
  CHECK_FALSE(isomorphic(dir("L a b c\nA c d e"), dir("L a c b\nA c d e")));
}

TEST_CASE("property: relabelling preserves isomorphism and certificates") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    bool ic = i % 3 == 0;
    Molecule m = ic ? testing::random_test_molecule(rng, Family::undirected, testing::ic_types(),
                                                    1 + rng() % 20)
                    : testing::random_test_molecule(rng, Family::directed,
                                                    testing::chemlambda_types(), 1 + rng() % 20);
    Molecule r = testing::relabeled(m, rng);
    CHECK(isomorphic(m, r));
    CHECK(canonical_certificate(m) == canonical_certificate(r));
  }
}

TEST_CASE("certificate collisions are confirmed isomorphic") {
  // 1000 random molecules: whenever two digests agree the explicit
  // backtracking check must agree too, so non-isomorphic molecules get
  // pairwise distinct digests.
  std::mt19937_64 rng(11);
  std::map<Certificate, std::vector<Molecule>> by_digest;
  for (int i = 0; i < 1000; ++i) {
    Molecule m = testing::random_test_molecule(rng, Family::directed, testing::chemlambda_types(),
                                               2 + rng() % 10);
    by_digest[canonical_certificate(m)].push_back(std::move(m));
  }
  std::size_t groups = 0;
  for (const auto& [cert, ms] : by_digest) {
    ++groups;
    for (std::size_t j = 1; j < ms.size(); ++j) CHECK(isomorphic(ms[0], ms[j]));
  }
  CHECK(groups > 900);
}

TEST_CASE("connected_components") {
  CHECK(connected_components(Molecule{}).empty());
  Molecule m = dir("L e e t\nA t z r");
  auto one = connected_components(m);
  REQUIRE(one.size() == 1);
  CHECK(isomorphic(one[0], m));

  auto two = connected_components(disjoint_union(m, m));
  REQUIRE(two.size() == 2);
  CHECK(isomorphic(two[0], m));
  CHECK(isomorphic(two[1], m));

  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    Molecule r = testing::random_test_molecule(rng, Family::directed, testing::chemlambda_types(),
                                               1 + rng() % 15);
    std::size_t total = 0;
    for (const auto& c : connected_components(r)) {
      CHECK(validate(c).empty());
      total += c.node_count();
    }
    CHECK(total == r.node_count());
  }
}

TEST_CASE("splice: identity and like-for-like replacement") {
  Molecule m = dir("L e e t\nA t z r\nT q\nFRIN q");
  Molecule same = splice(m, SpliceSpec{}, 1);
  CHECK(isomorphic(same, m));
  CHECK(serialize_mol(same) == serialize_mol(m));

  NodeId t_id = m.find_edge("q")->ends[1].node;
  SpliceSpec swap_t;
  swap_t.remove = {t_id};
  swap_t.add = {NodeTemplate{NodeType::T, {0, 0, 0}}};
  swap_t.boundary = {{0, Port{t_id, 0}}};
  Molecule out = splice(m, swap_t, 5);
  CHECK(isomorphic(out, m));
  CHECK(out.node_count() == m.node_count());
  bool stamped = false;
  for (const auto& [id, n] : out.nodes()) stamped = stamped || (n.type == NodeType::T && n.birth_step == 5);
  CHECK(stamped);
}

TEST_CASE("splice: beta surgery by hand") {
  Molecule m = dir("L e e t\nA t z r");
  NodeId l = m.find_edge("t")->ends[0].node;
  NodeId a = m.find_edge("t")->ends[1].node;
  // L[a,b,x] A[x,c,d] -> Arrow[a,d] Arrow[c,b]
  SpliceSpec beta;
  beta.remove = {l, a};
  beta.add = {NodeTemplate{NodeType::Arrow, {0, 3, 0}}, NodeTemplate{NodeType::Arrow, {2, 1, 0}}};
  beta.boundary = {{0, Port{l, 0}}, {1, Port{l, 1}}, {2, Port{a, 1}}, {3, Port{a, 2}}};
  Molecule out = splice(m, beta, 1);
  CHECK(validate(out).empty());
  CHECK(isomorphic(out, dir("FRIN z\nArrow z m\nArrow m r\nFROUT r")));
  CHECK(out.node_count() == m.node_count() - 2 + 2);
  // untouched boundary nodes keep their tags
  CHECK(out.find_edge("z"));
  CHECK(out.find_edge("r"));
}

TEST_CASE("splice errors") {
  Molecule m = dir("L e e t\nA t z r");
  NodeId l = m.find_edge("t")->ends[0].node;
  NodeId a = m.find_edge("t")->ends[1].node;
  SpliceSpec uncovered;
  uncovered.remove = {a};
  CHECK_THROWS_AS(splice(m, uncovered, 1), MolError);

  SpliceSpec wrong_dir;
  wrong_dir.remove = {l, a};
  // Arrow[c,b] turned around: Arrow.i bound to L.lo (an out half-edge)
  wrong_dir.add = {NodeTemplate{NodeType::Arrow, {0, 3, 0}}, NodeTemplate{NodeType::Arrow, {1, 2, 0}}};
  wrong_dir.boundary = {{0, Port{l, 0}}, {1, Port{l, 1}}, {2, Port{a, 1}}, {3, Port{a, 2}}};
  CHECK_THROWS_AS(splice(m, wrong_dir, 1), MolError);
}

TEST_CASE("splice conservation on random comb passes") {
  std::mt19937_64 rng(5);
  std::vector<NodeType> types{NodeType::Arrow, NodeType::Arrow, NodeType::A, NodeType::L};
  for (int i = 0; i < 200; ++i) {
    Molecule m = testing::random_test_molecule(rng, Family::directed, types, 1 + rng() % 12);
    auto arrows = m.type_counts()[static_cast<std::size_t>(NodeType::Arrow)];
    Molecule out = m;
    CombOutcome c = comb_into(out);
    CHECK(c.arrows_removed == arrows);
    CHECK(out.node_count() == m.node_count() - arrows);
    CHECK(validate(out).empty());
    // non-Arrow nodes keep ids and births
    for (const auto& [id, n] : out.nodes()) {
      REQUIRE(m.find_node(id));
      CHECK(m.node(id).type == n.type);
    }
  }
}

TEST_CASE("property: mol round-trip") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    bool ic = i % 2 == 0;
    Family f = ic ? Family::undirected : Family::directed;
    Molecule m = testing::random_test_molecule(
        rng, f, ic ? testing::ic_types() : testing::chemlambda_types(), rng() % 25);
    Molecule back = parse_mol(serialize_mol(m), f);
    CHECK(isomorphic(back, m));
    CHECK(serialize_mol(back) == serialize_mol(m));
  }
}
