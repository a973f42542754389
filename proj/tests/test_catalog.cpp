#include <doctest.h>

#include "quinelab/catalog.hpp"
#include "quinelab/translate.hpp"

using namespace quinelab;

namespace {

const Catalog& catalog() {
  static const Catalog c = Catalog::load(QUINELAB_CATALOG_DIR);
  return c;
}

Family family_of(ChemistryId id) {
  return id == ChemistryId::ic ? Family::undirected : Family::directed;
}

}  // namespace

TEST_CASE("catalog entries keep their recorded verdicts") {
  REQUIRE(catalog().entries().size() >= 10);
  for (const auto& e : catalog().entries()) {
    CAPTURE(e.name);
    Molecule m = parse_mol(e.mol_text, family_of(e.chemistry));
    CHECK(validate(m).empty());
    VerifyOptions opt;
    opt.chemistry = e.chemistry;
    opt.strategy = e.strategy;
    opt.horizon = 200;
    opt.max_nodes = 200;
    auto v = verify_quine(m, opt);
    CHECK(v.status == e.expected);
    if (e.period) CHECK(v.period == *e.period);
    CHECK_FALSE(e.source.empty());
  }
}

TEST_CASE("catalog IC quines translate with doubled counts") {
  std::size_t seen = 0;
  for (const auto& e : catalog().entries()) {
    if (e.chemistry != ChemistryId::ic) continue;
    CAPTURE(e.name);
    ++seen;
    Molecule m = parse_mol(e.mol_text, Family::undirected);
    auto t = ic_to_diric(m);
    CHECK(t.mol.node_count() == 2 * m.node_count());
    CHECK(t.mol.edge_count() == 2 * m.edge_count());
  }
  CHECK(seen >= 3);
  auto src = catalog().find("ic_p4");
  auto dst = catalog().find("ic_p4_translated");
  REQUIRE(src);
  REQUIRE(dst);
  CHECK(isomorphic(ic_to_diric(parse_mol(src->mol_text, Family::undirected)).mol,
                   parse_mol(dst->mol_text, Family::directed)));
}
