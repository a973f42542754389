#include "quinelab/catalog.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace quinelab {

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("catalog: cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuineStatus parse_status(const std::string& s) {
  if (s == "quine") return QuineStatus::quine;
  if (s == "dead") return QuineStatus::dead;
  if (s == "aperiodic") return QuineStatus::aperiodic_within_horizon;
  throw std::runtime_error("catalog: unknown status " + s);
}

}  // namespace

Catalog Catalog::load(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("catalog: bad manifest: ") + e.what());
  }
  Catalog c;
  try {
    for (const auto& j : manifest.at("entries")) {
      CatalogEntry e;
      e.name = j.at("name").get<std::string>();
      e.file = j.at("file").get<std::string>();
      auto chem = parse_chemistry_id(j.at("chemistry").get<std::string>());
      if (!chem) throw std::runtime_error("catalog: unknown chemistry in " + e.name);
      e.chemistry = *chem;
      e.expected = parse_status(j.at("expected").get<std::string>());
      if (j.contains("period")) e.period = j["period"].get<std::uint64_t>();
      if (j.contains("strategy")) {
        auto s = parse_strategy(j["strategy"].get<std::string>());
        if (!s) throw std::runtime_error("catalog: unknown strategy in " + e.name);
        e.strategy = *s;
      }
      e.source = j.value("source", "");
      e.comments = j.value("comments", "");
      e.mol_text = slurp(dir / e.file);
      if (c.find(e.name)) throw std::runtime_error("catalog: duplicate name " + e.name);
      c.entries_.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("catalog: bad manifest: ") + e.what());
  }
  return c;
}

const CatalogEntry* Catalog::find(std::string_view name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

}  // namespace quinelab
