#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "quinelab/chemistry.hpp"
#include "quinelab/lab.hpp"

namespace quinelab {

struct CatalogEntry {
  std::string name;
  std::string file;
  ChemistryId chemistry = ChemistryId::chemlambda;
  QuineStatus expected = QuineStatus::quine;
  std::optional<std::uint64_t> period;  // under older_first with `strategy`
  GrowthClass strategy = GrowthClass::grow;
  std::string source;
  std::string comments;
  std::string mol_text;
};

class Catalog {
 public:
  Catalog() = default;

  // Reads dir/manifest.json and every mol file it names. Throws
  // std::runtime_error on a missing file or a malformed manifest.
  static Catalog load(const std::filesystem::path& dir);

  const std::vector<CatalogEntry>& entries() const { return entries_; }
  const CatalogEntry* find(std::string_view name) const;

 private:
  std::vector<CatalogEntry> entries_;
};

}  // namespace quinelab
