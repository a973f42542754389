#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "quinelab/molecule.hpp"

namespace quinelab {

// Isomorphism-invariant fingerprint of a molecule. Equal digests are a
// strong hint, not a proof: confirm with isomorphic().
struct Certificate {
  std::array<std::uint8_t, 16> digest{};
  std::size_t node_count = 0;
  std::size_t edge_count = 0;

  friend bool operator==(const Certificate&, const Certificate&) = default;
  friend auto operator<=>(const Certificate&, const Certificate&) = default;

  std::string hex() const;
};

Certificate canonical_certificate(const Molecule& m);

bool isomorphic(const Molecule& a, const Molecule& b);

}  // namespace quinelab
