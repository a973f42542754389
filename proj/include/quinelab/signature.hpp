#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace quinelab {

enum class Family : std::uint8_t { directed, undirected };

enum class Dir : std::uint8_t { in, out, free };

// Directed chemistries (chemlambda, dirIC) share the first nine types;
// GAMMA/DELTA/E are the interaction combinators. FREE closes a dangling
// port of an undirected molecule, the way FRIN/FROUT do for directed ones.
enum class NodeType : std::uint8_t {
  L,
  A,
  FI,
  FO,
  FOE,
  Arrow,
  T,
  FRIN,
  FROUT,
  GAMMA,
  DELTA,
  E,
  FREE,
};

inline constexpr std::size_t kNodeTypeCount = 13;

struct PortSpec {
  std::string_view role;
  Dir dir;
};

struct NodeSignature {
  NodeType type;
  std::string_view name;
  Family family;
  std::uint8_t arity;
  std::array<PortSpec, 3> ports;
};

const NodeSignature& signature(NodeType t);

inline std::string_view type_name(NodeType t) { return signature(t).name; }
inline std::uint8_t arity(NodeType t) { return signature(t).arity; }
inline Dir port_dir(NodeType t, std::uint8_t port) { return signature(t).ports[port].dir; }
inline Family family_of(NodeType t) { return signature(t).family; }

std::optional<NodeType> parse_node_type(std::string_view name);

// Node types belonging to a family, in enum order.
std::span<const NodeType> types_of(Family f);

// One-port nodes that only close a free half-edge.
inline bool is_boundary(NodeType t) {
  return t == NodeType::FRIN || t == NodeType::FROUT || t == NodeType::FREE;
}

std::string_view family_name(Family f);

}  // namespace quinelab
