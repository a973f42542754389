#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quinelab/signature.hpp"

namespace quinelab {

using NodeId = std::uint64_t;
using Tag = std::string;

class MolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Port {
  NodeId node = 0;
  std::uint8_t port = 0;

  friend auto operator<=>(const Port&, const Port&) = default;
};

struct Node {
  NodeId id = 0;
  NodeType type = NodeType::T;
  std::uint64_t birth_step = 0;
  std::array<Tag, 3> tags;
  std::uint8_t tag_count = 0;

  std::span<const Tag> edge_tags() const { return {tags.data(), tag_count}; }
};

// In a complete directed edge ends[0] is the out-port endpoint and ends[1]
// the in-port endpoint. Undirected edges keep insertion order.
struct Edge {
  std::array<Port, 2> ends{};
  std::uint8_t count = 0;

  bool complete() const { return count == 2; }
  Port other(Port p) const { return ends[0] == p ? ends[1] : ends[0]; }
};

struct NodeSpec {
  NodeType type = NodeType::T;
  std::vector<Tag> tags;
  std::uint64_t birth_step = 0;
};

class Molecule {
 public:
  using NodeMap = std::map<NodeId, Node>;
  using EdgeMap = std::map<Tag, Edge, std::less<>>;

  explicit Molecule(Family family = Family::directed) : family_(family) {}

  Family family() const { return family_; }
  const NodeMap& nodes() const { return nodes_; }
  const EdgeMap& edges() const { return edges_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const Node& node(NodeId id) const;
  const Node* find_node(NodeId id) const;
  const Edge* find_edge(std::string_view tag) const;
  const Tag& tag_at(Port p) const { return node(p.node).tags[p.port]; }
  std::optional<Port> partner(Port p) const;

  std::uint64_t loops_harvested() const { return loops_; }
  std::uint64_t max_birth_step() const;
  std::array<std::size_t, kNodeTypeCount> type_counts() const;

  // Low-level surgery. These keep the edge index consistent but do not
  // check molecule invariants; splice() and assemble() are the checked
  // entry points.
  NodeId add_node(NodeType type, std::span<const Tag> tags, std::uint64_t birth_step);
  NodeId add_node_with_id(NodeId id, NodeType type, std::span<const Tag> tags,
                          std::uint64_t birth_step);
  void remove_node(NodeId id);
  void retag(Port p, const Tag& tag);
  Tag fresh_tag();
  void add_loops(std::uint64_t n) { loops_ += n; }

  // No validation at all: validate() reports what is wrong.
  static Molecule from_specs_unchecked(Family family, std::span<const NodeSpec> specs);

 private:
  void link(const Tag& tag, Port p);
  void unlink(const Tag& tag, Port p);

  Family family_;
  NodeMap nodes_;
  EdgeMap edges_;
  std::uint64_t loops_ = 0;
  std::uint64_t next_fresh_ = 0;
  NodeId next_id_ = 1;
};

// Checks every invariant and closes tags used once with FRIN/FROUT
// (directed) or FREE (undirected). Throws MolError.
Molecule assemble(Family family, std::span<const NodeSpec> specs);

Molecule parse_mol(std::string_view text, Family family);

// Boundary nodes are omitted unless both ends of their edge are boundary
// nodes, so parse_mol restores them. Order is birth step, then tags.
std::string serialize_mol(const Molecule& m);

std::vector<std::string> validate(const Molecule& m);

std::vector<Molecule> connected_components(const Molecule& m);

// Tags of `b` are suffixed so the two parts stay disjoint.
Molecule disjoint_union(const Molecule& a, const Molecule& b);

// Splice: remove nodes, add templated nodes and reconnect the dangling
// half-edges.
//
// Formals name half-edges of the rewrite. A boundary formal is bound to a
// port of a removed node and must be used exactly once, either on an added
// node (which then takes that port's place) or as one end of a wire (which
// joins two boundary half-edges directly). Any other formal is internal and
// must appear on exactly two added ports; it receives a fresh tag.
// Chains of wires that close on themselves are counted as harvested loops.
using Formal = std::uint32_t;

struct NodeTemplate {
  NodeType type = NodeType::T;
  std::array<Formal, 3> ports{};
};

struct SpliceSpec {
  std::vector<NodeId> remove;
  std::vector<NodeTemplate> add;
  std::vector<std::pair<Formal, Formal>> wires;
  std::vector<std::pair<Formal, Port>> boundary;
};

struct SpliceOutcome {
  std::vector<NodeId> added;
  std::uint64_t loops = 0;
};

SpliceOutcome splice_into(Molecule& m, const SpliceSpec& spec, std::uint64_t step);
Molecule splice(Molecule m, const SpliceSpec& spec, std::uint64_t step);

}  // namespace quinelab
