#include "quinelab/signature.hpp"

namespace quinelab {

namespace {

constexpr Family D = Family::directed;
constexpr Family U = Family::undirected;
constexpr PortSpec none{"", Dir::free};

// Ports are listed in mol column order.
constexpr std::array<NodeSignature, kNodeTypeCount> kSignatures{{
    {NodeType::L, "L", D, 3, {{{"mi", Dir::in}, {"lo", Dir::out}, {"ro", Dir::out}}}},
    {NodeType::A, "A", D, 3, {{{"li", Dir::in}, {"ri", Dir::in}, {"mo", Dir::out}}}},
    {NodeType::FI, "FI", D, 3, {{{"li", Dir::in}, {"ri", Dir::in}, {"mo", Dir::out}}}},
    {NodeType::FO, "FO", D, 3, {{{"mi", Dir::in}, {"lo", Dir::out}, {"ro", Dir::out}}}},
    {NodeType::FOE, "FOE", D, 3, {{{"mi", Dir::in}, {"lo", Dir::out}, {"ro", Dir::out}}}},
    {NodeType::Arrow, "Arrow", D, 2, {{{"i", Dir::in}, {"o", Dir::out}, none}}},
    {NodeType::T, "T", D, 1, {{{"i", Dir::in}, none, none}}},
    {NodeType::FRIN, "FRIN", D, 1, {{{"o", Dir::out}, none, none}}},
    {NodeType::FROUT, "FROUT", D, 1, {{{"i", Dir::in}, none, none}}},
    {NodeType::GAMMA, "GAMMA", U, 3, {{{"p", Dir::free}, {"a1", Dir::free}, {"a2", Dir::free}}}},
    {NodeType::DELTA, "DELTA", U, 3, {{{"p", Dir::free}, {"a1", Dir::free}, {"a2", Dir::free}}}},
    {NodeType::E, "E", U, 1, {{{"p", Dir::free}, none, none}}},
    {NodeType::FREE, "FREE", U, 1, {{{"p", Dir::free}, none, none}}},
}};

constexpr std::array<NodeType, 9> kDirected{NodeType::L,     NodeType::A, NodeType::FI,
                                            NodeType::FO,    NodeType::FOE, NodeType::Arrow,
                                            NodeType::T,     NodeType::FRIN, NodeType::FROUT};
constexpr std::array<NodeType, 4> kUndirected{NodeType::GAMMA, NodeType::DELTA, NodeType::E,
                                              NodeType::FREE};

}  // namespace

const NodeSignature& signature(NodeType t) { return kSignatures[static_cast<std::size_t>(t)]; }

std::optional<NodeType> parse_node_type(std::string_view name) {
  for (const auto& s : kSignatures) {
    if (s.name == name) return s.type;
  }
  return std::nullopt;
}

std::span<const NodeType> types_of(Family f) {
  if (f == Family::directed) return kDirected;
  return kUndirected;
}

std::string_view family_name(Family f) { return f == Family::directed ? "directed" : "undirected"; }

}  // namespace quinelab
