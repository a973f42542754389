#include "quinelab/molecule.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

namespace quinelab {

const Node& Molecule::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw MolError("no node with id " + std::to_string(id));
  return it->second;
}

const Node* Molecule::find_node(NodeId id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const Edge* Molecule::find_edge(std::string_view tag) const {
  auto it = edges_.find(tag);
  return it == edges_.end() ? nullptr : &it->second;
}

std::optional<Port> Molecule::partner(Port p) const {
  const Edge* e = find_edge(tag_at(p));
  if (e == nullptr || !e->complete()) return std::nullopt;
  return e->other(p);
}

std::uint64_t Molecule::max_birth_step() const {
  std::uint64_t out = 0;
  for (const auto& [id, n] : nodes_) out = std::max(out, n.birth_step);
  return out;
}

std::array<std::size_t, kNodeTypeCount> Molecule::type_counts() const {
  std::array<std::size_t, kNodeTypeCount> counts{};
  for (const auto& [id, n] : nodes_) ++counts[static_cast<std::size_t>(n.type)];
  return counts;
}

void Molecule::link(const Tag& tag, Port p) {
  Edge& e = edges_[tag];
  if (e.count >= 2) throw MolError("tag " + tag + " used more than twice");
  e.ends[e.count++] = p;
  if (family_ == Family::directed && e.count == 2) {
    const Node& first = nodes_.at(e.ends[0].node);
    if (port_dir(first.type, e.ends[0].port) == Dir::in) std::swap(e.ends[0], e.ends[1]);
  }
}

void Molecule::unlink(const Tag& tag, Port p) {
  auto it = edges_.find(tag);
  if (it == edges_.end()) return;
  Edge& e = it->second;
  if (e.count == 2 && e.ends[0] == p) {
    e.ends[0] = e.ends[1];
  } else if (!(e.count >= 1 && e.ends[e.count - 1] == p)) {
    return;
  }
  if (--e.count == 0) edges_.erase(it);
}

NodeId Molecule::add_node(NodeType type, std::span<const Tag> tags, std::uint64_t birth_step) {
  return add_node_with_id(next_id_, type, tags, birth_step);
}

NodeId Molecule::add_node_with_id(NodeId id, NodeType type, std::span<const Tag> tags,
                                  std::uint64_t birth_step) {
  if (tags.size() > 3) throw MolError("too many tags for a node");
  if (nodes_.contains(id)) throw MolError("duplicate node id " + std::to_string(id));
  Node n;
  n.id = id;
  n.type = type;
  n.birth_step = birth_step;
  n.tag_count = static_cast<std::uint8_t>(tags.size());
  std::copy(tags.begin(), tags.end(), n.tags.begin());
  nodes_.emplace(id, n);
  next_id_ = std::max(next_id_, id + 1);
  for (std::uint8_t k = 0; k < n.tag_count; ++k) link(n.tags[k], Port{id, k});
  return id;
}

void Molecule::remove_node(NodeId id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw MolError("no node with id " + std::to_string(id));
  const Node& n = it->second;
  for (std::uint8_t k = 0; k < n.tag_count; ++k) unlink(n.tags[k], Port{id, k});
  nodes_.erase(it);
}

void Molecule::retag(Port p, const Tag& tag) {
  auto it = nodes_.find(p.node);
  if (it == nodes_.end()) throw MolError("no node with id " + std::to_string(p.node));
  unlink(it->second.tags[p.port], p);
  it->second.tags[p.port] = tag;
  link(tag, p);
}

Tag Molecule::fresh_tag() {
  for (;;) {
    Tag t = "_" + std::to_string(next_fresh_++);
    if (!edges_.contains(t)) return t;
  }
}

Molecule Molecule::from_specs_unchecked(Family family, std::span<const NodeSpec> specs) {
  Molecule m(family);
  for (const auto& s : specs) {
    Node n;
    n.id = m.next_id_++;
    n.type = s.type;
    n.birth_step = s.birth_step;
    n.tag_count = static_cast<std::uint8_t>(std::min<std::size_t>(s.tags.size(), 3));
    std::copy_n(s.tags.begin(), n.tag_count, n.tags.begin());
    m.nodes_.emplace(n.id, n);
    for (std::uint8_t k = 0; k < n.tag_count; ++k) {
      Edge& e = m.edges_[n.tags[k]];
      if (e.count < 2) e.ends[e.count++] = Port{n.id, k};
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

namespace {

struct TagUse {
  std::vector<std::pair<std::size_t, std::uint8_t>> where;  // (spec index, port)
};

}  // namespace

Molecule assemble(Family family, std::span<const NodeSpec> specs) {
  std::map<Tag, TagUse> uses;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& s = specs[i];
    const auto& sig = signature(s.type);
    if (sig.family != family) {
      throw MolError("node type " + std::string(sig.name) + " is not in the " +
                     std::string(family_name(family)) + " family");
    }
    if (s.tags.size() != sig.arity) {
      throw MolError("node type " + std::string(sig.name) + " takes " +
                     std::to_string(sig.arity) + " tags, got " + std::to_string(s.tags.size()));
    }
    for (std::uint8_t k = 0; k < sig.arity; ++k) {
      if (s.tags[k].empty()) throw MolError("empty edge tag");
      auto& u = uses[s.tags[k]];
      u.where.emplace_back(i, k);
      if (u.where.size() > 2) throw MolError("tag " + s.tags[k] + " used more than twice");
    }
  }
  if (family == Family::directed) {
    for (const auto& [tag, u] : uses) {
      if (u.where.size() != 2) continue;
      Dir d0 = port_dir(specs[u.where[0].first].type, u.where[0].second);
      Dir d1 = port_dir(specs[u.where[1].first].type, u.where[1].second);
      if (d0 == d1) {
        throw MolError("tag " + tag + " joins two " + (d0 == Dir::in ? "in" : "out") + "-ports");
      }
    }
  }

  Molecule m(family);
  for (const auto& s : specs) m.add_node(s.type, s.tags, s.birth_step);
  for (const auto& [tag, u] : uses) {
    if (u.where.size() != 1) continue;
    const Tag one[1] = {tag};
    NodeType closure = NodeType::FREE;
    if (family == Family::directed) {
      Dir d = port_dir(specs[u.where[0].first].type, u.where[0].second);
      closure = d == Dir::in ? NodeType::FRIN : NodeType::FROUT;
    }
    m.add_node(closure, one, 0);
  }
  return m;
}

Molecule parse_mol(std::string_view text, Family family) {
  std::vector<NodeSpec> specs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    std::istringstream in{std::string(line)};
    std::string word;
    if (!(in >> word)) continue;
    auto type = parse_node_type(word);
    if (!type) throw MolError("line " + std::to_string(line_no) + ": unknown node type " + word);
    NodeSpec spec{*type, {}, 0};
    while (in >> word) spec.tags.push_back(word);
    if (spec.tags.size() != arity(*type)) {
      throw MolError("line " + std::to_string(line_no) + ": " + std::string(type_name(*type)) +
                     " takes " + std::to_string(arity(*type)) + " tags, got " +
                     std::to_string(spec.tags.size()));
    }
    specs.push_back(std::move(spec));
  }
  try {
    return assemble(family, specs);
  } catch (const MolError& e) {
    throw MolError(std::string("mol: ") + e.what());
  }
}

std::string serialize_mol(const Molecule& m) {
  std::vector<const Node*> order;
  order.reserve(m.node_count());
  for (const auto& [id, n] : m.nodes()) {
    if (is_boundary(n.type)) {
      auto p = m.partner(Port{id, 0});
      if (p && !is_boundary(m.node(p->node).type)) continue;
    }
    order.push_back(&n);
  }
  std::sort(order.begin(), order.end(), [](const Node* a, const Node* b) {
    if (a->birth_step != b->birth_step) return a->birth_step < b->birth_step;
    auto ta = a->edge_tags();
    auto tb = b->edge_tags();
    if (!std::ranges::equal(ta, tb)) return std::ranges::lexicographical_compare(ta, tb);
    return type_name(a->type) < type_name(b->type);
  });
  std::string out;
  for (const Node* n : order) {
    out += type_name(n->type);
    for (const auto& t : n->edge_tags()) {
      out += ' ';
      out += t;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> validate(const Molecule& m) {
  std::vector<std::string> report;
  std::map<std::string_view, std::vector<std::pair<const Node*, std::uint8_t>>> uses;
  for (const auto& [id, n] : m.nodes()) {
    const auto& sig = signature(n.type);
    std::string who = "node " + std::to_string(id) + " (" + std::string(sig.name) + ")";
    if (sig.family != m.family()) {
      report.push_back(who + ": type not in the " + std::string(family_name(m.family())) +
                       " family");
    }
    if (n.tag_count != sig.arity) {
      report.push_back(who + ": expected " + std::to_string(sig.arity) + " tags, got " +
                       std::to_string(n.tag_count));
    }
    for (std::uint8_t k = 0; k < n.tag_count; ++k) uses[n.tags[k]].emplace_back(&n, k);
  }
  for (const auto& [tag, u] : uses) {
    std::string who = "tag " + std::string(tag);
    if (u.size() == 1) {
      report.push_back(who + ": has only one endpoint");
    } else if (u.size() > 2) {
      report.push_back(who + ": used " + std::to_string(u.size()) + " times");
    } else if (m.family() == Family::directed) {
      auto dir_of = [](const std::pair<const Node*, std::uint8_t>& e) -> Dir {
        const auto& sig = signature(e.first->type);
        return e.second < sig.arity ? sig.ports[e.second].dir : Dir::free;
      };
      Dir d0 = dir_of(u[0]);
      Dir d1 = dir_of(u[1]);
      if (d0 == Dir::out && d1 == Dir::out) report.push_back(who + ": two out-port endpoints");
      if (d0 == Dir::in && d1 == Dir::in) report.push_back(who + ": two in-port endpoints");
    }
  }
  return report;
}

std::vector<Molecule> connected_components(const Molecule& m) {
  std::vector<NodeId> ids;
  std::unordered_map<NodeId, std::size_t> index;
  for (const auto& [id, n] : m.nodes()) {
    index.emplace(id, ids.size());
    ids.push_back(id);
  }
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& [tag, e] : m.edges()) {
    if (!e.complete()) continue;
    std::size_t a = find(index.at(e.ends[0].node));
    std::size_t b = find(index.at(e.ends[1].node));
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<std::size_t, Molecule> parts;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto [it, fresh] = parts.try_emplace(find(i), m.family());
    const Node& n = m.node(ids[i]);
    it->second.add_node_with_id(n.id, n.type, n.edge_tags(), n.birth_step);
  }
  std::vector<Molecule> out;
  out.reserve(parts.size());
  for (auto& [root, part] : parts) out.push_back(std::move(part));
  return out;
}

Molecule disjoint_union(const Molecule& a, const Molecule& b) {
  if (a.family() != b.family()) throw MolError("disjoint_union: families differ");
  Molecule out(a.family());
  for (const auto& [id, n] : a.nodes()) out.add_node(n.type, n.edge_tags(), n.birth_step);
  // one suffix for all of b, so both ends of an edge get the same name
  std::string suffix = "'";
  for (bool clash = true; clash;) {
    clash = false;
    for (const auto& [id, n] : b.nodes())
      for (std::uint8_t k = 0; k < n.tag_count; ++k) clash = clash || a.find_edge(n.tags[k] + suffix);
    if (clash) suffix += "'";
  }
  for (const auto& [id, n] : b.nodes()) {
    std::array<Tag, 3> tags;
    for (std::uint8_t k = 0; k < n.tag_count; ++k) tags[k] = n.tags[k] + suffix;
    out.add_node(n.type, std::span<const Tag>(tags.data(), n.tag_count), n.birth_step);
  }
  return out;
}

// ---------------------------------------------------------------------------
// splice

namespace {

// A path endpoint: either a port of an added node or a surviving port.
struct Terminal {
  bool added = false;
  std::size_t tpl = 0;
  std::uint8_t port = 0;
  Port ext{};
};

struct Covered {
  Port port;
  Formal formal = 0;
  Dir dir = Dir::free;
  // inner link: added-node port or another covered port (via wire)
  bool inner_is_tpl = false;
  std::size_t inner_tpl = 0;
  std::uint8_t inner_port = 0;
  std::size_t inner_cov = 0;
  // outer link: surviving port or another covered port (via the old tag)
  bool outer_is_ext = false;
  Port outer_ext{};
  std::size_t outer_cov = 0;
  bool visited = false;
};

struct FormalUse {
  int boundary = -1;  // index into covered
  int tpl_uses = 0;
  std::array<std::pair<std::size_t, std::uint8_t>, 2> tpl{};
  int wire_uses = 0;
  Formal wire_mate = 0;
};

}  // namespace

SpliceOutcome splice_into(Molecule& m, const SpliceSpec& spec, std::uint64_t step) {
  const bool directed = m.family() == Family::directed;
  auto fail = [](const std::string& why) { throw MolError("splice: " + why); };

  std::set<NodeId> removed;
  for (NodeId id : spec.remove) {
    if (!m.find_node(id)) fail("no node " + std::to_string(id) + " to remove");
    if (!removed.insert(id).second) fail("node removed twice");
  }

  std::map<Formal, FormalUse> formals;
  std::vector<Covered> covered;
  std::map<Port, std::size_t> cov_of;
  for (const auto& [f, p] : spec.boundary) {
    if (!removed.contains(p.node)) fail("boundary port on a node that is not removed");
    const Node& n = m.node(p.node);
    if (p.port >= n.tag_count) fail("boundary port out of range");
    auto& use = formals[f];
    if (use.boundary >= 0) fail("formal bound twice");
    if (cov_of.contains(p)) fail("half-edge bound twice");
    use.boundary = static_cast<int>(covered.size());
    cov_of.emplace(p, covered.size());
    covered.push_back(Covered{p, f, port_dir(n.type, p.port)});
  }
  for (std::size_t i = 0; i < spec.add.size(); ++i) {
    const auto& t = spec.add[i];
    if (family_of(t.type) != m.family()) fail("added node type outside the molecule family");
    for (std::uint8_t k = 0; k < arity(t.type); ++k) {
      auto& use = formals[t.ports[k]];
      if (use.tpl_uses >= 2) fail("formal used on more than two added ports");
      use.tpl[use.tpl_uses++] = {i, k};
    }
  }
  for (const auto& [f, g] : spec.wires) {
    if (f == g) fail("wire joins a formal to itself");
    auto& uf = formals[f];
    auto& ug = formals[g];
    ++uf.wire_uses;
    ++ug.wire_uses;
    uf.wire_mate = g;
    ug.wire_mate = f;
  }

  for (auto& [f, use] : formals) {
    if (use.boundary >= 0) {
      if (use.tpl_uses + use.wire_uses != 1) fail("boundary formal must be used exactly once");
      Covered& c = covered[use.boundary];
      if (use.tpl_uses == 1) {
        c.inner_is_tpl = true;
        c.inner_tpl = use.tpl[0].first;
        c.inner_port = use.tpl[0].second;
        if (directed && port_dir(spec.add[c.inner_tpl].type, c.inner_port) != c.dir) {
          fail("direction mismatch on formal " + std::to_string(f));
        }
      } else {
        const auto& mate = formals.at(use.wire_mate);
        if (mate.boundary < 0) fail("wire end is not a boundary formal");
        c.inner_cov = static_cast<std::size_t>(mate.boundary);
        if (directed && covered[c.inner_cov].dir == c.dir) {
          fail("wire joins two half-edges of the same direction");
        }
      }
    } else {
      if (use.wire_uses != 0) fail("wire end is not a boundary formal");
      if (use.tpl_uses != 2) fail("internal formal must join exactly two added ports");
      if (directed) {
        Dir d0 = port_dir(spec.add[use.tpl[0].first].type, use.tpl[0].second);
        Dir d1 = port_dir(spec.add[use.tpl[1].first].type, use.tpl[1].second);
        if (d0 == d1) fail("internal formal joins two ports of the same direction");
      }
    }
  }

  // Outer links, and coverage of every half-edge left dangling.
  for (NodeId id : removed) {
    const Node& n = m.node(id);
    for (std::uint8_t k = 0; k < n.tag_count; ++k) {
      Port p{id, k};
      auto q = m.partner(p);
      auto here = cov_of.find(p);
      if (!q) {
        if (here != cov_of.end()) fail("boundary half-edge has no partner");
        continue;
      }
      bool q_removed = removed.contains(q->node);
      if (here == cov_of.end()) {
        if (!q_removed || cov_of.contains(*q)) {
          fail("dangling half-edge " + n.tags[k] + " left uncovered");
        }
        continue;
      }
      Covered& c = covered[here->second];
      if (q_removed) {
        auto there = cov_of.find(*q);
        if (there == cov_of.end()) fail("dangling half-edge " + n.tags[k] + " left uncovered");
        c.outer_cov = there->second;
      } else {
        c.outer_is_ext = true;
        c.outer_ext = *q;
      }
    }
  }

  auto term_dir = [&](const Terminal& t) {
    if (t.added) return port_dir(spec.add[t.tpl].type, t.port);
    return port_dir(m.node(t.ext.node).type, t.ext.port);
  };

  // Walk from covered port `c`, having entered it through its inner link
  // (from_inner) or its outer link, until the far terminal.
  auto walk = [&](std::size_t c, bool from_inner) -> Terminal {
    for (;;) {
      Covered& cur = covered[c];
      cur.visited = true;
      if (from_inner) {
        if (cur.outer_is_ext) return Terminal{false, 0, 0, cur.outer_ext};
        c = cur.outer_cov;
        from_inner = false;
      } else {
        if (cur.inner_is_tpl) return Terminal{true, cur.inner_tpl, cur.inner_port, {}};
        c = cur.inner_cov;
        from_inner = true;
      }
    }
  };

  std::vector<std::array<Tag, 3>> new_tags(spec.add.size());
  std::vector<std::pair<Port, Tag>> retags;
  auto check_dirs = [&](const Terminal& a, const Terminal& b) {
    if (directed && term_dir(a) == term_dir(b)) fail("path joins two ports of the same direction");
  };

  for (std::size_t i = 0; i < spec.add.size(); ++i) {
    const auto& t = spec.add[i];
    for (std::uint8_t k = 0; k < arity(t.type); ++k) {
      if (!new_tags[i][k].empty()) continue;
      const auto& use = formals.at(t.ports[k]);
      Terminal self{true, i, k, {}};
      if (use.boundary < 0) {
        Tag tag = m.fresh_tag();
        auto [oi, ok] = use.tpl[0] == std::pair{i, k} ? use.tpl[1] : use.tpl[0];
        new_tags[i][k] = tag;
        new_tags[oi][ok] = tag;
        continue;
      }
      Terminal far = walk(static_cast<std::size_t>(use.boundary), true);
      check_dirs(self, far);
      if (far.added) {
        Tag tag = m.fresh_tag();
        new_tags[i][k] = tag;
        new_tags[far.tpl][far.port] = tag;
      } else {
        new_tags[i][k] = m.tag_at(far.ext);
      }
    }
  }
  for (std::size_t c = 0; c < covered.size(); ++c) {
    if (covered[c].visited || !covered[c].outer_is_ext) continue;
    Terminal near{false, 0, 0, covered[c].outer_ext};
    Terminal far = walk(c, false);
    check_dirs(near, far);
    if (far.added) continue;  // already assigned from the added side
    const Tag& t0 = m.tag_at(near.ext);
    const Tag& t1 = m.tag_at(far.ext);
    if (t0 < t1) {
      retags.emplace_back(far.ext, t0);
    } else {
      retags.emplace_back(near.ext, t1);
    }
  }
  std::uint64_t loops = 0;
  for (std::size_t c = 0; c < covered.size(); ++c) {
    if (covered[c].visited) continue;
    ++loops;
    std::size_t cur = c;
    bool from_inner = false;
    while (!covered[cur].visited) {
      covered[cur].visited = true;
      cur = from_inner ? covered[cur].outer_cov : covered[cur].inner_cov;
      from_inner = !from_inner;
    }
  }

  for (NodeId id : removed) m.remove_node(id);
  for (const auto& [p, tag] : retags) m.retag(p, tag);
  SpliceOutcome out;
  out.loops = loops;
  out.added.reserve(spec.add.size());
  for (std::size_t i = 0; i < spec.add.size(); ++i) {
    std::uint8_t n = arity(spec.add[i].type);
    out.added.push_back(
        m.add_node(spec.add[i].type, std::span<const Tag>(new_tags[i].data(), n), step));
  }
  m.add_loops(loops);
  return out;
}

Molecule splice(Molecule m, const SpliceSpec& spec, std::uint64_t step) {
  splice_into(m, spec, step);
  return m;
}

}  // namespace quinelab
