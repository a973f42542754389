#include "quinelab/certificate.hpp"

#include <algorithm>
#include <unordered_map>

namespace quinelab {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t combine(std::uint64_t h, std::uint64_t v) {
  return mix(h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Molecule flattened to 0..n-1 indices; nbr == -1 marks a dangling port.
struct Dense {
  std::vector<NodeType> type;
  std::vector<std::uint8_t> arity;
  std::vector<std::array<std::int32_t, 3>> nbr;
  std::vector<std::array<std::uint8_t, 3>> nbr_port;

  explicit Dense(const Molecule& m) {
    std::unordered_map<NodeId, std::int32_t> index;
    index.reserve(m.node_count());
    for (const auto& [id, n] : m.nodes()) {
      index.emplace(id, static_cast<std::int32_t>(type.size()));
      type.push_back(n.type);
      arity.push_back(n.tag_count);
    }
    nbr.assign(type.size(), {-1, -1, -1});
    nbr_port.assign(type.size(), {0, 0, 0});
    for (const auto& [tag, e] : m.edges()) {
      if (!e.complete()) continue;
      auto a = index.at(e.ends[0].node);
      auto b = index.at(e.ends[1].node);
      nbr[a][e.ends[0].port] = b;
      nbr_port[a][e.ends[0].port] = e.ends[1].port;
      nbr[b][e.ends[1].port] = a;
      nbr_port[b][e.ends[1].port] = e.ends[0].port;
    }
  }

  std::size_t size() const { return type.size(); }
};

std::size_t distinct(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

struct Refinement {
  std::vector<std::uint64_t> color;
  std::size_t rounds = 0;
};

// Colour refinement with ports as edge colours, iterated until the number of
// classes stops growing.
Refinement refine(const Dense& g) {
  Refinement r;
  r.color.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    r.color[i] = mix(static_cast<std::uint64_t>(g.type[i]) + 1);
  }
  std::size_t classes = distinct(r.color);
  std::vector<std::uint64_t> next(g.size());
  for (;;) {
    for (std::size_t i = 0; i < g.size(); ++i) {
      std::uint64_t h = r.color[i];
      for (std::uint8_t k = 0; k < g.arity[i]; ++k) {
        auto j = g.nbr[i][k];
        std::uint64_t c = j < 0 ? 0 : r.color[static_cast<std::size_t>(j)];
        h = combine(h, combine(g.nbr_port[i][k] + 1, c));
      }
      next[i] = h;
    }
    std::size_t now = distinct(next);
    // keep the last pass even when it adds no class: its colours carry the
    // neighbourhood, the previous ones may be bare node types
    r.color.swap(next);
    if (now == classes) break;
    classes = now;
    ++r.rounds;
  }
  return r;
}

}  // namespace

std::string Certificate::hex() const {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (auto b : digest) {
    out += kHex[b >> 4];
    out += kHex[b & 15];
  }
  return out;
}

namespace {

// Port labels make a connected component rigid once one node is fixed, so a
// breadth-first walk in port order from a fixed start is a canonical code.
// The start ranges over the rarest colour class of the component and the
// smallest code wins.
std::vector<std::int64_t> walk_code(const Dense& g, std::int32_t start,
                                    std::vector<std::int32_t>& order_of) {
  std::vector<std::int64_t> code;
  std::vector<std::int32_t> queue{start};
  order_of[start] = 0;
  for (std::size_t qi = 0; qi < queue.size(); ++qi) {
    auto x = queue[qi];
    code.push_back(static_cast<std::int64_t>(g.type[x]));
    for (std::uint8_t k = 0; k < g.arity[x]; ++k) {
      auto y = g.nbr[x][k];
      if (y < 0) {
        code.push_back(-1);
        continue;
      }
      if (order_of[y] < 0) {
        order_of[y] = static_cast<std::int32_t>(queue.size());
        queue.push_back(y);
      }
      code.push_back(order_of[y] * 4 + g.nbr_port[x][k]);
    }
  }
  for (auto x : queue) order_of[x] = -1;
  return code;
}

std::vector<std::vector<std::int64_t>> component_codes(const Dense& g, const Refinement& r) {
  const std::size_t n = g.size();
  std::vector<std::vector<std::int64_t>> codes;
  std::vector<bool> seen(n, false);
  std::vector<std::int32_t> order_of(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::int32_t> comp{static_cast<std::int32_t>(s)};
    seen[s] = true;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      auto x = comp[i];
      for (std::uint8_t k = 0; k < g.arity[x]; ++k) {
        auto y = g.nbr[x][k];
        if (y >= 0 && !seen[y]) {
          seen[y] = true;
          comp.push_back(y);
        }
      }
    }
    std::unordered_map<std::uint64_t, std::size_t> size;
    for (auto x : comp) ++size[r.color[x]];
    auto rank = [&](std::int32_t x) { return std::pair{size[r.color[x]], r.color[x]}; };
    auto best_rank = rank(comp.front());
    for (auto x : comp) best_rank = std::min(best_rank, rank(x));
    std::vector<std::int64_t> best;
    for (auto x : comp) {
      if (rank(x) != best_rank) continue;
      auto c = walk_code(g, x, order_of);
      if (best.empty() || c < best) best = std::move(c);
    }
    codes.push_back(std::move(best));
  }
  std::sort(codes.begin(), codes.end());
  return codes;
}

}  // namespace

Certificate canonical_certificate(const Molecule& m) {
  Dense g(m);
  Refinement r = refine(g);
  auto codes = component_codes(g, r);
  std::uint64_t h1 = combine(0x51ed270b27c2a1f3ULL, static_cast<std::uint64_t>(m.family()));
  std::uint64_t h2 = combine(0x2545f4914f6cdd1dULL, static_cast<std::uint64_t>(m.family()));
  auto feed = [&](std::uint64_t v) {
    h1 = combine(h1, v);
    h2 = combine(h2 ^ 0xa0761d6478bd642fULL, v);
  };
  feed(m.node_count());
  feed(m.edge_count());
  feed(codes.size());
  for (const auto& c : codes) {
    feed(c.size());
    for (auto v : c) feed(static_cast<std::uint64_t>(v));
  }
  Certificate cert;
  cert.node_count = m.node_count();
  cert.edge_count = m.edge_count();
  for (int i = 0; i < 8; ++i) {
    cert.digest[i] = static_cast<std::uint8_t>(h1 >> (8 * i));
    cert.digest[8 + i] = static_cast<std::uint8_t>(h2 >> (8 * i));
  }
  return cert;
}

bool isomorphic(const Molecule& a, const Molecule& b) {
  if (a.family() != b.family()) return false;
  if (a.node_count() != b.node_count() || a.edge_count() != b.edge_count()) return false;
  if (a.type_counts() != b.type_counts()) return false;

  Dense ga(a);
  Dense gb(b);
  Refinement ra = refine(ga);
  Refinement rb = refine(gb);
  if (ra.rounds != rb.rounds) return false;
  {
    auto ca = ra.color;
    auto cb = rb.color;
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    if (ca != cb) return false;
  }

  const std::size_t n = ga.size();
  std::unordered_map<std::uint64_t, std::size_t> class_size;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> b_by_color;
  for (std::size_t i = 0; i < n; ++i) {
    ++class_size[ra.color[i]];
    b_by_color[rb.color[i]].push_back(static_cast<std::int32_t>(i));
  }

  std::vector<std::int32_t> map_ab(n, -1);
  std::vector<std::int32_t> map_ba(n, -1);
  std::vector<std::int32_t> assigned;
  std::vector<std::pair<std::int32_t, std::int32_t>> stack;

  // Port-labelled connectivity makes the image of a connected component
  // forced once one node is fixed.
  auto propagate = [&](std::int32_t u, std::int32_t v) {
    assigned.clear();
    stack.clear();
    auto assign = [&](std::int32_t x, std::int32_t y) {
      map_ab[x] = y;
      map_ba[y] = x;
      assigned.push_back(x);
      stack.emplace_back(x, y);
    };
    assign(u, v);
    bool ok = true;
    while (ok && !stack.empty()) {
      auto [x, y] = stack.back();
      stack.pop_back();
      if (ga.type[x] != gb.type[y] || ra.color[x] != rb.color[y]) {
        ok = false;
        break;
      }
      for (std::uint8_t k = 0; k < ga.arity[x]; ++k) {
        auto x2 = ga.nbr[x][k];
        auto y2 = gb.nbr[y][k];
        if ((x2 < 0) != (y2 < 0)) {
          ok = false;
          break;
        }
        if (x2 < 0) continue;
        if (ga.nbr_port[x][k] != gb.nbr_port[y][k]) {
          ok = false;
          break;
        }
        if (map_ab[x2] < 0 && map_ba[y2] < 0) {
          assign(x2, y2);
        } else if (map_ab[x2] != y2) {
          ok = false;
          break;
        }
      }
    }
    if (!ok) {
      for (auto x : assigned) {
        map_ba[map_ab[x]] = -1;
        map_ab[x] = -1;
      }
    }
    return ok;
  };

  std::vector<bool> seen(n, false);
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    // Collect the component and pick its rarest-coloured node as anchor.
    std::vector<std::int32_t> comp{static_cast<std::int32_t>(start)};
    seen[start] = true;
    for (std::size_t i = 0; i < comp.size(); ++i) {
      auto x = comp[i];
      for (std::uint8_t k = 0; k < ga.arity[x]; ++k) {
        auto y = ga.nbr[x][k];
        if (y >= 0 && !seen[y]) {
          seen[y] = true;
          comp.push_back(y);
        }
      }
    }
    std::int32_t anchor = comp.front();
    for (auto x : comp) {
      if (class_size[ra.color[x]] < class_size[ra.color[anchor]]) anchor = x;
    }
    bool matched = false;
    for (auto v : b_by_color[ra.color[anchor]]) {
      if (map_ba[v] >= 0) continue;
      if (propagate(anchor, v)) {
        matched = true;
        break;
      }
    }
    if (!matched) return false;
  }
  return true;
}

}  // namespace quinelab
