#include "quinelab/translate.hpp"

#include <array>
#include <cctype>
#include <vector>

namespace quinelab {

TermPtr LambdaTerm::var(std::string n) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = Kind::var;
  t->name = std::move(n);
  return t;
}

TermPtr LambdaTerm::lam(std::string n, TermPtr body) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = Kind::lam;
  t->name = std::move(n);
  t->a = std::move(body);
  return t;
}

TermPtr LambdaTerm::app(TermPtr f, TermPtr x) {
  auto t = std::make_shared<LambdaTerm>();
  t->kind = Kind::app;
  t->a = std::move(f);
  t->b = std::move(x);
  return t;
}

bool operator==(const LambdaTerm& x, const LambdaTerm& y) {
  if (x.kind != y.kind || x.name != y.name) return false;
  auto same = [](const TermPtr& p, const TermPtr& q) {
    if (!p || !q) return !p && !q;
    return *p == *q;
  };
  return same(x.a, y.a) && same(x.b, y.b);
}

std::string to_string(const LambdaTerm& t) {
  switch (t.kind) {
    case LambdaTerm::Kind::var:
      return t.name;
    case LambdaTerm::Kind::lam:
      return "(\\" + t.name + "." + to_string(*t.a) + ")";
    case LambdaTerm::Kind::app:
      return "(" + to_string(*t.a) + " " + to_string(*t.b) + ")";
  }
  return {};
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  TermPtr parse() {
    TermPtr t = term();
    skip();
    if (pos_ != s_.size()) throw LambdaSyntaxError("unexpected character", pos_);
    return t;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool at_lambda() {
    skip();
    if (pos_ < s_.size() && s_[pos_] == '\\') return true;
    return s_.substr(pos_, 2) == "\xce\xbb";  // λ
  }

  bool at_atom() {
    skip();
    if (pos_ >= s_.size()) return false;
    char c = s_[pos_];
    return c == '(' || std::isalpha(static_cast<unsigned char>(c));
  }

  std::string ident() {
    skip();
    std::size_t start = pos_;
    if (pos_ >= s_.size() || !std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      throw LambdaSyntaxError("expected identifier", pos_);
    }
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
      ++pos_;
    }
    return std::string(s_.substr(start, pos_ - start));
  }

  TermPtr term() {
    if (at_lambda()) return abstraction();
    TermPtr t = atom();
    for (;;) {
      if (at_lambda()) return LambdaTerm::app(t, abstraction());
      if (!at_atom()) return t;
      t = LambdaTerm::app(t, atom());
    }
  }

  TermPtr abstraction() {
    pos_ += s_[pos_] == '\\' ? 1 : 2;
    std::string name = ident();
    skip();
    if (pos_ >= s_.size() || s_[pos_] != '.') throw LambdaSyntaxError("expected '.'", pos_);
    ++pos_;
    skip();
    if (pos_ >= s_.size()) throw LambdaSyntaxError("missing abstraction body", pos_);
    return LambdaTerm::lam(std::move(name), term());
  }

  TermPtr atom() {
    skip();
    if (pos_ >= s_.size()) throw LambdaSyntaxError("unexpected end of term", pos_);
    if (s_[pos_] == '(') {
      ++pos_;
      TermPtr t = term();
      skip();
      if (pos_ >= s_.size() || s_[pos_] != ')') throw LambdaSyntaxError("expected ')'", pos_);
      ++pos_;
      return t;
    }
    return LambdaTerm::var(ident());
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

struct Binder {
  std::vector<Tag> uses;
};

class MolBuilder {
 public:
  Molecule build(const LambdaTerm& t) {
    std::vector<std::pair<std::string, Binder*>> scope;
    Tag root = walk(t, scope);
    add(NodeType::FROUT, {root});
    for (auto& [name, b] : free_) add(NodeType::FRIN, {close(b)});
    return assemble(Family::directed, specs_);
  }

 private:
  Tag fresh() { return "v" + std::to_string(next_++); }

  void add(NodeType type, std::vector<Tag> tags) { specs_.push_back({type, std::move(tags), 0}); }

  Tag walk(const LambdaTerm& t, std::vector<std::pair<std::string, Binder*>>& scope) {
    switch (t.kind) {
      case LambdaTerm::Kind::var: {
        Binder* b = nullptr;
        for (auto it = scope.rbegin(); it != scope.rend(); ++it) {
          if (it->first == t.name) {
            b = it->second;
            break;
          }
        }
        if (b == nullptr) b = &free_for(t.name);
        Tag use = fresh();
        b->uses.push_back(use);
        return use;
      }
      case LambdaTerm::Kind::lam: {
        Binder b;
        scope.emplace_back(t.name, &b);
        Tag body = walk(*t.a, scope);
        scope.pop_back();
        Tag out = fresh();
        add(NodeType::L, {body, close(b), out});
        return out;
      }
      case LambdaTerm::Kind::app: {
        Tag f = walk(*t.a, scope);
        Tag x = walk(*t.b, scope);
        Tag out = fresh();
        add(NodeType::A, {f, x, out});
        return out;
      }
    }
    return {};
  }

  Binder& free_for(const std::string& name) {
    for (auto& [n, b] : free_) {
      if (n == name) return b;
    }
    free_.emplace_back(name, Binder{});
    return free_.back().second;
  }

  // Tag to put on the binding port.
  Tag close(const Binder& b) {
    if (b.uses.empty()) {
      Tag t = fresh();
      add(NodeType::T, {t});
      return t;
    }
    if (b.uses.size() == 1) return b.uses.front();
    Tag src = fresh();
    fan(src, b.uses, b.uses.size());
    return src;
  }

  void fan(const Tag& src, const std::vector<Tag>& uses, std::size_t k) {
    if (k == 2) {
      add(NodeType::FO, {src, uses[0], uses[1]});
      return;
    }
    Tag left = fresh();
    add(NodeType::FO, {src, left, uses[k - 1]});
    fan(left, uses, k - 1);
  }

  std::vector<NodeSpec> specs_;
  std::vector<std::pair<std::string, Binder>> free_;  // first appearance order
  std::size_t next_ = 0;
};

struct Half {
  std::uint8_t node;  // 0 or 1: which of the two images
  std::uint8_t port;
};

struct Doubling {
  NodeType first, second;
  std::array<Half, 3> in, out;
};

const Doubling& doubling(NodeType t) {
  static const Doubling gamma{NodeType::A, NodeType::L, {{{0, 0}, {0, 1}, {1, 0}}},
                              {{{1, 2}, {1, 1}, {0, 2}}}};
  static const Doubling delta{NodeType::FOE, NodeType::FI, {{{0, 0}, {1, 0}, {1, 1}}},
                              {{{1, 2}, {0, 1}, {0, 2}}}};
  static const Doubling eraser{NodeType::T, NodeType::FRIN, {{{0, 0}}}, {{{1, 0}}}};
  static const Doubling open{NodeType::FROUT, NodeType::FRIN, {{{0, 0}}}, {{{1, 0}}}};
  switch (t) {
    case NodeType::GAMMA:
      return gamma;
    case NodeType::DELTA:
      return delta;
    case NodeType::E:
      return eraser;
    case NodeType::FREE:
      return open;
    default:
      throw MolError("ic_to_diric: node type " + std::string(type_name(t)) + " is not IC");
  }
}

}  // namespace

TermPtr parse_lambda(std::string_view text) { return Parser(text).parse(); }

Molecule lambda_to_mol(const LambdaTerm& t) { return MolBuilder().build(t); }

Translation ic_to_diric(const Molecule& m) {
  if (m.family() != Family::undirected) throw MolError("ic_to_diric: input is not an IC molecule");
  std::vector<NodeSpec> specs;
  std::map<NodeId, std::size_t> first_spec;
  for (const auto& [id, n] : m.nodes()) {
    const Doubling& d = doubling(n.type);
    first_spec[id] = specs.size();
    specs.push_back({d.first, std::vector<Tag>(arity(d.first)), n.birth_step});
    specs.push_back({d.second, std::vector<Tag>(arity(d.second)), n.birth_step});
  }
  auto place = [&](Port p, const Half& h, const Tag& tag) {
    specs[first_spec.at(p.node) + h.node].tags[h.port] = tag;
  };
  for (const auto& [tag, e] : m.edges()) {
    if (!e.complete()) throw MolError("ic_to_diric: tag " + tag + " has only one endpoint");
    const Doubling& d0 = doubling(m.node(e.ends[0].node).type);
    const Doubling& d1 = doubling(m.node(e.ends[1].node).type);
    place(e.ends[0], d0.out[e.ends[0].port], tag + ".0");
    place(e.ends[1], d1.in[e.ends[1].port], tag + ".0");
    place(e.ends[1], d1.out[e.ends[1].port], tag + ".1");
    place(e.ends[0], d0.in[e.ends[0].port], tag + ".1");
  }
  Translation out;
  out.mol = assemble(Family::directed, specs);
  // assemble numbers nodes 1, 2, ... in spec order
  for (const auto& [id, i] : first_spec) {
    out.image[id] = {static_cast<NodeId>(i + 1), static_cast<NodeId>(i + 2)};
  }
  return out;
}

}  // namespace quinelab
