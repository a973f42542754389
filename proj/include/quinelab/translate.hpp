#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include "quinelab/molecule.hpp"

namespace quinelab {

struct LambdaTerm;
using TermPtr = std::shared_ptr<const LambdaTerm>;

struct LambdaTerm {
  enum class Kind { var, lam, app };
  Kind kind = Kind::var;
  std::string name;  // var and lam
  TermPtr a;         // lam body, app function
  TermPtr b;         // app argument

  static TermPtr var(std::string n);
  static TermPtr lam(std::string n, TermPtr body);
  static TermPtr app(TermPtr f, TermPtr x);
};

bool operator==(const LambdaTerm& x, const LambdaTerm& y);

// Fully parenthesised except for variables, e.g. "(\x.(x x))".
std::string to_string(const LambdaTerm& t);

class LambdaSyntaxError : public std::runtime_error {
 public:
  LambdaSyntaxError(const std::string& what, std::size_t pos)
      : std::runtime_error(what + " at offset " + std::to_string(pos)), pos_(pos) {}
  std::size_t position() const { return pos_; }

 private:
  std::size_t pos_;
};

// \x.M or λx.M, left-associative juxtaposition, parentheses. An abstraction
// extends as far right as possible.
TermPtr parse_lambda(std::string_view text);

// L for abstractions, A for applications, a left-leaning FO tree for a
// variable used more than once, T for an unused one. Free variables start
// at a FRIN, the root ends at a FROUT.
Molecule lambda_to_mol(const LambdaTerm& t);

struct Translation {
  Molecule mol{Family::directed};
  // IC node id -> its two images, in the order listed below
  std::map<NodeId, std::pair<NodeId, NodeId>> image;
};

// Node doubling: GAMMA -> A + L, DELTA -> FOE + FI, E -> T + FRIN,
// FREE -> FROUT + FRIN. IC edge t becomes t.0 and t.1, one per direction.
Translation ic_to_diric(const Molecule& m);

}  // namespace quinelab
