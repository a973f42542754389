#include "quinelab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace quinelab {

std::string_view algorithm_name(Algorithm a) {
  return a == Algorithm::random ? "random" : "older-first";
}

std::optional<Algorithm> parse_algorithm(std::string_view s) {
  if (s == "random") return Algorithm::random;
  if (s == "older-first" || s == "older_first") return Algorithm::older_first;
  return std::nullopt;
}

std::optional<GrowthClass> parse_strategy(std::string_view s) {
  if (s == "grow" || s == "GROW") return GrowthClass::grow;
  if (s == "slim" || s == "SLIM") return GrowthClass::slim;
  return std::nullopt;
}

std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::horizon:
      return "horizon";
    case Termination::death:
      return "death";
    case Termination::period_detected:
      return "period_detected";
  }
  return "?";
}

void check_config(const EngineConfig& cfg) {
  if (!(cfg.w >= 0.0 && cfg.w <= 1.0)) throw std::invalid_argument("w must lie in [0, 1]");
  if (cfg.strategy == GrowthClass::neutral) {
    throw std::invalid_argument("strategy must be GROW or SLIM");
  }
}

std::string describe(const EngineConfig& cfg) {
  std::ostringstream out;
  out << "chemistry=" << chemistry_name(cfg.chemistry) << " algo=" << algorithm_name(cfg.algorithm)
      << " w=" << cfg.w << " strategy=" << growth_name(cfg.strategy) << " seed=" << cfg.seed
      << " horizon=" << cfg.horizon;
  return out.str();
}

namespace {

void fill_counts(StepReport& r, const Molecule& m) {
  r.node_count = m.node_count();
  r.counts = m.type_counts();
}

}  // namespace

Engine::Engine(Molecule m, EngineConfig cfg)
    : mol_(std::move(m)), cfg_(cfg), chem_(&ruleset(cfg.chemistry)), rng_(cfg.seed) {
  check_config(cfg_);
  if (mol_.family() != chem_->family()) {
    throw MolError("molecule family " + std::string(family_name(mol_.family())) +
                   " does not fit chemistry " + std::string(chemistry_name(cfg_.chemistry)));
  }
  if (auto problems = validate(mol_); !problems.empty()) throw MolError(problems.front());
  birth_offset_ = mol_.max_birth_step();
}

void Engine::set_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("w must lie in [0, 1]");
  cfg_.w = w;
}

void Engine::set_algorithm(Algorithm a, GrowthClass strategy) {
  if (strategy == GrowthClass::neutral) throw std::invalid_argument("strategy must be GROW or SLIM");
  cfg_.algorithm = a;
  cfg_.strategy = strategy;
}

void Engine::set_chemistry(ChemistryId id) {
  const Chemistry& c = ruleset(id);
  if (c.family() != mol_.family()) {
    throw MolError("chemistry " + std::string(chemistry_name(id)) + " does not fit the molecule");
  }
  chem_ = &c;
  cfg_.chemistry = id;
  // a molecule that was dead under the old rules may be alive now
  dead_ = false;
}

std::vector<std::size_t> Engine::select(const std::vector<Match>& matches) {
  std::vector<std::size_t> order(matches.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::unordered_set<NodeId> used;
  std::vector<std::size_t> fired;
  auto conflicts = [&](const Match& m) { return used.count(m.node_x) || used.count(m.node_y); };
  auto accept = [&](const Match& m) {
    used.insert(m.node_x);
    used.insert(m.node_y);
  };

  if (cfg_.algorithm == Algorithm::random) {
    rng_.shuffle(order);
    for (auto i : order) {
      const Match& m = matches[i];
      if (conflicts(m)) continue;
      accept(m);
      double p = m.growth() == GrowthClass::grow   ? cfg_.w
                 : m.growth() == GrowthClass::slim ? 1.0 - cfg_.w
                                                   : 1.0;
      if (rng_.coin(p)) fired.push_back(i);
    }
    return fired;
  }

  auto rank = [&](const Match& m) { return m.growth() == cfg_.strategy ? 0 : 1; };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Match& p = matches[a];
    const Match& q = matches[b];
    if (p.age != q.age) return p.age < q.age;
    if (rank(p) != rank(q)) return rank(p) < rank(q);
    return p.edge < q.edge;
  });
  for (auto i : order) {
    if (conflicts(matches[i])) continue;
    accept(matches[i]);
    fired.push_back(i);
  }
  return fired;
}

StepReport Engine::step() {
  if (dead_) throw DeadState("stepping a dead molecule");
  StepReport r;
  r.step = ++step_;
  auto matches = find_matches(mol_, *chem_);
  r.matches_found = matches.size();
  if (matches.empty()) {
    dead_ = true;
    r.dead = true;
    fill_counts(r, mol_);
    return r;
  }
  const std::uint64_t stamp = birth_offset_ + step_;
  std::uint64_t loops_before = mol_.loops_harvested();
  for (auto i : select(matches)) {
    const Match& m = matches[i];
    apply_match_into(mol_, m, stamp);
    r.applied.push_back({m.rule->name, m.age, m.growth()});
  }
  r.arrows_combed = comb_into(mol_).arrows_removed;
  r.loops_delta = mol_.loops_harvested() - loops_before;
  fill_counts(r, mol_);
  return r;
}

Trace run(Molecule m, const EngineConfig& cfg, const StepObserver& observe) {
  Engine e(std::move(m), cfg);
  Trace t;
  while (e.steps() < cfg.horizon) {
    StepReport r = e.step();
    if (observe) observe(r, e.molecule());
    bool dead = r.dead;
    t.reports.push_back(std::move(r));
    if (dead) {
      t.reason = Termination::death;
      break;
    }
  }
  t.final_certificate = canonical_certificate(e.molecule());
  return t;
}

bool is_dead(const Molecule& m, const Chemistry& c) { return find_matches(m, c).empty(); }

std::string trace_csv(const Trace& t, Family family) {
  std::ostringstream out;
  auto types = types_of(family);
  out << "step,matches,applied,nodes";
  for (auto ty : types) {
    if (ty != NodeType::Arrow) out << ',' << type_name(ty);
  }
  out << ",arrows,loops,dead\n";
  for (const auto& r : t.reports) {
    out << r.step << ',' << r.matches_found << ',' << r.applied.size() << ',' << r.node_count;
    for (auto ty : types) {
      if (ty != NodeType::Arrow) out << ',' << r.counts[static_cast<std::size_t>(ty)];
    }
    out << ',' << r.arrows_combed << ',' << r.loops_delta << ',' << (r.dead ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace quinelab
