#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "quinelab/certificate.hpp"
#include "quinelab/chemistry.hpp"
#include "quinelab/molecule.hpp"
#include "quinelab/rng.hpp"

namespace quinelab {

enum class Algorithm : std::uint8_t { random, older_first };

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view s);
std::optional<GrowthClass> parse_strategy(std::string_view s);

struct EngineConfig {
  ChemistryId chemistry = ChemistryId::chemlambda;
  Algorithm algorithm = Algorithm::older_first;
  double w = 0.5;  // GROW acceptance in random mode, SLIM gets 1 - w
  GrowthClass strategy = GrowthClass::grow;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 1000;
};

// Throws std::invalid_argument on out-of-range fields.
void check_config(const EngineConfig& cfg);

std::string describe(const EngineConfig& cfg);

struct AppliedRewrite {
  std::string rule;
  std::uint64_t age = 0;
  GrowthClass growth = GrowthClass::slim;
};

struct StepReport {
  std::uint64_t step = 0;
  std::size_t matches_found = 0;
  std::vector<AppliedRewrite> applied;
  std::size_t node_count = 0;
  std::array<std::size_t, kNodeTypeCount> counts{};
  std::size_t arrows_combed = 0;
  std::uint64_t loops_delta = 0;
  bool dead = false;
};

enum class Termination : std::uint8_t { horizon, death, period_detected };

std::string_view termination_name(Termination t);

struct Trace {
  std::vector<StepReport> reports;
  Certificate final_certificate;
  Termination reason = Termination::horizon;
};

class DeadState : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Engine {
 public:
  // Throws MolError when the molecule does not belong to the chemistry's
  // family or fails validation.
  Engine(Molecule m, EngineConfig cfg);

  StepReport step();

  const Molecule& molecule() const { return mol_; }
  const EngineConfig& config() const { return cfg_; }
  const Chemistry& chemistry() const { return *chem_; }
  std::uint64_t steps() const { return step_; }
  bool dead() const { return dead_; }

  // Steering. Takes effect at the next step.
  void set_weight(double w);
  void set_algorithm(Algorithm a, GrowthClass strategy);
  // Keeps the molecule; the step counter and ages carry on.
  void set_chemistry(ChemistryId id);

 private:
  std::vector<std::size_t> select(const std::vector<Match>& matches);

  Molecule mol_;
  EngineConfig cfg_;
  const Chemistry* chem_;
  Rng rng_;
  std::uint64_t step_ = 0;
  std::uint64_t birth_offset_ = 0;
  bool dead_ = false;
};

using StepObserver = std::function<void(const StepReport&, const Molecule&)>;

// Steps until death or cfg.horizon reports.
Trace run(Molecule m, const EngineConfig& cfg, const StepObserver& observe = {});

bool is_dead(const Molecule& m, const Chemistry& c);

// Header row plus one row per report. Per-type columns follow the family.
std::string trace_csv(const Trace& t, Family family);

}  // namespace quinelab
