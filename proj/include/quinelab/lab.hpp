#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "quinelab/certificate.hpp"
#include "quinelab/chemistry.hpp"
#include "quinelab/engine.hpp"

namespace quinelab {

enum class QuineStatus : std::uint8_t { quine, dead, aperiodic_within_horizon };

std::string_view status_name(QuineStatus s);

struct QuineVerdict {
  QuineStatus status = QuineStatus::aperiodic_within_horizon;
  std::uint64_t preperiod = 0;
  std::uint64_t period = 0;       // quine only
  std::uint64_t death_step = 0;   // dead only
  std::uint64_t steps_run = 0;
  bool truncated = false;         // stopped early by max_nodes
  std::vector<Certificate> witnesses;  // states at preperiod and preperiod + period
};

struct VerifyOptions {
  ChemistryId chemistry = ChemistryId::ic;
  GrowthClass strategy = GrowthClass::grow;
  std::uint64_t horizon = 200;
  // Give up (aperiodic, truncated) once the molecule exceeds this many
  // nodes. 0 disables the cut.
  std::size_t max_nodes = 0;
};

QuineVerdict verify_quine(const Molecule& m, const VerifyOptions& opt);

// Same, also returning the first state of the cycle (quine only).
QuineVerdict verify_quine(const Molecule& m, const VerifyOptions& opt, Molecule* cycle_state);

struct MetabolismSeries {
  std::vector<std::size_t> node_counts;  // after each step
  std::vector<std::size_t> activity;     // rewrites applied in each step
  std::optional<std::uint64_t> death_step;
  bool overflow = false;  // stopped at max_nodes
  // bounded-range indicator over the trailing window
  std::size_t window_min = 0;
  std::size_t window_max = 0;
};

struct MetabolismOptions {
  ChemistryId chemistry = ChemistryId::chemlambda;
  double w = 0.5;
  std::uint64_t horizon = 10000;
  std::size_t window = 100;
  std::size_t max_nodes = 0;
};

MetabolismSeries metabolism_run(const Molecule& m, const MetabolismOptions& opt, std::uint64_t seed);

struct LifetimeSummary {
  std::size_t runs = 0;
  std::size_t deaths = 0;
  std::size_t overflows = 0;
  double death_fraction = 0.0;
  std::vector<std::uint64_t> death_steps;  // sorted
  // min, q25, median, q75, max of death steps; empty without deaths
  std::vector<std::uint64_t> quantiles;

  friend bool operator==(const LifetimeSummary&, const LifetimeSummary&) = default;
};

// OpenMP over seeds. workers <= 0 uses the OpenMP default.
LifetimeSummary lifetime_stats(const Molecule& m, const MetabolismOptions& opt,
                               std::span<const std::uint64_t> seeds, int workers = 0);
// Reference implementation, one seed after another.
LifetimeSummary lifetime_stats_serial(const Molecule& m, const MetabolismOptions& opt,
                                      std::span<const std::uint64_t> seeds);

// First index k such that the components of states[k] contain two disjoint
// copies of the components of `original`. For a connected original this is
// "two components isomorphic to the original".
std::optional<std::size_t> detect_replication(std::span<const Molecule> states,
                                              const Molecule& original);

struct RandomFamily {
  enum class Kind : std::uint8_t { ic, chemlambda_nodes };
  Kind kind = Kind::ic;
  std::size_t min_nodes = 6;
  std::size_t max_nodes = 6;
  std::vector<std::pair<NodeType, double>> weights;
  std::uint64_t seed = 0;
};

// Equal weights over GAMMA, DELTA, E or over L, A, FI, FO, FOE, T.
RandomFamily default_family(RandomFamily::Kind kind, std::size_t min_nodes, std::size_t max_nodes);
// Equal weights over L, A, FI, FOE, T.
RandomFamily diric_family(std::size_t min_nodes, std::size_t max_nodes);

std::optional<RandomFamily::Kind> parse_family_kind(std::string_view s);

// Throws std::invalid_argument for an unusable family.
Molecule random_molecule(const RandomFamily& f);

struct FoundQuine {
  std::uint64_t sample = 0;
  std::uint64_t seed = 0;
  std::string mol;
  std::string cycle_mol;
  std::size_t nodes = 0;
  QuineVerdict verdict;
};

struct SearchOptions {
  RandomFamily family;
  std::uint64_t samples = 1000;
  VerifyOptions verify;
  int workers = 0;
  // Keep only the first sample of each isomorphism class.
  bool dedupe = true;
};

struct SearchReport {
  std::uint64_t tried = 0;
  std::uint64_t seed = 0;
  std::uint64_t quines = 0;  // before dedupe
  std::uint64_t dead = 0;
  std::uint64_t aperiodic = 0;
  std::vector<FoundQuine> found;
};

SearchReport search_quines(const SearchOptions& opt);
SearchReport search_quines_serial(const SearchOptions& opt);

// One JSON object per found quine.
std::string search_jsonl(const SearchReport& r, const SearchOptions& opt);

}  // namespace quinelab
