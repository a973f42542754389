#include "quinelab/lab.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <json.hpp>
#include <omp.h>

#include "quinelab/rng.hpp"

namespace quinelab {

std::string_view status_name(QuineStatus s) {
  switch (s) {
    case QuineStatus::quine:
      return "quine";
    case QuineStatus::dead:
      return "dead";
    case QuineStatus::aperiodic_within_horizon:
      return "aperiodic_within_horizon";
  }
  return "?";
}

QuineVerdict verify_quine(const Molecule& m, const VerifyOptions& opt) {
  return verify_quine(m, opt, nullptr);
}

QuineVerdict verify_quine(const Molecule& m, const VerifyOptions& opt, Molecule* cycle_state) {
  EngineConfig cfg;
  cfg.chemistry = opt.chemistry;
  cfg.algorithm = Algorithm::older_first;
  cfg.strategy = opt.strategy;
  cfg.horizon = opt.horizon;
  Engine e(m, cfg);

  QuineVerdict v;
  std::map<Certificate, std::vector<std::pair<std::uint64_t, Molecule>>> seen;
  seen[canonical_certificate(m)].emplace_back(0, m);
  while (e.steps() < opt.horizon) {
    StepReport r = e.step();
    v.steps_run = r.step;
    if (r.dead) {
      v.status = QuineStatus::dead;
      v.death_step = r.step;
      return v;
    }
    if (opt.max_nodes != 0 && r.node_count > opt.max_nodes) {
      v.truncated = true;
      return v;
    }
    Certificate c = canonical_certificate(e.molecule());
    auto& bucket = seen[c];
    for (const auto& [step, state] : bucket) {
      if (!isomorphic(state, e.molecule())) continue;
      v.status = QuineStatus::quine;
      v.preperiod = step;
      v.period = r.step - step;
      v.witnesses = {c, c};
      if (cycle_state) *cycle_state = state;
      return v;
    }
    bucket.emplace_back(r.step, e.molecule());
  }
  return v;
}

MetabolismSeries metabolism_run(const Molecule& m, const MetabolismOptions& opt, std::uint64_t seed) {
  EngineConfig cfg;
  cfg.chemistry = opt.chemistry;
  cfg.algorithm = Algorithm::random;
  cfg.w = opt.w;
  cfg.seed = seed;
  cfg.horizon = opt.horizon;
  Engine e(m, cfg);
  MetabolismSeries s;
  while (e.steps() < opt.horizon) {
    StepReport r = e.step();
    s.node_counts.push_back(r.node_count);
    s.activity.push_back(r.applied.size());
    if (r.dead) {
      s.death_step = r.step;
      break;
    }
    if (opt.max_nodes != 0 && r.node_count > opt.max_nodes) {
      s.overflow = true;
      break;
    }
  }
  if (!s.node_counts.empty()) {
    std::size_t from = s.node_counts.size() > opt.window ? s.node_counts.size() - opt.window : 0;
    auto [lo, hi] = std::minmax_element(s.node_counts.begin() + static_cast<std::ptrdiff_t>(from),
                                        s.node_counts.end());
    s.window_min = *lo;
    s.window_max = *hi;
  }
  return s;
}

namespace {

LifetimeSummary summarize(const std::vector<MetabolismSeries>& runs) {
  LifetimeSummary out;
  out.runs = runs.size();
  for (const auto& r : runs) {
    if (r.death_step) out.death_steps.push_back(*r.death_step);
    out.overflows += r.overflow;
  }
  out.deaths = out.death_steps.size();
  out.death_fraction = out.runs ? static_cast<double>(out.deaths) / static_cast<double>(out.runs) : 0;
  std::sort(out.death_steps.begin(), out.death_steps.end());
  if (!out.death_steps.empty()) {
    const std::size_t n = out.death_steps.size();
    for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      out.quantiles.push_back(out.death_steps[static_cast<std::size_t>(q * static_cast<double>(n - 1))]);
    }
  }
  return out;
}

}  // namespace

LifetimeSummary lifetime_stats_serial(const Molecule& m, const MetabolismOptions& opt,
                                      std::span<const std::uint64_t> seeds) {
  if (seeds.empty()) throw std::invalid_argument("lifetime_stats needs at least one seed");
  std::vector<MetabolismSeries> runs;
  for (auto s : seeds) runs.push_back(metabolism_run(m, opt, s));
  return summarize(runs);
}

LifetimeSummary lifetime_stats(const Molecule& m, const MetabolismOptions& opt,
                               std::span<const std::uint64_t> seeds, int workers) {
  if (seeds.empty()) throw std::invalid_argument("lifetime_stats needs at least one seed");
  std::vector<MetabolismSeries> runs(seeds.size());
  const auto n = static_cast<std::int64_t>(seeds.size());
  const int threads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    runs[static_cast<std::size_t>(i)] = metabolism_run(m, opt, seeds[static_cast<std::size_t>(i)]);
  }
  return summarize(runs);
}

namespace {

// Multiset of components, grouped by isomorphism class.
struct ComponentClasses {
  std::vector<Molecule> reps;
  std::vector<std::size_t> counts;

  explicit ComponentClasses(const Molecule& m) {
    std::map<Certificate, std::vector<std::size_t>> by_cert;
    for (auto& c : connected_components(m)) {
      auto& slot = by_cert[canonical_certificate(c)];
      bool placed = false;
      for (auto k : slot) {
        if (isomorphic(reps[k], c)) {
          ++counts[k];
          placed = true;
          break;
        }
      }
      if (!placed) {
        slot.push_back(reps.size());
        reps.push_back(std::move(c));
        counts.push_back(1);
      }
    }
  }
};

}  // namespace

std::optional<std::size_t> detect_replication(std::span<const Molecule> states,
                                              const Molecule& original) {
  if (original.empty()) return std::nullopt;
  ComponentClasses want(original);
  for (std::size_t k = 0; k < states.size(); ++k) {
    if (states[k].node_count() < 2 * original.node_count()) continue;
    ComponentClasses have(states[k]);
    bool ok = true;
    for (std::size_t i = 0; i < want.reps.size() && ok; ++i) {
      std::size_t n = 0;
      for (std::size_t j = 0; j < have.reps.size(); ++j) {
        if (isomorphic(want.reps[i], have.reps[j])) n += have.counts[j];
      }
      ok = n >= 2 * want.counts[i];
    }
    if (ok) return k;
  }
  return std::nullopt;
}

RandomFamily default_family(RandomFamily::Kind kind, std::size_t min_nodes, std::size_t max_nodes) {
  RandomFamily f;
  f.kind = kind;
  f.min_nodes = min_nodes;
  f.max_nodes = max_nodes;
  if (kind == RandomFamily::Kind::ic) {
    f.weights = {{NodeType::GAMMA, 1}, {NodeType::DELTA, 1}, {NodeType::E, 1}};
  } else {
    f.weights = {{NodeType::L, 1},   {NodeType::A, 1}, {NodeType::FI, 1},
                 {NodeType::FO, 1},  {NodeType::FOE, 1}, {NodeType::T, 1}};
  }
  return f;
}

RandomFamily diric_family(std::size_t min_nodes, std::size_t max_nodes) {
  RandomFamily f = default_family(RandomFamily::Kind::chemlambda_nodes, min_nodes, max_nodes);
  f.weights = {{NodeType::L, 1}, {NodeType::A, 1}, {NodeType::FI, 1}, {NodeType::FOE, 1},
               {NodeType::T, 1}};
  return f;
}

std::optional<RandomFamily::Kind> parse_family_kind(std::string_view s) {
  if (s == "ic") return RandomFamily::Kind::ic;
  if (s == "chemlambda" || s == "chemlambda_nodes") return RandomFamily::Kind::chemlambda_nodes;
  return std::nullopt;
}

Molecule random_molecule(const RandomFamily& f) {
  const Family family =
      f.kind == RandomFamily::Kind::ic ? Family::undirected : Family::directed;
  if (f.min_nodes < 1 || f.max_nodes < f.min_nodes) {
    throw std::invalid_argument("random family: need 1 <= min_nodes <= max_nodes");
  }
  double total = 0;
  bool any_in = false, any_out = false;
  for (const auto& [t, w] : f.weights) {
    if (!(w >= 0)) throw std::invalid_argument("random family: negative weight");
    if (family_of(t) != family || is_boundary(t) || t == NodeType::Arrow) {
      throw std::invalid_argument("random family: type " + std::string(type_name(t)) +
                                  " cannot be drawn");
    }
    if (w == 0) continue;
    total += w;
    for (std::uint8_t k = 0; k < arity(t); ++k) {
      any_in = any_in || port_dir(t, k) == Dir::in;
      any_out = any_out || port_dir(t, k) == Dir::out;
    }
  }
  if (total <= 0) throw std::invalid_argument("random family: all weights are zero");
  if (family == Family::directed && (!any_in || !any_out)) {
    throw std::invalid_argument("random family: no in-ports or no out-ports to wire");
  }

  Rng rng(f.seed);
  const std::size_t n = f.min_nodes + rng.below(f.max_nodes - f.min_nodes + 1);
  std::vector<NodeSpec> specs(n);
  std::vector<std::pair<std::size_t, std::uint8_t>> ins, outs, halves;
  for (std::size_t i = 0; i < n; ++i) {
    double x = rng.uniform01() * total;
    NodeType pick = NodeType::T;
    for (const auto& [t, w] : f.weights) {
      if (w == 0) continue;
      pick = t;
      if (x < w) break;
      x -= w;
    }
    specs[i].type = pick;
    specs[i].tags.resize(arity(pick));
    for (std::uint8_t k = 0; k < arity(pick); ++k) {
      switch (port_dir(pick, k)) {
        case Dir::in:
          ins.emplace_back(i, k);
          break;
        case Dir::out:
          outs.emplace_back(i, k);
          break;
        case Dir::free:
          halves.emplace_back(i, k);
          break;
      }
    }
  }
  std::size_t next = 0;
  auto fresh = [&] { return "e" + std::to_string(next++); };
  auto put = [&](std::pair<std::size_t, std::uint8_t> h, const Tag& t) {
    specs[h.first].tags[h.second] = t;
  };
  if (family == Family::directed) {
    rng.shuffle(ins);
    rng.shuffle(outs);
    const std::size_t pairs = std::min(ins.size(), outs.size());
    for (std::size_t p = 0; p < pairs; ++p) {
      Tag t = fresh();
      put(ins[p], t);
      put(outs[p], t);
    }
    // leftovers stay single-use; assemble closes them with FRIN / FROUT
    for (std::size_t p = pairs; p < ins.size(); ++p) put(ins[p], fresh());
    for (std::size_t p = pairs; p < outs.size(); ++p) put(outs[p], fresh());
  } else {
    rng.shuffle(halves);
    std::size_t p = 0;
    for (; p + 1 < halves.size(); p += 2) {
      Tag t = fresh();
      put(halves[p], t);
      put(halves[p + 1], t);
    }
    if (p < halves.size()) {
      Tag t = fresh();
      put(halves[p], t);
      specs.push_back({NodeType::E, {t}, 0});
    }
  }
  return assemble(family, specs);
}

namespace {

struct SampleOutcome {
  QuineStatus status = QuineStatus::aperiodic_within_horizon;
  std::optional<FoundQuine> found;
};

SampleOutcome run_sample(const SearchOptions& opt, std::uint64_t i) {
  RandomFamily f = opt.family;
  f.seed = derive_seed(opt.family.seed, i);
  // round-trip through text so the reported molecule is exactly what gets
  // verified again later
  std::string text = serialize_mol(random_molecule(f));
  Molecule m = parse_mol(text, f.kind == RandomFamily::Kind::ic ? Family::undirected
                                                                 : Family::directed);
  Molecule cycle;
  QuineVerdict v = verify_quine(m, opt.verify, &cycle);
  SampleOutcome out;
  out.status = v.status;
  if (v.status == QuineStatus::quine) {
    out.found = FoundQuine{i, f.seed, std::move(text), serialize_mol(cycle), m.node_count(), v};
  }
  return out;
}

SearchReport merge(const SearchOptions& opt, std::vector<SampleOutcome>& outcomes) {
  SearchReport r;
  r.tried = outcomes.size();
  r.seed = opt.family.seed;
  const Family fam =
      opt.family.kind == RandomFamily::Kind::ic ? Family::undirected : Family::directed;
  std::map<Certificate, std::vector<Molecule>> kept;
  for (auto& o : outcomes) {
    switch (o.status) {
      case QuineStatus::quine:
        ++r.quines;
        break;
      case QuineStatus::dead:
        ++r.dead;
        break;
      case QuineStatus::aperiodic_within_horizon:
        ++r.aperiodic;
        break;
    }
    if (!o.found) continue;
    if (opt.dedupe) {
      Molecule m = parse_mol(o.found->mol, fam);
      auto& bucket = kept[canonical_certificate(m)];
      bool dup = std::any_of(bucket.begin(), bucket.end(),
                             [&](const Molecule& k) { return isomorphic(k, m); });
      if (dup) continue;
      bucket.push_back(std::move(m));
    }
    r.found.push_back(std::move(*o.found));
  }
  return r;
}

void check_search(const SearchOptions& opt) {
  if (opt.samples < 1) throw std::invalid_argument("search needs at least one sample");
}

}  // namespace

SearchReport search_quines_serial(const SearchOptions& opt) {
  check_search(opt);
  std::vector<SampleOutcome> outcomes(opt.samples);
  for (std::uint64_t i = 0; i < opt.samples; ++i) outcomes[i] = run_sample(opt, i);
  return merge(opt, outcomes);
}

SearchReport search_quines(const SearchOptions& opt) {
  check_search(opt);
  std::vector<SampleOutcome> outcomes(opt.samples);
  const auto n = static_cast<std::int64_t>(opt.samples);
  const int threads = opt.workers > 0 ? opt.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 64) num_threads(threads)
  for (std::int64_t i = 0; i < n; ++i) {
    outcomes[static_cast<std::size_t>(i)] = run_sample(opt, static_cast<std::uint64_t>(i));
  }
  return merge(opt, outcomes);
}

std::string search_jsonl(const SearchReport& r, const SearchOptions& opt) {
  std::string out;
  for (const auto& f : r.found) {
    nlohmann::ordered_json j;
    j["sample"] = f.sample;
    j["seed"] = f.seed;
    j["master_seed"] = r.seed;
    j["chemistry"] = chemistry_name(opt.verify.chemistry);
    j["strategy"] = growth_name(opt.verify.strategy);
    j["nodes"] = f.nodes;
    j["status"] = status_name(f.verdict.status);
    j["preperiod"] = f.verdict.preperiod;
    j["period"] = f.verdict.period;
    j["certificate"] = f.verdict.witnesses.empty() ? "" : f.verdict.witnesses.front().hex();
    j["mol"] = f.mol;
    j["cycle_mol"] = f.cycle_mol;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace quinelab
