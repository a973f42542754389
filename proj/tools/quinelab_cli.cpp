// quinelab: command-line front end.
#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "quinelab/catalog.hpp"
#include "quinelab/lab.hpp"
#include "quinelab/server.hpp"
#include "quinelab/translate.hpp"

using namespace quinelab;
namespace fs = std::filesystem;

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

ChemistryId chemistry_arg(const std::string& s) {
  auto c = parse_chemistry_id(s);
  if (!c) throw InputError("unknown chemistry '" + s + "' (chemlambda, diric, ic)");
  return *c;
}

Algorithm algorithm_arg(const std::string& s) {
  auto a = parse_algorithm(s);
  if (!a) throw InputError("unknown algorithm '" + s + "' (random, older-first)");
  return *a;
}

GrowthClass strategy_arg(const std::string& s) {
  auto g = parse_strategy(s);
  if (!g || *g == GrowthClass::neutral) throw InputError("unknown strategy '" + s + "' (grow, slim)");
  return *g;
}

Family family_for(ChemistryId id) {
  return id == ChemistryId::ic ? Family::undirected : Family::directed;
}

Molecule load_mol(const std::string& path, ChemistryId chem) {
  return parse_mol(read_file(path), family_for(chem));
}

// "K" or "A-B"
std::pair<std::size_t, std::size_t> node_range(const std::string& s) {
  try {
    auto dash = s.find('-');
    if (dash == std::string::npos) {
      auto k = std::stoul(s);
      return {k, k};
    }
    return {std::stoul(s.substr(0, dash)), std::stoul(s.substr(dash + 1))};
  } catch (const std::exception&) {
    throw InputError("bad node range '" + s + "'");
  }
}

void config_line(const std::string& sub, const std::string& rest) {
  std::cerr << "config: " << sub << " " << rest << "\n";
}

struct EngineArgs {
  std::string chemistry = "chemlambda";
  std::string algo = "older-first";
  double weights = 0.5;
  std::string strategy = "grow";
  std::uint64_t steps = 1000;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--chemistry", chemistry, "chemlambda | diric | ic")->capture_default_str();
    app->add_option("--algo", algo, "random | older-first")->capture_default_str();
    app->add_option("--weights", weights, "GROW acceptance w in random mode")->capture_default_str();
    app->add_option("--strategy", strategy, "grow | slim (older-first preference)")->capture_default_str();
    app->add_option("--steps", steps, "step horizon")->capture_default_str();
    app->add_option("--seed", seed, "RNG seed")->capture_default_str();
  }
  EngineConfig config() const {
    EngineConfig c;
    c.chemistry = chemistry_arg(chemistry);
    c.algorithm = algorithm_arg(algo);
    c.w = weights;
    c.strategy = strategy_arg(strategy);
    c.horizon = steps;
    c.seed = seed;
    check_config(c);
    return c;
  }
};

int cmd_run(const std::string& in, const EngineArgs& ea, const std::string& trace_path,
            const std::string& out_path, const std::string& snap_dir) {
  EngineConfig cfg = ea.config();
  Molecule m = load_mol(in, cfg.chemistry);
  config_line("run", "in=" + in + " " + describe(cfg));
  if (!snap_dir.empty()) fs::create_directories(snap_dir);
  StepObserver obs;
  if (!snap_dir.empty()) {
    obs = [&](const StepReport& r, const Molecule& now) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%06llu.mol", static_cast<unsigned long long>(r.step));
      write_file((fs::path(snap_dir) / name).string(), serialize_mol(now));
    };
  }
  Molecule final_state;
  StepObserver keep = [&](const StepReport& r, const Molecule& now) {
    if (obs) obs(r, now);
    final_state = now;
  };
  final_state = m;
  Trace t = run(m, cfg, keep);
  if (!trace_path.empty()) write_file(trace_path, trace_csv(t, m.family()));
  if (!out_path.empty()) write_file(out_path, serialize_mol(final_state));
  bool dead = t.reason == Termination::death;
  std::cout << "steps=" << t.reports.size() << " nodes=" << final_state.node_count()
            << " dead=" << (dead ? "true" : "false") << " reason=" << termination_name(t.reason)
            << "\n";
  return 0;
}

int cmd_quine_check(const std::string& in, const std::string& chem, const std::string& strategy,
                    std::uint64_t horizon, std::size_t max_nodes) {
  VerifyOptions opt;
  opt.chemistry = chemistry_arg(chem);
  opt.strategy = strategy_arg(strategy);
  opt.horizon = horizon;
  opt.max_nodes = max_nodes;
  Molecule m = load_mol(in, opt.chemistry);
  config_line("quine-check", "in=" + in + " chemistry=" + std::string(chemistry_name(opt.chemistry)) +
                                 " strategy=" + std::string(growth_name(opt.strategy)) +
                                 " horizon=" + std::to_string(horizon) +
                                 " max_nodes=" + std::to_string(max_nodes));
  QuineVerdict v = verify_quine(m, opt);
  std::cout << "status=" << status_name(v.status);
  switch (v.status) {
    case QuineStatus::quine:
      std::cout << " period=" << v.period << " preperiod=" << v.preperiod << "\n";
      return 0;
    case QuineStatus::dead:
      std::cout << " death_step=" << v.death_step << "\n";
      return 2;
    case QuineStatus::aperiodic_within_horizon:
      std::cout << " steps=" << v.steps_run << (v.truncated ? " truncated=true" : "") << "\n";
      return 3;
  }
  return 3;
}

struct SearchArgs {
  std::string family = "ic";
  std::string nodes = "5-8";
  std::uint64_t samples = 1000;
  std::uint64_t seed = 0;
  std::string chemistry;
  std::string strategy = "grow";
  std::uint64_t horizon = 200;
  std::size_t max_nodes = 100;
  std::string out;
  int workers = 0;
  bool keep_duplicates = false;
};

int cmd_search(const SearchArgs& a) {
  auto [lo, hi] = node_range(a.nodes);
  SearchOptions o;
  if (a.family == "ic") {
    o.family = default_family(RandomFamily::Kind::ic, lo, hi);
  } else if (a.family == "chemlambda") {
    o.family = default_family(RandomFamily::Kind::chemlambda_nodes, lo, hi);
  } else if (a.family == "diric") {
    o.family = diric_family(lo, hi);
  } else {
    throw InputError("unknown family '" + a.family + "' (ic, chemlambda, diric)");
  }
  o.family.seed = a.seed;
  o.samples = a.samples;
  std::string chem = a.chemistry.empty() ? (a.family == "ic" ? "ic" : a.family) : a.chemistry;
  o.verify.chemistry = chemistry_arg(chem);
  if ((o.verify.chemistry == ChemistryId::ic) != (a.family == "ic"))
    throw InputError("family " + a.family + " does not match chemistry " + chem);
  o.verify.strategy = strategy_arg(a.strategy);
  o.verify.horizon = a.horizon;
  o.verify.max_nodes = a.max_nodes;
  o.workers = a.workers;
  o.dedupe = !a.keep_duplicates;
  if (a.samples < 1) throw InputError("--samples must be at least 1");
  config_line("search", "family=" + a.family + " nodes=" + std::to_string(lo) + "-" + std::to_string(hi) +
                            " samples=" + std::to_string(a.samples) + " seed=" + std::to_string(a.seed) +
                            " chemistry=" + chem + " strategy=" + std::string(growth_name(o.verify.strategy)) +
                            " horizon=" + std::to_string(a.horizon) +
                            " max_nodes=" + std::to_string(a.max_nodes) +
                            " dedupe=" + (o.dedupe ? "true" : "false") +
                            " workers=" + std::to_string(a.workers));
  auto t0 = std::chrono::steady_clock::now();
  SearchReport r = search_quines(o);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string jsonl = search_jsonl(r, o);
  if (a.out.empty()) {
    std::cout << jsonl;
  } else {
    write_file(a.out, jsonl);
  }
  std::cerr << "tried=" << r.tried << " quines=" << r.quines << " distinct=" << r.found.size()
            << " dead=" << r.dead << " aperiodic=" << r.aperiodic << " seconds=" << secs << "\n";
  return 0;
}

int cmd_lambda(const std::string& term, bool reduce, const EngineArgs& ea, const std::string& out) {
  TermPtr t;
  try {
    t = parse_lambda(term);
  } catch (const LambdaSyntaxError& e) {
    throw InputError(e.what());
  }
  Molecule m = lambda_to_mol(*t);
  std::string text;
  if (reduce) {
    EngineConfig cfg = ea.config();
    if (cfg.chemistry == ChemistryId::ic) throw InputError("lambda terms reduce under chemlambda or diric");
    config_line("lambda", "term=" + to_string(*t) + " reduce=true " + describe(cfg));
    Molecule last = m;
    Trace tr = run(m, cfg, [&](const StepReport&, const Molecule& now) { last = now; });
    std::cerr << "steps=" << tr.reports.size() << " dead=" << (tr.reason == Termination::death ? "true" : "false")
              << "\n";
    text = serialize_mol(last);
  } else {
    config_line("lambda", "term=" + to_string(*t) + " reduce=false");
    text = serialize_mol(m);
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  return 0;
}

int cmd_translate(const std::string& from, const std::string& to, const std::string& in,
                  const std::string& out) {
  if (from != "ic" || to != "diric") throw InputError("only --from ic --to diric is supported");
  config_line("translate", "from=ic to=diric in=" + in + " out=" + (out.empty() ? "-" : out));
  Molecule m = load_mol(in, ChemistryId::ic);
  Translation t = ic_to_diric(m);
  std::string text = serialize_mol(t.mol);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
  }
  std::cerr << "nodes " << m.node_count() << " -> " << t.mol.node_count() << "\n";
  return 0;
}

int cmd_lifetime(const std::string& in, const std::string& chem, double w, std::uint64_t seeds,
                 std::uint64_t first_seed, std::uint64_t horizon, std::size_t max_nodes, int workers) {
  MetabolismOptions opt;
  opt.chemistry = chemistry_arg(chem);
  opt.w = w;
  opt.horizon = horizon;
  opt.max_nodes = max_nodes;
  if (!(w >= 0.0 && w <= 1.0)) throw InputError("--weights must be in [0, 1]");
  if (seeds < 1) throw InputError("--seeds must be at least 1");
  Molecule m = load_mol(in, opt.chemistry);
  config_line("lifetime", "in=" + in + " chemistry=" + chem + " w=" + std::to_string(w) +
                              " seeds=" + std::to_string(first_seed) + ".." +
                              std::to_string(first_seed + seeds - 1) + " horizon=" +
                              std::to_string(horizon) + " max_nodes=" + std::to_string(max_nodes));
  std::vector<std::uint64_t> s(seeds);
  for (std::uint64_t i = 0; i < seeds; ++i) s[i] = first_seed + i;
  LifetimeSummary sum = lifetime_stats(m, opt, s, workers);
  std::cout << "runs=" << sum.runs << " deaths=" << sum.deaths << " overflows=" << sum.overflows
            << " death_fraction=" << sum.death_fraction;
  if (!sum.quantiles.empty()) {
    std::cout << " death_steps(min,q25,median,q75,max)=";
    for (std::size_t i = 0; i < sum.quantiles.size(); ++i) std::cout << (i ? "," : "") << sum.quantiles[i];
  }
  std::cout << "\n";
  return 0;
}

int cmd_serve(const std::string& bind, const std::string& static_dir, const std::string& catalog_dir) {
  ServerOptions o;
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw InputError("--bind wants ADDR:PORT");
  o.address = bind.substr(0, colon);
  try {
    int p = std::stoi(bind.substr(colon + 1));
    if (p < 0 || p > 65535) throw std::out_of_range("port");
    o.port = static_cast<unsigned short>(p);
  } catch (const std::exception&) {
    throw InputError("bad port in '" + bind + "'");
  }
  if (!static_dir.empty()) {
    if (!fs::is_directory(static_dir)) throw InputError("no such directory " + static_dir);
    o.static_dir = static_dir;
  }
  if (!catalog_dir.empty()) o.catalog = std::make_shared<const Catalog>(Catalog::load(catalog_dir));
  o.handle_signals = true;
  Server server(o);
  config_line("serve", "bind=" + o.address + ":" + std::to_string(server.port()) +
                           " static=" + (static_dir.empty() ? "-" : static_dir) +
                           " catalog=" + (catalog_dir.empty() ? "-" : catalog_dir));
  server.run();
  std::cerr << "shutdown\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quinelab: chemlambda and directed interaction combinators workbench"};
  app.require_subcommand(1);

  std::string in, out, trace, snaps;
  EngineArgs ea;
  auto* run_cmd = app.add_subcommand("run", "evolve a molecule and write its trace");
  run_cmd->add_option("--in", in, "input mol file")->required();
  ea.add(run_cmd);
  run_cmd->add_option("--trace", trace, "CSV trace output");
  run_cmd->add_option("--out", out, "final molecule output");
  run_cmd->add_option("--snapshots", snaps, "directory for one mol file per step");

  std::string qc_chem = "ic", qc_strategy = "grow";
  std::uint64_t qc_horizon = 200;
  std::size_t qc_max = 0;
  auto* qc = app.add_subcommand("quine-check", "older-first periodicity check (exit 0 quine, 2 dead, 3 aperiodic)");
  qc->add_option("--in", in, "input mol file")->required();
  qc->add_option("--chemistry", qc_chem)->capture_default_str();
  qc->add_option("--strategy", qc_strategy)->capture_default_str();
  qc->add_option("--horizon", qc_horizon)->capture_default_str();
  qc->add_option("--max-nodes", qc_max, "give up above this size, 0 = never")->capture_default_str();

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "random quine search");
  search->add_option("--family", sa.family, "ic | chemlambda | diric")->capture_default_str();
  search->add_option("--nodes", sa.nodes, "K or MIN-MAX")->capture_default_str();
  search->add_option("--samples", sa.samples)->capture_default_str();
  search->add_option("--seed", sa.seed)->capture_default_str();
  search->add_option("--chemistry", sa.chemistry, "defaults to the family's own");
  search->add_option("--strategy", sa.strategy)->capture_default_str();
  search->add_option("--horizon", sa.horizon)->capture_default_str();
  search->add_option("--max-nodes", sa.max_nodes)->capture_default_str();
  search->add_option("--out", sa.out, "JSONL output (stdout if absent)");
  search->add_option("--workers", sa.workers, "OpenMP threads, 0 = default")->capture_default_str();
  search->add_flag("--keep-duplicates", sa.keep_duplicates, "report every quine sample");

  std::string term;
  bool reduce = false;
  EngineArgs la;
  auto* lambda = app.add_subcommand("lambda", "translate (and optionally reduce) a lambda term");
  lambda->add_option("term", term, "e.g. \"(\\x.x) z\"")->required();
  lambda->add_flag("--reduce", reduce);
  la.add(lambda);
  lambda->add_option("--out", out);

  std::string from = "ic", to = "diric";
  auto* tr = app.add_subcommand("translate", "IC molecule to dirIC");
  tr->add_option("--from", from)->capture_default_str();
  tr->add_option("--to", to)->capture_default_str();
  tr->add_option("--in", in)->required();
  tr->add_option("--out", out);

  std::string lt_chem = "chemlambda";
  double lt_w = 0.5;
  std::uint64_t lt_seeds = 100, lt_first = 1, lt_horizon = 10000;
  std::size_t lt_max = 0;
  int lt_workers = 0;
  auto* lt = app.add_subcommand("lifetime", "death statistics under the random algorithm");
  lt->add_option("--in", in)->required();
  lt->add_option("--chemistry", lt_chem)->capture_default_str();
  lt->add_option("--weights", lt_w)->capture_default_str();
  lt->add_option("--seeds", lt_seeds, "number of seeds")->capture_default_str();
  lt->add_option("--first-seed", lt_first)->capture_default_str();
  lt->add_option("--horizon", lt_horizon)->capture_default_str();
  lt->add_option("--max-nodes", lt_max)->capture_default_str();
  lt->add_option("--workers", lt_workers)->capture_default_str();

  std::string bind = "127.0.0.1:8080", static_dir, catalog_dir;
  auto* serve = app.add_subcommand("serve", "session protocol over WebSocket");
  serve->add_option("--bind", bind, "ADDR:PORT")->capture_default_str();
  serve->add_option("--static", static_dir, "UI asset directory");
  serve->add_option("--catalog", catalog_dir, "catalog directory for load by name");

  std::string rules_chem = "chemlambda";
  auto* rules = app.add_subcommand("rules", "print a rule set as JSON lines");
  rules->add_option("--chemistry", rules_chem)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return cmd_run(in, ea, trace, out, snaps);
    if (*qc) return cmd_quine_check(in, qc_chem, qc_strategy, qc_horizon, qc_max);
    if (*search) return cmd_search(sa);
    if (*lambda) return cmd_lambda(term, reduce, la, out);
    if (*tr) return cmd_translate(from, to, in, out);
    if (*lt) return cmd_lifetime(in, lt_chem, lt_w, lt_seeds, lt_first, lt_horizon, lt_max, lt_workers);
    if (*serve) return cmd_serve(bind, static_dir, catalog_dir);
    if (*rules) {
      auto c = chemistry_arg(rules_chem);
      config_line("rules", "chemistry=" + std::string(chemistry_name(c)));
      std::cout << export_rules(ruleset(c));
      return 0;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const MolError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
