#include "quinelab/session.hpp"

#include <cmath>
#include <stdexcept>

namespace quinelab {

using nlohmann::json;

namespace {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json event(std::string_view type) { return json{{"v", kProtocolVersion}, {"type", type}}; }

json error_event(const std::string& message, const json& cmd) {
  json e = event("error");
  e["message"] = message;
  if (cmd.is_object() && cmd.contains("id")) e["id"] = cmd["id"];
  return e;
}

template <class T>
T field(const json& cmd, const char* key) {
  if (!cmd.contains(key)) throw ProtocolError(std::string("missing field '") + key + "'");
  try {
    return cmd.at(key).get<T>();
  } catch (const json::exception&) {
    throw ProtocolError(std::string("bad field '") + key + "'");
  }
}

ChemistryId chemistry_field(const json& cmd, const char* key) {
  auto s = field<std::string>(cmd, key);
  auto id = parse_chemistry_id(s);
  if (!id) throw ProtocolError("unknown chemistry '" + s + "'");
  return *id;
}

Family family_for(ChemistryId id) {
  return id == ChemistryId::ic ? Family::undirected : Family::directed;
}

}  // namespace

json report_json(const StepReport& r, Family family) {
  json applied = json::array();
  for (const auto& a : r.applied)
    applied.push_back({{"rule", a.rule}, {"age", a.age}, {"growth", growth_name(a.growth)}});
  json counts = json::object();
  for (NodeType t : types_of(family))
    if (t != NodeType::Arrow) counts[std::string(type_name(t))] = r.counts[static_cast<std::size_t>(t)];
  return {{"engine_step", r.step},      {"matches", r.matches_found},
          {"applied", applied},         {"nodes", r.node_count},
          {"counts", counts},           {"arrows_combed", r.arrows_combed},
          {"loops_delta", r.loops_delta}, {"dead", r.dead}};
}

json state_json(const Molecule& m, std::uint64_t now) {
  json nodes = json::array();
  for (const auto& [id, n] : m.nodes())
    nodes.push_back({{"id", id},
                     {"type", type_name(n.type)},
                     {"age", now >= n.birth_step ? now - n.birth_step : 0}});
  json edges = json::array();
  for (const auto& [tag, e] : m.edges()) {
    if (!e.complete()) continue;
    edges.push_back({{"tag", tag},
                     {"from", {{"node", e.ends[0].node}, {"port", e.ends[0].port}}},
                     {"to", {{"node", e.ends[1].node}, {"port", e.ends[1].port}}}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

std::string encode_event(const json& e) { return e.dump() + "\n"; }

Session::Session(std::shared_ptr<const Catalog> catalog, SessionOptions opt)
    : catalog_(std::move(catalog)), opt_(opt) {}

std::vector<Session::Event> Session::handle_line(std::string_view line) {
  json cmd;
  try {
    cmd = json::parse(line);
  } catch (const json::exception&) {
    return {error_event("malformed message", json())};
  }
  return handle(cmd);
}

std::vector<Session::Event> Session::handle(const json& cmd) {
  try {
    if (!cmd.is_object()) throw ProtocolError("message is not an object");
    if (!cmd.contains("v") || cmd["v"] != kProtocolVersion)
      throw ProtocolError("unsupported protocol version");
    return dispatch(cmd);
  } catch (const ProtocolError& e) {
    return {error_event(e.what(), cmd)};
  } catch (const MolError& e) {
    return {error_event(e.what(), cmd)};
  } catch (const std::invalid_argument& e) {
    return {error_event(e.what(), cmd)};
  }
}

Session::Event Session::ack(const json& cmd) const {
  json e = event("ack");
  e["id"] = cmd.contains("id") ? cmd["id"] : json();
  e["command"] = cmd["type"];
  e["config"] = {{"chemistry", chemistry_name(cfg_.chemistry)},
                 {"algorithm", algorithm_name(cfg_.algorithm)},
                 {"strategy", growth_name(cfg_.strategy)},
                 {"w", cfg_.w},
                 {"seed", cfg_.seed},
                 {"running", running_},
                 {"steps_per_second", rate_}};
  return e;
}

Session::Event Session::state_event() const {
  json e = event("state");
  e["step"] = reports_;
  e["engine_step"] = engine_->steps();
  json body = state_json(engine_->molecule(), engine_->steps());
  e["nodes"] = std::move(body["nodes"]);
  e["edges"] = std::move(body["edges"]);
  return e;
}

std::uint64_t Session::state_period() const {
  std::uint64_t every = engine_->molecule().node_count() < opt_.large_nodes ? opt_.state_every
                                                                            : opt_.large_state_every;
  if (congested_) every *= opt_.congested_factor;
  return every == 0 ? 1 : every;
}

void Session::step_n(std::uint64_t n, std::vector<Event>& out) {
  for (std::uint64_t i = 0; i < n && !engine_->dead(); ++i) {
    StepReport r = engine_->step();
    ++reports_;
    json rep = report_json(r, engine_->molecule().family());
    rep["v"] = kProtocolVersion;
    rep["type"] = "report";
    rep["step"] = reports_;
    out.push_back(std::move(rep));
    if (r.dead || r.step % state_period() == 0) out.push_back(state_event());
    if (r.dead) {
      running_ = false;
      json d = event("death");
      d["step"] = reports_;
      d["engine_step"] = r.step;
      out.push_back(std::move(d));
    }
  }
}

std::vector<Session::Event> Session::dispatch(const json& cmd) {
  auto type = field<std::string>(cmd, "type");
  std::vector<Event> out;

  auto need_loaded = [&] {
    if (!engine_) throw ProtocolError("no molecule loaded");
  };

  if (type == "load") {
    ChemistryId chem = cfg_.chemistry;
    std::string text;
    if (cmd.contains("catalog_name")) {
      auto name = field<std::string>(cmd, "catalog_name");
      const CatalogEntry* entry = catalog_ ? catalog_->find(name) : nullptr;
      if (!entry) throw ProtocolError("unknown catalog entry '" + name + "'");
      text = entry->mol_text;
      chem = entry->chemistry;
    } else {
      text = field<std::string>(cmd, "mol_text");
    }
    if (cmd.contains("chemistry")) chem = chemistry_field(cmd, "chemistry");
    Molecule m = parse_mol(text, family_for(chem));
    EngineConfig cfg = cfg_;
    cfg.chemistry = chem;
    Engine eng(m, cfg);  // validates before anything changes
    cfg_ = cfg;
    original_ = std::move(m);
    engine_.emplace(std::move(eng));
    running_ = false;
    clock_ = 0.0;
    out.push_back(ack(cmd));
    json l = event("loaded");
    l["nodes"] = original_->node_count();
    l["edges"] = original_->edge_count();
    l["chemistry"] = chemistry_name(chem);
    out.push_back(std::move(l));
    return out;
  }

  if (type == "set_algorithm") {
    auto name = field<std::string>(cmd, "algorithm");
    auto a = parse_algorithm(name);
    if (!a) throw ProtocolError("unknown algorithm '" + name + "'");
    GrowthClass s = cfg_.strategy;
    if (cmd.contains("strategy")) {
      auto sname = field<std::string>(cmd, "strategy");
      auto p = parse_strategy(sname);
      if (!p) throw ProtocolError("unknown strategy '" + sname + "'");
      s = *p;
    }
    if (engine_) engine_->set_algorithm(*a, s);
    cfg_.algorithm = *a;
    cfg_.strategy = s;
    out.push_back(ack(cmd));
    return out;
  }

  if (type == "set_weights") {
    auto w = field<double>(cmd, "w");
    if (!(w >= 0.0 && w <= 1.0)) throw ProtocolError("w must be in [0, 1]");
    if (engine_) engine_->set_weight(w);
    cfg_.w = w;
    out.push_back(ack(cmd));
    return out;
  }

  if (type == "set_chemistry") {
    ChemistryId id = chemistry_field(cmd, "id");
    if (engine_) engine_->set_chemistry(id);
    cfg_.chemistry = id;
    out.push_back(ack(cmd));
    return out;
  }

  if (type == "step") {
    need_loaded();
    auto n = field<std::int64_t>(cmd, "n");
    if (n < 0 || static_cast<std::uint64_t>(n) > opt_.max_burst)
      throw ProtocolError("n out of range");
    if (n > 0 && engine_->dead()) throw ProtocolError("molecule is dead");
    out.push_back(ack(cmd));
    step_n(static_cast<std::uint64_t>(n), out);
    return out;
  }

  if (type == "run") {
    need_loaded();
    auto r = field<double>(cmd, "steps_per_second");
    if (!(r > 0.0 && r <= opt_.max_rate)) throw ProtocolError("steps_per_second out of range");
    if (engine_->dead()) throw ProtocolError("molecule is dead");
    rate_ = r;
    running_ = true;
    clock_ = 0.0;
    out.push_back(ack(cmd));
    return out;
  }

  if (type == "pause") {
    running_ = false;
    out.push_back(ack(cmd));
    return out;
  }

  if (type == "snapshot") {
    need_loaded();
    out.push_back(ack(cmd));
    out.push_back(state_event());
    return out;
  }

  if (type == "reset") {
    need_loaded();
    EngineConfig cfg = cfg_;
    if (cmd.contains("seed")) cfg.seed = field<std::uint64_t>(cmd, "seed");
    engine_.emplace(*original_, cfg);
    cfg_ = cfg;
    running_ = false;
    clock_ = 0.0;
    out.push_back(ack(cmd));
    out.push_back(state_event());
    return out;
  }

  throw ProtocolError("unknown command '" + type + "'");
}

std::vector<Session::Event> Session::tick(double dt_seconds) {
  std::vector<Event> out;
  if (!running_ || !engine_ || !(dt_seconds > 0.0)) return out;
  clock_ += dt_seconds * rate_;
  double whole = std::floor(clock_);
  auto n = static_cast<std::uint64_t>(std::min(whole, static_cast<double>(opt_.max_burst)));
  clock_ -= whole;  // a stalled transport does not build up a debt
  step_n(n, out);
  return out;
}

}  // namespace quinelab
