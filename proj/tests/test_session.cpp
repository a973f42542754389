#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "quinelab/session.hpp"
#include "quinelab/translate.hpp"

using namespace quinelab;
using nlohmann::json;

namespace {

const char* kLoop4 = "L b t a\nT t\nFOE a b r\nT r";

json cmd(json body) {
  body["v"] = 1;
  return body;
}

std::vector<std::string> types(const std::vector<json>& evs) {
  std::vector<std::string> out;
  for (const auto& e : evs) out.push_back(e.at("type").get<std::string>());
  return out;
}

std::string idz() { return serialize_mol(lambda_to_mol(*parse_lambda("(\\x.x) z"))); }

json load(const std::string& text, const std::string& chem = "chemlambda") {
  return cmd({{"type", "load"}, {"mol_text", text}, {"chemistry", chem}});
}

}  // namespace

TEST_CASE("load then snapshot") {
  Session s;
  auto ev = s.handle(load(kLoop4));
  REQUIRE(types(ev) == std::vector<std::string>{"ack", "loaded"});
  CHECK(ev[1]["nodes"] == 4);
  CHECK(ev[1]["edges"] == 4);

  ev = s.handle(cmd({{"type", "snapshot"}, {"id", 7}}));
  REQUIRE(types(ev) == std::vector<std::string>{"ack", "state"});
  CHECK(ev[0]["id"] == 7);
  const json& st = ev[1];
  CHECK(st["nodes"].size() == 4);
  CHECK(st["edges"].size() == 4);
  for (const auto& n : st["nodes"]) CHECK(n["age"] == 0);
  // directed edges run out-port -> in-port
  Molecule m = parse_mol(kLoop4, Family::directed);
  for (const auto& e : st["edges"]) {
    Port from{e["from"]["node"].get<NodeId>(), e["from"]["port"].get<std::uint8_t>()};
    Port to{e["to"]["node"].get<NodeId>(), e["to"]["port"].get<std::uint8_t>()};
    const Node& a = s.engine()->molecule().node(from.node);
    const Node& b = s.engine()->molecule().node(to.node);
    CHECK(port_dir(a.type, from.port) == Dir::out);
    CHECK(port_dir(b.type, to.port) == Dir::in);
    CHECK(a.tags[from.port] == e["tag"].get<std::string>());
  }
}

TEST_CASE("protocol errors") {
  Session s;
  auto one = [&](const json& c) {
    auto ev = s.handle(c);
    REQUIRE(ev.size() == 1);
    return ev[0];
  };
  CHECK(one(cmd({{"type", "step"}, {"n", 1}}))["type"] == "error");
  CHECK(one(cmd({{"type", "run"}, {"steps_per_second", 5}}))["type"] == "error");
  CHECK(one(cmd({{"type", "snapshot"}}))["type"] == "error");
  CHECK(one(json{{"type", "pause"}})["type"] == "error");  // no version
  CHECK(one(json{{"v", 2}, {"type", "pause"}})["type"] == "error");
  CHECK(one(cmd({{"type", "fly"}}))["type"] == "error");
  auto bad = s.handle_line("{not json");
  REQUIRE(bad.size() == 1);
  CHECK(bad[0]["type"] == "error");

  auto w = one(cmd({{"type", "set_weights"}, {"w", 1.5}, {"id", "x"}}));
  CHECK(w["type"] == "error");
  CHECK(w["id"] == "x");
  CHECK(one(cmd({{"type", "set_weights"}, {"w", "half"}}))["type"] == "error");
  CHECK(one(load("L a b"))["type"] == "error");                 // wrong arity
  CHECK(one(load(kLoop4, "ic"))["type"] == "error");           // wrong family
  CHECK(one(cmd({{"type", "load"}, {"catalog_name", "nope"}}))["type"] == "error");
  CHECK_FALSE(s.loaded());

  // steering before load is kept for the next load
  CHECK(one(cmd({{"type", "set_weights"}, {"w", 0.25}}))["type"] == "ack");
  s.handle(load(kLoop4));
  CHECK(s.engine()->config().w == 0.25);

  CHECK(one(cmd({{"type", "set_chemistry"}, {"id", "ic"}}))["type"] == "error");
  CHECK(one(cmd({{"type", "set_chemistry"}, {"id", "diric"}}))["type"] == "ack");
  CHECK(s.engine()->chemistry().id() == ChemistryId::diric);
  CHECK(one(cmd({{"type", "step"}, {"n", -1}}))["type"] == "error");
}

TEST_CASE("step and death") {
  Session s;
  s.handle(load(idz()));
  auto zero = s.handle(cmd({{"type", "step"}, {"n", 0}}));
  CHECK(types(zero) == std::vector<std::string>{"ack"});

  auto ev = s.handle(cmd({{"type", "step"}, {"n", 5}}));
  CHECK(types(ev) ==
        std::vector<std::string>{"ack", "report", "state", "report", "state", "death"});
  CHECK(ev[1]["applied"][0]["rule"] == "A-L");
  CHECK(ev[1]["counts"]["FRIN"] == 1);
  CHECK(ev[3]["dead"] == true);
  CHECK(ev[5]["step"] == 2);
  CHECK(ev[4]["nodes"].size() == 2);

  auto again = s.handle(cmd({{"type", "step"}, {"n", 1}}));
  CHECK(again[0]["type"] == "error");
  CHECK(s.handle(cmd({{"type", "run"}, {"steps_per_second", 5}}))[0]["type"] == "error");
}

TEST_CASE("run, tick, pause") {
  Session s;
  s.handle(load(idz()));
  auto ack = s.handle(cmd({{"type", "run"}, {"steps_per_second", 4}}));
  CHECK(ack[0]["config"]["running"] == true);
  CHECK(s.tick(0.1).empty());  // 0.4 of a step
  auto ev = s.tick(1.0);
  REQUIRE_FALSE(ev.empty());
  CHECK(ev.back()["type"] == "death");
  CHECK_FALSE(s.running());
  CHECK(s.tick(10.0).empty());

  Session p;
  p.handle(load(kLoop4));
  p.handle(cmd({{"type", "run"}, {"steps_per_second", 10}}));
  CHECK(types(p.tick(0.1)) == std::vector<std::string>{"report", "state"});
  p.handle(cmd({{"type", "pause"}}));
  CHECK(p.tick(5.0).empty());
  p.handle(cmd({{"type", "run"}, {"steps_per_second", 10}}));
  CHECK(p.tick(0.35).size() == 6);
}

TEST_CASE("steering takes effect at the next step") {
  Session s;
  s.handle(cmd({{"type", "set_algorithm"}, {"algorithm", "random"}}));
  s.handle(cmd({{"type", "set_weights"}, {"w", 0.0}}));
  s.handle(load(kLoop4));
  auto count = [](const std::vector<json>& evs, const char* growth) {
    std::size_t n = 0;
    for (const auto& e : evs)
      if (e["type"] == "report")
        for (const auto& a : e["applied"]) n += a["growth"] == growth;
    return n;
  };
  auto low = s.handle(cmd({{"type", "step"}, {"n", 40}}));
  CHECK(count(low, "GROW") == 0);
  CHECK(count(low, "SLIM") > 0);
  s.handle(cmd({{"type", "reset"}, {"seed", 3}}));
  s.handle(cmd({{"type", "set_weights"}, {"w", 1.0}}));
  auto high = s.handle(cmd({{"type", "step"}, {"n", 40}}));
  CHECK(count(high, "SLIM") == 0);
  CHECK(count(high, "GROW") > 0);
}

TEST_CASE("reports are ordered and never dropped") {
  SessionOptions opt;
  opt.state_every = 3;
  opt.congested_factor = 4;
  Session s(nullptr, opt);
  s.handle(load(kLoop4));
  std::uint64_t last = 0;
  std::size_t reports = 0, states = 0;
  auto scan = [&](const std::vector<json>& evs) {
    for (const auto& e : evs) {
      if (e["type"] == "report") {
        CHECK(e["step"].get<std::uint64_t>() > last);
        last = e["step"];
        ++reports;
      }
      states += e["type"] == "state";
    }
  };
  scan(s.handle(cmd({{"type", "step"}, {"n", 12}})));
  CHECK(reports == 12);
  CHECK(states == 4);
  s.set_congested(true);
  scan(s.handle(cmd({{"type", "step"}, {"n", 24}})));
  CHECK(reports == 36);
  CHECK(states == 6);  // engine steps 24 and 36
  // a reset keeps the session counter going
  s.handle(cmd({{"type", "reset"}}));
  scan(s.handle(cmd({{"type", "step"}, {"n", 2}})));
  CHECK(reports == 38);
  CHECK(s.reports_sent() == 38);
}

TEST_CASE("sessions are independent") {
  Session a, b;
  a.handle(load(kLoop4));
  b.handle(load(idz()));
  a.handle(cmd({{"type", "set_chemistry"}, {"id", "diric"}}));
  b.handle(cmd({{"type", "step"}, {"n", 1}}));
  CHECK(a.engine()->steps() == 0);
  CHECK(b.engine()->chemistry().id() == ChemistryId::chemlambda);
}

TEST_CASE("same commands replay to the same events") {
  auto script = [] {
    Session s;
    std::vector<json> all;
    for (const json& c : {cmd({{"type", "set_algorithm"}, {"algorithm", "random"}}),
                          load(kLoop4), cmd({{"type", "reset"}, {"seed", 9}}),
                          cmd({{"type", "step"}, {"n", 30}})}) {
      auto ev = s.handle(c);
      all.insert(all.end(), ev.begin(), ev.end());
    }
    return all;
  };
  CHECK(script() == script());
}

TEST_CASE("catalog load by name") {
  auto dir = std::filesystem::temp_directory_path() / "quinelab_session_catalog";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "loop.mol") << kLoop4 << "\n";
  std::ofstream(dir / "manifest.json")
      << R"({"entries":[{"name":"loop","file":"loop.mol","chemistry":"diric",)"
      << R"("expected":"quine","period":1,"comments":"four nodes"}]})";
  auto cat = std::make_shared<const Catalog>(Catalog::load(dir));
  REQUIRE(cat->entries().size() == 1);
  CHECK(cat->find("loop")->comments == "four nodes");

  Session s(cat);
  auto ev = s.handle(cmd({{"type", "load"}, {"catalog_name", "loop"}}));
  REQUIRE(types(ev) == std::vector<std::string>{"ack", "loaded"});
  CHECK(ev[0]["config"]["chemistry"] == "diric");
  ev = s.handle(cmd({{"type", "load"}, {"catalog_name", "loop"}, {"chemistry", "chemlambda"}}));
  CHECK(ev[1]["chemistry"] == "chemlambda");
  std::filesystem::remove_all(dir);
  CHECK_THROWS(Catalog::load(dir));
}

TEST_CASE("wire encoding") {
  Session s;
  auto ev = s.handle_line(R"({"v":1,"type":"set_weights","w":0.5})");
  REQUIRE(ev.size() == 1);
  std::string line = encode_event(ev[0]);
  CHECK(line.back() == '\n');
  CHECK(line.find('\n') == line.size() - 1);
  CHECK(json::parse(line) == ev[0]);
  CHECK(ev[0]["config"]["w"] == 0.5);
}
