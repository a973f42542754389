#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "quinelab/catalog.hpp"
#include "quinelab/engine.hpp"

namespace quinelab {

inline constexpr int kProtocolVersion = 1;

struct SessionOptions {
  // A state event every `state_every` steps while the molecule is below
  // `large_nodes`, every `large_state_every` steps above it.
  std::uint64_t state_every = 1;
  std::uint64_t large_state_every = 10;
  std::size_t large_nodes = 1000;
  // Extra factor applied while the transport reports backpressure.
  std::uint64_t congested_factor = 8;
  double max_rate = 10000.0;
  // Most steps a single step{n} or tick may take.
  std::uint64_t max_burst = 100000;
};

// One client's engine. Not thread-safe: the transport calls handle() and
// tick() from a single task, which is what makes steering atomic.
class Session {
 public:
  using Event = nlohmann::json;

  explicit Session(std::shared_ptr<const Catalog> catalog = nullptr, SessionOptions opt = {});

  std::vector<Event> handle_line(std::string_view line);
  std::vector<Event> handle(const nlohmann::json& cmd);

  // Run mode clock. Takes floor(accumulated * rate) steps.
  std::vector<Event> tick(double dt_seconds);

  bool loaded() const { return engine_.has_value(); }
  bool running() const { return running_; }
  double rate() const { return rate_; }
  const EngineConfig& config() const { return cfg_; }
  const Engine* engine() const { return engine_ ? &*engine_ : nullptr; }
  // Counts reports over the whole session, across load and reset.
  std::uint64_t reports_sent() const { return reports_; }

  void set_congested(bool c) { congested_ = c; }
  bool congested() const { return congested_; }

 private:
  std::vector<Event> dispatch(const nlohmann::json& cmd);
  void step_n(std::uint64_t n, std::vector<Event>& out);
  Event ack(const nlohmann::json& cmd) const;
  Event state_event() const;
  std::uint64_t state_period() const;

  std::shared_ptr<const Catalog> catalog_;
  SessionOptions opt_;
  EngineConfig cfg_;
  std::optional<Molecule> original_;
  std::optional<Engine> engine_;
  bool running_ = false;
  double rate_ = 0.0;
  double clock_ = 0.0;
  bool congested_ = false;
  std::uint64_t reports_ = 0;
};

// Event/command JSON for a step report and a molecule.
nlohmann::json report_json(const StepReport& r, Family family);
nlohmann::json state_json(const Molecule& m, std::uint64_t now);

// One line of the wire format.
std::string encode_event(const nlohmann::json& e);

}  // namespace quinelab
