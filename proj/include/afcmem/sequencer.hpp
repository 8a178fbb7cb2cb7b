#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace afcmem {

/// Switch-level channels of the storage experiment.
enum class Channel : std::uint8_t { mems_in, mems_out, snspd_gate, burn_enable, probe_enable };

inline constexpr std::array<Channel, 5> kAllChannels = {Channel::mems_in, Channel::mems_out, Channel::snspd_gate,
                                                        Channel::burn_enable, Channel::probe_enable};

std::string_view to_string(Channel c);
Channel channel_from_string(std::string_view name);

/// Integer nanoseconds.
using Nanos = std::int64_t;

/// Exact parse of "2162 ms", "2.162 s", "250 ps" is rejected unless it is a
/// whole number of nanoseconds.
Nanos parse_duration(std::string_view text);

struct Phase {
  std::string name;
  Nanos duration = 0;
  /// Listed channel states; unlisted channels are low.
  std::vector<std::pair<Channel, bool>> states;
  /// Trial slots per second while the phase runs (0 = none).
  std::int64_t trial_rate = 0;
};

struct Event {
  Nanos time = 0;
  Channel channel = Channel::mems_in;
  bool state = false;

  bool operator==(const Event&) const = default;
};

struct Timeline {
  std::vector<Event> events;  // sorted by (time, channel)
  Nanos total_duration = 0;
  std::int64_t repetitions = 1;
  std::int64_t trial_slots = 0;  // per repetition

  bool operator==(const Timeline&) const = default;

  /// State of a channel just after time t (events at t applied).
  bool state_at(Channel c, Nanos t) const;
  /// Total time the channel is high within one repetition.
  Nanos high_time(Channel c) const;
};

/// Concatenates phases. Channels start low; an event is emitted whenever a
/// channel changes state, and every high channel is brought low at the end.
/// Throws SequenceConflictError when a phase gives one channel two states.
Timeline compile(const std::vector<Phase>& phases, std::int64_t repetitions);

/// Timeline b appended after a (a's repetitions are kept). Events that would
/// switch a channel off and on at the seam cancel.
Timeline concatenate(const Timeline& a, const Timeline& b);

/// The storage sequence: 38 ms settle, 120 ms burn, 180 ms wait, 2162 ms
/// storage at 4 MHz.
std::vector<Phase> storage_sequence();

enum class Rule { gate_off_during_burn, gate_off_initially, routing_isolated };

std::string_view to_string(Rule r);

struct RuleCheck {
  Rule rule;
  bool passed = true;
  std::vector<Nanos> offending_times;
};

struct ValidationReport {
  std::vector<RuleCheck> checks;
  bool passed() const;
  const RuleCheck& operator[](Rule r) const;
};

struct RuleSet {
  std::vector<Rule> rules = {Rule::gate_off_during_burn, Rule::gate_off_initially, Rule::routing_isolated};
  Nanos initial_gate_off = 338'000'000;
};

ValidationReport validate(const Timeline& timeline, const RuleSet& rules = {});

struct AcquisitionSummary {
  std::int64_t total_trials = 0;
  double live_time = 0.0;  // detector gate open, s
  double wall_time = 0.0;  // s
};

AcquisitionSummary acquisition_summary(const Timeline& timeline);

/// CSV with columns time_ns,channel,state.
std::string timeline_csv(const Timeline& timeline);
void write_timeline_csv(const std::filesystem::path& path, const Timeline& timeline);

}  // namespace afcmem
