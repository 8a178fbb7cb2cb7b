#include "afcmem/sequencer.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "afcmem/errors.hpp"

namespace afcmem {

namespace {

constexpr Nanos kNsPerSecond = 1'000'000'000;

std::size_t idx(Channel c) { return static_cast<std::size_t>(c); }

void sort_events(std::vector<Event>& ev) {
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
    return a.time != b.time ? a.time < b.time : idx(a.channel) < idx(b.channel);
  });
}

// Applies events time by time and calls visit(t, states) after each group.
template <class F>
void sweep(const Timeline& tl, F visit) {
  std::array<bool, kAllChannels.size()> st{};
  std::size_t i = 0;
  while (i < tl.events.size()) {
    const Nanos t = tl.events[i].time;
    while (i < tl.events.size() && tl.events[i].time == t) {
      st[idx(tl.events[i].channel)] = tl.events[i].state;
      ++i;
    }
    visit(t, st);
  }
}

}  // namespace

std::string_view to_string(Channel c) {
  switch (c) {
    case Channel::mems_in: return "mems_in";
    case Channel::mems_out: return "mems_out";
    case Channel::snspd_gate: return "snspd_gate";
    case Channel::burn_enable: return "burn_enable";
    case Channel::probe_enable: return "probe_enable";
  }
  return "unknown";
}

Channel channel_from_string(std::string_view name) {
  for (auto c : kAllChannels) {
    if (to_string(c) == name) return c;
  }
  throw InvalidInput("unknown channel '" + std::string(name) + "'");
}

Nanos parse_duration(std::string_view text) {
  const auto bad = [&](const char* why) {
    return InvalidInput("duration '" + std::string(text) + "': " + why);
  };
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == ' ') ++pos;
  const std::size_t num_start = pos;
  while (pos < text.size() && (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) ++pos;
  const std::string_view number = text.substr(num_start, pos - num_start);
  while (pos < text.size() && text[pos] == ' ') ++pos;
  std::string_view unit = text.substr(pos);
  while (!unit.empty() && unit.back() == ' ') unit.remove_suffix(1);

  int exponent = 0;
  if (unit == "ns") exponent = 0;
  else if (unit == "us") exponent = 3;
  else if (unit == "ms") exponent = 6;
  else if (unit == "s") exponent = 9;
  else throw bad("unit must be one of ns, us, ms, s");

  const auto dot = number.find('.');
  std::string_view whole = number.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : number.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw bad("missing number");
  if (frac.find('.') != std::string_view::npos) throw bad("malformed number");
  while (!frac.empty() && frac.back() == '0') frac.remove_suffix(1);
  if (static_cast<int>(frac.size()) > exponent) throw bad("not a whole number of nanoseconds");

  std::string digits(whole);
  digits += frac;
  digits.append(static_cast<std::size_t>(exponent) - frac.size(), '0');
  Nanos value = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) throw bad("out of range");
  return value;
}

bool Timeline::state_at(Channel c, Nanos t) const {
  bool s = false;
  for (const auto& e : events) {
    if (e.time > t) break;
    if (e.channel == c) s = e.state;
  }
  return s;
}

Nanos Timeline::high_time(Channel c) const {
  Nanos total = 0;
  std::optional<Nanos> since;
  for (const auto& e : events) {
    if (e.channel != c) continue;
    if (e.state && !since) since = e.time;
    if (!e.state && since) {
      total += e.time - *since;
      since.reset();
    }
  }
  if (since) total += total_duration - *since;
  return total;
}

Timeline compile(const std::vector<Phase>& phases, std::int64_t repetitions) {
  if (repetitions < 0) throw InvalidInput("repetitions must be non-negative");
  if (phases.empty()) throw InvalidInput("sequence has no phases");
  Timeline tl;
  tl.repetitions = repetitions;
  std::array<bool, kAllChannels.size()> current{};
  Nanos t = 0;
  for (const auto& ph : phases) {
    if (ph.duration <= 0) throw InvalidInput("phase '" + ph.name + "' must have positive duration");
    if (ph.trial_rate < 0) throw InvalidInput("phase '" + ph.name + "' has a negative trial rate");
    std::array<std::optional<bool>, kAllChannels.size()> want{};
    for (const auto& [ch, on] : ph.states) {
      auto& w = want[idx(ch)];
      if (w && *w != on) {
        throw SequenceConflictError("phase '" + ph.name + "' sets " + std::string(to_string(ch)) +
                                    " both on and off");
      }
      w = on;
    }
    for (auto c : kAllChannels) {
      const bool on = want[idx(c)].value_or(false);
      if (on != current[idx(c)]) {
        tl.events.push_back({t, c, on});
        current[idx(c)] = on;
      }
    }
    tl.trial_slots += ph.duration * ph.trial_rate / kNsPerSecond;
    t += ph.duration;
  }
  for (auto c : kAllChannels) {
    if (current[idx(c)]) tl.events.push_back({t, c, false});
  }
  tl.total_duration = t;
  sort_events(tl.events);
  return tl;
}

Timeline concatenate(const Timeline& a, const Timeline& b) {
  Timeline out;
  out.repetitions = a.repetitions;
  out.total_duration = a.total_duration + b.total_duration;
  out.trial_slots = a.trial_slots + b.trial_slots;
  const Nanos seam = a.total_duration;
  std::vector<Event> tail;
  for (auto e : b.events) {
    e.time += seam;
    tail.push_back(e);
  }
  for (const auto& e : a.events) {
    const bool cancelled = e.time == seam && !e.state &&
                           std::any_of(tail.begin(), tail.end(), [&](const Event& o) {
                             return o.time == seam && o.channel == e.channel && o.state;
                           });
    if (!cancelled) out.events.push_back(e);
  }
  for (const auto& e : tail) {
    const bool cancelled = e.time == seam && e.state &&
                           std::any_of(a.events.begin(), a.events.end(), [&](const Event& o) {
                             return o.time == seam && o.channel == e.channel && !o.state;
                           });
    if (!cancelled) out.events.push_back(e);
  }
  sort_events(out.events);
  return out;
}

std::vector<Phase> storage_sequence() {
  return {
      {"settle", 38'000'000, {{Channel::mems_in, true}}, 0},
      {"burn", 120'000'000, {{Channel::mems_in, true}, {Channel::burn_enable, true}}, 0},
      {"wait", 180'000'000, {}, 0},
      {"storage",
       2'162'000'000,
       {{Channel::mems_out, true}, {Channel::snspd_gate, true}, {Channel::probe_enable, true}},
       4'000'000},
  };
}

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::gate_off_during_burn: return "gate_off_during_burn";
    case Rule::gate_off_initially: return "gate_off_initially";
    case Rule::routing_isolated: return "routing_isolated";
  }
  return "unknown";
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const RuleCheck& c) { return c.passed; });
}

const RuleCheck& ValidationReport::operator[](Rule r) const {
  for (const auto& c : checks) {
    if (c.rule == r) return c;
  }
  throw InvalidInput("rule " + std::string(to_string(r)) + " was not checked");
}

ValidationReport validate(const Timeline& tl, const RuleSet& rules) {
  ValidationReport report;
  for (Rule r : rules.rules) {
    RuleCheck check{r, true, {}};
    bool was_bad = false;
    sweep(tl, [&](Nanos t, const auto& st) {
      bool bad = false;
      switch (r) {
        case Rule::gate_off_during_burn:
          bad = st[idx(Channel::snspd_gate)] && st[idx(Channel::burn_enable)];
          break;
        case Rule::gate_off_initially:
          bad = st[idx(Channel::snspd_gate)] && t < rules.initial_gate_off;
          break;
        case Rule::routing_isolated:
          bad = st[idx(Channel::mems_in)] && st[idx(Channel::mems_out)];
          break;
      }
      if (bad && !was_bad) check.offending_times.push_back(t);
      was_bad = bad;
    });
    check.passed = check.offending_times.empty();
    report.checks.push_back(std::move(check));
  }
  return report;
}

AcquisitionSummary acquisition_summary(const Timeline& tl) {
  AcquisitionSummary s;
  s.total_trials = tl.trial_slots * tl.repetitions;
  s.wall_time = static_cast<double>(tl.total_duration * tl.repetitions) / static_cast<double>(kNsPerSecond);
  s.live_time = static_cast<double>(tl.high_time(Channel::snspd_gate) * tl.repetitions) /
                static_cast<double>(kNsPerSecond);
  return s;
}

std::string timeline_csv(const Timeline& tl) {
  std::ostringstream out;
  out << "time_ns,channel,state\n";
  for (const auto& e : tl.events) out << e.time << ',' << to_string(e.channel) << ',' << (e.state ? 1 : 0) << '\n';
  return out.str();
}

void write_timeline_csv(const std::filesystem::path& path, const Timeline& tl) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << timeline_csv(tl);
}

}  // namespace afcmem
