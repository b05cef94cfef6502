#include "afc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "afc/parallel.hpp"
#include "afc/rng.hpp"

namespace afc::synth {

namespace {

// Stream tags for derive_key.
constexpr std::uint64_t kTagCard = 1;
constexpr std::uint64_t kTagDay = 2;
constexpr std::uint64_t kTagDrop = 3;
constexpr std::uint64_t kTagAnomaly = 4;
constexpr std::uint64_t kTagFlow = 5;

using std::chrono::hours;
using std::chrono::minutes;

}  // namespace

void NetworkSpec::validate() const {
  std::set<std::string> devices;
  std::set<std::string> stations_seen;
  for (const auto& s : stations) {
    if (s.station_id.empty()) throw SynthConfigError("station with empty id");
    if (!stations_seen.insert(s.station_id).second) {
      throw SynthConfigError(fmt::format("duplicate station '{}'", s.station_id));
    }
    if (s.device_ids.empty()) {
      throw SynthConfigError(fmt::format("station '{}' has no devices", s.station_id));
    }
    for (const auto& d : s.device_ids) {
      if (!devices.insert(d).second) throw SynthConfigError(fmt::format("duplicate device '{}'", d));
    }
  }
  const auto hub = std::find_if(stations.begin(), stations.end(),
                                [&](const StationSpec& s) { return s.station_id == hub_station_id; });
  if (hub == stations.end()) {
    throw SynthConfigError(fmt::format("hub station '{}' not in network", hub_station_id));
  }
  if (hub->mode != Mode::Subway) throw SynthConfigError("hub station must be a subway station");
  for (const auto& r : routes) {
    if (r.station_ids.empty()) throw SynthConfigError(fmt::format("route '{}' has no stops", r.route_id));
    for (const auto& id : r.station_ids) {
      if (!stations_seen.contains(id)) {
        throw SynthConfigError(fmt::format("route '{}' references unknown station '{}'", r.route_id, id));
      }
    }
  }
}

void DemandSpec::validate(const NetworkSpec& net) const {
  net.validate();
  const auto& m = transfer_mix;
  for (double p : {m.none, m.subway_to_bus, m.bus_to_subway, m.secondary}) {
    if (!(p >= 0.0 && p <= 1.0)) throw SynthConfigError("transfer mix probabilities must lie in [0, 1]");
  }
  if (std::abs(m.none + m.subway_to_bus + m.bus_to_subway + m.secondary - 1.0) > 1e-9) {
    throw SynthConfigError("transfer mix must sum to 1");
  }
  for (const auto& day : weekday_profile) {
    for (double p : day) {
      if (!(p >= 0.0 && p <= 1.0)) throw SynthConfigError("weekday profile entries must lie in [0, 1]");
    }
  }
  if (days < 0) throw SynthConfigError("days must be non-negative");
  if (!(daily_noise >= 0.0 && daily_noise < 1.0)) throw SynthConfigError("daily_noise must lie in [0, 1)");
  if (!(bus_only_share >= 0.0 && bus_only_share <= 1.0)) {
    throw SynthConfigError("bus_only_share must lie in [0, 1]");
  }
  if (ride_min_minutes < 1 || ride_max_minutes < ride_min_minutes) {
    throw SynthConfigError("ride minutes must satisfy 1 <= min <= max");
  }
  if (trip_separation_minutes < 1) throw SynthConfigError("trip separation must be positive");
  for (const auto* g : {&subway_to_bus_gap, &bus_to_subway_gap}) {
    if (!(g->min_minutes > 0.0 && g->max_minutes >= g->min_minutes && g->stddev_minutes >= 0.0)) {
      throw SynthConfigError("gap distribution needs 0 < min <= max and stddev >= 0");
    }
    // Rejection sampling needs a reasonable mass inside the bounds.
    const double slack = 4.0 * g->stddev_minutes;
    if (g->mean_minutes < g->min_minutes - slack || g->mean_minutes > g->max_minutes + slack) {
      throw SynthConfigError("gap distribution mean lies too far outside its bounds");
    }
  }
  for (const auto& [route, w] : route_weights) {
    if (!(w >= 0.0)) throw SynthConfigError(fmt::format("route '{}' has a negative weight", route));
  }

  std::size_t subway = 0, non_hub = 0, secondary_non_hub = 0;
  for (const auto& s : net.stations) {
    if (s.mode != Mode::Subway) continue;
    ++subway;
    if (s.station_id == net.hub_station_id) continue;
    ++non_hub;
    if (!net.secondary_line_id.empty() && s.line_id == net.secondary_line_id) ++secondary_non_hub;
  }
  const bool needs_bus = m.subway_to_bus > 0 || m.bus_to_subway > 0 || m.secondary > 0 ||
                         (m.none > 0 && bus_only_share > 0);
  if (needs_bus && net.routes.empty()) throw SynthConfigError("demand needs bus routes but none exist");
  if ((m.subway_to_bus > 0 || m.bus_to_subway > 0) && non_hub == 0) {
    throw SynthConfigError("hub transfers need a subway station other than the hub");
  }
  if (m.secondary > 0 && secondary_non_hub == 0) {
    throw SynthConfigError("secondary transfers requested but the network has no secondary line station");
  }
  if (m.none > 0 && bus_only_share < 1.0 && subway < 2) {
    throw SynthConfigError("subway-only trips need two subway stations");
  }
}

namespace {

// Trip-start windows within a day, in time order; off-hours trips start
// either in the hour before 06:00 or in 22:00-24:00, and a trip must end
// before midnight, so no trip crosses a date or the 03:00 service-day
// boundary.
struct Window {
  Seconds begin;
  Seconds end;
  PeriodBin bin;
  double share;  // fraction of the bin's probability
};

std::vector<Window> day_windows() {
  std::vector<Window> w;
  w.push_back({hours{5}, hours{6}, PeriodBin::OffHours, 1.0 / 3.0});
  for (std::size_t i = 0; i < kNamedBinCount; ++i) {
    const auto begin = hours{6 + 2 * static_cast<int>(i)};
    w.push_back({begin, begin + hours{2}, kNamedBins[i], 1.0});
  }
  w.push_back({hours{22}, hours{24}, PeriodBin::OffHours, 2.0 / 3.0});
  return w;
}

class Generator {
 public:
  Generator(const NetworkSpec& net, const DemandSpec& demand) : net_(net), demand_(demand) {
    for (const auto& s : net.stations) {
      if (s.mode != Mode::Subway) continue;
      subway_.push_back(&s);
      if (s.station_id == net.hub_station_id) {
        hub_ = &s;
        continue;
      }
      non_hub_.push_back(&s);
      if (!net.secondary_line_id.empty() && s.line_id == net.secondary_line_id) {
        secondary_.push_back(&s);
      }
    }
    for (const auto& s : net.stations) by_id_.emplace(s.station_id, &s);
    double acc = 0.0;
    for (const auto& r : net.routes) {
      const auto it = demand.route_weights.find(r.route_id);
      acc += it == demand.route_weights.end() ? 1.0 : it->second;
      route_cumulative_.push_back(acc);
    }
    for (int d = 0; d < demand.days; ++d) {
      CounterRng rng{derive_key(demand.seed, kTagDay, static_cast<std::uint64_t>(d))};
      day_factor_.push_back(1.0 + demand.daily_noise * (2.0 * rng.uniform() - 1.0));
    }
    windows_ = day_windows();
  }

  std::vector<TripPlan> card(std::size_t index) const {
    CounterRng rng{derive_key(demand_.seed, kTagCard, index)};
    const std::string card_id = fmt::format("C{:07d}", index);
    std::vector<TripPlan> plans;
    std::optional<DateTime> last_swipe;
    const Seconds separation = minutes{demand_.trip_separation_minutes};
    for (int d = 0; d < demand_.days; ++d) {
      const Date date = demand_.start_date + std::chrono::days{d};
      const auto& probs = demand_.weekday_profile[static_cast<std::size_t>(weekday_index(date))];
      for (const auto& w : windows_) {
        const double p = std::min(1.0, probs[index_of(w.bin)] * w.share * day_factor_[static_cast<std::size_t>(d)]);
        if (!rng.bernoulli(p)) continue;
        DateTime earliest = DateTime{date} + w.begin;
        if (last_swipe) earliest = std::max(earliest, *last_swipe + separation);
        const DateTime window_end = DateTime{date} + w.end;
        if (earliest >= window_end) continue;  // thinned: previous trip still too close
        const auto span = static_cast<std::uint64_t>((window_end - earliest).count());
        const DateTime start = earliest + Seconds{static_cast<std::int64_t>(rng.below(span))};
        auto plan = trip(card_id, start, rng);
        // Trips that would run past midnight are thinned too, so every
        // trip stays on its own calendar date.
        if (plan.legs.back().time >= DateTime{date + std::chrono::days{1}}) continue;
        last_swipe = plan.legs.back().time;
        plans.push_back(std::move(plan));
      }
    }
    return plans;
  }

 private:
  const StationSpec& pick(const std::vector<const StationSpec*>& from, CounterRng& rng) const {
    return *from[rng.below(from.size())];
  }

  Leg swipe(TxnType txn, const StationSpec& st, const std::string& line, DateTime t, CounterRng& rng) const {
    return Leg{txn, line, st.station_id, st.device_ids[rng.below(st.device_ids.size())], t};
  }

  Leg board(DateTime t, CounterRng& rng) const {
    const double u = rng.uniform() * route_cumulative_.back();
    auto it = std::upper_bound(route_cumulative_.begin(), route_cumulative_.end(), u);
    if (it == route_cumulative_.end()) --it;
    const auto& route = net_.routes[static_cast<std::size_t>(it - route_cumulative_.begin())];
    const auto& stop = *by_id_.at(route.station_ids[rng.below(route.station_ids.size())]);
    return swipe(TxnType::BusBoard, stop, route.route_id, t, rng);
  }

  Seconds ride(CounterRng& rng) const {
    const auto span = static_cast<std::uint64_t>(demand_.ride_max_minutes - demand_.ride_min_minutes + 1);
    return minutes{demand_.ride_min_minutes + static_cast<int>(rng.below(span))};
  }

  static Seconds gap(const GapDistribution& g, CounterRng& rng) {
    double m = g.mean_minutes;
    if (g.stddev_minutes > 0.0) {
      do {
        m = g.mean_minutes + g.stddev_minutes * rng.normal();
      } while (m < g.min_minutes || m > g.max_minutes);
    }
    auto s = static_cast<std::int64_t>(std::llround(m * 60.0));
    s = std::clamp(s, static_cast<std::int64_t>(std::ceil(g.min_minutes * 60.0)),
                   static_cast<std::int64_t>(std::floor(g.max_minutes * 60.0)));
    return Seconds{s};
  }

  TripPlan trip(const std::string& card_id, DateTime start, CounterRng& rng) const {
    const auto& mix = demand_.transfer_mix;
    const double u = rng.uniform();
    TripPlan plan;
    plan.card_id = card_id;
    auto& legs = plan.legs;
    if (u < mix.subway_to_bus) {
      const auto& origin = pick(non_hub_, rng);
      legs.push_back(swipe(TxnType::SubwayEntry, origin, origin.line_id, start, rng));
      const DateTime exit_time = start + ride(rng);
      legs.push_back(swipe(TxnType::SubwayExit, *hub_, hub_->line_id, exit_time, rng));
      legs.push_back(board(exit_time + gap(demand_.subway_to_bus_gap, rng), rng));
      plan.intended_transfer = TransferMode::SubwayToBus;
      plan.transfer_from = 1;
      plan.transfer_to = 2;
    } else if (u < mix.subway_to_bus + mix.bus_to_subway) {
      legs.push_back(board(start, rng));
      const DateTime entry_time = start + gap(demand_.bus_to_subway_gap, rng);
      legs.push_back(swipe(TxnType::SubwayEntry, *hub_, hub_->line_id, entry_time, rng));
      const auto& dest = pick(non_hub_, rng);
      legs.push_back(swipe(TxnType::SubwayExit, dest, dest.line_id, entry_time + ride(rng), rng));
      plan.intended_transfer = TransferMode::BusToSubway;
      plan.transfer_from = 0;
      plan.transfer_to = 1;
    } else if (u < mix.subway_to_bus + mix.bus_to_subway + mix.secondary) {
      legs.push_back(board(start, rng));
      const DateTime entry_time = start + gap(demand_.bus_to_subway_gap, rng);
      const auto& origin = pick(secondary_, rng);
      legs.push_back(swipe(TxnType::SubwayEntry, origin, origin.line_id, entry_time, rng));
      legs.push_back(swipe(TxnType::SubwayExit, *hub_, hub_->line_id, entry_time + ride(rng), rng));
      plan.intended_transfer = TransferMode::BusToSubwaySecondary;
      plan.transfer_from = 0;
      plan.transfer_to = 1;
    } else if (rng.uniform() < demand_.bus_only_share) {
      legs.push_back(board(start, rng));
    } else {
      const auto& origin = pick(subway_, rng);
      const StationSpec* dest = &origin;
      while (dest == &origin) dest = &pick(subway_, rng);
      legs.push_back(swipe(TxnType::SubwayEntry, origin, origin.line_id, start, rng));
      legs.push_back(swipe(TxnType::SubwayExit, *dest, dest->line_id, start + ride(rng), rng));
    }
    return plan;
  }

  const NetworkSpec& net_;
  const DemandSpec& demand_;
  std::vector<const StationSpec*> subway_;
  std::vector<const StationSpec*> non_hub_;
  std::vector<const StationSpec*> secondary_;
  const StationSpec* hub_ = nullptr;
  std::map<std::string, const StationSpec*> by_id_;
  std::vector<double> route_cumulative_;
  std::vector<double> day_factor_;
  std::vector<Window> windows_;
};

}  // namespace

SynthOutput generate(const NetworkSpec& net, const DemandSpec& demand, unsigned threads) {
  demand.validate(net);
  const Generator gen{net, demand};
  std::vector<std::vector<TripPlan>> partial(chunk_count(demand.cards, threads));
  parallel_chunks(demand.cards, threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    for (std::size_t c = b; c < e; ++c) {
      auto plans = gen.card(c);
      std::move(plans.begin(), plans.end(), std::back_inserter(partial[chunk]));
    }
  });
  SynthOutput out;
  for (auto& p : partial) std::move(p.begin(), p.end(), std::back_inserter(out.plans));
  out.records = records_from_plans(out.plans, demand.subway_lines_in_records);
  return out;
}

std::vector<CardRecord> records_from_plans(std::span<const TripPlan> plans, bool subway_lines) {
  std::vector<CardRecord> records;
  for (const auto& plan : plans) {
    for (const auto& leg : plan.legs) {
      CardRecord r{plan.card_id, leg.txn, leg.device_id, leg.time, std::nullopt};
      if (leg.txn == TxnType::BusBoard || subway_lines) r.line_id = leg.line_id;
      records.push_back(std::move(r));
    }
  }
  std::sort(records.begin(), records.end(), record_less);
  return records;
}

StationTable station_table(const NetworkSpec& net) {
  StationTable table;
  for (const auto& s : net.stations) {
    for (const auto& d : s.device_ids) table.add(d, StationInfo{s.station_id, s.mode, s.line_id});
  }
  return table;
}

std::vector<TransferKey> intended_transfers(std::span<const TripPlan> plans) {
  std::vector<TransferKey> keys;
  for (const auto& p : plans) {
    if (!p.intended_transfer) continue;
    keys.push_back(TransferKey{p.card_id, *p.intended_transfer, p.legs[p.transfer_from].time,
                               p.legs[p.transfer_to].time});
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::vector<TransferKey> transfer_keys(std::span<const TransferEvent> events) {
  std::vector<TransferKey> keys;
  keys.reserve(events.size());
  for (const auto& e : events) {
    keys.push_back(TransferKey{e.card_id, e.mode, e.from.timestamp, e.to.timestamp});
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

CorruptResult corrupt(std::span<const CardRecord> records, std::span<const GapInjection> gaps,
                      std::span<const AnomalyInjection> anomalies, double drop_rate,
                      std::uint64_t seed) {
  if (!(drop_rate >= 0.0 && drop_rate <= 1.0)) throw std::invalid_argument("drop_rate must lie in [0, 1]");
  for (const auto& a : anomalies) {
    if (!(a.multiplier >= 0.0)) throw std::invalid_argument("anomaly multiplier must be non-negative");
    if (a.bin_width <= Seconds::zero()) throw std::invalid_argument("anomaly bin width must be positive");
  }

  CorruptResult result;
  result.defects.gaps.assign(gaps.begin(), gaps.end());
  // 0 = keep, 1 = removed, 2 = protected from random drops
  std::vector<std::uint8_t> state(records.size(), 0);
  auto in_gap = [&](const CardRecord& r) {
    return std::any_of(gaps.begin(), gaps.end(), [&](const GapInjection& g) {
      return r.device_id == g.device_id && r.timestamp >= g.start && r.timestamp < g.end;
    });
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (in_gap(records[i])) state[i] = 1;
  }

  std::vector<CardRecord> replicas;
  for (std::size_t a = 0; a < anomalies.size(); ++a) {
    const auto& inj = anomalies[a];
    const DateTime end = inj.bin_start + inj.bin_width;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& r = records[i];
      if (state[i] != 1 && r.device_id == inj.device_id && r.timestamp >= inj.bin_start && r.timestamp < end) {
        members.push_back(i);
      }
    }
    CounterRng rng{derive_key(seed, kTagAnomaly, a)};
    const std::size_t before = members.size();
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(before) * inj.multiplier));
    for (auto i : members) state[i] = 2;
    if (target < before) {
      // Partial Fisher-Yates picks the records to remove.
      for (std::size_t k = 0; k < before - target; ++k) {
        const std::size_t j = k + rng.below(before - k);
        std::swap(members[k], members[j]);
        state[members[k]] = 1;
      }
    } else if (before > 0) {
      const auto bin_seconds = static_cast<std::uint64_t>(inj.bin_width.count());
      for (std::size_t k = 0; k < target - before; ++k) {
        CardRecord copy = records[members[k % before]];
        copy.card_id += fmt::format("~r{}", result.defects.replicated + k);
        copy.timestamp = inj.bin_start + Seconds{static_cast<std::int64_t>(rng.below(bin_seconds))};
        replicas.push_back(std::move(copy));
      }
      result.defects.replicated += target - before;
    }
    result.defects.anomalies.push_back(AnomalyOutcome{inj, before, before == 0 ? 0 : target});
  }

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (state[i] == 0 && drop_rate > 0.0) {
      CounterRng rng{derive_key(seed, kTagDrop, i)};
      if (rng.bernoulli(drop_rate)) {
        state[i] = 1;
        ++result.defects.dropped;
      }
    }
    if (state[i] != 1) result.records.push_back(records[i]);
  }
  std::move(replicas.begin(), replicas.end(), std::back_inserter(result.records));
  return result;
}

FlowSeries periodic_flow_series(const std::array<std::array<double, kBinCount>, 7>& expected,
                                Date start, int days, double noise, std::uint64_t seed) {
  FlowSeries series;
  series.granularity = Granularity::PerBin;
  for (int d = 0; d < days; ++d) {
    const Date date = start + std::chrono::days{d};
    CounterRng rng{derive_key(seed, kTagFlow, static_cast<std::uint64_t>(d))};
    for (auto bin : kAllBins) {
      const double base = expected[static_cast<std::size_t>(weekday_index(date))][index_of(bin)];
      const double z = rng.normal();
      const double value = noise > 0.0 ? base * (1.0 + noise * z) : base;
      series.points.push_back(FlowPoint{date, bin, std::max<std::int64_t>(0, std::llround(value))});
    }
  }
  return series;
}

// ---------------------------------------------------------------- JSON ----

namespace {

template <typename T>
T get_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  return j[key].get<T>();
}

GapDistribution gap_from_json(const nlohmann::json& j, GapDistribution fallback) {
  if (j.is_null()) return fallback;
  return GapDistribution{get_or(j, "mean", fallback.mean_minutes), get_or(j, "stddev", fallback.stddev_minutes),
                         get_or(j, "min", fallback.min_minutes), get_or(j, "max", fallback.max_minutes)};
}

nlohmann::json gap_to_json(const GapDistribution& g) {
  return {{"mean", g.mean_minutes}, {"stddev", g.stddev_minutes}, {"min", g.min_minutes}, {"max", g.max_minutes}};
}

}  // namespace

NetworkSpec network_from_json(const nlohmann::json& j) {
  try {
    NetworkSpec net;
    net.hub_station_id = j.at("hub_station_id").get<std::string>();
    net.secondary_line_id = get_or<std::string>(j, "secondary_line_id", "");
    for (const auto& s : j.at("stations")) {
      const auto mode = mode_from_string(s.at("mode").get<std::string>());
      if (!mode) throw SynthConfigError("station mode must be Subway or Bus");
      net.stations.push_back(StationSpec{s.at("station_id").get<std::string>(), *mode,
                                         get_or<std::string>(s, "line_id", ""),
                                         s.at("device_ids").get<std::vector<std::string>>()});
    }
    for (const auto& r : get_or(j, "routes", nlohmann::json::array())) {
      net.routes.push_back(RouteSpec{r.at("route_id").get<std::string>(),
                                     r.at("stations").get<std::vector<std::string>>()});
    }
    return net;
  } catch (const nlohmann::json::exception& e) {
    throw SynthConfigError(fmt::format("network spec: {}", e.what()));
  }
}

DemandSpec demand_from_json(const nlohmann::json& j) {
  try {
    DemandSpec d;
    d.cards = get_or<std::size_t>(j, "cards", d.cards);
    const auto start = parse_date(j.at("start_date").get<std::string>());
    if (!start) throw SynthConfigError("demand spec: start_date must be YYYY-MM-DD");
    d.start_date = *start;
    d.days = get_or(j, "days", d.days);
    d.seed = get_or<std::uint64_t>(j, "seed", d.seed);
    d.daily_noise = get_or(j, "daily_noise", d.daily_noise);
    if (j.contains("weekday_profile")) {
      const auto& profile = j["weekday_profile"];
      for (int w = 0; w < 7; ++w) {
        const std::string day{weekday_name(w)};
        if (!profile.contains(day)) continue;
        for (const auto& [code, value] : profile[day].items()) {
          const auto bin = period_from_code(code);
          if (!bin) throw SynthConfigError(fmt::format("demand spec: unknown period '{}'", code));
          d.weekday_profile[static_cast<std::size_t>(w)][index_of(*bin)] = value.get<double>();
        }
      }
    }
    if (j.contains("transfer_mix")) {
      const auto& m = j["transfer_mix"];
      d.transfer_mix = TransferMix{get_or(m, "none", 0.0), get_or(m, "subway_to_bus", 0.0),
                                   get_or(m, "bus_to_subway", 0.0), get_or(m, "secondary", 0.0)};
    }
    d.subway_to_bus_gap = gap_from_json(get_or(j, "gap_subway_to_bus", nlohmann::json{}), d.subway_to_bus_gap);
    d.bus_to_subway_gap = gap_from_json(get_or(j, "gap_bus_to_subway", nlohmann::json{}), d.bus_to_subway_gap);
    if (j.contains("ride_minutes")) {
      d.ride_min_minutes = get_or(j["ride_minutes"], "min", d.ride_min_minutes);
      d.ride_max_minutes = get_or(j["ride_minutes"], "max", d.ride_max_minutes);
    }
    d.trip_separation_minutes = get_or(j, "trip_separation_minutes", d.trip_separation_minutes);
    d.bus_only_share = get_or(j, "bus_only_share", d.bus_only_share);
    d.route_weights = get_or(j, "route_weights", d.route_weights);
    d.subway_lines_in_records = get_or(j, "subway_lines_in_records", d.subway_lines_in_records);
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw SynthConfigError(fmt::format("demand spec: {}", e.what()));
  }
}

nlohmann::json to_json(const NetworkSpec& net) {
  nlohmann::json j;
  j["hub_station_id"] = net.hub_station_id;
  j["secondary_line_id"] = net.secondary_line_id;
  j["stations"] = nlohmann::json::array();
  for (const auto& s : net.stations) {
    j["stations"].push_back({{"station_id", s.station_id},
                             {"mode", std::string{to_string(s.mode)}},
                             {"line_id", s.line_id},
                             {"device_ids", s.device_ids}});
  }
  j["routes"] = nlohmann::json::array();
  for (const auto& r : net.routes) j["routes"].push_back({{"route_id", r.route_id}, {"stations", r.station_ids}});
  return j;
}

nlohmann::json to_json(const DemandSpec& d) {
  nlohmann::json j;
  j["cards"] = d.cards;
  j["start_date"] = format_date(d.start_date);
  j["days"] = d.days;
  j["seed"] = d.seed;
  j["daily_noise"] = d.daily_noise;
  nlohmann::json profile = nlohmann::json::object();
  for (int w = 0; w < 7; ++w) {
    nlohmann::json day = nlohmann::json::object();
    for (auto bin : kAllBins) {
      day[std::string{period_code(bin)}] = d.weekday_profile[static_cast<std::size_t>(w)][index_of(bin)];
    }
    profile[std::string{weekday_name(w)}] = day;
  }
  j["weekday_profile"] = profile;
  j["transfer_mix"] = {{"none", d.transfer_mix.none},
                       {"subway_to_bus", d.transfer_mix.subway_to_bus},
                       {"bus_to_subway", d.transfer_mix.bus_to_subway},
                       {"secondary", d.transfer_mix.secondary}};
  j["gap_subway_to_bus"] = gap_to_json(d.subway_to_bus_gap);
  j["gap_bus_to_subway"] = gap_to_json(d.bus_to_subway_gap);
  j["ride_minutes"] = {{"min", d.ride_min_minutes}, {"max", d.ride_max_minutes}};
  j["trip_separation_minutes"] = d.trip_separation_minutes;
  j["bus_only_share"] = d.bus_only_share;
  j["route_weights"] = d.route_weights;
  j["subway_lines_in_records"] = d.subway_lines_in_records;
  return j;
}

SynthSpec load_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw SynthConfigError(fmt::format("synth spec: {}", e.what()));
  }
  if (!j.is_object() || !j.contains("network") || !j.contains("demand")) {
    throw SynthConfigError("synth spec needs \"network\" and \"demand\" objects");
  }
  SynthSpec spec{network_from_json(j["network"]), demand_from_json(j["demand"])};
  spec.demand.validate(spec.network);
  return spec;
}

NetworkSpec demo_network() {
  NetworkSpec net;
  net.hub_station_id = "ZZL";
  net.secondary_line_id = "Luobao";
  auto subway = [&](const std::string& id, const std::string& line, int devices) {
    StationSpec s{id, Mode::Subway, line, {}};
    for (int d = 1; d <= devices; ++d) s.device_ids.push_back(fmt::format("{}-G{}", id, d));
    net.stations.push_back(std::move(s));
  };
  subway("ZZL", "Luobao", 6);
  for (const char* id : {"CGM", "XMH", "EAP", "HR", "GW"}) subway(id, "Luobao", 3);
  for (const char* id : {"DJ", "LY", "BJ"}) subway(id, "Longgang", 3);

  auto route = [&](const std::string& id, int stops, int devices) {
    RouteSpec r{id, {}};
    for (int s = 1; s <= stops; ++s) {
      StationSpec st{fmt::format("{}-S{}", id, s), Mode::Bus, id, {}};
      for (int d = 1; d <= devices; ++d) st.device_ids.push_back(fmt::format("{}-S{}-B{}", id, s, d));
      r.station_ids.push_back(st.station_id);
      net.stations.push_back(std::move(st));
    }
    net.routes.push_back(std::move(r));
  };
  for (const char* id : {"392", "43", "66", "B728", "338", "392-interval", "113", "70", "M250", "3"}) {
    route(id, 2, 2);
  }
  for (int i = 1; i <= 80; ++i) route(fmt::format("R{:03d}", i), 1, 1);
  return net;
}

WeekProfile demo_profile() {
  constexpr std::array<double, kBinCount> weekday = {0.22, 0.20, 0.06, 0.06, 0.06, 0.14, 0.12, 0.05, 0.03};
  constexpr std::array<double, kBinCount> weekend = {0.04, 0.06, 0.08, 0.08, 0.08, 0.08, 0.07, 0.05, 0.02};
  WeekProfile p{};
  for (std::size_t w = 0; w < 7; ++w) p[w] = w < 5 ? weekday : weekend;
  return p;
}

DemandSpec demo_demand() {
  DemandSpec d;
  d.cards = 2000;
  d.start_date = Date{std::chrono::year{2011} / std::chrono::July / 4};  // a Monday
  d.days = 28;
  d.weekday_profile = demo_profile();
  d.daily_noise = 0.05;
  d.transfer_mix = TransferMix{0.55, 0.2, 0.15, 0.1};
  // Top ten routes share 17.76% of boardings; 80 minor routes split the rest.
  d.route_weights = {{"392", 5.0},   {"43", 2.5},  {"66", 1.8},    {"B728", 1.75}, {"338", 1.5},
                     {"392-interval", 1.25},       {"113", 1.25},  {"70", 1.25},   {"M250", 1.25},
                     {"3", 1.21}};
  for (int i = 1; i <= 80; ++i) d.route_weights[fmt::format("R{:03d}", i)] = 82.24 / 80.0;
  d.seed = 20110704;
  return d;
}

}  // namespace afc::synth
