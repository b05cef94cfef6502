#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "afc/flowstats.hpp"
#include "afc/records.hpp"
#include "afc/transfers.hpp"

namespace afc::synth {

class SynthConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct StationSpec {
  std::string station_id;
  Mode mode = Mode::Subway;
  std::string line_id;  // metro line, or the bus route serving the stop
  std::vector<std::string> device_ids;
};

struct RouteSpec {
  std::string route_id;
  std::vector<std::string> station_ids;  // ordered bus stops
};

struct NetworkSpec {
  std::vector<StationSpec> stations;
  std::vector<RouteSpec> routes;
  std::string hub_station_id;
  std::string secondary_line_id;  // empty: no secondary line

  // Throws SynthConfigError.
  void validate() const;
};

struct GapDistribution {
  double mean_minutes = 11.0;
  double stddev_minutes = 7.0;
  double min_minutes = 1.0;
  double max_minutes = 29.0;
};

struct TransferMix {
  double none = 1.0;
  double subway_to_bus = 0.0;
  double bus_to_subway = 0.0;
  double secondary = 0.0;
};

// profile[weekday][bin]: probability that a card starts a trip in that bin
// on that weekday (0 = Monday).
using WeekProfile = std::array<std::array<double, kBinCount>, 7>;

struct DemandSpec {
  std::size_t cards = 1000;
  Date start_date{};
  int days = 7;
  WeekProfile weekday_profile{};
  // Each day's probabilities are scaled by 1 + daily_noise * u, u uniform in [-1, 1).
  double daily_noise = 0.0;
  TransferMix transfer_mix;
  GapDistribution subway_to_bus_gap{11.0, 7.0, 1.0, 29.0};
  GapDistribution bus_to_subway_gap{11.0, 7.0, 1.0, 59.0};
  int ride_min_minutes = 5;
  int ride_max_minutes = 40;
  // Minimum time from a trip's last swipe to the card's next trip. Above
  // both transfer windows, consecutive trips never look like a transfer.
  int trip_separation_minutes = 61;
  // Share of non-transfer trips that are bus-only (the rest are subway-only).
  double bus_only_share = 0.5;
  std::map<std::string, double> route_weights;  // missing routes weigh 1
  bool subway_lines_in_records = true;
  std::uint64_t seed = 1;

  // Throws SynthConfigError, including when the network cannot serve the
  // requested transfer mix.
  void validate(const NetworkSpec& net) const;
};

struct Leg {
  TxnType txn = TxnType::BusBoard;
  std::string line_id;
  std::string station_id;
  std::string device_id;
  DateTime time{};

  friend bool operator==(const Leg&, const Leg&) = default;
};

struct TripPlan {
  std::string card_id;
  std::vector<Leg> legs;  // strictly increasing times
  std::optional<TransferMode> intended_transfer;
  // Indices into legs of the two swipes that form the transfer.
  std::size_t transfer_from = 0;
  std::size_t transfer_to = 0;

  friend bool operator==(const TripPlan&, const TripPlan&) = default;
};

struct SynthOutput {
  std::vector<TripPlan> plans;     // by card, then time
  std::vector<CardRecord> records;  // sorted by record_less
};

// Deterministic in (net, demand); cards are generated from independent
// derived streams so any thread count gives the same output.
SynthOutput generate(const NetworkSpec& net, const DemandSpec& demand, unsigned threads = 1);

// The swipes implied by the plans, sorted by record_less.
std::vector<CardRecord> records_from_plans(std::span<const TripPlan> plans, bool subway_lines = true);

StationTable station_table(const NetworkSpec& net);

// Ground-truth transfer: (card, mode, from swipe time, to swipe time).
struct TransferKey {
  std::string card_id;
  TransferMode mode = TransferMode::SubwayToBus;
  DateTime from{};
  DateTime to{};

  friend auto operator<=>(const TransferKey&, const TransferKey&) = default;
};

std::vector<TransferKey> intended_transfers(std::span<const TripPlan> plans);
std::vector<TransferKey> transfer_keys(std::span<const TransferEvent> events);

struct GapInjection {
  std::string device_id;
  DateTime start{};
  DateTime end{};  // exclusive
};

struct AnomalyInjection {
  std::string device_id;
  DateTime bin_start{};
  Seconds bin_width{std::chrono::hours{2}};
  double multiplier = 10.0;
};

struct AnomalyOutcome {
  AnomalyInjection injection;
  std::size_t count_before = 0;
  std::size_t count_after = 0;
};

struct GroundTruthDefects {
  std::vector<GapInjection> gaps;
  std::vector<AnomalyOutcome> anomalies;
  std::size_t dropped = 0;
  std::size_t replicated = 0;
};

struct CorruptResult {
  std::vector<CardRecord> records;
  GroundTruthDefects defects;
};

// Deletes every record inside the gap injections; scales the record count
// of each anomaly bin to round(count * multiplier) by removing records or
// adding replicas (card id suffixed "~r<n>", uniform time within the bin);
// drops each other record with probability drop_rate. Surviving records
// keep input order and replicas follow. Throws std::invalid_argument for a
// drop_rate outside [0, 1] or a negative multiplier.
CorruptResult corrupt(std::span<const CardRecord> records, std::span<const GapInjection> gaps,
                      std::span<const AnomalyInjection> anomalies, double drop_rate,
                      std::uint64_t seed);

// Per-bin counts expected[weekday][bin] with multiplicative noise
// (1 + noise * z), z approximately standard normal, rounded and clamped at 0.
FlowSeries periodic_flow_series(const std::array<std::array<double, kBinCount>, 7>& expected,
                                Date start, int days, double noise, std::uint64_t seed);

// JSON schema documented in README.md.
NetworkSpec network_from_json(const nlohmann::json& j);
DemandSpec demand_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkSpec& net);
nlohmann::json to_json(const DemandSpec& demand);

struct SynthSpec {
  NetworkSpec network;
  DemandSpec demand;
};

// {"network": {...}, "demand": {...}}; throws SynthConfigError.
SynthSpec load_spec(std::string_view json_text);

// A small hub network (hub "ZZL" on the "Luobao" line) with route weights
// echoing the observed route mix, used by the demo and the tests.
NetworkSpec demo_network();
// Weekday morning and evening peaks, flatter weekends.
WeekProfile demo_profile();
DemandSpec demo_demand();

}  // namespace afc::synth
