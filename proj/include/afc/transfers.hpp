#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "afc/flowstats.hpp"
#include "afc/records.hpp"

namespace afc {

enum class TransferMode {
  SubwayToBus,           // exit at the hub, then board a bus
  BusToSubway,           // board a bus, then enter the subway at the hub
  BusToSubwaySecondary,  // board a bus, enter the secondary line elsewhere, exit at the hub
};

inline constexpr std::array<TransferMode, 3> kTransferModes = {
    TransferMode::SubwayToBus, TransferMode::BusToSubway, TransferMode::BusToSubwaySecondary};

std::string_view to_string(TransferMode mode);  // "subway-to-bus", ...
std::optional<TransferMode> transfer_mode_from_string(std::string_view text);

struct TransferConfig {
  std::string hub_station_id;
  Seconds subway_to_bus_window{std::chrono::minutes{30}};
  Seconds bus_to_subway_window{std::chrono::minutes{60}};
  std::string secondary_line_id;
  // Service days run from this time of day to the same time the next day.
  Seconds service_day_start{std::chrono::hours{3}};

  // Throws std::invalid_argument on non-positive windows.
  void validate() const;
};

struct TransferEvent {
  std::string card_id;
  TransferMode mode = TransferMode::SubwayToBus;
  // Copies of the linked swipes; subway line_id is filled from the station
  // table when the feed lacks it.
  CardRecord from;
  CardRecord to;
  double gap_minutes = 0.0;
  PeriodBin bin = PeriodBin::OffHours;  // period of the `to` swipe
};

// Each hub exit is matched to the earliest later bus boarding within the
// window, stopping at the next subway swipe of either kind. One-to-one
// both ways, and widening the window never loses an event.
std::vector<TransferEvent> infer_subway_to_bus(const CardStream& stream, const TransferConfig& cfg,
                                               const StationTable& stations);

// Each boarding is matched to the earliest later hub entry within the
// window, stopping at the next boarding. One-to-one both ways.
std::vector<TransferEvent> infer_bus_to_subway(const CardStream& stream, const TransferConfig& cfg,
                                               const StationTable& stations);

// Boarding, then within the window an entry on the secondary line at a
// station other than the hub, whose ride ends with an exit at the hub in
// the same service day. The gap is boarding to entry.
std::vector<TransferEvent> infer_secondary(const CardStream& stream, const TransferConfig& cfg,
                                           const StationTable& stations);

// Runs the requested modes over every stream, parallel across cards. Output
// is grouped by mode (in `modes` order), then by stream order, then by time.
std::vector<TransferEvent> infer_transfers(std::span<const CardStream> streams,
                                           const TransferConfig& cfg, const StationTable& stations,
                                           std::span<const TransferMode> modes = kTransferModes,
                                           unsigned threads = 1);

enum class StdDevConvention { Population, Sample };

struct TransferTimeRow {
  std::optional<PeriodBin> bin;  // nullopt is the ALL row
  double mean_minutes = 0.0;
  double stddev_minutes = 0.0;
  std::size_t n = 0;
};

struct TransferTimeStats {
  std::vector<TransferTimeRow> rows;  // bins in time order, then ALL
};

TransferTimeStats transfer_time_stats(std::span<const TransferEvent> events,
                                      StdDevConvention convention = StdDevConvention::Population);

enum class Leg { From, To };

// Route of the chosen leg: the record's line, or "" when unknown.
std::string_view leg_route(const TransferEvent& event, Leg leg);

struct RouteShare {
  std::string route;
  std::size_t count = 0;
  double percentage = 0.0;
};

// 100 * count / total per route, descending, ties by route id.
std::vector<RouteShare> route_share(std::span<const TransferEvent> events, Leg leg);

struct MaxRouteBaseline {};
struct FixedBaseline {
  double standard = 1.0;
};
using Baseline = std::variant<MaxRouteBaseline, FixedBaseline>;

struct RouteRatio {
  std::string route;
  std::size_t count = 0;
  double ratio = 0.0;
};

// count / standard per route, ordered like route_share. Throws
// std::invalid_argument for a non-positive fixed standard.
std::vector<RouteRatio> relative_volume(std::span<const TransferEvent> events, Leg leg,
                                        const Baseline& baseline = MaxRouteBaseline{});

}  // namespace afc
