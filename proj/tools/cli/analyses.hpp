#pragma once

#include <span>
#include <string>
#include <vector>

#include "afc/flowstats.hpp"
#include "afc/forecast.hpp"
#include "afc/geo.hpp"
#include "afc/quality.hpp"
#include "afc/records.hpp"
#include "afc/transfers.hpp"
#include "output.hpp"

// Each function returns its full set of tables, headered even when empty.
namespace afc::cli {

std::vector<Table> ingest_tables(const ParseResult& parsed, std::size_t duplicates,
                                 std::span<const CardRecord> records, const StationTable& stations);

struct FlowOptions {
  Granularity granularity = Granularity::Daily;
  FlowFilter filter;
  double alpha = 1.5;
  unsigned threads = 1;
};

std::vector<Table> flow_tables(std::span<const CardRecord> records, const FlowOptions& options);

std::vector<Table> periodicity_tables(std::span<const CardRecord> records, const FlowFilter& filter,
                                      int period_days, unsigned threads,
                                      std::vector<std::string>& notes);

struct QualityOptions {
  CollectionSchedule schedule;
  Seconds bin_width{std::chrono::hours{2}};
  Seconds cadence{std::chrono::hours{2}};
  AnomalyConfig anomaly;
  ImputeConfig impute;
  unsigned threads = 1;
};

struct DeviceGap {
  std::string device_id;
  std::string station_id;
  Gap gap;
};

struct DeviceFlag {
  std::string device_id;
  std::string station_id;
  AnomalyFlag flag;
};

struct DeviceDay {
  std::string device_id;
  std::string station_id;
  Date date{};
  BinSeries observed;
  BinSeries imputed;
};

struct QualityReport {
  std::vector<DeviceGap> gaps;
  std::vector<DeviceFlag> flags;
  std::vector<DeviceDay> days;  // by device, then date
  std::vector<std::string> notes;
};

// One series per (device, date) covering the collection window. History is
// the same device on the same weekday of the other dates; peers are the
// other devices of the same station on the same date. Only devices that
// appear in the records are assessed. Throws std::invalid_argument when
// the bin width does not tile the collection window.
QualityReport assess_quality(std::span<const CardRecord> records, const StationTable& stations,
                             const QualityOptions& options);

std::vector<Table> quality_tables(const QualityReport& report);

std::vector<TransferEvent> find_transfers(std::span<const CardRecord> records,
                                          const StationTable& stations, const TransferConfig& cfg,
                                          std::span<const TransferMode> modes, unsigned threads);

// transfers, route_share_from/to, relative_volume_from/to.
std::vector<Table> transfer_tables(std::span<const TransferEvent> events, const Baseline& baseline);

Table transfer_stats_table(std::span<const TransferEvent> events, StdDevConvention convention);

std::vector<Table> buffer_tables(std::span<const geo::RoutePolyline> routes,
                                 std::span<const double> radii, double cell_size_m,
                                 unsigned threads);

// Pairs: (a, b) when both are given, a against every other route when only
// a is, otherwise every unordered pair in route order. Throws
// std::invalid_argument for an unknown route id.
Table coincidence_table(std::span<const geo::RoutePolyline> routes, const std::string& route_a,
                        const std::string& route_b, double corridor_m, double step_m);

struct ForecastOptions {
  FlowFilter filter;
  int holdout_days = 7;
  int horizon_days = 7;
  FitOptions fit;
  unsigned threads = 1;
};

// forecast, forecast_metrics. A history too short to fit leaves both
// tables empty and adds a note.
std::vector<Table> forecast_tables(std::span<const CardRecord> records,
                                   const ForecastOptions& options, std::vector<std::string>& notes);

}  // namespace afc::cli
