#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afc/civil_time.hpp"
#include "afc/records.hpp"

namespace afc {

// Eight two-hour service windows from 06:00 to 22:00 plus the off-hours
// remainder (22:00-06:00). Bins are start-inclusive and end-exclusive.
enum class PeriodBin : std::uint8_t {
  H06_08,
  H08_10,
  H10_12,
  H12_14,
  H14_16,
  H16_18,
  H18_20,
  H20_22,
  OffHours,
};

inline constexpr std::size_t kNamedBinCount = 8;
inline constexpr std::size_t kBinCount = 9;

inline constexpr std::array<PeriodBin, kNamedBinCount> kNamedBins = {
    PeriodBin::H06_08, PeriodBin::H08_10, PeriodBin::H10_12, PeriodBin::H12_14,
    PeriodBin::H14_16, PeriodBin::H16_18, PeriodBin::H18_20, PeriodBin::H20_22};

inline constexpr std::array<PeriodBin, kBinCount> kAllBins = {
    PeriodBin::H06_08, PeriodBin::H08_10, PeriodBin::H10_12,
    PeriodBin::H12_14, PeriodBin::H14_16, PeriodBin::H16_18,
    PeriodBin::H18_20, PeriodBin::H20_22, PeriodBin::OffHours};

inline std::size_t index_of(PeriodBin bin) { return static_cast<std::size_t>(bin); }

PeriodBin period_of(DateTime t);

// "06-08" ... "20-22", "off".
std::string_view period_code(PeriodBin bin);
// "6 am-8 am" ... "8 pm-10 pm", "off-hours".
std::string_view period_label(PeriodBin bin);
std::optional<PeriodBin> period_from_code(std::string_view code);

enum class Granularity { Daily, PerBin };

struct FlowPoint {
  Date date{};
  std::optional<PeriodBin> bin;  // set iff the series is PerBin
  std::int64_t count = 0;

  friend bool operator==(const FlowPoint&, const FlowPoint&) = default;
};

struct FlowSeries {
  std::string key = "ALL";
  Granularity granularity = Granularity::Daily;
  std::vector<FlowPoint> points;  // ordered by (date, bin)

  friend bool operator==(const FlowSeries&, const FlowSeries&) = default;
};

struct FlowFilter {
  // Only boardings on these routes; nullopt counts every route.
  std::optional<std::set<std::string>> routes;
  // Holidays and special events removed from the series.
  std::set<Date> excluded_dates;
};

// Counts bus boardings per date (Daily) or per (date, bin) (PerBin). The
// output is dense from the first to the last counted date, excluded dates
// omitted; PerBin emits all nine bins for each date. Counting is split over
// `threads` record chunks and merged by addition.
FlowSeries bin_counts(std::span<const CardRecord> records, Granularity granularity,
                      const FlowFilter& filter = {}, unsigned threads = 1);

// Sums a PerBin series into a Daily one.
FlowSeries daily_totals(const FlowSeries& per_bin);

// Pearson correlation between x[0..n-lag) and x[lag..n). nullopt when either
// slice has zero variance.
std::optional<double> lagged_correlation(std::span<const double> values, std::size_t lag);

// Lag-`period_days` autocorrelation of a Daily series. nullopt marks a
// constant series. Throws std::invalid_argument for a PerBin series or one
// shorter than two periods.
std::optional<double> weekly_periodicity(const FlowSeries& series, int period_days = 7);

using BinProfile = std::map<PeriodBin, double>;

// Mean count per bin over the dates of one weekday (0 = Monday).
BinProfile weekday_profile(const FlowSeries& per_bin, int weekday);

// Named bins whose mean exceeds alpha times the median of the eight named
// bins, in time order. Throws std::invalid_argument if a named bin is absent.
std::vector<PeriodBin> detect_peaks(const BinProfile& profile, double alpha = 1.5);

}  // namespace afc
