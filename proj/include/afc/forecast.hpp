#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "afc/civil_time.hpp"
#include "afc/flowstats.hpp"

namespace afc {

class InsufficientHistory : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Anything that predicts a per-bin count for a date. The weekday-profile
// baseline below is one implementation.
class FlowModel {
 public:
  virtual ~FlowModel() = default;
  virtual double predict(Date date, PeriodBin bin) const = 0;
  // First and last training dates.
  virtual std::pair<Date, Date> training_span() const = 0;
};

struct ProfileCell {
  double mean = 0.0;
  std::size_t n = 0;
};

struct LinearTrend {
  double slope_per_day = 0.0;  // change of the daily total per day
  double intercept = 0.0;      // daily total at the first training date
};

class PeriodicModel final : public FlowModel {
 public:
  // cells[weekday][bin], weekday 0 = Monday.
  using Cells = std::array<std::array<ProfileCell, kBinCount>, 7>;

  PeriodicModel(Cells cells, double decay, std::optional<LinearTrend> trend, Date first, Date last);

  // Cell mean, plus the trend extrapolated from the last training date and
  // scaled by the bin's share of that weekday's total. Never negative.
  double predict(Date date, PeriodBin bin) const override;
  std::pair<Date, Date> training_span() const override { return {first_, last_}; }

  const ProfileCell& cell(int weekday, PeriodBin bin) const {
    return cells_[static_cast<std::size_t>(weekday)][index_of(bin)];
  }
  double decay() const { return decay_; }
  const std::optional<LinearTrend>& trend() const { return trend_; }

 private:
  Cells cells_;
  double decay_;
  std::optional<LinearTrend> trend_;
  Date first_;
  Date last_;
  std::array<double, 7> weekday_totals_{};
};

struct FitOptions {
  double decay = 1.0;  // in (0, 1]; 1 is the plain mean
  bool with_trend = false;
};

// Each (weekday, bin) cell is the mean of its history weighted by
// decay^(age in whole weeks before the last training date). Throws
// InsufficientHistory unless the PerBin history spans at least 14 days and
// fills every cell; std::invalid_argument for a bad decay or a Daily series.
PeriodicModel fit_periodic(const FlowSeries& history, const FitOptions& options = {});

struct ForecastMetrics {
  double mape_percent = 0.0;  // over bins with actual > 0; NaN if there are none
  double rmse = 0.0;
  std::size_t bins = 0;
  std::size_t mape_bins = 0;
};

// Throws std::invalid_argument for an empty or non-PerBin holdout or one
// that overlaps the model's training span.
ForecastMetrics evaluate(const FlowModel& model, const FlowSeries& holdout);

struct ForecastRow {
  Date date{};
  PeriodBin bin = PeriodBin::OffHours;
  double predicted = 0.0;
};

std::vector<ForecastRow> forecast(const FlowModel& model, Date first, int days);

}  // namespace afc
