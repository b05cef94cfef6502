#include "afc/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

namespace afc {

PeriodicModel::PeriodicModel(Cells cells, double decay, std::optional<LinearTrend> trend,
                             Date first, Date last)
    : cells_(cells), decay_(decay), trend_(trend), first_(first), last_(last) {
  for (std::size_t w = 0; w < 7; ++w) {
    for (const auto& c : cells_[w]) weekday_totals_[w] += c.mean;
  }
}

double PeriodicModel::predict(Date date, PeriodBin bin) const {
  const int weekday = weekday_index(date);
  double value = cell(weekday, bin).mean;
  if (trend_) {
    const double total = weekday_totals_[static_cast<std::size_t>(weekday)];
    const double share = total > 0.0 ? value / total : 1.0 / static_cast<double>(kBinCount);
    const auto days_ahead = static_cast<double>(day_number(date) - day_number(last_));
    value += trend_->slope_per_day * days_ahead * share;
  }
  return std::max(0.0, value);
}

PeriodicModel fit_periodic(const FlowSeries& history, const FitOptions& options) {
  if (!(options.decay > 0.0 && options.decay <= 1.0)) {
    throw std::invalid_argument("decay must lie in (0, 1]");
  }
  if (history.granularity != Granularity::PerBin) {
    throw std::invalid_argument("fit_periodic needs a PerBin series");
  }
  if (history.points.empty()) throw InsufficientHistory("empty history");

  Date first = history.points.front().date;
  Date last = first;
  for (const auto& p : history.points) {
    first = std::min(first, p.date);
    last = std::max(last, p.date);
  }
  if (day_number(last) - day_number(first) + 1 < 14) {
    throw InsufficientHistory("history must cover at least two full weeks");
  }

  struct Acc {
    double weighted = 0.0;
    double weights = 0.0;
    std::size_t n = 0;
  };
  std::array<std::array<Acc, kBinCount>, 7> acc{};
  // Accumulate in (date, bin) order so the result does not depend on the
  // order of the input points.
  std::vector<FlowPoint> points = history.points;
  for (const auto& p : points) {
    if (!p.bin) throw std::invalid_argument("PerBin series point without a bin");
  }
  std::sort(points.begin(), points.end(), [](const FlowPoint& a, const FlowPoint& b) {
    return std::tie(a.date, *a.bin, a.count) < std::tie(b.date, *b.bin, b.count);
  });
  std::map<std::int64_t, double> daily;
  for (const auto& p : points) {
    const auto age_weeks = (day_number(last) - day_number(p.date)) / 7;
    const double w = std::pow(options.decay, static_cast<double>(age_weeks));
    auto& a = acc[static_cast<std::size_t>(weekday_index(p.date))][index_of(*p.bin)];
    a.weighted += w * static_cast<double>(p.count);
    a.weights += w;
    ++a.n;
    daily[day_number(p.date)] += static_cast<double>(p.count);
  }

  PeriodicModel::Cells cells{};
  for (std::size_t wd = 0; wd < 7; ++wd) {
    for (std::size_t b = 0; b < kBinCount; ++b) {
      const auto& a = acc[wd][b];
      if (a.n == 0) {
        throw InsufficientHistory("history leaves a (weekday, bin) cell without observations");
      }
      cells[wd][b] = ProfileCell{a.weighted / a.weights, a.n};
    }
  }

  std::optional<LinearTrend> trend;
  if (options.with_trend) {
    const double x0 = static_cast<double>(day_number(first));
    double sx = 0.0, sy = 0.0;
    for (const auto& [day, total] : daily) {
      sx += static_cast<double>(day) - x0;
      sy += total;
    }
    const auto n = static_cast<double>(daily.size());
    const double mx = sx / n, my = sy / n;
    double sxy = 0.0, sxx = 0.0;
    for (const auto& [day, total] : daily) {
      const double dx = static_cast<double>(day) - x0 - mx;
      sxy += dx * (total - my);
      sxx += dx * dx;
    }
    const double slope = sxx > 0.0 ? sxy / sxx : 0.0;
    trend = LinearTrend{slope, my - slope * mx};
  }
  return PeriodicModel{cells, options.decay, trend, first, last};
}

ForecastMetrics evaluate(const FlowModel& model, const FlowSeries& holdout) {
  if (holdout.points.empty()) throw std::invalid_argument("empty holdout");
  if (holdout.granularity != Granularity::PerBin) {
    throw std::invalid_argument("holdout must be a PerBin series");
  }
  const auto [first, last] = model.training_span();
  ForecastMetrics m;
  double abs_pct = 0.0, sq = 0.0;
  for (const auto& p : holdout.points) {
    if (p.date >= first && p.date <= last) {
      throw std::invalid_argument("holdout overlaps the training period");
    }
    const double actual = static_cast<double>(p.count);
    const double err = model.predict(p.date, *p.bin) - actual;
    sq += err * err;
    ++m.bins;
    if (actual > 0.0) {
      abs_pct += std::abs(err) / actual;
      ++m.mape_bins;
    }
  }
  m.rmse = std::sqrt(sq / static_cast<double>(m.bins));
  m.mape_percent = m.mape_bins > 0 ? 100.0 * abs_pct / static_cast<double>(m.mape_bins)
                                   : std::numeric_limits<double>::quiet_NaN();
  return m;
}

std::vector<ForecastRow> forecast(const FlowModel& model, Date first, int days) {
  std::vector<ForecastRow> rows;
  for (int d = 0; d < days; ++d) {
    const Date date = first + std::chrono::days{d};
    for (auto bin : kAllBins) rows.push_back(ForecastRow{date, bin, model.predict(date, bin)});
  }
  return rows;
}

}  // namespace afc
