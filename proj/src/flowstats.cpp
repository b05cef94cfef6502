#include "afc/flowstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "afc/parallel.hpp"

namespace afc {

namespace {

constexpr std::array<std::string_view, kBinCount> kCodes = {
    "06-08", "08-10", "10-12", "12-14", "14-16", "16-18", "18-20", "20-22", "off"};

constexpr std::array<std::string_view, kBinCount> kLabels = {
    "6 am-8 am",  "8 am-10 am", "10 am-12 pm", "12 pm-2 pm", "2 pm-4 pm",
    "4 pm-6 pm",  "6 pm-8 pm",  "8 pm-10 pm",  "off-hours"};

}  // namespace

PeriodBin period_of(DateTime t) {
  const auto hour = std::chrono::duration_cast<std::chrono::hours>(time_of_day(t)).count();
  if (hour < 6 || hour >= 22) return PeriodBin::OffHours;
  return static_cast<PeriodBin>((hour - 6) / 2);
}

std::string_view period_code(PeriodBin bin) { return kCodes[index_of(bin)]; }
std::string_view period_label(PeriodBin bin) { return kLabels[index_of(bin)]; }

std::optional<PeriodBin> period_from_code(std::string_view code) {
  for (std::size_t i = 0; i < kBinCount; ++i) {
    if (kCodes[i] == code) return static_cast<PeriodBin>(i);
  }
  return std::nullopt;
}

FlowSeries bin_counts(std::span<const CardRecord> records, Granularity granularity,
                      const FlowFilter& filter, unsigned threads) {
  using Counts = std::map<std::int64_t, std::array<std::int64_t, kBinCount>>;
  std::vector<Counts> partial(chunk_count(records.size(), threads));
  parallel_chunks(records.size(), threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    auto& counts = partial[chunk];
    for (std::size_t i = b; i < e; ++i) {
      const auto& r = records[i];
      if (r.txn_type != TxnType::BusBoard) continue;
      if (filter.routes && (!r.line_id || !filter.routes->contains(*r.line_id))) continue;
      const Date d = date_of(r.timestamp);
      if (filter.excluded_dates.contains(d)) continue;
      auto [it, inserted] = counts.try_emplace(day_number(d));
      if (inserted) it->second.fill(0);
      ++it->second[index_of(period_of(r.timestamp))];
    }
  });
  Counts merged;
  for (const auto& counts : partial) {
    for (const auto& [day, bins] : counts) {
      auto [it, inserted] = merged.try_emplace(day);
      if (inserted) it->second.fill(0);
      for (std::size_t b = 0; b < kBinCount; ++b) it->second[b] += bins[b];
    }
  }

  FlowSeries out;
  out.granularity = granularity;
  if (filter.routes) {
    out.key.clear();
    for (const auto& route : *filter.routes) {
      if (!out.key.empty()) out.key += '+';
      out.key += route;
    }
  }
  if (merged.empty()) return out;

  const std::int64_t first = merged.begin()->first;
  const std::int64_t last = merged.rbegin()->first;
  for (std::int64_t day = first; day <= last; ++day) {
    const Date d{std::chrono::days{day}};
    if (filter.excluded_dates.contains(d)) continue;
    std::array<std::int64_t, kBinCount> bins{};
    if (const auto it = merged.find(day); it != merged.end()) bins = it->second;
    if (granularity == Granularity::Daily) {
      std::int64_t total = 0;
      for (auto c : bins) total += c;
      out.points.push_back(FlowPoint{d, std::nullopt, total});
    } else {
      for (auto bin : kAllBins) out.points.push_back(FlowPoint{d, bin, bins[index_of(bin)]});
    }
  }
  return out;
}

FlowSeries daily_totals(const FlowSeries& per_bin) {
  FlowSeries out;
  out.key = per_bin.key;
  out.granularity = Granularity::Daily;
  for (const auto& p : per_bin.points) {
    if (out.points.empty() || out.points.back().date != p.date) {
      out.points.push_back(FlowPoint{p.date, std::nullopt, 0});
    }
    out.points.back().count += p.count;
  }
  return out;
}

std::optional<double> lagged_correlation(std::span<const double> values, std::size_t lag) {
  if (lag >= values.size()) return std::nullopt;
  const std::size_t n = values.size() - lag;
  const auto head = values.subspan(0, n);
  const auto tail = values.subspan(lag, n);
  double mean_h = 0.0, mean_t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_h += head[i];
    mean_t += tail[i];
  }
  mean_h /= static_cast<double>(n);
  mean_t /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = head[i] - mean_h;
    const double dy = tail[i] - mean_t;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  // Relative spread below rounding noise is a constant series.
  const double scale = std::max(std::abs(mean_h), std::abs(mean_t));
  if (std::sqrt(sxx / n) <= 1e-12 * scale || std::sqrt(syy / n) <= 1e-12 * scale) {
    return std::nullopt;
  }
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

std::optional<double> weekly_periodicity(const FlowSeries& series, int period_days) {
  if (series.granularity != Granularity::Daily) {
    throw std::invalid_argument("weekly_periodicity needs a Daily series");
  }
  if (period_days <= 0 || series.points.size() < 2 * static_cast<std::size_t>(period_days)) {
    throw std::invalid_argument("weekly_periodicity needs at least two periods of data");
  }
  std::vector<double> values;
  values.reserve(series.points.size());
  for (const auto& p : series.points) values.push_back(static_cast<double>(p.count));
  return lagged_correlation(values, static_cast<std::size_t>(period_days));
}

BinProfile weekday_profile(const FlowSeries& per_bin, int weekday) {
  std::array<double, kBinCount> sums{};
  std::array<std::size_t, kBinCount> counts{};
  for (const auto& p : per_bin.points) {
    if (!p.bin || weekday_index(p.date) != weekday) continue;
    sums[index_of(*p.bin)] += static_cast<double>(p.count);
    ++counts[index_of(*p.bin)];
  }
  BinProfile profile;
  for (auto bin : kAllBins) {
    const auto i = index_of(bin);
    if (counts[i] > 0) profile[bin] = sums[i] / static_cast<double>(counts[i]);
  }
  return profile;
}

std::vector<PeriodBin> detect_peaks(const BinProfile& profile, double alpha) {
  std::array<double, kNamedBinCount> means{};
  for (std::size_t i = 0; i < kNamedBinCount; ++i) {
    const auto it = profile.find(kNamedBins[i]);
    if (it == profile.end()) {
      throw std::invalid_argument("detect_peaks needs all eight named bins");
    }
    means[i] = it->second;
  }
  auto sorted = means;
  std::sort(sorted.begin(), sorted.end());
  const double median = 0.5 * (sorted[3] + sorted[4]);
  std::vector<PeriodBin> peaks;
  for (std::size_t i = 0; i < kNamedBinCount; ++i) {
    if (means[i] > alpha * median) peaks.push_back(kNamedBins[i]);
  }
  return peaks;
}

}  // namespace afc
