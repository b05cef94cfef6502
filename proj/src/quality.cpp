#include "afc/quality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

namespace afc {

BinSeries make_bin_series(std::string id, std::span<const DateTime> times, DateTime start,
                          std::size_t bins, Seconds bin_width, const CollectionSchedule& schedule) {
  if (bin_width <= Seconds::zero()) throw std::invalid_argument("bin width must be positive");
  std::vector<std::int64_t> counts(bins, 0);
  const DateTime end = start + bin_width * static_cast<std::int64_t>(bins);
  for (const auto t : times) {
    if (t < start || t >= end) continue;
    ++counts[static_cast<std::size_t>((t - start) / bin_width)];
  }
  BinSeries series{std::move(id), start, bin_width, {}};
  series.bins.reserve(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    if (counts[i] == 0 && schedule.expects(series.bin_start(i))) {
      series.bins.push_back(Bin{});
    } else {
      series.bins.push_back(Bin{static_cast<double>(counts[i]), false});
    }
  }
  return series;
}

GapScan detect_missing(const BinSeries& series, Seconds expected_cadence) {
  if (expected_cadence <= Seconds::zero() || series.bin_width % expected_cadence != Seconds::zero()) {
    throw std::invalid_argument("expected cadence must divide the bin width");
  }
  GapScan scan;
  if (series.bins.empty()) {
    scan.notes.push_back(fmt::format("series '{}' is empty", series.id));
    return scan;
  }
  std::size_t i = 0;
  while (i < series.size()) {
    if (series.bins[i].count) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < series.size() && !series.bins[j].count) ++j;
    scan.gaps.push_back(Gap{series.bin_start(i), series.bin_start(j), i, j - i});
    i = j;
  }
  return scan;
}

std::string_view to_string(AnomalyKind kind) {
  return kind == AnomalyKind::EquipmentFault ? "EquipmentFault" : "TrafficAnomaly";
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::optional<double> robust_z(double value, std::span<const double> reference) {
  if (reference.empty()) return std::nullopt;
  const double med = median({reference.begin(), reference.end()});
  std::vector<double> deviations;
  deviations.reserve(reference.size());
  for (double x : reference) deviations.push_back(std::abs(x - med));
  const double mad = median(std::move(deviations));
  const double diff = value - med;
  if (mad == 0.0) {
    if (diff == 0.0) return 0.0;
    return std::copysign(std::numeric_limits<double>::infinity(), diff);
  }
  return diff / (kMadToSigma * mad);
}

namespace {

std::vector<double> same_bin_values(std::span<const BinSeries> history, std::size_t bin) {
  std::vector<double> values;
  values.reserve(history.size());
  for (const auto& h : history) {
    if (bin < h.size() && h.bins[bin].count) values.push_back(*h.bins[bin].count);
  }
  return values;
}

std::optional<double> score_bin(const BinSeries& series, std::span<const BinSeries> history,
                                std::size_t bin, std::size_t min_history) {
  if (bin >= series.size() || !series.bins[bin].count) return std::nullopt;
  const auto reference = same_bin_values(history, bin);
  if (reference.size() < min_history) return std::nullopt;
  return robust_z(*series.bins[bin].count, reference);
}

}  // namespace

AnomalyScan flag_anomalies(const BinSeries& series, std::span<const BinSeries> history,
                           std::span<const PeerSeries> peers, const AnomalyConfig& config) {
  AnomalyScan scan;
  if (history.size() < config.min_history) {
    scan.notes.push_back(fmt::format("series '{}': insufficient history ({} < {})", series.id,
                                     history.size(), config.min_history));
    return scan;
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto z = score_bin(series, history, i, config.min_history);
    if (!z || !(std::abs(*z) > config.threshold)) continue;

    std::size_t scorable = 0;
    std::size_t agreeing = 0;
    for (const auto& peer : peers) {
      const auto pz = score_bin(peer.series, peer.history, i, config.min_history);
      if (!pz) continue;
      ++scorable;
      if (std::signbit(*pz) == std::signbit(*z) && std::abs(*pz) > config.threshold / 2.0) {
        ++agreeing;
      }
    }
    const bool corroborated =
        scorable > 0 &&
        static_cast<double>(agreeing) >= config.peer_fraction * static_cast<double>(scorable);
    scan.flags.push_back(AnomalyFlag{i, series.bin_start(i),
                                     corroborated ? AnomalyKind::TrafficAnomaly
                                                  : AnomalyKind::EquipmentFault,
                                     *z});
  }
  return scan;
}

ImputeResult impute(const BinSeries& series, std::span<const Gap> gaps,
                    std::span<const BinSeries> history, const ImputeConfig& config) {
  ImputeResult result{series, {}};
  auto& bins = result.series.bins;
  auto observed = [&](std::size_t i) { return bins[i].count && !bins[i].imputed; };

  for (const auto& gap : gaps) {
    if (gap.bin_count == 0 || gap.first_bin + gap.bin_count > bins.size()) continue;
    const std::size_t first = gap.first_bin;
    const std::size_t last = first + gap.bin_count - 1;
    const bool flanked = first > 0 && last + 1 < bins.size() && observed(first - 1) && observed(last + 1);

    if (gap.bin_count <= config.max_interpolated_bins && flanked) {
      const double left = *bins[first - 1].count;
      const double right = *bins[last + 1].count;
      const double span = static_cast<double>(gap.bin_count + 1);
      for (std::size_t i = first; i <= last; ++i) {
        if (bins[i].count) continue;
        const double t = static_cast<double>(i - first + 1) / span;
        bins[i] = Bin{left + (right - left) * t, true};
      }
      continue;
    }

    for (std::size_t i = first; i <= last; ++i) {
      if (bins[i].count) continue;
      const auto reference = same_bin_values(history, i);
      if (reference.empty()) {
        result.warnings.push_back(fmt::format("series '{}': bin {} left missing (no history)",
                                              series.id, format_datetime(series.bin_start(i))));
        continue;
      }
      bins[i] = Bin{median(reference), true};
    }
  }
  return result;
}

}  // namespace afc
