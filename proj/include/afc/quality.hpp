#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "afc/civil_time.hpp"

namespace afc {

struct Bin {
  std::optional<double> count;  // nullopt = Missing
  bool imputed = false;

  friend bool operator==(const Bin&, const Bin&) = default;
};

// Per-period swipe counts of one device or route. Bin i starts at
// start + i * bin_width, so bin starts are strictly increasing by
// construction.
struct BinSeries {
  std::string id;
  DateTime start{};
  Seconds bin_width{std::chrono::hours{2}};
  std::vector<Bin> bins;

  DateTime bin_start(std::size_t i) const {
    return start + bin_width * static_cast<std::int64_t>(i);
  }
  std::size_t size() const { return bins.size(); }

  friend bool operator==(const BinSeries&, const BinSeries&) = default;
};

// Time-of-day window during which a device is expected to report. A bin
// whose start lies inside the window and that has no observation is Missing;
// outside the window an empty bin is a true zero.
struct CollectionSchedule {
  Seconds open{std::chrono::hours{6}};
  Seconds close{std::chrono::hours{22}};

  bool expects(DateTime bin_start) const {
    const auto tod = time_of_day(bin_start);
    return tod >= open && tod < close;
  }
};

// Counts `times` into `bins` bins from `start`; times outside the span are
// ignored.
BinSeries make_bin_series(std::string id, std::span<const DateTime> times, DateTime start,
                          std::size_t bins, Seconds bin_width,
                          const CollectionSchedule& schedule = {});

// Maximal run of Missing bins, [start, end).
struct Gap {
  DateTime start{};
  DateTime end{};
  std::size_t first_bin = 0;
  std::size_t bin_count = 0;

  friend bool operator==(const Gap&, const Gap&) = default;
};

struct GapScan {
  std::vector<Gap> gaps;
  std::vector<std::string> notes;
};

// Throws std::invalid_argument unless expected_cadence is positive and
// divides the bin width.
GapScan detect_missing(const BinSeries& series, Seconds expected_cadence);

enum class AnomalyKind { EquipmentFault, TrafficAnomaly };

std::string_view to_string(AnomalyKind kind);

struct AnomalyFlag {
  std::size_t bin = 0;
  DateTime bin_start{};
  AnomalyKind kind = AnomalyKind::EquipmentFault;
  // Robust z-score. +/-infinity when the reference MAD is zero.
  double score = 0.0;
};

struct AnomalyConfig {
  double threshold = 3.5;      // |z| above this is anomalous
  double peer_fraction = 0.5;  // share of peers that must agree for TrafficAnomaly
  std::size_t min_history = 4;
};

// A neighbouring device's series for the same period, with its own
// same-weekday history so that its deviation can be scored.
struct PeerSeries {
  BinSeries series;
  std::vector<BinSeries> history;
};

struct AnomalyScan {
  std::vector<AnomalyFlag> flags;
  std::vector<std::string> notes;
};

inline constexpr double kMadToSigma = 1.4826;

double median(std::vector<double> values);

// (value - median) / (1.4826 * MAD) of the reference values. With MAD == 0:
// 0 when value equals the median, else signed infinity. nullopt for an
// empty reference.
std::optional<double> robust_z(double value, std::span<const double> reference);

// Scores every present bin of `series` against the same bin of `history`
// (same device, same weekday, other weeks). Bins whose history holds fewer
// than min_history present values are skipped. A flagged bin is a
// TrafficAnomaly when at least peer_fraction of the scorable peers deviate
// in the same direction by more than threshold / 2, else an EquipmentFault.
AnomalyScan flag_anomalies(const BinSeries& series, std::span<const BinSeries> history,
                           std::span<const PeerSeries> peers, const AnomalyConfig& config = {});

struct ImputeConfig {
  std::size_t max_interpolated_bins = 2;
};

struct ImputeResult {
  BinSeries series;
  std::vector<std::string> warnings;
};

// Fills gaps of at most max_interpolated_bins bins by linear interpolation
// between the observed (non-imputed) bins on either side; longer gaps, and
// gaps without two observed flanks, take the median of the same bin across
// `history`. Bins with neither stay Missing and produce a warning. Present
// bins are never modified.
ImputeResult impute(const BinSeries& series, std::span<const Gap> gaps,
                    std::span<const BinSeries> history, const ImputeConfig& config = {});

}  // namespace afc
