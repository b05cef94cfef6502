#include "afc/transfers.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "afc/parallel.hpp"

namespace afc {

std::string_view to_string(TransferMode mode) {
  switch (mode) {
    case TransferMode::SubwayToBus:
      return "subway-to-bus";
    case TransferMode::BusToSubway:
      return "bus-to-subway";
    case TransferMode::BusToSubwaySecondary:
      return "secondary";
  }
  return "unknown";
}

std::optional<TransferMode> transfer_mode_from_string(std::string_view text) {
  for (auto mode : kTransferModes) {
    if (to_string(mode) == text) return mode;
  }
  return std::nullopt;
}

void TransferConfig::validate() const {
  if (subway_to_bus_window <= Seconds::zero() || bus_to_subway_window <= Seconds::zero()) {
    throw std::invalid_argument("transfer windows must be positive");
  }
}

namespace {

bool at_hub(const CardRecord& r, const TransferConfig& cfg, const StationTable& stations) {
  const auto* info = stations.find(r.device_id);
  return info != nullptr && info->station_id == cfg.hub_station_id;
}

CardRecord with_line(const CardRecord& r, const StationTable& stations) {
  CardRecord copy = r;
  if (!copy.line_id) copy.line_id = resolve_line(r, stations);
  return copy;
}

TransferEvent make_event(const CardStream& stream, TransferMode mode, const CardRecord& from,
                         const CardRecord& to, const StationTable& stations) {
  const auto gap = to.timestamp - from.timestamp;
  return TransferEvent{stream.card_id, mode, with_line(from, stations), with_line(to, stations),
                       static_cast<double>(gap.count()) / 60.0, period_of(to.timestamp)};
}

Date service_day(DateTime t, Seconds day_start) { return date_of(t - day_start); }

}  // namespace

std::vector<TransferEvent> infer_subway_to_bus(const CardStream& stream, const TransferConfig& cfg,
                                               const StationTable& stations) {
  std::vector<TransferEvent> events;
  const auto& recs = stream.records;
  std::vector<bool> used(recs.size(), false);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& exit = recs[i];
    if (exit.txn_type != TxnType::SubwayExit || !at_hub(exit, cfg, stations)) continue;
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      const auto& next = recs[j];
      if (next.timestamp - exit.timestamp > cfg.subway_to_bus_window) break;
      // Any later subway swipe starts another journey; stopping there also
      // keeps each boarding reachable from one exit only.
      if (is_subway(next.txn_type)) break;
      if (used[j]) continue;
      used[j] = true;
      events.push_back(make_event(stream, TransferMode::SubwayToBus, exit, next, stations));
      break;
    }
  }
  return events;
}

std::vector<TransferEvent> infer_bus_to_subway(const CardStream& stream, const TransferConfig& cfg,
                                               const StationTable& stations) {
  std::vector<TransferEvent> events;
  const auto& recs = stream.records;
  std::vector<bool> used(recs.size(), false);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& board = recs[i];
    if (board.txn_type != TxnType::BusBoard) continue;
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      const auto& next = recs[j];
      if (next.timestamp - board.timestamp > cfg.bus_to_subway_window) break;
      if (next.txn_type == TxnType::BusBoard) break;
      if (next.txn_type != TxnType::SubwayEntry || used[j] || !at_hub(next, cfg, stations)) continue;
      used[j] = true;
      events.push_back(make_event(stream, TransferMode::BusToSubway, board, next, stations));
      break;
    }
  }
  return events;
}

std::vector<TransferEvent> infer_secondary(const CardStream& stream, const TransferConfig& cfg,
                                           const StationTable& stations) {
  std::vector<TransferEvent> events;
  if (cfg.secondary_line_id.empty()) return events;
  const auto& recs = stream.records;
  std::vector<bool> used(recs.size(), false);

  // The exit that closes the ride started at `entry`: the next subway swipe.
  auto ride_ends_at_hub = [&](std::size_t entry) {
    for (std::size_t k = entry + 1; k < recs.size(); ++k) {
      if (!is_subway(recs[k].txn_type)) continue;
      return recs[k].txn_type == TxnType::SubwayExit && at_hub(recs[k], cfg, stations) &&
             service_day(recs[k].timestamp, cfg.service_day_start) ==
                 service_day(recs[entry].timestamp, cfg.service_day_start);
    }
    return false;
  };

  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& board = recs[i];
    if (board.txn_type != TxnType::BusBoard) continue;
    for (std::size_t j = i + 1; j < recs.size(); ++j) {
      const auto& next = recs[j];
      if (next.timestamp - board.timestamp > cfg.bus_to_subway_window) break;
      if (next.txn_type == TxnType::BusBoard) break;
      if (next.txn_type != TxnType::SubwayEntry || used[j] || at_hub(next, cfg, stations)) continue;
      if (resolve_line(next, stations) != cfg.secondary_line_id) continue;
      if (!ride_ends_at_hub(j)) continue;
      used[j] = true;
      events.push_back(
          make_event(stream, TransferMode::BusToSubwaySecondary, board, next, stations));
      break;
    }
  }
  return events;
}

std::vector<TransferEvent> infer_transfers(std::span<const CardStream> streams,
                                           const TransferConfig& cfg, const StationTable& stations,
                                           std::span<const TransferMode> modes, unsigned threads) {
  cfg.validate();
  const std::size_t chunks = chunk_count(streams.size(), threads);
  // partial[mode][chunk]
  std::vector<std::vector<std::vector<TransferEvent>>> partial(
      modes.size(), std::vector<std::vector<TransferEvent>>(chunks));
  parallel_chunks(streams.size(), threads, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    for (std::size_t m = 0; m < modes.size(); ++m) {
      auto& out = partial[m][chunk];
      for (std::size_t s = b; s < e; ++s) {
        std::vector<TransferEvent> found;
        switch (modes[m]) {
          case TransferMode::SubwayToBus:
            found = infer_subway_to_bus(streams[s], cfg, stations);
            break;
          case TransferMode::BusToSubway:
            found = infer_bus_to_subway(streams[s], cfg, stations);
            break;
          case TransferMode::BusToSubwaySecondary:
            found = infer_secondary(streams[s], cfg, stations);
            break;
        }
        std::move(found.begin(), found.end(), std::back_inserter(out));
      }
    }
  });
  std::vector<TransferEvent> events;
  for (auto& per_mode : partial) {
    for (auto& chunk : per_mode) std::move(chunk.begin(), chunk.end(), std::back_inserter(events));
  }
  return events;
}

namespace {

TransferTimeRow summarize(std::optional<PeriodBin> bin, std::span<const double> gaps,
                          StdDevConvention convention) {
  const auto n = static_cast<double>(gaps.size());
  double sum = 0.0;
  for (double g : gaps) sum += g;
  const double mean = sum / n;
  double ss = 0.0;
  for (double g : gaps) ss += (g - mean) * (g - mean);
  double stddev = 0.0;
  if (convention == StdDevConvention::Population) {
    stddev = std::sqrt(ss / n);
  } else if (gaps.size() > 1) {
    stddev = std::sqrt(ss / (n - 1.0));
  }
  return TransferTimeRow{bin, mean, stddev, gaps.size()};
}

}  // namespace

TransferTimeStats transfer_time_stats(std::span<const TransferEvent> events,
                                      StdDevConvention convention) {
  TransferTimeStats stats;
  if (events.empty()) return stats;
  std::array<std::vector<double>, kBinCount> per_bin;
  std::vector<double> all;
  all.reserve(events.size());
  for (const auto& e : events) {
    per_bin[index_of(e.bin)].push_back(e.gap_minutes);
    all.push_back(e.gap_minutes);
  }
  for (auto bin : kAllBins) {
    const auto& gaps = per_bin[index_of(bin)];
    if (!gaps.empty()) stats.rows.push_back(summarize(bin, gaps, convention));
  }
  stats.rows.push_back(summarize(std::nullopt, all, convention));
  return stats;
}

std::string_view leg_route(const TransferEvent& event, Leg leg) {
  const auto& rec = leg == Leg::From ? event.from : event.to;
  return rec.line_id ? std::string_view{*rec.line_id} : std::string_view{};
}

namespace {

std::vector<std::pair<std::string, std::size_t>> ranked_counts(std::span<const TransferEvent> events,
                                                               Leg leg) {
  std::map<std::string, std::size_t, std::less<>> counts;
  for (const auto& e : events) {
    const auto route = leg_route(e, leg);
    auto it = counts.find(route);
    if (it == counts.end()) it = counts.emplace(std::string{route}, 0).first;
    ++it->second;
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranked;
}

}  // namespace

std::vector<RouteShare> route_share(std::span<const TransferEvent> events, Leg leg) {
  std::vector<RouteShare> out;
  const auto total = static_cast<double>(events.size());
  for (auto& [route, count] : ranked_counts(events, leg)) {
    out.push_back(RouteShare{route, count, 100.0 * static_cast<double>(count) / total});
  }
  return out;
}

std::vector<RouteRatio> relative_volume(std::span<const TransferEvent> events, Leg leg,
                                        const Baseline& baseline) {
  if (const auto* fixed = std::get_if<FixedBaseline>(&baseline); fixed && !(fixed->standard > 0.0)) {
    throw std::invalid_argument("fixed relative-volume standard must be positive");
  }
  const auto ranked = ranked_counts(events, leg);
  std::vector<RouteRatio> out;
  if (ranked.empty()) return out;
  const double standard = std::holds_alternative<FixedBaseline>(baseline)
                              ? std::get<FixedBaseline>(baseline).standard
                              : static_cast<double>(ranked.front().second);
  for (const auto& [route, count] : ranked) {
    out.push_back(RouteRatio{route, count, static_cast<double>(count) / standard});
  }
  return out;
}

}  // namespace afc
