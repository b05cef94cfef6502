#include "analyses.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "afc/parallel.hpp"

namespace afc::cli {

namespace {

Cell str(std::string_view s) { return std::string(s); }
Cell num(std::int64_t v) { return v; }
Cell num(std::size_t v) { return static_cast<std::int64_t>(v); }
Cell real(double v) { return v; }

std::string station_of(const StationTable& stations, std::string_view device) {
  const auto* info = stations.find(device);
  return info ? info->station_id : std::string{};
}

}  // namespace

std::vector<Table> ingest_tables(const ParseResult& parsed, std::size_t duplicates,
                                 std::span<const CardRecord> records, const StationTable& stations) {
  Table summary{"ingest_summary", {"metric", "value"}, {}};
  summary.add({str("data_lines"), num(parsed.data_lines)});
  summary.add({str("parsed_records"), num(parsed.records.size())});
  summary.add({str("parse_errors"), num(parsed.errors.size())});
  summary.add({str("duplicates_removed"), num(duplicates)});
  summary.add({str("records"), num(records.size())});

  std::set<std::string_view> cards, devices;
  std::map<TxnType, std::size_t> by_type;
  std::size_t unknown_devices = 0;
  std::optional<DateTime> first, last;
  for (const auto& r : records) {
    cards.insert(r.card_id);
    devices.insert(r.device_id);
    ++by_type[r.txn_type];
    if (!first || r.timestamp < *first) first = r.timestamp;
    if (!last || r.timestamp > *last) last = r.timestamp;
  }
  for (auto d : devices) {
    if (!stations.empty() && !stations.find(d)) ++unknown_devices;
  }
  summary.add({str("cards"), num(cards.size())});
  summary.add({str("devices"), num(devices.size())});
  for (auto t : {TxnType::SubwayEntry, TxnType::SubwayExit, TxnType::BusBoard}) {
    summary.add({str(fmt::format("type_{}", wire_code(t))), num(by_type[t])});
  }
  if (!stations.empty()) summary.add({str("unmapped_devices"), num(unknown_devices)});
  summary.add({str("first_timestamp"), first ? str(format_datetime(*first)) : Cell{}});
  summary.add({str("last_timestamp"), last ? str(format_datetime(*last)) : Cell{}});

  Table errors{"parse_errors", {"line", "kind", "reason"}, {}};
  for (const auto& e : parsed.errors) {
    errors.add({num(e.line), str(to_string(e.kind)), str(e.reason)});
  }
  return {std::move(summary), std::move(errors)};
}

std::vector<Table> flow_tables(std::span<const CardRecord> records, const FlowOptions& options) {
  const auto series = bin_counts(records, options.granularity, options.filter, options.threads);
  if (options.granularity == Granularity::Daily) {
    Table t{"daily_flow", {"date", "weekday", "count"}, {}};
    for (const auto& p : series.points) {
      t.add({str(format_date(p.date)), str(weekday_name(weekday_index(p.date))), num(p.count)});
    }
    return {std::move(t)};
  }
  Table t{"bin_flow", {"date", "weekday", "period", "count"}, {}};
  std::set<int> weekdays;
  for (const auto& p : series.points) {
    t.add({str(format_date(p.date)), str(weekday_name(weekday_index(p.date))),
           str(period_code(*p.bin)), num(p.count)});
    weekdays.insert(weekday_index(p.date));
  }
  Table profile{"weekday_profile", {"weekday", "period", "mean"}, {}};
  Table peaks{"peaks", {"weekday", "period", "mean", "named_bin_median"}, {}};
  for (int wd : weekdays) {
    const auto prof = weekday_profile(series, wd);
    std::vector<double> named;
    for (const auto& [bin, mean] : prof) {
      profile.add({str(weekday_name(wd)), str(period_code(bin)), real(mean)});
      if (bin != PeriodBin::OffHours) named.push_back(mean);
    }
    const double med = median(named);
    for (auto bin : detect_peaks(prof, options.alpha)) {
      peaks.add({str(weekday_name(wd)), str(period_code(bin)), real(prof.at(bin)), real(med)});
    }
  }
  return {std::move(t), std::move(profile), std::move(peaks)};
}

std::vector<Table> periodicity_tables(std::span<const CardRecord> records, const FlowFilter& filter,
                                      int period_days, unsigned threads,
                                      std::vector<std::string>& notes) {
  if (period_days < 1) throw std::invalid_argument("period must be at least one day");
  const auto series = bin_counts(records, Granularity::Daily, filter, threads);
  Table summary{"periodicity", {"series", "period_days", "days", "autocorrelation"}, {}};
  Table lags{"autocorrelation", {"lag_days", "autocorrelation"}, {}};
  const auto n = series.points.size();
  if (n < 2 * static_cast<std::size_t>(period_days)) {
    notes.push_back(fmt::format("periodicity: {} days of data, need at least {}", n,
                                2 * period_days));
    return {std::move(summary), std::move(lags)};
  }
  const auto r = weekly_periodicity(series, period_days);
  summary.add({str(series.key), num(static_cast<std::int64_t>(period_days)), num(n),
               r ? real(*r) : Cell{}});
  std::vector<double> values;
  for (const auto& p : series.points) values.push_back(static_cast<double>(p.count));
  const std::size_t max_lag = std::min<std::size_t>(2 * static_cast<std::size_t>(period_days), n - 2);
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    const auto c = lagged_correlation(values, lag);
    lags.add({num(lag), c ? real(*c) : Cell{}});
  }
  return {std::move(summary), std::move(lags)};
}

QualityReport assess_quality(std::span<const CardRecord> records, const StationTable& stations,
                             const QualityOptions& options) {
  const auto window = options.schedule.close - options.schedule.open;
  if (options.bin_width <= Seconds{0} || window <= Seconds{0} ||
      window % options.bin_width != Seconds{0}) {
    throw std::invalid_argument("bin width must tile the collection window");
  }
  const auto bins = static_cast<std::size_t>(window / options.bin_width);

  QualityReport report;
  if (records.empty()) return report;

  std::map<std::string, std::vector<DateTime>, std::less<>> by_device;
  Date first = date_of(records.front().timestamp), last = first;
  for (const auto& r : records) {
    by_device[r.device_id].push_back(r.timestamp);
    first = std::min(first, date_of(r.timestamp));
    last = std::max(last, date_of(r.timestamp));
  }
  const auto ndays = static_cast<std::size_t>(day_number(last) - day_number(first) + 1);

  std::vector<std::string> devices;
  std::vector<std::string> station_ids;
  std::vector<std::vector<BinSeries>> series;  // [device][day]
  for (auto& [device, times] : by_device) {
    std::sort(times.begin(), times.end());
    std::vector<BinSeries> days;
    days.reserve(ndays);
    for (std::size_t d = 0; d < ndays; ++d) {
      const DateTime start = first + std::chrono::days{d} + options.schedule.open;
      const DateTime end = start + window;
      const auto lo = std::lower_bound(times.begin(), times.end(), start);
      const auto hi = std::lower_bound(lo, times.end(), end);
      days.push_back(make_bin_series(device, std::span<const DateTime>(lo, hi), start, bins,
                                     options.bin_width, options.schedule));
    }
    devices.push_back(device);
    station_ids.push_back(station_of(stations, device));
    series.push_back(std::move(days));
  }
  for (const auto& [device, info] : stations.entries()) {
    if (!by_device.contains(device)) {
      report.notes.push_back(fmt::format("{}: no records in the period", device));
    }
  }

  auto history_of = [&](std::size_t dev, std::size_t day) {
    std::vector<BinSeries> h;
    for (std::size_t o = day % 7; o < ndays; o += 7) {
      if (o != day) h.push_back(series[dev][o]);
    }
    return h;
  };
  std::map<std::string, std::vector<std::size_t>> station_devices;
  for (std::size_t i = 0; i < devices.size(); ++i) {
    if (!station_ids[i].empty()) station_devices[station_ids[i]].push_back(i);
  }

  struct Part {
    std::vector<DeviceGap> gaps;
    std::vector<DeviceFlag> flags;
    std::vector<DeviceDay> days;
    std::vector<std::string> notes;
  };
  std::vector<Part> parts(chunk_count(devices.size(), options.threads));
  parallel_chunks(devices.size(), options.threads, [&](std::size_t c, std::size_t b, std::size_t e) {
    auto& part = parts[c];
    for (std::size_t dev = b; dev < e; ++dev) {
      const auto& device = devices[dev];
      const auto& station = station_ids[dev];
      for (std::size_t day = 0; day < ndays; ++day) {
        const auto& s = series[dev][day];
        const Date date = first + std::chrono::days{day};
        auto note = [&](const std::string& n) {
          part.notes.push_back(fmt::format("{} {}: {}", device, format_date(date), n));
        };
        auto scan = detect_missing(s, options.cadence);
        for (const auto& n : scan.notes) note(n);
        for (const auto& g : scan.gaps) part.gaps.push_back({device, station, g});

        const auto history = history_of(dev, day);
        std::vector<PeerSeries> peers;
        if (!station.empty()) {
          for (auto other : station_devices[station]) {
            if (other != dev) peers.push_back({series[other][day], history_of(other, day)});
          }
        }
        auto flags = flag_anomalies(s, history, peers, options.anomaly);
        for (const auto& n : flags.notes) note(n);
        for (const auto& f : flags.flags) part.flags.push_back({device, station, f});

        auto filled = impute(s, scan.gaps, history, options.impute);
        for (const auto& n : filled.warnings) note(n);
        part.days.push_back({device, station, date, s, std::move(filled.series)});
      }
    }
  });
  for (auto& p : parts) {
    std::move(p.gaps.begin(), p.gaps.end(), std::back_inserter(report.gaps));
    std::move(p.flags.begin(), p.flags.end(), std::back_inserter(report.flags));
    std::move(p.days.begin(), p.days.end(), std::back_inserter(report.days));
    std::move(p.notes.begin(), p.notes.end(), std::back_inserter(report.notes));
  }
  return report;
}

std::vector<Table> quality_tables(const QualityReport& report) {
  Table gaps{"quality_gaps", {"device_id", "station", "start", "end", "bins"}, {}};
  for (const auto& g : report.gaps) {
    gaps.add({str(g.device_id), str(g.station_id), str(format_datetime(g.gap.start)),
              str(format_datetime(g.gap.end)), num(g.gap.bin_count)});
  }
  Table flags{"quality_flags", {"device_id", "station", "bin_start", "period", "kind", "score"}, {}};
  for (const auto& f : report.flags) {
    flags.add({str(f.device_id), str(f.station_id), str(format_datetime(f.flag.bin_start)),
               str(period_code(period_of(f.flag.bin_start))), str(to_string(f.flag.kind)),
               real(f.flag.score)});
  }
  Table imputed{"quality_imputed",
                {"device_id", "station", "bin_start", "period", "count", "status"},
                {}};
  for (const auto& d : report.days) {
    for (std::size_t i = 0; i < d.imputed.size(); ++i) {
      const auto& b = d.imputed.bins[i];
      const char* status = !b.count ? "missing" : b.imputed ? "imputed" : "observed";
      imputed.add({str(d.device_id), str(d.station_id), str(format_datetime(d.imputed.bin_start(i))),
                   str(period_code(period_of(d.imputed.bin_start(i)))),
                   b.count ? real(*b.count) : Cell{}, str(status)});
    }
  }
  Table notes{"quality_notes", {"note"}, {}};
  for (const auto& n : report.notes) notes.add({str(n)});
  return {std::move(gaps), std::move(flags), std::move(imputed), std::move(notes)};
}

std::vector<TransferEvent> find_transfers(std::span<const CardRecord> records,
                                          const StationTable& stations, const TransferConfig& cfg,
                                          std::span<const TransferMode> modes, unsigned threads) {
  cfg.validate();
  const auto streams =
      partition_by_card(std::vector<CardRecord>(records.begin(), records.end()));
  return infer_transfers(streams, cfg, stations, modes, threads);
}

std::vector<Table> transfer_tables(std::span<const TransferEvent> events, const Baseline& baseline) {
  Table t{"transfers",
          {"card_id", "mode", "from_time", "to_time", "from_device", "to_device", "from_route",
           "to_route", "gap_minutes", "period"},
          {}};
  for (const auto& e : events) {
    t.add({str(e.card_id), str(to_string(e.mode)), str(format_datetime(e.from.timestamp)),
           str(format_datetime(e.to.timestamp)), str(e.from.device_id), str(e.to.device_id),
           str(leg_route(e, Leg::From)), str(leg_route(e, Leg::To)), real(e.gap_minutes),
           str(period_code(e.bin))});
  }
  std::vector<Table> out;
  out.push_back(std::move(t));
  for (auto [leg, suffix] : {std::pair{Leg::From, "from"}, std::pair{Leg::To, "to"}}) {
    Table share{fmt::format("route_share_{}", suffix), {"route", "percentage"}, {}};
    for (const auto& s : route_share(events, leg)) share.add({str(s.route), real(s.percentage)});
    out.push_back(std::move(share));
  }
  for (auto [leg, suffix] : {std::pair{Leg::From, "from"}, std::pair{Leg::To, "to"}}) {
    Table rel{fmt::format("relative_volume_{}", suffix), {"route", "count", "relative_volume"}, {}};
    for (const auto& r : relative_volume(events, leg, baseline)) {
      rel.add({str(r.route), num(r.count), real(r.ratio)});
    }
    out.push_back(std::move(rel));
  }
  return out;
}

Table transfer_stats_table(std::span<const TransferEvent> events, StdDevConvention convention) {
  Table t{"transfer_time_stats", {"period", "average_minutes", "stddev_minutes"}, {}};
  if (events.empty()) return t;
  for (const auto& row : transfer_time_stats(events, convention).rows) {
    t.add({str(row.bin ? period_code(*row.bin) : "ALL"), real(row.mean_minutes),
           real(row.stddev_minutes)});
  }
  return t;
}

std::vector<Table> buffer_tables(std::span<const geo::RoutePolyline> routes,
                                 std::span<const double> radii, double cell_size_m,
                                 unsigned threads) {
  Table t{"buffer", {"scope", "radius_m", "cell_size_m", "area_km2", "covered_cells"}, {}};
  if (routes.empty()) return {std::move(t)};
  for (double radius : radii) {
    const geo::BufferOptions opts{radius, cell_size_m, threads};
    const auto all = geo::buffer_area(routes, opts);
    t.add({str("ALL"), real(radius), real(cell_size_m), real(all.area_km2), num(all.covered_cells)});
    for (std::size_t i = 0; i < routes.size(); ++i) {
      const auto one = geo::buffer_area(routes.subspan(i, 1), opts);
      t.add({str(routes[i].route_id()), real(radius), real(cell_size_m), real(one.area_km2),
             num(one.covered_cells)});
    }
  }
  return {std::move(t)};
}

Table coincidence_table(std::span<const geo::RoutePolyline> routes, const std::string& route_a,
                        const std::string& route_b, double corridor_m, double step_m) {
  Table t{"coincidence",
          {"route_a", "route_b", "length_a_km", "length_b_km", "a_near_b_km", "b_near_a_km"},
          {}};
  auto index = [&](const std::string& id) {
    for (std::size_t i = 0; i < routes.size(); ++i) {
      if (routes[i].route_id() == id) return i;
    }
    throw std::invalid_argument("unknown route " + id);
  };
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (!route_a.empty() && !route_b.empty()) {
    pairs.emplace_back(index(route_a), index(route_b));
  } else if (!route_a.empty() || !route_b.empty()) {
    const auto a = index(route_a.empty() ? route_b : route_a);
    for (std::size_t j = 0; j < routes.size(); ++j) {
      if (j != a) pairs.emplace_back(a, j);
    }
  } else {
    for (std::size_t i = 0; i < routes.size(); ++i) {
      for (std::size_t j = i + 1; j < routes.size(); ++j) pairs.emplace_back(i, j);
    }
  }
  for (auto [i, j] : pairs) {
    const auto [ab, ba] = geo::coincidence(routes[i], routes[j], corridor_m, step_m);
    t.add({str(routes[i].route_id()), str(routes[j].route_id()), real(routes[i].length() / 1000.0),
           real(routes[j].length() / 1000.0), real(ab), real(ba)});
  }
  return t;
}

std::vector<Table> forecast_tables(std::span<const CardRecord> records,
                                   const ForecastOptions& options,
                                   std::vector<std::string>& notes) {
  if (options.holdout_days < 0 || options.horizon_days < 0) {
    throw std::invalid_argument("holdout and horizon must not be negative");
  }
  Table rows{"forecast", {"date", "weekday", "period", "predicted", "actual"}, {}};
  Table metrics{"forecast_metrics", {"metric", "value"}, {}};
  const auto series = bin_counts(records, Granularity::PerBin, options.filter, options.threads);

  std::set<Date> dates;
  for (const auto& p : series.points) dates.insert(p.date);
  if (dates.empty()) {
    notes.push_back("forecast: no boardings to model");
    return {std::move(rows), std::move(metrics)};
  }
  const auto holdout_n = static_cast<std::size_t>(options.holdout_days);
  if (holdout_n >= dates.size()) {
    notes.push_back("forecast: the holdout covers every date");
    return {std::move(rows), std::move(metrics)};
  }
  const Date cut = *std::next(dates.begin(), static_cast<std::ptrdiff_t>(dates.size() - holdout_n));
  FlowSeries train{series.key, Granularity::PerBin, {}};
  FlowSeries holdout{series.key, Granularity::PerBin, {}};
  for (const auto& p : series.points) (p.date < cut ? train : holdout).points.push_back(p);

  std::optional<PeriodicModel> model;
  try {
    model = fit_periodic(train, options.fit);
  } catch (const InsufficientHistory& e) {
    notes.push_back(fmt::format("forecast: {}", e.what()));
    return {std::move(rows), std::move(metrics)};
  }
  const auto [train_first, train_last] = model->training_span();
  metrics.add({str("train_first"), str(format_date(train_first))});
  metrics.add({str("train_last"), str(format_date(train_last))});
  if (!holdout.points.empty()) {
    const auto m = evaluate(*model, holdout);
    metrics.add({str("mape_percent"), real(m.mape_percent)});
    metrics.add({str("rmse"), real(m.rmse)});
    metrics.add({str("bins"), num(m.bins)});
    metrics.add({str("mape_bins"), num(m.mape_bins)});
  }
  for (const auto& p : holdout.points) {
    rows.add({str(format_date(p.date)), str(weekday_name(weekday_index(p.date))),
              str(period_code(*p.bin)), real(model->predict(p.date, *p.bin)), num(p.count)});
  }
  const Date after = *dates.rbegin() + std::chrono::days{1};
  for (const auto& f : forecast(*model, after, options.horizon_days)) {
    rows.add({str(format_date(f.date)), str(weekday_name(weekday_index(f.date))),
              str(period_code(f.bin)), real(f.predicted), Cell{}});
  }
  return {std::move(rows), std::move(metrics)};
}

}  // namespace afc::cli
