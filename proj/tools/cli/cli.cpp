#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "afc/synth.hpp"
#include "analyses.hpp"

namespace afc::cli {

namespace {

struct MissingFile : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string input;
  std::string stations;
  std::string routes;
  std::string out_dir = ".";
  std::string format = "csv";
  unsigned threads = 0;

  std::string hub;
  std::string mode = "all";
  std::string stats_mode = "subway-to-bus";
  double s2b_window_min = 30.0;
  double b2s_window_min = 60.0;
  std::string secondary_line;
  int service_day_start_hour = 3;
  std::string stddev = "population";
  std::string baseline = "max";

  double tau = 3.5;
  double rho = 0.5;
  std::size_t max_interp = 2;
  std::size_t min_history = 4;
  int open_hour = 6;
  int close_hour = 22;
  int bin_hours = 2;
  int cadence_min = 120;

  std::string granularity = "daily";
  std::string route_filter;
  std::string exclude_dates;
  int period = 7;
  double alpha = 1.5;

  std::vector<double> radius{500.0};
  double cell = 50.0;
  double corridor = 100.0;
  double step = 10.0;
  std::string route_a;
  std::string route_b;

  int holdout_days = 7;
  int horizon_days = 7;
  double decay = 1.0;
  bool trend = false;

  std::string spec;
  bool demo = false;
  std::string out = "-";
  std::string stations_out;
  std::string truth_out;
  std::string spec_out;
  std::size_t cards = 0;  // 0 keeps the spec value
  int days = 0;
  std::string seed;
  std::string start_date;
  double drop_rate = 0.0;
};

std::string text_of(const std::string& v) { return v; }
std::string text_of(bool v) { return v ? "true" : "false"; }
std::string text_of(double v) { return fmt::format("{}", v); }
template <typename T>
  requires std::is_integral_v<T>
std::string text_of(T v) {
  return std::to_string(v);
}
std::string text_of(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + text_of(v[i]);
  return s;
}

// Options per subcommand, in registration order, with a way to print the
// value in effect. Those marked off the record (output location, thread
// count) never reach the metadata so that outputs stay comparable.
class Registry {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* sub, const std::string& flag, T& var, const std::string& desc,
                   bool on_record = true) {
    auto* o = sub->add_option(flag, var, desc)->capture_default_str();
    if (on_record) params_[sub].push_back({flag.substr(2), [&var] { return text_of(var); }});
    return o;
  }
  CLI::Option* flag(CLI::App* sub, const std::string& name, bool& var, const std::string& desc) {
    auto* o = sub->add_flag(name, var, desc);
    params_[sub].push_back({name.substr(2), [&var] { return text_of(var); }});
    return o;
  }
  Meta meta(CLI::App* sub) const {
    Meta m{sub->get_name(), {}};
    if (auto it = params_.find(sub); it != params_.end()) {
      for (const auto& [name, value] : it->second) m.params.emplace_back(name, value());
    }
    return m;
  }

 private:
  std::map<CLI::App*, std::vector<std::pair<std::string, std::function<std::string()>>>> params_;
};

class Runner {
 public:
  Runner(std::istream& in, std::ostream& out, std::ostream& err) : in_(in), out_(out), err_(err) {}

  int main(int argc, const char* const* argv);

 private:
  void build();
  void validate() const;
  unsigned threads() const {
    if (cfg_.threads > 0) return cfg_.threads;
    return std::max(1u, std::thread::hardware_concurrency());
  }

  std::string read(const std::string& path);
  std::vector<CardRecord> records(ParseResult* parsed = nullptr, std::size_t* removed = nullptr);
  StationTable stations();
  std::vector<geo::RoutePolyline> routes();
  FlowFilter filter() const;
  TransferConfig transfer_config() const;
  std::vector<TransferMode> modes(const std::string& text) const;
  Baseline baseline() const;
  QualityOptions quality_options() const;
  ForecastOptions forecast_options() const;

  void emit(CLI::App* sub, const std::vector<Table>& tables);
  void notes(const std::vector<std::string>& lines);

  void ingest_check(CLI::App* sub);
  void quality(CLI::App* sub);
  void flow(CLI::App* sub);
  void periodicity(CLI::App* sub);
  void transfers(CLI::App* sub);
  void transfer_stats(CLI::App* sub);
  void buffer(CLI::App* sub);
  void coincidence(CLI::App* sub);
  void forecast(CLI::App* sub);
  void synth(CLI::App* sub);
  void report(CLI::App* sub);

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
  RunConfig cfg_;
  CLI::App app_{"Smart-card fare collection analytics"};
  Registry reg_;
  std::map<CLI::App*, std::function<void(CLI::App*)>> handlers_;
  std::optional<std::string> stdin_text_;
};

void Runner::build() {
  app_.require_subcommand(1);
  app_.set_config("--config", "", "INI or TOML file with option defaults")->envname("AFC_CONFIG");
  app_.allow_config_extras(CLI::config_extras_mode::error);

  auto input = [&](CLI::App* s) {
    reg_.add(s, "--input", cfg_.input, "Swipe records CSV, - for stdin")->required();
  };
  auto stations = [&](CLI::App* s) {
    reg_.add(s, "--stations", cfg_.stations, "Device to station table CSV");
  };
  auto output = [&](CLI::App* s) {
    reg_.add(s, "--out-dir", cfg_.out_dir, "Directory for output tables, - for stdout", false);
    reg_.add(s, "--format", cfg_.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    reg_.add(s, "--threads", cfg_.threads, "Worker threads, 0 for all cores", false);
  };
  auto flow_filter = [&](CLI::App* s) {
    reg_.add(s, "--route-filter", cfg_.route_filter, "Comma-separated bus routes to count");
    reg_.add(s, "--exclude-dates", cfg_.exclude_dates, "Comma-separated YYYY-MM-DD dates to drop");
  };
  auto transfer = [&](CLI::App* s, std::string& mode, const char* mode_flag) {
    reg_.add(s, "--hub", cfg_.hub, "Hub station id");
    reg_.add(s, mode_flag, mode,
             "all, or comma-separated subway-to-bus, bus-to-subway, secondary");
    reg_.add(s, "--s2b-window-min", cfg_.s2b_window_min, "Subway to bus window (minutes)")
        ->check(CLI::PositiveNumber);
    reg_.add(s, "--b2s-window-min", cfg_.b2s_window_min, "Bus to subway window (minutes)")
        ->check(CLI::PositiveNumber);
    reg_.add(s, "--secondary-line", cfg_.secondary_line, "Metro line for secondary transfers");
    reg_.add(s, "--service-day-start-hour", cfg_.service_day_start_hour,
             "Hour at which a service day begins")
        ->check(CLI::Range(0, 23));
  };
  auto quality = [&](CLI::App* s) {
    reg_.add(s, "--tau", cfg_.tau, "Robust z threshold")->check(CLI::PositiveNumber);
    reg_.add(s, "--rho", cfg_.rho, "Peer agreement fraction")->check(CLI::Range(0.0, 1.0));
    reg_.add(s, "--max-interp", cfg_.max_interp, "Longest gap filled by interpolation (bins)");
    reg_.add(s, "--min-history", cfg_.min_history, "History values needed to score a bin")
        ->check(CLI::PositiveNumber);
    reg_.add(s, "--open-hour", cfg_.open_hour, "Start of the collection window")
        ->check(CLI::Range(0, 23));
    reg_.add(s, "--close-hour", cfg_.close_hour, "End of the collection window")
        ->check(CLI::Range(1, 24));
    reg_.add(s, "--bin-hours", cfg_.bin_hours, "Bin width (hours)")->check(CLI::PositiveNumber);
    reg_.add(s, "--cadence-min", cfg_.cadence_min, "Expected reporting cadence (minutes)")
        ->check(CLI::PositiveNumber);
  };
  auto flow = [&](CLI::App* s) {
    reg_.add(s, "--granularity", cfg_.granularity, "daily or bin")
        ->check(CLI::IsMember({"daily", "bin"}));
    reg_.add(s, "--alpha", cfg_.alpha, "Peak factor over the median bin")
        ->check(CLI::PositiveNumber);
  };
  auto periodicity = [&](CLI::App* s) {
    reg_.add(s, "--period", cfg_.period, "Period in days")->check(CLI::PositiveNumber);
  };
  auto geo_routes = [&](CLI::App* s, bool required) {
    auto* o = reg_.add(s, "--routes", cfg_.routes, "Route geometry, GeoJSON or CSV");
    if (required) o->required();
  };
  auto buffer = [&](CLI::App* s) {
    reg_.add(s, "--radius", cfg_.radius, "Buffer radius in meters (repeatable)")
        ->check(CLI::PositiveNumber);
    reg_.add(s, "--cell", cfg_.cell, "Raster cell size in meters")->check(CLI::PositiveNumber);
  };
  auto coincidence = [&](CLI::App* s) {
    reg_.add(s, "--corridor", cfg_.corridor, "Corridor half-width in meters")
        ->check(CLI::PositiveNumber);
    reg_.add(s, "--step", cfg_.step, "Sampling step in meters")->check(CLI::PositiveNumber);
    reg_.add(s, "--route-a", cfg_.route_a, "First route id");
    reg_.add(s, "--route-b", cfg_.route_b, "Second route id");
  };
  auto forecast = [&](CLI::App* s) {
    reg_.add(s, "--holdout-days", cfg_.holdout_days, "Trailing days held out for evaluation")
        ->check(CLI::NonNegativeNumber);
    reg_.add(s, "--horizon-days", cfg_.horizon_days, "Days forecast past the data")
        ->check(CLI::NonNegativeNumber);
    reg_.add(s, "--decay", cfg_.decay, "Weekly weight decay in (0, 1]");
    reg_.flag(s, "--trend", cfg_.trend, "Add a linear trend");
  };
  auto stddev = [&](CLI::App* s) {
    reg_.add(s, "--stddev", cfg_.stddev, "population or sample")
        ->check(CLI::IsMember({"population", "sample"}));
  };
  auto baseline = [&](CLI::App* s) {
    reg_.add(s, "--baseline", cfg_.baseline, "max, or a positive standard volume");
  };

  auto sub = [&](const char* name, const char* desc, void (Runner::*fn)(CLI::App*)) {
    auto* s = app_.add_subcommand(name, desc);
    handlers_[s] = [this, fn](CLI::App* a) { (this->*fn)(a); };
    return s;
  };

  auto* s = sub("ingest-check", "Parse records and report problems", &Runner::ingest_check);
  input(s), stations(s), output(s);

  s = sub("quality", "Gaps, anomalies and imputation per device", &Runner::quality);
  input(s), stations(s), quality(s), output(s);

  s = sub("flow", "Bus boardings per day or per period", &Runner::flow);
  input(s), flow(s), flow_filter(s), output(s);

  s = sub("periodicity", "Autocorrelation of the daily series", &Runner::periodicity);
  input(s), periodicity(s), flow_filter(s), output(s);

  s = sub("transfers", "Infer transfers at the hub", &Runner::transfers);
  input(s), stations(s), transfer(s, cfg_.mode, "--mode"), baseline(s), output(s);

  s = sub("transfer-stats", "Transfer time per period", &Runner::transfer_stats);
  input(s), stations(s), transfer(s, cfg_.stats_mode, "--mode"), stddev(s), output(s);

  s = sub("buffer", "Buffer area of the route network", &Runner::buffer);
  geo_routes(s, true), buffer(s), output(s);

  s = sub("coincidence", "Shared length between routes", &Runner::coincidence);
  geo_routes(s, true), coincidence(s), output(s);

  s = sub("forecast", "Weekday-profile forecast of boardings", &Runner::forecast);
  input(s), forecast(s), flow_filter(s), output(s);

  s = sub("synth", "Generate synthetic swipe records", &Runner::synth);
  auto* spec = s->add_option("--spec", cfg_.spec, "Network and demand JSON");
  auto* demo = s->add_flag("--demo", cfg_.demo, "Use the built-in demo network and demand");
  spec->excludes(demo);
  s->add_option("--out", cfg_.out, "Records CSV, - for stdout")->capture_default_str();
  s->add_option("--stations-out", cfg_.stations_out, "Write the device table here");
  s->add_option("--truth-out", cfg_.truth_out, "Write the intended transfers here");
  s->add_option("--spec-out", cfg_.spec_out, "Write the effective spec JSON here");
  s->add_option("--cards", cfg_.cards, "Override the card count");
  s->add_option("--days", cfg_.days, "Override the number of days");
  s->add_option("--seed", cfg_.seed, "Override the seed");
  s->add_option("--start-date", cfg_.start_date, "Override the first date (YYYY-MM-DD)");
  s->add_option("--drop-rate", cfg_.drop_rate, "Randomly drop this share of records")
      ->check(CLI::Range(0.0, 1.0));
  s->add_option("--threads", cfg_.threads, "Worker threads, 0 for all cores");

  s = sub("report", "Run every analysis into one directory", &Runner::report);
  input(s), stations(s);
  geo_routes(s, false);
  transfer(s, cfg_.mode, "--mode");
  reg_.add(s, "--stats-mode", cfg_.stats_mode, "Modes for the transfer time table");
  baseline(s), stddev(s), quality(s), flow_filter(s);
  reg_.add(s, "--alpha", cfg_.alpha, "Peak factor over the median bin")
      ->check(CLI::PositiveNumber);
  periodicity(s), buffer(s), coincidence(s), forecast(s), output(s);
}

void Runner::validate() const {
  if (cfg_.close_hour <= cfg_.open_hour) throw UsageError("--close-hour must follow --open-hour");
  if ((cfg_.close_hour - cfg_.open_hour) % cfg_.bin_hours != 0) {
    throw UsageError("--bin-hours must divide the collection window");
  }
  if ((cfg_.bin_hours * 60) % cfg_.cadence_min != 0) {
    throw UsageError("--cadence-min must divide the bin width");
  }
  if (!(cfg_.decay > 0.0 && cfg_.decay <= 1.0)) throw UsageError("--decay must lie in (0, 1]");
  const double min_radius = *std::min_element(cfg_.radius.begin(), cfg_.radius.end());
  if (cfg_.cell > min_radius / 2.0) throw UsageError("--cell must be at most half the radius");
  if (cfg_.step > cfg_.corridor) throw UsageError("--step must not exceed --corridor");
  modes(cfg_.mode);
  modes(cfg_.stats_mode);
  baseline();
  filter();
}

std::string Runner::read(const std::string& path) {
  if (path == "-") {
    if (!stdin_text_) {
      stdin_text_.emplace(std::istreambuf_iterator<char>(in_), std::istreambuf_iterator<char>());
    }
    return *stdin_text_;
  }
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) throw MissingFile("no such file: " + path);
  std::ifstream f(path, std::ios::binary);
  if (!f) throw MissingFile("cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return std::move(s).str();
}

std::vector<CardRecord> Runner::records(ParseResult* parsed_out, std::size_t* removed) {
  auto parsed = parse_records(read(cfg_.input), threads());
  if (!parsed.errors.empty()) {
    err_ << fmt::format("note: {} of {} data lines could not be parsed\n", parsed.errors.size(),
                        parsed.data_lines);
  }
  auto dedup = deduplicate(std::move(parsed.records));
  parsed.records.clear();
  if (removed) *removed = dedup.removed;
  if (parsed_out) *parsed_out = std::move(parsed);
  return std::move(dedup.records);
}

StationTable Runner::stations() {
  if (cfg_.stations.empty()) return {};
  const auto text = read(cfg_.stations);
  try {
    return parse_station_table(text);
  } catch (const std::exception& e) {
    throw UsageError(fmt::format("{}: {}", cfg_.stations, e.what()));
  }
}

std::vector<geo::RoutePolyline> Runner::routes() {
  if (cfg_.routes.empty()) return {};
  const auto text = read(cfg_.routes);
  const auto ext = std::filesystem::path(cfg_.routes).extension().string();
  return ext == ".csv" ? geo::load_routes_csv(text) : geo::load_routes_geojson(text);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream s(text);
  while (std::getline(s, cur, ',')) {
    while (!cur.empty() && cur.front() == ' ') cur.erase(cur.begin());
    while (!cur.empty() && cur.back() == ' ') cur.pop_back();
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

FlowFilter Runner::filter() const {
  FlowFilter f;
  if (!cfg_.route_filter.empty()) {
    const auto routes = split_list(cfg_.route_filter);
    f.routes.emplace(routes.begin(), routes.end());
  }
  for (const auto& d : split_list(cfg_.exclude_dates)) {
    const auto date = parse_date(d);
    if (!date) throw UsageError("bad date in --exclude-dates: " + d);
    f.excluded_dates.insert(*date);
  }
  return f;
}

TransferConfig Runner::transfer_config() const {
  TransferConfig c;
  c.hub_station_id = cfg_.hub;
  c.subway_to_bus_window = Seconds{std::llround(cfg_.s2b_window_min * 60.0)};
  c.bus_to_subway_window = Seconds{std::llround(cfg_.b2s_window_min * 60.0)};
  c.secondary_line_id = cfg_.secondary_line;
  c.service_day_start = std::chrono::hours{cfg_.service_day_start_hour};
  return c;
}

std::vector<TransferMode> Runner::modes(const std::string& text) const {
  if (text == "all") return {kTransferModes.begin(), kTransferModes.end()};
  std::vector<TransferMode> out;
  for (const auto& part : split_list(text)) {
    const auto m = transfer_mode_from_string(part);
    if (!m) throw UsageError("unknown transfer mode: " + part);
    if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
  }
  if (out.empty()) throw UsageError("no transfer mode selected");
  return out;
}

Baseline Runner::baseline() const {
  if (cfg_.baseline == "max") return MaxRouteBaseline{};
  double v = 0.0;
  const auto* b = cfg_.baseline.data();
  const auto* e = b + cfg_.baseline.size();
  const auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc{} || ptr != e || !(v > 0.0)) {
    throw UsageError("--baseline must be max or a positive number");
  }
  return FixedBaseline{v};
}

QualityOptions Runner::quality_options() const {
  QualityOptions q;
  q.schedule.open = std::chrono::hours{cfg_.open_hour};
  q.schedule.close = std::chrono::hours{cfg_.close_hour};
  q.bin_width = std::chrono::hours{cfg_.bin_hours};
  q.cadence = std::chrono::minutes{cfg_.cadence_min};
  q.anomaly = AnomalyConfig{cfg_.tau, cfg_.rho, cfg_.min_history};
  q.impute = ImputeConfig{cfg_.max_interp};
  q.threads = threads();
  return q;
}

ForecastOptions Runner::forecast_options() const {
  ForecastOptions f;
  f.filter = filter();
  f.holdout_days = cfg_.holdout_days;
  f.horizon_days = cfg_.horizon_days;
  f.fit = FitOptions{cfg_.decay, cfg_.trend};
  f.threads = threads();
  return f;
}

void Runner::emit(CLI::App* sub, const std::vector<Table>& tables) {
  const auto meta = reg_.meta(sub);
  const auto format = cfg_.format == "json" ? Format::Json : Format::Csv;
  for (const auto& t : tables) {
    const auto path = write_table(t, meta, format, cfg_.out_dir, out_);
    if (path != "-") out_ << path << '\n';
  }
}

void Runner::notes(const std::vector<std::string>& lines) {
  for (const auto& l : lines) err_ << "note: " << l << '\n';
}

void Runner::ingest_check(CLI::App* sub) {
  ParseResult parsed;
  std::size_t removed = 0;
  const auto recs = records(&parsed, &removed);
  emit(sub, ingest_tables(parsed, removed, recs, stations()));
}

void Runner::quality(CLI::App* sub) {
  const auto recs = records();
  const auto report = assess_quality(recs, stations(), quality_options());
  emit(sub, quality_tables(report));
}

void Runner::flow(CLI::App* sub) {
  const auto recs = records();
  FlowOptions f;
  f.granularity = cfg_.granularity == "bin" ? Granularity::PerBin : Granularity::Daily;
  f.filter = filter();
  f.alpha = cfg_.alpha;
  f.threads = threads();
  emit(sub, flow_tables(recs, f));
}

void Runner::periodicity(CLI::App* sub) {
  const auto recs = records();
  std::vector<std::string> n;
  auto tables = periodicity_tables(recs, filter(), cfg_.period, threads(), n);
  notes(n);
  emit(sub, tables);
}

void Runner::transfers(CLI::App* sub) {
  const auto recs = records();
  const auto st = stations();
  if (st.empty()) err_ << "note: no station table, so no swipe can be placed at the hub\n";
  const auto ms = modes(cfg_.mode);
  const auto events = find_transfers(recs, st, transfer_config(), ms, threads());
  emit(sub, transfer_tables(events, baseline()));
}

void Runner::transfer_stats(CLI::App* sub) {
  const auto recs = records();
  const auto st = stations();
  if (st.empty()) err_ << "note: no station table, so no swipe can be placed at the hub\n";
  const auto ms = modes(cfg_.stats_mode);
  const auto events = find_transfers(recs, st, transfer_config(), ms, threads());
  emit(sub, {transfer_stats_table(events, cfg_.stddev == "sample" ? StdDevConvention::Sample
                                                                  : StdDevConvention::Population)});
}

void Runner::buffer(CLI::App* sub) {
  const auto rs = routes();
  emit(sub, buffer_tables(rs, cfg_.radius, cfg_.cell, threads()));
}

void Runner::coincidence(CLI::App* sub) {
  const auto rs = routes();
  try {
    emit(sub, {coincidence_table(rs, cfg_.route_a, cfg_.route_b, cfg_.corridor, cfg_.step)});
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

void Runner::forecast(CLI::App* sub) {
  const auto recs = records();
  std::vector<std::string> n;
  auto tables = forecast_tables(recs, forecast_options(), n);
  notes(n);
  emit(sub, tables);
}

void Runner::synth(CLI::App*) {
  synth::SynthSpec spec;
  if (cfg_.demo) {
    spec = {synth::demo_network(), synth::demo_demand()};
  } else if (!cfg_.spec.empty()) {
    spec = synth::load_spec(read(cfg_.spec));
  } else {
    throw UsageError("synth needs --spec or --demo");
  }
  auto& d = spec.demand;
  if (cfg_.cards > 0) d.cards = cfg_.cards;
  if (cfg_.days > 0) d.days = cfg_.days;
  if (!cfg_.seed.empty()) {
    std::uint64_t v = 0;
    const auto* e = cfg_.seed.data() + cfg_.seed.size();
    const auto [ptr, ec] = std::from_chars(cfg_.seed.data(), e, v);
    if (ec != std::errc{} || ptr != e) throw UsageError("--seed must be an unsigned integer");
    d.seed = v;
  }
  if (!cfg_.start_date.empty()) {
    const auto date = parse_date(cfg_.start_date);
    if (!date) throw UsageError("bad --start-date: " + cfg_.start_date);
    d.start_date = *date;
  }
  spec.network.validate();
  d.validate(spec.network);

  if (!cfg_.spec_out.empty()) {
    nlohmann::ordered_json j;
    j["network"] = synth::to_json(spec.network);
    j["demand"] = synth::to_json(d);
    std::ofstream f(cfg_.spec_out, std::ios::binary);
    f << j.dump(2) << '\n';
    if (!f) throw std::runtime_error("cannot write " + cfg_.spec_out);
  }

  auto generated = synth::generate(spec.network, d, threads());
  auto recs = std::move(generated.records);
  if (cfg_.drop_rate > 0.0) {
    recs = synth::corrupt(recs, {}, {}, cfg_.drop_rate, d.seed).records;
  }
  auto write = [&](const std::string& path, const std::string& body) {
    if (path == "-") {
      out_ << body;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    f << body;
    if (!f) throw std::runtime_error("cannot write " + path);
  };
  write(cfg_.out, format_records(recs));
  if (!cfg_.stations_out.empty()) {
    write(cfg_.stations_out, format_station_table(synth::station_table(spec.network)));
  }
  if (!cfg_.truth_out.empty()) {
    std::string body = "card_id,mode,from_time,to_time\n";
    for (const auto& k : synth::intended_transfers(generated.plans)) {
      body += fmt::format("{},{},{},{}\n", k.card_id, to_string(k.mode), format_datetime(k.from),
                          format_datetime(k.to));
    }
    write(cfg_.truth_out, body);
  }
}

void Runner::report(CLI::App* sub) {
  ParseResult parsed;
  std::size_t removed = 0;
  const auto recs = records(&parsed, &removed);
  const auto st = stations();
  const auto rs = routes();
  const auto n_threads = threads();
  std::vector<std::string> n;

  std::vector<Table> tables = ingest_tables(parsed, removed, recs, st);
  parsed = {};
  auto append = [&](std::vector<Table> more) {
    std::move(more.begin(), more.end(), std::back_inserter(tables));
  };

  FlowOptions f;
  f.filter = filter();
  f.alpha = cfg_.alpha;
  f.threads = n_threads;
  append(flow_tables(recs, f));
  f.granularity = Granularity::PerBin;
  append(flow_tables(recs, f));
  append(periodicity_tables(recs, f.filter, cfg_.period, n_threads, n));
  append(quality_tables(assess_quality(recs, st, quality_options())));

  if (cfg_.hub.empty()) n.push_back("transfers: no --hub given");
  const auto cfg = transfer_config();
  std::vector<TransferEvent> events, stat_events;
  if (!cfg_.hub.empty()) {
    events = find_transfers(recs, st, cfg, modes(cfg_.mode), n_threads);
    stat_events = find_transfers(recs, st, cfg, modes(cfg_.stats_mode), n_threads);
  }
  append(transfer_tables(events, baseline()));
  tables.push_back(transfer_stats_table(
      stat_events,
      cfg_.stddev == "sample" ? StdDevConvention::Sample : StdDevConvention::Population));

  if (rs.empty()) n.push_back("buffer, coincidence: no --routes given");
  append(buffer_tables(rs, cfg_.radius, cfg_.cell, n_threads));
  try {
    tables.push_back(coincidence_table(rs, cfg_.route_a, cfg_.route_b, cfg_.corridor, cfg_.step));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  append(forecast_tables(recs, forecast_options(), n));
  notes(n);
  emit(sub, tables);
}

int Runner::main(int argc, const char* const* argv) {
  build();
  try {
    app_.parse(argc, argv);
  } catch (const CLI::FileError& e) {
    app_.exit(e, out_, err_);
    return kExitMissingFile;
  } catch (const CLI::ParseError& e) {
    const int code = app_.exit(e, out_, err_);
    return code == 0 ? kExitOk : kExitBadConfig;
  }
  try {
    validate();
    for (auto& [sub, handler] : handlers_) {
      if (sub->parsed()) handler(sub);
    }
    out_.flush();
    return kExitOk;
  } catch (const MissingFile& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitMissingFile;
  } catch (const UsageError& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const synth::SynthConfigError& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const std::exception& e) {
    err_ << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  Runner runner(in, out, err);
  return runner.main(argc, argv);
}

}  // namespace afc::cli
