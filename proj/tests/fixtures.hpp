#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "afc/forecast.hpp"
#include "afc/rng.hpp"
#include "afc/synth.hpp"
#include "analyses.hpp"

// Synthetic city used by the quality checks: four subway stations with six
// gates each and subway-only trips, so every gate sees dozens of swipes in
// every two-hour bin of the collection window.
namespace fixtures {

inline afc::synth::NetworkSpec quality_network() {
  afc::synth::NetworkSpec net;
  net.hub_station_id = "A";
  for (const char* id : {"A", "B", "C", "D"}) {
    afc::synth::StationSpec s{id, afc::Mode::Subway, "L1", {}};
    for (int g = 1; g <= 6; ++g) s.device_ids.push_back(std::string(id) + "-G" + std::to_string(g));
    net.stations.push_back(std::move(s));
  }
  return net;
}

inline afc::synth::DemandSpec quality_demand(std::uint64_t seed, int weeks = 8) {
  afc::synth::DemandSpec d;
  d.cards = 4000;
  d.start_date = afc::Date{std::chrono::year{2024} / 1 / 1};  // a Monday
  d.days = 7 * weeks;
  for (std::size_t w = 0; w < 7; ++w) {
    d.weekday_profile[w] = w < 5 ? std::array<double, afc::kBinCount>{0.14, 0.12, 0.08, 0.08, 0.08, 0.12, 0.10, 0.08, 0.02}
                                 : std::array<double, afc::kBinCount>{0.07, 0.08, 0.09, 0.09, 0.09, 0.09, 0.08, 0.07, 0.02};
  }
  d.daily_noise = 0.05;
  d.transfer_mix = {1.0, 0.0, 0.0, 0.0};
  d.bus_only_share = 0.0;
  d.seed = seed;
  return d;
}

// Demo city whose weekend days carry half the weekday volume, with daily
// noise of up to +/- `noise`.
inline afc::synth::DemandSpec periodic_demand(std::uint64_t seed, int weeks = 8, double noise = 0.10) {
  auto d = afc::synth::demo_demand();
  d.days = 7 * weeks;
  d.daily_noise = noise;
  d.seed = seed;
  for (std::size_t w = 5; w < 7; ++w) {
    for (std::size_t b = 0; b < afc::kBinCount; ++b) d.weekday_profile[w][b] = 0.5 * d.weekday_profile[0][b];
  }
  return d;
}

// Per-bin expected counts between 80 and 320, varying by weekday and bin.
inline std::array<std::array<double, afc::kBinCount>, 7> forecast_expectation() {
  std::array<std::array<double, afc::kBinCount>, 7> e{};
  for (std::size_t w = 0; w < 7; ++w) {
    for (std::size_t b = 0; b < afc::kBinCount; ++b) e[w][b] = 80.0 + 40.0 * static_cast<double>((w * 3 + b * 5) % 7);
  }
  return e;
}

// Holdout MAPE of a plain weekday-profile fit: four weeks of training, one
// week of test, multiplicative noise on every bin.
inline double forecast_mape(std::uint64_t seed, double noise) {
  const afc::Date start{std::chrono::year{2024} / 1 / 1};
  const auto all = afc::synth::periodic_flow_series(forecast_expectation(), start, 35, noise, seed);
  afc::FlowSeries train{"ALL", afc::Granularity::PerBin, {}}, test{"ALL", afc::Granularity::PerBin, {}};
  for (const auto& p : all.points) (p.date < start + std::chrono::days{28} ? train : test).points.push_back(p);
  return afc::evaluate(afc::fit_periodic(train), test).mape_percent;
}

struct Defects {
  std::vector<afc::synth::GapInjection> gaps;
  std::vector<afc::synth::AnomalyInjection> faults;
};

// Random gaps of one to three whole bins and x10 faults on single bins, each
// on its own (device, date) so injections never touch one another.
inline Defects plan_defects(const afc::synth::NetworkSpec& net, const afc::synth::DemandSpec& demand,
                            std::size_t gaps, std::size_t faults, std::uint64_t seed) {
  std::vector<std::string> devices;
  for (const auto& s : net.stations) devices.insert(devices.end(), s.device_ids.begin(), s.device_ids.end());
  afc::CounterRng rng{afc::derive_key(seed, 0x51a7, 0)};
  std::set<std::pair<std::size_t, int>> used;
  auto slot = [&] {
    while (true) {
      const auto dev = rng.below(devices.size());
      const auto day = static_cast<int>(rng.below(static_cast<std::uint64_t>(demand.days)));
      if (used.emplace(dev, day).second) return std::pair{dev, day};
    }
  };
  Defects out;
  for (std::size_t i = 0; i < gaps; ++i) {
    const auto [dev, day] = slot();
    const auto bins = 1 + static_cast<int>(rng.below(3));
    const auto first = static_cast<int>(rng.below(static_cast<std::uint64_t>(8 - bins + 1)));
    const afc::DateTime start = afc::DateTime{demand.start_date + std::chrono::days{day}} +
                                std::chrono::hours{6 + 2 * first};
    out.gaps.push_back({devices[dev], start, start + std::chrono::hours{2 * bins}});
  }
  for (std::size_t i = 0; i < faults; ++i) {
    const auto [dev, day] = slot();
    const auto bin = static_cast<int>(rng.below(8));
    const afc::DateTime start = afc::DateTime{demand.start_date + std::chrono::days{day}} +
                                std::chrono::hours{6 + 2 * bin};
    out.faults.push_back({devices[dev], start, std::chrono::hours{2}, 10.0});
  }
  return out;
}

struct QualityScore {
  std::size_t gaps_injected = 0;
  std::size_t gaps_found = 0;
  std::size_t false_gaps = 0;
  std::size_t faults_injected = 0;
  std::size_t faults_found = 0;  // flagged as EquipmentFault
  std::size_t clean_bins = 0;    // present bins outside every injection
  std::size_t false_flags = 0;   // flags of either kind on those bins

  double gap_recall() const { return gaps_injected ? double(gaps_found) / double(gaps_injected) : 1.0; }
  double fault_recall() const { return faults_injected ? double(faults_found) / double(faults_injected) : 1.0; }
  double false_positive_rate() const { return clean_bins ? double(false_flags) / double(clean_bins) : 0.0; }
};

inline QualityScore score(const afc::cli::QualityReport& report, const Defects& defects) {
  QualityScore s;
  s.gaps_injected = defects.gaps.size();
  s.faults_injected = defects.faults.size();
  std::set<std::tuple<std::string, afc::DateTime, afc::DateTime>> truth;
  for (const auto& g : defects.gaps) truth.emplace(g.device_id, g.start, g.end);
  for (const auto& g : report.gaps) {
    if (truth.contains({g.device_id, g.gap.start, g.gap.end})) {
      ++s.gaps_found;
    } else {
      ++s.false_gaps;
    }
  }
  std::set<std::pair<std::string, afc::DateTime>> fault_bins;
  for (const auto& f : defects.faults) fault_bins.emplace(f.device_id, f.bin_start);
  std::set<std::pair<std::string, afc::DateTime>> flagged;
  for (const auto& f : report.flags) {
    const std::pair key{f.device_id, f.flag.bin_start};
    if (fault_bins.contains(key)) {
      if (f.flag.kind == afc::AnomalyKind::EquipmentFault) ++s.faults_found;
    } else {
      flagged.insert(key);
    }
  }
  s.false_flags = flagged.size();
  for (const auto& day : report.days) {
    for (std::size_t i = 0; i < day.observed.size(); ++i) {
      if (day.observed.bins[i].count && !fault_bins.contains({day.device_id, day.observed.bin_start(i)})) {
        ++s.clean_bins;
      }
    }
  }
  return s;
}

// Generates, corrupts and assesses one seed with default thresholds.
inline QualityScore run_quality_oracle(std::uint64_t seed, afc::AnomalyConfig anomaly = {},
                                       unsigned threads = 1, std::size_t gaps = 20, std::size_t faults = 10) {
  const auto net = quality_network();
  const auto demand = quality_demand(seed);
  const auto clean = afc::synth::generate(net, demand, threads);
  const auto defects = plan_defects(net, demand, gaps, faults, seed);
  auto corrupted = afc::synth::corrupt(clean.records, defects.gaps, defects.faults, 0.0, seed);
  afc::cli::QualityOptions options;
  options.anomaly = anomaly;
  options.threads = threads;
  const auto report = afc::cli::assess_quality(corrupted.records, afc::synth::station_table(net), options);
  return score(report, defects);
}

}  // namespace fixtures
