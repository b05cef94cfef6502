#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "afc/transfers.hpp"
#include "support.hpp"

using namespace afc;
using testing::at;
using testing::rec;

namespace {

StationTable stations() {
  StationTable t;
  t.add("G1", {"ZZL", Mode::Subway, "Luobao"});
  t.add("G2", {"ZZL", Mode::Subway, "Luobao"});
  t.add("X1", {"XMH", Mode::Subway, "Luobao"});
  t.add("J1", {"DJ", Mode::Subway, "Longgang"});
  t.add("B1", {"S392", Mode::Bus, "392"});
  t.add("B2", {"S43", Mode::Bus, "43"});
  return t;
}

TransferConfig config() {
  TransferConfig c;
  c.hub_station_id = "ZZL";
  c.secondary_line_id = "Luobao";
  return c;
}

CardStream stream(std::vector<CardRecord> rs) {
  auto s = partition_by_card(std::move(rs));
  REQUIRE(s.size() == 1);
  return s[0];
}

CardRecord hub_exit(std::string_view t) { return rec("C1", TxnType::SubwayExit, "G1", t); }
CardRecord hub_entry(std::string_view t) { return rec("C1", TxnType::SubwayEntry, "G2", t); }
CardRecord board(std::string_view t, std::string route = "392") {
  return rec("C1", TxnType::BusBoard, route == "392" ? "B1" : "B2", t, route);
}

TransferEvent event(double gap, PeriodBin bin, std::string route = "392") {
  TransferEvent e;
  e.card_id = "C";
  e.gap_minutes = gap;
  e.bin = bin;
  e.to = rec("C", TxnType::BusBoard, "B1", "2011-07-04 08:00:00", std::move(route));
  e.from = rec("C", TxnType::SubwayExit, "G1", "2011-07-04 07:50:00", "Luobao");
  return e;
}

std::vector<CardRecord> random_day(testing::Gen& g, const std::string& card) {
  static const std::vector<std::pair<TxnType, std::string>> swipes = {
      {TxnType::SubwayExit, "G1"},  {TxnType::SubwayEntry, "G2"}, {TxnType::SubwayEntry, "X1"},
      {TxnType::SubwayExit, "X1"},  {TxnType::SubwayEntry, "J1"}, {TxnType::BusBoard, "B1"},
      {TxnType::BusBoard, "B2"},    {TxnType::SubwayExit, "G2"}};
  std::vector<CardRecord> out;
  const auto n = testing::pick(g, 0, 12);
  for (long long i = 0; i < n; ++i) {
    const auto& [type, device] = swipes[static_cast<std::size_t>(testing::pick(g, 0, 7))];
    CardRecord r{card, type, device, at("2011-07-04 05:00:00") + Seconds{testing::pick(g, 0, 86400)}, {}};
    if (type == TxnType::BusBoard) r.line_id = device == "B1" ? "392" : "43";
    out.push_back(std::move(r));
  }
  return out;
}

using Key = std::tuple<std::string, TransferMode, DateTime, DateTime>;

std::set<Key> keys(const std::vector<TransferEvent>& events) {
  std::set<Key> k;
  for (const auto& e : events) k.emplace(e.card_id, e.mode, e.from.timestamp, e.to.timestamp);
  return k;
}

}  // namespace

TEST_SUITE("transfers") {
  TEST_CASE("subway to bus within half an hour") {
    const auto ev = infer_subway_to_bus(
        stream({hub_exit("2011-07-04 08:00:00"), board("2011-07-04 08:25:00")}), config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].mode == TransferMode::SubwayToBus);
    CHECK(ev[0].gap_minutes == doctest::Approx(25.0));
    CHECK(ev[0].bin == PeriodBin::H08_10);
    CHECK(ev[0].from.line_id == std::optional<std::string>("Luobao"));  // filled from the table
  }

  TEST_CASE("subway to bus past half an hour") {
    CHECK(infer_subway_to_bus(stream({hub_exit("2011-07-04 08:00:00"), board("2011-07-04 08:31:00")}),
                              config(), stations())
              .empty());
  }

  TEST_CASE("earliest boarding wins") {
    const auto ev = infer_subway_to_bus(stream({hub_exit("2011-07-04 08:00:00"),
                                                board("2011-07-04 08:05:00"),
                                                board("2011-07-04 08:20:00", "43")}),
                                        config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].to.timestamp == at("2011-07-04 08:05:00"));
  }

  TEST_CASE("an intervening subway entry breaks the chain") {
    CHECK(infer_subway_to_bus(stream({hub_exit("2011-07-04 08:00:00"),
                                      rec("C1", TxnType::SubwayEntry, "X1", "2011-07-04 08:10:00"),
                                      board("2011-07-04 08:20:00")}),
                              config(), stations())
              .empty());
  }

  TEST_CASE("exits at other stations do not count") {
    CHECK(infer_subway_to_bus(stream({rec("C1", TxnType::SubwayExit, "X1", "2011-07-04 08:00:00"),
                                      board("2011-07-04 08:05:00")}),
                              config(), stations())
              .empty());
  }

  TEST_CASE("one boarding serves one exit") {
    // the second exit stops the first scan, so only it can pair
    const auto ev = infer_subway_to_bus(
        stream({hub_exit("2011-07-04 08:00:00"), hub_exit("2011-07-04 08:05:00"),
                board("2011-07-04 08:10:00")}),
        config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].from.timestamp == at("2011-07-04 08:05:00"));
  }

  TEST_CASE("bus to subway within an hour") {
    const auto ev = infer_bus_to_subway(
        stream({board("2011-07-04 09:00:00"), hub_entry("2011-07-04 09:45:00")}), config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].gap_minutes == doctest::Approx(45.0));
    CHECK(ev[0].mode == TransferMode::BusToSubway);
  }

  TEST_CASE("bus to subway past an hour or away from the hub") {
    CHECK(infer_bus_to_subway(stream({board("2011-07-04 09:00:00"), hub_entry("2011-07-04 10:01:00")}),
                              config(), stations())
              .empty());
    CHECK(infer_bus_to_subway(stream({board("2011-07-04 09:00:00"),
                                      rec("C1", TxnType::SubwayEntry, "X1", "2011-07-04 09:10:00")}),
                              config(), stations())
              .empty());
  }

  TEST_CASE("a later boarding takes over the entry") {
    const auto ev = infer_bus_to_subway(stream({board("2011-07-04 09:00:00"),
                                                board("2011-07-04 09:10:00", "43"),
                                                hub_entry("2011-07-04 09:20:00")}),
                                        config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].from.timestamp == at("2011-07-04 09:10:00"));
  }

  TEST_CASE("windows are inclusive to the second") {
    auto s2b = [&](int seconds) {
      return infer_subway_to_bus(
                 stream({hub_exit("2011-07-04 08:00:00"),
                         CardRecord{"C1", TxnType::BusBoard, "B1",
                                    at("2011-07-04 08:00:00") + Seconds{seconds}, "392"}}),
                 config(), stations())
          .size();
    };
    CHECK(s2b(30 * 60 - 1) == 1);
    CHECK(s2b(30 * 60) == 1);
    CHECK(s2b(30 * 60 + 1) == 0);
    CHECK(s2b(0) == 1);
    auto b2s = [&](int seconds) {
      return infer_bus_to_subway(
                 stream({board("2011-07-04 08:00:00"),
                         CardRecord{"C1", TxnType::SubwayEntry, "G1",
                                    at("2011-07-04 08:00:00") + Seconds{seconds}, {}}}),
                 config(), stations())
          .size();
    };
    CHECK(b2s(60 * 60 - 1) == 1);
    CHECK(b2s(60 * 60) == 1);
    CHECK(b2s(60 * 60 + 1) == 0);
  }

  TEST_CASE("secondary transfer over the designated line") {
    const auto ev = infer_secondary(stream({board("2011-07-04 07:00:00"),
                                            rec("C1", TxnType::SubwayEntry, "X1", "2011-07-04 07:40:00"),
                                            hub_exit("2011-07-04 08:25:00")}),
                                    config(), stations());
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].mode == TransferMode::BusToSubwaySecondary);
    CHECK(ev[0].gap_minutes == doctest::Approx(40.0));
    CHECK(ev[0].to.device_id == "X1");
    CHECK(ev[0].bin == PeriodBin::H06_08);
  }

  TEST_CASE("secondary needs the hub exit, the line and the window") {
    const auto st = stations();
    CHECK(infer_secondary(stream({board("2011-07-04 07:00:00"),
                                  rec("C1", TxnType::SubwayEntry, "X1", "2011-07-04 07:40:00"),
                                  rec("C1", TxnType::SubwayExit, "J1", "2011-07-04 08:25:00")}),
                          config(), st)
              .empty());
    CHECK(infer_secondary(stream({board("2011-07-04 07:00:00"),
                                  rec("C1", TxnType::SubwayEntry, "X1", "2011-07-04 08:05:00"),
                                  hub_exit("2011-07-04 08:25:00")}),
                          config(), st)
              .empty());
    CHECK(infer_secondary(stream({board("2011-07-04 07:00:00"),
                                  rec("C1", TxnType::SubwayEntry, "J1", "2011-07-04 07:40:00"),
                                  hub_exit("2011-07-04 08:25:00")}),
                          config(), st)
              .empty());
    // The line can come from the record itself.
    CHECK(infer_secondary(stream({board("2011-07-04 07:00:00"),
                                  rec("C1", TxnType::SubwayEntry, "Q9", "2011-07-04 07:40:00", "Luobao"),
                                  hub_exit("2011-07-04 08:25:00")}),
                          config(), st)
              .size() == 1);
  }

  TEST_CASE("secondary hub exit must fall in the same service day") {
    const auto st = stations();
    CHECK(infer_secondary(stream({board("2011-07-04 23:50:00"),
                                  rec("C1", TxnType::SubwayEntry, "X1", "2011-07-05 00:30:00"),
                                  hub_exit("2011-07-05 01:00:00")}),
                          config(), st)
              .size() == 1);
    CHECK(infer_secondary(stream({board("2011-07-05 02:30:00"),
                                  rec("C1", TxnType::SubwayEntry, "X1", "2011-07-05 02:50:00"),
                                  hub_exit("2011-07-05 03:10:00")}),
                          config(), st)
              .empty());
  }

  TEST_CASE("one boarding may serve two modes") {
    const std::vector<CardRecord> rs = {hub_exit("2011-07-04 08:00:00"), board("2011-07-04 08:10:00"),
                                        hub_entry("2011-07-04 08:40:00")};
    const auto streams = partition_by_card(rs);
    const auto ev = infer_transfers(streams, config(), stations());
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].mode == TransferMode::SubwayToBus);
    CHECK(ev[1].mode == TransferMode::BusToSubway);
    CHECK(ev[0].to == ev[1].from);
  }

  TEST_CASE("non-positive windows are rejected") {
    auto c = config();
    c.subway_to_bus_window = Seconds{0};
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    CHECK_THROWS_AS(infer_transfers({}, c, stations()), std::invalid_argument);
    CHECK(transfer_mode_from_string("secondary") == TransferMode::BusToSubwaySecondary);
    CHECK(to_string(TransferMode::SubwayToBus) == "subway-to-bus");
  }

  TEST_CASE("matching is one-to-one and grows with the windows") {
    testing::Gen g{61};
    const auto st = stations();
    for (int round = 0; round < 300; ++round) {
      auto day = random_day(g, "C1");
      day.push_back(board("2011-07-04 08:00:00"));
      const auto s = stream(day);
      auto small = config();
      small.subway_to_bus_window = std::chrono::minutes{testing::pick(g, 1, 60)};
      small.bus_to_subway_window = std::chrono::minutes{testing::pick(g, 1, 90)};
      auto large = small;
      large.subway_to_bus_window += std::chrono::minutes{testing::pick(g, 0, 60)};
      large.bus_to_subway_window += std::chrono::minutes{testing::pick(g, 0, 60)};
      const std::vector<CardStream> one = {s};
      const auto a = infer_transfers(one, small, st);
      const auto b = infer_transfers(one, large, st);
      const auto ka = keys(a), kb = keys(b);
      CHECK(std::includes(kb.begin(), kb.end(), ka.begin(), ka.end()));
      for (auto mode : kTransferModes) {
        std::set<DateTime> from, to;
        for (const auto& e : b) {
          if (e.mode != mode) continue;
          CHECK(from.insert(e.from.timestamp).second);
          CHECK(to.insert(e.to.timestamp).second);
          CHECK(e.gap_minutes >= 0.0);
        }
      }
    }
  }

  TEST_CASE("output does not depend on card order or thread count") {
    testing::Gen g{67};
    std::vector<CardRecord> all;
    for (int c = 0; c < 300; ++c) {
      auto day = random_day(g, "C" + std::to_string(c));
      all.insert(all.end(), day.begin(), day.end());
    }
    const auto reference = infer_transfers(partition_by_card(all), config(), stations());
    CHECK_FALSE(reference.empty());
    std::shuffle(all.begin(), all.end(), g);
    for (unsigned threads : {1u, 2u, 5u}) {
      const auto streams = partition_by_card(all);
      const auto ev = infer_transfers(streams, config(), stations(), kTransferModes, threads);
      REQUIRE(ev.size() == reference.size());
      for (std::size_t i = 0; i < ev.size(); ++i) {
        CHECK(ev[i].from == reference[i].from);
        CHECK(ev[i].to == reference[i].to);
      }
    }
  }

  TEST_CASE("time statistics by hand") {
    const std::vector<TransferEvent> one = {event(11, PeriodBin::H06_08)};
    auto s = transfer_time_stats(one);
    REQUIRE(s.rows.size() == 2);
    CHECK(s.rows[0].mean_minutes == 11.0);
    CHECK(s.rows[0].stddev_minutes == 0.0);
    CHECK_FALSE(s.rows[1].bin);

    const std::vector<TransferEvent> three = {event(5, PeriodBin::H12_14), event(10, PeriodBin::H12_14),
                                              event(15, PeriodBin::H12_14)};
    s = transfer_time_stats(three);
    CHECK(s.rows[0].mean_minutes == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(std::abs(s.rows[0].stddev_minutes - std::sqrt(50.0 / 3.0)) < 1e-9);
    CHECK(std::abs(transfer_time_stats(three, StdDevConvention::Sample).rows[0].stddev_minutes - 5.0) < 1e-9);

    const std::vector<TransferEvent> split = {event(9, PeriodBin::H06_08), event(9, PeriodBin::H06_08),
                                              event(19, PeriodBin::H08_10)};
    s = transfer_time_stats(split);
    REQUIRE(s.rows.size() == 3);
    CHECK(s.rows[0].bin == PeriodBin::H06_08);
    CHECK(s.rows[0].mean_minutes == 9.0);
    CHECK(s.rows[0].stddev_minutes == 0.0);
    CHECK(s.rows[0].n == 2);
    CHECK(s.rows[1].bin == PeriodBin::H08_10);
    CHECK(s.rows[1].mean_minutes == 19.0);
    CHECK(s.rows[1].n == 1);
    CHECK(s.rows[2].n == 3);

    CHECK(transfer_time_stats({}).rows.empty());
  }

  TEST_CASE("the ALL row is the weighted mean of the bins") {
    testing::Gen g{71};
    for (int round = 0; round < 200; ++round) {
      std::vector<TransferEvent> ev;
      const auto n = testing::pick(g, 1, 60);
      for (long long i = 0; i < n; ++i) {
        ev.push_back(event(testing::real(g, 0, 60), kAllBins[static_cast<std::size_t>(testing::pick(g, 0, 8))]));
      }
      const auto s = transfer_time_stats(ev);
      double weighted = 0;
      std::size_t total = 0;
      for (std::size_t i = 0; i + 1 < s.rows.size(); ++i) {
        weighted += s.rows[i].mean_minutes * static_cast<double>(s.rows[i].n);
        total += s.rows[i].n;
        CHECK(s.rows[i].n >= 1);
        CHECK(s.rows[i].stddev_minutes >= 0.0);
      }
      CHECK(total == s.rows.back().n);
      CHECK(std::abs(s.rows.back().mean_minutes - weighted / static_cast<double>(total)) < 1e-9);
    }
  }

  TEST_CASE("route shares") {
    std::vector<TransferEvent> ev;
    ev.push_back(event(1, PeriodBin::H06_08, "X"));
    for (int i = 0; i < 3; ++i) ev.push_back(event(1, PeriodBin::H06_08, "Y"));
    for (int i = 0; i < 16; ++i) ev.push_back(event(1, PeriodBin::H06_08, "Z"));
    const auto s = route_share(ev, Leg::To);
    REQUIRE(s.size() == 3);
    CHECK(s[0].route == "Z");
    CHECK(s[1].route == "Y");
    CHECK(s[1].percentage == doctest::Approx(15.0));
    CHECK(s[2].percentage == doctest::Approx(5.0));

    const std::vector<TransferEvent> single = {event(1, PeriodBin::H06_08, "392")};
    CHECK(route_share(single, Leg::To).at(0).percentage == 100.0);
    CHECK(route_share(single, Leg::From).at(0).route == "Luobao");
  }

  TEST_CASE("shares sum to 100 and ties sort by route") {
    testing::Gen g{73};
    for (int round = 0; round < 200; ++round) {
      std::vector<TransferEvent> ev;
      const auto n = testing::pick(g, 1, 300);
      for (long long i = 0; i < n; ++i) {
        ev.push_back(event(1, PeriodBin::H06_08, "R" + std::to_string(testing::pick(g, 0, 12))));
      }
      const auto s = route_share(ev, Leg::To);
      double sum = 0;
      for (std::size_t i = 0; i < s.size(); ++i) {
        sum += s[i].percentage;
        if (i > 0) {
          CHECK(s[i - 1].count >= s[i].count);
          if (s[i - 1].count == s[i].count) CHECK(s[i - 1].route < s[i].route);
        }
      }
      CHECK(std::abs(sum - 100.0) < 1e-9);
    }
  }

  TEST_CASE("relative volume") {
    std::vector<TransferEvent> ev;
    for (int i = 0; i < 50; ++i) ev.push_back(event(1, PeriodBin::H06_08, "A"));
    for (int i = 0; i < 25; ++i) ev.push_back(event(1, PeriodBin::H06_08, "B"));
    const auto r = relative_volume(ev, Leg::To);
    REQUIRE(r.size() == 2);
    CHECK(r[0].ratio == 1.0);
    CHECK(r[1].ratio == 0.5);

    const std::vector<TransferEvent> a(ev.begin(), ev.begin() + 50);
    CHECK(relative_volume(a, Leg::To, FixedBaseline{100}).at(0).ratio == 0.5);

    std::vector<TransferEvent> even;
    for (auto route : {"A", "B", "C"}) even.push_back(event(1, PeriodBin::H06_08, route));
    for (const auto& x : relative_volume(even, Leg::To)) CHECK(x.ratio == 1.0);

    CHECK(relative_volume({}, Leg::To).empty());
    CHECK_THROWS_AS(relative_volume(a, Leg::To, FixedBaseline{0}), std::invalid_argument);
  }
}

TEST_CASE("a second exit closes the first one's chance") {
  // Without the guard a wider window would hand the boarding to the first
  // exit and drop the second exit's event.
  const auto st = stations();
  const auto s = stream({hub_exit("2011-07-04 08:00:00"), hub_exit("2011-07-04 08:20:00"),
                         board("2011-07-04 08:25:00")});
  auto narrow = config();
  narrow.subway_to_bus_window = std::chrono::minutes{10};
  for (const auto& cfg : {narrow, config()}) {
    const auto ev = infer_subway_to_bus(s, cfg, st);
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].from.timestamp == at("2011-07-04 08:20:00"));
  }
}
