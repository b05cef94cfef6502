#include <doctest.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using afc::cli::run;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "afc");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), in, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spill(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Data lines of a CSV table, without metadata and header.
std::vector<std::string> rows(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream s(csv);
  std::string line;
  bool header = false;
  while (std::getline(s, line)) {
    if (line.starts_with("#")) continue;
    if (!header) {
      header = true;
      continue;
    }
    out.push_back(line);
  }
  return out;
}

std::string header(const std::string& csv) {
  std::istringstream s(csv);
  std::string line;
  while (std::getline(s, line)) {
    if (!line.starts_with("#")) return line;
  }
  return {};
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("afc_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

const char* kRecords =
    "ID,type,DeviceID,strTime,Busline\n"
    "c1,31,B1,2011-04-11 07:10:00,392\n"
    "c2,31,B1,2011-04-11 08:30:00,392\n"
    "c3,21,G1,2011-04-11 08:31:00,\n"
    "c1,31,B2,2011-04-12 18:00:00,43\n";

const char* kStations =
    "DeviceID,Station,Mode,Line\n"
    "G1,ZZL,Subway,Luobao\n"
    "G2,XMH,Subway,Luobao\n"
    "B1,S392,Bus,392\n"
    "B2,S43,Bus,43\n";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("daily flow") {
    TempDir dir;
    spill(dir / "r.csv", kRecords);
    const auto r = call({"flow", "--input", dir / "r.csv", "--granularity", "daily", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir.path / "daily_flow.csv");
    CHECK(csv.starts_with("# command: flow\n"));
    CHECK(csv.find("# granularity: daily\n") != std::string::npos);
    CHECK(header(csv) == "date,weekday,count");
    CHECK(rows(csv) == std::vector<std::string>{"2011-04-11,Mon,2", "2011-04-12,Tue,1"});
  }

  TEST_CASE("records from stdin, tables to stdout") {
    const auto r = call({"flow", "--input", "-", "--out-dir", "-"}, kRecords);
    REQUIRE(r.code == 0);
    CHECK(r.out.starts_with("## daily_flow\n# command: flow\n"));
  }

  TEST_CASE("transfers on empty records give headered tables") {
    TempDir dir;
    spill(dir / "r.csv", "ID,type,DeviceID,strTime,Busline\n");
    spill(dir / "s.csv", kStations);
    const auto r = call({"transfers", "--mode", "subway-to-bus", "--hub", "ZZL", "--input", dir / "r.csv",
                         "--stations", dir / "s.csv", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir.path / "transfers.csv");
    CHECK(header(csv) ==
          "card_id,mode,from_time,to_time,from_device,to_device,from_route,to_route,gap_minutes,period");
    CHECK(rows(csv).empty());
    CHECK(rows(slurp(dir.path / "route_share_to.csv")).empty());
  }

  TEST_CASE("transfer stats columns") {
    TempDir dir;
    spill(dir / "r.csv",
          "ID,type,DeviceID,strTime,Busline\n"
          "c1,22,G1,2011-04-11 07:00:00,\n"
          "c1,31,B1,2011-04-11 07:10:00,392\n"
          "c2,22,G1,2011-04-11 07:30:00,\n"
          "c2,31,B2,2011-04-11 07:50:00,43\n");
    spill(dir / "s.csv", kStations);
    const auto r = call({"transfer-stats", "--hub", "ZZL", "--input", dir / "r.csv", "--stations", dir / "s.csv",
                         "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto csv = slurp(dir.path / "transfer_time_stats.csv");
    CHECK(header(csv) == "period,average_minutes,stddev_minutes");
    const auto lines = rows(csv);
    REQUIRE(!lines.empty());
    CHECK(lines.back() == "ALL,15.000000,5.000000");
  }

  TEST_CASE("synthetic records feed transfer inference") {
    TempDir dir;
    auto r = call({"synth", "--demo", "--cards", "300", "--days", "7", "--out", dir / "r.csv", "--stations-out",
                   dir / "s.csv", "--truth-out", dir / "t.csv"});
    REQUIRE(r.code == 0);
    r = call({"transfers", "--hub", "ZZL", "--secondary-line", "Luobao", "--input", dir / "r.csv", "--stations",
              dir / "s.csv", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto truth = rows(slurp(dir.path / "t.csv"));
    const auto found = rows(slurp(dir.path / "transfers.csv"));
    CHECK(truth.size() > 100);
    CHECK(found.size() == truth.size());
  }

  TEST_CASE("exit codes") {
    TempDir dir;
    spill(dir / "r.csv", kRecords);
    CHECK(call({"flow", "--input", dir / "missing.csv"}).code == afc::cli::kExitMissingFile);
    CHECK(call({"flow", "--input", dir / "r.csv", "--bogus"}).code == afc::cli::kExitBadConfig);
    CHECK(call({"flow", "--input", dir / "r.csv", "--granularity", "hourly"}).code == afc::cli::kExitBadConfig);
    CHECK(call({}).code == afc::cli::kExitBadConfig);
    CHECK(call({"--help"}).code == afc::cli::kExitOk);
    CHECK(call({"--config", dir / "none.toml", "flow", "--input", dir / "r.csv"}).code == afc::cli::kExitMissingFile);
    spill(dir / "bad.toml", "[flow\n");
    CHECK(call({"--config", dir / "bad.toml", "flow", "--input", dir / "r.csv"}).code == afc::cli::kExitBadConfig);
    spill(dir / "bad_stations.csv", "DeviceID,Station,Mode,Line\nG1,ZZL,Tram,L\n");
    CHECK(call({"quality", "--input", dir / "r.csv", "--stations", dir / "bad_stations.csv", "--out-dir",
                dir.path.string()})
              .code == afc::cli::kExitBadConfig);
    spill(dir / "bad_spec.json", R"({"network": {"stations": []}})");
    CHECK(call({"synth", "--spec", dir / "bad_spec.json", "--out", dir / "x.csv"}).code == afc::cli::kExitBadConfig);
  }

  TEST_CASE("config file supplies defaults") {
    TempDir dir;
    spill(dir / "r.csv", kRecords);
    spill(dir / "c.toml", "[flow]\ngranularity = \"bin\"\n");
    const auto r = call({"--config", dir / "c.toml", "flow", "--input", dir / "r.csv", "--out-dir", dir.path.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir.path / "bin_flow.csv"));
    CHECK(!fs::exists(dir.path / "daily_flow.csv"));
  }

  TEST_CASE("config path from the environment") {
    TempDir dir;
    spill(dir / "r.csv", kRecords);
    spill(dir / "c.toml", "[flow]\ngranularity = \"bin\"\n");
    ::setenv("AFC_CONFIG", (dir / "c.toml").c_str(), 1);
    const auto r = call({"flow", "--input", dir / "r.csv", "--out-dir", dir.path.string()});
    ::unsetenv("AFC_CONFIG");
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir.path / "bin_flow.csv"));
  }

  TEST_CASE("json output") {
    TempDir dir;
    spill(dir / "r.csv", kRecords);
    REQUIRE(call({"flow", "--input", dir / "r.csv", "--format", "json", "--out-dir", dir.path.string()}).code == 0);
    const auto j = nlohmann::json::parse(slurp(dir.path / "daily_flow.json"));
    CHECK(j["command"] == "flow");
    CHECK(j["table"] == "daily_flow");
    CHECK(j["columns"] == nlohmann::json::array({"date", "weekday", "count"}));
    REQUIRE(j["rows"].size() == 2);
    CHECK(j["rows"][0]["count"] == 2);
    CHECK(j["parameters"]["granularity"] == "daily");
  }

  TEST_CASE("repeat runs and thread counts give identical files") {
    TempDir dir;
    REQUIRE(call({"synth", "--demo", "--cards", "200", "--days", "21", "--out", dir / "r.csv", "--stations-out",
                  dir / "s.csv"})
                .code == 0);
    std::map<std::string, std::string> first;
    for (const char* threads : {"1", "1", "4"}) {
      const auto out = dir.path / (std::string("run") + threads + std::to_string(first.size()));
      fs::create_directories(out);
      REQUIRE(call({"report", "--input", dir / "r.csv", "--stations", dir / "s.csv", "--hub", "ZZL",
                    "--secondary-line", "Luobao", "--threads", threads, "--out-dir", out.string()})
                  .code == 0);
      std::map<std::string, std::string> files;
      for (const auto& e : fs::directory_iterator(out)) files[e.path().filename().string()] = slurp(e.path());
      if (first.empty()) {
        first = files;
        CHECK(files.size() > 10);
      } else {
        CHECK(files == first);
      }
    }
  }
}
