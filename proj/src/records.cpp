#include "afc/records.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

#include <fmt/format.h>

#include "afc/parallel.hpp"
#include "csv_util.hpp"

namespace afc {

std::optional<TxnType> txn_from_code(std::string_view code) {
  if (code == "21") return TxnType::SubwayEntry;
  if (code == "22") return TxnType::SubwayExit;
  if (code == "31") return TxnType::BusBoard;
  return std::nullopt;
}

bool record_less(const CardRecord& a, const CardRecord& b) {
  return std::tie(a.card_id, a.timestamp, a.txn_type, a.device_id, a.line_id) <
         std::tie(b.card_id, b.timestamp, b.txn_type, b.device_id, b.line_id);
}

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::UnknownTxnCode:
      return "unknown_txn_code";
    case ParseErrorKind::BadTimestamp:
      return "bad_timestamp";
    case ParseErrorKind::MissingField:
      return "missing_field";
  }
  return "unknown";
}

namespace {

struct Columns {
  std::size_t id = std::string_view::npos;
  std::size_t type = std::string_view::npos;
  std::size_t device = std::string_view::npos;
  std::size_t time = std::string_view::npos;
  std::size_t line = std::string_view::npos;
};

std::string_view field_at(const std::vector<std::string_view>& fields, std::size_t index) {
  return index < fields.size() ? fields[index] : std::string_view{};
}

void parse_line(std::string_view line, std::size_t line_number, const Columns& cols,
                std::vector<std::string_view>& fields, ParseResult& out) {
  csv::split_fields(line, fields);
  auto fail = [&](ParseErrorKind kind, std::string reason) {
    out.errors.push_back(ParseError{line_number, kind, std::move(reason)});
  };

  const auto id = field_at(fields, cols.id);
  if (id.empty()) return fail(ParseErrorKind::MissingField, "missing ID");
  const auto code = field_at(fields, cols.type);
  if (code.empty()) return fail(ParseErrorKind::MissingField, "missing type");
  const auto txn = txn_from_code(code);
  if (!txn) return fail(ParseErrorKind::UnknownTxnCode, fmt::format("unknown type code '{}'", code));
  const auto device = field_at(fields, cols.device);
  if (device.empty()) return fail(ParseErrorKind::MissingField, "missing DeviceID");
  const auto time_text = field_at(fields, cols.time);
  if (time_text.empty()) return fail(ParseErrorKind::MissingField, "missing strTime");
  const auto time = parse_datetime(time_text);
  if (!time) {
    return fail(ParseErrorKind::BadTimestamp, fmt::format("unparseable strTime '{}'", time_text));
  }
  const auto line_id = field_at(fields, cols.line);
  if (line_id.empty() && *txn == TxnType::BusBoard) {
    return fail(ParseErrorKind::MissingField, "missing Busline on bus boarding");
  }

  CardRecord rec;
  rec.card_id.assign(id);
  rec.txn_type = *txn;
  rec.device_id.assign(device);
  rec.timestamp = *time;
  if (!line_id.empty()) rec.line_id.emplace(line_id);
  out.records.push_back(std::move(rec));
}

void parse_body(std::string_view body, std::size_t first_line_number, const Columns& cols,
                ParseResult& out) {
  csv::LineReader reader{body};
  std::vector<std::string_view> fields;
  std::string_view line;
  while (reader.next(line)) {
    if (csv::is_blank(line)) continue;
    ++out.data_lines;
    parse_line(line, first_line_number + reader.line_number() - 1, cols, fields, out);
  }
}

}  // namespace

ParseResult parse_records(std::string_view text, unsigned threads) {
  ParseResult result;
  csv::LineReader reader{csv::strip_bom(text)};
  std::string_view line;
  bool have_header = false;
  while (reader.next(line)) {
    if (!csv::is_blank(line)) {
      have_header = true;
      break;
    }
  }
  if (!have_header) return result;

  std::vector<std::string_view> header;
  csv::split_fields(line, header);
  Columns cols;
  cols.id = csv::find_column(header, "ID");
  cols.type = csv::find_column(header, "type");
  cols.device = csv::find_column(header, "DeviceID");
  cols.time = csv::find_column(header, "strTime");
  cols.line = csv::find_column(header, "Busline");

  const std::string_view body = csv::strip_bom(text).substr(
      std::min(reader.position(), csv::strip_bom(text).size()));
  const std::size_t body_first_line = reader.line_number() + 1;

  // Chunk boundaries fall just after a newline; each chunk's first line
  // number is the running newline count.
  std::vector<std::string_view> chunks;
  std::vector<std::size_t> chunk_first_line;
  const std::size_t target = chunk_count(body.size() / 4096 + 1, threads);
  std::size_t begin = 0;
  std::size_t line_no = body_first_line;
  for (std::size_t c = 0; c < target && begin < body.size(); ++c) {
    std::size_t end = c + 1 == target ? body.size() : begin + (body.size() - begin) / (target - c);
    if (end < body.size()) {
      const std::size_t nl = body.find('\n', end);
      end = nl == std::string_view::npos ? body.size() : nl + 1;
    }
    chunks.push_back(body.substr(begin, end - begin));
    chunk_first_line.push_back(line_no);
    line_no += static_cast<std::size_t>(std::count(body.begin() + static_cast<std::ptrdiff_t>(begin),
                                                   body.begin() + static_cast<std::ptrdiff_t>(end),
                                                   '\n'));
    begin = end;
  }

  std::vector<ParseResult> partial(chunks.size());
  parallel_chunks(chunks.size(), threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) parse_body(chunks[i], chunk_first_line[i], cols, partial[i]);
  });

  std::size_t total = 0;
  for (const auto& p : partial) total += p.records.size();
  result.records.reserve(total);
  for (auto& p : partial) {
    std::move(p.records.begin(), p.records.end(), std::back_inserter(result.records));
    std::move(p.errors.begin(), p.errors.end(), std::back_inserter(result.errors));
    result.data_lines += p.data_lines;
  }
  return result;
}

std::string format_records(std::span<const CardRecord> records) {
  std::string out = "ID,type,DeviceID,strTime,Busline\n";
  out.reserve(out.size() + records.size() * 56);
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{}\n", r.card_id, wire_code(r.txn_type),
                   r.device_id, format_datetime(r.timestamp), r.line_id.value_or(""));
  }
  return out;
}

namespace {

struct RecordHash {
  std::size_t operator()(const CardRecord& r) const {
    std::size_t h = std::hash<std::string>{}(r.card_id);
    auto mix = [&h](std::size_t v) { h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2); };
    mix(static_cast<std::size_t>(r.txn_type));
    mix(std::hash<std::string>{}(r.device_id));
    mix(std::hash<long long>{}(r.timestamp.time_since_epoch().count()));
    mix(r.line_id ? std::hash<std::string>{}(*r.line_id) : 0);
    return h;
  }
};

}  // namespace

DedupResult deduplicate(std::vector<CardRecord> records) {
  DedupResult out;
  std::unordered_set<CardRecord, RecordHash> seen;
  seen.reserve(records.size());
  out.records.reserve(records.size());
  for (auto& r : records) {
    if (seen.contains(r)) {
      ++out.removed;
      continue;
    }
    seen.insert(r);
    out.records.push_back(std::move(r));
  }
  return out;
}

std::string_view to_string(Mode mode) { return mode == Mode::Subway ? "Subway" : "Bus"; }

std::optional<Mode> mode_from_string(std::string_view text) {
  if (csv::iequals(text, "Subway") || csv::iequals(text, "Metro")) return Mode::Subway;
  if (csv::iequals(text, "Bus")) return Mode::Bus;
  return std::nullopt;
}

void StationTable::add(std::string device_id, StationInfo info) {
  if (entries_.contains(device_id)) {
    throw std::invalid_argument(fmt::format("duplicate device id '{}'", device_id));
  }
  entries_.emplace(std::move(device_id), std::move(info));
}

const StationInfo* StationTable::find(std::string_view device_id) const {
  const auto it = entries_.find(device_id);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> StationTable::devices_at(std::string_view station_id) const {
  std::vector<std::string> out;
  for (const auto& [device, info] : entries_) {
    if (info.station_id == station_id) out.push_back(device);
  }
  return out;
}

StationTable parse_station_table(std::string_view text) {
  StationTable table;
  csv::LineReader reader{csv::strip_bom(text)};
  std::string_view line;
  std::vector<std::string_view> fields;
  std::size_t dev = std::string_view::npos, st = dev, mode = dev, ln = dev;
  bool have_header = false;
  while (reader.next(line)) {
    if (csv::is_blank(line)) continue;
    csv::split_fields(line, fields);
    if (!have_header) {
      dev = csv::find_column(fields, "DeviceID");
      st = csv::find_column(fields, "Station");
      mode = csv::find_column(fields, "Mode");
      ln = csv::find_column(fields, "Line");
      if (dev == std::string_view::npos || st == std::string_view::npos ||
          mode == std::string_view::npos) {
        throw std::runtime_error("station table header must name DeviceID, Station and Mode");
      }
      have_header = true;
      continue;
    }
    const auto where = reader.line_number();
    const auto device = field_at(fields, dev);
    const auto station = field_at(fields, st);
    const auto mode_value = mode_from_string(field_at(fields, mode));
    if (device.empty() || station.empty() || !mode_value) {
      throw std::runtime_error(fmt::format("station table line {}: malformed row", where));
    }
    try {
      table.add(std::string{device},
                StationInfo{std::string{station}, *mode_value, std::string{field_at(fields, ln)}});
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("station table line {}: {}", where, e.what()));
    }
  }
  return table;
}

std::string format_station_table(const StationTable& table) {
  std::string out = "DeviceID,Station,Mode,Line\n";
  for (const auto& [device, info] : table.entries()) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{}\n", device, info.station_id,
                   to_string(info.mode), info.line_id);
  }
  return out;
}

std::optional<std::string> resolve_station(const CardRecord& record, const StationTable& table) {
  if (const auto* info = table.find(record.device_id)) return info->station_id;
  return std::nullopt;
}

std::optional<std::string> resolve_line(const CardRecord& record, const StationTable& table) {
  if (record.line_id) return record.line_id;
  if (const auto* info = table.find(record.device_id); info && !info->line_id.empty()) {
    return info->line_id;
  }
  return std::nullopt;
}

std::vector<CardStream> partition_by_card(std::vector<CardRecord> records) {
  std::sort(records.begin(), records.end(), record_less);
  std::vector<CardStream> streams;
  for (auto& r : records) {
    if (streams.empty() || streams.back().card_id != r.card_id) {
      streams.push_back(CardStream{r.card_id, {}});
    }
    streams.back().records.push_back(std::move(r));
  }
  return streams;
}

}  // namespace afc
