#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "afc/civil_time.hpp"

namespace afc {

// Wire codes are the enumerator values.
enum class TxnType : std::uint8_t {
  SubwayEntry = 21,
  SubwayExit = 22,
  BusBoard = 31,
};

inline int wire_code(TxnType t) { return static_cast<int>(t); }
std::optional<TxnType> txn_from_code(std::string_view code);
inline bool is_subway(TxnType t) { return t != TxnType::BusBoard; }

struct CardRecord {
  std::string card_id;
  TxnType txn_type = TxnType::BusBoard;
  std::string device_id;
  DateTime timestamp{};
  // Bus route for boardings; metro line for subway swipes when the feed has it.
  std::optional<std::string> line_id;

  friend bool operator==(const CardRecord&, const CardRecord&) = default;
};

// Total order used everywhere records are sorted: card, time, wire code,
// device, then line so that the order never depends on input order.
bool record_less(const CardRecord& a, const CardRecord& b);

enum class ParseErrorKind {
  UnknownTxnCode,
  BadTimestamp,
  MissingField,
};

std::string_view to_string(ParseErrorKind kind);

struct ParseError {
  std::size_t line = 0;  // 1-based line number in the input text
  ParseErrorKind kind = ParseErrorKind::MissingField;
  std::string reason;
};

struct ParseResult {
  std::vector<CardRecord> records;
  std::vector<ParseError> errors;
  std::size_t data_lines = 0;
};

// Parses AFC swipe CSV. The first non-blank line is the header; columns
// ID, type, DeviceID, strTime and Busline may appear in any order and other
// columns are ignored. Blank lines are skipped and are not data lines.
// Every data line yields exactly one record or one error. Never throws on
// content. With threads > 1 the text is split at line boundaries and the
// per-chunk results are concatenated in order.
ParseResult parse_records(std::string_view text, unsigned threads = 1);

// Inverse of parse_records for records whose fields contain no commas or
// line breaks.
std::string format_records(std::span<const CardRecord> records);

struct DedupResult {
  std::vector<CardRecord> records;
  std::size_t removed = 0;
};

// Drops exact duplicates (all five fields equal), keeping first occurrences
// in input order.
DedupResult deduplicate(std::vector<CardRecord> records);

enum class Mode { Subway, Bus };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view text);

struct StationInfo {
  std::string station_id;
  Mode mode = Mode::Subway;
  std::string line_id;
};

class StationTable {
 public:
  // Throws std::invalid_argument if device_id is already mapped.
  void add(std::string device_id, StationInfo info);

  const StationInfo* find(std::string_view device_id) const;
  std::vector<std::string> devices_at(std::string_view station_id) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, StationInfo, std::less<>>& entries() const { return entries_; }

 private:
  std::map<std::string, StationInfo, std::less<>> entries_;
};

// CSV with header DeviceID, Station, Mode, Line (any order). Malformed rows
// are configuration errors and throw std::runtime_error naming the line.
StationTable parse_station_table(std::string_view text);
std::string format_station_table(const StationTable& table);

// Station of the swiping device, or nullopt when the device is unknown
// (the record itself stays usable).
std::optional<std::string> resolve_station(const CardRecord& record, const StationTable& table);

// The record's own line_id, else the line of its device in the table.
std::optional<std::string> resolve_line(const CardRecord& record, const StationTable& table);

struct CardStream {
  std::string card_id;
  std::vector<CardRecord> records;  // sorted by record_less
};

// One stream per distinct card, streams ordered by card_id.
std::vector<CardStream> partition_by_card(std::vector<CardRecord> records);

}  // namespace afc
