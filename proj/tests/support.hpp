#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

#include "afc/civil_time.hpp"
#include "afc/records.hpp"

namespace testing {

inline afc::DateTime at(std::string_view text) {
  const auto t = afc::parse_datetime(text);
  if (!t) throw std::invalid_argument("bad fixture time " + std::string(text));
  return *t;
}

inline afc::Date day(std::string_view text) {
  const auto d = afc::parse_date(text);
  if (!d) throw std::invalid_argument("bad fixture date " + std::string(text));
  return *d;
}

inline afc::CardRecord rec(std::string card, afc::TxnType type, std::string device,
                           std::string_view time, std::optional<std::string> line = {}) {
  return afc::CardRecord{std::move(card), type, std::move(device), at(time), std::move(line)};
}

using Gen = std::mt19937_64;

inline long long pick(Gen& g, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(g);
}

inline double real(Gen& g, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(g);
}

}  // namespace testing
