#include "afc/geo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "afc/parallel.hpp"
#include "csv_util.hpp"

namespace afc::geo {

RoutePolyline::RoutePolyline(std::string route_id, std::vector<Point> points)
    : route_id_(std::move(route_id)), points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument(fmt::format("route '{}' needs at least two points", route_id_));
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i] == points_[i - 1]) {
      throw std::invalid_argument(
          fmt::format("route '{}' repeats vertex {} consecutively", route_id_, i));
    }
  }
}

double RoutePolyline::length() const {
  double total = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i) {
    total += std::hypot(points_[i].x - points_[i - 1].x, points_[i].y - points_[i - 1].y);
  }
  return total;
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double distance_to_polyline(Point p, const RoutePolyline& route) {
  const auto pts = route.points();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < pts.size(); ++i) {
    best = std::min(best, point_segment_distance(p, pts[i - 1], pts[i]));
  }
  return best;
}

BufferResult buffer_area(std::span<const RoutePolyline> routes, const BufferOptions& options) {
  const double r = options.radius_m;
  const double cell = options.cell_size_m;
  if (!(r > 0.0)) throw std::invalid_argument("buffer radius must be positive");
  if (!(cell > 0.0) || cell > r / 2.0) {
    throw std::invalid_argument("cell size must be positive and at most half the radius");
  }
  BufferResult result{r, 0.0, cell, 0};
  if (routes.empty()) return result;

  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  struct Segment {
    Point a, b;
  };
  std::vector<Segment> segments;
  for (const auto& route : routes) {
    const auto pts = route.points();
    for (const auto& p : pts) {
      min_x = std::min(min_x, p.x);
      min_y = std::min(min_y, p.y);
      max_x = std::max(max_x, p.x);
      max_y = std::max(max_y, p.y);
    }
    for (std::size_t i = 1; i < pts.size(); ++i) segments.push_back({pts[i - 1], pts[i]});
  }
  const double x0 = min_x - r;
  const double y0 = min_y - r;
  const auto nx = static_cast<std::size_t>(std::ceil((max_x + r - x0) / cell));
  const auto ny = static_cast<std::size_t>(std::ceil((max_y + r - y0) / cell));

  // Cell (i, j) has center (x0 + (i + 0.5) cell, y0 + (j + 0.5) cell). Rows
  // are split into bands; each band owns its rows of the bitmap.
  auto first_index = [cell](double lo, double origin) {
    return static_cast<std::ptrdiff_t>(std::floor((lo - origin) / cell - 0.5));
  };
  std::vector<std::uint8_t> covered(nx * ny, 0);
  std::vector<std::size_t> band_counts(chunk_count(ny, options.threads), 0);
  parallel_chunks(ny, options.threads, [&](std::size_t band, std::size_t row_begin, std::size_t row_end) {
    std::size_t count = 0;
    for (const auto& s : segments) {
      const auto j_lo = std::max<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(row_begin),
                                                 first_index(std::min(s.a.y, s.b.y) - r, y0));
      const auto j_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(row_end) - 1,
                                                 first_index(std::max(s.a.y, s.b.y) + r, y0) + 1);
      const auto i_lo = std::max<std::ptrdiff_t>(0, first_index(std::min(s.a.x, s.b.x) - r, x0));
      const auto i_hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nx) - 1,
                                                 first_index(std::max(s.a.x, s.b.x) + r, x0) + 1);
      for (auto j = j_lo; j <= j_hi; ++j) {
        const double cy = y0 + (static_cast<double>(j) + 0.5) * cell;
        auto* row = covered.data() + static_cast<std::size_t>(j) * nx;
        for (auto i = i_lo; i <= i_hi; ++i) {
          if (row[i]) continue;
          const double cx = x0 + (static_cast<double>(i) + 0.5) * cell;
          if (point_segment_distance({cx, cy}, s.a, s.b) <= r) {
            row[i] = 1;
            ++count;
          }
        }
      }
    }
    band_counts[band] = count;
  });
  for (auto c : band_counts) result.covered_cells += c;
  result.area_km2 = static_cast<double>(result.covered_cells) * cell * cell / 1e6;
  return result;
}

double coincidence_length(const RoutePolyline& a, const RoutePolyline& b, double corridor_m,
                          double step_m) {
  if (!(corridor_m > 0.0)) throw std::invalid_argument("corridor must be positive");
  if (!(step_m > 0.0) || step_m > corridor_m) {
    throw std::invalid_argument("step must be positive and at most the corridor");
  }
  const auto pts = a.points();
  std::vector<double> cumulative(pts.size(), 0.0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    cumulative[i] = cumulative[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
  }
  const double total = cumulative.back();
  const auto pieces = static_cast<std::size_t>(std::ceil(total / step_m - 1e-9));

  double near = 0.0;
  std::size_t seg = 1;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double s0 = static_cast<double>(k) * step_m;
    const double s1 = std::min(total, s0 + step_m);
    const double mid = 0.5 * (s0 + s1);
    while (seg + 1 < pts.size() && cumulative[seg] < mid) ++seg;
    const double seg_len = cumulative[seg] - cumulative[seg - 1];
    const double t = seg_len > 0.0 ? (mid - cumulative[seg - 1]) / seg_len : 0.0;
    const Point p{pts[seg - 1].x + t * (pts[seg].x - pts[seg - 1].x),
                  pts[seg - 1].y + t * (pts[seg].y - pts[seg - 1].y)};
    if (distance_to_polyline(p, b) <= corridor_m) near += s1 - s0;
  }
  return near / 1000.0;
}

std::pair<double, double> coincidence(const RoutePolyline& a, const RoutePolyline& b,
                                      double corridor_m, double step_m) {
  return {coincidence_length(a, b, corridor_m, step_m), coincidence_length(b, a, corridor_m, step_m)};
}

namespace {

std::vector<Point> without_repeats(std::vector<Point> pts) {
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  return pts;
}

double parse_double(std::string_view text, std::size_t line) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw std::runtime_error(fmt::format("routes line {}: bad number '{}'", line, text));
  }
  return value;
}

}  // namespace

std::vector<RoutePolyline> load_routes_geojson(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(fmt::format("routes GeoJSON: {}", e.what()));
  }
  std::vector<nlohmann::json> features;
  if (doc.value("type", "") == "FeatureCollection" && doc.contains("features") &&
      doc["features"].is_array()) {
    features.assign(doc["features"].begin(), doc["features"].end());
  } else if (doc.value("type", "") == "Feature") {
    features.push_back(doc);
  } else {
    throw std::runtime_error("routes GeoJSON: expected a Feature or FeatureCollection");
  }

  std::vector<RoutePolyline> routes;
  for (std::size_t f = 0; f < features.size(); ++f) {
    const auto& feature = features[f];
    const auto where = fmt::format("routes GeoJSON feature {}", f);
    if (!feature.contains("geometry") || !feature["geometry"].is_object() ||
        feature["geometry"].value("type", "") != "LineString") {
      throw std::runtime_error(where + ": geometry must be a LineString");
    }
    if (!feature.contains("properties") || !feature["properties"].contains("route_id")) {
      throw std::runtime_error(where + ": missing properties.route_id");
    }
    const auto& id = feature["properties"]["route_id"];
    std::string route_id = id.is_string() ? id.get<std::string>() : id.dump();
    std::vector<Point> pts;
    for (const auto& c : feature["geometry"]["coordinates"]) {
      if (!c.is_array() || c.size() < 2 || !c[0].is_number() || !c[1].is_number()) {
        throw std::runtime_error(where + ": malformed coordinate");
      }
      pts.push_back({c[0].get<double>(), c[1].get<double>()});
    }
    try {
      routes.emplace_back(std::move(route_id), without_repeats(std::move(pts)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(where + ": " + e.what());
    }
  }
  return routes;
}

std::vector<RoutePolyline> load_routes_csv(std::string_view text) {
  csv::LineReader reader{csv::strip_bom(text)};
  std::string_view line;
  std::vector<std::string_view> fields;
  std::size_t c_id = std::string_view::npos, c_seq = c_id, c_x = c_id, c_y = c_id;
  bool have_header = false;
  std::map<std::string, std::vector<std::pair<double, Point>>> vertices;
  while (reader.next(line)) {
    if (csv::is_blank(line)) continue;
    csv::split_fields(line, fields);
    if (!have_header) {
      c_id = csv::find_column(fields, "route_id");
      c_seq = csv::find_column(fields, "seq");
      c_x = csv::find_column(fields, "x");
      c_y = csv::find_column(fields, "y");
      if (c_id == std::string_view::npos || c_seq == std::string_view::npos ||
          c_x == std::string_view::npos || c_y == std::string_view::npos) {
        throw std::runtime_error("routes CSV header must name route_id, seq, x, y");
      }
      have_header = true;
      continue;
    }
    const auto where = reader.line_number();
    const std::size_t need = std::max({c_id, c_seq, c_x, c_y});
    if (fields.size() <= need || fields[c_id].empty()) {
      throw std::runtime_error(fmt::format("routes line {}: missing field", where));
    }
    vertices[std::string{fields[c_id]}].push_back(
        {parse_double(fields[c_seq], where),
         Point{parse_double(fields[c_x], where), parse_double(fields[c_y], where)}});
  }
  std::vector<RoutePolyline> routes;
  for (auto& [id, verts] : vertices) {
    std::stable_sort(verts.begin(), verts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Point> pts;
    for (const auto& [seq, p] : verts) pts.push_back(p);
    try {
      routes.emplace_back(id, without_repeats(std::move(pts)));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(fmt::format("routes CSV: {}", e.what()));
    }
  }
  return routes;
}

}  // namespace afc::geo
