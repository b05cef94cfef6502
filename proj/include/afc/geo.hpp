#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace afc::geo {

// Planar coordinates in meters (already projected).
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

class RoutePolyline {
 public:
  // Throws std::invalid_argument with fewer than two points or with two
  // equal consecutive points.
  RoutePolyline(std::string route_id, std::vector<Point> points);

  const std::string& route_id() const { return route_id_; }
  std::span<const Point> points() const { return points_; }
  std::size_t segment_count() const { return points_.size() - 1; }
  double length() const;

 private:
  std::string route_id_;
  std::vector<Point> points_;
};

// Distance from p to the closed segment ab. A degenerate segment (a == b)
// is treated as the point a.
double point_segment_distance(Point p, Point a, Point b);

double distance_to_polyline(Point p, const RoutePolyline& route);

struct BufferOptions {
  double radius_m = 500.0;
  double cell_size_m = 50.0;
  unsigned threads = 1;
};

struct BufferResult {
  double radius_m = 0.0;
  double area_km2 = 0.0;
  double cell_size_m = 0.0;
  std::size_t covered_cells = 0;
};

// Area of the union of all points within radius of any route, by counting
// square cells over the routes' bounding box padded by the radius whose
// centers lie within the radius of some segment. Throws
// std::invalid_argument unless radius > 0 and cell_size <= radius / 2.
BufferResult buffer_area(std::span<const RoutePolyline> routes, const BufferOptions& options = {});

// Length (km) of route `a` within corridor_m of route `b`: `a` is cut into
// pieces of step_m (the last one shorter) and a piece counts in full when
// its midpoint is within the corridor. Throws std::invalid_argument unless
// corridor > 0 and 0 < step <= corridor.
double coincidence_length(const RoutePolyline& a, const RoutePolyline& b, double corridor_m = 100.0,
                          double step_m = 10.0);

// (length of a near b, length of b near a), km.
std::pair<double, double> coincidence(const RoutePolyline& a, const RoutePolyline& b,
                                      double corridor_m = 100.0, double step_m = 10.0);

// GeoJSON FeatureCollection of LineString features carrying a "route_id"
// property. Consecutive duplicate vertices are dropped. Throws
// std::runtime_error on malformed input.
std::vector<RoutePolyline> load_routes_geojson(std::string_view text);

// CSV with columns route_id, seq, x, y; vertices ordered by seq. Routes are
// returned in route_id order.
std::vector<RoutePolyline> load_routes_csv(std::string_view text);

}  // namespace afc::geo
