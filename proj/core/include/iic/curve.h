// Real-valued functions of time sampled on a uniform grid (nats/second).
#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace iic {

struct Curve {
  double t0 = 0.0;
  double dt = 0.1;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double TimeAt(std::size_t j) const { return t0 + static_cast<double>(j) * dt; }
  // Span covered by the grid, (size - 1) * dt.
  double Duration() const;
  double EndTime() const { return t0 + Duration(); }

  // Linear interpolation; held constant outside the grid.
  double ValueAt(double t) const;

  bool SameGrid(const Curve& other) const;

  friend bool operator==(const Curve&, const Curve&) = default;
};

// Number of grid points needed to cover [0, span] with step dt, both ends
// included.
std::size_t GridPoints(double span, double dt);

// Samples `curve` at t0 + j * dt for j < n by linear interpolation.
Curve Resample(const Curve& curve, double t0, double dt, std::size_t n);

// Header `time_seconds,value_nats_per_second`, one row per grid point, values
// at 9 significant digits.
std::string CurveToCsv(const Curve& curve);
// Grid step is recovered from the time column; a single row takes
// default_dt. Throws std::runtime_error on bad header, malformed rows or a
// non-uniform grid.
Curve CurveFromCsv(std::string_view text, double default_dt = 0.1);

}  // namespace iic
