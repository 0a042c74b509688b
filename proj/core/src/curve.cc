#include "iic/curve.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

namespace iic {

double Curve::Duration() const {
  return values.empty() ? 0.0 : static_cast<double>(values.size() - 1) * dt;
}

double Curve::ValueAt(double t) const {
  if (values.empty()) return 0.0;
  const double x = (t - t0) / dt;
  if (x <= 0.0) return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (x >= last) return values.back();
  const auto j = static_cast<std::size_t>(std::floor(x));
  const double frac = x - static_cast<double>(j);
  if (frac == 0.0) return values[j];
  return values[j] + frac * (values[j + 1] - values[j]);
}

bool Curve::SameGrid(const Curve& other) const {
  return t0 == other.t0 && dt == other.dt;
}

std::size_t GridPoints(double span, double dt) {
  if (!(dt > 0.0)) throw std::domain_error("grid step must be positive");
  if (!(span >= 0.0)) throw std::domain_error("grid span must be non-negative");
  return static_cast<std::size_t>(std::llround(span / dt)) + 1;
}

Curve Resample(const Curve& curve, double t0, double dt, std::size_t n) {
  Curve out{t0, dt, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) out.values[j] = curve.ValueAt(out.TimeAt(j));
  return out;
}

namespace {

constexpr std::string_view kHeader = "time_seconds,value_nats_per_second";

double ParseDouble(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  // strtod rather than from_chars: libstdc++ 11 lacks floating from_chars.
  std::string buf(s);
  char* end = nullptr;
  const double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || !std::isfinite(v))
    throw std::runtime_error("curve CSV: bad number on line " + std::to_string(line));
  return v;
}

}  // namespace

std::string CurveToCsv(const Curve& curve) {
  std::string out(kHeader);
  out += '\n';
  char buf[64];
  for (std::size_t j = 0; j < curve.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", curve.TimeAt(j), curve.values[j]);
    out += buf;
  }
  return out;
}

Curve CurveFromCsv(std::string_view text, double default_dt) {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (!header_seen) {
      if (line != kHeader)
        throw std::runtime_error("curve CSV: expected header '" + std::string(kHeader) + "'");
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw std::runtime_error("curve CSV: missing column on line " + std::to_string(line_no));
    times.push_back(ParseDouble(line.substr(0, comma), line_no));
    values.push_back(ParseDouble(line.substr(comma + 1), line_no));
  }
  if (!header_seen) throw std::runtime_error("curve CSV: empty input");
  if (values.empty()) throw std::runtime_error("curve CSV: no rows");

  Curve c;
  c.t0 = times.front();
  c.dt = default_dt;
  if (times.size() > 1)
    c.dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
  if (!(c.dt > 0.0)) throw std::runtime_error("curve CSV: times must increase");
  for (std::size_t j = 0; j < times.size(); ++j) {
    // Rows are printed at 9 significant digits.
    const double tol = 1e-8 * std::max(1.0, std::abs(times[j])) + 1e-6 * c.dt;
    if (std::abs(times[j] - c.TimeAt(j)) > tol)
      throw std::runtime_error("curve CSV: non-uniform time grid at row " +
                               std::to_string(j + 1));
  }
  c.values = std::move(values);
  return c;
}

}  // namespace iic
