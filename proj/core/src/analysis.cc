#include "iic/analysis.h"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <stdexcept>

#include "iic/tokenizer.h"

namespace iic {

int FifthsIndex(int pitch_class) { return (7 * (((pitch_class % 12) + 12) % 12)) % 12; }

SpiralPoint SpiralPosition(int k, const SpiralConfig& cfg) {
  const double angle = k * std::numbers::pi / 2.0;
  return {cfg.radius * std::sin(angle), cfg.radius * std::cos(angle), k * cfg.height};
}

namespace {

double Distance(const SpiralPoint& a, const SpiralPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

double DiameterOf(std::span<const int> ks, const SpiralConfig& cfg) {
  double best = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i)
    for (std::size_t j = i + 1; j < ks.size(); ++j)
      best = std::max(best, Distance(SpiralPosition(ks[i], cfg), SpiralPosition(ks[j], cfg)));
  return best;
}

}  // namespace

double CloudDiameter(std::span<const int> pitch_classes, const SpiralConfig& cfg) {
  std::vector<int> ks;
  for (int pc : pitch_classes) ks.push_back(FifthsIndex(pc));
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.size() < 2) return 0.0;

  const std::size_t n = ks.size();
  auto gap_after = [&](std::size_t i) {
    return i + 1 < n ? ks[i + 1] - ks[i] : ks[0] + 12 - ks[i];
  };
  int widest = 0;
  for (std::size_t i = 0; i < n; ++i) widest = std::max(widest, gap_after(i));

  double diameter = std::numeric_limits<double>::infinity();
  std::vector<int> unwrapped(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (gap_after(i) != widest) continue;
    // Start right after the widest gap and walk once around the circle.
    const std::size_t start = (i + 1) % n;
    for (std::size_t m = 0; m < n; ++m) {
      const std::size_t src = (start + m) % n;
      unwrapped[m] = ks[src] + (src < start ? 12 : 0);
    }
    diameter = std::min(diameter, DiameterOf(unwrapped, cfg));
  }
  return diameter;
}

int NoteDensity(const NoteList& notes, double center, double width) {
  if (!(width > 0.0)) throw std::domain_error("density window must be positive");
  const double lo = center - 0.5 * width;
  const double hi = center + 0.5 * width;
  return static_cast<int>(std::count_if(notes.begin(), notes.end(), [&](const NoteEvent& n) {
    return n.onset >= lo && n.onset < hi;
  }));
}

double IoiEntropy(std::span<const double> iois) {
  if (iois.empty()) throw std::invalid_argument("IOI entropy needs at least one IOI");
  std::map<double, int> hist;
  for (double v : iois) ++hist[v];
  if (hist.size() < 2) return 0.0;
  const double total = static_cast<double>(iois.size());
  double h = 0.0;
  for (const auto& [value, count] : hist) {
    const double p = count / total;
    h -= p * std::log(p);
  }
  return std::clamp(h / std::log(static_cast<double>(hist.size())), 0.0, 1.0);
}

std::optional<PearsonResult> Pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("Pearson: column sizes differ");
  const std::size_t n = x.size();
  if (n < 3) return std::nullopt;
  auto constant = [](std::span<const double> v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *lo == *hi;
  };
  if (constant(x) || constant(y)) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  PearsonResult out;
  out.n = n;
  out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double dof = static_cast<double>(n - 2);
  const double one_minus = 1.0 - out.r * out.r;
  if (one_minus <= 0.0) {
    out.p_value = 0.0;
  } else {
    const double t = std::abs(out.r) * std::sqrt(dof / one_minus);
    boost::math::students_t dist(dof);
    out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, t)));
  }
  return out;
}

std::vector<CorrelationPoint> CorrelationSeries(
    std::span<const std::vector<SegmentPair>> pieces, int n_max, Pooling pooling) {
  std::vector<CorrelationPoint> out;
  std::vector<double> xs, ys;
  for (int n = 1; n <= n_max; ++n) {
    CorrelationPoint point;
    point.n = n;
    if (pooling == Pooling::kPooled) {
      xs.clear();
      ys.clear();
      for (const auto& piece : pieces) {
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), piece.size());
        for (std::size_t i = 0; i < take; ++i) {
          xs.push_back(piece[i].metric);
          ys.push_back(piece[i].surprisal);
        }
      }
      point.pooled = xs.size();
      if (auto r = Pearson(xs, ys)) {
        point.r = r->r;
        point.p_value = r->p_value;
      }
    } else {
      double sum = 0.0;
      int defined = 0;
      for (const auto& piece : pieces) {
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(n), piece.size());
        xs.clear();
        ys.clear();
        for (std::size_t i = 0; i < take; ++i) {
          xs.push_back(piece[i].metric);
          ys.push_back(piece[i].surprisal);
        }
        point.pooled += take;
        if (auto r = Pearson(xs, ys)) {
          sum += r->r;
          ++defined;
        }
      }
      if (defined > 0) point.r = sum / defined;
    }
    out.push_back(point);
  }
  return out;
}

std::vector<OnsetSegment> OnsetSegments(const NoteList& notes, const Curve& iic,
                                        double width, const SpiralConfig& spiral) {
  if (!(width > 0.0)) throw std::domain_error("segment width must be positive");
  std::vector<OnsetSegment> out;
  const double curve_end = iic.EndTime();
  std::vector<int> classes;
  for (std::size_t i = 0; i < notes.size(); ++i) {
    if (i > 0 && notes[i].onset == notes[i - 1].onset) continue;
    const double center = notes[i].onset;
    const double lo = center - 0.5 * width;
    const double hi = center + 0.5 * width;
    const double t1 = std::max(lo, iic.t0);
    const double t2 = std::min(hi, curve_end);
    if (!(t2 > t1)) continue;
    classes.clear();
    for (const auto& n : notes)
      if (n.onset >= lo && n.onset < hi) classes.push_back(n.pitch % 12);
    OnsetSegment seg;
    seg.t1 = t1;
    seg.t2 = t2;
    seg.tension = CloudDiameter(classes, spiral);
    seg.density = NoteDensity(notes, center, width);
    seg.surprisal = SegmentSurprisal(iic, t1, t2);
    out.push_back(seg);
  }
  return out;
}

std::vector<SegmentRecord> MeasureSegments(const NoteList& notes,
                                           std::span<const MeasureBoundary> measures,
                                           const Curve& iic) {
  const int count = static_cast<int>(notes.size());
  for (std::size_t m = 0; m < measures.size(); ++m) {
    const auto& b = measures[m];
    if (b.first_note < 0 || b.last_note >= count || b.first_note > b.last_note)
      throw std::invalid_argument("measure " + std::to_string(b.measure_index) +
                                  " references notes outside the piece");
    if (m > 0 && b.first_note <= measures[m - 1].last_note)
      throw std::domain_error("measure boundaries are not monotone at measure " +
                              std::to_string(b.measure_index));
  }
  const auto& grid = QuantGrid::Timeshift();
  std::vector<SegmentRecord> out;
  for (std::size_t m = 0; m < measures.size(); ++m) {
    const auto& b = measures[m];
    const auto first = static_cast<std::size_t>(b.first_note);
    const auto last = static_cast<std::size_t>(b.last_note);
    double start = notes[first].onset;
    if (m > 0) {
      start = 0.5 * (notes[static_cast<std::size_t>(measures[m - 1].last_note)].onset + start);
    }
    double end = 0.0;
    if (m + 1 < measures.size()) {
      end = 0.5 * (notes[last].onset +
                   notes[static_cast<std::size_t>(measures[m + 1].first_note)].onset);
    } else {
      for (std::size_t i = first; i <= last; ++i)
        end = std::max(end, notes[i].onset + notes[i].duration);
    }
    const double t1 = std::max(start, iic.t0);
    const double t2 = std::min(end, iic.EndTime());
    if (!(t2 > t1)) continue;

    std::vector<double> iois;
    for (std::size_t i = first + 1; i <= last; ++i) {
      const double gap = notes[i].onset - notes[i - 1].onset;
      const int q = grid.Quantize(std::max(0.0, gap));
      if (q > 0) iois.push_back(grid[static_cast<std::size_t>(q)]);
    }
    SegmentRecord rec;
    rec.t1 = start;
    rec.t2 = end;
    rec.metric = iois.empty() ? 0.0 : IoiEntropy(iois);
    rec.surprisal = SegmentSurprisal(iic, t1, t2) / (end - start);
    out.push_back(rec);
  }
  return out;
}

std::map<std::string, std::vector<MeasureBoundary>> ParseMeasureAnnotations(
    std::string_view csv) {
  std::map<std::string, std::vector<MeasureBoundary>> out;
  std::size_t line_no = 0;
  bool header = true;
  while (!csv.empty()) {
    const auto nl = csv.find('\n');
    std::string line(csv.substr(0, nl));
    csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      if (line != "piece_id,measure_index,first_note_index,last_note_index")
        throw std::runtime_error("measure annotations: unexpected header");
      header = false;
      continue;
    }
    std::vector<std::string> cols;
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      cols.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (cols.size() != 4)
      throw std::runtime_error("measure annotations: expected 4 columns on line " +
                               std::to_string(line_no));
    MeasureBoundary b;
    try {
      b.measure_index = std::stoi(cols[1]);
      b.first_note = std::stoi(cols[2]);
      b.last_note = std::stoi(cols[3]);
    } catch (const std::exception&) {
      throw std::runtime_error("measure annotations: bad integer on line " +
                               std::to_string(line_no));
    }
    out[cols[0]].push_back(b);
  }
  for (auto& [piece, ms] : out)
    std::stable_sort(ms.begin(), ms.end(), [](const MeasureBoundary& a, const MeasureBoundary& b) {
      return a.measure_index < b.measure_index;
    });
  return out;
}

std::string ReportToCsv(std::span<const ReportRow> rows) {
  std::string out = "n,metric,token_mask,pearson_r,p_value\n";
  char buf[64];
  auto put = [&](const std::optional<double>& v) {
    if (!v) return std::string("NA");
    std::snprintf(buf, sizeof buf, "%.9g", *v);
    return std::string(buf);
  };
  for (const auto& row : rows) {
    out += std::to_string(row.n) + "," + row.metric + "," + MaskName(row.mask) + "," +
           put(row.r) + "," + put(row.p_value) + "\n";
  }
  return out;
}

}  // namespace iic
