#include "iic/iic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace iic {

namespace {

// Grid points closer than this to an interval edge count as on it.
double EdgeSlack(double dt) { return 1e-9 * dt; }

}  // namespace

void KernelConfig::Validate() const {
  if (!(window > 0.0)) throw std::domain_error("kernel window L must be positive");
  if (!(dt > 0.0)) throw std::domain_error("grid step must be positive");
  if (!(c_pitch >= 0.0) || !(c_timeshift >= 0.0))
    throw std::domain_error("type weights must be non-negative");
}

double KernelConfig::WeightFor(TokenType type) const {
  switch (type) {
    case TokenType::kPitch: return c_pitch;
    case TokenType::kTimeshift: return c_timeshift;
    default: return 0.0;
  }
}

const char* MaskName(TokenMask mask) {
  switch (mask) {
    case TokenMask::kPitch: return "pitch";
    case TokenMask::kTimeshift: return "timeshift";
    case TokenMask::kBoth: return "both";
  }
  return "?";
}

KernelConfig WithMask(KernelConfig cfg, TokenMask mask) {
  if (mask == TokenMask::kPitch) cfg.c_timeshift = 0.0;
  if (mask == TokenMask::kTimeshift) cfg.c_pitch = 0.0;
  return cfg;
}

double KernelWeight(double t, TokenType type, const KernelConfig& cfg) {
  const double c = cfg.WeightFor(type);
  if (c == 0.0 || !(t > kCoincidenceTolerance) || !(t < 0.5 * cfg.window)) return 0.0;
  const double s = std::cos(std::numbers::pi * t / cfg.window);
  return c / cfg.window * s * s;
}

std::vector<LocalizedIc> LocalizeIcs(std::span<const Token> tokens,
                                     std::span<const double> ics, double origin) {
  if (tokens.size() != ics.size())
    throw std::invalid_argument("IC values must align with tokens");
  const auto times = LocalizeAll(tokens);
  std::vector<LocalizedIc> out(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i)
    out[i] = {times[i] - origin, tokens[i].type, ics[i]};
  // Localized times are non-decreasing for well-formed sequences; keep the
  // token order among equal times.
  std::stable_sort(out.begin(), out.end(),
                   [](const LocalizedIc& a, const LocalizedIc& b) { return a.time < b.time; });
  return out;
}

double IicAt(std::span<const LocalizedIc> events, double t,
             const KernelConfig& cfg) {
  const double reach = 0.5 * cfg.window;
  auto first = std::upper_bound(
      events.begin(), events.end(), t - reach,
      [](double v, const LocalizedIc& e) { return v < e.time; });
  double sum = 0.0;
  for (auto it = first; it != events.end() && it->time < t; ++it)
    sum += KernelWeight(t - it->time, it->type, cfg) * it->ic;
  return sum;
}

Curve IicOnGrid(std::span<const LocalizedIc> events, const KernelConfig& cfg,
                double t0, std::size_t n) {
  cfg.Validate();
  Curve c{t0, cfg.dt, std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) c.values[j] = IicAt(events, c.TimeAt(j), cfg);
  return c;
}

Curve IicCurve(const TokenSeq& seq, std::span<const double> ics,
               const KernelConfig& cfg, double t_end) {
  const auto events = LocalizeIcs(seq.tokens(), ics);
  return IicOnGrid(events, cfg, 0.0, GridPoints(t_end, cfg.dt));
}

double SegmentSurprisal(const Curve& curve, double t1, double t2) {
  const double slack = EdgeSlack(curve.dt);
  if (!(t1 < t2)) throw std::domain_error("segment must satisfy t1 < t2");
  if (curve.values.empty() ||
      t1 < curve.t0 - slack || t2 > curve.EndTime() + slack)
    throw std::domain_error("segment lies outside the curve");
  double sum = 0.0;
  for (std::size_t j = 0; j < curve.size(); ++j) {
    const double t = curve.TimeAt(j);
    if (t > t1 + slack && t <= t2 + slack) sum += std::abs(curve.values[j]);
  }
  return sum * curve.dt;
}

double IcDeviation(const Curve& target, const Curve& iic, double t_end) {
  const double slack = EdgeSlack(iic.dt);
  if (iic.values.empty() || target.values.empty())
    throw std::domain_error("IC deviation of an empty curve");
  if (t_end > iic.EndTime() + slack || t_end > target.EndTime() + slack)
    throw std::domain_error("t_end lies beyond the compared curves");
  const Curve* aligned = &target;
  Curve resampled;
  if (!target.SameGrid(iic) || target.size() < iic.size()) {
    resampled = Resample(target, iic.t0, iic.dt, iic.size());
    aligned = &resampled;
  }
  if (!aligned->SameGrid(iic) || aligned->size() < iic.size())
    throw std::logic_error("target and IIC grids differ after resampling");
  double sum = 0.0;
  for (std::size_t j = 1; j < iic.size(); ++j) {
    if (iic.TimeAt(j) > t_end + slack) break;
    sum += std::abs(aligned->values[j] - iic.values[j]);
  }
  return sum * iic.dt;
}

TypeWeights TypeWeightsFromMeans(double mean_ic_pitch, double mean_ic_timeshift) {
  if (!(mean_ic_pitch > 0.0) || !(mean_ic_timeshift > 0.0))
    throw std::domain_error("mean IC must be positive to normalise type weights");
  return {1.0 / mean_ic_pitch, 1.0 / mean_ic_timeshift, mean_ic_pitch,
          mean_ic_timeshift};
}

TypeWeights CalibrateTypeWeights(std::span<const TokenSeq> corpus,
                                 std::span<const std::vector<double>> ics) {
  if (corpus.empty()) throw std::invalid_argument("calibration corpus is empty");
  if (ics.size() != corpus.size()) throw std::invalid_argument("one IC vector per sequence expected");
  double sum_p = 0.0, sum_t = 0.0;
  std::size_t n_p = 0, n_t = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto& seq = corpus[s];
    if (ics[s].size() != seq.size()) throw std::invalid_argument("IC vector length mismatch");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (seq[i].type == TokenType::kPitch) {
        sum_p += ics[s][i];
        ++n_p;
      } else if (seq[i].type == TokenType::kTimeshift) {
        sum_t += ics[s][i];
        ++n_t;
      }
    }
  }
  if (n_p == 0 || n_t == 0) throw std::domain_error("calibration corpus has no notes");
  return TypeWeightsFromMeans(sum_p / static_cast<double>(n_p),
                              sum_t / static_cast<double>(n_t));
}

TypeWeights CalibrateTypeWeights(std::span<const TokenSeq> corpus,
                                 const CriticModel& model) {
  std::vector<std::vector<double>> ics;
  for (const auto& seq : corpus)
    ics.push_back(seq.empty() ? std::vector<double>{} : TokenIc(model, seq.ids()));
  return CalibrateTypeWeights(corpus, ics);
}

}  // namespace iic
