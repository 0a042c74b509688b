#include "iic/curves.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace iic {

const char* ShapeName(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kConstant: return "CONSTANT";
    case ShapeKind::kRampUp: return "RAMP_UP";
    case ShapeKind::kRampDown: return "RAMP_DOWN";
    case ShapeKind::kStepUp: return "STEP_UP";
    case ShapeKind::kStepDown: return "STEP_DOWN";
  }
  return "?";
}

std::optional<ShapeKind> ParseShapeKind(std::string_view name) {
  std::string norm;
  for (char ch : name)
    norm += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (auto kind : {ShapeKind::kConstant, ShapeKind::kRampUp, ShapeKind::kRampDown,
                    ShapeKind::kStepUp, ShapeKind::kStepDown})
    if (norm == ShapeName(kind)) return kind;
  return std::nullopt;
}

void ShapeSpec::Validate() const {
  if (!(low <= high)) throw std::domain_error("shape needs low <= high");
  if (!(duration > 0.0)) throw std::domain_error("shape duration must be positive");
  if (!(step_fraction > 0.0 && step_fraction < 1.0))
    throw std::domain_error("step fraction must lie in (0, 1)");
}

Curve MakeShape(const ShapeSpec& spec, double dt) {
  spec.Validate();
  const std::size_t n = GridPoints(spec.duration, dt);
  Curve c{0.0, dt, std::vector<double>(n)};
  const double step_at = spec.step_fraction * spec.duration;
  const double slack = 1e-9 * dt;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = c.TimeAt(j);
    const double frac = std::clamp(t / spec.duration, 0.0, 1.0);
    const bool after_step = t >= step_at - slack;
    double v = 0.0;
    switch (spec.kind) {
      case ShapeKind::kConstant: v = 0.5 * (spec.low + spec.high); break;
      case ShapeKind::kRampUp: v = spec.low + (spec.high - spec.low) * frac; break;
      case ShapeKind::kRampDown: v = spec.high - (spec.high - spec.low) * frac; break;
      case ShapeKind::kStepUp: v = after_step ? spec.high : spec.low; break;
      case ShapeKind::kStepDown: v = after_step ? spec.low : spec.high; break;
    }
    c.values[j] = v;
  }
  return c;
}

double PieceEnd(const NoteList& notes) {
  double end = 0.0;
  for (const auto& n : notes) end = std::max(end, n.onset + n.duration);
  return end;
}

Curve ExtractCurve(const NoteList& notes, const CriticModel& model,
                   const KernelConfig& cfg, double t_start, double t_end) {
  cfg.Validate();
  if (!(t_end > t_start)) throw std::domain_error("extraction window is empty");
  const double slack = 1e-9;
  if (t_start < -slack || t_end > PieceEnd(notes) + slack)
    throw std::domain_error("extraction window lies outside the piece");
  const auto seq = Tokenize(notes);
  const std::size_t n = GridPoints(t_end - t_start, cfg.dt);
  if (seq.empty()) return Curve{0.0, cfg.dt, std::vector<double>(n, 0.0)};
  const auto ics = TokenIc(model, seq.ids());
  const auto events = LocalizeIcs(seq.tokens(), ics, t_start);
  return IicOnGrid(events, cfg, 0.0, n);
}

double Percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of no values");
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Levels LevelsFromValues(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  Levels out;
  out.samples = v.size();
  out.unstable = v.size() < kMinLevelSamples;
  if (v.empty()) return out;
  out.low = Percentile(v, 25.0);
  out.high = Percentile(v, 75.0);
  out.p90 = Percentile(v, 90.0);
  return out;
}

Levels DefaultLevels(std::span<const TokenSeq> corpus,
                     std::span<const std::vector<double>> ics, const KernelConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("level corpus is empty");
  if (ics.size() != corpus.size()) throw std::invalid_argument("one IC vector per sequence expected");
  std::vector<double> pooled;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    if (corpus[s].empty()) continue;
    const double end = PieceEnd(Detokenize(corpus[s]));
    const auto curve = IicCurve(corpus[s], ics[s], cfg, end);
    pooled.insert(pooled.end(), curve.values.begin(), curve.values.end());
  }
  return LevelsFromValues(pooled);
}

Levels DefaultLevels(std::span<const TokenSeq> corpus, const CriticModel& model,
                     const KernelConfig& cfg) {
  std::vector<std::vector<double>> ics;
  for (const auto& seq : corpus)
    ics.push_back(seq.empty() ? std::vector<double>{} : TokenIc(model, seq.ids()));
  return DefaultLevels(corpus, ics, cfg);
}

}  // namespace iic
