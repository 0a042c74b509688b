// Target curves: canonical shapes and IIC curves taken from real music.
#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iic/critic.h"
#include "iic/curve.h"
#include "iic/iic.h"
#include "iic/midi_io.h"

namespace iic {

enum class ShapeKind { kConstant, kRampUp, kRampDown, kStepUp, kStepDown };

const char* ShapeName(ShapeKind kind);
// Accepts CONSTANT / RAMP_UP / ... in any case, with '-' or '_'.
std::optional<ShapeKind> ParseShapeKind(std::string_view name);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::kConstant;
  double low = 0.0;
  double high = 1.0;
  double duration = 10.0;
  double step_fraction = 0.5;

  // Throws std::domain_error unless low <= high, duration > 0 and
  // 0 < step_fraction < 1.
  void Validate() const;
};

// Grid 0, dt, ..., duration. Steps are right-continuous at
// step_fraction * duration.
Curve MakeShape(const ShapeSpec& spec, double dt);

// IIC of the window [t_start, t_end] of a piece, re-based so t_start maps to
// 0. ICs are computed on the whole piece so every token sees its full
// context. Throws std::domain_error for an empty window or one outside the
// piece.
Curve ExtractCurve(const NoteList& notes, const CriticModel& model,
                   const KernelConfig& cfg, double t_start, double t_end);

// Time at which the last note of the piece ends.
double PieceEnd(const NoteList& notes);

struct Levels {
  double low = 0.0;
  double high = 0.0;
  double p90 = 0.0;
  std::size_t samples = 0;
  // Fewer than kMinLevelSamples pooled grid values.
  bool unstable = false;
};

inline constexpr std::size_t kMinLevelSamples = 100;

// Linear-interpolated percentile (q in [0, 100]) of unsorted values.
double Percentile(std::vector<double> values, double q);

// 25th / 75th (and 90th) percentiles of the given IIC values.
Levels LevelsFromValues(std::span<const double> values);

// Pools each piece's IIC grid values over [0, end of its last note].
Levels DefaultLevels(std::span<const TokenSeq> corpus, const CriticModel& model,
                     const KernelConfig& cfg);
Levels DefaultLevels(std::span<const TokenSeq> corpus,
                     std::span<const std::vector<double>> ics, const KernelConfig& cfg);

}  // namespace iic
