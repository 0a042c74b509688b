// Instantaneous information content: token ICs placed on the time axis and
// smoothed by a causal half-Hann kernel, plus the integrals built on it.
#pragma once

#include <span>
#include <vector>

#include "iic/critic.h"
#include "iic/curve.h"
#include "iic/tokenizer.h"

namespace iic {

struct KernelConfig {
  double window = 4.0;  // L; support is (0, L/2)
  double c_pitch = 1.0;
  double c_timeshift = 1.0;
  double dt = 0.1;

  // Throws std::domain_error unless window > 0, dt > 0 and weights >= 0.
  void Validate() const;
  double WeightFor(TokenType type) const;
};

// Which token types feed the kernel; the others get weight zero.
enum class TokenMask { kPitch, kTimeshift, kBoth };

const char* MaskName(TokenMask mask);
KernelConfig WithMask(KernelConfig cfg, TokenMask mask);

// Lags up to this many seconds count as t = 0, so an onset that falls on a
// sample time never contributes there whatever the rounding of either.
inline constexpr double kCoincidenceTolerance = 1e-9;

// c_type / L * cos^2(pi t / L) for 0 < t < L/2, else 0. Velocity and
// Duration tokens always weigh 0.
double KernelWeight(double t, TokenType type, const KernelConfig& cfg);

// A token's IC at the time it is perceived.
struct LocalizedIc {
  double time;
  TokenType type;
  double ic;
};

// Pairs tokens with their ICs; times are shifted by -origin. Sorted by time.
// Throws std::invalid_argument if the sizes differ.
std::vector<LocalizedIc> LocalizeIcs(std::span<const Token> tokens,
                                     std::span<const double> ics,
                                     double origin = 0.0);

// Sum over events strictly before t. `events` must be sorted by time.
double IicAt(std::span<const LocalizedIc> events, double t,
             const KernelConfig& cfg);

// IIC sampled at t0 + j * cfg.dt for j < n.
Curve IicOnGrid(std::span<const LocalizedIc> events, const KernelConfig& cfg,
                double t0, std::size_t n);

// IIC of a token sequence on [0, t_end] (grid includes both ends).
Curve IicCurve(const TokenSeq& seq, std::span<const double> ics,
               const KernelConfig& cfg, double t_end);

// Right Riemann sum of |curve| over the grid points in (t1, t2].
// Throws std::domain_error for t1 >= t2 or an interval outside the grid.
double SegmentSurprisal(const Curve& curve, double t1, double t2);

// Sum of |target - iic| * dt over iic's grid points in (iic.t0, t_end]. The
// target is linearly resampled onto iic's grid when the grids differ.
// Throws std::domain_error when t_end lies beyond either curve.
double IcDeviation(const Curve& target, const Curve& iic, double t_end);

struct TypeWeights {
  double c_pitch = 1.0;
  double c_timeshift = 1.0;
  double mean_ic_pitch = 1.0;
  double mean_ic_timeshift = 1.0;
};

// c_type = 1 / mean(IC of that type). Throws std::domain_error if a mean is
// not strictly positive.
TypeWeights TypeWeightsFromMeans(double mean_ic_pitch, double mean_ic_timeshift);

// Means are taken over every Pitch / Timeshift token of the corpus, each
// scored with its full preceding context.
TypeWeights CalibrateTypeWeights(std::span<const TokenSeq> corpus,
                                 const CriticModel& model);
// Same with precomputed ICs, one vector per sequence (e.g. held-out scores).
TypeWeights CalibrateTypeWeights(std::span<const TokenSeq> corpus,
                                 std::span<const std::vector<double>> ics);

}  // namespace iic
