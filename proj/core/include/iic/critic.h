// Autoregressive next-token models and the distribution utilities used to
// score (information content) and steer (temperature) them.
#pragma once

#include <span>
#include <string>
#include <vector>

#include "iic/tokenizer.h"

namespace iic {

// Probabilities over a model's full vocabulary.
using Distribution = std::vector<double>;

class CriticModel {
 public:
  virtual ~CriticModel() = default;

  virtual int vocab_size() const = 0;

  // p(. | prefix). Deterministic for a given prefix.
  virtual Distribution NextDist(std::span<const TokenId> prefix) const = 0;

  // p(next | prefix); override when a single entry is cheaper than NextDist.
  virtual double Prob(std::span<const TokenId> prefix, TokenId next) const;

  // Stable content identifier (recorded in run manifests).
  virtual std::string Identifier() const = 0;
};

// IC_i = -ln p(x_i | x_<i) in nats, one value per token.
// Throws std::invalid_argument for an empty sequence.
std::vector<double> TokenIc(const CriticModel& model,
                            std::span<const TokenId> seq);

// Shannon entropy in nats. Zero entries contribute nothing.
double Entropy(std::span<const double> dist);

// softmax(ln p / r). Zero-probability entries stay at zero.
// Throws std::domain_error for r <= 0.
Distribution ApplyTemperature(std::span<const double> dist, double r);

// Entropy of ApplyTemperature(dist, r), computed without materialising the
// tempered distribution.
double TemperedEntropy(std::span<const double> dist, double r);

// min(ic_star / c_h, h_max).
double TargetEntropy(double ic_star, double c_h, double h_max);

inline constexpr double kMinTemperature = 1e-3;
inline constexpr double kMaxTemperature = 1e3;
inline constexpr double kEntropyTolerance = 1e-3;
inline constexpr int kMaxBisectionSteps = 60;

struct TemperatureMatch {
  double temperature = 1.0;
  double entropy = 0.0;
  // False when the target lies outside the entropies reachable on
  // [kMinTemperature, kMaxTemperature]; temperature is then the bound.
  bool reached = true;
};

// Bisection (in log r) for r with |H(ApplyTemperature(d, r)) - h_target| <= tol.
TemperatureMatch MatchEntropy(std::span<const double> dist, double h_target,
                              double tol = kEntropyTolerance);

}  // namespace iic
