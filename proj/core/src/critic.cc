#include "iic/critic.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace iic {

double CriticModel::Prob(std::span<const TokenId> prefix, TokenId next) const {
  const auto d = NextDist(prefix);
  return d.at(static_cast<std::size_t>(next));
}

std::vector<double> TokenIc(const CriticModel& model,
                            std::span<const TokenId> seq) {
  if (seq.empty()) throw std::invalid_argument("TokenIc: empty sequence");
  std::vector<double> ics(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i)
    ics[i] = -std::log(model.Prob(seq.first(i), seq[i]));
  return ics;
}

double Entropy(std::span<const double> dist) {
  double h = 0.0;
  for (double p : dist)
    if (p > 0.0) h -= p * std::log(p);
  return std::max(0.0, h);
}

namespace {

// Scaled log-probabilities s_i = (ln p_i - ln p_max) / r for the support.
struct Tempered {
  std::vector<double> scaled;  // -inf for zero entries
  double log_z = 0.0;          // log sum exp(scaled)
};

Tempered Temper(std::span<const double> dist, double r) {
  if (!(r > 0.0)) throw std::domain_error("temperature must be positive");
  double p_max = 0.0;
  for (double p : dist) p_max = std::max(p_max, p);
  if (!(p_max > 0.0)) throw std::invalid_argument("distribution has no mass");
  const double log_max = std::log(p_max);
  Tempered t;
  t.scaled.resize(dist.size());
  double z = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) {
      t.scaled[i] = (std::log(dist[i]) - log_max) / r;
      z += std::exp(t.scaled[i]);
    } else {
      t.scaled[i] = -std::numeric_limits<double>::infinity();
    }
  }
  t.log_z = std::log(z);
  return t;
}

}  // namespace

Distribution ApplyTemperature(std::span<const double> dist, double r) {
  if (r == 1.0) {
    if (!(r > 0.0)) throw std::domain_error("temperature must be positive");
    return Distribution(dist.begin(), dist.end());
  }
  const auto t = Temper(dist, r);
  Distribution out(dist.size(), 0.0);
  for (std::size_t i = 0; i < dist.size(); ++i)
    if (dist[i] > 0.0) out[i] = std::exp(t.scaled[i] - t.log_z);
  return out;
}

double TemperedEntropy(std::span<const double> dist, double r) {
  const auto t = Temper(dist, r);
  // H = log Z - sum_i q_i s_i
  double expect = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) {
      const double q = std::exp(t.scaled[i] - t.log_z);
      expect += q * t.scaled[i];
    }
  }
  return std::max(0.0, t.log_z - expect);
}

double TargetEntropy(double ic_star, double c_h, double h_max) {
  if (!(c_h > 0.0)) throw std::domain_error("C_H must be positive");
  return std::min(ic_star / c_h, h_max);
}

TemperatureMatch MatchEntropy(std::span<const double> dist, double h_target,
                              double tol) {
  if (!(tol > 0.0)) throw std::domain_error("tolerance must be positive");
  if (!(h_target >= 0.0)) throw std::domain_error("target entropy must be >= 0");

  const double h_one = TemperedEntropy(dist, 1.0);
  if (std::abs(h_one - h_target) <= tol) return {1.0, h_one, true};

  const double h_hi = TemperedEntropy(dist, kMaxTemperature);
  if (h_target > h_hi) return {kMaxTemperature, h_hi, false};
  const double h_lo = TemperedEntropy(dist, kMinTemperature);
  if (h_target < h_lo) return {kMinTemperature, h_lo, false};

  double lo = std::log(kMinTemperature);
  double hi = std::log(kMaxTemperature);
  TemperatureMatch best{kMaxTemperature, h_hi, false};
  double best_err = std::abs(h_hi - h_target);
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    const double mid = 0.5 * (lo + hi);
    const double r = std::exp(mid);
    const double h = TemperedEntropy(dist, r);
    const double err = std::abs(h - h_target);
    if (err < best_err) {
      best = {r, h, err <= tol};
      best_err = err;
    }
    if (err <= tol) return {r, h, true};
    if (h < h_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return best;
}

}  // namespace iic
