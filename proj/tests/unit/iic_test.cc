#include "iic/iic.h"

#include <gtest/gtest.h>

#include "iic/curve.h"
#include "support/oracles.h"

namespace iic {
namespace {

using testing::Rng;

KernelConfig Cfg(double c_pitch = 1.0, double c_timeshift = 1.0, double L = 4.0,
                 double dt = 0.1) {
  KernelConfig c;
  c.c_pitch = c_pitch;
  c.c_timeshift = c_timeshift;
  c.window = L;
  c.dt = dt;
  return c;
}

Curve Constant(double v, double duration, double dt = 0.1) {
  return Curve{0.0, dt, std::vector<double>(GridPoints(duration, dt), v)};
}

TEST(Kernel, Examples) {
  const auto cfg = Cfg();
  EXPECT_NEAR(KernelWeight(1.0, TokenType::kPitch, cfg), 0.125, 1e-15);
  EXPECT_EQ(KernelWeight(2.0, TokenType::kPitch, cfg), 0.0);
  EXPECT_EQ(KernelWeight(1.0, TokenType::kVelocity, cfg), 0.0);
  EXPECT_EQ(KernelWeight(1.0, TokenType::kDuration, cfg), 0.0);
  EXPECT_EQ(KernelWeight(0.0, TokenType::kPitch, cfg), 0.0);
  EXPECT_EQ(KernelWeight(-0.5, TokenType::kTimeshift, cfg), 0.0);
}

TEST(Kernel, MatchesOracleAndIntegratesToAQuarterOfC) {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const double c = rng.Uniform(0.0, 5.0), L = rng.Uniform(0.5, 8.0);
    const auto cfg = Cfg(c, c, L);
    for (int j = 0; j < 50; ++j) {
      const double t = rng.Uniform(-1.0, L);
      EXPECT_NEAR(KernelWeight(t, TokenType::kTimeshift, cfg), testing::OracleKernel(t, c, L), 1e-14);
    }
    const double area = testing::Simpson(
        [&](double t) { return KernelWeight(t, TokenType::kPitch, cfg); }, 1e-8, L / 2, 4000);
    EXPECT_NEAR(area, c / 4, 1e-6);
  }
}

TEST(Kernel, ConfigValidation) {
  EXPECT_THROW(Cfg(1, 1, 0.0).Validate(), std::domain_error);
  EXPECT_THROW(Cfg(1, 1, 4, 0.0).Validate(), std::domain_error);
  EXPECT_THROW(Cfg(-1, 1).Validate(), std::domain_error);
  EXPECT_NO_THROW(Cfg(0, 0).Validate());
}

TEST(Mask, SelectsTypes) {
  const auto cfg = Cfg(2, 3);
  EXPECT_EQ(WithMask(cfg, TokenMask::kPitch).c_timeshift, 0.0);
  EXPECT_EQ(WithMask(cfg, TokenMask::kPitch).c_pitch, 2.0);
  EXPECT_EQ(WithMask(cfg, TokenMask::kTimeshift).c_pitch, 0.0);
  EXPECT_EQ(WithMask(cfg, TokenMask::kBoth).c_timeshift, 3.0);
}

// One Pitch token with IC 2 at onset 0.5.
std::vector<LocalizedIc> SingleToken() { return {{0.5, TokenType::kPitch, 2.0}}; }

TEST(IicAtTest, SingleTokenExamples) {
  const auto cfg = Cfg();
  const auto ev = SingleToken();
  EXPECT_NEAR(IicAt(ev, 1.5, cfg), 0.25, 1e-15);
  EXPECT_EQ(IicAt(ev, 0.4, cfg), 0.0);
  EXPECT_EQ(IicAt(ev, 0.5, cfg), 0.0);
  EXPECT_EQ(IicAt(ev, 3.0, cfg), 0.0);
}

TEST(IicCurveTest, MatchesOracleOnRandomSequences) {
  Rng rng(2);
  for (int iter = 0; iter < 100; ++iter) {
    const auto seq = Tokenize(testing::RandomNotes(rng));
    if (seq.empty()) continue;
    std::vector<double> ics(seq.size());
    for (auto& v : ics) v = rng.Uniform(0.0, 6.0);
    const auto cfg = Cfg(rng.Uniform(0.1, 2), rng.Uniform(0.1, 2), rng.Uniform(1, 6));
    const double t_end = rng.Uniform(1.0, 30.0);
    const auto curve = IicCurve(seq, ics, cfg, t_end);
    ASSERT_EQ(curve.size(), GridPoints(t_end, cfg.dt));
    const auto events = testing::OracleEvents(seq, ics);
    for (std::size_t j = 0; j < curve.size(); ++j)
      ASSERT_NEAR(curve.values[j],
                  testing::OracleIic(events, curve.TimeAt(j), cfg.c_pitch, cfg.c_timeshift, cfg.window),
                  1e-9);
  }
}

TEST(IicCurveTest, LinearityAndAdditivity) {
  Rng rng(3);
  const auto cfg = Cfg(0.7, 1.3);
  const auto seq = Tokenize(testing::RandomNotes(rng, {20, 20}));
  std::vector<double> ics(seq.size());
  for (auto& v : ics) v = rng.Uniform(0.0, 5.0);
  const auto base = IicCurve(seq, ics, cfg, 20.0);
  auto scaled_ics = ics;
  for (auto& v : scaled_ics) v *= 2.5;
  const auto scaled = IicCurve(seq, scaled_ics, cfg, 20.0);
  for (std::size_t j = 0; j < base.size(); ++j)
    EXPECT_NEAR(scaled.values[j], 2.5 * base.values[j], 1e-12);
  const Curve zero = Constant(0.0, 20.0);
  EXPECT_NEAR(IcDeviation(zero, scaled, 20.0), 2.5 * IcDeviation(zero, base, 20.0), 1e-9);
  EXPECT_NEAR(SegmentSurprisal(scaled, 1.0, 9.0), 2.5 * SegmentSurprisal(base, 1.0, 9.0), 1e-9);

  auto events = LocalizeIcs(seq.tokens(), ics);
  std::vector<LocalizedIc> a, b;
  for (const auto& e : events) (e.time < 8.0 ? a : b).push_back(e);
  const auto whole = IicOnGrid(events, cfg, 0.0, 201);
  const auto ca = IicOnGrid(a, cfg, 0.0, 201);
  const auto cb = IicOnGrid(b, cfg, 0.0, 201);
  for (std::size_t j = 0; j < whole.size(); ++j)
    EXPECT_NEAR(whole.values[j], ca.values[j] + cb.values[j], 1e-12);
}

TEST(IicCurveTest, CausalityUnderPerturbation) {
  Rng rng(4);
  const auto cfg = Cfg(0.9, 1.1);
  for (int iter = 0; iter < 200; ++iter) {
    auto seq = Tokenize(testing::RandomNotes(rng, {8, 30}));
    std::vector<double> ics(seq.size());
    for (auto& v : ics) v = rng.Uniform(0.0, 5.0);
    const auto times = LocalizeAll(seq);
    const std::size_t pivot = static_cast<std::size_t>(rng.Int(0, static_cast<int>(seq.size()) - 1));
    const double t = times[pivot];
    const double before = IicAt(LocalizeIcs(seq.tokens(), ics), t, cfg);
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (times[i] < t) continue;
      ics[i] = rng.Uniform(0.0, 9.0);
      auto& tok = seq.tokens()[i];
      // A shorter timeshift could move its token before t unless its own
      // note already starts at or after t.
      if (tok.type == TokenType::kTimeshift && times[i - i % 4] < t) continue;
      tok.value = rng.Int(0, TypeVocabSize(tok.type) - 1);
    }
    EXPECT_EQ(IicAt(LocalizeIcs(seq.tokens(), ics), t, cfg), before);
  }
}

TEST(SegmentSurprisalTest, Examples) {
  EXPECT_NEAR(SegmentSurprisal(Constant(0.5, 4.0), 1.0, 3.0), 1.0, 1e-12);
  EXPECT_EQ(SegmentSurprisal(Constant(0.0, 4.0), 1.0, 3.0), 0.0);
  EXPECT_THROW(SegmentSurprisal(Constant(1.0, 4.0), 3.0, 1.0), std::domain_error);
  EXPECT_THROW(SegmentSurprisal(Constant(1.0, 4.0), 1.0, 5.0), std::domain_error);
}

TEST(SegmentSurprisalTest, SingleTokenAreaAgainstFineQuadrature) {
  const auto cfg = Cfg();
  const auto curve = IicOnGrid(SingleToken(), cfg, 0.0, 41);
  const double riemann = SegmentSurprisal(curve, 0.5, 2.5);
  const auto ev = SingleToken();
  const double fine =
      testing::Simpson([&](double t) { return IicAt(ev, t, cfg); }, 0.5 + 1e-8, 2.5, 20000);
  EXPECT_NEAR(fine, 0.5, 1e-6);
  // The bump starts at its maximum and decays to zero, so the right sum falls
  // short by about dt/2 times the jump.
  const double jump = IicAt(ev, 0.5 + 1e-8, cfg);
  EXPECT_NEAR(riemann, fine - 0.5 * cfg.dt * jump, 1e-3);
}

TEST(IcDeviationTest, Examples) {
  const auto a = Constant(1.7, 10.0);
  EXPECT_EQ(IcDeviation(a, a, 10.0), 0.0);
  EXPECT_NEAR(IcDeviation(Constant(3.0, 10.0), Constant(2.0, 10.0), 10.0), 10.0, 1e-9);
  EXPECT_THROW(IcDeviation(Constant(3.0, 5.0), Constant(2.0, 10.0), 10.0), std::domain_error);
}

TEST(IcDeviationTest, ResamplesTargetOntoIicGrid) {
  Curve fine{0.0, 0.05, {}};
  for (int j = 0; j <= 200; ++j) fine.values.push_back(0.3 * j * 0.05);
  Curve iic{0.0, 0.1, std::vector<double>(101, 0.0)};
  double expect = 0.0;
  for (int j = 1; j <= 100; ++j) expect += 0.3 * j * 0.1 * 0.1;
  EXPECT_NEAR(IcDeviation(fine, iic, 10.0), expect, 1e-9);
}

TEST(IcDeviationTest, GridRefinementConverges) {
  auto target = [](double t) { return 1.0 + std::sin(t); };
  auto iic = [](double t) { return 0.5 * std::cos(0.7 * t); };
  double exact = testing::Simpson([&](double t) { return std::abs(target(t) - iic(t)); }, 0, 10, 200000);
  double last_err = 1e9;
  for (double dt : {0.2, 0.1, 0.05, 0.025}) {
    Curve a{0, dt, {}}, b{0, dt, {}};
    for (std::size_t j = 0; j < GridPoints(10, dt); ++j) {
      a.values.push_back(target(j * dt));
      b.values.push_back(iic(j * dt));
    }
    const double err = std::abs(IcDeviation(a, b, 10.0) - exact);
    EXPECT_LT(err, 2.0 * dt);
    EXPECT_LT(err, last_err);
    last_err = err;
  }
}

TEST(Calibration, WeightsFromMeans) {
  const auto w = TypeWeightsFromMeans(4.0, 2.0);
  EXPECT_DOUBLE_EQ(w.c_pitch, 0.25);
  EXPECT_DOUBLE_EQ(w.c_timeshift, 0.5);
  const auto eq = TypeWeightsFromMeans(3.0, 3.0);
  EXPECT_EQ(eq.c_pitch, eq.c_timeshift);
  EXPECT_THROW(TypeWeightsFromMeans(0.0, 1.0), std::domain_error);
}

TEST(Calibration, WeightedMeansAreOne) {
  Rng rng(5);
  std::vector<TokenSeq> corpus;
  std::vector<std::vector<double>> ics;
  for (int i = 0; i < 5; ++i) {
    corpus.push_back(Tokenize(testing::RandomNotes(rng, {5, 30})));
    std::vector<double> v(corpus.back().size());
    for (std::size_t j = 0; j < v.size(); ++j)
      v[j] = corpus.back()[j].type == TokenType::kPitch ? rng.Uniform(2, 6) : rng.Uniform(0.1, 3);
    ics.push_back(std::move(v));
  }
  const auto w = CalibrateTypeWeights(corpus, ics);
  double sp = 0, st = 0;
  int np = 0, nt = 0;
  for (std::size_t s = 0; s < corpus.size(); ++s)
    for (std::size_t j = 0; j < corpus[s].size(); ++j) {
      if (corpus[s][j].type == TokenType::kPitch) sp += w.c_pitch * ics[s][j], ++np;
      if (corpus[s][j].type == TokenType::kTimeshift) st += w.c_timeshift * ics[s][j], ++nt;
    }
  EXPECT_NEAR(sp / np, 1.0, 1e-9);
  EXPECT_NEAR(st / nt, 1.0, 1e-9);
}

TEST(CurveCsv, RoundTripAtNineDigits) {
  Rng rng(6);
  Curve c{0.0, 0.1, {}};
  for (int j = 0; j < 57; ++j) c.values.push_back(rng.Uniform(0, 10));
  const auto text = CurveToCsv(c);
  EXPECT_EQ(text.rfind("time_seconds,value_nats_per_second\n", 0), 0u);
  const auto back = CurveFromCsv(text);
  ASSERT_EQ(back.size(), c.size());
  EXPECT_NEAR(back.dt, 0.1, 1e-12);
  for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(back.values[j], c.values[j], 1e-8 * c.values[j]);
  EXPECT_EQ(CurveToCsv(back), text);
}

TEST(CurveCsv, RejectsMalformedInput) {
  EXPECT_THROW(CurveFromCsv("time,value\n0,1\n"), std::runtime_error);
  EXPECT_THROW(CurveFromCsv("time_seconds,value_nats_per_second\n0,1\n0.1,x\n"), std::runtime_error);
  EXPECT_THROW(CurveFromCsv("time_seconds,value_nats_per_second\n0,1\n0.1,1\n0.3,1\n"),
               std::runtime_error);
}

TEST(CurveTest, GridHelpers) {
  EXPECT_EQ(GridPoints(10.0, 0.1), 101u);
  const Curve c{0.0, 0.5, {0.0, 1.0, 3.0}};
  EXPECT_DOUBLE_EQ(c.Duration(), 1.0);
  EXPECT_DOUBLE_EQ(c.ValueAt(0.25), 0.5);
  EXPECT_DOUBLE_EQ(c.ValueAt(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(c.ValueAt(9.0), 3.0);
  const auto r = Resample(c, 0.0, 0.25, 5);
  EXPECT_EQ(r.values, (std::vector<double>{0.0, 0.5, 1.0, 2.0, 3.0}));
}

}  // namespace
}  // namespace iic
