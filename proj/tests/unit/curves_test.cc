#include "iic/curves.h"

#include <gtest/gtest.h>

#include "iic/markov_critic.h"
#include "support/oracles.h"

namespace iic {
namespace {

using testing::Rng;

ShapeSpec Spec(ShapeKind kind, double low, double high, double duration = 10.0) {
  ShapeSpec s;
  s.kind = kind;
  s.low = low;
  s.high = high;
  s.duration = duration;
  return s;
}

TEST(MakeShapeTest, Examples) {
  const auto c = MakeShape(Spec(ShapeKind::kConstant, 2, 2), 0.1);
  for (double v : c.values) EXPECT_EQ(v, 2.0);
  const auto ramp = MakeShape(Spec(ShapeKind::kRampUp, 0, 10), 0.1);
  ASSERT_EQ(ramp.size(), 101u);
  EXPECT_NEAR(ramp.values[50], 5.0, 1e-12);
  EXPECT_DOUBLE_EQ(ramp.values.back(), 10.0);
  const auto down = MakeShape(Spec(ShapeKind::kStepDown, 1, 3), 0.1);
  EXPECT_EQ(down.values[49], 3.0);
  EXPECT_EQ(down.values[50], 1.0);
  EXPECT_EQ(MakeShape(Spec(ShapeKind::kConstant, 1, 3), 0.1).values[7], 2.0);
}

TEST(MakeShapeTest, BoundsAndMirrorSymmetry) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const double lo = rng.Uniform(0, 5), hi = lo + rng.Uniform(0, 5);
    const double dur = rng.Uniform(1, 30), dt = rng.Uniform(0.01, 0.5);
    auto spec = Spec(ShapeKind::kRampUp, lo, hi, dur);
    spec.step_fraction = rng.Uniform(0.05, 0.95);
    auto make = [&](ShapeKind k) {
      auto s = spec;
      s.kind = k;
      return MakeShape(s, dt);
    };
    const auto up = make(ShapeKind::kRampUp), down = make(ShapeKind::kRampDown);
    const auto su = make(ShapeKind::kStepUp), sd = make(ShapeKind::kStepDown);
    for (const auto* c : {&up, &down, &su, &sd})
      for (double v : c->values) {
        EXPECT_GE(v, lo - 1e-12);
        EXPECT_LE(v, hi + 1e-12);
      }
    for (std::size_t j = 0; j < up.size(); ++j) {
      EXPECT_NEAR(up.values[j] + down.values[j], lo + hi, 1e-9);
      EXPECT_NEAR(su.values[j] + sd.values[j], lo + hi, 1e-9);
    }
  }
}

TEST(MakeShapeTest, ValidatesSpec) {
  EXPECT_THROW(MakeShape(Spec(ShapeKind::kRampUp, 3, 1), 0.1), std::domain_error);
  EXPECT_THROW(MakeShape(Spec(ShapeKind::kRampUp, 0, 1, 0), 0.1), std::domain_error);
  auto s = Spec(ShapeKind::kStepUp, 0, 1);
  s.step_fraction = 1.0;
  EXPECT_THROW(MakeShape(s, 0.1), std::domain_error);
}

TEST(ShapeNames, ParseAcceptsCommonSpellings) {
  EXPECT_EQ(ParseShapeKind("RAMP_UP"), ShapeKind::kRampUp);
  EXPECT_EQ(ParseShapeKind("step-down"), ShapeKind::kStepDown);
  EXPECT_EQ(ParseShapeKind("constant"), ShapeKind::kConstant);
  EXPECT_FALSE(ParseShapeKind("zigzag").has_value());
  for (auto k : {ShapeKind::kConstant, ShapeKind::kRampUp, ShapeKind::kRampDown,
                 ShapeKind::kStepUp, ShapeKind::kStepDown})
    EXPECT_EQ(ParseShapeKind(ShapeName(k)), k);
}

const MarkovCritic& SmallModel() {
  static const MarkovCritic m = [] {
    std::vector<std::vector<TokenId>> ids;
    for (const auto& f : testing::CorpusFiles(IIC_DATA_DIR "/corpus")) {
      ids.push_back(Tokenize(LoadMidiFile(f).notes).ids());
      if (ids.size() == 4) break;
    }
    return MarkovCritic::Train(ids);
  }();
  return m;
}

TEST(ExtractCurveTest, SilentWindowIsZero) {
  const NoteList notes = {{0.0, 60, 70, 0.5}, {12.0, 62, 70, 20.0}};
  KernelConfig cfg;
  const auto c = ExtractCurve(notes, SmallModel(), cfg, 4.0, 9.0);
  ASSERT_EQ(c.size(), 51u);
  for (double v : c.values) EXPECT_EQ(v, 0.0);
}

TEST(ExtractCurveTest, IsolatedNoteGivesOneTermShape) {
  // Near the window only three weighted tokens exist, all perceived at 10 s:
  // the first note's Timeshift and the second note's Pitch and Timeshift.
  const NoteList notes = {{0.0, 60, 70, 0.5}, {10.0, 64, 70, 5.0}};
  KernelConfig cfg;
  const auto seq = Tokenize(notes);
  const auto ics = TokenIc(SmallModel(), seq.ids());
  const auto c = ExtractCurve(notes, SmallModel(), cfg, 9.5, 13.5);
  for (std::size_t j = 0; j < c.size(); ++j) {
    const double t = 9.5 + c.TimeAt(j);
    const double expect = testing::OracleKernel(t - 10.0, 1.0, 4.0) * (ics[3] + ics[4] + ics[7]);
    EXPECT_NEAR(c.values[j], expect, 1e-12);
  }
}

TEST(ExtractCurveTest, EqualsIicCurveWiring) {
  const auto notes = LoadMidiFile(testing::CorpusFiles(IIC_DATA_DIR "/corpus")[5]).notes;
  KernelConfig cfg;
  cfg.c_pitch = 0.3;
  cfg.c_timeshift = 0.6;
  const auto seq = Tokenize(notes);
  const auto ics = TokenIc(SmallModel(), seq.ids());
  const auto full = IicCurve(seq, ics, cfg, 30.0);
  const auto window = ExtractCurve(notes, SmallModel(), cfg, 10.0, 20.0);
  ASSERT_EQ(window.size(), 101u);
  for (std::size_t j = 0; j < window.size(); ++j)
    EXPECT_NEAR(window.values[j], full.values[100 + j], 1e-12);
  EXPECT_NEAR(IcDeviation(window, Resample(full, 10.0, 0.1, 101), 10.0), 0.0, 1e-9);
}

TEST(ExtractCurveTest, RejectsBadWindows) {
  const NoteList notes = {{0.0, 60, 70, 5.0}};
  KernelConfig cfg;
  EXPECT_THROW(ExtractCurve(notes, SmallModel(), cfg, 2.0, 2.0), std::domain_error);
  EXPECT_THROW(ExtractCurve(notes, SmallModel(), cfg, 2.0, 9.0), std::domain_error);
  EXPECT_THROW(ExtractCurve(notes, SmallModel(), cfg, -1.0, 2.0), std::domain_error);
}

TEST(LevelsTest, Examples) {
  const std::vector<double> constant(200, 1.5);
  const auto a = LevelsFromValues(constant);
  EXPECT_EQ(a.low, 1.5);
  EXPECT_EQ(a.high, 1.5);
  EXPECT_FALSE(a.unstable);

  std::vector<double> two(100, 1.0);
  two.insert(two.end(), 100, 3.0);
  const auto b = LevelsFromValues(two);
  EXPECT_EQ(b.low, 1.0);
  EXPECT_EQ(b.high, 3.0);

  std::vector<double> ramp;
  for (int i = 0; i <= 1000; ++i) ramp.push_back(i * 0.01);
  const auto c = LevelsFromValues(ramp);
  EXPECT_NEAR(c.low, 2.5, 1e-9);
  EXPECT_NEAR(c.high, 7.5, 1e-9);
  EXPECT_NEAR(c.p90, 9.0, 1e-9);

  EXPECT_TRUE(LevelsFromValues(std::vector<double>(99, 1.0)).unstable);
}

TEST(LevelsTest, PercentileInterpolatesLinearly) {
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 50), 2.5);
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 0), 1.0);
  EXPECT_DOUBLE_EQ(Percentile({4, 1, 3, 2}, 100), 4.0);
  EXPECT_THROW(Percentile({}, 50), std::invalid_argument);
}

TEST(LevelsTest, DefaultLevelsPoolCorpusCurves) {
  std::vector<TokenSeq> corpus;
  for (const auto& f : testing::CorpusFiles(IIC_DATA_DIR "/corpus")) {
    corpus.push_back(Tokenize(LoadMidiFile(f).notes));
    if (corpus.size() == 4) break;
  }
  KernelConfig cfg;
  std::vector<double> pooled;
  for (const auto& s : corpus) {
    const auto ics = TokenIc(SmallModel(), s.ids());
    const auto c = IicCurve(s, ics, cfg, PieceEnd(Detokenize(s)));
    pooled.insert(pooled.end(), c.values.begin(), c.values.end());
  }
  const auto lv = DefaultLevels(corpus, SmallModel(), cfg);
  EXPECT_DOUBLE_EQ(lv.low, Percentile(pooled, 25));
  EXPECT_DOUBLE_EQ(lv.high, Percentile(pooled, 75));
  EXPECT_EQ(lv.samples, pooled.size());
}

}  // namespace
}  // namespace iic
