#include "cli/commands.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "iic/curve.h"
#include "iic/markov_critic.h"
#include "support/oracles.h"

namespace iic::cli {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out, err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path Scratch(const std::string& name) {
  const fs::path d = fs::path(IIC_TEST_TMP) / "cli" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// A model trained once on a few corpus pieces.
const fs::path& ModelPath() {
  static const fs::path path = [] {
    const auto dir = Scratch("model");
    const auto corpus = dir / "corpus";
    fs::create_directories(corpus);
    const auto files = testing::CorpusFiles(IIC_DATA_DIR "/corpus");
    for (std::size_t i = 0; i < 6; ++i) fs::copy_file(files[i], corpus / files[i].filename());
    const auto model = dir / "model.bin";
    const auto r = Cli({"train", "--corpus", corpus.string(), "--out", model.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return model;
  }();
  return path;
}

TEST(CliTrain, SingleFileTokenCountAndDeterminism) {
  const auto dir = Scratch("train");
  fs::create_directories(dir / "one");
  const auto src = testing::CorpusFiles(IIC_DATA_DIR "/corpus")[2];
  fs::copy_file(src, dir / "one" / src.filename());
  const auto notes = LoadMidiFile(src).notes;
  const auto a = dir / "a.bin", b = dir / "b.bin";
  ASSERT_EQ(Cli({"train", "--corpus", (dir / "one").string(), "--out", a.string()}).code, kExitOk);
  ASSERT_EQ(Cli({"train", "--corpus", (dir / "one").string(), "--out", b.string()}).code, kExitOk);
  EXPECT_EQ(Slurp(a), Slurp(b));
  const auto summary = Slurp(a.string() + ".summary.txt");
  EXPECT_NE(summary.find("tokens=" + std::to_string(4 * notes.size()) + "\n"), std::string::npos)
      << summary;
  EXPECT_NO_THROW(MarkovCritic::Load(a));
}

TEST(CliTrain, EmptyCorpusIsAnInputError) {
  const auto dir = Scratch("empty");
  fs::create_directories(dir / "none");
  EXPECT_EQ(Cli({"train", "--corpus", (dir / "none").string(), "--out", (dir / "m").string()}).code,
            kExitInput);
  EXPECT_EQ(Cli({"train", "--out", (dir / "m").string()}).code, kExitInput);
  EXPECT_EQ(Cli({"--help"}).code, kExitOk);
}

TEST(CliCurve, RampShapeAndRoundTrip) {
  const auto dir = Scratch("curve");
  const auto csv = dir / "ramp.csv";
  const auto r = Cli({"curve", "--target-shape", "RAMP_UP", "--low", "0", "--high", "10",
                      "--duration", "10", "--out", csv.string(), "--plot",
                      (dir / "ramp.svg").string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto c = CurveFromCsv(Slurp(csv));
  ASSERT_EQ(c.size(), 101u);
  EXPECT_NEAR(c.values.back(), 10.0, 1e-9);
  EXPECT_NEAR(c.values[50], 5.0, 1e-9);
  EXPECT_EQ(CurveToCsv(c), Slurp(csv));
  EXPECT_NE(Slurp(dir / "ramp.svg").find("<svg"), std::string::npos);
}

TEST(CliCurve, ExtractionWindows) {
  const auto dir = Scratch("extract");
  const NoteList notes = {{0.0, 60, 70, 0.5}, {12.0, 62, 70, 8.0}};
  const auto midi = dir / "gap.mid";
  SaveMidiFile(midi, notes);
  const auto r = Cli({"curve", "--model", ModelPath().string(), "--midi", midi.string(),
                      "--start", "4", "--duration", "5"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto c = CurveFromCsv(r.out);
  ASSERT_EQ(c.size(), 51u);
  for (double v : c.values) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(Cli({"curve", "--model", ModelPath().string(), "--midi", midi.string(), "--start",
                 "18", "--duration", "5"})
                .code,
            kExitInput);
}

TEST(CliGenerate, ArtifactsAndDeterminism) {
  const auto dir = Scratch("generate");
  auto gen = [&](const std::string& sub, const std::string& seed) {
    return Cli({"generate", "--model", ModelPath().string(), "--target-shape", "CONSTANT",
                "--duration", "5", "--k", "4", "--seed", seed, "--out", (dir / sub).string()});
  };
  const auto a = gen("a", "1");
  ASSERT_EQ(a.code, kExitOk) << a.err;
  for (const char* f : {"generated.mid", "realized_iic.csv", "manifest.txt"})
    EXPECT_TRUE(fs::exists(dir / "a" / f)) << f;
  const auto text = Slurp(dir / "a" / "manifest.txt");
  const auto pos = text.find("final_deviation=");
  ASSERT_NE(pos, std::string::npos);
  const double dev = std::stod(text.substr(pos + 16));
  EXPECT_TRUE(std::isfinite(dev));
  EXPECT_GE(dev, 0.0);
  ASSERT_EQ(gen("b", "1").code, kExitOk);
  EXPECT_EQ(Slurp(dir / "a" / "generated.mid"), Slurp(dir / "b" / "generated.mid"));
  EXPECT_EQ(text, Slurp(dir / "b" / "manifest.txt"));
  EXPECT_EQ(CurveFromCsv(Slurp(dir / "a" / "realized_iic.csv")).size(), 51u);
}

TEST(CliGenerate, ShortTargetIsAnInputError) {
  const auto dir = Scratch("short");
  const auto csv = dir / "t.csv";
  {
    std::ofstream(csv) << CurveToCsv(Curve{0.0, 0.1, std::vector<double>(21, 1.0)});
  }
  const auto r = Cli({"generate", "--model", ModelPath().string(), "--target-csv", csv.string(),
                      "--duration", "5", "--k", "2", "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_EQ(Cli({"generate", "--model", ModelPath().string(), "--target-csv", csv.string(),
                 "--target-shape", "CONSTANT", "--out", (dir / "o").string()})
                .code,
            kExitInput);
}

TEST(CliAnalyze, MeasureRowsOnlyWithAnnotations) {
  const auto dir = Scratch("analyze");
  const auto corpus = dir / "corpus";
  fs::create_directories(corpus);
  const auto files = testing::CorpusFiles(IIC_DATA_DIR "/corpus");
  for (std::size_t i = 0; i < 3; ++i) fs::copy_file(files[i], corpus / files[i].filename());
  const auto plain = dir / "plain.csv";
  const auto r = Cli({"analyze", "--model", ModelPath().string(), "--corpus", corpus.string(),
                      "--out", plain.string(), "--max-n", "20"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto report = Slurp(plain);
  EXPECT_EQ(report.find(",he,"), std::string::npos);
  EXPECT_NE(report.find(",tt,"), std::string::npos);
  EXPECT_NE(report.find(",d,"), std::string::npos);

  std::string ann = "piece_id,measure_index,first_note_index,last_note_index\n";
  for (std::size_t i = 0; i < 3; ++i) {
    const auto n = static_cast<int>(LoadMidiFile(files[i]).notes.size());
    const int half = n / 2;
    ann += files[i].stem().string() + ",1,0," + std::to_string(half - 1) + "\n";
    ann += files[i].stem().string() + ",2," + std::to_string(half) + "," +
           std::to_string(n - 1) + "\n";
  }
  std::ofstream(dir / "ann.csv") << ann;
  const auto annotated = dir / "ann_report.csv";
  ASSERT_EQ(Cli({"analyze", "--model", ModelPath().string(), "--corpus", corpus.string(),
                 "--annotations", (dir / "ann.csv").string(), "--out", annotated.string(),
                 "--max-n", "5", "--plot", (dir / "plots").string()})
                .code,
            kExitOk);
  EXPECT_NE(Slurp(annotated).find(",he,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "plots" / "r_vs_n_tt.svg"));
}

TEST(BuildReportTest, IdenticalColumnsGiveUnitCorrelation) {
  MetricSeries s;
  s.metric = "d";
  s.pieces = {{{1, 1}, {2, 2}, {5, 5}}, {{0, 0}, {3, 3}}};
  const std::vector<MetricSeries> all = {s};
  const auto rows = BuildReport(all, 3, Pooling::kPooled);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].r.has_value());
  ASSERT_TRUE(rows[2].r);
  EXPECT_NEAR(*rows[2].r, 1.0, 1e-12);
  EXPECT_EQ(rows[2].metric, "d");
}

}  // namespace
}  // namespace iic::cli
