#include "cli/commands.h"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "cli/svg_plot.h"
#include "iic/bytes.h"
#include "iic/critic.h"
#include "iic/curves.h"
#include "iic/markov_critic.h"
#include "iic/search.h"
#include "iic/tokenizer.h"
#include "iic/training.h"

namespace fs = std::filesystem;

namespace iic::cli {
namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string Fmt(double v, const char* spec = "%.6g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

MarkovCritic LoadModel(const std::string& path) {
  if (path.empty()) throw InputError("--model is required");
  try {
    return MarkovCritic::Load(path);
  } catch (const std::exception& e) {
    throw InputError("cannot load model '" + path + "': " + e.what());
  }
}

KernelConfig ModelKernel(const MarkovCritic& model, double window, double dt) {
  KernelConfig cfg;
  cfg.window = window;
  cfg.dt = dt;
  cfg.c_pitch = model.metadata().c_pitch;
  cfg.c_timeshift = model.metadata().c_timeshift;
  cfg.Validate();
  return cfg;
}

std::optional<double> ParseCh(const std::string& text) {
  if (text == "off" || text == "none") return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 0.0))
    throw InputError("--ch expects a non-negative number or 'off', got '" + text + "'");
  if (v == 0.0) return std::nullopt;
  return v;
}

TokenMask ParseMask(const std::string& text) {
  if (text == "pitch") return TokenMask::kPitch;
  if (text == "timeshift") return TokenMask::kTimeshift;
  if (text == "both") return TokenMask::kBoth;
  throw InputError("--mask expects pitch, timeshift or both");
}

int ThreadCount(int k) {
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("IIC_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw InputError("IIC_THREADS must be a positive integer");
    threads = static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(1, std::min(threads, k));
}

void WriteSvg(const std::string& path, const std::string& svg) {
  if (path.empty()) return;
  WriteFileText(path, svg);
}

PlotSeries CurveSeries(const std::string& name, const Curve& c) {
  PlotSeries s;
  s.name = name;
  for (std::size_t j = 0; j < c.size(); ++j) {
    s.x.push_back(c.TimeAt(j));
    s.y.push_back(c.values[j]);
  }
  return s;
}

// ---- train ----

struct TrainOptions {
  std::string corpus;
  std::string out;
  int order = MarkovCritic::kDefaultOrder;
  int folds = 5;
};

int RunTrain(const TrainOptions& o, std::ostream& out, std::ostream& err) {
  if (o.order < 1) throw InputError("--order must be at least 1");
  const auto pieces = LoadCorpusDir(o.corpus, err);
  std::vector<TokenSeq> seqs;
  for (const auto& p : pieces) {
    if (p.notes.empty()) {
      err << "warning: " << p.id << " has no notes; skipped\n";
      continue;
    }
    seqs.push_back(Tokenize(p.notes));
  }
  if (seqs.empty()) {
    err << "error: no usable MIDI files in '" << o.corpus << "'\n";
    return kExitInput;
  }
  auto [model, levels] = TrainCalibratedCritic(seqs, o.order, o.folds);
  const ModelMetadata& meta = model.metadata();
  model.Save(o.out);

  std::string summary;
  summary += "files=" + std::to_string(seqs.size()) + "\n";
  summary += "tokens=" + std::to_string(meta.token_count) + "\n";
  summary += "max_order=" + std::to_string(o.order) + "\n";
  summary += "folds=" + std::to_string(o.folds) + "\n";
  summary += "mean_ic_pitch=" + Fmt(meta.mean_ic_pitch) + "\n";
  summary += "mean_ic_timeshift=" + Fmt(meta.mean_ic_timeshift) + "\n";
  summary += "c_pitch=" + Fmt(meta.c_pitch) + "\n";
  summary += "c_timeshift=" + Fmt(meta.c_timeshift) + "\n";
  summary += "level_low=" + Fmt(meta.level_low) + "\n";
  summary += "level_high=" + Fmt(meta.level_high) + "\n";
  summary += "level_p90=" + Fmt(meta.level_p90) + "\n";
  summary += "model_id=" + model.Identifier() + "\n";
  if (levels.unstable)
    err << "warning: only " << levels.samples << " IIC samples; levels are unstable\n";
  WriteFileText(o.out + ".summary.txt", summary);
  out << summary;
  return kExitOk;
}

// ---- curve ----

struct ShapeOptions {
  std::string shape;
  std::optional<double> low, high;
  double duration = 10.0;
  double step_fraction = 0.5;
};

Curve BuildShape(const ShapeOptions& o, const MarkovCritic* model, double dt) {
  const auto kind = ParseShapeKind(o.shape);
  if (!kind) throw InputError("unknown --target-shape '" + o.shape + "'");
  ShapeSpec spec;
  spec.kind = *kind;
  spec.low = o.low.value_or(model ? model->metadata().level_low : 0.0);
  spec.high = o.high.value_or(model ? model->metadata().level_high : 1.0);
  spec.duration = o.duration;
  spec.step_fraction = o.step_fraction;
  spec.Validate();
  return MakeShape(spec, dt);
}

std::string ShapeLabel(const ShapeOptions& o, const Curve& c) {
  return o.shape + " " + Fmt(c.values.front()) + ".." + Fmt(c.values.back());
}

struct CurveOptions {
  ShapeOptions shape;
  std::string model;
  std::string midi;
  std::string mask = "both";
  double start = 0.0;
  double window = 4.0;
  double dt = 0.1;
  std::string out;
  std::string plot;
};

int RunCurve(const CurveOptions& o, std::ostream& out) {
  if (o.shape.shape.empty() == o.midi.empty())
    throw InputError("give exactly one of --target-shape or --midi");
  if (!(o.dt > 0.0)) throw InputError("--delta-t must be positive");
  std::optional<MarkovCritic> model;
  if (!o.model.empty()) model = LoadModel(o.model);

  Curve curve;
  std::string title;
  if (!o.shape.shape.empty()) {
    curve = BuildShape(o.shape, model ? &*model : nullptr, o.dt);
    title = ShapeLabel(o.shape, curve);
  } else {
    if (!model) throw InputError("--midi needs --model");
    const KernelConfig cfg = WithMask(ModelKernel(*model, o.window, o.dt), ParseMask(o.mask));
    if (!(o.shape.duration > 0.0)) throw InputError("--duration must be positive");
    const NoteList notes = LoadMidiFile(o.midi).notes;
    const double end = PieceEnd(notes);
    if (o.start < 0.0 || o.start + o.shape.duration > end + 1e-9)
      throw InputError("window [" + Fmt(o.start) + ", " + Fmt(o.start + o.shape.duration) +
                       "] lies outside the piece (0 .. " + Fmt(end) + " s)");
    curve = ExtractCurve(notes, *model, cfg, o.start, o.start + o.shape.duration);
    title = fs::path(o.midi).filename().string() + " @ " + Fmt(o.start) + " s";
  }
  const std::string csv = CurveToCsv(curve);
  if (o.out.empty()) {
    out << csv;
  } else {
    WriteFileText(o.out, csv);
    out << "wrote " << curve.size() << " rows to " << o.out << "\n";
  }
  WriteSvg(o.plot, LinePlotSvg(title, "time (s)", "IIC (nats/s)", {CurveSeries("curve", curve)}));
  return kExitOk;
}

// ---- generate ----

struct GenerateOptions {
  std::string model;
  std::string prompt;
  ShapeOptions shape;
  std::string target_csv;
  double step = 0.3;
  int k = 128;
  std::string ch = "50";
  double window = 4.0;
  double dt = 0.1;
  std::uint64_t seed = 0;
  int max_tokens = 64;
  bool h_max_type = false;
  std::string out;
  std::string plot;
};

int RunGenerate(const GenerateOptions& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw InputError("--out is required");
  if (o.shape.shape.empty() == o.target_csv.empty())
    throw InputError("give exactly one of --target-shape or --target-csv");

  const MarkovCritic model = LoadModel(o.model);
  const KernelConfig cfg = ModelKernel(model, o.window, o.dt);
  SearchParams params;
  params.step = o.step;
  params.k = o.k;
  params.c_h = ParseCh(o.ch);
  params.duration = o.shape.duration;
  params.seed = o.seed;
  params.max_tokens_per_step = o.max_tokens;
  params.h_max_type_subset = o.h_max_type;
  params.threads = o.k >= 1 ? ThreadCount(o.k) : 1;
  params.Validate();

  Curve target;
  std::string target_id;
  if (!o.target_csv.empty()) {
    const std::string text = ReadFileText(o.target_csv);
    target = CurveFromCsv(text, o.dt);
    target_id = "csv:" + HexDigest(Fnv1a64(std::span(
                             reinterpret_cast<const std::uint8_t*>(text.data()), text.size())));
  } else {
    target = BuildShape(o.shape, &model, o.dt);
    target_id = o.shape.shape + ":" + Fmt(target.values.front(), "%.17g") + ":" +
                Fmt(target.values.back(), "%.17g") + ":" + Fmt(o.shape.step_fraction, "%.17g");
  }
  if (target.EndTime() + 1e-9 * cfg.dt < params.duration) {
    err << "error: target lasts " << Fmt(target.EndTime()) << " s, shorter than --duration "
        << Fmt(params.duration) << " s\n";
    return kExitInput;
  }

  NoteList prompt;
  std::string prompt_id = "none";
  if (!o.prompt.empty()) {
    const auto bytes = ReadFileBytes(o.prompt);
    prompt = LoadMidi(bytes).notes;
    prompt_id = HexDigest(Fnv1a64(bytes));
  }

  GenerationResult result;
  try {
    result = Generate(prompt, target, model, model, cfg, params);
  } catch (const SearchAborted& e) {
    err << "error: search aborted: " << e.what() << "\n";
    return kExitSearch;
  }
  result.manifest.Set("prompt", prompt_id);
  result.manifest.Set("target", target_id);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  WriteFileBytes(dir / "generated.mid", SaveMidi(result.notes));
  WriteFileText(dir / "realized_iic.csv", CurveToCsv(result.realized));
  WriteFileText(dir / "manifest.txt", result.manifest.ToString());
  if (!o.plot.empty()) {
    const Curve shown = Resample(target, 0.0, cfg.dt, result.realized.size());
    WriteSvg(o.plot, LinePlotSvg("target vs realized IIC", "time (s)", "IIC (nats/s)",
                                 {CurveSeries("target", shown),
                                  CurveSeries("realized", result.realized)}));
  }
  out << "notes=" << result.notes.size() << "\n";
  out << "iterations=" << result.iterations << "\n";
  out << "final_deviation=" << Fmt(result.deviation) << "\n";
  return kExitOk;
}

// ---- analyze ----

struct AnalyzeOptions {
  std::string model;
  std::string corpus;
  std::string annotations;
  std::string out;
  std::string plot;
  std::string mask;
  std::string pooling = "pooled";
  int max_n = 1000;
  double width = 1.0;
  double window = 4.0;
  double dt = 0.1;
};

int RunAnalyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw InputError("--out is required");
  if (o.max_n < 1) throw InputError("--max-n must be at least 1");
  if (!(o.width > 0.0)) throw InputError("--segment-width must be positive");
  Pooling pooling;
  if (o.pooling == "pooled") {
    pooling = Pooling::kPooled;
  } else if (o.pooling == "per-piece") {
    pooling = Pooling::kPerPieceMean;
  } else {
    throw InputError("--pooling expects pooled or per-piece");
  }
  const MarkovCritic model = LoadModel(o.model);
  const KernelConfig base = ModelKernel(model, o.window, o.dt);

  std::vector<TokenMask> masks = {TokenMask::kPitch, TokenMask::kTimeshift, TokenMask::kBoth};
  if (!o.mask.empty()) masks = {ParseMask(o.mask)};

  std::map<std::string, std::vector<MeasureBoundary>> measures;
  const bool with_entropy = !o.annotations.empty();
  if (with_entropy) {
    measures = ParseMeasureAnnotations(ReadFileText(o.annotations));
  } else {
    err << "notice: no --annotations given; IOI entropy (he) rows omitted\n";
  }

  const auto pieces = LoadCorpusDir(o.corpus, err);
  if (pieces.empty()) {
    err << "error: no usable MIDI files in '" << o.corpus << "'\n";
    return kExitInput;
  }

  std::vector<MetricSeries> series;
  for (const char* metric : {"tt", "d", "he"}) {
    if (std::string(metric) == "he" && !with_entropy) continue;
    for (TokenMask m : masks) series.push_back({metric, m, {}});
  }
  auto slot = [&](const std::string& metric, TokenMask m) -> MetricSeries& {
    for (auto& s : series)
      if (s.metric == metric && s.mask == m) return s;
    throw std::logic_error("missing series");
  };

  for (const auto& piece : pieces) {
    if (piece.notes.empty()) continue;
    const TokenSeq seq = Tokenize(piece.notes);
    const auto ics = TokenIc(model, seq.ids());
    const double end = PieceEnd(piece.notes);
    const auto bounds = measures.find(piece.id);
    if (with_entropy && bounds == measures.end())
      err << "notice: no measure annotations for " << piece.id << "\n";
    for (TokenMask m : masks) {
      const Curve curve = IicCurve(seq, ics, WithMask(base, m), end);
      std::vector<SegmentPair> tt, d;
      for (const auto& s : OnsetSegments(piece.notes, curve, o.width)) {
        tt.push_back({s.tension, s.surprisal});
        d.push_back({static_cast<double>(s.density), s.surprisal});
      }
      slot("tt", m).pieces.push_back(std::move(tt));
      slot("d", m).pieces.push_back(std::move(d));
      if (with_entropy && bounds != measures.end()) {
        std::vector<SegmentPair> he;
        for (const auto& r : MeasureSegments(piece.notes, bounds->second, curve))
          he.push_back({r.metric, r.surprisal});
        slot("he", m).pieces.push_back(std::move(he));
      }
    }
  }

  const auto rows = BuildReport(series, o.max_n, pooling);
  WriteFileText(o.out, ReportToCsv(rows));
  out << "wrote " << rows.size() << " rows to " << o.out << "\n";

  if (!o.plot.empty()) {
    fs::create_directories(o.plot);
    for (const char* metric : {"tt", "d", "he"}) {
      std::vector<PlotSeries> lines;
      for (TokenMask m : masks) {
        PlotSeries s;
        s.name = MaskName(m);
        for (const auto& row : rows)
          if (row.metric == metric && row.mask == m) {
            s.x.push_back(row.n);
            s.y.push_back(row.r);
          }
        if (!s.x.empty()) lines.push_back(std::move(s));
      }
      if (lines.empty()) continue;
      WriteSvg((fs::path(o.plot) / (std::string("r_vs_n_") + metric + ".svg")).string(),
               LinePlotSvg(std::string("IIC vs ") + metric, "n (segments per piece)",
                           "Pearson r", lines));
    }
  }
  return kExitOk;
}

}  // namespace

std::vector<CorpusPiece> LoadCorpusDir(const fs::path& dir, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".mid" || ext == ".midi") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CorpusPiece> out;
  for (const auto& f : files) {
    try {
      out.push_back({f.stem().string(), LoadMidiFile(f).notes});
    } catch (const std::exception& e) {
      err << "warning: skipping " << f.filename().string() << ": " << e.what() << "\n";
    }
  }
  return out;
}

std::vector<ReportRow> BuildReport(std::span<const MetricSeries> series, int n_max,
                                   Pooling pooling) {
  std::vector<ReportRow> rows;
  for (const auto& s : series) {
    for (const auto& point : CorrelationSeries(s.pieces, n_max, pooling)) {
      ReportRow row;
      row.n = point.n;
      row.metric = s.metric;
      row.mask = s.mask;
      row.r = point.r;
      row.p_value = point.p_value;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Information-content guided music generation and analysis"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train the Markov critic on a MIDI directory");
  train_cmd->add_option("--corpus", train.corpus, "Directory of MIDI files")->required();
  train_cmd->add_option("--out", train.out, "Model file to write")->required();
  train_cmd->add_option("--order", train.order, "Maximum context length")->capture_default_str();
  train_cmd->add_option("--folds", train.folds,
                        "Cross-fitting folds for weights and levels (1: in-sample)")
      ->capture_default_str();

  CurveOptions curve;
  auto* curve_cmd = app.add_subcommand("curve", "Write a target shape or an extracted IIC curve");
  curve_cmd->add_option("--target-shape", curve.shape.shape,
                        "CONSTANT | RAMP_UP | RAMP_DOWN | STEP_UP | STEP_DOWN");
  curve_cmd->add_option("--low", curve.shape.low, "Low level (default: model level or 0)");
  curve_cmd->add_option("--high", curve.shape.high, "High level (default: model level or 1)");
  curve_cmd->add_option("--duration", curve.shape.duration, "Seconds")->capture_default_str();
  curve_cmd->add_option("--step-fraction", curve.shape.step_fraction,
                        "Step position as a fraction of the duration")->capture_default_str();
  curve_cmd->add_option("--model", curve.model, "Model file");
  curve_cmd->add_option("--midi", curve.midi, "Extract from this MIDI file");
  curve_cmd->add_option("--start", curve.start, "Window start in seconds")->capture_default_str();
  curve_cmd->add_option("--mask", curve.mask, "pitch | timeshift | both")->capture_default_str();
  curve_cmd->add_option("--window-l", curve.window, "Kernel window L (s)")->capture_default_str();
  curve_cmd->add_option("--delta-t", curve.dt, "Grid step (s)")->capture_default_str();
  curve_cmd->add_option("--out", curve.out, "CSV file (default: stdout)");
  curve_cmd->add_option("--plot", curve.plot, "SVG file");

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate music that follows an IIC curve");
  gen_cmd->add_option("--model", gen.model, "Model file")->required();
  gen_cmd->add_option("--prompt", gen.prompt, "MIDI prompt");
  gen_cmd->add_option("--target-shape", gen.shape.shape,
                      "CONSTANT | RAMP_UP | RAMP_DOWN | STEP_UP | STEP_DOWN");
  gen_cmd->add_option("--target-csv", gen.target_csv, "Target curve CSV");
  gen_cmd->add_option("--low", gen.shape.low, "Low level (default: model level)");
  gen_cmd->add_option("--high", gen.shape.high, "High level (default: model level)");
  gen_cmd->add_option("--step-fraction", gen.shape.step_fraction)->capture_default_str();
  gen_cmd->add_option("--duration", gen.shape.duration, "Seconds to generate")->capture_default_str();
  gen_cmd->add_option("--step-size", gen.step, "Seconds per search iteration")->capture_default_str();
  gen_cmd->add_option("--k", gen.k, "Continuations per iteration")->capture_default_str();
  gen_cmd->add_option("--ch", gen.ch, "Entropy constant, or 'off'")->capture_default_str();
  gen_cmd->add_flag("--h-max-type", gen.h_max_type,
                      "Cap target entropy by the current type's codebook");
  gen_cmd->add_option("--max-tokens-per-step", gen.max_tokens)->capture_default_str();
  gen_cmd->add_option("--window-l", gen.window, "Kernel window L (s)")->capture_default_str();
  gen_cmd->add_option("--delta-t", gen.dt, "Grid step (s)")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();
  gen_cmd->add_option("--plot", gen.plot, "SVG file comparing target and realized IIC");

  AnalyzeOptions an;
  auto* an_cmd = app.add_subcommand("analyze", "Correlate IIC with complexity metrics");
  an_cmd->add_option("--model", an.model, "Model file")->required();
  an_cmd->add_option("--corpus", an.corpus, "Directory of MIDI files")->required();
  an_cmd->add_option("--annotations", an.annotations, "Measure annotation CSV");
  an_cmd->add_option("--out", an.out, "Report CSV")->required();
  an_cmd->add_option("--plot", an.plot, "Directory for SVG plots");
  an_cmd->add_option("--mask", an.mask, "Only this mask: pitch | timeshift | both");
  an_cmd->add_option("--pooling", an.pooling, "pooled | per-piece")->capture_default_str();
  an_cmd->add_option("--max-n", an.max_n, "Largest n")->capture_default_str();
  an_cmd->add_option("--segment-width", an.width, "Onset segment length (s)")->capture_default_str();
  an_cmd->add_option("--window-l", an.window, "Kernel window L (s)")->capture_default_str();
  an_cmd->add_option("--delta-t", an.dt, "Grid step (s)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*train_cmd) return RunTrain(train, out, err);
    if (*curve_cmd) return RunCurve(curve, out);
    if (*gen_cmd) return RunGenerate(gen, out, err);
    if (*an_cmd) return RunAnalyze(an, out, err);
  } catch (const SearchAborted& e) {
    err << "error: search aborted: " << e.what() << "\n";
    return kExitSearch;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"iic"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace iic::cli
