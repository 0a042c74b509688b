// Complexity metrics and their correlation with segment surprisal.
#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iic/curve.h"
#include "iic/iic.h"
#include "iic/midi_io.h"

namespace iic {

// Helix of fifths: radius r, rise h per fifth.
struct SpiralConfig {
  double radius = 1.0;
  double height = std::sqrt(2.0 / 15.0);
};

struct SpiralPoint {
  double x = 0.0, y = 0.0, z = 0.0;
};

// Position on the line of fifths with C = 0: (7 * pc) mod 12.
int FifthsIndex(int pitch_class);
SpiralPoint SpiralPosition(int fifths_index, const SpiralConfig& cfg = {});

// Tonal tension as the largest distance between the spiral positions of the
// distinct pitch classes present. Mod-12 fifths indices are unwrapped across
// the widest gap of the circle (the most compact spelling); when several gaps
// tie, the smallest resulting diameter is used. 0 for fewer than two classes.
double CloudDiameter(std::span<const int> pitch_classes, const SpiralConfig& cfg = {});

// Notes whose onset lies in [center - width/2, center + width/2).
// Throws std::domain_error unless width > 0.
int NoteDensity(const NoteList& notes, double center, double width);

// Shannon entropy of the histogram of distinct IOI values divided by ln K
// (K = number of distinct values); 0 when K = 1.
// Throws std::invalid_argument for an empty input.
double IoiEntropy(std::span<const double> iois);

struct PearsonResult {
  double r = 0.0;
  double p_value = 1.0;  // two-sided, Student t with n - 2 dof
  std::size_t n = 0;
};

// nullopt for fewer than 3 points or a constant column.
std::optional<PearsonResult> Pearson(std::span<const double> x, std::span<const double> y);

struct SegmentPair {
  double metric = 0.0;
  double surprisal = 0.0;
};

enum class Pooling { kPooled, kPerPieceMean };

struct CorrelationPoint {
  int n = 0;
  std::size_t pooled = 0;
  std::optional<double> r;
  std::optional<double> p_value;
};

// For n = 1..n_max, correlates the first min(n, len) segments of every piece.
// kPooled: one Pearson r over all pooled pairs. kPerPieceMean: mean of the
// per-piece r values that are defined (no p-value).
std::vector<CorrelationPoint> CorrelationSeries(
    std::span<const std::vector<SegmentPair>> pieces, int n_max,
    Pooling pooling = Pooling::kPooled);

struct SegmentRecord {
  double t1 = 0.0;
  double t2 = 0.0;
  double metric = 0.0;
  double surprisal = 0.0;
};

struct OnsetSegment {
  double t1 = 0.0;
  double t2 = 0.0;
  double tension = 0.0;
  int density = 0;
  double surprisal = 0.0;
};

// One segment of `width` seconds centred on every distinct onset, clipped to
// the curve. Tension and density use the notes with onset inside the window.
std::vector<OnsetSegment> OnsetSegments(const NoteList& notes, const Curve& iic,
                                        double width = 1.0,
                                        const SpiralConfig& spiral = {});

struct MeasureBoundary {
  int measure_index = 0;
  int first_note = 0;
  int last_note = 0;
};

// One record per measure. A boundary between measures sits at the mean of
// the last onset of one and the first onset of the next; the first measure
// starts at its first onset and the last ends where its notes end. The metric
// is IoiEntropy over the measure's gaps between distinct onsets (quantized to
// the timeshift grid; 0 with a single onset); surprisal is divided by the
// measure length. Zero-length measures are skipped.
// Throws std::invalid_argument for indices outside the note list and
// std::domain_error for non-monotone boundaries.
std::vector<SegmentRecord> MeasureSegments(const NoteList& notes,
                                           std::span<const MeasureBoundary> measures,
                                           const Curve& iic);

// `piece_id,measure_index,first_note_index,last_note_index`, keyed by piece
// and sorted by measure_index. Throws std::runtime_error on malformed input.
std::map<std::string, std::vector<MeasureBoundary>> ParseMeasureAnnotations(
    std::string_view csv);

struct ReportRow {
  int n = 0;
  std::string metric;  // tt | d | he
  TokenMask mask = TokenMask::kBoth;
  std::optional<double> r;
  std::optional<double> p_value;
};

// `n,metric,token_mask,pearson_r,p_value`; undefined values are written NA.
std::string ReportToCsv(std::span<const ReportRow> rows);

}  // namespace iic
