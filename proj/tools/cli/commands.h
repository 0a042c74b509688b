// The `iic` command line: train, curve, generate, analyze.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "iic/analysis.h"
#include "iic/iic.h"
#include "iic/midi_io.h"

namespace iic::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSearch = 3;

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct CorpusPiece {
  std::string id;  // file stem
  NoteList notes;
};

// *.mid / *.midi files in name order; unreadable ones are reported on `err`
// and skipped.
std::vector<CorpusPiece> LoadCorpusDir(const std::filesystem::path& dir, std::ostream& err);

// Segment pairs of one metric under one token mask, per piece.
struct MetricSeries {
  std::string metric;  // tt | d | he
  TokenMask mask = TokenMask::kBoth;
  std::vector<std::vector<SegmentPair>> pieces;
};

// Rows ordered by series then n.
std::vector<ReportRow> BuildReport(std::span<const MetricSeries> series, int n_max,
                                   Pooling pooling);

}  // namespace iic::cli
