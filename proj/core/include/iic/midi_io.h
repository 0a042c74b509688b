// Standard MIDI File reading/writing and conversion to note lists in seconds.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace iic {

inline constexpr int kLowestPianoPitch = 21;
inline constexpr int kHighestPianoPitch = 108;
inline constexpr int kTicksPerQuarter = 480;
inline constexpr int kDefaultTempo = 500000;  // µs per quarter note

// A performed note. Times are in seconds.
struct NoteEvent {
  double onset = 0.0;
  int pitch = 60;
  int velocity = 64;
  double duration = 0.0;

  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

// Sorted by (onset, pitch).
using NoteList = std::vector<NoteEvent>;

void SortNotes(NoteList& notes);
bool IsSortedNoteList(const NoteList& notes);

class MidiParseError : public std::runtime_error {
 public:
  MidiParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct MidiLoadResult {
  NoteList notes;
  int dropped_out_of_range = 0;
  // Note-ons still open at the end of their track; closed there.
  int dangling_note_ons = 0;
  int dropped_zero_length = 0;
};

// Parses an SMF (format 0 or 1). Tempo changes from every track form one
// tempo map. Throws MidiParseError on malformed chunks.
MidiLoadResult LoadMidi(std::span<const std::uint8_t> bytes);
MidiLoadResult LoadMidiFile(const std::filesystem::path& path);

// Writes a format-0 file at kTicksPerQuarter with a single tempo. A note
// overlapping a later note of the same pitch is cut at the later onset, which
// is how LoadMidi resolves such overlaps anyway.
std::vector<std::uint8_t> SaveMidi(const NoteList& notes,
                                   int tempo_us_per_quarter = kDefaultTempo);
void SaveMidiFile(const std::filesystem::path& path, const NoteList& notes,
                  int tempo_us_per_quarter = kDefaultTempo);

}  // namespace iic
