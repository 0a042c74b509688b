#include "iic/midi_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <tuple>

#include "iic/bytes.h"

namespace iic {

MidiParseError::MidiParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte " + std::to_string(offset)),
      offset_(offset) {}

void SortNotes(NoteList& notes) {
  std::stable_sort(notes.begin(), notes.end(),
                   [](const NoteEvent& a, const NoteEvent& b) {
                     return std::tie(a.onset, a.pitch) <
                            std::tie(b.onset, b.pitch);
                   });
}

bool IsSortedNoteList(const NoteList& notes) {
  return std::is_sorted(notes.begin(), notes.end(),
                        [](const NoteEvent& a, const NoteEvent& b) {
                          return std::tie(a.onset, a.pitch) <
                                 std::tie(b.onset, b.pitch);
                        });
}

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes, std::size_t base = 0)
      : bytes_(bytes), base_(base) {}

  // Absolute offset within the file.
  std::size_t pos() const { return base_ + pos_; }
  bool done() const { return pos_ >= bytes_.size(); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t U8() {
    Need(1);
    return bytes_[pos_++];
  }
  std::uint8_t Peek() {
    Need(1);
    return bytes_[pos_];
  }
  std::uint32_t BigEndian(int n) {
    Need(static_cast<std::size_t>(n));
    std::uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 8) | bytes_[pos_++];
    return v;
  }
  std::uint32_t VarLen() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      std::uint8_t b = U8();
      v = (v << 7) | (b & 0x7F);
      if (!(b & 0x80)) return v;
    }
    throw MidiParseError("variable-length quantity longer than 4 bytes", pos());
  }
  void Skip(std::size_t n) {
    Need(n);
    pos_ += n;
  }
  std::span<const std::uint8_t> Take(std::size_t n) {
    Need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void Need(std::size_t n) const {
    if (bytes_.size() - pos_ < n)
      throw MidiParseError("unexpected end of data", pos());
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

struct RawNoteEvent {
  std::uint64_t tick;
  bool on;
  int pitch;
  int velocity;
  int track;
  std::size_t order;
};

struct TempoChange {
  std::uint64_t tick;
  std::uint32_t tempo;
};

struct ParsedTrack {
  std::vector<RawNoteEvent> notes;
  std::uint64_t end_tick = 0;
};

ParsedTrack ParseTrack(std::span<const std::uint8_t> data, std::size_t base,
                       int track, std::vector<TempoChange>& tempi) {
  Reader r(data, base);
  ParsedTrack out;
  std::uint64_t tick = 0;
  std::uint8_t running = 0;
  std::size_t order = 0;
  while (!r.done()) {
    tick += r.VarLen();
    std::uint8_t status = r.Peek();
    if (status & 0x80) {
      r.U8();
    } else {
      if (running == 0)
        throw MidiParseError("data byte without running status",
                             r.pos());
      status = running;
    }
    if (status == 0xFF) {
      std::uint8_t type = r.U8();
      std::uint32_t len = r.VarLen();
      auto payload = r.Take(len);
      if (type == 0x51 && len == 3) {
        tempi.push_back({tick, (std::uint32_t{payload[0]} << 16) |
                                   (std::uint32_t{payload[1]} << 8) |
                                   payload[2]});
      } else if (type == 0x2F) {
        break;
      }
      running = 0;
      continue;
    }
    if (status == 0xF0 || status == 0xF7) {
      r.Skip(r.VarLen());
      running = 0;
      continue;
    }
    if (status >= 0xF0)
      throw MidiParseError("unsupported system message", r.pos() - 1);
    running = status;
    const std::uint8_t kind = status & 0xF0;
    const bool two_bytes = kind != 0xC0 && kind != 0xD0;
    const int d1 = r.U8() & 0x7F;
    const int d2 = two_bytes ? (r.U8() & 0x7F) : 0;
    if (kind == 0x90 && d2 > 0) {
      out.notes.push_back({tick, true, d1, d2, track, order++});
    } else if (kind == 0x80 || kind == 0x90) {
      out.notes.push_back({tick, false, d1, 0, track, order++});
    }
  }
  out.end_tick = tick;
  return out;
}

class TempoMap {
 public:
  TempoMap(std::vector<TempoChange> changes, int division)
      : division_(division) {
    std::stable_sort(changes.begin(), changes.end(),
                     [](const TempoChange& a, const TempoChange& b) {
                       return a.tick < b.tick;
                     });
    segments_.push_back({0, kDefaultTempo, 0.0});
    for (const auto& c : changes) {
      auto& last = segments_.back();
      if (c.tick == last.tick) {
        last.tempo = c.tempo;
        continue;
      }
      double start = last.seconds + SecondsFor(c.tick - last.tick, last.tempo);
      segments_.push_back({c.tick, c.tempo, start});
    }
  }

  double Seconds(std::uint64_t tick) const {
    auto it = std::upper_bound(
        segments_.begin(), segments_.end(), tick,
        [](std::uint64_t t, const Segment& s) { return t < s.tick; });
    const Segment& s = *std::prev(it);
    return s.seconds + SecondsFor(tick - s.tick, s.tempo);
  }

 private:
  struct Segment {
    std::uint64_t tick;
    std::uint32_t tempo;
    double seconds;
  };

  double SecondsFor(std::uint64_t ticks, std::uint32_t tempo) const {
    if (division_ < 0) {
      // SMPTE: high byte is -frames per second, low byte ticks per frame.
      const int fps = -(division_ >> 8);
      const int tpf = division_ & 0xFF;
      return static_cast<double>(ticks) / (fps * tpf);
    }
    return static_cast<double>(ticks) * tempo / (1e6 * division_);
  }

  int division_;
  std::vector<Segment> segments_;
};

}  // namespace

MidiLoadResult LoadMidi(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  static constexpr std::uint8_t kHeaderTag[] = {'M', 'T', 'h', 'd'};
  if (bytes.size() < 14 ||
      !std::equal(bytes.begin(), bytes.begin() + 4, std::begin(kHeaderTag)))
    throw MidiParseError("missing MThd header", 0);
  r.Skip(4);
  const std::uint32_t header_len = r.BigEndian(4);
  if (header_len < 6) throw MidiParseError("header chunk too short", 4);
  const std::uint32_t format = r.BigEndian(2);
  const std::uint32_t ntracks = r.BigEndian(2);
  const std::uint32_t raw_division = r.BigEndian(2);
  r.Skip(header_len - 6);
  if (format > 1) throw MidiParseError("unsupported SMF format", 8);
  int division = static_cast<std::int16_t>(raw_division);
  if (division == 0) throw MidiParseError("zero time division", 12);
  if (division < 0 && (-(division >> 8) <= 0 || (division & 0xFF) == 0))
    throw MidiParseError("invalid SMPTE division", 12);

  std::vector<TempoChange> tempi;
  std::vector<ParsedTrack> tracks;
  while (tracks.size() < ntracks) {
    const std::size_t chunk_start = r.pos();
    if (r.remaining() < 8) throw MidiParseError("missing track chunk", chunk_start);
    auto tag = r.Take(4);
    const std::uint32_t len = r.BigEndian(4);
    if (len > r.remaining())
      throw MidiParseError("track chunk length exceeds file", chunk_start + 4);
    auto data = r.Take(len);
    static constexpr std::uint8_t kTrackTag[] = {'M', 'T', 'r', 'k'};
    if (!std::equal(tag.begin(), tag.end(), std::begin(kTrackTag)))
      continue;  // unknown chunk types are skipped
    tracks.push_back(ParseTrack(data, chunk_start + 8,
                                static_cast<int>(tracks.size()), tempi));
  }

  const TempoMap tempo_map(std::move(tempi), division);
  MidiLoadResult result;

  std::vector<RawNoteEvent> events;
  std::vector<std::uint64_t> track_end;
  for (const auto& tr : tracks) {
    events.insert(events.end(), tr.notes.begin(), tr.notes.end());
    track_end.push_back(tr.end_tick);
  }
  // Offs before ons at equal ticks so back-to-back repeats stay separate.
  std::stable_sort(events.begin(), events.end(),
                   [](const RawNoteEvent& a, const RawNoteEvent& b) {
                     return std::tie(a.tick, a.on, a.track, a.order) <
                            std::tie(b.tick, b.on, b.track, b.order);
                   });

  struct Open {
    std::uint64_t tick;
    int velocity;
    int track;
  };
  std::array<std::optional<Open>, 128> open{};
  auto emit = [&](int pitch, const Open& o, std::uint64_t end_tick) {
    if (pitch < kLowestPianoPitch || pitch > kHighestPianoPitch) {
      ++result.dropped_out_of_range;
      return;
    }
    if (end_tick <= o.tick) {
      ++result.dropped_zero_length;
      return;
    }
    const double on = tempo_map.Seconds(o.tick);
    result.notes.push_back(
        {on, pitch, o.velocity, tempo_map.Seconds(end_tick) - on});
  };

  for (const auto& e : events) {
    auto& slot = open[static_cast<std::size_t>(e.pitch)];
    if (!e.on) {
      if (slot) {
        emit(e.pitch, *slot, e.tick);
        slot.reset();
      }
      continue;
    }
    if (slot) emit(e.pitch, *slot, e.tick);
    slot = Open{e.tick, e.velocity, e.track};
  }
  for (int pitch = 0; pitch < 128; ++pitch) {
    const auto& slot = open[static_cast<std::size_t>(pitch)];
    if (!slot) continue;
    ++result.dangling_note_ons;
    emit(pitch, *slot, track_end[static_cast<std::size_t>(slot->track)]);
  }
  SortNotes(result.notes);
  return result;
}

MidiLoadResult LoadMidiFile(const std::filesystem::path& path) {
  return LoadMidi(ReadFileBytes(path));
}

namespace {

void PutBigEndian(std::vector<std::uint8_t>& out, std::uint32_t v, int n) {
  for (int i = n - 1; i >= 0; --i) out.push_back((v >> (8 * i)) & 0xFF);
}

void PutVarLen(std::vector<std::uint8_t>& out, std::uint32_t v) {
  std::uint8_t buf[5];
  int n = 0;
  buf[n++] = v & 0x7F;
  while (v >>= 7) buf[n++] = 0x80 | (v & 0x7F);
  while (n) out.push_back(buf[--n]);
}

}  // namespace

std::vector<std::uint8_t> SaveMidi(const NoteList& notes,
                                   int tempo_us_per_quarter) {
  if (tempo_us_per_quarter <= 0 || tempo_us_per_quarter > 0xFFFFFF)
    throw std::invalid_argument("tempo out of range");
  const double ticks_per_second =
      kTicksPerQuarter * 1e6 / tempo_us_per_quarter;
  auto to_tick = [&](double s) {
    return static_cast<std::uint64_t>(std::llround(std::max(0.0, s) * ticks_per_second));
  };

  struct Out {
    std::uint64_t tick;
    bool on;
    int pitch;
    int velocity;
  };
  NoteList sorted = notes;
  SortNotes(sorted);
  std::vector<Out> events;
  std::map<int, std::size_t> last_on;  // pitch -> index into events (off)
  for (const auto& n : sorted) {
    const std::uint64_t on = to_tick(n.onset);
    std::uint64_t off = std::max(on + 1, to_tick(n.onset + n.duration));
    if (auto it = last_on.find(n.pitch); it != last_on.end()) {
      auto& prev_off = events[it->second];
      if (prev_off.tick > on) prev_off.tick = on;
    }
    events.push_back({on, true, n.pitch, std::clamp(n.velocity, 1, 127)});
    events.push_back({off, false, n.pitch, 0});
    last_on[n.pitch] = events.size() - 1;
  }
  std::stable_sort(events.begin(), events.end(), [](const Out& a, const Out& b) {
    return std::tie(a.tick, a.on, a.pitch) < std::tie(b.tick, b.on, b.pitch);
  });

  std::vector<std::uint8_t> track;
  track.insert(track.end(), {0x00, 0xFF, 0x51, 0x03});
  PutBigEndian(track, static_cast<std::uint32_t>(tempo_us_per_quarter), 3);
  std::uint64_t now = 0;
  for (const auto& e : events) {
    PutVarLen(track, static_cast<std::uint32_t>(e.tick - now));
    now = e.tick;
    track.push_back(e.on ? 0x90 : 0x80);
    track.push_back(static_cast<std::uint8_t>(e.pitch));
    track.push_back(static_cast<std::uint8_t>(e.velocity));
  }
  track.insert(track.end(), {0x00, 0xFF, 0x2F, 0x00});

  std::vector<std::uint8_t> out{'M', 'T', 'h', 'd'};
  PutBigEndian(out, 6, 4);
  PutBigEndian(out, 0, 2);
  PutBigEndian(out, 1, 2);
  PutBigEndian(out, kTicksPerQuarter, 2);
  out.insert(out.end(), {'M', 'T', 'r', 'k'});
  PutBigEndian(out, static_cast<std::uint32_t>(track.size()), 4);
  out.insert(out.end(), track.begin(), track.end());
  return out;
}

void SaveMidiFile(const std::filesystem::path& path, const NoteList& notes,
                  int tempo_us_per_quarter) {
  WriteFileBytes(path, SaveMidi(notes, tempo_us_per_quarter));
}

}  // namespace iic
