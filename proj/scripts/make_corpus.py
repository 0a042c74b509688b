#!/usr/bin/env python3
"""Regenerates data/corpus/*.mid and data/corpus_measures.csv from the
public-domain scores bundled with music21.

Notes are written as a single format-0 track at 480 ticks per quarter.
Unison doublings are merged and same-pitch overlaps truncated, so the
note indices in the measure annotation match the loader's sorted order.
"""
import argparse
import hashlib
import pathlib
import struct

from music21 import corpus

TPQ = 480


def pieces():
    chorales = [p for p in corpus.getComposer("bach") if p.name.startswith("bwv")]
    chorales.sort(key=lambda p: p.name)
    out = [("chorale_" + p.stem.replace(".", "_"), p) for p in chorales[:40]]
    out.append(("joplin_maple_leaf_rag", corpus.getComposer("joplin")[0]))
    for i, p in enumerate(sorted(corpus.getComposer("mozart"), key=str)[:4]):
        out.append(("mozart_%s_%s" % (p.parent.name, p.stem), p))
    for p in sorted(corpus.getComposer("haydn"), key=str)[:2]:
        out.append(("haydn_%s_%s" % (p.parent.name, p.stem), p))
    return out


def seeded(name, lo, hi):
    h = int(hashlib.sha1(name.encode()).hexdigest()[:8], 16)
    return lo + h % (hi - lo + 1)


def vlq(n):
    buf = [n & 0x7F]
    n >>= 7
    while n:
        buf.append(0x80 | (n & 0x7F))
        n >>= 7
    return bytes(reversed(buf))


def collect(name, path):
    score = corpus.parse(str(path)).stripTies()
    bpm = seeded(name, 66, 112)
    notes = {}
    for part_idx, part in enumerate(score.parts):
        for n in part.flatten().notes:
            m = n.getContextByClass("Measure")
            measure = m.number if m is not None else 0
            pitches = [p.midi for p in n.pitches] if n.isChord else [n.pitch.midi]
            on = int(round(float(n.getOffsetInHierarchy(score)) * TPQ))
            dur = int(round(float(n.duration.quarterLength) * TPQ))
            if dur <= 0:
                continue
            vel = seeded("%s/%d" % (name, part_idx), 60, 90)
            for p in pitches:
                if p < 21 or p > 108:
                    continue
                key = (on, p)
                if key not in notes or notes[key][0] < dur:
                    notes[key] = (dur, vel, measure)
    ordered = sorted(notes.items())
    # Same-pitch overlap: close the earlier note at the later onset.
    last_by_pitch = {}
    events = []
    for (on, p), (dur, vel, measure) in ordered:
        if p in last_by_pitch:
            j = last_by_pitch[p]
            pon, pp, pdur, pvel, pm = events[j]
            if pon + pdur > on:
                events[j] = (pon, pp, on - pon, pvel, pm)
        last_by_pitch[p] = len(events)
        events.append((on, p, dur, vel, measure))
    return bpm, events


def write_midi(path, bpm, events):
    tempo = int(round(60_000_000 / bpm))
    msgs = []
    for on, p, dur, vel, _ in events:
        msgs.append((on + dur, 0, bytes([0x80, p, 0])))
        msgs.append((on, 1, bytes([0x90, p, vel])))
    msgs.sort(key=lambda m: (m[0], m[1], m[2][1]))
    track = bytearray(b"\x00\xff\x51\x03" + tempo.to_bytes(3, "big"))
    now = 0
    for tick, _, data in msgs:
        track += vlq(tick - now) + data
        now = tick
    track += b"\x00\xff\x2f\x00"
    header = b"MThd" + struct.pack(">IHHH", 6, 0, 1, TPQ)
    path.write_bytes(header + b"MTrk" + struct.pack(">I", len(track)) + track)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    (out / "corpus").mkdir(parents=True, exist_ok=True)
    rows = ["piece_id,measure_index,first_note_index,last_note_index"]
    for name, path in pieces():
        bpm, events = collect(name, path)
        events = [e for e in events if e[2] > 0]
        if not events:
            continue
        write_midi(out / "corpus" / (name + ".mid"), bpm, events)
        order = sorted(range(len(events)), key=lambda i: (events[i][0], events[i][1]))
        first, last = {}, {}
        for idx, i in enumerate(order):
            m = events[i][4]
            first.setdefault(m, idx)
            last[m] = idx
        spans = sorted((first[m], last[m], m) for m in first)
        # Keep only measures whose note ranges are contiguous and ordered.
        prev_last = -1
        index = 0
        for f, l, m in spans:
            if f <= prev_last:
                continue
            rows.append("%s,%d,%d,%d" % (name, index, f, l))
            prev_last = l
            index += 1
        print(name, bpm, len(events))
    (out / "corpus_measures.csv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
