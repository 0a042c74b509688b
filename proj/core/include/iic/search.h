// IC-conditioned beam search: repeatedly sample k continuations of the best
// sequence so far and keep the one whose IIC stays closest to the target.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "iic/critic.h"
#include "iic/curve.h"
#include "iic/iic.h"
#include "iic/midi_io.h"
#include "iic/tokenizer.h"

namespace iic {

struct SearchParams {
  double step = 0.3;  // t', seconds of new material per iteration
  int k = 128;        // continuations sampled per iteration
  // Entropy constant for generator temperature; nullopt disables it.
  std::optional<double> c_h = 50.0;
  double duration = 10.0;  // T
  int max_tokens_per_step = 64;
  std::uint64_t seed = 0;
  // Use ln(type codebook size) instead of ln(vocab size) as H_max.
  bool h_max_type_subset = false;
  int threads = 1;  // scheduling only; results do not depend on it

  // Throws std::domain_error on step <= 0, k < 1, duration <= 0,
  // c_h <= 0, max_tokens_per_step < 4 or threads < 1.
  void Validate() const;
};

// The retained hypothesis. Times in `events` are on the generation clock:
// zero is the onset of the first generated note.
struct BeamState {
  std::vector<TokenId> context;  // prompt then generated tokens
  std::size_t prompt_tokens = 0;
  std::vector<double> ics;       // critic IC of every context token
  std::vector<LocalizedIc> events;  // prompt tail + generated tokens
  double origin = 0.0;           // prompt time of the generation clock's zero
  double generated_duration = 0.0;
  Curve realized;                // IIC on [0, horizon]
  double horizon = 0.0;
  double deviation = 0.0;        // IcDeviation(target, realized, horizon)
  bool truncated = false;        // hit max_tokens_per_step without advancing t'
  // Entropy of the generator distribution each token of the last step was
  // drawn from (after temperature).
  std::vector<double> step_entropies;

  TokenSeq Generated() const;
  // Generated notes with onset < t_max.
  NoteList GeneratedNotes(double t_max) const;
};

class SearchAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scores the prompt with the critic and keeps the part of it that can still
// reach t >= 0 through the kernel. Throws TokenStructureError for a
// malformed prompt.
BeamState InitialState(const TokenSeq& prompt, const CriticModel& p,
                       const KernelConfig& cfg);

// Appends tokens (continuing the type cycle) scored by the critic.
BeamState AppendTokens(const BeamState& state, std::span<const TokenId> tokens,
                       const CriticModel& p);

// Recomputes the realized IIC on [0, horizon] and the deviation from target.
void Evaluate(BeamState& state, const Curve& target, const KernelConfig& cfg,
              double horizon);

// Seed of candidate `index` in iteration `iter`; independent of k.
std::uint64_t CandidateSeed(std::uint64_t seed, int iter, int index);

// k candidates, each extending `state` by whole note groups drawn from q until
// the new material lasts longer than params.step. With params.c_h set, q is
// tempered to entropy min(target(iter * step) / c_h, H_max).
// Throws std::logic_error if q breaks the token cycle.
std::vector<BeamState> ExpandStep(const BeamState& state, const SearchParams& params,
                                  const CriticModel& q, const CriticModel& p,
                                  const Curve& target, int iter);

// Evaluates every candidate at `horizon` and returns the index of the lowest
// deviation among non-truncated candidates; ties go to the lowest index.
// Throws std::invalid_argument for no candidates and SearchAborted when all
// are truncated.
std::size_t SelectBest(std::span<BeamState> candidates, const Curve& target,
                       const KernelConfig& cfg, double horizon);

struct RunManifest {
  std::vector<std::pair<std::string, std::string>> entries;

  void Set(const std::string& key, const std::string& value);
  void Set(const std::string& key, double value);
  std::optional<std::string> Get(const std::string& key) const;
  // key=value lines in insertion order.
  std::string ToString() const;
};

struct GenerationResult {
  NoteList notes;    // onset < T, generation clock
  Curve realized;    // IIC on [0, T]
  double deviation = 0.0;
  int iterations = 0;
  int truncated_candidates = 0;
  BeamState final_state;
  RunManifest manifest;
};

// Runs the search until the generated material lasts at least T.
// Throws std::invalid_argument if the target is shorter than T, and
// SearchAborted if every candidate of an iteration is truncated.
GenerationResult Generate(const NoteList& prompt, const Curve& target,
                          const CriticModel& q, const CriticModel& p,
                          const KernelConfig& cfg, const SearchParams& params);

}  // namespace iic
