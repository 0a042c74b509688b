#include "iic/search.h"

#include <cmath>
#include <cstdio>
#include <exception>
#include <random>
#include <thread>

namespace iic {

void SearchParams::Validate() const {
  if (!(step > 0.0)) throw std::domain_error("step size must be positive");
  if (k < 1) throw std::domain_error("k must be at least 1");
  if (!(duration > 0.0)) throw std::domain_error("duration must be positive");
  if (c_h && !(*c_h > 0.0)) throw std::domain_error("C_H must be positive");
  if (max_tokens_per_step < kTokensPerNote)
    throw std::domain_error("max_tokens_per_step must allow one note group");
  if (threads < 1) throw std::domain_error("threads must be at least 1");
}

TokenSeq BeamState::Generated() const {
  return TokenSeq::FromIds(std::span<const TokenId>(context).subspan(prompt_tokens));
}

NoteList BeamState::GeneratedNotes(double t_max) const {
  NoteList notes = Detokenize(Generated());
  std::erase_if(notes, [&](const NoteEvent& n) { return n.onset >= t_max; });
  return notes;
}

BeamState InitialState(const TokenSeq& prompt, const CriticModel& p,
                       const KernelConfig& cfg) {
  cfg.Validate();
  ValidateTokenSeq(prompt.tokens());
  BeamState s;
  s.context = prompt.ids();
  s.prompt_tokens = s.context.size();
  if (!s.context.empty()) {
    s.ics = TokenIc(p, s.context);
    const auto times = LocalizeAll(prompt);
    s.origin = times.back();
    for (std::size_t i = 0; i < prompt.size(); ++i) {
      const double t = times[i] - s.origin;
      if (t > -0.5 * cfg.window) s.events.push_back({t, prompt[i].type, s.ics[i]});
    }
  }
  s.realized = Curve{0.0, cfg.dt, {0.0}};
  return s;
}

namespace {

void AppendOne(BeamState& s, TokenId id, double ic) {
  const Token tok = FromId(id);
  if (tok.type == TokenType::kTimeshift)
    s.generated_duration += QuantGrid::Timeshift()[static_cast<std::size_t>(tok.value)];
  s.context.push_back(id);
  s.ics.push_back(ic);
  s.events.push_back({s.generated_duration, tok.type, ic});
}

void CheckCycle(const BeamState& s, TokenId id, int vocab) {
  if (id < 0 || id >= vocab || FromId(id).type != TypeAt(s.context.size()))
    throw std::logic_error("generator broke the Pitch/Velocity/Duration/Timeshift cycle at token " +
                           std::to_string(s.context.size()));
}

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

TokenId Sample(std::span<const double> dist, double u) {
  double cum = 0.0;
  TokenId last = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    cum += dist[i];
    last = static_cast<TokenId>(i);
    if (u < cum) return last;
  }
  if (last < 0) throw std::logic_error("generator produced an empty distribution");
  return last;
}

BeamState SampleContinuation(const BeamState& state, const SearchParams& params,
                             const CriticModel& q, const CriticModel& p,
                             std::optional<double> ic_star, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BeamState s = state;
  s.step_entropies.clear();
  s.truncated = false;
  const double start = s.generated_duration;
  int emitted = 0;
  const double h_max_full = std::log(static_cast<double>(q.vocab_size()));
  while (true) {
    for (int t = 0; t < kTokensPerNote; ++t) {
      Distribution d = q.NextDist(s.context);
      if (ic_star) {
        const TokenType type = TypeAt(s.context.size());
        const double h_max = params.h_max_type_subset
                                 ? std::log(static_cast<double>(TypeVocabSize(type)))
                                 : h_max_full;
        const auto match = MatchEntropy(d, TargetEntropy(*ic_star, *params.c_h, h_max));
        d = ApplyTemperature(d, match.temperature);
        s.step_entropies.push_back(match.entropy);
      } else {
        s.step_entropies.push_back(Entropy(d));
      }
      const TokenId id = Sample(d, Uniform01(rng));
      CheckCycle(s, id, q.vocab_size());
      AppendOne(s, id, -std::log(p.Prob(s.context, id)));
    }
    emitted += kTokensPerNote;
    if (s.generated_duration - start > params.step) break;
    if (emitted + kTokensPerNote > params.max_tokens_per_step) {
      s.truncated = true;
      break;
    }
  }
  return s;
}

}  // namespace

BeamState AppendTokens(const BeamState& state, std::span<const TokenId> tokens,
                       const CriticModel& p) {
  BeamState s = state;
  for (TokenId id : tokens) {
    CheckCycle(s, id, p.vocab_size());
    AppendOne(s, id, -std::log(p.Prob(s.context, id)));
  }
  return s;
}

void Evaluate(BeamState& state, const Curve& target, const KernelConfig& cfg,
              double horizon) {
  state.realized = IicOnGrid(state.events, cfg, 0.0, GridPoints(horizon, cfg.dt));
  state.horizon = horizon;
  state.deviation = IcDeviation(target, state.realized, horizon);
}

std::uint64_t CandidateSeed(std::uint64_t seed, int iter, int index) {
  std::uint64_t h = SplitMix(seed);
  h = SplitMix(h ^ static_cast<std::uint64_t>(iter));
  return SplitMix(h ^ (static_cast<std::uint64_t>(index) << 32));
}

std::vector<BeamState> ExpandStep(const BeamState& state, const SearchParams& params,
                                  const CriticModel& q, const CriticModel& p,
                                  const Curve& target, int iter) {
  params.Validate();
  if (iter < 1) throw std::invalid_argument("iterations are numbered from 1");
  if (q.vocab_size() != kVocabSize || p.vocab_size() != kVocabSize)
    throw std::invalid_argument("search needs models over the structured vocabulary");
  std::optional<double> ic_star;
  if (params.c_h) ic_star = target.ValueAt(iter * params.step);

  const int k = params.k;
  std::vector<BeamState> out(static_cast<std::size_t>(k));
  const int workers = std::min(params.threads, k);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  auto work = [&](int w) {
    try {
      for (int j = w; j < k; j += workers)
        out[static_cast<std::size_t>(j)] = SampleContinuation(
            state, params, q, p, ic_star, CandidateSeed(params.seed, iter, j));
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

std::size_t SelectBest(std::span<BeamState> candidates, const Curve& target,
                       const KernelConfig& cfg, double horizon) {
  if (candidates.empty()) throw std::invalid_argument("no candidates to select from");
  std::optional<std::size_t> best;
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    auto& c = candidates[j];
    if (c.truncated) continue;
    Evaluate(c, target, cfg, horizon);
    if (!best || c.deviation < candidates[*best].deviation) best = j;
  }
  if (!best)
    throw SearchAborted("all " + std::to_string(candidates.size()) +
                        " candidates exceeded max_tokens_per_step without advancing");
  return *best;
}

void RunManifest::Set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : entries)
    if (k == key) {
      v = value;
      return;
    }
  entries.emplace_back(key, value);
}

void RunManifest::Set(const std::string& key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  Set(key, std::string(buf));
}

std::optional<std::string> RunManifest::Get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  return std::nullopt;
}

std::string RunManifest::ToString() const {
  std::string out;
  for (const auto& [k, v] : entries) out += k + "=" + v + "\n";
  return out;
}

GenerationResult Generate(const NoteList& prompt, const Curve& target,
                          const CriticModel& q, const CriticModel& p,
                          const KernelConfig& cfg, const SearchParams& params) {
  params.Validate();
  cfg.Validate();
  const double slack = 1e-9 * cfg.dt;
  if (target.values.empty() || target.EndTime() + slack < params.duration)
    throw std::invalid_argument("target curve is shorter than the requested duration");

  GenerationResult result;
  BeamState state = InitialState(Tokenize(prompt), p, cfg);
  int iter = 0;
  while (state.generated_duration < params.duration) {
    ++iter;
    const double horizon = std::min(iter * params.step, params.duration);
    auto candidates = ExpandStep(state, params, q, p, target, iter);
    for (const auto& c : candidates) result.truncated_candidates += c.truncated ? 1 : 0;
    const std::size_t best = SelectBest(candidates, target, cfg, horizon);
    state = std::move(candidates[best]);
  }
  Evaluate(state, target, cfg, params.duration);

  result.iterations = iter;
  result.notes = state.GeneratedNotes(params.duration);
  result.realized = state.realized;
  result.deviation = state.deviation;

  auto& m = result.manifest;
  m.Set("format", "iic-run-manifest/1");
  m.Set("critic", p.Identifier());
  m.Set("generator", q.Identifier());
  m.Set("prompt_tokens", std::to_string(state.prompt_tokens));
  m.Set("duration", params.duration);
  m.Set("step_size", params.step);
  m.Set("k", std::to_string(params.k));
  if (params.c_h) {
    m.Set("ch", *params.c_h);
  } else {
    m.Set("ch", "off");
  }
  m.Set("h_max", params.h_max_type_subset ? "type-subset" : "full-vocab");
  m.Set("max_tokens_per_step", std::to_string(params.max_tokens_per_step));
  m.Set("delta_t", cfg.dt);
  m.Set("window_l", cfg.window);
  m.Set("c_pitch", cfg.c_pitch);
  m.Set("c_timeshift", cfg.c_timeshift);
  m.Set("seed", std::to_string(params.seed));
  m.Set("iterations", std::to_string(iter));
  m.Set("truncated_candidates", std::to_string(result.truncated_candidates));
  m.Set("notes", std::to_string(result.notes.size()));
  m.Set("generated_duration", state.generated_duration);
  m.Set("final_deviation", result.deviation);
  result.final_state = std::move(state);
  return result;
}

}  // namespace iic
