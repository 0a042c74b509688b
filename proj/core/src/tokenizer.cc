#include "iic/tokenizer.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace iic {

const char* TypeName(TokenType type) {
  switch (type) {
    case TokenType::kPitch: return "Pitch";
    case TokenType::kVelocity: return "Velocity";
    case TokenType::kDuration: return "Duration";
    case TokenType::kTimeshift: return "Timeshift";
  }
  return "?";
}

TokenId ToId(Token token) { return TypeOffset(token.type) + token.value; }

Token FromId(TokenId id) {
  if (id < 0 || id >= kVocabSize)
    throw std::out_of_range("token id " + std::to_string(id) + " outside the vocabulary");
  for (auto type : {TokenType::kTimeshift, TokenType::kDuration,
                    TokenType::kVelocity, TokenType::kPitch}) {
    if (id >= TypeOffset(type)) return {type, id - TypeOffset(type)};
  }
  return {TokenType::kPitch, id};
}

std::vector<TokenId> TokenSeq::ids() const {
  std::vector<TokenId> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(ToId(t));
  return out;
}

TokenSeq TokenSeq::FromIds(std::span<const TokenId> ids) {
  std::vector<Token> tokens;
  tokens.reserve(ids.size());
  for (TokenId id : ids) tokens.push_back(FromId(id));
  return TokenSeq(std::move(tokens));
}

namespace {

std::vector<double> DurationCenters() {
  std::vector<double> c;
  for (int i = 1; i <= 50; ++i) c.push_back(i * 2 / 100.0);
  for (int i = 11; i <= 50; ++i) c.push_back(i / 10.0);
  for (int i = 6; i <= 19; ++i) c.push_back(static_cast<double>(i));
  return c;
}

}  // namespace

QuantGrid::QuantGrid(std::vector<double> centers) : centers_(std::move(centers)) {}

const QuantGrid& QuantGrid::Duration() {
  static const QuantGrid grid(DurationCenters());
  return grid;
}

const QuantGrid& QuantGrid::Timeshift() {
  static const QuantGrid grid = [] {
    auto c = DurationCenters();
    c.insert(c.begin(), 0.0);
    return QuantGrid(std::move(c));
  }();
  return grid;
}

int QuantGrid::Quantize(double seconds) const {
  if (!(seconds >= 0.0)) throw std::domain_error("cannot quantize a negative time");
  auto it = std::lower_bound(centers_.begin(), centers_.end(), seconds);
  if (it == centers_.end()) return static_cast<int>(centers_.size()) - 1;
  if (it == centers_.begin()) return 0;
  const auto upper = static_cast<int>(it - centers_.begin());
  const double mid = 0.5 * (centers_[upper - 1] + centers_[upper]);
  return seconds >= mid ? upper : upper - 1;
}

TokenStructureError::TokenStructureError(const std::string& what,
                                         std::size_t index)
    : std::runtime_error(what + " at token " + std::to_string(index)),
      index_(index) {}

TokenSeq Tokenize(const NoteList& notes) {
  const auto& durations = QuantGrid::Duration();
  const auto& shifts = QuantGrid::Timeshift();
  std::vector<Token> out;
  out.reserve(notes.size() * kTokensPerNote);
  for (std::size_t i = 0; i < notes.size(); ++i) {
    const auto& n = notes[i];
    const double ioi = i + 1 < notes.size() ? notes[i + 1].onset - n.onset : 0.0;
    out.push_back({TokenType::kPitch, n.pitch - kLowestPianoPitch});
    out.push_back({TokenType::kVelocity, n.velocity});
    out.push_back({TokenType::kDuration, durations.Quantize(n.duration)});
    out.push_back({TokenType::kTimeshift, shifts.Quantize(std::max(0.0, ioi))});
  }
  return TokenSeq(std::move(out));
}

void ValidateTokenSeq(std::span<const Token> tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto expected = TypeAt(i);
    if (tokens[i].type != expected)
      throw TokenStructureError(std::string("expected ") + TypeName(expected) +
                                    " token, found " + TypeName(tokens[i].type),
                                i);
    if (tokens[i].value < 0 || tokens[i].value >= TypeVocabSize(expected))
      throw TokenStructureError("token value outside its codebook", i);
  }
  if (tokens.size() % kTokensPerNote != 0)
    throw TokenStructureError("incomplete note group", tokens.size());
}

NoteList Detokenize(const TokenSeq& seq) {
  ValidateTokenSeq(seq.tokens());
  const auto& durations = QuantGrid::Duration();
  const auto& shifts = QuantGrid::Timeshift();
  NoteList notes;
  notes.reserve(seq.note_count());
  double onset = 0.0;
  for (std::size_t i = 0; i < seq.size(); i += kTokensPerNote) {
    NoteEvent n;
    n.onset = onset;
    n.pitch = seq[i].value + kLowestPianoPitch;
    n.velocity = seq[i + 1].value;
    n.duration = durations[static_cast<std::size_t>(seq[i + 2].value)];
    notes.push_back(n);
    onset += shifts[static_cast<std::size_t>(seq[i + 3].value)];
  }
  SortNotes(notes);
  return notes;
}

std::vector<double> LocalizeAll(std::span<const Token> tokens) {
  const auto& shifts = QuantGrid::Timeshift();
  std::vector<double> times(tokens.size());
  double onset = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].type == TokenType::kTimeshift) {
      const auto v = static_cast<std::size_t>(
          std::clamp(tokens[i].value, 0, kTimeshiftVocab - 1));
      onset += shifts[v];
    }
    times[i] = onset;
  }
  return times;
}

std::vector<double> LocalizeAll(const TokenSeq& seq) {
  return LocalizeAll(seq.tokens());
}

double Localize(std::size_t i, const TokenSeq& seq) {
  if (i >= seq.size()) throw std::out_of_range("token index out of range");
  return LocalizeAll(std::span<const Token>(seq.tokens()).first(i + 1)).back();
}

}  // namespace iic
