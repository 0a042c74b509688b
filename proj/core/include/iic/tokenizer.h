// Structured note encoding: every note becomes Pitch, Velocity, Duration,
// Timeshift tokens, with durations and inter-onset intervals snapped to fixed
// grids.
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "iic/midi_io.h"

namespace iic {

enum class TokenType : std::uint8_t { kPitch = 0, kVelocity, kDuration, kTimeshift };

inline constexpr int kTokensPerNote = 4;
inline constexpr int kPitchVocab = 88;
inline constexpr int kVelocityVocab = 128;
inline constexpr int kDurationVocab = 104;
inline constexpr int kTimeshiftVocab = 105;
inline constexpr int kVocabSize =
    kPitchVocab + kVelocityVocab + kDurationVocab + kTimeshiftVocab;

// Flat id over the joint vocabulary; the ranges of the four types follow each
// other in cycle order.
using TokenId = std::int32_t;

constexpr int TypeVocabSize(TokenType type) {
  switch (type) {
    case TokenType::kPitch: return kPitchVocab;
    case TokenType::kVelocity: return kVelocityVocab;
    case TokenType::kDuration: return kDurationVocab;
    case TokenType::kTimeshift: return kTimeshiftVocab;
  }
  return 0;
}

constexpr TokenId TypeOffset(TokenType type) {
  switch (type) {
    case TokenType::kPitch: return 0;
    case TokenType::kVelocity: return kPitchVocab;
    case TokenType::kDuration: return kPitchVocab + kVelocityVocab;
    case TokenType::kTimeshift: return kPitchVocab + kVelocityVocab + kDurationVocab;
  }
  return 0;
}

// Type dictated by the cycle at a position in a well-formed sequence.
constexpr TokenType TypeAt(std::size_t index) {
  return static_cast<TokenType>(index % kTokensPerNote);
}

const char* TypeName(TokenType type);

struct Token {
  TokenType type = TokenType::kPitch;
  int value = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

TokenId ToId(Token token);
// Throws std::out_of_range outside [0, kVocabSize).
Token FromId(TokenId id);

class TokenSeq {
 public:
  TokenSeq() = default;
  explicit TokenSeq(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  const std::vector<Token>& tokens() const { return tokens_; }
  std::vector<Token>& tokens() { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  std::size_t note_count() const { return tokens_.size() / kTokensPerNote; }
  const Token& operator[](std::size_t i) const { return tokens_[i]; }

  std::vector<TokenId> ids() const;
  static TokenSeq FromIds(std::span<const TokenId> ids);

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;

 private:
  std::vector<Token> tokens_;
};

// Ordered bin centres in seconds.
class QuantGrid {
 public:
  // {0.02, 0.04, ..., 1.0, 1.1, ..., 5.0, 6.0, ..., 19.0}
  static const QuantGrid& Duration();
  // Duration grid with the zero shift prepended at index 0.
  static const QuantGrid& Timeshift();

  std::size_t size() const { return centers_.size(); }
  double operator[](std::size_t i) const { return centers_[i]; }
  std::span<const double> centers() const { return centers_; }

  // Nearest bin; ties go to the larger bin; values past the end clamp to the
  // last bin. Throws std::domain_error for negative input.
  int Quantize(double seconds) const;

 private:
  explicit QuantGrid(std::vector<double> centers);
  std::vector<double> centers_;
};

class TokenStructureError : public std::runtime_error {
 public:
  TokenStructureError(const std::string& what, std::size_t index);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// The last note's Timeshift is the zero symbol.
TokenSeq Tokenize(const NoteList& notes);

// Onsets accumulate Timeshift values from 0. Throws TokenStructureError on a
// broken type cycle, partial group or out-of-codebook value.
NoteList Detokenize(const TokenSeq& seq);

// Throws TokenStructureError (see Detokenize) for malformed input.
void ValidateTokenSeq(std::span<const Token> tokens);

// Time at which token i is perceived: the note onset for Pitch, Velocity and
// Duration; the onset of the following note for Timeshift.
double Localize(std::size_t i, const TokenSeq& seq);
std::vector<double> LocalizeAll(std::span<const Token> tokens);
std::vector<double> LocalizeAll(const TokenSeq& seq);

}  // namespace iic
