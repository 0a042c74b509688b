#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "iic/critic.h"

namespace iic {

// Corpus-derived numbers persisted next to the count tables so downstream
// commands can reuse them without the corpus.
struct ModelMetadata {
  std::uint64_t sequence_count = 0;
  std::uint64_t token_count = 0;
  double mean_ic_pitch = 0.0;
  double mean_ic_timeshift = 0.0;
  double c_pitch = 1.0;
  double c_timeshift = 1.0;
  double level_low = 0.0;
  double level_high = 0.0;
  double level_p90 = 0.0;

  friend bool operator==(const ModelMetadata&, const ModelMetadata&) = default;
};

// Interpolated Witten-Bell n-gram model over token ids with contexts of up to
// max_order tokens. Each sequence is preceded by a start sentinel. The
// lowest level backs off to the uniform distribution, so every id in the
// permitted range has non-zero probability.
//
// With type masking the permitted range at a position is the codebook of the
// type the 4-token cycle dictates there (requires vocab_size == kVocabSize);
// otherwise it is the whole vocabulary.
//
// Immutable after Train/Load; safe to query from many threads.
class MarkovCritic final : public CriticModel {
 public:
  static constexpr int kDefaultOrder = 8;

  // Throws std::invalid_argument for an empty corpus, max_order < 1, or ids
  // outside [0, vocab_size).
  static MarkovCritic Train(std::span<const std::vector<TokenId>> corpus,
                            int max_order = kDefaultOrder,
                            int vocab_size = kVocabSize,
                            bool type_masking = true);

  int vocab_size() const override { return vocab_size_; }
  Distribution NextDist(std::span<const TokenId> prefix) const override;
  double Prob(std::span<const TokenId> prefix, TokenId next) const override;
  std::string Identifier() const override { return identifier_; }

  int max_order() const { return max_order_; }
  bool type_masking() const { return type_masking_; }
  std::size_t node_count() const { return nodes_.size(); }

  // Permitted id range [first, second) for the token following prefix.
  std::pair<TokenId, TokenId> PermittedRange(std::size_t prefix_length) const;

  const ModelMetadata& metadata() const { return metadata_; }
  void set_metadata(const ModelMetadata& m) { metadata_ = m; }

  // Binary format: magic "IICMARKV", u32 version, header fields, metadata,
  // then the context trie. Little-endian throughout.
  std::vector<std::uint8_t> Serialize() const;
  // Throws std::runtime_error on bad magic, unknown version or truncation.
  static MarkovCritic Deserialize(std::span<const std::uint8_t> bytes);
  void Save(const std::filesystem::path& path) const;
  static MarkovCritic Load(const std::filesystem::path& path);

 private:
  struct Entry {
    TokenId id;
    std::uint32_t value;  // successor count or child node index
  };
  struct Node {
    std::uint32_t succ_begin = 0, succ_end = 0;
    std::uint32_t child_begin = 0, child_end = 0;
  };

  MarkovCritic() = default;
  void Finalize();
  // Nodes for contexts of increasing length, starting at the root.
  int ContextChain(std::span<const TokenId> prefix, std::uint32_t* chain) const;
  std::vector<std::uint8_t> SerializeTables() const;

  int vocab_size_ = kVocabSize;
  int max_order_ = kDefaultOrder;
  bool type_masking_ = true;
  std::vector<Node> nodes_;
  std::vector<Entry> successors_;
  std::vector<Entry> children_;
  ModelMetadata metadata_;
  std::string identifier_;
};

// IC of every token of every sequence under a model trained without the
// sequence's fold (sequence i belongs to fold i % folds). With folds < 2 or a
// single sequence every sequence is scored in-sample.
std::vector<std::vector<double>> HeldOutIcs(std::span<const std::vector<TokenId>> corpus,
                                            int folds,
                                            int max_order = MarkovCritic::kDefaultOrder);

}  // namespace iic
