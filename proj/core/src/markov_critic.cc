#include "iic/markov_critic.h"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <unordered_map>

#include "iic/bytes.h"

namespace iic {

namespace {

constexpr char kMagic[8] = {'I', 'I', 'C', 'M', 'A', 'R', 'K', 'V'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr int kMaxSupportedOrder = 64;

struct BuildNode {
  std::unordered_map<TokenId, std::uint32_t> successors;
  std::unordered_map<TokenId, std::uint32_t> children;
};

class ByteWriter {
 public:
  void U8(std::uint8_t v) { out_.push_back(v); }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back((v >> (8 * i)) & 0xFF);
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back((v >> (8 * i)) & 0xFF);
  }
  void F64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    U64(bits);
  }
  void Raw(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  std::uint8_t U8() { return Take(1)[0]; }
  std::uint32_t U32() {
    auto b = Take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  std::uint64_t U64() {
    auto b = Take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
    return v;
  }
  double F64() {
    std::uint64_t bits = U64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  std::span<const std::uint8_t> Take(std::size_t n) {
    if (in_.size() - pos_ < n) throw std::runtime_error("model file truncated");
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

MarkovCritic MarkovCritic::Train(std::span<const std::vector<TokenId>> corpus,
                                 int max_order, int vocab_size,
                                 bool type_masking) {
  if (corpus.empty()) throw std::invalid_argument("cannot train on an empty corpus");
  if (max_order < 1 || max_order > kMaxSupportedOrder)
    throw std::invalid_argument("max_order must be in [1, 64]");
  if (vocab_size < 1) throw std::invalid_argument("vocab_size must be positive");
  if (type_masking && vocab_size != kVocabSize)
    throw std::invalid_argument("type masking needs the structured vocabulary");

  const TokenId sentinel = vocab_size;
  std::vector<BuildNode> build(1);
  std::uint64_t tokens = 0;
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const TokenId next = seq[i];
      if (next < 0 || next >= vocab_size)
        throw std::invalid_argument("token id outside the vocabulary");
      std::uint32_t node = 0;
      ++build[node].successors[next];
      for (int o = 1; o <= max_order; ++o) {
        const bool at_start = static_cast<std::size_t>(o) > i;
        const TokenId ctx = at_start ? sentinel : seq[i - static_cast<std::size_t>(o)];
        auto [it, inserted] = build[node].children.try_emplace(
            ctx, static_cast<std::uint32_t>(build.size()));
        const std::uint32_t child = it->second;
        if (inserted) build.emplace_back();
        node = child;
        ++build[node].successors[next];
        if (at_start) break;
      }
    }
    tokens += seq.size();
  }

  MarkovCritic m;
  m.vocab_size_ = vocab_size;
  m.max_order_ = max_order;
  m.type_masking_ = type_masking;
  m.nodes_.resize(build.size());
  for (std::size_t n = 0; n < build.size(); ++n) {
    auto& node = m.nodes_[n];
    node.succ_begin = static_cast<std::uint32_t>(m.successors_.size());
    for (const auto& [id, count] : build[n].successors)
      m.successors_.push_back({id, count});
    node.succ_end = static_cast<std::uint32_t>(m.successors_.size());
    node.child_begin = static_cast<std::uint32_t>(m.children_.size());
    for (const auto& [id, child] : build[n].children)
      m.children_.push_back({id, child});
    node.child_end = static_cast<std::uint32_t>(m.children_.size());
  }
  m.metadata_.sequence_count = corpus.size();
  m.metadata_.token_count = tokens;
  m.Finalize();
  return m;
}

void MarkovCritic::Finalize() {
  auto by_id = [](const Entry& a, const Entry& b) { return a.id < b.id; };
  for (const auto& n : nodes_) {
    std::sort(successors_.begin() + n.succ_begin, successors_.begin() + n.succ_end, by_id);
    std::sort(children_.begin() + n.child_begin, children_.begin() + n.child_end, by_id);
  }
  identifier_ = HexDigest(Fnv1a64(SerializeTables()));
}

std::pair<TokenId, TokenId> MarkovCritic::PermittedRange(
    std::size_t prefix_length) const {
  if (!type_masking_) return {0, vocab_size_};
  const TokenType type = TypeAt(prefix_length);
  return {TypeOffset(type), TypeOffset(type) + TypeVocabSize(type)};
}

int MarkovCritic::ContextChain(std::span<const TokenId> prefix,
                               std::uint32_t* chain) const {
  int depth = 0;
  std::uint32_t node = 0;
  chain[depth++] = node;
  for (int o = 1; o <= max_order_; ++o) {
    const bool at_start = static_cast<std::size_t>(o) > prefix.size();
    const TokenId ctx = at_start ? vocab_size_ : prefix[prefix.size() - static_cast<std::size_t>(o)];
    const auto& n = nodes_[node];
    auto first = children_.begin() + n.child_begin;
    auto last = children_.begin() + n.child_end;
    auto it = std::lower_bound(first, last, ctx,
                               [](const Entry& e, TokenId id) { return e.id < id; });
    if (it == last || it->id != ctx) break;
    node = it->value;
    chain[depth++] = node;
    if (at_start) break;
  }
  return depth;
}

Distribution MarkovCritic::NextDist(std::span<const TokenId> prefix) const {
  const auto [lo, hi] = PermittedRange(prefix.size());
  Distribution p(static_cast<std::size_t>(vocab_size_), 0.0);
  std::fill(p.begin() + lo, p.begin() + hi, 1.0 / (hi - lo));

  std::uint32_t chain[kMaxSupportedOrder + 1];
  const int depth = ContextChain(prefix, chain);
  for (int d = 0; d < depth; ++d) {
    const auto& n = nodes_[chain[d]];
    auto first = successors_.begin() + n.succ_begin;
    auto last = successors_.begin() + n.succ_end;
    first = std::lower_bound(first, last, lo,
                             [](const Entry& e, TokenId id) { return e.id < id; });
    last = std::lower_bound(first, last, hi,
                            [](const Entry& e, TokenId id) { return e.id < id; });
    double total = 0.0;
    for (auto it = first; it != last; ++it) total += it->value;
    if (total == 0.0) continue;
    const double types = static_cast<double>(last - first);
    const double denom = total + types;
    const double backoff = types / denom;
    for (TokenId w = lo; w < hi; ++w) p[static_cast<std::size_t>(w)] *= backoff;
    for (auto it = first; it != last; ++it)
      p[static_cast<std::size_t>(it->id)] += it->value / denom;
  }
  return p;
}

double MarkovCritic::Prob(std::span<const TokenId> prefix, TokenId next) const {
  const auto [lo, hi] = PermittedRange(prefix.size());
  if (next < lo || next >= hi) return 0.0;
  double p = 1.0 / (hi - lo);
  std::uint32_t chain[kMaxSupportedOrder + 1];
  const int depth = ContextChain(prefix, chain);
  for (int d = 0; d < depth; ++d) {
    const auto& n = nodes_[chain[d]];
    auto first = successors_.begin() + n.succ_begin;
    auto last = successors_.begin() + n.succ_end;
    first = std::lower_bound(first, last, lo,
                             [](const Entry& e, TokenId id) { return e.id < id; });
    last = std::lower_bound(first, last, hi,
                            [](const Entry& e, TokenId id) { return e.id < id; });
    double total = 0.0;
    double count = 0.0;
    for (auto it = first; it != last; ++it) {
      total += it->value;
      if (it->id == next) count = it->value;
    }
    if (total == 0.0) continue;
    const double types = static_cast<double>(last - first);
    p = (count + types * p) / (total + types);
  }
  return p;
}

std::vector<std::uint8_t> MarkovCritic::SerializeTables() const {
  ByteWriter w;
  w.U32(static_cast<std::uint32_t>(vocab_size_));
  w.U32(static_cast<std::uint32_t>(max_order_));
  w.U8(type_masking_ ? 1 : 0);
  w.U32(static_cast<std::uint32_t>(nodes_.size()));
  for (const auto& n : nodes_) {
    w.U32(n.succ_end - n.succ_begin);
    for (auto i = n.succ_begin; i < n.succ_end; ++i) {
      w.U32(static_cast<std::uint32_t>(successors_[i].id));
      w.U32(successors_[i].value);
    }
    w.U32(n.child_end - n.child_begin);
    for (auto i = n.child_begin; i < n.child_end; ++i) {
      w.U32(static_cast<std::uint32_t>(children_[i].id));
      w.U32(children_[i].value);
    }
  }
  return std::move(w.bytes());
}

std::vector<std::uint8_t> MarkovCritic::Serialize() const {
  ByteWriter w;
  w.Raw(kMagic, sizeof kMagic);
  w.U32(kFormatVersion);
  w.U64(metadata_.sequence_count);
  w.U64(metadata_.token_count);
  w.F64(metadata_.mean_ic_pitch);
  w.F64(metadata_.mean_ic_timeshift);
  w.F64(metadata_.c_pitch);
  w.F64(metadata_.c_timeshift);
  w.F64(metadata_.level_low);
  w.F64(metadata_.level_high);
  w.F64(metadata_.level_p90);
  auto tables = SerializeTables();
  w.Raw(tables.data(), tables.size());
  return std::move(w.bytes());
}

MarkovCritic MarkovCritic::Deserialize(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.Take(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("not a model file (bad magic)");
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion)
    throw std::runtime_error("unsupported model file version " + std::to_string(version));

  MarkovCritic m;
  m.metadata_.sequence_count = r.U64();
  m.metadata_.token_count = r.U64();
  m.metadata_.mean_ic_pitch = r.F64();
  m.metadata_.mean_ic_timeshift = r.F64();
  m.metadata_.c_pitch = r.F64();
  m.metadata_.c_timeshift = r.F64();
  m.metadata_.level_low = r.F64();
  m.metadata_.level_high = r.F64();
  m.metadata_.level_p90 = r.F64();
  m.vocab_size_ = static_cast<int>(r.U32());
  m.max_order_ = static_cast<int>(r.U32());
  m.type_masking_ = r.U8() != 0;
  if (m.vocab_size_ < 1 || m.max_order_ < 1 || m.max_order_ > kMaxSupportedOrder ||
      (m.type_masking_ && m.vocab_size_ != kVocabSize))
    throw std::runtime_error("model header fields out of range");
  const std::uint32_t node_count = r.U32();
  m.nodes_.resize(node_count);
  for (auto& n : m.nodes_) {
    const std::uint32_t ns = r.U32();
    n.succ_begin = static_cast<std::uint32_t>(m.successors_.size());
    for (std::uint32_t i = 0; i < ns; ++i) {
      const auto id = static_cast<TokenId>(r.U32());
      if (id < 0 || id >= m.vocab_size_) throw std::runtime_error("successor id out of range");
      m.successors_.push_back({id, r.U32()});
    }
    n.succ_end = static_cast<std::uint32_t>(m.successors_.size());
    const std::uint32_t nc = r.U32();
    n.child_begin = static_cast<std::uint32_t>(m.children_.size());
    for (std::uint32_t i = 0; i < nc; ++i) {
      const auto id = static_cast<TokenId>(r.U32());
      const std::uint32_t child = r.U32();
      if (child >= node_count) throw std::runtime_error("child index out of range");
      m.children_.push_back({id, child});
    }
    n.child_end = static_cast<std::uint32_t>(m.children_.size());
  }
  if (!r.done()) throw std::runtime_error("trailing bytes after model tables");
  if (m.nodes_.empty()) throw std::runtime_error("model has no root node");
  m.Finalize();
  return m;
}

void MarkovCritic::Save(const std::filesystem::path& path) const {
  WriteFileBytes(path, Serialize());
}

MarkovCritic MarkovCritic::Load(const std::filesystem::path& path) {
  return Deserialize(ReadFileBytes(path));
}

std::vector<std::vector<double>> HeldOutIcs(std::span<const std::vector<TokenId>> corpus,
                                            int folds, int max_order) {
  std::vector<std::vector<double>> out(corpus.size());
  if (folds < 2 || corpus.size() < 2) {
    const auto model = MarkovCritic::Train(corpus, max_order);
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (!corpus[i].empty()) out[i] = TokenIc(model, corpus[i]);
    return out;
  }
  const auto n_folds = std::min(static_cast<std::size_t>(folds), corpus.size());
  for (std::size_t f = 0; f < n_folds; ++f) {
    std::vector<std::vector<TokenId>> train;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      if (i % n_folds != f) train.push_back(corpus[i]);
    const auto model = MarkovCritic::Train(train, max_order);
    for (std::size_t i = f; i < corpus.size(); i += n_folds)
      if (!corpus[i].empty()) out[i] = TokenIc(model, corpus[i]);
  }
  return out;
}

}  // namespace iic
