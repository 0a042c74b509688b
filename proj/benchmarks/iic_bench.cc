#include <benchmark/benchmark.h>

#include <algorithm>
#include <filesystem>
#include <vector>

#include "iic/curves.h"
#include "iic/iic.h"
#include "iic/markov_critic.h"
#include "iic/search.h"
#include "iic/tokenizer.h"

namespace {

using namespace iic;

struct Fixture {
  std::vector<TokenSeq> seqs;
  MarkovCritic model;
};

const Fixture& Data() {
  static const Fixture f = [] {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(IIC_DATA_DIR "/corpus"))
      if (e.path().extension() == ".mid") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<TokenSeq> seqs;
    std::vector<std::vector<TokenId>> ids;
    for (const auto& p : files) {
      seqs.push_back(Tokenize(LoadMidiFile(p).notes));
      ids.push_back(seqs.back().ids());
    }
    return Fixture{std::move(seqs), MarkovCritic::Train(ids)};
  }();
  return f;
}

void BM_NextDist(benchmark::State& state) {
  const auto& d = Data();
  const auto& ids = d.seqs.front().ids();
  std::size_t i = 0;
  for (auto _ : state) {
    const std::size_t n = 1 + i++ % (ids.size() - 1);
    benchmark::DoNotOptimize(d.model.NextDist(std::span<const TokenId>(ids).first(n)));
  }
}
BENCHMARK(BM_NextDist);

void BM_TokenIc(benchmark::State& state) {
  const auto& d = Data();
  for (auto _ : state) benchmark::DoNotOptimize(TokenIc(d.model, d.seqs.front().ids()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.seqs.front().size()));
}
BENCHMARK(BM_TokenIc);

void BM_IicCurve(benchmark::State& state) {
  const auto& d = Data();
  const auto& seq = d.seqs.front();
  const auto ics = TokenIc(d.model, seq.ids());
  const double end = PieceEnd(Detokenize(seq));
  KernelConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(IicCurve(seq, ics, cfg, end));
}
BENCHMARK(BM_IicCurve);

void BM_ExpandStep(benchmark::State& state) {
  const auto& d = Data();
  KernelConfig cfg;
  SearchParams params;
  params.k = static_cast<int>(state.range(0));
  const auto s0 = InitialState(TokenSeq{}, d.model, cfg);
  const Curve target{0.0, 0.1, std::vector<double>(101, 1.0)};
  int iter = 1;
  for (auto _ : state) {
    params.seed = static_cast<std::uint64_t>(iter);
    benchmark::DoNotOptimize(ExpandStep(s0, params, d.model, d.model, target, iter++));
  }
}
BENCHMARK(BM_ExpandStep)->Arg(1)->Arg(8)->Arg(32);

}  // namespace
BENCHMARK_MAIN();
