#include "iic/training.h"

#include <stdexcept>
#include <vector>

namespace iic {

TrainedCritic TrainCalibratedCritic(std::span<const TokenSeq> corpus, int max_order,
                                    int folds) {
  std::vector<TokenSeq> seqs;
  std::vector<std::vector<TokenId>> ids;
  for (const auto& s : corpus) {
    if (s.empty()) continue;
    seqs.push_back(s);
    ids.push_back(s.ids());
  }
  if (seqs.empty()) throw std::invalid_argument("training corpus has no notes");

  MarkovCritic model = MarkovCritic::Train(ids, max_order);
  const auto held_out = HeldOutIcs(ids, folds, max_order);
  const TypeWeights w = CalibrateTypeWeights(seqs, held_out);
  KernelConfig cfg;
  cfg.c_pitch = w.c_pitch;
  cfg.c_timeshift = w.c_timeshift;
  const Levels levels = DefaultLevels(seqs, model, cfg);

  ModelMetadata meta;
  meta.sequence_count = seqs.size();
  for (const auto& s : seqs) meta.token_count += s.size();
  meta.mean_ic_pitch = w.mean_ic_pitch;
  meta.mean_ic_timeshift = w.mean_ic_timeshift;
  meta.c_pitch = w.c_pitch;
  meta.c_timeshift = w.c_timeshift;
  meta.level_low = levels.low;
  meta.level_high = levels.high;
  meta.level_p90 = levels.p90;
  model.set_metadata(meta);
  return {std::move(model), levels};
}

}  // namespace iic
