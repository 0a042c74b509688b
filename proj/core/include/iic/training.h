#pragma once

#include <span>

#include "iic/curves.h"
#include "iic/markov_critic.h"
#include "iic/tokenizer.h"

namespace iic {

inline constexpr int kDefaultCalibrationFolds = 5;

struct TrainedCritic {
  MarkovCritic model;
  Levels levels;
};

// Trains the default critic and fills its metadata. Type weights use
// held-out ICs (cross-fitted over `folds`) because the model nearly
// memorises its own training pieces; levels pool the IIC the trained model
// assigns to the corpus, i.e. the scale of curves extracted with it.
// Empty sequences are ignored. Throws std::invalid_argument when no
// sequence has notes.
TrainedCritic TrainCalibratedCritic(std::span<const TokenSeq> corpus,
                                    int max_order = MarkovCritic::kDefaultOrder,
                                    int folds = kDefaultCalibrationFolds);

}  // namespace iic
