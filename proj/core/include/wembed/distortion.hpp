#pragma once

#include <utility>
#include <vector>

#include "wembed/embedding_model.hpp"
#include "wembed/graph.hpp"
#include "wembed/optim.hpp"

namespace wembed {

struct DistortionConfig {
  int epochs = 300;
  int batch_pairs = 0;  // 0 = full batch over all unordered pairs
  SinkhornConfig sinkhorn{.lambda = 0.1, .iterations = 50};
  AdamConfig adam{.lr = 1e-2};
  double init_scale = 0.1;
  double ball_eps = 1e-5;  // hyperbolic retraction margin
  unsigned long seed = 0;

  void validate() const;
};

struct DistortionReport {
  double mean_rel = 0.0;    // mean over pairs of |d_model - d| / d
  double worst_case = 1.0;  // max ratio / min ratio; +inf if a ratio is 0
  int excluded_pairs = 0;   // zero-distance target pairs skipped
  std::vector<double> per_pair;  // filled on request
};

// Distortion of a trained model against a target metric. Pairs whose target
// distance is zero are excluded (and counted); evaluation uses the same
// Sinkhorn settings the model was trained with.
DistortionReport mean_distortion(const EmbeddingModel& model,
                                 const MetricMatrix& target,
                                 const SinkhornConfig& cfg,
                                 bool keep_per_pair = false);

// Minimum-distortion embedding: initializes a model of the requested kind
// and budget, then runs Adam on the mean relative distortion objective.
// Returns the trained model and the per-epoch objective history.
std::pair<EmbeddingModel, std::vector<double>> train_min_distortion(
    const MetricMatrix& target, ModelKind kind, const Budget& budget,
    const DistortionConfig& cfg);

}  // namespace wembed
