#pragma once

#include <string>
#include <vector>

#include "wembed/ot.hpp"

namespace wembed {

enum class ModelKind { kWasserstein, kEuclidean, kHyperbolic };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

// Parameter budget of one embedded object: a point cloud shape for the
// Wasserstein family, an ambient dimension for the vector families.
// Parameter counts (M*k vs d) are what experiments equate across kinds.
struct Budget {
  int points = 0;      // M  (wasserstein)
  int ground_dim = 0;  // k  (wasserstein)
  int dim = 0;         // d  (euclidean / hyperbolic)
};

// One embedding table: n objects, each a point cloud in R^k or a vector in
// R^d, stored as a single flat parameter vector so optimizers can treat the
// model as one array. Cloud points are laid out row-major per object.
struct EmbeddingModel {
  ModelKind kind = ModelKind::kEuclidean;
  int n_objects = 0;
  int points = 0;      // M, wasserstein only
  int ground_dim = 0;  // k, wasserstein only
  int dim = 0;         // d, vector kinds only
  Vector params;
  std::vector<std::string> labels;  // optional, empty or size n_objects

  int params_per_object() const {
    return kind == ModelKind::kWasserstein ? points * ground_dim : dim;
  }

  PointCloud cloud(int i) const;            // wasserstein only
  Eigen::Map<const Vector> vec(int i) const;  // vector kinds only

  void check_index(int i) const;
  void validate() const;
};

// I.i.d. Gaussian(0, scale^2) parameters, deterministic in `seed`;
// hyperbolic vectors are then clipped into the ball of radius 0.9.
EmbeddingModel init_model(ModelKind kind, int n_objects, const Budget& budget,
                          unsigned long seed, double scale = 0.1);

// Distance between objects i and j under the model's geometry:
// sinkhorn value, Euclidean norm, or Poincare-ball distance.
double model_distance(const EmbeddingModel& model, int i, int j,
                      const SinkhornConfig& cfg);

struct PairGradient {
  double distance = 0.0;
  Vector grad_i;  // d distance / d params of object i
  Vector grad_j;
  bool degenerate = false;  // coincident points where the metric is nonsmooth
};

// Exact gradients of model_distance with respect to the parameter slices of
// objects i and j. Nonsmooth coincident pairs return subgradient 0 and set
// the degenerate flag.
PairGradient model_distance_grad(const EmbeddingModel& model, int i, int j,
                                 const SinkhornConfig& cfg);

}  // namespace wembed
