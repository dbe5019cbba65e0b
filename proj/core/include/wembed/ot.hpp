#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "wembed/common.hpp"

namespace wembed {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A uniform discrete distribution: M support points in R^k, each carrying
// mass 1/M. The embedding image of one object.
struct PointCloud {
  Matrix points;  // M x k

  PointCloud() = default;
  explicit PointCloud(Matrix pts) : points(std::move(pts)) {}

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }

  // Throws if empty or any coordinate is non-finite.
  void validate() const;
};

// Pairwise Euclidean ground distances between two clouds, together with the
// exponent p applied when the matrix is used as a transport cost.
struct CostMatrix {
  Matrix entries;  // M x N, nonnegative
  double p = 1.0;
};

// Nonnegative coupling with row sums ~ 1/M and column sums ~ 1/N.
struct TransportPlan {
  Matrix coupling;  // M x N
};

enum class SinkhornMode {
  kAuto,   // log-domain iff lambda / median(D^p) < stabilization_threshold
  kPlain,  // kernel-domain updates r <- u./Kc, c <- v./K^T r
  kLog,    // same sequence via log-sum-exp
};

struct SinkhornConfig {
  double lambda = 0.05;  // entropic regularizer, > 0
  double p = 1.0;        // ground-cost exponent, >= 1
  int iterations = 50;   // exactly this many (r, c) update pairs
  double stabilization_threshold = 1e-2;
  SinkhornMode mode = SinkhornMode::kAuto;
  bool keep_iterates = false;  // retain per-iteration scalings (for gradients)

  void validate() const;
};

// Per-iteration scaling vectors in log form, recorded oldest first.
// log-form keeps them representable even when exp(log_r) would overflow.
struct SinkhornIterates {
  std::vector<Vector> log_r;  // each length M
  std::vector<Vector> log_c;  // each length N
};

struct SinkhornResult {
  double value = 0.0;  // (sum_ij D_ij^p T_ij)^(1/p), transport cost only
  TransportPlan plan;
  Vector r, c;              // final scalings; may saturate for extreme lambda
  Vector log_r, log_c;      // always finite
  bool stabilized = false;  // which path produced the result
  int iterations_run = 0;
  std::optional<SinkhornIterates> iterates;
};

struct SinkhornGradient {
  double value = 0.0;
  Matrix grad_a;  // M x k, d value / d a.points
  Matrix grad_b;  // N x k
};

// entries[i][j] = ||a_i - b_j||_2, exponent recorded for later use.
// Throws on dimension mismatch or non-finite coordinates.
CostMatrix ground_cost(const PointCloud& a, const PointCloud& b, double p = 1.0);

// Entropic-regularized transport distance via exactly cfg.iterations pairs of
// balancing updates starting from c = 1. The reported value excludes the
// entropy term: it is the transport cost of the regularized plan.
SinkhornResult sinkhorn(const PointCloud& a, const PointCloud& b,
                        const SinkhornConfig& cfg);

// Evaluation-only variant: iterates until the plan's marginal residual drops
// below `tol` or `max_iterations` pairs have run, whichever comes first.
SinkhornResult sinkhorn_converged(const PointCloud& a, const PointCloud& b,
                                  SinkhornConfig cfg, double tol = 1e-9,
                                  int max_iterations = 2000);

// Exact p-Wasserstein distance for equal-size uniform clouds by permutation
// enumeration. Validation oracle; rejects M != N or M > 10.
double exact_wasserstein(const PointCloud& a, const PointCloud& b,
                         double p = 1.0);

// Max violation of the uniform marginal constraints:
// max(|rowsum_i - 1/M|, |colsum_j - 1/N|) over all rows and columns.
double marginal_residual(const TransportPlan& plan);

// Reverse-mode derivative of sinkhorn(...).value with respect to the support
// coordinates of both clouds. Differentiates the unrolled L-iteration
// procedure itself (not the LP optimum): cost matrix, kernel, every balancing
// update, and the final cost contraction.
SinkhornGradient sinkhorn_grad(const PointCloud& a, const PointCloud& b,
                               const SinkhornConfig& cfg);

}  // namespace wembed
