#include "wembed/embedding_model.hpp"

#include <cmath>
#include <random>

#include "wembed/optim.hpp"

namespace wembed {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kWasserstein: return "wasserstein";
    case ModelKind::kEuclidean: return "euclidean";
    case ModelKind::kHyperbolic: return "hyperbolic";
  }
  throw Error("unreachable model kind");
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "wasserstein") return ModelKind::kWasserstein;
  if (name == "euclidean") return ModelKind::kEuclidean;
  if (name == "hyperbolic") return ModelKind::kHyperbolic;
  throw Error::format("unknown model kind '{}'", name);
}

void EmbeddingModel::check_index(int i) const {
  if (i < 0 || i >= n_objects) {
    throw Error::format("object index {} out of range [0, {})", i, n_objects);
  }
}

void EmbeddingModel::validate() const {
  if (n_objects < 1) throw Error("model must hold at least one object");
  if (kind == ModelKind::kWasserstein) {
    if (points < 1 || ground_dim < 1) {
      throw Error::format("invalid cloud shape {}x{}", points, ground_dim);
    }
  } else if (dim < 1) {
    throw Error::format("invalid embedding dimension {}", dim);
  }
  const long expected =
      static_cast<long>(n_objects) * params_per_object();
  if (params.size() != expected) {
    throw Error::format("parameter vector holds {} entries, expected {}",
                        params.size(), expected);
  }
  if (!labels.empty() && static_cast<int>(labels.size()) != n_objects) {
    throw Error::format("label count {} does not match object count {}",
                        labels.size(), n_objects);
  }
}

PointCloud EmbeddingModel::cloud(int i) const {
  check_index(i);
  if (kind != ModelKind::kWasserstein) {
    throw Error("cloud() is only defined for wasserstein models");
  }
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> view(
      params.data() + static_cast<long>(i) * points * ground_dim, points,
      ground_dim);
  return PointCloud{Matrix(view)};
}

Eigen::Map<const Vector> EmbeddingModel::vec(int i) const {
  check_index(i);
  if (kind == ModelKind::kWasserstein) {
    throw Error("vec() is not defined for wasserstein models");
  }
  return Eigen::Map<const Vector>(params.data() + static_cast<long>(i) * dim,
                                  dim);
}

EmbeddingModel init_model(ModelKind kind, int n_objects, const Budget& budget,
                          unsigned long seed, double scale) {
  EmbeddingModel m;
  m.kind = kind;
  m.n_objects = n_objects;
  if (kind == ModelKind::kWasserstein) {
    m.points = budget.points;
    m.ground_dim = budget.ground_dim;
  } else {
    m.dim = budget.dim;
  }
  if (n_objects < 1 || m.params_per_object() < 1) {
    throw Error::format("init_model: sizes must be positive (n={}, per={})",
                        n_objects, m.params_per_object());
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, scale);
  m.params.resize(static_cast<long>(n_objects) * m.params_per_object());
  for (Eigen::Index i = 0; i < m.params.size(); ++i) m.params[i] = gauss(rng);

  if (kind == ModelKind::kHyperbolic) {
    for (int i = 0; i < n_objects; ++i) {
      auto seg = m.params.segment(static_cast<long>(i) * m.dim, m.dim);
      const double norm = seg.norm();
      if (norm > 0.9) seg *= 0.9 / norm;
    }
  }
  m.validate();
  return m;
}

namespace {

double poincare_distance(const Vector& x, const Vector& y) {
  const double ax = 1.0 - x.squaredNorm();
  const double ay = 1.0 - y.squaredNorm();
  if (ax <= 0.0 || ay <= 0.0) {
    throw Error("hyperbolic vectors must lie strictly inside the unit ball");
  }
  const double delta = (x - y).squaredNorm();
  const double z = 1.0 + 2.0 * delta / (ax * ay);
  return std::acosh(z);
}

}  // namespace

double model_distance(const EmbeddingModel& model, int i, int j,
                      const SinkhornConfig& cfg) {
  model.check_index(i);
  model.check_index(j);
  switch (model.kind) {
    case ModelKind::kWasserstein:
      return sinkhorn(model.cloud(i), model.cloud(j), cfg).value;
    case ModelKind::kEuclidean:
      return (model.vec(i) - model.vec(j)).norm();
    case ModelKind::kHyperbolic:
      return poincare_distance(model.vec(i), model.vec(j));
  }
  throw Error("unreachable model kind");
}

PairGradient model_distance_grad(const EmbeddingModel& model, int i, int j,
                                 const SinkhornConfig& cfg) {
  model.check_index(i);
  model.check_index(j);
  PairGradient out;
  const int per = model.params_per_object();
  out.grad_i = Vector::Zero(per);
  out.grad_j = Vector::Zero(per);

  switch (model.kind) {
    case ModelKind::kWasserstein: {
      SinkhornGradient g = sinkhorn_grad(model.cloud(i), model.cloud(j), cfg);
      out.distance = g.value;
      // row-major cloud layout matches the flat parameter slices
      for (int r = 0; r < model.points; ++r) {
        for (int c = 0; c < model.ground_dim; ++c) {
          out.grad_i[r * model.ground_dim + c] = g.grad_a(r, c);
          out.grad_j[r * model.ground_dim + c] = g.grad_b(r, c);
        }
      }
      return out;
    }
    case ModelKind::kEuclidean: {
      Vector diff = model.vec(i) - model.vec(j);
      const double dist = diff.norm();
      out.distance = dist;
      if (dist == 0.0) {
        out.degenerate = true;
        return out;
      }
      out.grad_i = diff / dist;
      out.grad_j = -diff / dist;
      return out;
    }
    case ModelKind::kHyperbolic: {
      Vector x = model.vec(i);
      Vector y = model.vec(j);
      const double ax = 1.0 - x.squaredNorm();
      const double ay = 1.0 - y.squaredNorm();
      if (ax <= 0.0 || ay <= 0.0) {
        throw Error("hyperbolic vectors must lie strictly inside the unit ball");
      }
      const double delta = (x - y).squaredNorm();
      const double z = 1.0 + 2.0 * delta / (ax * ay);
      out.distance = std::acosh(z);
      const double denom = std::sqrt(z * z - 1.0);
      if (denom == 0.0) {  // coincident points, acosh nonsmooth at 1
        out.degenerate = true;
        return out;
      }
      // d z / d x = 4 (x - y) / (ax ay) + 4 delta x / (ax^2 ay)
      Vector dz_dx =
          (4.0 / (ax * ay)) * (x - y) + (4.0 * delta / (ax * ax * ay)) * x;
      Vector dz_dy =
          (4.0 / (ax * ay)) * (y - x) + (4.0 * delta / (ax * ay * ay)) * y;
      out.grad_i = dz_dx / denom;
      out.grad_j = dz_dy / denom;
      return out;
    }
  }
  throw Error("unreachable model kind");
}

}  // namespace wembed
