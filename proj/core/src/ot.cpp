#include "wembed/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

namespace wembed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double median_of(const Matrix& m) {
  std::vector<double> vals(m.data(), m.data() + m.size());
  auto mid = vals.begin() + vals.size() / 2;
  std::nth_element(vals.begin(), mid, vals.end());
  if (vals.size() % 2 == 1) return *mid;
  double hi = *mid;
  double lo = *std::max_element(vals.begin(), mid);
  return 0.5 * (lo + hi);
}

// log(sum_j exp(row_j)) per row, max-shifted.
Vector lse_rows(const Matrix& m) {
  Vector out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    double mx = m.row(i).maxCoeff();
    out[i] = mx + std::log((m.row(i).array() - mx).exp().sum());
  }
  return out;
}

Vector lse_cols(const Matrix& m) {
  Vector out(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double mx = m.col(j).maxCoeff();
    out[j] = mx + std::log((m.col(j).array() - mx).exp().sum());
  }
  return out;
}

[[noreturn]] void throw_unstable() {
  throw Error(
      "sinkhorn: kernel-domain iteration overflowed or underflowed; "
      "use the stabilized log-domain mode (SinkhornMode::kLog or a larger "
      "stabilization_threshold)");
}

struct Forward {
  Matrix D;        // ground distances
  Matrix C;        // D^p
  Matrix K;        // plain mode: exp(-C/lambda); empty in log mode
  Matrix logK;     // log mode: -C/lambda; empty in plain mode
  bool stabilized = false;
  std::vector<Vector> rs, cs;          // plain-mode iterates
  std::vector<Vector> log_rs, log_cs;  // log-mode iterates
  SinkhornResult result;
};

Forward run_sinkhorn(const PointCloud& a, const PointCloud& b,
                     const SinkhornConfig& cfg, bool track_iterates,
                     double tol, int max_iterations) {
  cfg.validate();
  Forward fw;
  CostMatrix cost = ground_cost(a, b, cfg.p);
  fw.D = std::move(cost.entries);
  fw.C = (cfg.p == 1.0) ? fw.D : fw.D.array().pow(cfg.p).matrix();

  const Eigen::Index M = fw.C.rows(), N = fw.C.cols();
  const double u = 1.0 / static_cast<double>(M);
  const double v = 1.0 / static_cast<double>(N);

  bool log_mode = false;
  switch (cfg.mode) {
    case SinkhornMode::kPlain: log_mode = false; break;
    case SinkhornMode::kLog: log_mode = true; break;
    case SinkhornMode::kAuto: {
      double med = median_of(fw.C);
      log_mode = med > 0.0 && cfg.lambda / med < cfg.stabilization_threshold;
      break;
    }
  }
  fw.stabilized = log_mode;

  auto residual_of = [&](const Vector& rowsum, const Vector& colsum) {
    double res = (rowsum.array() - u).abs().maxCoeff();
    res = std::max(res, (colsum.array() - v).abs().maxCoeff());
    return res;
  };

  int ran = 0;
  if (!log_mode) {
    fw.K = (-fw.C.array() / cfg.lambda).exp().matrix();
    Vector r = Vector::Constant(M, u);
    Vector c = Vector::Ones(N);
    for (int t = 0; t < max_iterations; ++t) {
      Vector q = fw.K * c;
      if (!q.allFinite() || (q.array() <= 0.0).any()) throw_unstable();
      r = u / q.array();
      if (!r.allFinite()) throw_unstable();
      Vector s = fw.K.transpose() * r;
      if (!s.allFinite() || (s.array() <= 0.0).any()) throw_unstable();
      c = v / s.array();
      if (!c.allFinite()) throw_unstable();
      if (track_iterates) {
        fw.rs.push_back(r);
        fw.cs.push_back(c);
      }
      ++ran;
      if (tol > 0.0) {
        Vector rowsum = r.array() * (fw.K * c).array();
        Vector colsum = c.array() * s.array();
        if (residual_of(rowsum, colsum) < tol) break;
      }
    }
    fw.result.r = r;
    fw.result.c = c;
    fw.result.log_r = r.array().log();
    fw.result.log_c = c.array().log();
    fw.result.plan.coupling =
        r.asDiagonal() * fw.K * c.asDiagonal();
  } else {
    fw.logK = (-fw.C.array() / cfg.lambda).matrix();
    const double log_u = std::log(u), log_v = std::log(v);
    Vector phi(M);
    Vector psi = Vector::Zero(N);
    Matrix shifted(M, N);
    for (int t = 0; t < max_iterations; ++t) {
      shifted = fw.logK;
      shifted.rowwise() += psi.transpose();
      phi = Vector::Constant(M, log_u) - lse_rows(shifted);
      shifted = fw.logK;
      shifted.colwise() += phi;
      psi = Vector::Constant(N, log_v) - lse_cols(shifted);
      if (track_iterates) {
        fw.log_rs.push_back(phi);
        fw.log_cs.push_back(psi);
      }
      ++ran;
      if (tol > 0.0) {
        shifted = fw.logK;
        shifted.rowwise() += psi.transpose();
        Vector log_rowsum = phi + lse_rows(shifted);
        shifted = fw.logK;
        shifted.colwise() += phi;
        Vector log_colsum = psi + lse_cols(shifted);
        if (residual_of(log_rowsum.array().exp(),
                        log_colsum.array().exp()) < tol)
          break;
      }
    }
    fw.result.log_r = phi;
    fw.result.log_c = psi;
    fw.result.r = phi.array().exp();
    fw.result.c = psi.array().exp();
    Matrix logT = fw.logK;
    logT.colwise() += phi;
    logT.rowwise() += psi.transpose();
    fw.result.plan.coupling = logT.array().exp();
  }

  fw.result.stabilized = log_mode;
  fw.result.iterations_run = ran;
  double transport = (fw.C.array() * fw.result.plan.coupling.array()).sum();
  fw.result.value =
      (cfg.p == 1.0) ? transport : std::pow(transport, 1.0 / cfg.p);
  if (!std::isfinite(fw.result.value)) throw_unstable();
  return fw;
}

}  // namespace

void PointCloud::validate() const {
  if (points.rows() < 1 || points.cols() < 1) {
    throw Error::format("point cloud must be at least 1x1, got {}x{}",
                        points.rows(), points.cols());
  }
  if (!points.allFinite()) {
    throw Error("point cloud contains non-finite coordinates");
  }
}

void SinkhornConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error::format("sinkhorn lambda must be positive, got {}", lambda);
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error::format("sinkhorn exponent p must be >= 1, got {}", p);
  }
  if (iterations < 1) {
    throw Error::format("sinkhorn iterations must be >= 1, got {}", iterations);
  }
}

CostMatrix ground_cost(const PointCloud& a, const PointCloud& b, double p) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) {
    throw Error::format(
        "ground_cost: clouds live in different ground spaces ({} vs {})",
        a.dim(), b.dim());
  }
  if (!(p >= 1.0)) {
    throw Error::format("ground_cost: exponent p must be >= 1, got {}", p);
  }
  CostMatrix out;
  out.p = p;
  out.entries.resize(a.size(), b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    out.entries.row(i) =
        (b.points.rowwise() - a.points.row(i)).rowwise().norm().transpose();
  }
  return out;
}

SinkhornResult sinkhorn(const PointCloud& a, const PointCloud& b,
                        const SinkhornConfig& cfg) {
  Forward fw = run_sinkhorn(a, b, cfg, cfg.keep_iterates,
                            /*tol=*/0.0, cfg.iterations);
  if (cfg.keep_iterates) {
    SinkhornIterates it;
    if (fw.stabilized) {
      it.log_r = std::move(fw.log_rs);
      it.log_c = std::move(fw.log_cs);
    } else {
      it.log_r.reserve(fw.rs.size());
      it.log_c.reserve(fw.cs.size());
      for (const auto& r : fw.rs) it.log_r.push_back(r.array().log());
      for (const auto& c : fw.cs) it.log_c.push_back(c.array().log());
    }
    fw.result.iterates = std::move(it);
  }
  return std::move(fw.result);
}

SinkhornResult sinkhorn_converged(const PointCloud& a, const PointCloud& b,
                                  SinkhornConfig cfg, double tol,
                                  int max_iterations) {
  if (!(tol > 0.0)) throw Error("sinkhorn_converged: tol must be positive");
  cfg.keep_iterates = false;
  Forward fw = run_sinkhorn(a, b, cfg, false, tol, max_iterations);
  return std::move(fw.result);
}

double exact_wasserstein(const PointCloud& a, const PointCloud& b, double p) {
  CostMatrix cost = ground_cost(a, b, p);
  const Eigen::Index M = cost.entries.rows(), N = cost.entries.cols();
  if (M != N) {
    throw Error::format(
        "exact_wasserstein: requires equal-size clouds, got {} vs {}", M, N);
  }
  if (M > 10) {
    throw Error::format(
        "exact_wasserstein: permutation oracle capped at 10 points, got {}", M);
  }
  Matrix C = (p == 1.0) ? cost.entries : cost.entries.array().pow(p).matrix();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(M));
  std::iota(perm.begin(), perm.end(), 0);
  double best = kInf;
  do {
    double total = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) total += C(i, perm[i]);
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  best /= static_cast<double>(M);
  return (p == 1.0) ? best : std::pow(best, 1.0 / p);
}

double marginal_residual(const TransportPlan& plan) {
  const Eigen::Index M = plan.coupling.rows(), N = plan.coupling.cols();
  if (M < 1 || N < 1) throw Error("marginal_residual: empty plan");
  const double u = 1.0 / static_cast<double>(M);
  const double v = 1.0 / static_cast<double>(N);
  double res = (plan.coupling.rowwise().sum().array() - u).abs().maxCoeff();
  res = std::max(res,
                 (plan.coupling.colwise().sum().array() - v).abs().maxCoeff());
  return res;
}

SinkhornGradient sinkhorn_grad(const PointCloud& a, const PointCloud& b,
                               const SinkhornConfig& cfg) {
  Forward fw = run_sinkhorn(a, b, cfg, /*track_iterates=*/true,
                            /*tol=*/0.0, cfg.iterations);
  const Eigen::Index M = fw.C.rows(), N = fw.C.cols();
  const int L = fw.result.iterations_run;
  const double u = 1.0 / static_cast<double>(M);
  const double v = 1.0 / static_cast<double>(N);
  const Matrix& T = fw.result.plan.coupling;

  SinkhornGradient out;
  out.value = fw.result.value;
  out.grad_a = Matrix::Zero(M, a.dim());
  out.grad_b = Matrix::Zero(N, b.dim());

  const double transport = (fw.C.array() * T.array()).sum();
  double seed = 1.0;
  if (cfg.p != 1.0) {
    if (transport <= 0.0) return out;  // subgradient 0 at the cone point
    seed = (1.0 / cfg.p) * std::pow(transport, 1.0 / cfg.p - 1.0);
  }

  // Adjoints of the log-scalings phi = log r, psi = log c. These stay
  // bounded even when r and c themselves would overflow.
  Matrix CT = (fw.C.array() * T.array()).matrix() * seed;
  Vector g_phi = CT.rowwise().sum();
  Vector g_psi = CT.colwise().sum();
  Matrix g_logK = CT;

  // Balanced kernels for step t:
  //   EB_ij = r^t_i K_ij c^t_j      (column-stochastic after /v)
  //   EA_ij = r^t_i K_ij c^{t-1}_j  (row-stochastic after /u)
  Matrix EA(M, N), EB(M, N);
  for (int t = L - 1; t >= 0; --t) {
    if (!fw.stabilized) {
      const Vector& r = fw.rs[static_cast<std::size_t>(t)];
      const Vector& c = fw.cs[static_cast<std::size_t>(t)];
      EB = r.asDiagonal() * fw.K * c.asDiagonal();
      if (t > 0) {
        EA = r.asDiagonal() * fw.K *
             fw.cs[static_cast<std::size_t>(t - 1)].asDiagonal();
      } else {
        EA = r.asDiagonal() * fw.K;
      }
    } else {
      const Vector& lr = fw.log_rs[static_cast<std::size_t>(t)];
      const Vector& lc = fw.log_cs[static_cast<std::size_t>(t)];
      Matrix tmp = fw.logK;
      tmp.colwise() += lr;
      Matrix tmpB = tmp;
      tmpB.rowwise() += lc.transpose();
      EB = tmpB.array().exp();
      if (t > 0) {
        tmp.rowwise() += fw.log_cs[static_cast<std::size_t>(t - 1)].transpose();
      }
      EA = tmp.array().exp();
    }
    // c^t = v ./ (K^T r^t):  d psi^t / d phi^t = -B, d psi^t / d logK = -B
    Vector wB = g_psi / v;
    g_phi.noalias() -= EB * wB;
    g_logK.noalias() -= EB * wB.asDiagonal();
    // r^t = u ./ (K c^{t-1}):  d phi^t / d psi^{t-1} = -A, d phi^t/d logK = -A
    Vector wA = g_phi / u;
    g_psi.noalias() = -(EA.transpose() * wA);
    g_logK.noalias() -= wA.asDiagonal() * EA;
    g_phi.setZero();
  }

  // logK = -C/lambda, plus the direct dS/dC = T from the contraction.
  Matrix g_C = T * seed - g_logK / cfg.lambda;
  Matrix g_D;
  if (cfg.p == 1.0) {
    g_D = std::move(g_C);
  } else {
    g_D = (g_C.array() * cfg.p *
           fw.D.array().pow(cfg.p - 1.0))
              .matrix();
  }

  // D_ij = ||a_i - b_j||; subgradient 0 where the norm vanishes.
  Matrix W = (fw.D.array() > 0.0)
                 .select(g_D.array() / fw.D.array(), Matrix::Zero(M, N))
                 .matrix();
  out.grad_a = W.rowwise().sum().asDiagonal() * a.points - W * b.points;
  out.grad_b =
      W.colwise().sum().asDiagonal() * b.points - W.transpose() * a.points;
  return out;
}

}  // namespace wembed
