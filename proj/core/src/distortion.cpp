#include "wembed/distortion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "wembed/parallel.hpp"

namespace wembed {

namespace {

constexpr std::size_t kPairChunk = 64;

struct PairList {
  std::vector<std::pair<int, int>> pairs;  // i < j, target distance > 0
  int excluded = 0;
};

PairList usable_pairs(const MetricMatrix& target) {
  PairList out;
  const int n = target.n();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (target.d(i, j) > 0.0) {
        out.pairs.emplace_back(i, j);
      } else {
        ++out.excluded;
      }
    }
  }
  return out;
}

}  // namespace

void DistortionConfig::validate() const {
  if (epochs < 1) throw Error::format("epochs must be >= 1, got {}", epochs);
  if (batch_pairs < 0) throw Error("batch_pairs must be >= 0");
  sinkhorn.validate();
  adam.validate();
}

DistortionReport mean_distortion(const EmbeddingModel& model,
                                 const MetricMatrix& target,
                                 const SinkhornConfig& cfg,
                                 bool keep_per_pair) {
  model.validate();
  target.validate();
  if (model.n_objects != target.n()) {
    throw Error::format("model embeds {} objects but target metric has {}",
                        model.n_objects, target.n());
  }
  if (target.n() < 2) throw Error("distortion needs at least two objects");

  PairList pl = usable_pairs(target);
  if (pl.pairs.empty()) throw Error("no pairs with positive target distance");

  struct Acc {
    double sum_rel = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();
    double max_ratio = 0.0;
    std::vector<double> per_pair;
  };
  Acc total = chunked_reduce<Acc>(
      pl.pairs.size(), kPairChunk,
      [&] {
        Acc a;
        if (keep_per_pair) a.per_pair.reserve(kPairChunk);
        return a;
      },
      [&](Acc& acc, std::size_t idx) {
        auto [i, j] = pl.pairs[idx];
        const double d = target.d(i, j);
        const double dm = model_distance(model, i, j, cfg);
        const double rel = std::abs(dm - d) / d;
        acc.sum_rel += rel;
        const double ratio = dm / d;
        acc.min_ratio = std::min(acc.min_ratio, ratio);
        acc.max_ratio = std::max(acc.max_ratio, ratio);
        if (keep_per_pair) acc.per_pair.push_back(rel);
      },
      [](Acc& into, Acc&& part) {
        into.sum_rel += part.sum_rel;
        into.min_ratio = std::min(into.min_ratio, part.min_ratio);
        into.max_ratio = std::max(into.max_ratio, part.max_ratio);
        into.per_pair.insert(into.per_pair.end(), part.per_pair.begin(),
                             part.per_pair.end());
      });

  DistortionReport report;
  report.mean_rel = total.sum_rel / static_cast<double>(pl.pairs.size());
  report.worst_case = total.min_ratio > 0.0
                          ? total.max_ratio / total.min_ratio
                          : std::numeric_limits<double>::infinity();
  report.excluded_pairs = pl.excluded;
  if (keep_per_pair) report.per_pair = std::move(total.per_pair);
  return report;
}

std::pair<EmbeddingModel, std::vector<double>> train_min_distortion(
    const MetricMatrix& target, ModelKind kind, const Budget& budget,
    const DistortionConfig& cfg) {
  cfg.validate();
  target.validate();
  const int n = target.n();
  if (n < 2) throw Error("cannot embed fewer than two objects");

  EmbeddingModel model = init_model(kind, n, budget, cfg.seed, cfg.init_scale);
  AdamState adam(model.params.size(), cfg.adam);
  PairList pl = usable_pairs(target);
  if (pl.pairs.empty()) throw Error("no pairs with positive target distance");

  const std::size_t total_pairs = pl.pairs.size();
  const std::size_t batch =
      cfg.batch_pairs == 0 ? total_pairs
                           : std::min<std::size_t>(
                                 static_cast<std::size_t>(cfg.batch_pairs),
                                 total_pairs);
  const std::size_t steps_per_epoch = (total_pairs + batch - 1) / batch;
  std::mt19937_64 batch_rng(cfg.seed + 0x9e3779b97f4a7c15ull);

  const int per = model.params_per_object();
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(cfg.epochs));

  struct Acc {
    Vector grad;
    double loss = 0.0;
  };

  std::vector<std::size_t> order(total_pairs);
  for (std::size_t i = 0; i < total_pairs; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < total_pairs) {
      std::shuffle(order.begin(), order.end(), batch_rng);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_terms = 0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const std::size_t lo = step * batch;
      const std::size_t hi = std::min(total_pairs, lo + batch);
      const std::size_t count = hi - lo;

      Acc acc = chunked_reduce<Acc>(
          count, kPairChunk,
          [&] { return Acc{Vector::Zero(model.params.size()), 0.0}; },
          [&](Acc& a, std::size_t t) {
            auto [i, j] = pl.pairs[order[lo + t]];
            const double d = target.d(i, j);
            PairGradient g = model_distance_grad(model, i, j, cfg.sinkhorn);
            a.loss += std::abs(g.distance - d) / d;
            if (g.degenerate) return;
            // objective term |dm - d| / d: subgradient 0 at dm == d
            double w = 0.0;
            if (g.distance > d) {
              w = 1.0 / d;
            } else if (g.distance < d) {
              w = -1.0 / d;
            }
            if (w == 0.0) return;
            a.grad.segment(static_cast<long>(i) * per, per) += w * g.grad_i;
            a.grad.segment(static_cast<long>(j) * per, per) += w * g.grad_j;
          },
          [](Acc& into, Acc&& part) {
            into.grad += part.grad;
            into.loss += part.loss;
          });

      acc.grad /= static_cast<double>(count);
      if (!acc.grad.allFinite() || !std::isfinite(acc.loss)) {
        throw Error::format(
            "distortion training diverged at epoch {} (non-finite loss or "
            "gradient; lambda={} may be too small for this metric scale)",
            epoch, cfg.sinkhorn.lambda);
      }
      adam_step(model.params, acc.grad, adam);
      if (kind == ModelKind::kHyperbolic) {
        for (int o = 0; o < n; ++o) {
          auto seg = model.params.segment(static_cast<long>(o) * per, per);
          seg = project_ball(seg, cfg.ball_eps);
        }
      }
      epoch_loss += acc.loss;
      epoch_terms += count;
    }
    history.push_back(epoch_loss / static_cast<double>(epoch_terms));
  }
  return {std::move(model), std::move(history)};
}

}  // namespace wembed
