#include "wembed/words.hpp"

#include <fmt/ranges.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>

#include "wembed/optim.hpp"
#include "wembed/parallel.hpp"

namespace wembed {

namespace {

constexpr std::size_t kPairChunk = 32;

using RowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::string lowercase(std::string s) {
  for (char& ch : s) {
    ch = static_cast<char>(
        std::tolower(static_cast<unsigned char>(ch)));
  }
  return s;
}

}  // namespace

int Vocabulary::id(const std::string& w) const {
  auto it = index.find(w);
  if (it == index.end()) throw Error::format("'{}' is not in vocabulary", w);
  return it->second;
}

void WordTrainConfig::validate() const {
  if (window < 1) throw Error::format("window must be >= 1, got {}", window);
  if (!(margin > 0.0)) {
    throw Error::format("margin must be positive, got {}", margin);
  }
  if (neg_rate < 0) throw Error("neg_rate must be >= 0");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (vocab_cap < 1) throw Error("vocab_cap must be >= 1");
  if (hidden < 1 || cloud_points < 1 || cloud_dim < 1) {
    throw Error("hidden, cloud_points, cloud_dim must be positive");
  }
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  sinkhorn().validate();
}

SinkhornConfig WordTrainConfig::sinkhorn() const {
  SinkhornConfig cfg;
  cfg.lambda = lambda;
  cfg.iterations = sinkhorn_iterations;
  return cfg;
}

std::vector<std::string> tokenize(std::istream& in) {
  std::vector<std::string> tokens;
  std::string current;
  char ch;
  while (in.get(ch)) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      current.push_back(
          static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> tokenize_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error::format("cannot open corpus '{}'", path);
  return tokenize(in);
}

Vocabulary build_vocab(const std::vector<std::string>& tokens, int cap) {
  if (tokens.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  if (cap < 1) throw Error("vocabulary cap must be positive");
  std::unordered_map<std::string, long> counts;
  for (const auto& t : tokens) ++counts[t];

  std::vector<std::pair<std::string, long>> by_freq(counts.begin(),
                                                    counts.end());
  std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(by_freq.size()) > cap) by_freq.resize(cap);

  Vocabulary v;
  v.words.reserve(by_freq.size());
  for (auto& [word, cnt] : by_freq) {
    v.index.emplace(word, static_cast<int>(v.words.size()));
    v.words.push_back(word);
  }
  return v;
}

std::vector<TrainingPair> generate_pairs(const std::vector<int>& stream,
                                         const WordTrainConfig& cfg,
                                         std::mt19937_64& rng) {
  std::vector<TrainingPair> pairs;
  const long T = static_cast<long>(stream.size());
  const long l = cfg.window;
  if (T < 2) return pairs;
  std::uniform_int_distribution<int> any_word(0, cfg.vocab_cap - 1);

  std::vector<int> window_ids;
  for (long i = 0; i < T; ++i) {
    window_ids.clear();
    const long lo = std::max<long>(0, i - l);
    const long hi = std::min<long>(T - 1, i + l);
    for (long j = lo; j <= hi; ++j) window_ids.push_back(stream[j]);

    for (long j = lo; j <= hi; ++j) {
      if (j == i) continue;
      pairs.push_back({stream[i], stream[j], 1});
      for (int neg = 0; neg < cfg.neg_rate; ++neg) {
        for (int tries = 0; tries < 100; ++tries) {
          int w = any_word(rng);
          if (std::find(window_ids.begin(), window_ids.end(), w) !=
              window_ids.end()) {
            continue;
          }
          pairs.push_back({stream[i], w, 0});
          break;
        }
      }
    }
  }
  return pairs;
}

double contrastive_loss(double dist, int label, double margin) {
  if (dist < 0.0) throw Error("contrastive_loss: distance must be >= 0");
  if (label == 1) return dist * dist;
  const double hinge = std::max(0.0, margin - dist);
  return hinge * hinge;
}

Eigen::Map<const Matrix> WordModel::embed() const {
  return {params.data(), hidden, vocab.size()};
}
Eigen::Map<const Matrix> WordModel::out_map() const {
  return {params.data() + static_cast<long>(hidden) * vocab.size(),
          static_cast<long>(cloud_points) * cloud_dim, hidden};
}
Eigen::Map<Matrix> WordModel::embed() {
  return {params.data(), hidden, vocab.size()};
}
Eigen::Map<Matrix> WordModel::out_map() {
  return {params.data() + static_cast<long>(hidden) * vocab.size(),
          static_cast<long>(cloud_points) * cloud_dim, hidden};
}

PointCloud WordModel::cloud(int word_id) const {
  if (word_id < 0 || word_id >= vocab.size()) {
    throw Error::format("word id {} out of range [0,{})", word_id,
                        vocab.size());
  }
  Vector flat = out_map() * embed().col(word_id);
  Eigen::Map<const RowMajor> view(flat.data(), cloud_points, cloud_dim);
  return PointCloud{Matrix(view)};
}

EmbeddingModel WordModel::to_clouds() const {
  EmbeddingModel m;
  m.kind = ModelKind::kWasserstein;
  m.n_objects = vocab.size();
  m.points = cloud_points;
  m.ground_dim = cloud_dim;
  const int per = cloud_points * cloud_dim;
  m.params.resize(static_cast<long>(m.n_objects) * per);
  for (int w = 0; w < m.n_objects; ++w) {
    Vector flat = out_map() * embed().col(w);
    m.params.segment(static_cast<long>(w) * per, per) = flat;
  }
  m.labels = vocab.words;
  m.validate();
  return m;
}

WordBatchGradient word_loss_grad(const WordModel& model,
                                 const std::vector<TrainingPair>& pairs,
                                 const WordTrainConfig& cfg) {
  const SinkhornConfig sk = cfg.sinkhorn();
  const int cloud_flat = model.cloud_points * model.cloud_dim;
  const long out_offset =
      static_cast<long>(model.hidden) * model.vocab.size();

  return chunked_reduce<WordBatchGradient>(
      pairs.size(), kPairChunk,
      [&] {
        return WordBatchGradient{0.0, Vector::Zero(model.params.size()), 0};
      },
      [&](WordBatchGradient& a, std::size_t t) {
        const TrainingPair& pr = pairs[t];
        SinkhornGradient g =
            sinkhorn_grad(model.cloud(pr.center), model.cloud(pr.other), sk);
        a.loss += contrastive_loss(g.value, pr.label, cfg.margin);
        a.terms += 1;
        double dl_ddist;
        if (pr.label == 1) {
          dl_ddist = 2.0 * g.value;
        } else {
          dl_ddist = -2.0 * std::max(0.0, cfg.margin - g.value);
        }
        if (dl_ddist == 0.0) return;

        auto scatter = [&](int word, const Matrix& grad_cloud) {
          // row-major cloud gradient -> flat coordinate gradient
          Vector gflat(cloud_flat);
          for (int r = 0; r < model.cloud_points; ++r) {
            for (int c = 0; c < model.cloud_dim; ++c) {
              gflat[r * model.cloud_dim + c] = grad_cloud(r, c);
            }
          }
          gflat *= dl_ddist;
          // cloud_flat = out_map * embed_col(word)
          a.grad
              .segment(static_cast<long>(word) * model.hidden, model.hidden)
              .noalias() += model.out_map().transpose() * gflat;
          Eigen::Map<Matrix> g_out(a.grad.data() + out_offset, cloud_flat,
                                   model.hidden);
          g_out.noalias() += gflat * model.embed().col(word).transpose();
        };
        scatter(pr.center, g.grad_a);
        scatter(pr.other, g.grad_b);
      },
      [](WordBatchGradient& into, WordBatchGradient&& part) {
        into.grad += part.grad;
        into.loss += part.loss;
        into.terms += part.terms;
      });
}

namespace {

WordModel init_word_model(Vocabulary vocab, const WordTrainConfig& cfg) {
  WordModel m;
  m.vocab = std::move(vocab);
  m.hidden = cfg.hidden;
  m.cloud_points = cfg.cloud_points;
  m.cloud_dim = cfg.cloud_dim;
  const long n_embed = static_cast<long>(cfg.hidden) * m.vocab.size();
  const long n_out =
      static_cast<long>(cfg.cloud_points) * cfg.cloud_dim * cfg.hidden;
  m.params.resize(n_embed + n_out);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, cfg.init_scale);
  for (Eigen::Index i = 0; i < m.params.size(); ++i) m.params[i] = gauss(rng);
  return m;
}

}  // namespace

WordModel train_word_model(const std::vector<std::string>& tokens,
                           const WordTrainConfig& cfg) {
  cfg.validate();
  Vocabulary vocab = build_vocab(tokens, cfg.vocab_cap);

  // OOV tokens are dropped before indexing, so windows slide over the
  // filtered stream.
  std::vector<int> stream;
  stream.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = vocab.index.find(t);
    if (it != vocab.index.end()) stream.push_back(it->second);
  }

  WordModel model = init_word_model(std::move(vocab), cfg);
  const int vocab_size = model.vocab.size();

  WordTrainConfig pair_cfg = cfg;
  pair_cfg.vocab_cap = vocab_size;  // negatives drawn from the realized vocab

  // unigram^(3/4) table for the tilted negative-sampling variant
  std::vector<double> neg_weights;
  if (cfg.tilted_negatives) {
    std::vector<long> counts(static_cast<std::size_t>(vocab_size), 0);
    for (int id : stream) ++counts[static_cast<std::size_t>(id)];
    neg_weights.resize(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      neg_weights[i] = std::pow(static_cast<double>(counts[i]), 0.75);
    }
  }

  AdamState adam(model.params.size(), AdamConfig{.lr = cfg.lr});

  bool any_pairs = false;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::mt19937_64 rng(cfg.seed ^ (0xb5ad4eceda1ce2a9ull +
                                    static_cast<unsigned long>(epoch)));
    std::vector<TrainingPair> pairs;
    if (cfg.tilted_negatives) {
      // draw positives uniformly as usual, negatives from the tilted table
      std::discrete_distribution<int> tilted(neg_weights.begin(),
                                             neg_weights.end());
      WordTrainConfig no_neg = pair_cfg;
      no_neg.neg_rate = 0;
      std::vector<TrainingPair> positives = generate_pairs(stream, no_neg, rng);
      pairs.reserve(positives.size() * (1 + cfg.neg_rate));
      for (const auto& p : positives) {
        pairs.push_back(p);
        for (int neg = 0; neg < cfg.neg_rate; ++neg) {
          pairs.push_back({p.center, tilted(rng), 0});
        }
      }
    } else {
      pairs = generate_pairs(stream, pair_cfg, rng);
    }
    if (pairs.empty()) {
      if (epoch == 0) {
        fmt::print(stderr,
                   "warning: corpus yields no training pairs; returning the "
                   "model at initialization\n");
      }
      break;
    }
    any_pairs = true;

    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    std::vector<TrainingPair> slice;
    for (std::size_t lo = 0; lo < pairs.size(); lo += batch) {
      const std::size_t hi = std::min(pairs.size(), lo + batch);
      slice.assign(pairs.begin() + static_cast<long>(lo),
                   pairs.begin() + static_cast<long>(hi));
      WordBatchGradient acc = word_loss_grad(model, slice, cfg);
      if (!std::isfinite(acc.loss) || !acc.grad.allFinite()) {
        throw Error::format(
            "word training diverged in pair batch [{}..{}) of epoch {} "
            "(batch starts with center={}, other={})",
            lo, hi, epoch, pairs[lo].center, pairs[lo].other);
      }
      acc.grad /= static_cast<double>(acc.terms);
      adam_step(model.params, acc.grad, adam);
    }
  }
  (void)any_pairs;
  return model;
}

WordModel train_word_model_file(const std::string& corpus_path,
                                const WordTrainConfig& cfg) {
  return train_word_model(tokenize_file(corpus_path), cfg);
}

namespace {

void require_labels(const EmbeddingModel& clouds) {
  if (clouds.kind != ModelKind::kWasserstein) {
    throw Error("word retrieval requires a wasserstein (point cloud) model");
  }
  if (clouds.labels.empty()) {
    throw Error("model carries no vocabulary labels");
  }
}

int lookup_query(const EmbeddingModel& clouds, const std::string& query) {
  for (int i = 0; i < clouds.n_objects; ++i) {
    if (clouds.labels[static_cast<std::size_t>(i)] == query) return i;
  }
  // suggest close spellings: words sharing the longest prefix with the query
  std::vector<std::string> hints;
  std::size_t best = 0;
  for (const auto& w : clouds.labels) {
    std::size_t common = 0;
    while (common < w.size() && common < query.size() &&
           w[common] == query[common]) {
      ++common;
    }
    if (common > best) {
      best = common;
      hints.clear();
    }
    if (common == best && best > 0 && hints.size() < 5) hints.push_back(w);
  }
  throw Error::format("'{}' is not in vocabulary (close spellings: {})", query,
                      hints.empty() ? "none" : fmt::format("{}", fmt::join(hints, ", ")));
}

}  // namespace

std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingModel& clouds, const std::string& query, int topk,
    const SinkhornConfig& cfg) {
  require_labels(clouds);
  if (topk < 1) throw Error("topk must be >= 1");
  const int q = lookup_query(clouds, query);
  const PointCloud qc = clouds.cloud(q);

  std::vector<double> dist(static_cast<std::size_t>(clouds.n_objects), 0.0);
  struct None {};
  chunked_reduce<None>(
      static_cast<std::size_t>(clouds.n_objects), kPairChunk,
      [] { return None{}; },
      [&](None&, std::size_t i) {
        if (static_cast<int>(i) == q) return;
        dist[i] = sinkhorn(qc, clouds.cloud(static_cast<int>(i)), cfg).value;
      },
      [](None&, None&&) {});

  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(clouds.n_objects) - 1);
  for (int i = 0; i < clouds.n_objects; ++i) {
    if (i != q) ids.push_back(i);
  }
  std::sort(ids.begin(), ids.end(), [&](int a, int b) {
    const double da = dist[static_cast<std::size_t>(a)];
    const double db = dist[static_cast<std::size_t>(b)];
    if (da != db) return da < db;
    return a < b;
  });
  const std::size_t keep =
      std::min<std::size_t>(static_cast<std::size_t>(topk), ids.size());
  std::vector<std::pair<std::string, double>> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.emplace_back(clouds.labels[static_cast<std::size_t>(ids[i])],
                     dist[static_cast<std::size_t>(ids[i])]);
  }
  return out;
}

std::vector<std::pair<std::string, double>> nearest_neighbors(
    const WordModel& model, const std::string& query, int topk,
    const SinkhornConfig& cfg) {
  return nearest_neighbors(model.to_clouds(), query, topk, cfg);
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) {
    throw Error("spearman: inputs must be nonempty and equal length");
  }
  auto ranks = [](const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> r(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
      const double avg = 0.5 * (static_cast<double>(i) +
                                static_cast<double>(j)) + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  std::vector<double> ra = ranks(a), rb = ranks(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) {
    throw Error("spearman: a rank list is constant");
  }
  return cov / std::sqrt(va * vb);
}

SimilarityResult eval_similarity(const EmbeddingModel& clouds,
                                 const BenchmarkDataset& ds,
                                 const SinkhornConfig& cfg) {
  require_labels(clouds);
  if (ds.triples.empty()) throw Error("benchmark dataset is empty");

  std::unordered_map<std::string, int> index;
  for (int i = 0; i < clouds.n_objects; ++i) {
    index.emplace(clouds.labels[static_cast<std::size_t>(i)], i);
  }
  std::vector<std::pair<int, int>> covered;
  std::vector<double> human;
  for (const auto& t : ds.triples) {
    auto ia = index.find(t.word_a);
    auto ib = index.find(t.word_b);
    if (ia == index.end() || ib == index.end()) continue;
    covered.emplace_back(ia->second, ib->second);
    human.push_back(t.human_score);
  }
  if (covered.empty()) {
    throw Error("no benchmark pair is fully covered by the vocabulary");
  }

  std::vector<double> sims(covered.size(), 0.0);
  struct None {};
  chunked_reduce<None>(
      covered.size(), kPairChunk, [] { return None{}; },
      [&](None&, std::size_t i) {
        auto [a, b] = covered[i];
        sims[i] = -sinkhorn(clouds.cloud(a), clouds.cloud(b), cfg).value;
      },
      [](None&, None&&) {});

  SimilarityResult out;
  out.covered_pairs = static_cast<int>(covered.size());
  out.spearman = spearman(sims, human);
  return out;
}

SimilarityResult eval_similarity(const WordModel& model,
                                 const BenchmarkDataset& ds,
                                 const SinkhornConfig& cfg) {
  return eval_similarity(model.to_clouds(), ds, cfg);
}

BenchmarkDataset load_benchmark_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error::format("cannot open benchmark '{}'", path);
  BenchmarkDataset ds;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string wa, wb, score;
    if (!std::getline(ls, wa, ',') || !std::getline(ls, wb, ',') ||
        !std::getline(ls, score)) {
      throw Error::format("{}:{}: expected word1,word2,score", path, line_no);
    }
    if (!header_seen) {
      header_seen = true;
      if (lowercase(wa) == "word1") continue;  // header row
    }
    try {
      ds.triples.push_back(
          {lowercase(wa), lowercase(wb), std::stod(score)});
    } catch (const std::exception&) {
      throw Error::format("{}:{}: '{}' is not a number", path, line_no, score);
    }
    if (!std::isfinite(ds.triples.back().human_score)) {
      throw Error::format("{}:{}: non-finite score", path, line_no);
    }
  }
  if (ds.triples.empty()) {
    throw Error::format("benchmark '{}' holds no scored pairs", path);
  }
  return ds;
}

}  // namespace wembed
