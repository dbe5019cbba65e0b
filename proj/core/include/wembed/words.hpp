#pragma once

#include <iosfwd>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "wembed/embedding_model.hpp"
#include "wembed/ot.hpp"

namespace wembed {

// Tokens ordered by descending corpus frequency, ties lexicographic;
// ids dense in [0, size).
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> index;

  int size() const { return static_cast<int>(words.size()); }
  bool contains(const std::string& w) const { return index.count(w) > 0; }
  int id(const std::string& w) const;
};

struct WordTrainConfig {
  int window = 2;         // context half-width l
  double margin = 1.0;    // contrastive margin m
  int neg_rate = 1;       // negatives per positive
  double lambda = 0.05;   // sinkhorn regularizer
  int epochs = 3;
  int vocab_cap = 8000;
  int hidden = 64;        // width of the shared linear stage
  int cloud_points = 16;  // M
  int cloud_dim = 4;      // k
  int batch_size = 64;    // pairs per optimizer step
  int sinkhorn_iterations = 50;
  double lr = 1e-3;
  double init_scale = 0.1;
  bool tilted_negatives = false;  // unigram^(3/4) instead of uniform
  unsigned long seed = 0;

  void validate() const;
  SinkhornConfig sinkhorn() const;
};

struct TrainingPair {
  int center = 0;
  int other = 0;
  int label = 0;  // 1 iff drawn from a true context window
};

// Siamese word encoder: a shared linear stage mapping one-hot words to a
// hidden vector, followed by a shared linear map onto M*k cloud coordinates.
// Both branches of a training pair use the same weights.
struct WordModel {
  Vocabulary vocab;
  int hidden = 0;
  int cloud_points = 0;  // M
  int cloud_dim = 0;     // k
  // layout: embed (hidden x vocab, column per word), then
  //         out_map ((M*k) x hidden)
  Vector params;

  Eigen::Map<const Matrix> embed() const;
  Eigen::Map<const Matrix> out_map() const;
  Eigen::Map<Matrix> embed();
  Eigen::Map<Matrix> out_map();

  PointCloud cloud(int word_id) const;

  // Materializes every word's cloud as a labeled wasserstein embedding
  // table; the persistence and retrieval form of a trained word model.
  EmbeddingModel to_clouds() const;
};

struct BenchmarkDataset {
  struct Triple {
    std::string word_a, word_b;
    double human_score;
  };
  std::vector<Triple> triples;
};

struct SimilarityResult {
  double spearman = 0.0;
  int covered_pairs = 0;
};

// Lowercases and splits on runs of non-alphanumeric characters.
std::vector<std::string> tokenize(std::istream& in);
std::vector<std::string> tokenize_file(const std::string& path);

// Top-`cap` tokens by frequency (ties lexicographic).
Vocabulary build_vocab(const std::vector<std::string>& tokens, int cap);

// Positive pairs for every ordered (i, j), j != i, |i - j| <= window, in
// stream order, each followed by its negatives: (center, random word) with
// the center's true window excluded from the draw. Deterministic in `rng`.
std::vector<TrainingPair> generate_pairs(const std::vector<int>& stream,
                                         const WordTrainConfig& cfg,
                                         std::mt19937_64& rng);

// r * d^2 + (1 - r) * max(0, m - d)^2
double contrastive_loss(double dist, int label, double margin);

struct WordBatchGradient {
  double loss = 0.0;   // summed over the batch
  Vector grad;         // same layout as WordModel::params, summed
  long terms = 0;
};

// Contrastive loss and its exact gradient for a batch of pairs, chained
// through the Sinkhorn divergence and both linear stages of the Siamese
// encoder. The building block of train_word_model.
WordBatchGradient word_loss_grad(const WordModel& model,
                                 const std::vector<TrainingPair>& pairs,
                                 const WordTrainConfig& cfg);

// Contrastive Siamese training over the corpus token stream.
WordModel train_word_model(const std::vector<std::string>& tokens,
                           const WordTrainConfig& cfg);
WordModel train_word_model_file(const std::string& corpus_path,
                                const WordTrainConfig& cfg);

// All other vocabulary words ranked by ascending Sinkhorn distance to the
// query's cloud; ties broken by vocabulary id. The model must carry labels.
std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingModel& clouds, const std::string& query, int topk,
    const SinkhornConfig& cfg);
std::vector<std::pair<std::string, double>> nearest_neighbors(
    const WordModel& model, const std::string& query, int topk,
    const SinkhornConfig& cfg);

// Spearman rank correlation (average ranks on ties) between the model's
// similarity (negative Sinkhorn distance) and human judgments, over pairs
// with both words in vocabulary.
SimilarityResult eval_similarity(const EmbeddingModel& clouds,
                                 const BenchmarkDataset& ds,
                                 const SinkhornConfig& cfg);
SimilarityResult eval_similarity(const WordModel& model,
                                 const BenchmarkDataset& ds,
                                 const SinkhornConfig& cfg);

// CSV with header `word1,word2,score`.
BenchmarkDataset load_benchmark_csv(const std::string& path);

// Rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace wembed
