#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace corpuskit {

struct ClassifierParams {
  std::uint32_t dim = 1u << 18;  // hash buckets, a power of two >= 1024
  std::vector<unsigned> orders = {1, 2};  // character n-gram orders
  std::uint64_t hash_seed = 0x6a09e667f3bcc908ULL;

  void validate() const;
  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

struct SparseFeature {
  std::uint32_t index;
  double value;
  friend bool operator==(const SparseFeature&, const SparseFeature&) = default;
};

// Sorted by index, no duplicate indices.
using SparseVector = std::vector<SparseFeature>;

// Hashed character n-gram counts, L2-normalized. Empty text -> empty vector.
SparseVector featurize(std::string_view text, const ClassifierParams& params);

// Logistic model over hashed bag-of-n-grams features. Immutable.
class LinearTextClassifier {
 public:
  LinearTextClassifier(ClassifierParams params, std::vector<double> weights, double bias,
                       std::map<std::string, std::string> trained_on = {});

  // All-zero weights; scores 0.5 on any text when bias is 0.
  static LinearTextClassifier zeros(const ClassifierParams& params, double bias = 0.0);

  const ClassifierParams& params() const { return params_; }
  const std::vector<double>& weights() const { return weights_; }
  double bias() const { return bias_; }
  const std::map<std::string, std::string>& trained_on() const { return trained_on_; }

  double logit(const SparseVector& x) const;
  // Probability of the positive class, strictly inside (0, 1).
  double score(const SparseVector& x) const;
  double score(std::string_view text) const { return score(featurize(text, params_)); }

  // Versioned little-endian blob with a trailing checksum.
  std::string to_bytes() const;
  static LinearTextClassifier from_bytes(std::string_view bytes);
  void save(const std::filesystem::path& path) const;
  static LinearTextClassifier load(const std::filesystem::path& path);

  friend bool operator==(const LinearTextClassifier&, const LinearTextClassifier&) = default;

 private:
  ClassifierParams params_;
  std::vector<double> weights_;
  double bias_;
  std::map<std::string, std::string> trained_on_;
};

struct TrainHyper {
  unsigned epochs = 5;
  double lr = 0.5;  // decays linearly to zero over training
  ClassifierParams features;
  std::uint64_t seed = 1;
  double validation_fraction = 0.0;  // per class, taken before training
};

struct TrainResult {
  LinearTextClassifier model;
  std::optional<double> heldout_accuracy;
  std::optional<double> heldout_auc;
};

// Logistic regression by SGD over a seeded shuffle each epoch; positive
// examples are label 1. Single-threaded and bit-reproducible for fixed
// inputs and hyperparameters. Throws ConfigError when a class is empty.
TrainResult train_classifier(std::span<const std::string> positives,
                             std::span<const std::string> negatives, const TrainHyper& hyper);

// Area under the ROC curve with ties counted as one half.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace corpuskit
