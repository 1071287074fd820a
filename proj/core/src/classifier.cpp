#include "corpuskit/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/random.hpp"
#include "corpuskit/utf8.hpp"

namespace corpuskit {

namespace {

constexpr std::string_view kMagic = "CKLINCLF";
constexpr std::uint32_t kVersion = 1;

double sigmoid(double z) {
  // Clamp so the result stays strictly inside (0, 1) in double precision.
  constexpr double lo = 1e-15;
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, lo, 1.0 - lo);
}

}  // namespace

void ClassifierParams::validate() const {
  if (dim < 1024 || (dim & (dim - 1)) != 0) {
    throw ConfigError("classifier dim must be a power of two >= 1024");
  }
  if (orders.empty()) throw ConfigError("classifier needs at least one n-gram order");
  for (unsigned n : orders) {
    if (n == 0) throw ConfigError("n-gram orders must be positive");
  }
}

SparseVector featurize(std::string_view text, const ClassifierParams& params) {
  const auto offsets = utf8::scalar_offsets(text);
  const std::size_t scalars = offsets.size() - 1;
  const std::uint32_t mask = params.dim - 1;

  std::vector<std::uint32_t> buckets;
  for (unsigned n : params.orders) {
    if (scalars < n) continue;
    for (std::size_t i = 0; i + n <= scalars; ++i) {
      const std::string_view gram = text.substr(offsets[i], offsets[i + n] - offsets[i]);
      // The order participates in the hash so that unigram and bigram
      // features with equal bytes do not share a bucket by construction.
      buckets.push_back(static_cast<std::uint32_t>(hash64(gram, params.hash_seed + n) & mask));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  SparseVector out;
  double sumsq = 0.0;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    const auto count = static_cast<double>(j - i);
    out.push_back({buckets[i], count});
    sumsq += count * count;
    i = j;
  }
  if (!out.empty()) {
    const double inv = 1.0 / std::sqrt(sumsq);
    for (auto& f : out) f.value *= inv;
  }
  return out;
}

LinearTextClassifier::LinearTextClassifier(ClassifierParams params, std::vector<double> weights,
                                           double bias, std::map<std::string, std::string> trained_on)
    : params_(std::move(params)), weights_(std::move(weights)), bias_(bias),
      trained_on_(std::move(trained_on)) {
  params_.validate();
  if (weights_.size() != params_.dim) throw ConfigError("weight vector size does not match dim");
}

LinearTextClassifier LinearTextClassifier::zeros(const ClassifierParams& params, double bias) {
  return LinearTextClassifier(params, std::vector<double>(params.dim, 0.0), bias);
}

double LinearTextClassifier::logit(const SparseVector& x) const {
  double z = bias_;
  for (const auto& f : x) z += weights_[f.index] * f.value;
  return z;
}

double LinearTextClassifier::score(const SparseVector& x) const { return sigmoid(logit(x)); }

std::string LinearTextClassifier::to_bytes() const {
  detail::ByteWriter w;
  w.raw(kMagic);
  w.u32(kVersion);
  w.u32(params_.dim);
  w.u32(static_cast<std::uint32_t>(params_.orders.size()));
  for (unsigned n : params_.orders) w.u32(n);
  w.u64(params_.hash_seed);
  w.f64(bias_);
  for (double v : weights_) w.f64(v);
  w.u32(static_cast<std::uint32_t>(trained_on_.size()));
  for (const auto& [k, v] : trained_on_) {
    w.str(k);
    w.str(v);
  }
  return w.finish();
}

LinearTextClassifier LinearTextClassifier::from_bytes(std::string_view bytes) {
  detail::ByteReader r(bytes, "classifier model");
  if (r.raw(kMagic.size()) != kMagic) throw FormatError("classifier model: bad magic");
  if (const auto v = r.u32(); v != kVersion) {
    throw FormatError("classifier model: unsupported version " + std::to_string(v));
  }
  ClassifierParams params;
  params.dim = r.u32();
  params.orders.resize(r.u32());
  for (auto& n : params.orders) n = r.u32();
  params.hash_seed = r.u64();
  params.validate();
  const double bias = r.f64();
  std::vector<double> weights(params.dim);
  for (auto& v : weights) v = r.f64();
  std::map<std::string, std::string> trained_on;
  const std::uint32_t n_meta = r.u32();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.str();
    trained_on[std::move(k)] = r.str();
  }
  if (!r.done()) throw FormatError("classifier model: trailing bytes");
  return LinearTextClassifier(std::move(params), std::move(weights), bias, std::move(trained_on));
}

void LinearTextClassifier::save(const std::filesystem::path& path) const {
  detail::write_binary_file(path, to_bytes());
}

LinearTextClassifier LinearTextClassifier::load(const std::filesystem::path& path) {
  return from_bytes(detail::read_binary_file(path));
}

TrainResult train_classifier(std::span<const std::string> positives,
                             std::span<const std::string> negatives, const TrainHyper& hyper) {
  if (positives.empty() || negatives.empty()) {
    throw ConfigError("classifier training needs both positive and negative examples");
  }
  hyper.features.validate();
  if (!(hyper.validation_fraction >= 0.0 && hyper.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must be within [0, 1)");
  }
  if (hyper.epochs == 0 || !(hyper.lr > 0.0)) throw ConfigError("epochs and lr must be positive");

  Rng rng(hyper.seed);
  struct Example {
    SparseVector x;
    int y;
  };
  std::vector<Example> train;
  std::vector<Example> heldout;
  auto split = [&](std::span<const std::string> texts, int label) {
    std::vector<std::size_t> order(texts.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    const auto n_val = static_cast<std::size_t>(std::floor(hyper.validation_fraction * static_cast<double>(texts.size())));
    for (std::size_t k = 0; k < order.size(); ++k) {
      Example e{featurize(texts[order[k]], hyper.features), label};
      (k < n_val ? heldout : train).push_back(std::move(e));
    }
  };
  split(positives, 1);
  split(negatives, 0);
  if (train.empty()) throw ConfigError("validation split leaves no training examples");

  std::vector<double> w(hyper.features.dim, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_steps = static_cast<double>(hyper.epochs) * static_cast<double>(train.size());
  double step = 0.0;
  for (unsigned epoch = 0; epoch < hyper.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const Example& e = train[idx];
      const double lr = hyper.lr * (1.0 - step / total_steps);
      step += 1.0;
      double z = b;
      for (const auto& f : e.x) z += w[f.index] * f.value;
      const double g = sigmoid(z) - e.y;
      for (const auto& f : e.x) w[f.index] -= lr * g * f.value;
      b -= lr * g;
    }
  }

  std::map<std::string, std::string> meta = {
      {"positives", std::to_string(positives.size())},
      {"negatives", std::to_string(negatives.size())},
      {"epochs", std::to_string(hyper.epochs)},
      {"seed", std::to_string(hyper.seed)},
  };
  TrainResult result{LinearTextClassifier(hyper.features, std::move(w), b, std::move(meta)),
                     std::nullopt, std::nullopt};
  if (!heldout.empty()) {
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t correct = 0;
    for (const auto& e : heldout) {
      const double p = result.model.score(e.x);
      correct += (p >= 0.5) == (e.y == 1);
      scores.push_back(p);
      labels.push_back(e.y);
    }
    result.heldout_accuracy = static_cast<double>(correct) / static_cast<double>(heldout.size());
    result.heldout_auc = roc_auc(scores, labels);
  }
  return result;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ConfigError("roc_auc: size mismatch");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with average ranks for ties.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

}  // namespace corpuskit
