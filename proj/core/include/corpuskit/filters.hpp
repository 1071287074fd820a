#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "corpuskit/classifier.hpp"
#include "corpuskit/document.hpp"
#include "corpuskit/lexicon.hpp"
#include "corpuskit/t2s.hpp"

namespace corpuskit {

struct SensitiveLexicon {
  Lexicon words;  // t2s-normalized
  std::string version;

  // Placeholder list shipped with the library.
  static SensitiveLexicon bundled();
  // Entries are t2s-normalized with `table` on load.
  static SensitiveLexicon load(const std::filesystem::path& path,
                               const ConversionTable& table = ConversionTable::bundled());
};

// Drops when more than `max_distinct` different lexicon words occur.
// Repeated occurrences of one word count once. Throws ConfigError for an
// empty lexicon.
RuleVerdict sensitive_filter(const Document& doc, const SensitiveLexicon& lexicon,
                             std::size_t max_distinct = 3);

// Spam is the positive class; drops when score >= threshold.
RuleVerdict spam_filter(const Document& doc, const LinearTextClassifier& clf,
                        double threshold = 0.5);

enum class QualityMode {
  kThreshold,  // drop iff score < threshold
  kPareto,     // keep iff pareto(alpha) > 1 - score, seeded per document
};

struct QualityOptions {
  double threshold = 0.5;
  QualityMode mode = QualityMode::kThreshold;
  double pareto_alpha = 9.0;
  std::uint64_t seed = 0;
};

// High quality is the positive class. The verdict detail carries the score
// as "score=<value>".
RuleVerdict quality_filter(const Document& doc, const LinearTextClassifier& clf,
                           const QualityOptions& options = {});

inline RuleVerdict quality_filter(const Document& doc, const LinearTextClassifier& clf,
                                  double threshold) {
  return quality_filter(doc, clf, QualityOptions{.threshold = threshold});
}

// Lomax draw with shape alpha from a uniform u in [0, 1).
double pareto_from_uniform(double alpha, double u);

}  // namespace corpuskit
