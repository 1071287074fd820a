#include "corpuskit/filters.hpp"

#include <cmath>
#include <cstdio>

#include "corpuskit/cleaner.hpp"
#include "corpuskit/error.hpp"
#include "corpuskit/hash.hpp"
#include "corpuskit/random.hpp"

namespace corpuskit {

namespace embedded {
extern const std::string_view sensitive_placeholder_txt;
}

namespace {

std::string format_score(double s) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "score=%.6f", s);
  return buf;
}

}  // namespace

SensitiveLexicon SensitiveLexicon::bundled() {
  return {normalize_lexicon(Lexicon::parse(embedded::sensitive_placeholder_txt), ConversionTable::bundled()),
          "placeholder-1"};
}

SensitiveLexicon SensitiveLexicon::load(const std::filesystem::path& path, const ConversionTable& table) {
  return {normalize_lexicon(Lexicon::load(path), table), path.filename().string()};
}

RuleVerdict sensitive_filter(const Document& doc, const SensitiveLexicon& lexicon, std::size_t max_distinct) {
  if (lexicon.words.empty()) throw ConfigError("sensitive lexicon is empty");
  const auto matches = lexicon.words.distinct_matches(doc.text);
  std::string detail = std::to_string(matches.size()) + " distinct";
  for (std::size_t i : matches) detail += " " + lexicon.words.words()[i];
  const Action action = matches.size() > max_distinct ? Action::kDrop : Action::kKeep;
  return {"sensitive_words", action, std::move(detail), Stage::kFilter};
}

RuleVerdict spam_filter(const Document& doc, const LinearTextClassifier& clf, double threshold) {
  const double s = clf.score(doc.text);
  return {"spam", s >= threshold ? Action::kDrop : Action::kKeep, format_score(s), Stage::kFilter};
}

double pareto_from_uniform(double alpha, double u) { return std::pow(1.0 - u, -1.0 / alpha) - 1.0; }

RuleVerdict quality_filter(const Document& doc, const LinearTextClassifier& clf, const QualityOptions& options) {
  const double s = clf.score(doc.text);
  bool drop;
  if (options.mode == QualityMode::kThreshold) {
    drop = s < options.threshold;
  } else {
    Rng rng(options.seed ^ hash64(doc.id));
    drop = !(pareto_from_uniform(options.pareto_alpha, rng.uniform()) > 1.0 - s);
  }
  return {"low_quality", drop ? Action::kDrop : Action::kKeep, format_score(s), Stage::kFilter};
}

}  // namespace corpuskit
