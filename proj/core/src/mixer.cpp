#include "corpuskit/mixer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <set>

#include <json.hpp>

#include "corpuskit/error.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/random.hpp"

namespace corpuskit {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string name_of(Source s) { return std::string(source_name(s)); }

// Per-source generator stream derived from the run seed.
std::uint64_t source_seed(std::uint64_t seed, Source s) {
  return mix64(seed ^ (0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(s) + 1)));
}

}  // namespace

double MixSpec::weight_sum() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.weight;
  return sum;
}

const MixEntry* MixSpec::find(Source s) const {
  for (const auto& e : entries) {
    if (e.source == s) return &e;
  }
  return nullptr;
}

void MixSpec::validate() const {
  if (entries.empty()) throw ConfigError("mix spec has no entries");
  std::set<Source> seen;
  for (const auto& e : entries) {
    if (!seen.insert(e.source).second) throw ConfigError("mix spec lists " + name_of(e.source) + " twice");
    if (!(e.weight >= 0.0)) throw ConfigError("negative weight for " + name_of(e.source));
    if (e.quantity_tokens == 0) throw ConfigError("zero quantity for " + name_of(e.source));
  }
  const double sum = weight_sum();
  if (sum < 0.99 || sum > 1.01) throw ConfigError("mix weights sum to " + fmt("%.4f", sum) + ", outside [0.99, 1.01]");
}

MixSpec MixSpec::from_json(std::string_view text) {
  MixSpec spec;
  try {
    const json j = json::parse(text);
    spec.total_training_tokens = j.value("total_training_tokens", std::uint64_t{0});
    for (const auto& e : j.at("entries")) {
      MixEntry entry;
      const auto name = e.at("source").get<std::string>();
      const auto src = parse_source(name);
      if (!src) throw ConfigError("unknown source '" + name + "' in mix spec");
      entry.source = *src;
      entry.quantity_tokens = e.at("quantity_tokens").get<std::uint64_t>();
      entry.weight = e.at("weight").get<double>();
      if (e.contains("reported_epochs")) entry.reported_epochs = e.at("reported_epochs").get<double>();
      spec.entries.push_back(entry);
    }
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed mix spec: ") + ex.what());
  }
  return spec;
}

MixSpec MixSpec::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mix spec " + path.string());
  return from_json(std::string(std::istreambuf_iterator<char>(in), {}));
}

std::string MixSpec::to_json() const {
  json j;
  j["total_training_tokens"] = total_training_tokens;
  j["entries"] = json::array();
  for (const auto& e : entries) {
    json row;
    row["source"] = name_of(e.source);
    row["quantity_tokens"] = e.quantity_tokens;
    row["weight"] = e.weight;
    if (e.reported_epochs) row["reported_epochs"] = *e.reported_epochs;
    j["entries"].push_back(row);
  }
  return j.dump(2);
}

std::map<Source, double> compute_epochs(const MixSpec& spec) {
  if (spec.total_training_tokens == 0) throw ConfigError("total_training_tokens is not set");
  std::map<Source, double> out;
  for (const auto& e : spec.entries) {
    if (e.quantity_tokens == 0) throw ConfigError("zero quantity for " + name_of(e.source));
    out[e.source] = e.weight * static_cast<double>(spec.total_training_tokens) / static_cast<double>(e.quantity_tokens);
  }
  return out;
}

std::vector<MixWarning> validate_mix(const MixSpec& spec, const MixCheckOptions& options) {
  for (const auto& e : spec.entries) {
    if (e.weight < 0.0) throw ConfigError("negative weight for " + name_of(e.source));
  }
  std::vector<MixWarning> out;
  const double sum = spec.weight_sum();
  if (std::abs(sum - 1.0) > options.sum_tolerance) {
    out.push_back({MixWarningKind::kWeightSum, std::nullopt,
                   "weights sum to " + fmt("%.2f", sum * 100.0) + "%; sampling renormalizes them"});
  }
  for (const auto& e : spec.entries) {
    if (e.weight == 0.0) {
      out.push_back({MixWarningKind::kZeroWeight, e.source, name_of(e.source) + " has weight 0 and is never sampled"});
    }
  }
  if (spec.total_training_tokens > 0) {
    for (const auto& [src, epochs] : compute_epochs(spec)) {
      if (epochs > options.epoch_cap) {
        out.push_back({MixWarningKind::kEpochCap, src,
                       name_of(src) + " is repeated " + fmt("%.2f", epochs) + " times (cap " +
                           fmt("%.2f", options.epoch_cap) + ")"});
      }
    }
  }

  double lo = INFINITY;
  double hi = 0.0;
  Source lo_src{};
  Source hi_src{};
  for (const auto& e : spec.entries) {
    if (!e.reported_epochs || e.weight <= 0.0) continue;
    const double implied = *e.reported_epochs * static_cast<double>(e.quantity_tokens) / e.weight;
    if (implied < lo) lo = implied, lo_src = e.source;
    if (implied > hi) hi = implied, hi_src = e.source;
  }
  if (hi > 0.0 && hi > lo * (1.0 + options.implied_total_tolerance)) {
    out.push_back({MixWarningKind::kInconsistentEpochs, std::nullopt,
                   "reported epochs imply total training tokens from " + fmt("%.4g", lo) + " (" + name_of(lo_src) +
                       ") to " + fmt("%.4g", hi) + " (" + name_of(hi_src) + ")"});
  }
  return out;
}

SampledStream sample_stream(const SourcePools& pools, const MixSpec& spec, std::uint64_t seed, std::size_t n_draws) {
  spec.validate();
  struct Lane {
    Source source;
    double cumulative;
    const std::vector<Document>* docs;
    Rng rng;
    std::vector<std::size_t> order;
    std::size_t cursor;
  };
  std::vector<Lane> lanes;
  double total = 0.0;
  for (const auto& e : spec.entries) {
    if (e.weight <= 0.0) continue;
    const auto it = pools.find(e.source);
    if (it == pools.end() || it->second.empty()) {
      throw ConfigError("source " + name_of(e.source) + " has positive weight but no documents");
    }
    total += e.weight;
    lanes.push_back({e.source, total, &it->second, Rng(source_seed(seed, e.source)), {}, it->second.size()});
  }

  SampledStream stream;
  stream.seed = seed;
  stream.draws.reserve(n_draws);
  Rng picker(seed);
  std::map<Source, std::uint64_t> counts;
  for (std::size_t d = 0; d < n_draws; ++d) {
    const double u = picker.uniform() * total;
    auto lane = std::find_if(lanes.begin(), lanes.end(), [u](const Lane& l) { return u < l.cumulative; });
    if (lane == lanes.end()) lane = std::prev(lanes.end());  // rounding at the top edge
    if (lane->cursor == lane->docs->size()) {
      lane->order.resize(lane->docs->size());
      for (std::size_t i = 0; i < lane->order.size(); ++i) lane->order[i] = i;
      lane->rng.shuffle(lane->order);
      lane->cursor = 0;
    }
    const std::size_t index = lane->order[lane->cursor++];
    stream.draws.push_back({lane->source, index, (*lane->docs)[index].id});
    ++counts[lane->source];
  }
  for (const auto& e : spec.entries) {
    stream.realized_weights[e.source] =
        n_draws ? static_cast<double>(counts[e.source]) / static_cast<double>(n_draws) : 0.0;
  }
  return stream;
}

MixReport mix_report(const SampledStream& stream, const SourcePools& pools, const Tokenizer& tokenizer,
                     std::uint64_t bucket_width, unsigned workers) {
  if (bucket_width == 0) throw ConfigError("histogram bucket width must be positive");
  // Count each distinct drawn document once.
  std::vector<std::pair<Source, std::size_t>> unique;
  for (const auto& d : stream.draws) unique.emplace_back(d.source, d.index);
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<std::uint64_t> lengths(unique.size());
  parallel_for(unique.size(), workers, [&](std::size_t i) {
    const auto it = pools.find(unique[i].first);
    if (it == pools.end() || unique[i].second >= it->second.size()) return;
    lengths[i] = tokenizer.count(it->second[unique[i].second].text);
  });
  for (std::size_t i = 0; i < unique.size(); ++i) {
    const auto it = pools.find(unique[i].first);
    if (it == pools.end() || unique[i].second >= it->second.size()) {
      throw ConfigError("stream references a document missing from the " + name_of(unique[i].first) + " pool");
    }
  }

  MixReport report;
  report.bucket_width = bucket_width;
  report.draws = stream.draws.size();
  for (const auto& [src, w] : stream.realized_weights) report.per_source[src];
  for (const auto& d : stream.draws) {
    const auto pos = std::lower_bound(unique.begin(), unique.end(), std::make_pair(d.source, d.index)) - unique.begin();
    const std::uint64_t len = lengths[static_cast<std::size_t>(pos)];
    auto& s = report.per_source[d.source];
    ++s.draws;
    s.tokens += len;
    report.total_tokens += len;
    ++report.histogram[len / bucket_width * bucket_width];
  }
  for (auto& [src, s] : report.per_source) {
    if (report.draws) s.realized_weight = static_cast<double>(s.draws) / static_cast<double>(report.draws);
    if (report.total_tokens) s.token_share = static_cast<double>(s.tokens) / static_cast<double>(report.total_tokens);
    if (s.draws) s.mean_doc_len = static_cast<double>(s.tokens) / static_cast<double>(s.draws);
  }
  return report;
}

std::string MixReport::to_json() const {
  json j;
  j["draws"] = draws;
  j["total_tokens"] = total_tokens;
  j["per_source"] = json::object();
  for (const auto& [src, s] : per_source) {
    j["per_source"][name_of(src)] = {{"draws", s.draws},
                                     {"tokens", s.tokens},
                                     {"realized_weight", s.realized_weight},
                                     {"token_share", s.token_share},
                                     {"mean_doc_len", s.mean_doc_len}};
  }
  j["bucket_width"] = bucket_width;
  j["histogram"] = json::array();
  for (const auto& [lo, n] : histogram) j["histogram"].push_back({lo, n});
  return j.dump(2);
}

void write_stream(const SampledStream& stream, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& d : stream.draws) {
      json row;
      row["source"] = name_of(d.source);
      row["doc_id"] = d.doc_id;
      out << row.dump() << '\n';
    }
  }
  json manifest;
  manifest["seed"] = stream.seed;
  manifest["draws"] = stream.draws.size();
  manifest["realized_weights"] = json::object();
  for (const auto& [src, w] : stream.realized_weights) manifest["realized_weights"][name_of(src)] = w;
  std::ofstream out(path.string() + ".manifest", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string() + ".manifest");
  out << manifest.dump(2) << '\n';
}

std::string format_mix_table(const MixSpec& spec, const SampledStream& stream) {
  std::map<Source, double> epochs;
  if (spec.total_training_tokens > 0) epochs = compute_epochs(spec);
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %16s %10s %10s %10s\n", "source", "quantity", "weight", "epochs", "realized");
  out += line;
  for (const auto& e : spec.entries) {
    const auto rw = stream.realized_weights.find(e.source);
    const std::string ep = epochs.count(e.source) ? fmt("%.3f", epochs[e.source]) : std::string("-");
    std::snprintf(line, sizeof line, "%-14s %16llu %9.2f%% %10s %9.2f%%\n", name_of(e.source).c_str(),
                  static_cast<unsigned long long>(e.quantity_tokens), e.weight * 100.0, ep.c_str(),
                  rw == stream.realized_weights.end() ? 0.0 : rw->second * 100.0);
    out += line;
  }
  return out;
}

}  // namespace corpuskit
