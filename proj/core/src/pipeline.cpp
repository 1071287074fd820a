#include "corpuskit/pipeline.hpp"

#include <glob.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "corpuskit/hash.hpp"
#include "corpuskit/parallel.hpp"
#include "corpuskit/shard.hpp"

namespace corpuskit {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr PipelineStage kOrder[] = {PipelineStage::kIngest, PipelineStage::kClean, PipelineStage::kFilter,
                                    PipelineStage::kDedup,  PipelineStage::kEval,  PipelineStage::kMix,
                                    PipelineStage::kStats};

std::uint64_t derive_seed(std::uint64_t seed, std::string_view component) {
  return mix64(seed ^ hash64(component, 0));
}

// ---- configuration parsing -------------------------------------------------

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& block) {
  if (!j.is_object()) throw ConfigError("'" + block + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in '" + block + "'");
    }
  }
}

const json* child(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (const json* v = child(j, key)) out = v->get<T>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void read_path(const json& j, const char* key, const fs::path& base, std::optional<fs::path>& out) {
  if (const json* v = child(j, key)) out = resolve(base, v->get<std::string>());
}

std::set<Source> read_sources(const json& j, const std::set<Source>& fallback) {
  const json* v = child(j, "sources");
  if (!v) return fallback;
  std::set<Source> out;
  for (const auto& name : *v) {
    const auto s = parse_source(name.get<std::string>());
    if (!s) throw ConfigError("unknown source '" + name.get<std::string>() + "'");
    out.insert(*s);
  }
  return out;
}

void read_model(const json& j, const fs::path& base, ModelSpec& m) {
  read_path(j, "model", base, m.model);
  read_path(j, "train_positive", base, m.train_positive);
  read_path(j, "train_negative", base, m.train_negative);
  read(j, "epochs", m.hyper.epochs);
  read(j, "lr", m.hyper.lr);
  read(j, "dim", m.hyper.features.dim);
  read(j, "orders", m.hyper.features.orders);
  read(j, "validation_fraction", m.hyper.validation_fraction);
  m.hyper.features.validate();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) out.push_back(line);
  }
  return out;
}

void write_text(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_docs(const fs::path& path, std::span<const Document> docs) {
  std::string buf;
  for (const auto& d : docs) {
    buf += serialize(d);
    buf += '\n';
  }
  write_text(path, buf);
}

std::vector<fs::path> expand_glob(const fs::path& pattern) {
  glob_t g{};
  const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
  std::vector<fs::path> out;
  if (rc == 0) {
    for (std::size_t i = 0; i < g.gl_pathc; ++i) out.emplace_back(g.gl_pathv[i]);
  }
  globfree(&g);
  if (rc != 0 && rc != GLOB_NOMATCH) throw IoError("cannot expand " + pattern.string());
  std::sort(out.begin(), out.end());
  return out;
}

std::uint64_t text_bytes(std::span<const Document> docs) {
  std::uint64_t n = 0;
  for (const auto& d : docs) n += d.text.size();
  return n;
}

std::vector<std::string> texts_of(std::span<const Document> docs) {
  std::vector<std::string> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.text);
  return out;
}

// ---- stage plumbing --------------------------------------------------------

std::vector<std::vector<Document>> read_stage(const PipelineConfig& cfg, PipelineStage upstream) {
  const fs::path dir = cfg.stage_dir(upstream);
  const auto shards = fs::is_directory(dir) ? list_shards(dir) : std::vector<fs::path>{};
  if (shards.empty()) {
    throw MissingUpstreamError("missing upstream shards in " + dir.string() + "; run the '" +
                               std::string(pipeline_stage_name(upstream)) + "' stage first");
  }
  std::vector<std::vector<Document>> out(shards.size());
  parallel_for(shards.size(), cfg.workers, [&](std::size_t i) { out[i] = read_shard(shards[i]); });
  return out;
}

std::vector<Document> flatten(std::vector<std::vector<Document>> shards) {
  std::vector<Document> out;
  for (auto& s : shards) std::move(s.begin(), s.end(), std::back_inserter(out));
  return out;
}

// State shared by the stages of one invocation.
struct RunContext {
  const PipelineConfig& cfg;
  std::ostream* log;
  std::unique_ptr<Tokenizer> tokenizer;
  std::string tokenizer_origin;

  void note(const std::string& msg) const {
    if (log) *log << msg << '\n';
  }

  const Tokenizer& tokenizer_for(std::span<const Document> corpus) {
    if (tokenizer) return *tokenizer;
    if (cfg.tokenizer == TokenizerKind::kChar) {
      tokenizer = std::make_unique<CharTokenizer>();
      tokenizer_origin = "char";
    } else if (cfg.tokenizer_model && fs::exists(*cfg.tokenizer_model)) {
      tokenizer = std::make_unique<BpeModel>(BpeModel::load(*cfg.tokenizer_model));
      tokenizer_origin = "bpe:" + cfg.tokenizer_model->string();
    } else if (corpus.empty()) {
      tokenizer = std::make_unique<CharTokenizer>();
      tokenizer_origin = "char (empty corpus, no BPE model)";
    } else {
      note("[tokenizer] training BPE to " + std::to_string(cfg.tokenizer_vocab) + " tokens");
      auto bpe = BpeModel::train(texts_of(corpus), cfg.tokenizer_vocab, cfg.workers);
      const fs::path path = cfg.output_dir / "models" / "bpe.txt";
      bpe.save(path);
      tokenizer = std::make_unique<BpeModel>(std::move(bpe));
      tokenizer_origin = "bpe:trained";
    }
    return *tokenizer;
  }
};

LinearTextClassifier obtain_model(const RunContext& ctx, const ModelSpec& spec, const std::string& name) {
  if (spec.model && fs::exists(*spec.model)) return LinearTextClassifier::load(*spec.model);
  if (!spec.train_positive || !spec.train_negative) {
    throw ConfigError("the " + name + " filter needs a model file or training files");
  }
  ctx.note("[filter] training " + name + " classifier");
  const auto pos = read_lines(*spec.train_positive);
  const auto neg = read_lines(*spec.train_negative);
  auto model = train_classifier(pos, neg, spec.hyper).model;
  model.save(ctx.cfg.output_dir / "models" / (name + ".bin"));
  return model;
}

StageReport run_ingest(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  StageReport r;
  std::vector<Document> docs;
  std::string errors;
  for (const auto& input : cfg.inputs) {
    std::vector<fs::path> files;
    for (const auto& pattern : input.globs) {
      const auto matched = expand_glob(resolve(cfg.base_dir, pattern));
      files.insert(files.end(), matched.begin(), matched.end());
    }
    std::sort(files.begin(), files.end());
    files.erase(std::unique(files.begin(), files.end()), files.end());
    for (const auto& file : files) {
      r.bytes_in += fs::file_size(file);
      if (input.text_fields.empty()) {
        auto res = ingest_jsonl(file, input.source, cfg.on_error);
        r.docs_in += res.lines;
        if (res.skipped) r.drops["malformed"] += res.skipped;
        for (const auto& e : res.errors) errors += file.filename().string() + ": " + e + "\n";
        std::move(res.docs.begin(), res.docs.end(), std::back_inserter(docs));
      } else {
        auto res = ingest_labeled_jsonl(file, input.text_fields, input.source, cfg.on_error);
        r.docs_in += res.lines;
        if (res.malformed) r.drops["malformed"] += res.malformed;
        if (res.rejected) r.drops["no_text_field"] += res.rejected;
        std::move(res.docs.begin(), res.docs.end(), std::back_inserter(docs));
      }
    }
  }
  const fs::path dir = cfg.stage_dir(PipelineStage::kIngest);
  write_shards(docs, dir, cfg.shard_size);
  write_text(dir / "errors.txt", errors);
  r.docs_out = docs.size();
  r.bytes_out = text_bytes(docs);
  return r;
}

StageReport run_clean(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto docs = flatten(read_stage(cfg, PipelineStage::kIngest));
  std::vector<std::optional<CleanResult>> results(docs.size());
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
    if (cfg.clean_sources.count(docs[i].source)) results[i] = clean_document(docs[i], cfg.clean);
  });

  StageReport r;
  r.docs_in = docs.size();
  r.bytes_in = text_bytes(docs);
  std::vector<Document> kept;
  std::vector<Document> dropped;
  std::map<std::string, std::uint64_t> transforms;
  std::uint64_t passthrough = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (!results[i]) {
      ++passthrough;
      kept.push_back(docs[i]);
      continue;
    }
    for (const auto& v : results[i]->verdicts) {
      if (v.action == Action::kTransform) ++transforms[v.rule_id];
    }
    if (results[i]->kept()) {
      kept.push_back(std::move(results[i]->doc));
    } else {
      ++r.drops[results[i]->verdicts.back().rule_id];
      dropped.push_back(std::move(results[i]->doc));
    }
  }
  const fs::path dir = cfg.stage_dir(PipelineStage::kClean);
  write_shards(kept, dir, cfg.shard_size);
  write_docs(dir / "dropped.jsonl", dropped);
  r.docs_out = kept.size();
  r.bytes_out = text_bytes(kept);
  r.details = json{{"passthrough", passthrough}, {"transforms", transforms}}.dump();
  return r;
}

StageReport run_filter(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto docs = flatten(read_stage(cfg, PipelineStage::kClean));
  const SensitiveLexicon lexicon =
      cfg.sensitive_lexicon ? SensitiveLexicon::load(*cfg.sensitive_lexicon, cfg.clean.t2s) : SensitiveLexicon::bundled();
  std::optional<LinearTextClassifier> spam;
  std::optional<LinearTextClassifier> quality;
  const auto uses = [&docs](const std::set<Source>& sources) {
    return std::any_of(docs.begin(), docs.end(), [&](const Document& d) { return sources.count(d.source) > 0; });
  };
  if (uses(cfg.spam_sources)) spam = obtain_model(ctx, cfg.spam, "spam");
  if (uses(cfg.quality_sources)) quality = obtain_model(ctx, cfg.quality, "quality");

  std::vector<Document> out(docs.begin(), docs.end());
  std::vector<char> drop(docs.size(), 0);
  parallel_for(docs.size(), cfg.workers, [&](std::size_t i) {
    Document& d = out[i];
    const auto apply = [&](RuleVerdict v) {
      const bool dropped = v.dropped();
      d.audit.push_back(std::move(v));
      return dropped;
    };
    bool dropped = false;
    if (cfg.sensitive_sources.count(d.source)) dropped = apply(sensitive_filter(d, lexicon, cfg.sensitive_max_distinct));
    if (!dropped && spam && cfg.spam_sources.count(d.source)) dropped = apply(spam_filter(d, *spam, cfg.spam_threshold));
    if (!dropped && quality && cfg.quality_sources.count(d.source)) {
      dropped = apply(quality_filter(d, *quality, cfg.quality_options));
    }
    drop[i] = dropped;
  });

  StageReport r;
  r.docs_in = docs.size();
  r.bytes_in = text_bytes(docs);
  std::vector<Document> kept;
  std::vector<Document> dropped;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (drop[i]) {
      ++r.drops[out[i].audit.back().rule_id];
      dropped.push_back(std::move(out[i]));
    } else {
      kept.push_back(std::move(out[i]));
    }
  }
  const fs::path dir = cfg.stage_dir(PipelineStage::kFilter);
  write_shards(kept, dir, cfg.shard_size);
  write_docs(dir / "dropped.jsonl", dropped);
  r.docs_out = kept.size();
  r.bytes_out = text_bytes(kept);
  r.details = json{{"sensitive_lexicon", lexicon.version}}.dump();
  return r;
}

StageReport run_dedup(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto upstream = read_stage(cfg, PipelineStage::kFilter);
  std::vector<std::vector<Document>> eligible(upstream.size());
  for (std::size_t s = 0; s < upstream.size(); ++s) {
    for (const auto& d : upstream[s]) {
      if (cfg.dedup_sources.count(d.source)) eligible[s].push_back(d);
    }
  }
  const fs::path cache_path = cfg.output_dir / "cache" / "minhash.sig";
  SignatureCache cache = load_signatures(cache_path, cfg.dedup.minhash).value_or(SignatureCache{});
  const DedupResult res = deduplicate(eligible, cfg.dedup, cfg.workers, &cache);
  fs::create_directories(cache_path.parent_path());
  save_signatures(cache_path, cache, cfg.dedup.minhash);

  // Reassemble in upstream order; survivors keep their relative order.
  StageReport r;
  std::vector<Document> kept;
  std::size_t next = 0;
  for (const auto& shard : upstream) {
    for (const auto& d : shard) {
      ++r.docs_in;
      r.bytes_in += d.text.size();
      if (!cfg.dedup_sources.count(d.source)) {
        kept.push_back(d);
      } else if (next < res.survivors.size() && res.survivors[next] == d) {
        kept.push_back(res.survivors[next++]);
      }
    }
  }
  if (!res.dropped.empty()) r.drops["near_duplicate"] = res.dropped.size();
  const fs::path dir = cfg.stage_dir(PipelineStage::kDedup);
  write_shards(kept, dir, cfg.shard_size);
  write_docs(dir / "dropped.jsonl", res.dropped);
  std::string clusters;
  for (const auto& c : res.clusters) clusters += serialize_cluster(c) + "\n";
  write_text(dir / "clusters.jsonl", clusters);
  r.docs_out = kept.size();
  r.bytes_out = text_bytes(kept);
  r.details = json{{"candidate_pairs", res.stats.candidate_pairs},
                   {"verified_pairs", res.stats.verified_pairs},
                   {"clusters", res.stats.clusters}}
                  .dump();
  return r;
}

StageReport run_eval(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto final_docs = flatten(read_stage(cfg, PipelineStage::kDedup));
  StageReport r;
  r.docs_in = r.docs_out = final_docs.size();
  r.bytes_in = r.bytes_out = text_bytes(final_docs);
  const fs::path dir = cfg.stage_dir(PipelineStage::kEval);
  json details = json::object();

  if (cfg.dev_set) {
    const auto dev = read_lines(*cfg.dev_set);
    json ppl = json::object();
    std::map<PipelineStage, std::vector<std::string>> corpora;
    for (const auto s : {PipelineStage::kIngest, PipelineStage::kClean, PipelineStage::kFilter, PipelineStage::kDedup}) {
      const fs::path sdir = cfg.stage_dir(s);
      if (!fs::is_directory(sdir) || list_shards(sdir).empty()) continue;
      auto texts = texts_of(flatten(read_stage(cfg, s)));
      if (texts.empty() || dev.empty()) {
        ppl[std::string(pipeline_stage_name(s))] = nullptr;
        continue;
      }
      ppl[std::string(pipeline_stage_name(s))] = probe_perplexity(texts, dev, cfg.probe);
      corpora[s] = std::move(texts);
    }
    details["probe_ppl"] = ppl;
    if (corpora.count(PipelineStage::kIngest) && corpora.count(PipelineStage::kDedup)) {
      const auto v = compare_configs(corpora[PipelineStage::kIngest], corpora[PipelineStage::kDedup], dev, cfg.probe);
      details["compare"] = {{"a", "ingest"},
                            {"b", "dedup"},
                            {"better", v.better == Better::kA ? "a" : v.better == Better::kB ? "b" : "tie"},
                            {"ppl_a", v.ppl_a},
                            {"ppl_b", v.ppl_b}};
    }
  }
  const std::size_t n_review = std::min(cfg.review_samples, final_docs.size());
  const auto review = sample_for_manual_review(final_docs, n_review, derive_seed(cfg.seed, "review"));
  write_review_file(dir / "review.jsonl", review);
  details["review_samples"] = review.size();
  write_text(dir / "probe.json", details.dump(2) + "\n");
  r.details = details.dump();
  return r;
}

StageReport run_mix(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto docs = flatten(read_stage(cfg, PipelineStage::kDedup));
  StageReport r;
  r.docs_in = r.docs_out = docs.size();
  r.bytes_in = r.bytes_out = text_bytes(docs);
  const fs::path dir = cfg.stage_dir(PipelineStage::kMix);
  json details = json::object();
  if (!cfg.mix_spec) {
    details["skipped"] = "no mix spec configured";
    r.details = details.dump();
    return r;
  }
  const MixSpec spec = MixSpec::load(*cfg.mix_spec);
  json warnings = json::array();
  for (const auto& w : validate_mix(spec, cfg.mix_check)) warnings.push_back(w.message);
  details["warnings"] = warnings;
  if (docs.empty()) {
    details["skipped"] = "no documents";
    r.details = details.dump();
    return r;
  }
  SourcePools pools;
  for (const auto& d : docs) pools[d.source].push_back(d);
  const SampledStream stream = sample_stream(pools, spec, derive_seed(cfg.seed, "mix"), cfg.mix_draws);
  write_stream(stream, dir / "stream.jsonl");
  const Tokenizer& tok = ctx.tokenizer_for(docs);
  const MixReport report = mix_report(stream, pools, tok, cfg.bucket_width, cfg.workers);
  write_text(dir / "report.json", report.to_json() + "\n");
  const std::string table = format_mix_table(spec, stream);
  write_text(dir / "table.txt", table);
  details["draws"] = stream.draws.size();
  details["tokenizer"] = ctx.tokenizer_origin;
  json realized = json::object();
  for (const auto& [src, w] : stream.realized_weights) realized[std::string(source_name(src))] = w;
  details["realized_weights"] = realized;
  if (spec.total_training_tokens > 0) {
    json epochs = json::object();
    for (const auto& [src, e] : compute_epochs(spec)) epochs[std::string(source_name(src))] = e;
    details["epochs"] = epochs;
  }
  details["total_tokens"] = report.total_tokens;
  ctx.note(table);
  r.details = details.dump();
  return r;
}

StageReport run_stats(RunContext& ctx) {
  const auto& cfg = ctx.cfg;
  const auto docs = flatten(read_stage(cfg, PipelineStage::kDedup));
  const auto shards = list_shards(cfg.stage_dir(PipelineStage::kDedup));
  const Tokenizer& tok = ctx.tokenizer_for(docs);
  const CorpusStats stats = corpus_stats(shards, tok, cfg.bucket_width, cfg.workers);
  const fs::path dir = cfg.stage_dir(PipelineStage::kStats);
  write_text(dir / "stats.json", stats.to_json() + "\n");
  write_text(dir / "stats.txt", stats.to_text());
  StageReport r;
  r.docs_in = r.docs_out = docs.size();
  r.bytes_in = r.bytes_out = text_bytes(docs);
  r.details = json{{"tokenizer", ctx.tokenizer_origin}, {"total_tokens", stats.total.tokens}}.dump();
  ctx.note(stats.to_text());
  return r;
}

StageReport run_one(PipelineStage stage, RunContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  StageReport r;
  switch (stage) {
    case PipelineStage::kIngest: r = run_ingest(ctx); break;
    case PipelineStage::kClean: r = run_clean(ctx); break;
    case PipelineStage::kFilter: r = run_filter(ctx); break;
    case PipelineStage::kDedup: r = run_dedup(ctx); break;
    case PipelineStage::kEval: r = run_eval(ctx); break;
    case PipelineStage::kMix: r = run_mix(ctx); break;
    case PipelineStage::kStats: r = run_stats(ctx); break;
    case PipelineStage::kAll: throw ConfigError("'all' is not a single stage");
  }
  r.stage = std::string(pipeline_stage_name(stage));
  if (r.details.empty()) r.details = "{}";
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.mb_per_s = r.wall_seconds > 0 ? static_cast<double>(r.bytes_in) / 1e6 / r.wall_seconds : 0.0;
  if (ctx.log) {
    char line[200];
    std::snprintf(line, sizeof line, "[%s] %llu in, %llu out, %llu dropped (%.3f s, %.1f MB/s)", r.stage.c_str(),
                  static_cast<unsigned long long>(r.docs_in), static_cast<unsigned long long>(r.docs_out),
                  static_cast<unsigned long long>(r.total_drops()), r.wall_seconds, r.mb_per_s);
    *ctx.log << line << '\n';
  }
  return r;
}

}  // namespace

std::string_view pipeline_stage_name(PipelineStage s) {
  switch (s) {
    case PipelineStage::kIngest: return "ingest";
    case PipelineStage::kClean: return "clean";
    case PipelineStage::kFilter: return "filter";
    case PipelineStage::kDedup: return "dedup";
    case PipelineStage::kEval: return "eval";
    case PipelineStage::kMix: return "mix";
    case PipelineStage::kStats: return "stats";
    case PipelineStage::kAll: return "all";
  }
  return "?";
}

std::optional<PipelineStage> parse_pipeline_stage(std::string_view name) {
  for (const auto s : kOrder) {
    if (pipeline_stage_name(s) == name) return s;
  }
  if (name == "all") return PipelineStage::kAll;
  return std::nullopt;
}

PipelineConfig PipelineConfig::from_json(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  try {
    const json j = json::parse(text);
    check_keys(j, {"seed", "workers", "io", "clean", "filter", "dedup", "eval", "mix", "tokenizer"}, "config");
    read(j, "seed", cfg.seed);
    read(j, "workers", cfg.workers);

    if (const json* io = child(j, "io")) {
      check_keys(*io, {"inputs", "output_dir", "shard_size", "on_error"}, "io");
      if (const json* v = child(*io, "output_dir")) cfg.output_dir = resolve(base_dir, v->get<std::string>());
      read(*io, "shard_size", cfg.shard_size);
      if (const json* v = child(*io, "on_error")) {
        const auto policy = v->get<std::string>();
        if (policy != "skip" && policy != "fail") throw ConfigError("on_error must be 'skip' or 'fail'");
        cfg.on_error = policy == "skip" ? ErrorPolicy::kSkip : ErrorPolicy::kFail;
      }
      if (const json* inputs = child(*io, "inputs")) {
        for (const auto& in : *inputs) {
          check_keys(in, {"source", "globs", "text_fields"}, "io.inputs");
          InputSpec spec;
          const auto name = in.at("source").get<std::string>();
          const auto src = parse_source(name);
          if (!src) throw ConfigError("unknown source '" + name + "'");
          spec.source = *src;
          spec.globs = in.at("globs").get<std::vector<std::string>>();
          read(in, "text_fields", spec.text_fields);
          cfg.inputs.push_back(std::move(spec));
        }
      }
    }
    if (cfg.output_dir.is_relative()) cfg.output_dir = base_dir / cfg.output_dir;

    if (const json* c = child(j, "clean")) {
      check_keys(*c,
                 {"sources", "min_chinese_ratio", "min_chars", "ad_keywords", "ad_threshold", "t2s_table",
                  "nav_max_line_chars", "nav_min_delim_density", "paragraph_mode"},
                 "clean");
      cfg.clean_sources = read_sources(*c, cfg.clean_sources);
      read(*c, "min_chinese_ratio", cfg.clean.min_chinese_ratio);
      read(*c, "min_chars", cfg.clean.min_chars);
      read(*c, "ad_threshold", cfg.clean.ad_threshold);
      read(*c, "nav_max_line_chars", cfg.clean.nav_max_line_chars);
      read(*c, "nav_min_delim_density", cfg.clean.nav_min_delim_density);
      if (const json* v = child(*c, "t2s_table")) cfg.clean.t2s = ConversionTable::load(resolve(base_dir, v->get<std::string>()));
      if (const json* v = child(*c, "ad_keywords")) {
        cfg.clean.ad_keywords = normalize_lexicon(Lexicon::load(resolve(base_dir, v->get<std::string>())), cfg.clean.t2s);
      }
      if (const json* v = child(*c, "paragraph_mode")) {
        const auto mode = v->get<std::string>();
        if (mode == "line") {
          cfg.clean.paragraph_mode = ParagraphMode::kLine;
        } else if (mode == "blank_line") {
          cfg.clean.paragraph_mode = ParagraphMode::kBlankLine;
        } else {
          throw ConfigError("paragraph_mode must be 'line' or 'blank_line'");
        }
      }
    }
    cfg.clean.validate();

    if (const json* f = child(j, "filter")) {
      check_keys(*f, {"sensitive", "spam", "quality"}, "filter");
      if (const json* s = child(*f, "sensitive")) {
        check_keys(*s, {"sources", "lexicon", "max_distinct"}, "filter.sensitive");
        cfg.sensitive_sources = read_sources(*s, cfg.sensitive_sources);
        read_path(*s, "lexicon", base_dir, cfg.sensitive_lexicon);
        read(*s, "max_distinct", cfg.sensitive_max_distinct);
      }
      if (const json* s = child(*f, "spam")) {
        check_keys(*s,
                   {"sources", "model", "train_positive", "train_negative", "threshold", "epochs", "lr", "dim",
                    "orders", "validation_fraction"},
                   "filter.spam");
        cfg.spam_sources = read_sources(*s, cfg.spam_sources);
        read_model(*s, base_dir, cfg.spam);
        read(*s, "threshold", cfg.spam_threshold);
      }
      if (const json* s = child(*f, "quality")) {
        check_keys(*s,
                   {"sources", "model", "train_positive", "train_negative", "threshold", "mode", "pareto_alpha",
                    "epochs", "lr", "dim", "orders", "validation_fraction"},
                   "filter.quality");
        cfg.quality_sources = read_sources(*s, cfg.quality_sources);
        read_model(*s, base_dir, cfg.quality);
        read(*s, "threshold", cfg.quality_options.threshold);
        read(*s, "pareto_alpha", cfg.quality_options.pareto_alpha);
        if (const json* v = child(*s, "mode")) {
          const auto mode = v->get<std::string>();
          if (mode == "threshold") {
            cfg.quality_options.mode = QualityMode::kThreshold;
          } else if (mode == "pareto") {
            cfg.quality_options.mode = QualityMode::kPareto;
          } else {
            throw ConfigError("quality mode must be 'threshold' or 'pareto'");
          }
        }
      }
    }

    if (const json* d = child(j, "dedup")) {
      check_keys(*d, {"sources", "k", "shingle_w", "bands", "rows", "jaccard_threshold", "verify", "exact_verify"},
                 "dedup");
      cfg.dedup_sources = read_sources(*d, cfg.dedup_sources);
      read(*d, "k", cfg.dedup.minhash.k);
      read(*d, "shingle_w", cfg.dedup.minhash.shingle_w);
      read(*d, "bands", cfg.dedup.bands);
      read(*d, "rows", cfg.dedup.rows);
      read(*d, "jaccard_threshold", cfg.dedup.jaccard_threshold);
      read(*d, "verify", cfg.dedup.verify);
      read(*d, "exact_verify", cfg.dedup.exact_verify);
    }
    cfg.dedup.validate();

    if (const json* e = child(j, "eval")) {
      check_keys(*e, {"dev", "order", "smoothing", "smoothing_value", "sample_docs", "tie_tolerance", "review_samples"},
                 "eval");
      read_path(*e, "dev", base_dir, cfg.dev_set);
      read(*e, "order", cfg.probe.order);
      read(*e, "sample_docs", cfg.probe.sample_docs);
      read(*e, "tie_tolerance", cfg.probe.tie_tolerance);
      read(*e, "review_samples", cfg.review_samples);
      if (const json* v = child(*e, "smoothing")) {
        const auto kind = v->get<std::string>();
        if (kind == "stupid_backoff") {
          cfg.probe.smoothing = Smoothing::stupid_backoff();
        } else if (kind == "add_k") {
          cfg.probe.smoothing = Smoothing::add_k(1.0);
        } else {
          throw ConfigError("smoothing must be 'stupid_backoff' or 'add_k'");
        }
      }
      read(*e, "smoothing_value", cfg.probe.smoothing.value);
    }

    if (const json* m = child(j, "mix")) {
      check_keys(*m, {"spec", "draws", "epoch_cap"}, "mix");
      read_path(*m, "spec", base_dir, cfg.mix_spec);
      read(*m, "draws", cfg.mix_draws);
      read(*m, "epoch_cap", cfg.mix_check.epoch_cap);
    }

    if (const json* t = child(j, "tokenizer")) {
      check_keys(*t, {"kind", "model", "vocab_size", "bucket_width"}, "tokenizer");
      if (const json* v = child(*t, "kind")) {
        const auto kind = v->get<std::string>();
        if (kind != "bpe" && kind != "char") throw ConfigError("tokenizer kind must be 'bpe' or 'char'");
        cfg.tokenizer = kind == "bpe" ? TokenizerKind::kBpe : TokenizerKind::kChar;
      }
      read_path(*t, "model", base_dir, cfg.tokenizer_model);
      read(*t, "vocab_size", cfg.tokenizer_vocab);
      read(*t, "bucket_width", cfg.bucket_width);
      if (cfg.bucket_width == 0) throw ConfigError("bucket_width must be positive");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  if (cfg.shard_size == 0) throw ConfigError("shard_size must be positive");
  if (cfg.workers == 0) cfg.workers = 1;
  cfg.propagate_seed();
  return cfg;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  const fs::path base = fs::absolute(path).parent_path();
  return from_json(std::string(std::istreambuf_iterator<char>(in), {}), base);
}

void PipelineConfig::propagate_seed() {
  spam.hyper.seed = derive_seed(seed, "spam");
  quality.hyper.seed = derive_seed(seed, "quality");
  quality_options.seed = derive_seed(seed, "pareto");
  dedup.minhash.seed = derive_seed(seed, "minhash");
  probe.seed = derive_seed(seed, "probe");
  probe.workers = workers;
}

void PipelineConfig::check_files() const {
  const auto need = [](const std::optional<fs::path>& p, const char* what) {
    if (p && !fs::exists(*p)) throw ConfigError(std::string(what) + " not found: " + p->string());
  };
  need(sensitive_lexicon, "sensitive lexicon");
  need(dev_set, "dev set");
  need(mix_spec, "mix spec");
  for (const auto* m : {&spam, &quality}) {
    if (m->model && fs::exists(*m->model)) continue;
    need(m->train_positive, "classifier training file");
    need(m->train_negative, "classifier training file");
  }
}

fs::path PipelineConfig::stage_dir(PipelineStage s) const { return output_dir / pipeline_stage_name(s); }

std::uint64_t StageReport::total_drops() const {
  std::uint64_t n = 0;
  for (const auto& [rule, count] : drops) n += count;
  return n;
}

const StageReport* RunReport::find(std::string_view stage) const {
  for (const auto& s : stages) {
    if (s.stage == stage) return &s;
  }
  return nullptr;
}

std::string RunReport::to_json(bool include_timing) const {
  json j;
  j["stages"] = json::array();
  for (const auto& s : stages) {
    json row;
    row["stage"] = s.stage;
    row["docs_in"] = s.docs_in;
    row["docs_out"] = s.docs_out;
    row["drops"] = s.drops;
    row["bytes_in"] = s.bytes_in;
    row["bytes_out"] = s.bytes_out;
    if (include_timing) {
      row["wall_seconds"] = s.wall_seconds;
      row["mb_per_s"] = s.mb_per_s;
    }
    row["details"] = json::parse(s.details.empty() ? "{}" : s.details);
    j["stages"].push_back(row);
  }
  return j.dump(2);
}

std::string RunReport::to_text() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %14s %14s %9s %9s\n", "stage", "docs_in", "docs_out", "dropped",
                "bytes_in", "bytes_out", "seconds", "MB/s");
  out += line;
  for (const auto& s : stages) {
    std::snprintf(line, sizeof line, "%-8s %10llu %10llu %10llu %14llu %14llu %9.3f %9.1f\n", s.stage.c_str(),
                  static_cast<unsigned long long>(s.docs_in), static_cast<unsigned long long>(s.docs_out),
                  static_cast<unsigned long long>(s.total_drops()), static_cast<unsigned long long>(s.bytes_in),
                  static_cast<unsigned long long>(s.bytes_out), s.wall_seconds, s.mb_per_s);
    out += line;
    for (const auto& [rule, n] : s.drops) {
      std::snprintf(line, sizeof line, "    %-24s %10llu\n", rule.c_str(), static_cast<unsigned long long>(n));
      out += line;
    }
  }
  return out;
}

RunReport run_pipeline(PipelineStage stage, const PipelineConfig& config, std::ostream* log) {
  config.check_files();
  RunContext ctx{config, log, nullptr, {}};
  RunReport report;
  if (stage == PipelineStage::kAll) {
    for (const auto s : kOrder) report.stages.push_back(run_one(s, ctx));
  } else {
    report.stages.push_back(run_one(stage, ctx));
  }
  return report;
}

CorpusStats corpus_stats(std::span<const fs::path> shards, const Tokenizer& tokenizer, std::uint64_t bucket_width,
                         unsigned workers) {
  std::map<Source, std::vector<std::string>> texts;
  for (const auto& shard : shards) {
    for (auto& d : read_shard(shard)) texts[d.source].push_back(std::move(d.text));
  }
  CorpusStats stats;
  stats.bucket_width = bucket_width;
  for (const auto& [src, t] : texts) {
    const TokenStats ts = count_tokens(t, tokenizer, bucket_width, workers);
    SourceStats& s = stats.per_source[src];
    s.docs = ts.docs;
    s.tokens = ts.total;
    s.mean_doc_len = ts.mean_doc_len;
    s.histogram = ts.histogram;
    for (const auto& x : t) s.bytes += x.size();
    stats.total.docs += s.docs;
    stats.total.tokens += s.tokens;
    stats.total.bytes += s.bytes;
    for (const auto& [b, n] : s.histogram) stats.total.histogram[b] += n;
  }
  if (stats.total.docs) {
    stats.total.mean_doc_len = static_cast<double>(stats.total.tokens) / static_cast<double>(stats.total.docs);
  }
  return stats;
}

std::string CorpusStats::to_json() const {
  const auto row = [](const SourceStats& s) {
    json hist = json::array();
    for (const auto& [b, n] : s.histogram) hist.push_back({b, n});
    return json{{"docs", s.docs},
                {"bytes", s.bytes},
                {"tokens", s.tokens},
                {"mean_doc_len", s.mean_doc_len},
                {"histogram", hist}};
  };
  json j;
  j["bucket_width"] = bucket_width;
  j["per_source"] = json::object();
  for (const auto& [src, s] : per_source) j["per_source"][std::string(source_name(src))] = row(s);
  j["total"] = row(total);
  return j.dump(2);
}

std::string CorpusStats::to_text() const {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-14s %10s %14s %14s %12s\n", "source", "docs", "bytes", "tokens", "mean_len");
  out += line;
  const auto emit = [&](const std::string& name, const SourceStats& s) {
    std::snprintf(line, sizeof line, "%-14s %10llu %14llu %14llu %12.2f\n", name.c_str(),
                  static_cast<unsigned long long>(s.docs), static_cast<unsigned long long>(s.bytes),
                  static_cast<unsigned long long>(s.tokens), s.mean_doc_len);
    out += line;
  };
  for (const auto& [src, s] : per_source) emit(std::string(source_name(src)), s);
  emit("total", total);
  return out;
}

}  // namespace corpuskit
