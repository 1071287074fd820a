// Command line driver for the corpus pipeline.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "corpuskit/pipeline.hpp"

namespace {

struct Options {
  std::string config;
  std::string stage_dir;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string report;
  bool no_timing = false;
  bool quiet = false;
};

int run(corpuskit::PipelineStage stage, const Options& opt) {
  using namespace corpuskit;
  PipelineConfig cfg;
  try {
    cfg = PipelineConfig::load(opt.config);
    if (!opt.stage_dir.empty()) cfg.output_dir = std::filesystem::absolute(opt.stage_dir);
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.workers) cfg.workers = std::max(1u, *opt.workers);
    cfg.propagate_seed();
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  }

  try {
    const RunReport report = run_pipeline(stage, cfg, opt.quiet ? nullptr : &std::cerr);
    std::cout << report.to_text();
    if (!opt.report.empty()) {
      std::ofstream out(opt.report, std::ios::binary | std::ios::trunc);
      if (!out) throw IoError("cannot write report " + opt.report);
      out << report.to_json(!opt.no_timing) << '\n';
    }
    return 0;
  } catch (const MissingUpstreamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"corpuskit: clean, filter, deduplicate, evaluate and mix a multi-source text corpus"};
  app.require_subcommand(1);
  Options opt;

  const std::pair<const char*, const char*> commands[] = {
      {"ingest", "Convert raw JSONL inputs into shards"},
      {"clean", "Apply the rule-based cleaner"},
      {"filter", "Apply the sensitive-word, spam and quality filters"},
      {"dedup", "Remove near-duplicate documents"},
      {"eval", "Score stage outputs with the probe language model and sample for review"},
      {"mix", "Sample a training stream from the per-source weights"},
      {"stats", "Summarize the final corpus by source"},
      {"all", "Run every stage in order"},
  };
  std::optional<corpuskit::PipelineStage> chosen;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "Pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--stage-dir", opt.stage_dir, "Override the output directory");
    sub->add_option("--seed", opt.seed, "Override the global seed");
    sub->add_option("--workers", opt.workers, "Worker threads");
    sub->add_option("--report", opt.report, "Write the JSON report here");
    sub->add_flag("--no-timing", opt.no_timing, "Leave wall time and throughput out of the JSON report");
    sub->add_flag("-q,--quiet", opt.quiet, "No progress output");
    sub->callback([&chosen, stage_name = std::string(name)] { chosen = corpuskit::parse_pipeline_stage(stage_name); });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  return run(*chosen, opt);
}
