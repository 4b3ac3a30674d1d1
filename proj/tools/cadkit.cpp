// cadkit <pipeline> --config <file> [--out dir]
// Exit status: 0 when every check passes, 2 when a check fails, 1 on any error.

#include "cadkit/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <optional>
#include <sstream>

int main(int argc, char** argv) {
  using namespace cadkit;
  CLI::App app{"Config-driven experiments on boundary geometry, dyadic grids and elliptic measure"};
  std::string pipeline, config_path, out_dir;
  std::vector<std::string> formats{"csv", "json", "svg"};
  std::optional<double> pitch, q, c0, epsilon;
  std::optional<long> walks;
  std::optional<std::uint64_t> seed;
  std::optional<int> depth;

  std::ostringstream names;
  for (const auto& n : pipeline_names()) names << (names.tellp() > 0 ? ", " : "") << n;
  app.add_option("pipeline", pipeline, "pipeline to run: " + names.str())->required();
  app.add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (default cadkit_out/<pipeline>)");
  app.add_option("--format", formats, "report formats among csv, json, svg")->delimiter(',');
  app.add_option("--pitch", pitch, "finite-difference pitch h");
  app.add_option("--walks", walks, "walk-on-spheres sample count");
  app.add_option("--seed", seed, "random seed");
  app.add_option("--q", q, "reverse-Hölder exponent");
  app.add_option("--c0", c0, "exterior corkscrew constant");
  app.add_option("--epsilon", epsilon, "sawtooth truncation epsilon");
  app.add_option("--depth", depth, "dyadic grid depth");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = ExperimentConfig::load(config_path);
    if (cfg.pipeline.empty()) cfg.pipeline = pipeline;
    if (cfg.pipeline != pipeline) {
      throw InputError("config is for pipeline \"" + cfg.pipeline + "\", not \"" + pipeline + "\"");
    }
    if (pitch) cfg.pitch = *pitch;
    if (walks) cfg.walks = *walks;
    if (seed) cfg.seed = *seed;
    if (q) cfg.q = *q;
    if (c0) cfg.c0 = *c0;
    if (epsilon) cfg.epsilon = *epsilon;
    if (depth) cfg.depth = *depth;
    if (out_dir.empty()) out_dir = "cadkit_out/" + pipeline;

    const Report report = run_pipeline(cfg);
    const auto files = emit_report(report, out_dir, {formats.begin(), formats.end()});
    for (const auto& r : report.records) {
      std::printf("%s  %-34s %-13s %8.2f s\n", r.pass ? "PASS" : "FAIL", r.check.c_str(), r.anchor.c_str(), r.runtime);
    }
    std::printf("config %s\n", report.config_hash.c_str());
    for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
    return report.all_pass() ? 0 : 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "cadkit: %s\n", e.what());
    return 1;
  }
}
