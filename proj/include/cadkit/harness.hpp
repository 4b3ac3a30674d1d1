#pragma once

#include "cadkit/error.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cadkit {

// A module error raised inside a pipeline, tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage " + stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ExperimentConfig {
  std::string pipeline;
  // {"shape": name} for a built-in shape or {"file": path} for a domain JSON file.
  nlohmann::json domain = nlohmann::json::object();
  std::string coefficients = "identity";
  nlohmann::json coefficient_params = nlohmann::json::object();
  int depth = 5;
  double pitch = 0.01;
  double lambda = 0.125;
  int kstar = 2;
  double K0 = 1.0;
  double c0 = 1.0 / 32;
  double epsilon = 0.25;
  double q = 2.0;
  double K0_stop = 8.0;
  double theta = 1.0;
  std::uint64_t seed = 1;
  long walks = 20000;
  // Pipeline-specific settings (pole, ladder, expected verdict, ...).
  nlohmann::json options = nlohmann::json::object();
  // Relative domain files resolve against this directory; not part of the hash.
  std::filesystem::path base_dir;

  static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ExperimentConfig load(const std::filesystem::path& path);
  // Canonical form: every field, keys sorted.
  nlohmann::json to_json() const;
  // SHA-256 of the canonical dump, hex.
  std::string hash() const;
  // Throws ParameterError naming the first field outside its range.
  void validate() const;
};

struct CheckRecord {
  std::string check;
  std::string anchor;  // "criterion N" or "plumbing"
  nlohmann::json constants = nlohmann::json::object();
  nlohmann::json tolerances = nlohmann::json::object();
  bool pass = false;
  double runtime = 0.0;  // seconds; kept out of csv/json so reruns are byte-identical
};

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

struct Plot {
  std::string name;
  std::string title, xlabel, ylabel;
  bool log_x = false, log_y = false;
  std::vector<Series> series;
};

struct Report {
  std::string pipeline;
  std::string config_hash;
  std::string version;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  std::vector<CheckRecord> records;
  std::vector<Table> tables;
  std::vector<Plot> plots;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

std::string code_version();
std::vector<std::string> pipeline_names();

// Runs the named pipeline of the config; module errors come back as StageError.
Report run_pipeline(const ExperimentConfig& config);

// report.json, one <table>.csv per table and one <plot>.svg per plot, for the requested
// formats. Returns the files written, in that order.
std::vector<std::filesystem::path> emit_report(const Report& report, const std::filesystem::path& dir,
                                               const std::set<std::string>& formats = {"csv", "json", "svg"});

std::string table_csv(const Table& table, const std::string& config_hash);
std::string plot_svg(const Plot& plot, const std::string& config_hash);

}  // namespace cadkit
