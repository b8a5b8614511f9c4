#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "loclab/many_body.hpp"
#include "loclab/types.hpp"

namespace loclab {

// flat key-value config with dotted keys; see README for the schema
struct ExperimentConfig {
  std::string mode;  // single | manybody | thermal | sweep

  int lattice_length = 200;
  Boundary boundary = Boundary::periodic;
  bool boundary_explicit = false;
  std::vector<int> alpha_list{1};
  double field_a = 1.0;
  double field_b = 1.0;
  double potential_max = 0.0;

  std::vector<double> epsilon_grid;   // explicit; empty -> auto geometric grid
  int epsilon_points = 0;             // auto grid: points in [E0 + delta, epsilon_max]
  double epsilon_max = 1.0;
  std::vector<double> beta_grid;
  std::vector<double> fweight_beta_grid;  // default 0.1 : 0.05 : 2.05
  std::vector<double> mu_list{0.5, 1.0, 2.0};
  int fweight_length = 48;

  std::vector<long long> seeds{1};

  int N = 2;
  Statistics statistics = Statistics::distinguishable;
  InteractionKind interaction_kind = InteractionKind::none;
  double interaction_U = 0.0;
  bool interaction_printed = false;
  int mb_states = 20;
  int partition_trials = 10000;
  int jensen_trials = 16;

  std::string output_dir = "out";
  Convention convention = Convention::derived;

  std::map<std::string, std::string> raw;  // canonical key -> value, hashed

  void validate() const;  // throws ConfigError
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// FNV-1a over the sorted canonical key=value lines
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct CsvRow {
  std::string check_name;
  int alpha = 0;
  int L = 0;
  double a = 0.0, b = 0.0;
  double eps_or_beta = 0.0;
  long long seed = 0;
  double measured = 0.0, bound = 0.0, margin = 0.0;
  std::string extra_json;
  long long aux = 0;  // secondary sort key (distance, state index, moment order)
};

// schema: check_name,alpha,L,a,b,epsilon_or_beta,seed,measured,bound,margin,extra_json
// UTF-8, LF endings, 17 significant digits, RFC-4180 quoting
void emit_csv(const std::vector<CsvRow>& rows, const std::string& path);
std::string csv_header();
std::string format_g17(double x);

struct RunManifest {
  std::string tool_version;
  std::uint64_t cfg_hash = 0;
  std::map<std::string, long> pass_counts;
  std::map<std::string, long> fail_counts;
  std::map<std::string, double> wall_time_s;
  long violations = 0;
  long oracle_mismatches = 0;
  std::map<std::string, double> summary;  // fitted exponents etc (deterministic)
};

struct RunOptions {
  std::string out_dir;  // empty -> config output_dir
  int jobs = 1;
};

// execute the mode's check matrix, write <family>.csv + summary.json + manifest.json
RunManifest run(const ExperimentConfig& cfg, const RunOptions& opts);

std::vector<std::string> list_checks(const std::string& mode);  // "" -> all modes

int exit_code_for(const RunManifest& m);     // 0 clean, 1 violations or oracle mismatch
int resolve_jobs(int cli_value);             // --jobs, else LOCALITY_LAB_JOBS, else 1
int run_cli(int argc, const char* const* argv);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace loclab
