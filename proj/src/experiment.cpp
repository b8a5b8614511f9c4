#include "loclab/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace loclab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& s) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad number for '" + key + "': " + s);
  }
  if (pos != s.size()) throw ConfigError("config: trailing characters for '" + key + "': " + s);
  return v;
}

long long parse_int(const std::string& key, const std::string& s) {
  size_t pos = 0;
  long long v;
  try {
    v = std::stoll(s, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer for '" + key + "': " + s);
  }
  if (pos != s.size()) throw ConfigError("config: trailing characters for '" + key + "': " + s);
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ConfigError("config: bad boolean for '" + key + "': " + s);
}

std::vector<double> parse_double_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(key, item));
  return out;
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "mode") {
    cfg.mode = value;
  } else if (key == "lattice.length") {
    cfg.lattice_length = static_cast<int>(parse_int(key, value));
  } else if (key == "lattice.boundary") {
    if (value == "periodic") cfg.boundary = Boundary::periodic;
    else if (value == "open" || value == "open_chain") cfg.boundary = Boundary::open_chain;
    else throw ConfigError("config: lattice.boundary must be periodic or open_chain, got " + value);
    cfg.boundary_explicit = true;
  } else if (key == "alpha") {
    cfg.alpha_list.clear();
    for (const auto& item : split_list(value))
      cfg.alpha_list.push_back(static_cast<int>(parse_int(key, item)));
  } else if (key == "field.a") {
    cfg.field_a = parse_double(key, value);
  } else if (key == "field.b") {
    cfg.field_b = parse_double(key, value);
  } else if (key == "potential.max") {
    cfg.potential_max = parse_double(key, value);
  } else if (key == "epsilon.grid") {
    cfg.epsilon_grid = parse_double_list(key, value);
  } else if (key == "epsilon.points") {
    cfg.epsilon_points = static_cast<int>(parse_int(key, value));
  } else if (key == "epsilon.max") {
    cfg.epsilon_max = parse_double(key, value);
  } else if (key == "beta.grid") {
    cfg.beta_grid = parse_double_list(key, value);
  } else if (key == "fweight.beta_grid") {
    cfg.fweight_beta_grid = parse_double_list(key, value);
  } else if (key == "fweight.mu") {
    cfg.mu_list = parse_double_list(key, value);
  } else if (key == "fweight.length") {
    cfg.fweight_length = static_cast<int>(parse_int(key, value));
  } else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& item : split_list(value)) cfg.seeds.push_back(parse_int(key, item));
  } else if (key == "manybody.N") {
    cfg.N = static_cast<int>(parse_int(key, value));
  } else if (key == "manybody.statistics") {
    if (value == "distinguishable") cfg.statistics = Statistics::distinguishable;
    else if (value == "boson" || value == "bosons") cfg.statistics = Statistics::boson;
    else if (value == "fermion" || value == "fermions") cfg.statistics = Statistics::fermion;
    else throw ConfigError("config: unknown statistics " + value);
  } else if (key == "interaction.kind") {
    if (value == "none") cfg.interaction_kind = InteractionKind::none;
    else if (value == "onsite_hubbard") cfg.interaction_kind = InteractionKind::onsite_hubbard;
    else if (value == "pair_matrix") cfg.interaction_kind = InteractionKind::pair_matrix;
    else throw ConfigError("config: unknown interaction.kind " + value);
  } else if (key == "interaction.U") {
    cfg.interaction_U = parse_double(key, value);
  } else if (key == "interaction.printed") {
    cfg.interaction_printed = parse_bool(key, value);
  } else if (key == "manybody.states") {
    cfg.mb_states = static_cast<int>(parse_int(key, value));
  } else if (key == "partition.trials") {
    cfg.partition_trials = static_cast<int>(parse_int(key, value));
  } else if (key == "jensen.trials") {
    cfg.jensen_trials = static_cast<int>(parse_int(key, value));
  } else if (key == "output.dir") {
    cfg.output_dir = value;
  } else if (key == "convention") {
    if (value == "printed") cfg.convention = Convention::printed;
    else if (value == "derived") cfg.convention = Convention::derived;
    else throw ConfigError("config: convention must be printed or derived, got " + value);
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::set<std::string> kModes{"single", "sweep", "manybody", "thermal"};
  if (!kModes.count(mode)) throw ConfigError("config: mode must be one of single, sweep, manybody, thermal");
  if (lattice_length < 2) throw ConfigError("config: lattice.length must be at least 2");
  if (alpha_list.empty()) throw ConfigError("config: alpha list is empty");
  for (int al : alpha_list)
    if (al < 1 || al > 8) throw ConfigError("config: alpha must be in [1, 8]");
  if (!(field_a > 0.0) || field_b < field_a)
    throw ConfigError("config: field bounds need 0 < field.a <= field.b");
  if (potential_max < 0.0) throw ConfigError("config: potential.max must be nonnegative");
  for (double e : epsilon_grid)
    if (!(e > 0.0)) throw ConfigError("config: epsilon.grid entries must be positive");
  if (epsilon_points < 0) throw ConfigError("config: epsilon.points must be nonnegative");
  if (!(epsilon_max > 0.0)) throw ConfigError("config: epsilon.max must be positive");
  if (seeds.empty()) throw ConfigError("config: seeds list is empty");
  for (double b : beta_grid)
    if (!(b > 0.0)) throw ConfigError("config: beta.grid entries must be positive");
  for (double m : mu_list)
    if (!(m > 0.0)) throw ConfigError("config: fweight.mu entries must be positive");

  if (epsilon_points == 1) throw ConfigError("config: epsilon.points must be 0 (auto) or at least 2");
  if (interaction_printed && interaction_kind != InteractionKind::pair_matrix)
    throw ConfigError("config: interaction.printed requires interaction.kind = pair_matrix");
  if (interaction_kind == InteractionKind::pair_matrix && !interaction_printed)
    throw ConfigError("config: pair_matrix couplings are only available programmatically; "
                      "set interaction.printed = true for the experimental printed form");
  if (mode == "manybody") {
    if (N < 1) throw ConfigError("config: manybody.N must be at least 1");
    if (mb_states < 1) throw ConfigError("config: manybody.states must be at least 1");
    if (partition_trials < 1) throw ConfigError("config: partition.trials must be at least 1");
    if (epsilon_grid.empty())
      throw ConfigError("config: manybody mode needs epsilon.grid (total energy budgets)");
    double ldim = N * std::log(static_cast<double>(lattice_length));
    if (ldim > std::log(20000.0))
      throw ConfigError("config: manybody product dimension L^N exceeds 20000");
  }
  if (mode == "thermal") {
    if (boundary_explicit && boundary == Boundary::periodic)
      throw ConfigError("config: thermal mode requires the open_chain boundary");
    if (fweight_length < 8) throw ConfigError("config: fweight.length must be at least 8");
  }
  if (jensen_trials < 0) throw ConfigError("config: jensen.trials must be nonnegative");
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + " is not key = value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config: empty key on line " + std::to_string(lineno));
    apply_key(cfg, key, value);
    cfg.raw[key] = value;
  }
  // thermal kernels are only meaningful without wrap-around paths
  if (cfg.mode == "thermal" && !cfg.boundary_explicit) cfg.boundary = Boundary::open_chain;
  if (!cfg.mode.empty()) cfg.validate();  // else the CLI positional supplies it, run() validates
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : cfg.raw) {  // std::map iterates in key order
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string csv_header() {
  return "check_name,alpha,L,a,b,epsilon_or_beta,seed,measured,bound,margin,extra_json";
}

namespace {
std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') out += '"';
  }
  out += '"';
  return out;
}
}  // namespace

void emit_csv(const std::vector<CsvRow>& rows, const std::string& path) {
  std::vector<CsvRow> sorted = rows;
  std::sort(sorted.begin(), sorted.end(), [](const CsvRow& x, const CsvRow& y) {
    if (x.check_name != y.check_name) return x.check_name < y.check_name;
    if (x.alpha != y.alpha) return x.alpha < y.alpha;
    if (x.L != y.L) return x.L < y.L;
    if (x.seed != y.seed) return x.seed < y.seed;
    if (x.eps_or_beta != y.eps_or_beta) return x.eps_or_beta < y.eps_or_beta;
    if (x.aux != y.aux) return x.aux < y.aux;
    return x.extra_json < y.extra_json;
  });
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  out << csv_header() << "\n";
  for (const auto& r : sorted) {
    out << csv_quote(r.check_name) << ',' << r.alpha << ',' << r.L << ','
        << format_g17(r.a) << ',' << format_g17(r.b) << ',' << format_g17(r.eps_or_beta) << ','
        << r.seed << ',' << format_g17(r.measured) << ',' << format_g17(r.bound) << ','
        << format_g17(r.margin) << ',' << csv_quote(r.extra_json) << "\n";
  }
}

std::vector<std::string> list_checks(const std::string& mode) {
  if (mode == "single" || mode == "sweep") return {"velocity_bound", "jensen_moment"};
  if (mode == "manybody") return {"typical_velocity", "equal_partition"};
  if (mode == "thermal") return {"kernel_decay", "xi_scaling", "f_weight"};
  if (mode.empty()) {
    return {"velocity_bound", "jensen_moment", "typical_velocity", "equal_partition",
            "kernel_decay", "xi_scaling", "f_weight"};
  }
  throw ConfigError("config: mode must be one of single, sweep, manybody, thermal");
}

int exit_code_for(const RunManifest& m) {
  return (m.violations > 0 || m.oracle_mismatches > 0) ? 1 : 0;
}

int resolve_jobs(int cli_value) {
  if (cli_value > 0) return cli_value;
  if (const char* env = std::getenv("LOCALITY_LAB_JOBS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return 1;
}

}  // namespace loclab
