#include "krip/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "krip/csv.hpp"

namespace krip {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream stream(value);
  while (std::getline(stream, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// Flat view of a config file: "key" or "section.key" -> raw string.
// Tracks consumption so unknown keys can be rejected.
class KeyMap {
 public:
  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  std::optional<std::string> take(const std::string& key) {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    consumed_.insert(key);
    return it->second;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : values_)
      if (!consumed_.count(key))
        throw ConfigError("unknown config key: " + key);
  }

 private:
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
};

long parse_long(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected integer, got '" +
                      text + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected unsigned integer, got '" +
                      text + "'");
  }
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": expected real, got '" + text +
                      "'");
  }
}

ExperimentConfig from_keymap(KeyMap& keys,
                             std::optional<ExperimentKind> expected) {
  ExperimentConfig config;

  if (auto v = keys.take("experiment")) {
    config.kind = experiment_from_name(*v);
    if (expected && config.kind != *expected)
      throw ConfigError("config file is for experiment '" + *v +
                        "' but the subcommand expects '" +
                        experiment_name(*expected) + "'");
  } else if (expected) {
    config.kind = *expected;
  } else {
    throw ConfigError("config key 'experiment' is required");
  }

  if (auto v = keys.take("families")) {
    for (const auto& name : split_list(*v))
      config.families.push_back(family_from_name(name));
  }
  if (auto v = keys.take("family")) config.family = family_from_name(*v);
  if (auto v = keys.take("mode")) config.mode = mode_from_name(*v);
  if (auto v = keys.take("n")) config.n_list = {static_cast<int>(parse_long("n", *v))};
  if (auto v = keys.take("n_list")) {
    config.n_list.clear();
    for (const auto& item : split_list(*v))
      config.n_list.push_back(static_cast<int>(parse_long("n_list", item)));
  }
  if (auto v = keys.take("N")) config.N = parse_long("N", *v);
  if (auto v = keys.take("s_list")) {
    for (const auto& item : split_list(*v))
      config.s_list.push_back(static_cast<int>(parse_long("s_list", item)));
  }
  if (auto v = keys.take("trials")) config.trials = parse_long("trials", *v);
  if (auto v = keys.take("samples")) config.samples = parse_long("samples", *v);
  if (auto v = keys.take("p_max")) config.p_max = static_cast<int>(parse_long("p_max", *v));
  if (auto v = keys.take("noise_sigma")) config.noise_sigma = parse_real("noise_sigma", *v);
  if (auto v = keys.take("amplitudes")) config.amplitudes = *v;
  if (auto v = keys.take("t_grid")) {
    for (const auto& item : split_list(*v))
      config.t_grid.push_back(parse_real("t_grid", item));
  }
  if (auto v = keys.take("seed")) config.seed = parse_u64("seed", *v);
  if (auto v = keys.take("out")) config.out = *v;
  if (auto v = keys.take("jobs")) config.jobs = static_cast<int>(parse_long("jobs", *v));
  if (auto v = keys.take("enumeration_budget"))
    config.enumeration_budget = parse_u64("enumeration_budget", *v);
  if (auto v = keys.take("explicit_budget"))
    config.explicit_budget = parse_u64("explicit_budget", *v);

  if (auto v = keys.take("solver.name")) config.solver.name = *v;
  if (auto v = keys.take("solver.max_iters"))
    config.solver.max_iters = static_cast<int>(parse_long("solver.max_iters", *v));
  if (auto v = keys.take("solver.tol")) config.solver.tol = parse_real("solver.tol", *v);
  if (auto v = keys.take("solver.rel_tol"))
    config.solver.rel_tol = parse_real("solver.rel_tol", *v);
  if (auto v = keys.take("solver.lambda_scale"))
    config.solver.lambda_scale = parse_real("solver.lambda_scale", *v);
  if (auto v = keys.take("solver.continuation"))
    config.solver.continuation = static_cast<int>(parse_long("solver.continuation", *v));
  if (auto v = keys.take("solver.step"))
    config.solver.step = parse_real("solver.step", *v);

  bool theory_seen = false;
  TheoryBoundParams theory;
  if (auto v = keys.take("theory.C")) { theory.C = parse_real("theory.C", *v); theory_seen = true; }
  if (auto v = keys.take("theory.xi")) { theory.xi = parse_real("theory.xi", *v); theory_seen = true; }
  if (auto v = keys.take("theory.psi")) { theory.psi = parse_real("theory.psi", *v); theory_seen = true; }
  if (auto v = keys.take("theory.K")) { theory.K = parse_real("theory.K", *v); theory_seen = true; }
  if (auto v = keys.take("theory.Kprime")) { theory.Kprime = parse_real("theory.Kprime", *v); theory_seen = true; }
  if (auto v = keys.take("theory.theta_prime")) { theory.theta_prime = parse_real("theory.theta_prime", *v); theory_seen = true; }
  if (auto v = keys.take("theory.c_xi_delta")) { theory.c_xi_delta = parse_real("theory.c_xi_delta", *v); theory_seen = true; }
  if (theory_seen) config.theory = theory;

  keys.reject_unknown();
  config.validate();
  return config;
}

void flatten_json(const json& node, const std::string& prefix, KeyMap& keys) {
  for (const auto& [key, value] : node.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten_json(value, path, keys);
    } else if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (i > 0) joined += ",";
        const auto& item = value[i];
        joined += item.is_string() ? item.get<std::string>() : item.dump();
      }
      keys.set(path, joined);
    } else if (value.is_string()) {
      keys.set(path, value.get<std::string>());
    } else {
      keys.set(path, value.dump());
    }
  }
}

}  // namespace

ExperimentKind experiment_from_name(const std::string& name) {
  if (name == "kappa") return ExperimentKind::KappaTable;
  if (name == "rip") return ExperimentKind::RipSweep;
  if (name == "phase") return ExperimentKind::PhaseTransition;
  if (name == "conc") return ExperimentKind::Concentration;
  if (name == "tails") return ExperimentKind::Tails;
  throw ConfigError("unknown experiment: " + name);
}

std::string experiment_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::KappaTable: return "kappa";
    case ExperimentKind::RipSweep: return "rip";
    case ExperimentKind::PhaseTransition: return "phase";
    case ExperimentKind::Concentration: return "conc";
    case ExperimentKind::Tails: return "tails";
  }
  throw std::logic_error("bad ExperimentKind value");
}

ModeSelect mode_from_name(const std::string& name) {
  if (name == "centered") return ModeSelect::Centered;
  if (name == "uncentered") return ModeSelect::Uncentered;
  if (name == "both") return ModeSelect::Both;
  throw ConfigError("unknown mode: " + name + " (centered|uncentered|both)");
}

std::string mode_name(ModeSelect mode) {
  switch (mode) {
    case ModeSelect::Centered: return "centered";
    case ModeSelect::Uncentered: return "uncentered";
    case ModeSelect::Both: return "both";
  }
  throw std::logic_error("bad ModeSelect value");
}

ExperimentConfig ExperimentConfig::load(const std::string& path,
                                        std::optional<ExperimentKind> expected) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  const std::string head = trim(text);
  const bool is_json =
      (path.size() > 5 && path.substr(path.size() - 5) == ".json") ||
      (!head.empty() && head.front() == '{');
  return is_json ? parse_json(text, expected) : parse_kv(text, expected);
}

ExperimentConfig ExperimentConfig::parse_kv(const std::string& text,
                                            std::optional<ExperimentKind> expected) {
  KeyMap keys;
  std::string section;
  std::istringstream stream(text);
  std::string line;
  int lineno = 0;
  while (std::getline(stream, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) +
                          ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    keys.set(section.empty() ? key : section + "." + key, value);
  }
  return from_keymap(keys, expected);
}

ExperimentConfig ExperimentConfig::parse_json(const std::string& text,
                                              std::optional<ExperimentKind> expected) {
  json parsed;
  try {
    parsed = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!parsed.is_object()) throw ConfigError("JSON config must be an object");
  KeyMap keys;
  flatten_json(parsed, "", keys);
  return from_keymap(keys, expected);
}

std::string ExperimentConfig::canonical_text() const {
  std::string out;
  auto line = [&out](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += "\n";
  };
  auto int_list = [](const std::vector<int>& values) {
    std::string joined;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i > 0) joined += ",";
      joined += std::to_string(values[i]);
    }
    return joined;
  };

  line("experiment", experiment_name(kind));
  if (!families.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < families.size(); ++i) {
      if (i > 0) joined += ",";
      joined += family_name(families[i]);
    }
    line("families", joined);
  }
  line("family", family_name(family));
  line("mode", mode_name(mode));
  if (!n_list.empty()) line("n_list", int_list(n_list));
  line("N", std::to_string(N));
  if (!s_list.empty()) line("s_list", int_list(s_list));
  line("trials", std::to_string(trials));
  line("samples", std::to_string(samples));
  line("p_max", std::to_string(p_max));
  line("noise_sigma", format_double(noise_sigma));
  line("amplitudes", amplitudes);
  if (!t_grid.empty()) {
    std::string joined;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      if (i > 0) joined += ",";
      joined += format_double(t_grid[i]);
    }
    line("t_grid", joined);
  }
  line("seed", std::to_string(seed));
  if (!out.empty()) line("out", out);
  line("jobs", std::to_string(jobs));
  line("enumeration_budget", std::to_string(enumeration_budget));
  line("explicit_budget", std::to_string(explicit_budget));

  out += "\n[solver]\n";
  line("name", solver.name);
  line("max_iters", std::to_string(solver.max_iters));
  line("tol", format_double(solver.tol));
  line("rel_tol", format_double(solver.rel_tol));
  line("lambda_scale", format_double(solver.lambda_scale));
  line("continuation", std::to_string(solver.continuation));
  if (solver.step) line("step", format_double(*solver.step));

  if (theory) {
    out += "\n[theory]\n";
    line("C", format_double(theory->C));
    if (theory->xi) line("xi", format_double(*theory->xi));
    if (theory->psi) line("psi", format_double(*theory->psi));
    line("K", format_double(theory->K));
    line("Kprime", format_double(theory->Kprime));
    line("theta_prime", format_double(theory->theta_prime));
    line("c_xi_delta", format_double(theory->c_xi_delta));
  }
  return out;
}

std::string ExperimentConfig::content_hash() const {
  const std::string text = canonical_text();
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  static const char* digits = "0123456789abcdef";
  std::string hex(16, '0');
  for (int i = 15; i >= 0; --i) {
    hex[i] = digits[hash & 0xF];
    hash >>= 4;
  }
  return hex;
}

std::vector<KrMode> ExperimentConfig::selected_modes() const {
  switch (mode) {
    case ModeSelect::Centered: return {KrMode::Centered};
    case ModeSelect::Uncentered: return {KrMode::Uncentered};
    case ModeSelect::Both: return {KrMode::Centered, KrMode::Uncentered};
  }
  throw std::logic_error("bad ModeSelect value");
}

void ExperimentConfig::validate() const {
  auto require = [](bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
  };

  require(jobs >= 0, "jobs must be >= 0");
  for (int n : n_list) require(n >= 2, "every n must be >= 2");

  switch (kind) {
    case ExperimentKind::KappaTable:
      // an empty families list falls back to the single `family`
      require(!n_list.empty(), "kappa: n or n_list is required");
      require(samples >= 1, "kappa: samples must be >= 1");
      break;
    case ExperimentKind::RipSweep: {
      require(!n_list.empty(), "rip: n or n_list is required");
      require(N >= 1, "rip: N is required");
      for (int n : n_list)
        require(N >= static_cast<long>(n) * n,
                "rip: N >= n^2 is required (the sparsity-budget column "
                "assumes at least n^2 columns)");
      require(!s_list.empty(), "rip: s_list is required");
      for (int s : s_list)
        require(s >= 1 && s <= N, "rip: every s must satisfy 1 <= s <= N");
      require(trials >= 1, "rip: trials must be >= 1");
      break;
    }
    case ExperimentKind::PhaseTransition: {
      require(!n_list.empty(), "phase: n or n_list is required");
      require(N >= 1, "phase: N is required");
      require(!s_list.empty(), "phase: s_list is required");
      for (int s : s_list)
        require(s >= 1 && s <= N, "phase: every s must satisfy 1 <= s <= N");
      require(trials >= 1, "phase: trials must be >= 1");
      require(noise_sigma >= 0.0, "phase: noise_sigma must be >= 0");
      require(solver.name == "iht" || solver.name == "fista",
              "phase: solver.name must be iht or fista");
      require(solver.max_iters >= 1, "phase: solver.max_iters must be >= 1");
      require(solver.tol > 0.0, "phase: solver.tol must be > 0");
      require(solver.rel_tol > 0.0, "phase: solver.rel_tol must be > 0");
      require(solver.lambda_scale > 0.0, "phase: solver.lambda_scale must be > 0");
      require(solver.continuation >= 0, "phase: solver.continuation must be >= 0");
      require(amplitudes == "unit" || amplitudes == "gaussian",
              "phase: amplitudes must be unit or gaussian");
      break;
    }
    case ExperimentKind::Concentration: {
      require(!n_list.empty(), "conc: n or n_list is required");
      require(N >= 1, "conc: N is required");
      require(trials >= 1, "conc: trials must be >= 1");
      require(!t_grid.empty(), "conc: t_grid is required");
      for (std::size_t i = 0; i < t_grid.size(); ++i) {
        require(t_grid[i] > 0.0, "conc: t_grid must be positive");
        require(i == 0 || t_grid[i] > t_grid[i - 1],
                "conc: t_grid must be strictly increasing");
      }
      break;
    }
    case ExperimentKind::Tails: {
      require(!n_list.empty(), "tails: n or n_list is required");
      require(samples >= 1, "tails: samples must be >= 1");
      require(p_max >= 2, "tails: p_max must be >= 2");
      for (std::size_t i = 0; i < t_grid.size(); ++i) {
        require(t_grid[i] > 0.0, "tails: t_grid must be positive");
        require(i == 0 || t_grid[i] > t_grid[i - 1],
                "tails: t_grid must be strictly increasing");
      }
      break;
    }
  }

  if (theory) {
    require(theory->C > 0.0, "theory.C must be > 0");
    require(theory->K >= 1.0, "theory.K must be >= 1");
    require(theory->Kprime >= 1.0, "theory.Kprime must be >= 1");
    require(theory->theta_prime >= 0.0 && theory->theta_prime < 1.0,
            "theory.theta_prime must be in [0, 1)");
    require(theory->c_xi_delta > 0.0 && theory->c_xi_delta <= 1.0,
            "theory.c_xi_delta must be in (0, 1]");
    if (theory->xi) require(*theory->xi > 0.0, "theory.xi must be > 0");
    if (theory->psi) require(*theory->psi > 0.0, "theory.psi must be > 0");
  }
}

}  // namespace krip
