#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "pearsonbf/anova.hpp"
#include "pearsonbf/bayes_factor.hpp"
#include "pearsonbf/errors.hpp"
#include "pearsonbf/rng.hpp"

namespace pearsonbf {

// "%.12g" rendering used by every CSV writer; deterministic for given bits.
inline std::string num_str(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

// Generative settings for one grid cell of the mixed model
//   y_ij = mu + a_j + p_i + e_ij,
// a_j ~ N(0, tau sigma_eps^2), p_i ~ N(0, sigma_eps^2 rho/(1-rho)),
// e_ij ~ N(0, sigma_eps^2). The rho mapping makes rho the intraclass
// correlation of same-subject cells under the null.
struct MixedModelSpec {
  int n = 0;
  int k = 3;
  double tau = 0.0;
  double rho = 0.0;
  double mu = 0.0;
  double sigma_eps = 1.0;

  void validate() const {
    if (n < 2 || k < 2) {
      throw DomainError("MixedModelSpec: need n >= 2 and k >= 2");
    }
    if (!std::isfinite(tau) || tau < 0.0) {
      throw DomainError("MixedModelSpec: tau must be >= 0");
    }
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0) {
      throw DomainError("MixedModelSpec: rho must lie in [0, 1)");
    }
    if (!std::isfinite(sigma_eps) || sigma_eps <= 0.0) {
      throw DomainError("MixedModelSpec: sigma_eps must be positive");
    }
    if (!std::isfinite(mu)) {
      throw DomainError("MixedModelSpec: mu must be finite");
    }
  }
};

// A Bayes factor method competing in the benchmark.
struct BfMethod {
  Method kind = Method::PearsonRM;  // PearsonRM or BicRM
  double alpha = 0.0;               // meaningful for PearsonRM only

  bool operator==(const BfMethod&) const = default;
  std::string label() const {
    return kind == Method::BicRM ? "bic" : "pearson";
  }
  std::string alpha_str() const {
    return kind == Method::BicRM ? "" : num_str(alpha);
  }
};

struct SimulationConfig {
  std::vector<double> taus{0.0, 0.5, 1.0};
  std::vector<int> subject_counts{10, 30, 80};
  std::vector<double> rhos{0.2, 0.8};
  int k = 3;
  int replicates = 1000;
  uint64_t seed = 0;
  double mu = 0.0;
  double sigma_eps = 1.0;
  std::vector<BfMethod> methods;

  void validate() const {
    if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
    if (taus.empty() || subject_counts.empty() || rhos.empty()) {
      throw ConfigError("config: tau, n and rho lists must be nonempty");
    }
    if (methods.empty()) throw ConfigError("config: no methods configured");
    for (const auto& m : methods) {
      if (m.kind == Method::PearsonRM) {
        validate_alpha(m.alpha, AlphaPolicy::Consistency);
      }
    }
    for (const auto& cell : grid()) cell.validate();
  }

  // Cell order is tau-major, then n, then rho (the table layout order).
  std::vector<MixedModelSpec> grid() const {
    std::vector<MixedModelSpec> cells;
    for (double tau : taus) {
      for (int n : subject_counts) {
        for (double rho : rhos) {
          cells.push_back({n, k, tau, rho, mu, sigma_eps});
        }
      }
    }
    return cells;
  }

  static SimulationConfig parse(std::istream& in);
};

struct TrialOutcome {
  double log_bf10;
  double posterior_h1;
  bool chose_h1;  // log_bf10 > 0; ties go to H0
};

struct TrialResult {
  int cell = 0;
  int replicate = 0;
  bool degenerate = false;  // SSR == 0: excluded from aggregates
  std::vector<TrialOutcome> outcomes;
};

struct AccuracyRow {
  int cell;
  int method;
  double accuracy;
  int used;
  int excluded;
};

struct ConsistencyRow {
  int cell;
  int method_a;
  int method_b;
  double agreement;
  int used;
};

struct AccuracyTable {
  std::vector<AccuracyRow> accuracy;
  std::vector<ConsistencyRow> consistency;
};

struct GridResult {
  std::vector<MixedModelSpec> cells;
  std::vector<BfMethod> methods;
  int replicates = 0;
  std::vector<TrialResult> trials;  // indexed cell * replicates + replicate
  AccuracyTable table;
};

// Draws one dataset: k treatment effects, n subject effects, n*k errors, in
// that fixed order.
inline DataMatrix generate_dataset(const MixedModelSpec& spec, RngStream& rng) {
  spec.validate();
  const double sigma_a = spec.sigma_eps * std::sqrt(spec.tau);
  const double sigma_p = spec.sigma_eps * std::sqrt(spec.rho / (1.0 - spec.rho));
  std::vector<double> treat(spec.k), subj(spec.n);
  for (auto& a : treat) a = sigma_a * rng.next_normal();
  for (auto& p : subj) p = sigma_p * rng.next_normal();
  DataMatrix data;
  data.n_subjects = spec.n;
  data.k_conditions = spec.k;
  data.values.resize(static_cast<size_t>(spec.n) * spec.k);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.k; ++j) {
      data.at(i, j) =
          spec.mu + treat[j] + subj[i] + spec.sigma_eps * rng.next_normal();
    }
  }
  return data;
}

namespace detail {

inline TrialResult run_one_trial(const MixedModelSpec& spec,
                                 const std::vector<BfMethod>& methods,
                                 uint64_t seed, int cell, int replicate) {
  TrialResult trial;
  trial.cell = cell;
  trial.replicate = replicate;
  RngStream rng(substream_seed(seed, static_cast<uint64_t>(cell),
                               static_cast<uint64_t>(replicate)));
  const DataMatrix data = generate_dataset(spec, rng);
  try {
    const AnovaTable table = rm_anova(data);
    const SummaryStats stats = summary_from_anova(table, spec.n, spec.k);
    trial.outcomes.reserve(methods.size());
    for (const auto& m : methods) {
      const BayesFactor bf = m.kind == Method::BicRM
                                 ? bic_bf_rm(stats.f_stat, spec.n, spec.k)
                                 : pearson_bf_rm(stats, m.alpha);
      const auto [p0, p1] = posterior_prob(bf);
      trial.outcomes.push_back({bf.log_bf10, p1.value(), bf.log_bf10 > 0.0});
    }
  } catch (const DegenerateDataError&) {
    trial.degenerate = true;
    trial.outcomes.clear();
  }
  return trial;
}

}  // namespace detail

// Per-cell fraction of non-degenerate replicates on which both methods chose
// the same model.
inline std::vector<ConsistencyRow> consistency(const GridResult& result,
                                               const BfMethod& method_a,
                                               const BfMethod& method_b) {
  const auto find = [&](const BfMethod& m) {
    for (size_t i = 0; i < result.methods.size(); ++i) {
      if (result.methods[i] == m) return static_cast<int>(i);
    }
    throw MissingMethodError("consistency: method '" + m.label() +
                             "' not present in the result set");
  };
  const int ia = find(method_a);
  const int ib = find(method_b);
  std::vector<ConsistencyRow> rows;
  for (size_t c = 0; c < result.cells.size(); ++c) {
    int same = 0, used = 0;
    for (int r = 0; r < result.replicates; ++r) {
      const TrialResult& t = result.trials[c * result.replicates + r];
      if (t.degenerate) continue;
      ++used;
      same += t.outcomes[ia].chose_h1 == t.outcomes[ib].chose_h1;
    }
    rows.push_back({static_cast<int>(c), ia, ib,
                    used > 0 ? static_cast<double>(same) / used : 0.0, used});
  }
  return rows;
}

// Runs every (cell, replicate) pair, in parallel when threads > 1, and
// aggregates accuracy (truth is H0 exactly when tau = 0) plus pairwise
// consistency. Output is a pure function of the config, not of the thread
// count: substreams are derived from indices and aggregation walks results
// in index order.
inline GridResult run_grid(const SimulationConfig& config, int threads = 1) {
  config.validate();
  GridResult result;
  result.cells = config.grid();
  result.methods = config.methods;
  result.replicates = config.replicates;
  const size_t total = result.cells.size() * static_cast<size_t>(config.replicates);
  result.trials.resize(total);

  const int workers = std::max(
      1, std::min(threads, static_cast<int>(std::thread::hardware_concurrency() > 0
                                                ? std::thread::hardware_concurrency()
                                                : 1)));
  auto worker = [&](size_t begin, size_t end, std::exception_ptr& err) {
    try {
      for (size_t idx = begin; idx < end; ++idx) {
        const int cell = static_cast<int>(idx / config.replicates);
        const int rep = static_cast<int>(idx % config.replicates);
        result.trials[idx] = detail::run_one_trial(
            result.cells[cell], config.methods, config.seed, cell, rep);
      }
    } catch (...) {
      err = std::current_exception();
    }
  };

  if (workers == 1) {
    std::exception_ptr err;
    worker(0, total, err);
    if (err) std::rethrow_exception(err);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(workers);
    const size_t chunk = (total + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
      const size_t begin = std::min(total, w * chunk);
      const size_t end = std::min(total, begin + chunk);
      pool.emplace_back(worker, begin, end, std::ref(errs[w]));
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs) {
      if (e) std::rethrow_exception(e);
    }
  }

  for (size_t c = 0; c < result.cells.size(); ++c) {
    const bool truth_h1 = result.cells[c].tau > 0.0;
    int used = 0, excluded = 0;
    std::vector<int> correct(result.methods.size(), 0);
    for (int r = 0; r < config.replicates; ++r) {
      const TrialResult& t = result.trials[c * config.replicates + r];
      if (t.degenerate) {
        ++excluded;
        continue;
      }
      ++used;
      for (size_t m = 0; m < result.methods.size(); ++m) {
        correct[m] += t.outcomes[m].chose_h1 == truth_h1;
      }
    }
    for (size_t m = 0; m < result.methods.size(); ++m) {
      result.table.accuracy.push_back(
          {static_cast<int>(c), static_cast<int>(m),
           used > 0 ? static_cast<double>(correct[m]) / used : 0.0, used,
           excluded});
    }
  }
  for (size_t a = 0; a < result.methods.size(); ++a) {
    for (size_t b = a + 1; b < result.methods.size(); ++b) {
      const auto rows =
          consistency(result, result.methods[a], result.methods[b]);
      result.table.consistency.insert(result.table.consistency.end(),
                                      rows.begin(), rows.end());
    }
  }
  return result;
}

inline void accuracy_export(const GridResult& result, std::ostream& out) {
  out << "tau,n,rho,method,alpha,accuracy,used,excluded\n";
  for (const auto& row : result.table.accuracy) {
    const auto& cell = result.cells[row.cell];
    const auto& m = result.methods[row.method];
    out << num_str(cell.tau) << ',' << cell.n << ',' << num_str(cell.rho)
        << ',' << m.label() << ',' << m.alpha_str() << ','
        << num_str(row.accuracy) << ',' << row.used << ',' << row.excluded
        << '\n';
  }
}

inline void consistency_export(const GridResult& result, std::ostream& out) {
  out << "tau,n,rho,method_a,alpha_a,method_b,alpha_b,agreement,used\n";
  for (const auto& row : result.table.consistency) {
    const auto& cell = result.cells[row.cell];
    const auto& ma = result.methods[row.method_a];
    const auto& mb = result.methods[row.method_b];
    out << num_str(cell.tau) << ',' << cell.n << ',' << num_str(cell.rho)
        << ',' << ma.label() << ',' << ma.alpha_str() << ',' << mb.label()
        << ',' << mb.alpha_str() << ',' << num_str(row.agreement) << ','
        << row.used << '\n';
  }
}

// Long-format posterior export backing the distribution plots.
inline void posterior_distribution_export(const GridResult& result,
                                          std::ostream& out) {
  out << "tau,n,rho,method,alpha,replicate,posterior_h1\n";
  for (size_t c = 0; c < result.cells.size(); ++c) {
    const auto& cell = result.cells[c];
    for (int r = 0; r < result.replicates; ++r) {
      const TrialResult& t = result.trials[c * result.replicates + r];
      if (t.degenerate) continue;
      for (size_t m = 0; m < result.methods.size(); ++m) {
        out << num_str(cell.tau) << ',' << cell.n << ',' << num_str(cell.rho)
            << ',' << result.methods[m].label() << ','
            << result.methods[m].alpha_str() << ',' << r << ','
            << num_str(t.outcomes[m].posterior_h1) << '\n';
      }
    }
  }
}

namespace detail {

inline std::string trim(const std::string& s) {
  const size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      items.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  items.push_back(trim(cur));
  return items;
}

inline double parse_num(const std::string& s, const std::string& key) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw ConfigError("config: key '" + key + "': not a number: '" + s + "'");
  }
  return v;
}

}  // namespace detail

// INI-style config: `key = value` lines, '#' comments, comma-separated
// lists. Keys: seed, replicates, k, n, tau, rho, alpha, methods, mu,
// sigma_eps. The pearson method expands to one entry per alpha.
inline SimulationConfig SimulationConfig::parse(std::istream& in) {
  SimulationConfig config;
  std::vector<double> alphas{-0.5, 0.0};
  std::vector<std::string> method_names{"pearson", "bic"};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected 'key = value'");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const auto items = detail::split_list(value);
    if (key == "seed") {
      config.seed = static_cast<uint64_t>(
          std::strtoull(value.c_str(), nullptr, 10));
    } else if (key == "replicates") {
      config.replicates = static_cast<int>(detail::parse_num(value, key));
    } else if (key == "k") {
      config.k = static_cast<int>(detail::parse_num(value, key));
    } else if (key == "mu") {
      config.mu = detail::parse_num(value, key);
    } else if (key == "sigma_eps") {
      config.sigma_eps = detail::parse_num(value, key);
    } else if (key == "n") {
      config.subject_counts.clear();
      for (const auto& it : items) {
        config.subject_counts.push_back(
            static_cast<int>(detail::parse_num(it, key)));
      }
    } else if (key == "tau") {
      config.taus.clear();
      for (const auto& it : items) {
        config.taus.push_back(detail::parse_num(it, key));
      }
    } else if (key == "rho") {
      config.rhos.clear();
      for (const auto& it : items) {
        config.rhos.push_back(detail::parse_num(it, key));
      }
    } else if (key == "alpha") {
      alphas.clear();
      for (const auto& it : items) {
        alphas.push_back(detail::parse_num(it, key));
      }
    } else if (key == "methods") {
      method_names.clear();
      for (const auto& it : items) {
        if (it != "pearson" && it != "bic") {
          throw ConfigError("config: unknown method '" + it +
                            "' (expected pearson or bic)");
        }
        method_names.push_back(it);
      }
    } else {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": unknown key '" + key + "'");
    }
  }
  for (const auto& name : method_names) {
    if (name == "pearson") {
      for (double a : alphas) config.methods.push_back({Method::PearsonRM, a});
    } else {
      config.methods.push_back({Method::BicRM, 0.0});
    }
  }
  config.validate();
  return config;
}

}  // namespace pearsonbf
