// pearsonbf: analytic Bayes factors for repeated-measures ANOVA designs,
// computed from summary statistics. Subcommands cover single reports (bf),
// the Sellke bound (sellke, sellke-curve), the Pearson Type VI prior
// (prior), raw-data ANOVA (anova), batch scoring of published summaries
// (batch), and the model-choice benchmark (simulate).
//
// Exit codes: 0 success, 1 partial failure (batch rows skipped),
// 2 validation or usage error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pearsonbf/pearsonbf.hpp"

namespace pbf = pearsonbf;
using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kInvE = 0.36787944117144232160;

// Numbers are serialized with 12 significant digits; non-finite values
// (log-domain overflow on exp) become JSON null, with log10_bf10 still
// carrying the magnitude.
json json_num(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return json(std::strtod(buf, nullptr));
}

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw std::runtime_error("cannot open output file: " + path);
  return file;
}

json report_to_json(const pbf::EvidenceReport& report, double prior_odds) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["method"] = pbf::method_name(report.bf.method);
  j["alpha"] = report.bf.alpha_used ? json_num(*report.bf.alpha_used)
                                    : json(nullptr);
  j["prior_odds_h0"] = json_num(prior_odds);
  j["bf10"] = json_num(report.bf10);
  j["bf01"] = json_num(report.bf01);
  j["log_bf10"] = json_num(report.bf.log_bf10);
  j["log10_bf10"] = json_num(report.bf.log10_bf10());
  j["favored"] = report.favored == pbf::Hypothesis::H1 ? "H1" : "H0";
  j["directed_bf"] = json_num(report.directed_bf);
  j["posterior_h0"] = json_num(report.posterior_h0.value());
  j["posterior_h1"] = json_num(report.posterior_h1.value());
  j["p_value"] =
      report.p_value ? json_num(report.p_value->value()) : json(nullptr);
  j["sellke_bound_bf10"] = report.sellke_bound_bf10
                               ? json_num(*report.sellke_bound_bf10)
                               : json(nullptr);
  return j;
}

void print_report_text(const pbf::EvidenceReport& report, std::ostream& out) {
  char line[128];
  auto row = [&](const char* key, const std::string& val) {
    std::snprintf(line, sizeof line, "%-18s %s", key, val.c_str());
    out << line << "\n";
  };
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  row("method", pbf::method_name(report.bf.method));
  if (report.bf.alpha_used) row("alpha", num(*report.bf.alpha_used));
  row("bf10", num(report.bf10));
  row("bf01", num(report.bf01));
  row("log10_bf10", num(report.bf.log10_bf10()));
  row("favored", report.favored == pbf::Hypothesis::H1 ? "H1" : "H0");
  row("directed_bf", num(report.directed_bf));
  row("posterior_h0", num(report.posterior_h0.value()));
  row("posterior_h1", num(report.posterior_h1.value()));
  if (report.p_value) row("p_value", num(report.p_value->value()));
  if (report.sellke_bound_bf10) {
    row("sellke_bound_bf10", num(*report.sellke_bound_bf10));
  }
}

struct DesignFlags {
  double f = 0.0;
  int x = -1, y = -1, n = -1, k = -1;
  std::string method = "rm";
};

// Resolves (f, x, y[, n, k]) from whichever flag pair the user supplied and
// cross-checks when both are present. "rm" fills x = k-1, y = (n-1)(k-1);
// "between" treats --n as the total N with x = k-1, y = N-k; "bic" needs
// n and k for the formula itself.
pbf::SummaryStats resolve_stats(const DesignFlags& d, pbf::Method method) {
  const bool have_xy = d.x >= 0 && d.y >= 0;
  const bool have_nk = d.n >= 0 && d.k >= 0;
  if (!have_xy && !have_nk) {
    throw pbf::DomainError(
        "provide degrees of freedom via --x/--y or a design via --n/--k");
  }
  pbf::SummaryStats stats;
  stats.f_stat = d.f;
  if (method == pbf::Method::PearsonRM || method == pbf::Method::BicRM) {
    if (have_nk) {
      stats = pbf::SummaryStats::repeated_measures(d.f, d.n, d.k);
      if (have_xy && (d.x != stats.x || d.y != stats.y)) {
        throw pbf::DomainError(
            "--x/--y disagree with the repeated-measures design --n/--k "
            "(expected x = k-1, y = (n-1)(k-1))");
      }
    } else {
      stats.x = d.x;
      stats.y = d.y;
      if (method == pbf::Method::BicRM) {
        throw pbf::DomainError("the bic method needs --n and --k");
      }
    }
  } else {  // between: n is the total observation count N
    if (have_nk) {
      stats.x = d.k - 1;
      stats.y = d.n - d.k;
      if (have_xy && (d.x != stats.x || d.y != stats.y)) {
        throw pbf::DomainError(
            "--x/--y disagree with the between-subjects design --n/--k "
            "(expected x = k-1, y = N-k)");
      }
    } else {
      stats.x = d.x;
      stats.y = d.y;
    }
  }
  stats.validate();
  return stats;
}

int cmd_bf(const DesignFlags& d, double alpha, double prior_odds,
           const std::string& format) {
  pbf::Method method = pbf::Method::PearsonRM;
  if (d.method == "between") method = pbf::Method::PearsonBetween;
  if (d.method == "bic") method = pbf::Method::BicRM;
  const pbf::SummaryStats stats = resolve_stats(d, method);
  const auto report = pbf::evidence_report(stats, alpha, method, prior_odds);
  if (format == "json") {
    json j = report_to_json(report, prior_odds);
    j["f"] = json_num(stats.f_stat);
    j["x"] = stats.x;
    j["y"] = stats.y;
    j["n"] = stats.n_subjects ? json(*stats.n_subjects) : json(nullptr);
    j["k"] = stats.k_conditions ? json(*stats.k_conditions) : json(nullptr);
    std::cout << j.dump(2) << "\n";
  } else {
    print_report_text(report, std::cout);
  }
  return 0;
}

int cmd_sellke(std::optional<double> p, const DesignFlags& d, bool have_f,
               const std::string& format) {
  double p_used;
  json j;
  j["schema_version"] = kSchemaVersion;
  if (p) {
    p_used = *p;
  } else if (have_f) {
    if (d.x < 1 || d.y < 1) {
      throw pbf::DomainError("sellke: --f needs --x and --y");
    }
    p_used = pbf::f_upper_tail(d.f, d.x, d.y).value();
    j["f"] = json_num(d.f);
    j["x"] = d.x;
    j["y"] = d.y;
  } else {
    throw pbf::DomainError("sellke: provide --p or --f with --x/--y");
  }
  const double bound = pbf::sellke_bound(p_used);
  j["p"] = json_num(p_used);
  j["sellke_bound_bf10"] = json_num(bound);
  if (format == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-18s %.12g\n%-18s %.12g\n", "p", p_used,
                  "sellke_bound_bf10", bound);
    std::cout << buf;
  }
  return 0;
}

int cmd_sellke_curve(int n, int k, double p_min, double p_max, int points,
                     const std::string& out_path) {
  if (n < 2 || k < 2) throw pbf::DomainError("sellke-curve: need n >= 2, k >= 2");
  if (points < 2) throw pbf::DomainError("sellke-curve: need at least 2 points");
  if (!(p_min > 0.0 && p_min < p_max && p_max < kInvE)) {
    throw pbf::DomainError("sellke-curve: need 0 < p-min < p-max < 1/e");
  }
  const int x = k - 1;
  const int y = (n - 1) * (k - 1);
  std::ofstream file;
  std::ostream& out = open_output(out_path, file);
  out << "p,sellke_bf10,bic_bf10\n";
  const double log_lo = std::log(p_min);
  const double log_hi = std::log(p_max);
  for (int i = 0; i < points; ++i) {
    const double p = std::exp(log_lo + (log_hi - log_lo) * i / (points - 1));
    const double f = pbf::invert_f_upper_tail(p, x, y);
    const double bic10 = pbf::bic_bf_rm(f, n, k).bf10();
    out << pbf::num_str(p) << ',' << pbf::num_str(pbf::sellke_bound(p)) << ','
        << pbf::num_str(bic10) << '\n';
  }
  return 0;
}

int cmd_prior(int n, int k, double alpha, double tau_max, int points,
              const std::string& out_path) {
  if (n < 2 || k < 2) throw pbf::DomainError("prior: need n >= 2, k >= 2");
  if (points < 2) throw pbf::DomainError("prior: need at least 2 points");
  if (!(tau_max > 0.0)) throw pbf::DomainError("prior: tau-max must be > 0");
  // The one-parameter reduction with N = nk observations: kappa = n,
  // beta = (nk - k)/2 - alpha - 2.
  const auto prior = pbf::PriorSpec::wang_sun(
      alpha, n, static_cast<double>(n) * k, k);
  std::ofstream file;
  std::ostream& out = open_output(out_path, file);
  out << "tau,density\n";
  for (int i = 0; i < points; ++i) {
    const double tau = tau_max * i / (points - 1);
    out << pbf::num_str(tau) << ','
        << pbf::num_str(pbf::pearson_prior_density(tau, prior)) << '\n';
  }
  return 0;
}

int cmd_anova(const std::string& input, double alpha,
              const std::string& format, double prior_odds) {
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open input file: " + input);
  const pbf::DataMatrix data = pbf::read_data_matrix(in);
  const pbf::AnovaTable table = pbf::rm_anova(data);
  const pbf::SummaryStats stats =
      pbf::summary_from_anova(table, data.n_subjects, data.k_conditions);
  const auto report =
      pbf::evidence_report(stats, alpha, pbf::Method::PearsonRM, prior_odds);
  if (format == "json") {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["anova"] = {{"ssa", json_num(table.ssa)},
                  {"ssb", json_num(table.ssb)},
                  {"ssr", json_num(table.ssr)},
                  {"sst", json_num(table.sst)},
                  {"df_treatment", table.df_treatment},
                  {"df_residual", table.df_residual},
                  {"f", json_num(table.f_stat)},
                  {"p_value", json_num(table.p_value.value())}};
    j["n"] = data.n_subjects;
    j["k"] = data.k_conditions;
    j["report"] = report_to_json(report, prior_odds);
    std::cout << j.dump(2) << "\n";
  } else {
    char line[96];
    const auto row = [&](const char* name, double ss, int df) {
      std::snprintf(line, sizeof line, "%-12s  %-14.6g  %d", name, ss, df);
      std::cout << line << "\n";
    };
    std::cout << "source        SS              df\n";
    row("treatment", table.ssa, table.df_treatment);
    row("subject", table.ssb, data.n_subjects - 1);
    row("residual", table.ssr, table.df_residual);
    row("total", table.sst, data.n_subjects * data.k_conditions - 1);
    std::snprintf(line, sizeof line, "F = %.6g, p = %.6g", table.f_stat,
                  table.p_value.value());
    std::cout << line << "\n\n";
    print_report_text(report, std::cout);
  }
  return 0;
}

// One published result per row: study_id,design,f,x,y,n,k (n, k may be
// blank). Malformed rows are skipped with a stderr diagnostic; exit 1 if any
// row was skipped, 2 if the file itself is unusable.
int cmd_batch(const std::string& input, std::vector<double> alphas,
              const std::string& out_path) {
  std::ifstream in(input);
  if (!in) {
    std::cerr << "error: cannot open input file: " << input << "\n";
    return 2;
  }
  std::string line;
  if (!std::getline(in, line)) {
    std::cerr << "error: " << input << ": empty file\n";
    return 2;
  }
  {
    const auto header = pbf::detail::split_csv_line(line);
    const std::vector<std::string> expected{"study_id", "design", "f",
                                            "x",        "y",      "n",
                                            "k"};
    if (std::vector<std::string>(header.begin(), header.end()) != expected) {
      std::cerr << "error: " << input
                << ": header must be study_id,design,f,x,y,n,k\n";
      return 2;
    }
  }
  if (alphas.empty()) alphas = {-0.5, 0.0};

  std::ofstream file;
  std::ostream& out = open_output(out_path, file);
  out << "study_id,alpha,bf10,bf01,favored,posterior_h1,p_value,sellke_bound\n";

  int lineno = 1;
  int skipped = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    try {
      const auto fields = pbf::detail::split_csv_line(line);
      if (fields.size() != 7) {
        throw pbf::CsvError("expected 7 fields, got " +
                            std::to_string(fields.size()));
      }
      const std::string study = fields[0];
      const std::string design = fields[1];
      if (design != "rm" && design != "between") {
        throw pbf::CsvError("design must be 'rm' or 'between', got '" +
                            design + "'");
      }
      auto cell = [&](int idx) {
        return pbf::detail::parse_cell(fields[idx], lineno, idx + 1);
      };
      const double f = cell(2);
      const int x = static_cast<int>(cell(3));
      const int y = static_cast<int>(cell(4));
      std::optional<int> n, k;
      if (!pbf::detail::trim(fields[5]).empty()) {
        n = static_cast<int>(cell(5));
      }
      if (!pbf::detail::trim(fields[6]).empty()) {
        k = static_cast<int>(cell(6));
      }
      pbf::SummaryStats stats{f, x, y, std::nullopt, std::nullopt};
      pbf::Method method = pbf::Method::PearsonBetween;
      if (design == "rm") {
        method = pbf::Method::PearsonRM;
        stats.n_subjects = n;
        stats.k_conditions = k;
      } else if (n && k && (x != *k - 1 || y != *n - *k)) {
        throw pbf::CsvError(
            "between-subjects dfs inconsistent with N and k (expected "
            "x = k-1, y = N-k)");
      }
      stats.validate();
      for (double alpha : alphas) {
        const auto report = pbf::evidence_report(stats, alpha, method);
        out << study << ',' << pbf::num_str(alpha) << ','
            << pbf::num_str(report.bf10) << ',' << pbf::num_str(report.bf01)
            << ',' << (report.favored == pbf::Hypothesis::H1 ? "H1" : "H0")
            << ',' << pbf::num_str(report.posterior_h1.value()) << ','
            << pbf::num_str(report.p_value->value()) << ','
            << (report.sellke_bound_bf10
                    ? pbf::num_str(*report.sellke_bound_bf10)
                    : "")
            << '\n';
      }
    } catch (const std::exception& e) {
      std::cerr << input << ":" << lineno << ": skipped: " << e.what() << "\n";
      ++skipped;
    }
  }
  return skipped > 0 ? 1 : 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 int threads) {
  std::ifstream in(config_path);
  if (!in) {
    std::cerr << "error: cannot open config file: " << config_path << "\n";
    return 2;
  }
  pbf::SimulationConfig config;
  try {
    config = pbf::SimulationConfig::parse(in);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const pbf::GridResult result = pbf::run_grid(config, threads);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  std::filesystem::create_directories(out_dir);
  const auto write = [&](const std::string& name, auto&& writer) {
    const std::string path = out_dir + "/" + name;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    writer(result, f);
  };
  write("accuracy.csv",
        [](const pbf::GridResult& r, std::ostream& o) { accuracy_export(r, o); });
  write("consistency.csv", [](const pbf::GridResult& r, std::ostream& o) {
    consistency_export(r, o);
  });
  write("posteriors.csv", [](const pbf::GridResult& r, std::ostream& o) {
    posterior_distribution_export(r, o);
  });

  int excluded = 0;
  for (const auto& t : result.trials) excluded += t.degenerate;
  std::cout << "cells: " << result.cells.size()
            << ", methods: " << result.methods.size()
            << ", replicates: " << config.replicates
            << ", seed: " << config.seed << ", threads: " << threads
            << ", excluded replicates: " << excluded << ", elapsed: " << elapsed
            << " ms\n"
            << "wrote " << out_dir << "/{accuracy,consistency,posteriors}.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic Bayes factors for repeated-measures ANOVA from "
               "summary statistics"};
  app.require_subcommand(1);

  // bf
  DesignFlags bf_d;
  double bf_alpha = -0.5, bf_prior_odds = 1.0;
  std::string bf_format = "json";
  auto* bf = app.add_subcommand("bf", "Bayes factor report from (F, x, y)");
  bf->add_option("--f", bf_d.f, "Observed F statistic")->required();
  bf->add_option("--x", bf_d.x, "Between-treatments df (k-1)");
  bf->add_option("--y", bf_d.y, "Residual df ((n-1)(k-1) for rm, N-k between)");
  bf->add_option("--n", bf_d.n, "Subjects (rm/bic) or total N (between)");
  bf->add_option("--k", bf_d.k, "Number of conditions/groups");
  bf->add_option("--alpha", bf_alpha, "Pearson prior shape in [-1/2, 0]");
  bf->add_option("--method", bf_d.method, "rm | between | bic")
      ->check(CLI::IsMember({"rm", "between", "bic"}));
  bf->add_option("--prior-odds", bf_prior_odds, "Prior odds p(H0)/p(H1)");
  bf->add_option("--format", bf_format, "json | text")
      ->check(CLI::IsMember({"json", "text"}));

  // sellke
  DesignFlags sk_d;
  std::string sk_format = "json";
  std::optional<double> sk_p;
  double sk_p_raw = 0.0, sk_f = 0.0;
  auto* sk = app.add_subcommand("sellke", "Sellke upper bound on BF10");
  auto* sk_p_opt = sk->add_option("--p", sk_p_raw, "p-value (0 < p < 1/e)");
  auto* sk_f_opt = sk->add_option("--f", sk_f, "F statistic (with --x/--y)");
  sk->add_option("--x", sk_d.x, "Between-treatments df");
  sk->add_option("--y", sk_d.y, "Residual df");
  sk->add_option("--format", sk_format, "json | text")
      ->check(CLI::IsMember({"json", "text"}));

  // sellke-curve
  int sc_n = 18, sc_k = 2, sc_points = 200;
  double sc_pmin = 1e-6, sc_pmax = 0.02;
  std::string sc_out = "-";
  auto* sc = app.add_subcommand(
      "sellke-curve", "CSV of Sellke bound vs BIC BF10 over a p grid");
  sc->add_option("--n", sc_n, "Subjects");
  sc->add_option("--k", sc_k, "Conditions");
  sc->add_option("--p-min", sc_pmin, "Smallest p on the log grid");
  sc->add_option("--p-max", sc_pmax, "Largest p on the log grid");
  sc->add_option("--points", sc_points, "Grid size (>= 2)");
  sc->add_option("--out", sc_out, "Output CSV path ('-' for stdout)");

  // prior
  int pr_n = 18, pr_k = 2, pr_points = 201;
  double pr_alpha = -0.5, pr_tau_max = 5.0;
  std::string pr_out = "-";
  auto* pr = app.add_subcommand("prior",
                                "CSV of the Pearson Type VI prior density");
  pr->add_option("--n", pr_n, "Subjects");
  pr->add_option("--k", pr_k, "Conditions");
  pr->add_option("--alpha", pr_alpha, "Prior shape in [-1/2, 0]");
  pr->add_option("--tau-max", pr_tau_max, "Upper end of the tau grid");
  pr->add_option("--points", pr_points, "Grid size (>= 2)");
  pr->add_option("--out", pr_out, "Output CSV path ('-' for stdout)");

  // anova
  std::string an_input, an_format = "json";
  double an_alpha = -0.5, an_prior_odds = 1.0;
  auto* an = app.add_subcommand(
      "anova", "Repeated-measures ANOVA + Bayes factor from a raw-data CSV");
  an->add_option("--input", an_input, "CSV: header subject,c1,...,ck")
      ->required();
  an->add_option("--alpha", an_alpha, "Pearson prior shape in [-1/2, 0]");
  an->add_option("--prior-odds", an_prior_odds, "Prior odds p(H0)/p(H1)");
  an->add_option("--format", an_format, "json | text")
      ->check(CLI::IsMember({"json", "text"}));

  // batch
  std::string ba_input, ba_out = "-";
  std::vector<double> ba_alphas;
  auto* ba = app.add_subcommand(
      "batch", "Score a CSV of published summaries (one row per study)");
  ba->add_option("--input", ba_input, "CSV: study_id,design,f,x,y,n,k")
      ->required();
  ba->add_option("--alpha", ba_alphas,
                 "Prior shape(s); repeatable (default -0.5 and 0)");
  ba->add_option("--out", ba_out, "Output CSV path ('-' for stdout)");

  // simulate
  std::string si_config, si_out_dir = ".";
  int si_threads = 1;
  auto* si = app.add_subcommand(
      "simulate", "Run the model-choice benchmark grid from a config file");
  si->add_option("--config", si_config, "Config file (key = value lines)")
      ->required();
  si->add_option("--out-dir", si_out_dir, "Directory for the output CSVs");
  si->add_option("--threads", si_threads, "Worker threads (default 1)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp") {
      return app.exit(e);
    }
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (bf->parsed()) return cmd_bf(bf_d, bf_alpha, bf_prior_odds, bf_format);
    if (sk->parsed()) {
      if (sk_p_opt->count() > 0) sk_p = sk_p_raw;
      sk_d.f = sk_f;
      return cmd_sellke(sk_p, sk_d, sk_f_opt->count() > 0, sk_format);
    }
    if (sc->parsed()) {
      return cmd_sellke_curve(sc_n, sc_k, sc_pmin, sc_pmax, sc_points, sc_out);
    }
    if (pr->parsed()) {
      return cmd_prior(pr_n, pr_k, pr_alpha, pr_tau_max, pr_points, pr_out);
    }
    if (an->parsed()) {
      return cmd_anova(an_input, an_alpha, an_format, an_prior_odds);
    }
    if (ba->parsed()) return cmd_batch(ba_input, ba_alphas, ba_out);
    if (si->parsed()) return cmd_simulate(si_config, si_out_dir, si_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
