// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// The `sift` command line: select, stats, and bench subcommands.
//
// Exit status: 0 on success, 2 on input errors (bad flags, unreadable or
// malformed files, invalid parameters), 3 on numerical failure.

#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "sift/core.hpp"
#include "sift/errors.hpp"
#include "sift/io.hpp"
#include "sift/selectors.hpp"
#include "sift/uncertainty.hpp"

namespace sift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct CliConfig {
  Method method = Method::kSift;
  double lambda_prime = 0.01;
  std::size_t n_select = 50;
  /// Candidates kept by nearest-neighbor preselection; 0 disables it.
  std::size_t preselect_k = 200;
  bool normalize = true;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  io::Format format = io::Format::kBinary;
  std::size_t query_row = 0;
  /// Output path for the JSONL selection; empty or "-" means stdout.
  std::string output;
};

struct StatsOptions {
  std::size_t probe_trials = 100;
  /// Steps of SIFT used for the convergence bound table (0 skips it).
  std::size_t bound_steps = 0;
  std::vector<std::size_t> beta_n;
  double delta = 0.05;
  ConfidenceParams params;
};

struct BenchOptions {
  std::vector<std::size_t> sizes;
  std::size_t repeat = 1;
};

struct Inputs {
  EmbeddingSet space;       // the full data space, after normalization
  EmbeddingSet candidates;  // after optional preselection
  QueryEmbedding query;
};

/// Loads the data space and query row, normalizes both when requested, and
/// applies preselection to every method. Preselection is skipped when the
/// space is not larger than preselect_k.
inline Inputs load_inputs(const CliConfig& cfg, const std::string& embeddings_path,
                          const std::string& query_path) {
  Inputs in;
  in.space = io::read_embeddings(embeddings_path, cfg.format);
  const EmbeddingSet queries = io::read_embeddings(query_path, cfg.format);
  if (in.space.empty()) throw InvalidParameter(embeddings_path + ": no embeddings");
  if (cfg.query_row >= queries.rows()) {
    throw InvalidParameter(query_path + ": query row " + std::to_string(cfg.query_row) +
                           " out of range (" + std::to_string(queries.rows()) + " rows)");
  }
  if (queries.dim() != in.space.dim()) {
    throw InputError(query_path + ": query dimension " + std::to_string(queries.dim()) +
                     " does not match embedding dimension " + std::to_string(in.space.dim()));
  }
  in.query = QueryEmbedding(queries.row(cfg.query_row).transpose());
  if (cfg.normalize) {
    try {
      in.space = normalize_rows(in.space);
    } catch (const ZeroNormRow& e) {
      throw InputError(embeddings_path + ": row " + std::to_string(e.row()) + " has zero norm");
    }
    try {
      in.query = normalize_query(in.query);
    } catch (const ZeroNormRow&) {
      throw InputError(query_path + ": query row " + std::to_string(cfg.query_row) +
                       " has zero norm");
    }
  }
  if (cfg.preselect_k > 0 && cfg.preselect_k < in.space.rows()) {
    in.candidates = preselect_candidates(in.space, in.query, cfg.preselect_k);
  } else {
    in.candidates = in.space;
  }
  return in;
}

inline KernelConfig kernel_config(const CliConfig& cfg) {
  KernelConfig k;
  k.lambda_prime = cfg.lambda_prime;
  k.normalize_inputs = cfg.normalize;
  return k;
}

/// Exact selectors keep a (K+1)^2 matrix; past this size they switch to the
/// column cache.
inline constexpr std::size_t kFullKernelLimit = 4096;

inline SelectOptions select_options(const CliConfig& cfg, std::size_t candidates) {
  SelectOptions opts;
  opts.adaptive_alpha = cfg.alpha;
  opts.storage = candidates > kFullKernelLimit ? KernelStorage::kColumnCache : KernelStorage::kFull;
  return opts;
}

/// Runs `body`, mapping library exceptions to exit codes and diagnostics.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const NumericalFailure& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

inline double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

inline int run_select(const CliConfig& cfg, const std::string& embeddings_path,
                      const std::string& query_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg, embeddings_path, query_path);
    const KernelConfig kcfg = kernel_config(cfg);
    const auto start = std::chrono::steady_clock::now();
    const SelectionResult result = select(cfg.method, in.candidates, in.query, cfg.n_select, kcfg,
                                          select_options(cfg, in.candidates.rows()));
    const double ms = elapsed_ms(start);
    const double eta_sq = irreducible_uncertainty(in.candidates, in.query);

    const bool to_stdout = cfg.output.empty() || cfg.output == "-";
    if (to_stdout) {
      io::write_selection(result, in.candidates, out);
    } else {
      io::write_selection(result, in.candidates, cfg.output);
    }
    std::ostream& summary = to_stdout ? err : out;
    std::ostringstream line;
    line << "method=" << method_name(result.method) << " n=" << result.size()
         << " sigma_final_sq=" << std::setprecision(6) << result.final_sigma_sq()
         << " eta_sq=" << eta_sq << " elapsed_ms=" << std::fixed << std::setprecision(3) << ms;
    summary << line.str() << '\n';
    return kExitOk;
  });
}

inline int run_stats(const CliConfig& cfg, const StatsOptions& opts,
                     const std::string& embeddings_path, const std::string& query_path,
                     std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Inputs in = load_inputs(cfg, embeddings_path, query_path);
    const KernelConfig kcfg = kernel_config(cfg);

    nlohmann::ordered_json j;
    j["rows"] = in.space.rows();
    j["candidates"] = in.candidates.rows();
    j["dim"] = in.space.dim();
    j["lambda_prime"] = cfg.lambda_prime;
    const double eta_sq = irreducible_uncertainty(in.candidates, in.query);
    j["eta_sq"] = eta_sq;

    const ProbeReport probe =
        submodularity_probe(in.candidates, in.query, kcfg, opts.probe_trials, cfg.seed);
    j["probe"] = {{"passed", probe.passed},
                  {"worst_slack", probe.worst_slack},
                  {"checks", probe.checks},
                  {"violations", probe.violations},
                  {"trials", opts.probe_trials},
                  {"seed", cfg.seed}};

    std::size_t steps = opts.bound_steps;
    for (std::size_t n : opts.beta_n) steps = std::max(steps, n);
    SelectionResult run;
    RowMatrix selected;
    if (steps > 0) {
      SelectOptions fixed = select_options(cfg, in.candidates.rows());
      fixed.adaptive_alpha.reset();
      run = sift_select(in.candidates, in.query, steps, kcfg, fixed);
      selected = in.candidates.subset(run.order).data();
    }

    if (opts.bound_steps > 0) {
      const double lambda_min = basis_lambda_min(in.candidates);
      j["lambda_min"] = lambda_min;
      nlohmann::ordered_json table = nlohmann::ordered_json::array();
      for (std::size_t n = 1; n <= opts.bound_steps; ++n) {
        const double lambda_hat = selected_lambda_max(selected.topRows(static_cast<Eigen::Index>(n)));
        const double rhs = convergence_bound_rhs(n, in.candidates.dim(), cfg.lambda_prime,
                                                 lambda_min, lambda_hat);
        table.push_back({{"n", n},
                         {"sigma_sq", run.sigma_trace[n]},
                         {"excess", run.sigma_trace[n] - eta_sq},
                         {"lambda_hat", lambda_hat},
                         {"rhs", rhs}});
      }
      j["convergence_bound"] = table;
    }

    if (!opts.beta_n.empty()) {
      ConfidenceParams p = opts.params;
      p.dim = in.space.dim();
      nlohmann::ordered_json cls = nlohmann::ordered_json::array();
      nlohmann::ordered_json reg = nlohmann::ordered_json::array();
      for (std::size_t n : opts.beta_n) {
        cls.push_back({{"n", n}, {"beta", beta_classification(n, opts.delta, p)}});
        const double gamma =
            realized_information_gain(selected.topRows(static_cast<Eigen::Index>(n)), kcfg);
        reg.push_back({{"n", n},
                       {"gamma_n", gamma},
                       {"beta", beta_regression(n, opts.delta, p.norm_bound, p.noise, gamma)}});
      }
      j["delta"] = opts.delta;
      j["beta_classification"] = cls;
      j["beta_regression"] = reg;
    }
    out << j.dump(2) << '\n';
    return kExitOk;
  });
}

/// FNV-1a over the selected indices; identical selections print identical
/// digests.
inline std::uint64_t order_digest(const std::vector<std::size_t>& order) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t v : order) {
    for (int b = 0; b < 8; ++b) {
      h ^= (static_cast<std::uint64_t>(v) >> (8 * b)) & 0xFF;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

inline int run_bench(const CliConfig& cfg, const BenchOptions& opts,
                     const std::string& embeddings_path, const std::string& query_path,
                     std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    CliConfig no_pre = cfg;
    no_pre.preselect_k = 0;
    const Inputs in = load_inputs(no_pre, embeddings_path, query_path);
    const KernelConfig kcfg = kernel_config(cfg);
    if (opts.repeat < 1) throw InvalidParameter("--repeat must be at least 1");

    std::vector<std::size_t> sizes = opts.sizes;
    if (sizes.empty()) sizes.push_back(in.space.rows());

    for (std::size_t requested : sizes) {
      const std::size_t k = std::min(requested, in.space.rows());
      std::vector<std::size_t> head(k);
      for (std::size_t i = 0; i < k; ++i) head[i] = i;
      const EmbeddingSet space = in.space.subset(head);
      const std::size_t n = std::min(cfg.n_select, k);

      std::map<std::string, double> times;
      auto time_it = [&](const std::string& name, const std::function<SelectionResult()>& fn) {
        double best = 0.0;
        std::uint64_t digest = 0;
        for (std::size_t r = 0; r < opts.repeat; ++r) {
          const auto start = std::chrono::steady_clock::now();
          const SelectionResult res = fn();
          const double ms = elapsed_ms(start);
          best = r == 0 ? ms : std::min(best, ms);
          digest = order_digest(res.order);
        }
        times[name] = best;
        out << "K=" << k << " method=" << name << " time_ms=" << std::fixed << std::setprecision(3)
            << best << " digest=" << std::hex << digest << std::dec << '\n';
      };

      const SelectOptions exact = select_options(cfg, k);
      time_it("nn", [&] { return nn_select(space, in.query, n, false, kcfg); });
      time_it("nn-f", [&] { return nn_select(space, in.query, n, true, kcfg); });
      time_it("us", [&] { return uncertainty_sampling_select(space, in.query, n, kcfg, exact); });
      time_it("sift", [&] { return sift_select(space, in.query, n, kcfg, exact); });
      time_it("sift-fast", [&] { return sift_fast_select(space, in.query, n, kcfg); });
      if (cfg.preselect_k > 0 && cfg.preselect_k < k) {
        time_it("sift-fast+pre", [&] {
          const EmbeddingSet pool = preselect_candidates(space, in.query, cfg.preselect_k);
          return sift_fast_select(pool, in.query, std::min(n, pool.rows()), kcfg);
        });
      }
      const double nn = std::max(times["nn"], 1e-6);
      out << "K=" << k << " ratio sift/nn=" << std::fixed << std::setprecision(2)
          << times["sift"] / nn << '\n';
      out << "K=" << k << " ratio sift-fast/nn=" << std::fixed << std::setprecision(2)
          << times["sift-fast"] / nn << '\n';
      if (times.count("sift-fast+pre")) {
        out << "K=" << k << " ratio sift-fast+pre/nn=" << std::fixed << std::setprecision(2)
            << times["sift-fast+pre"] / nn << '\n';
      }
    }
    return kExitOk;
  });
}

/// Parses argv and dispatches to a subcommand.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout,
                std::ostream& err = std::cerr) {
  CLI::App app{"Informative data selection for a query embedding"};
  app.require_subcommand(1);

  CliConfig cfg;
  StatsOptions stats;
  BenchOptions bench;
  std::string method = "sift";
  std::string format = "binary";
  std::string embeddings;
  std::string query;
  std::optional<double> alpha;

  auto common = [&](CLI::App* sub) {
    sub->add_option("embeddings", embeddings, "Embedding file (the data space)")->required();
    sub->add_option("query", query, "Query embedding file")->required();
    sub->add_option("--method", method, "sift, sift-fast, nn, nn-f or us")
        ->check(CLI::IsMember({"sift", "sift-fast", "nn", "nn-f", "us"}));
    sub->add_option("--lambda,--lambda-prime", cfg.lambda_prime, "Regularizer lambda'")
        ->check(CLI::PositiveNumber);
    sub->add_option("--n,--n-select", cfg.n_select, "Number of rows to select")
        ->check(CLI::PositiveNumber);
    sub->add_option("--preselect-k", cfg.preselect_k, "Nearest-neighbor pool size (0 = off)");
    sub->add_flag("--normalize,!--no-normalize", cfg.normalize, "Unit-normalize inputs");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--format", format, "binary or csv")->check(CLI::IsMember({"binary", "csv"}));
    sub->add_option("--query-row", cfg.query_row, "Row of the query file to use");
  };

  CLI::App* sel = app.add_subcommand("select", "Select rows for a query");
  common(sel);
  sel->add_option("--alpha", alpha, "Adaptive stopping constant")->check(CLI::PositiveNumber);
  sel->add_option("--output", cfg.output, "JSONL output path (default stdout)");

  CLI::App* st = app.add_subcommand("stats", "Uncertainty diagnostics as JSON");
  common(st);
  st->add_option("--probe-trials", stats.probe_trials, "Submodularity probe trials")
      ->check(CLI::PositiveNumber);
  st->add_option("--bound-steps", stats.bound_steps, "SIFT steps for the convergence bound table");
  st->add_option("--beta-n", stats.beta_n, "n values for the confidence-width tables");
  st->add_option("--delta", stats.delta, "Confidence level delta in (0,1)");
  st->add_option("--vocab", stats.params.vocab_size, "Vocabulary size V");
  st->add_option("--norm-bound", stats.params.norm_bound, "Norm bound B");
  st->add_option("--lipschitz", stats.params.lipschitz, "Constant L");
  st->add_option("--reg", stats.params.reg, "Regularization lambda");
  st->add_option("--rho", stats.params.noise, "Regression noise rho");

  CLI::App* be = app.add_subcommand("bench", "Time every method");
  common(be);
  be->add_option("--sizes", bench.sizes, "Data-space sizes (prefixes of the file)");
  be->add_option("--repeat", bench.repeat, "Repetitions per method")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }

  cfg.method = *parse_method(method);
  cfg.format = format == "csv" ? io::Format::kCsv : io::Format::kBinary;
  cfg.alpha = alpha;

  if (sel->parsed()) return run_select(cfg, embeddings, query, out, err);
  if (st->parsed()) return run_stats(cfg, stats, embeddings, query, out, err);
  return run_bench(cfg, bench, embeddings, query, out, err);
}

}  // namespace sift::cli
