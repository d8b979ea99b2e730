// Copyright 2026 The mmcca Authors
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
// mmcca command-line tool. Links only the C interface.
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mmcca/mmcca.h"

namespace {

int exit_code(mmcca_status s) {
  switch (s) {
    case MMCCA_OK: return 0;
    case MMCCA_ERR_NUMERICAL: return 2;
    default: return 1;
  }
}

// Thrown to unwind to main with a status already reported.
struct Failure {
  mmcca_status status;
};

void check(mmcca_status s, const char* what) {
  if (s == MMCCA_OK) return;
  std::fprintf(stderr, "mmcca %s: %s [%s]\n", what, mmcca_last_error(), mmcca_last_error_code());
  throw Failure{s};
}

struct ConfigDeleter {
  void operator()(mmcca_config* c) const { mmcca_config_free(c); }
};
struct ViewDeleter {
  void operator()(mmcca_view* v) const { mmcca_view_free(v); }
};
struct FitDeleter {
  void operator()(mmcca_fit* f) const { mmcca_fit_free(f); }
};
using ConfigPtr = std::unique_ptr<mmcca_config, ConfigDeleter>;
using ViewPtr = std::unique_ptr<mmcca_view, ViewDeleter>;
using FitPtr = std::unique_ptr<mmcca_fit, FitDeleter>;

// Settings shared by the subcommands; empty strings mean "not given".
struct Settings {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string model, method, K, delta, n_grid, trials, seed, whitening, max_sweeps, tol;
};

void add_setting_flags(CLI::App* app, Settings& s, bool fit_only) {
  app->add_option("--config", s.config_file, "key = value settings file");
  app->add_option("--set", s.overrides, "override a setting, key=value (repeatable)");
  app->add_option("--model", s.model, "dcca, ncca or mcca");
  app->add_option("--method", s.method, fit_only ? "cumulant, gencov or spectral" : "comma list of methods");
  app->add_option("--K", s.K, "number of shared sources");
  app->add_option("--delta", s.delta, fit_only ? "processing-point scale" : "processing-point scale(s), comma list");
  app->add_option("--seed", s.seed, "random seed");
  app->add_option("--whitening", s.whitening, "exact or randomized");
  app->add_option("--max-sweeps", s.max_sweeps, "joint diagonalization sweep limit");
  app->add_option("--tol", s.tol, "relative Off decrease stopping tolerance");
  if (!fit_only) {
    app->add_option("--N-grid", s.n_grid, "comma list of sample sizes");
    app->add_option("--trials", s.trials, "trials per sample size");
  }
}

ConfigPtr build_config(const Settings& s, bool fit_only) {
  mmcca_config* raw = nullptr;
  check(mmcca_config_create(&raw), "config");
  ConfigPtr cfg(raw);
  if (!s.config_file.empty()) check(mmcca_config_load(cfg.get(), s.config_file.c_str()), "config");
  for (const std::string& o : s.overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "mmcca config: override '%s' is not key=value\n", o.c_str());
      throw Failure{MMCCA_ERR_VALIDATION};
    }
    check(mmcca_config_set(cfg.get(), o.substr(0, eq).c_str(), o.substr(eq + 1).c_str()), "config");
  }
  const auto put = [&](const char* key, const std::string& value) {
    if (!value.empty()) check(mmcca_config_set(cfg.get(), key, value.c_str()), "config");
  };
  put("model", s.model);
  put("K", s.K);
  put("seed", s.seed);
  put("whitening", s.whitening);
  put("max_sweeps", s.max_sweeps);
  put("tol", s.tol);
  if (fit_only) {
    put("method", s.method);
    put("delta", s.delta);
  } else {
    put("methods", s.method);
    put(s.delta.find(',') == std::string::npos ? "delta" : "deltas", s.delta);
    put("N_grid", s.n_grid);
    put("trials", s.trials);
  }
  return cfg;
}

ViewPtr read_view(const std::string& path, const std::string& format) {
  mmcca_view* raw = nullptr;
  check(mmcca_view_read(path.c_str(), format.empty() ? nullptr : format.c_str(), &raw), "read");
  return ViewPtr(raw);
}

void print_view(const char* label, const std::string& path, const mmcca_view* v) {
  int64_t M = 0, N = 0, nnz = 0;
  int sparse = 0;
  check(mmcca_view_dims(v, &M, &N, &nnz, &sparse), "ingest");
  std::printf("%s %s: M=%lld N=%lld nnz=%lld %s\n", label, path.c_str(), static_cast<long long>(M),
              static_cast<long long>(N), static_cast<long long>(nnz), sparse ? "sparse" : "dense");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moment-matching estimation of CCA factor loadings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mmcca_version()));

  Settings synth_s, fit_s, exp_s;
  std::string synth_out, exp_out, fit_out;
  std::string fit_x1, fit_x2, fit_format;
  std::string eval_fit, eval_truth;
  bool eval_sign = false;
  std::string ing_x1, ing_x2, ing_format, ing_out1, ing_out2;

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic instance and panels");
  add_setting_flags(synth, synth_s, false);
  synth->add_option("--out", synth_out, "output directory")->required();

  CLI::App* fit = app.add_subcommand("fit", "estimate loadings from two views");
  add_setting_flags(fit, fit_s, true);
  fit->add_option("--x1", fit_x1, "view 1 data file")->required();
  fit->add_option("--x2", fit_x2, "view 2 data file")->required();
  fit->add_option("--format", fit_format, "dense-csv or docword-triplets (default: by extension)");
  fit->add_option("--out", fit_out, "output directory")->required();

  CLI::App* eval = app.add_subcommand("eval", "l1 error of fitted loadings against ground truth");
  eval->add_option("--fit", eval_fit, "directory with D1.csv and D2.csv")->required();
  eval->add_option("--truth", eval_truth, "instance directory with D1.csv and D2.csv")->required();
  eval->add_flag("--allow-sign", eval_sign, "match columns up to sign");

  CLI::App* experiment = app.add_subcommand("experiment", "sweep methods over sample sizes and trials");
  add_setting_flags(experiment, exp_s, false);
  experiment->add_option("--out", exp_out, "output directory")->required();

  CLI::App* ingest = app.add_subcommand("ingest", "parse and check data files");
  ingest->add_option("--x1", ing_x1, "view 1 data file")->required();
  ingest->add_option("--x2", ing_x2, "view 2 data file");
  ingest->add_option("--format", ing_format, "dense-csv or docword-triplets (default: by extension)");
  ingest->add_option("--out1", ing_out1, "rewrite view 1 to this path (format by extension)");
  ingest->add_option("--out2", ing_out2, "rewrite view 2 to this path (format by extension)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (synth->parsed()) {
      ConfigPtr cfg = build_config(synth_s, false);
      check(mmcca_synth(cfg.get(), synth_out.c_str()), "synth");
      std::printf("wrote %s\n", synth_out.c_str());
    } else if (fit->parsed()) {
      ConfigPtr cfg = build_config(fit_s, true);
      ViewPtr X1 = read_view(fit_x1, fit_format);
      ViewPtr X2 = read_view(fit_x2, fit_format);
      mmcca_fit* raw = nullptr;
      check(mmcca_fit_run(X1.get(), X2.get(), cfg.get(), &raw), "fit");
      FitPtr result(raw);
      check(mmcca_fit_write(result.get(), fit_out.c_str()), "fit");
      std::printf("wrote %s\n", fit_out.c_str());
    } else if (eval->parsed()) {
      double e1 = 0.0, e2 = 0.0;
      check(mmcca_eval_dirs(eval_fit.c_str(), eval_truth.c_str(), eval_sign ? 1 : 0, &e1, &e2), "eval");
      std::printf("err1 %.17g\nerr1_view2 %.17g\n", e1, e2);
    } else if (experiment->parsed()) {
      ConfigPtr cfg = build_config(exp_s, false);
      check(mmcca_experiment(cfg.get(), exp_out.c_str()), "experiment");
      std::printf("wrote %s\n", exp_out.c_str());
    } else if (ingest->parsed()) {
      ViewPtr X1 = read_view(ing_x1, ing_format);
      print_view("x1", ing_x1, X1.get());
      ViewPtr X2;
      if (!ing_x2.empty()) {
        X2 = read_view(ing_x2, ing_format);
        print_view("x2", ing_x2, X2.get());
        int64_t n1 = 0, n2 = 0;
        check(mmcca_view_dims(X1.get(), nullptr, &n1, nullptr, nullptr), "ingest");
        check(mmcca_view_dims(X2.get(), nullptr, &n2, nullptr, nullptr), "ingest");
        if (n1 != n2) {
          std::fprintf(stderr, "mmcca ingest: views are not sample-aligned (%lld vs %lld samples)\n",
                       static_cast<long long>(n1), static_cast<long long>(n2));
          return 1;
        }
      }
      if (!ing_out1.empty()) check(mmcca_view_write(X1.get(), ing_out1.c_str()), "ingest");
      if (!ing_out2.empty() && X2) check(mmcca_view_write(X2.get(), ing_out2.c_str()), "ingest");
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  }
  return 0;
}
