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
#include "mmcca/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <limits>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "mmcca/error.hpp"
#include "mmcca/eval.hpp"
#include "mmcca/io.hpp"
#include "mmcca/random.hpp"

namespace mmcca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kBaselineConcentration = 0.5;

const std::set<std::string> kKnownKeys = {
    "model", "method", "methods", "K", "delta", "deltas", "N_grid", "trials", "seed", "whitening", "max_sweeps",
    "tol", "num_points", "oversample", "generator", "mode", "M", "M1", "M2", "K1", "K2", "c", "c1", "c2", "L",
    "Ls", "Ln", "threads", "allow_sign", "out"};

bool uses_delta(const std::string& method) { return method == "gencov" || method == "spectral"; }

std::string format_value(double x) {
  if (!std::isfinite(x)) return "nan";
  std::ostringstream out;
  out.precision(17);
  out << x;
  return out.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

Matrix baseline_loadings(Rng& rng, Index M, Index K, Generator g) {
  Matrix D(M, K);
  for (Index k = 0; k < K; ++k) {
    if (g == Generator::discrete) {
      D.col(k) = rng.dirichlet(M, kBaselineConcentration);
    } else {
      for (Index m = 0; m < M; ++m) D(m, k) = 2.0 * rng.uniform() - 1.0;
    }
  }
  return normalize_columns_l1(D);
}

struct Truth {
  Matrix D1, D2;
};

struct Task {
  std::size_t n_index;
  int trial;
};

WhiteningMethod parse_whitening(const std::string& s) {
  if (s == "exact") return WhiteningMethod::exact;
  if (s == "randomized") return WhiteningMethod::randomized;
  throw Error(Errc::invalid_argument, "unknown whitening '" + s + "' (expected exact or randomized)");
}

}  // namespace

double median(std::vector<double> values) {
  values.erase(std::remove_if(values.begin(), values.end(), [](double v) { return !std::isfinite(v); }), values.end());
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void validate(const ExperimentConfig& c) {
  if (c.n_grid.empty()) throw Error(Errc::invalid_argument, "N grid must not be empty");
  for (Index n : c.n_grid) {
    if (n < 3) throw Error(Errc::invalid_argument, "every N in the grid must be at least 3");
  }
  if (c.trials < 1) throw Error(Errc::invalid_argument, "trials must be at least 1");
  if (c.methods.empty()) throw Error(Errc::invalid_argument, "methods must not be empty");
  for (const std::string& m : c.methods) {
    if (m != "random") parse_method(m);
  }
  if (c.deltas.empty()) throw Error(Errc::invalid_argument, "delta grid must not be empty");
  for (double d : c.deltas) {
    if (!(d > 0.0)) throw Error(Errc::invalid_argument, "every delta must be positive");
  }
  if (c.threads < 0) throw Error(Errc::invalid_argument, "threads must be nonnegative");
}

FitConfig fit_config_from(const KeyValueConfig& kv) {
  FitConfig f;
  f.model = parse_model(kv.get_string("model", "dcca"));
  f.method = parse_method(kv.get_string("method", "gencov"));
  f.K = kv.get_int("K", f.K);
  f.delta = kv.get_double("delta", f.delta);
  f.num_points = kv.get_int("num_points", f.num_points);
  f.max_sweeps = static_cast<int>(kv.get_int("max_sweeps", f.max_sweeps));
  f.tol = kv.get_double("tol", f.tol);
  f.seed = kv.get_uint("seed", f.seed);
  f.whitening = parse_whitening(kv.get_string("whitening", "exact"));
  f.oversample = kv.get_int("oversample", f.oversample);
  return f;
}

ExperimentConfig experiment_config_from(const KeyValueConfig& kv) {
  for (const auto& [key, value] : kv.values()) {
    if (!kKnownKeys.count(key)) throw Error(Errc::invalid_argument, "unknown setting '" + key + "'");
  }
  ExperimentConfig c;
  const std::string gen = kv.get_string("generator", "discrete");
  if (gen == "discrete") {
    c.generator = Generator::discrete;
  } else if (gen == "continuous") {
    c.generator = Generator::continuous;
  } else {
    throw Error(Errc::invalid_argument, "unknown generator '" + gen + "' (expected discrete or continuous)");
  }
  c.fit = fit_config_from(kv);
  if (!kv.has("model")) c.fit.model = c.generator == Generator::discrete ? ModelKind::dcca : ModelKind::ncca;

  const Index M = kv.get_int("M", 20);
  const Index K = kv.get_int("K", 10);
  const double L = kv.get_double("L", 1000.0);
  if (c.generator == Generator::discrete) {
    DiscreteParams& p = c.discrete;
    const std::string mode = kv.get_string("mode", "dirichlet");
    if (mode == "fixed2d") {
      p = DiscreteParams{2, 2, 1, 2, 2, 0.1, 0.1, 0.1, 100.0, 100.0, LoadingMode::fixed2d};
    } else if (mode == "dirichlet") {
      p.mode = LoadingMode::dirichlet;
      p.M1 = p.M2 = M;
      p.K = K;
      p.K1 = p.K2 = M;
      p.Ls = p.Ln = L;
    } else {
      throw Error(Errc::invalid_argument, "unknown mode '" + mode + "' (expected dirichlet or fixed2d)");
    }
    p.M1 = kv.get_int("M1", p.M1);
    p.M2 = kv.get_int("M2", p.M2);
    p.K = kv.get_int("K", p.K);
    p.K1 = kv.get_int("K1", p.K1);
    p.K2 = kv.get_int("K2", p.K2);
    p.c = kv.get_double("c", p.c);
    p.c1 = kv.get_double("c1", p.c1);
    p.c2 = kv.get_double("c2", p.c2);
    p.Ls = kv.get_double("Ls", p.Ls);
    p.Ln = kv.get_double("Ln", p.Ln);
    c.fit.K = p.K;
  } else {
    ContinuousParams& p = c.continuous;
    p.M1 = kv.get_int("M1", M);
    p.M2 = kv.get_int("M2", M);
    p.K = K;
    p.K1 = kv.get_int("K1", K);
    p.K2 = kv.get_int("K2", K);
    p.c = kv.get_double("c", p.c);
    p.c1 = kv.get_double("c1", p.c1);
    p.c2 = kv.get_double("c2", p.c2);
    p.Ls = kv.get_double("Ls", L);
    p.Ln = kv.get_double("Ln", L);
    c.fit.K = p.K;
  }
  if (kv.has("N_grid")) c.n_grid = parse_index_list(kv.get_string("N_grid", ""));
  c.trials = static_cast<int>(kv.get_int("trials", c.trials));
  if (kv.has("methods") || kv.has("method")) c.methods = kv.get_list(kv.has("methods") ? "methods" : "method", {});
  if (kv.has("deltas")) {
    c.deltas = parse_double_list(kv.get_string("deltas", ""));
  } else {
    c.deltas = {c.fit.delta};
  }
  c.seed = kv.get_uint("seed", c.seed);
  c.threads = static_cast<int>(kv.get_int("threads", c.threads));
  c.allow_sign = kv.get_bool("allow_sign", c.generator == Generator::continuous);
  validate(c);
  return c;
}

std::vector<std::string> synthesize(const ExperimentConfig& config, const std::string& dir) {
  validate(config);
  namespace fs = std::filesystem;
  const std::uint64_t instance_seed = derive_seed(config.seed, 0);
  DiscreteInstance dinst;
  ContinuousInstance cinst;
  const std::string instance_dir = (fs::path(dir) / "instance").string();
  if (config.generator == Generator::discrete) {
    dinst = gen_discrete_instance(config.discrete, instance_seed);
    write_instance(instance_dir, dinst);
  } else {
    cinst = gen_continuous_instance(config.continuous, instance_seed);
    write_instance(instance_dir, cinst);
  }
  std::vector<std::string> panels;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    for (int trial = 0; trial < config.trials; ++trial) {
      const Index N = config.n_grid[i];
      const std::uint64_t seed = derive_seed(config.seed, 1, i, static_cast<std::uint64_t>(trial));
      const Sample s = config.generator == Generator::discrete ? sample_discrete(dinst, N, seed)
                                                               : sample_continuous(cinst, N, seed);
      const std::string cell = (fs::path(dir) / ("N" + std::to_string(N) + "_trial" + std::to_string(trial))).string();
      ensure_directory(cell);
      const char* ext = config.generator == Generator::discrete ? ".txt" : ".csv";
      write_view((fs::path(cell) / (std::string("X1") + ext)).string(), s.X1);
      write_view((fs::path(cell) / (std::string("X2") + ext)).string(), s.X2);
      panels.push_back(cell);
    }
  }
  return panels;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  Truth truth;
  DiscreteInstance dinst;
  ContinuousInstance cinst;
  const std::uint64_t instance_seed = derive_seed(config.seed, 0);
  if (config.generator == Generator::discrete) {
    dinst = gen_discrete_instance(config.discrete, instance_seed);
    truth = {dinst.D1, dinst.D2};
  } else {
    cinst = gen_continuous_instance(config.continuous, instance_seed);
    truth = {cinst.D1, cinst.D2};
  }
  const Index K = truth.D1.cols();

  std::vector<Task> tasks;
  for (std::size_t i = 0; i < config.n_grid.size(); ++i) {
    for (int trial = 0; trial < config.trials; ++trial) tasks.push_back({i, trial});
  }
  std::vector<std::vector<ResultRecord>> slots(tasks.size());

  const auto run_task = [&](std::size_t task_index) {
    const Task& task = tasks[task_index];
    const Index N = config.n_grid[task.n_index];
    const std::uint64_t sample_seed = derive_seed(config.seed, 1, task.n_index, static_cast<std::uint64_t>(task.trial));
    std::vector<ResultRecord>& out = slots[task_index];
    Sample sample;
    std::string sample_error;
    try {
      sample = config.generator == Generator::discrete ? sample_discrete(dinst, N, sample_seed)
                                                       : sample_continuous(cinst, N, sample_seed);
    } catch (const Error& e) {
      sample_error = e.what();
    }
    for (const std::string& method : config.methods) {
      const std::vector<double> deltas = uses_delta(method) ? config.deltas : std::vector<double>{0.0};
      for (double delta : deltas) {
        ResultRecord rec;
        rec.method = method;
        rec.N = N;
        rec.trial = task.trial;
        rec.delta = delta;
        const auto start = std::chrono::steady_clock::now();
        try {
          if (!sample_error.empty()) throw Error(Errc::invalid_argument, "sampling", sample_error);
          Loadings L;
          if (method == "random") {
            Rng rng(derive_seed(config.seed, 3, task.n_index, static_cast<std::uint64_t>(task.trial)));
            L.D1 = baseline_loadings(rng, truth.D1.rows(), K, config.generator);
            L.D2 = baseline_loadings(rng, truth.D2.rows(), K, config.generator);
          } else {
            FitConfig fc = config.fit;
            fc.K = K;
            fc.method = parse_method(method);
            if (uses_delta(method)) fc.delta = delta;
            fc.seed = derive_seed(config.seed, 2, task.n_index, static_cast<std::uint64_t>(task.trial));
            const FitResult fit = mmcca::fit(sample.X1, sample.X2, fc);
            L = fit.loadings;
            rec.sweeps = fit.diagnostics.sweeps;
            rec.final_off = fit.diagnostics.final_off;
            rec.dropped_points = static_cast<Index>(fit.diagnostics.dropped.size());
            rec.flagged = fit.diagnostics.flagged;
          }
          rec.err1 = l1_error(L.D1, truth.D1, config.allow_sign).error;
          rec.err1_view2 = l1_error(L.D2, truth.D2, config.allow_sign).error;
        } catch (const Error& e) {
          rec.status = errc_name(e.code());
          rec.message = e.what();
          rec.err1 = rec.err1_view2 = kNaN;
        } catch (const std::exception& e) {
          rec.status = "internal";
          rec.message = e.what();
          rec.err1 = rec.err1_view2 = kNaN;
        }
        rec.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(std::move(rec));
      }
    }
  };

  unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(tasks.size())));
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) run_task(i);
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ExperimentResult result;
  for (auto& slot : slots) {
    for (auto& rec : slot) result.records.push_back(std::move(rec));
  }
  std::sort(result.records.begin(), result.records.end(), [](const ResultRecord& a, const ResultRecord& b) {
    return std::tie(a.method, a.N, a.trial, a.delta) < std::tie(b.method, b.N, b.trial, b.delta);
  });

  std::vector<std::tuple<std::string, double, Index>> keys;
  for (const ResultRecord& r : result.records) keys.emplace_back(r.method, r.delta, r.N);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  for (const auto& [method, delta, N] : keys) {
    SummaryRow row{method, delta, N};
    std::vector<double> e1, e2;
    for (const ResultRecord& r : result.records) {
      if (r.method != method || r.delta != delta || r.N != N) continue;
      if (r.status == "ok") {
        ++row.ok;
        e1.push_back(r.err1);
        e2.push_back(r.err1_view2);
      } else {
        ++row.failed;
      }
    }
    row.median_err1 = median(e1);
    row.median_err1_view2 = median(e2);
    result.summary.push_back(row);
  }
  return result;
}

std::string records_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "method,N,trial,delta,err1,err1_view2,runtime_seconds,sweeps,final_off,dropped_points,flagged,status,message\n";
  for (const ResultRecord& r : result.records) {
    out << r.method << ',' << r.N << ',' << r.trial << ',' << (uses_delta(r.method) ? format_value(r.delta) : "") << ','
        << format_value(r.err1) << ',' << format_value(r.err1_view2) << ',' << format_value(r.runtime_seconds) << ','
        << r.sweeps << ',' << format_value(r.final_off) << ',' << r.dropped_points << ',' << (r.flagged ? 1 : 0)
        << ',' << r.status << ',' << csv_escape(r.message) << '\n';
  }
  return out.str();
}

std::string summary_csv(const ExperimentResult& result) {
  std::ostringstream out;
  out << "method,delta,N,median_err1,median_err1_view2,ok,failed\n";
  for (const SummaryRow& r : result.summary) {
    out << r.method << ',' << (uses_delta(r.method) ? format_value(r.delta) : "") << ',' << r.N << ','
        << format_value(r.median_err1) << ',' << format_value(r.median_err1_view2) << ',' << r.ok << ',' << r.failed
        << '\n';
  }
  return out.str();
}

void write_experiment(const std::string& dir, const ExperimentResult& result) {
  ensure_directory(dir);
  write_text((std::filesystem::path(dir) / "results.csv").string(), records_csv(result));
  write_text((std::filesystem::path(dir) / "summary.csv").string(), summary_csv(result));
}

}  // namespace mmcca
