#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doa/analytics.hpp"
#include "doa/array_model.hpp"
#include "doa/estimators.hpp"
#include "doa/rng.hpp"

namespace doa {

/// Declarative Monte-Carlo sweep: one emitter angle, an SNR grid, a trial
/// count and the set of methods to run on shared snapshot realizations.
struct ExperimentSpec {
  ArrayConfig array;
  double theta_deg = 0.0;
  std::vector<double> snr_grid_db;
  int trials = 1;
  int l_snapshots = 1;
  std::vector<Method> methods;
  std::uint64_t master_seed = 0;
  ScaSettings sca;
  bool noiseless = false;
  bool timing = false;  // off by default so CSV bytes are reproducible

  void validate() const {
    if (trials < 1) throw std::invalid_argument("ExperimentSpec: trials must be >= 1");
    if (snr_grid_db.empty()) throw std::invalid_argument("ExperimentSpec: snr grid is empty");
    if (methods.empty()) throw std::invalid_argument("ExperimentSpec: no methods requested");
    if (l_snapshots < 1) throw std::invalid_argument("ExperimentSpec: l_snapshots must be >= 1");
    sca.validate();
  }
};

struct TrialRecord {
  Method method = Method::RootMusicFull;
  double snr_db = 0.0;
  int trial_index = 0;
  double estimate_deg = 0.0;  // NaN when the estimator failed
  double error_deg = 0.0;
  std::optional<int> iterations_pi;
  std::optional<int> iterations_sca;
  double elapsed_seconds = 0.0;
  bool failed = false;
};

struct SummaryRow {
  Method method = Method::RootMusicFull;
  double snr_db = 0.0;
  int trials = 0;
  double rmse_deg = 0.0;  // over successful trials; NaN if none
  double crlb_deg = 0.0;
  int failures = 0;
};

struct SweepResult {
  ExperimentSpec spec;
  std::vector<TrialRecord> trials;    // snr-major, then trial, then method order
  std::vector<SummaryRow> summary;    // method-major, then snr order
};

namespace detail {

inline DirectionEstimate run_method(Method method, const SnapshotMatrix& snap,
                                    const ScaSettings& sca) {
  switch (method) {
    case Method::RootMusicFull: return estimate_full_root_music(snap);
    case Method::Psac: return estimate_psac(snap);
    case Method::Pscc: return estimate_pscc(snap);
    case Method::PiMaxCsca: return estimate_pi_max_csca(snap, sca);
  }
  throw std::invalid_argument("run_method: unknown method");
}

inline std::string fmt_g(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline std::string fmt_seconds(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string fmt_opt_int(const std::optional<int>& v) {
  return v ? std::to_string(*v) : std::string{};
}

/// The bound each method is benchmarked against: PSAC gets the K-fold
/// combined subarray bound; the others are held to the full-array bound.
inline double reference_crlb_deg(Method method, const ExperimentSpec& spec, double snr_db) {
  CrlbInputs in;
  in.l_snapshots = spec.l_snapshots;
  in.snr_linear = std::pow(10.0, snr_db / 10.0);
  in.theta = deg2rad(spec.theta_deg);
  in.spacing = spec.array.spacing;
  in.wavelength = spec.array.wavelength;
  if (method == Method::Psac) {
    in.m_elements = spec.array.m_per_subarray;
    in.k_combined = spec.array.k_subarrays;
  } else {
    in.m_elements = spec.array.n_total;
    in.k_combined = 1;
  }
  return rad2deg(std::sqrt(crlb_psac(in)));
}

}  // namespace detail

/// Runs every requested method on identical per-trial snapshots, seeded by a
/// stable mix of (master_seed, snr_index, trial_index). The record layout is
/// fixed up front, so results are byte-identical for any worker count.
inline SweepResult run_sweep(const ExperimentSpec& spec, int workers = 1) {
  spec.validate();
  if (workers < 1) workers = 1;
  const int n_snr = static_cast<int>(spec.snr_grid_db.size());
  const int n_methods = static_cast<int>(spec.methods.size());
  const double theta = deg2rad(spec.theta_deg);

  SweepResult result;
  result.spec = spec;
  result.trials.resize(static_cast<std::size_t>(n_snr) * spec.trials * n_methods);

  std::atomic<int> next_job{0};
  const int total_jobs = n_snr * spec.trials;
  auto work = [&]() {
    for (;;) {
      const int job = next_job.fetch_add(1);
      if (job >= total_jobs) return;
      const int snr_i = job / spec.trials;
      const int trial_i = job % spec.trials;
      const double snr_db = spec.snr_grid_db[snr_i];
      const std::uint64_t seed = derive_seed(spec.master_seed, snr_i, trial_i);
      const SnapshotMatrix snap = synthesize(spec.array, theta, snr_db, spec.l_snapshots,
                                             seed, spec.noiseless);
      for (int m = 0; m < n_methods; ++m) {
        TrialRecord rec;
        rec.method = spec.methods[m];
        rec.snr_db = snr_db;
        rec.trial_index = trial_i;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          const DirectionEstimate est = detail::run_method(rec.method, snap, spec.sca);
          rec.estimate_deg = rad2deg(est.theta);
          rec.error_deg = rec.estimate_deg - spec.theta_deg;
          rec.iterations_pi = est.iterations_pi;
          rec.iterations_sca = est.iterations_sca;
        } catch (const std::exception&) {
          rec.failed = true;
          rec.estimate_deg = std::nan("");
          rec.error_deg = std::nan("");
        }
        if (spec.timing) {
          const auto t1 = std::chrono::steady_clock::now();
          rec.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
        }
        result.trials[(static_cast<std::size_t>(job)) * n_methods + m] = rec;
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  // Aggregate method-major so the summary reads as one curve per method.
  for (int m = 0; m < n_methods; ++m) {
    for (int snr_i = 0; snr_i < n_snr; ++snr_i) {
      SummaryRow row;
      row.method = spec.methods[m];
      row.snr_db = spec.snr_grid_db[snr_i];
      row.trials = spec.trials;
      std::vector<double> estimates_rad;
      estimates_rad.reserve(spec.trials);
      for (int t = 0; t < spec.trials; ++t) {
        const TrialRecord& rec =
            result.trials[(static_cast<std::size_t>(snr_i) * spec.trials + t) * n_methods + m];
        if (rec.failed)
          ++row.failures;
        else
          estimates_rad.push_back(deg2rad(rec.estimate_deg));
      }
      row.rmse_deg = estimates_rad.empty()
                         ? std::nan("")
                         : rad2deg(rmse(estimates_rad, theta));
      row.crlb_deg = detail::reference_crlb_deg(row.method, spec, row.snr_db);
      result.summary.push_back(row);
    }
  }
  return result;
}

inline std::string trials_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "method,snr_db,trial_index,estimate_deg,error_deg,iterations_pi,"
         "iterations_sca,elapsed_seconds\n";
  for (const TrialRecord& r : result.trials) {
    out << method_name(r.method) << ',' << detail::fmt_g(r.snr_db) << ',' << r.trial_index
        << ',' << detail::fmt_g(r.estimate_deg) << ',' << detail::fmt_g(r.error_deg) << ','
        << detail::fmt_opt_int(r.iterations_pi) << ',' << detail::fmt_opt_int(r.iterations_sca)
        << ',' << detail::fmt_seconds(r.elapsed_seconds) << '\n';
  }
  return out.str();
}

inline std::string summary_csv(const SweepResult& result) {
  std::ostringstream out;
  out << "method,snr_db,trials,rmse_deg,crlb_deg,failures\n";
  for (const SummaryRow& r : result.summary) {
    out << method_name(r.method) << ',' << detail::fmt_g(r.snr_db) << ',' << r.trials << ','
        << detail::fmt_g(r.rmse_deg) << ',' << detail::fmt_g(r.crlb_deg) << ',' << r.failures
        << '\n';
  }
  return out.str();
}

struct ComplexityRow {
  Method method = Method::RootMusicFull;
  int n_total = 0;
  int m_per_subarray = 0;
  double flops = 0.0;
};

/// Evaluates all four analytic models over an antenna-count grid with fixed
/// subarray size M = N0 = m_fixed and K = N / M. Grid entries that do not
/// admit the partition are skipped with a warning.
inline std::vector<ComplexityRow> run_complexity(const std::vector<int>& n_grid, int m_fixed,
                                                 int l, int beta,
                                                 std::ostream* warnings = nullptr) {
  if (m_fixed < 1) throw std::invalid_argument("run_complexity: m_fixed must be >= 1");
  if (l < 1 || beta < 1) throw std::invalid_argument("run_complexity: l and beta must be >= 1");
  std::vector<ComplexityRow> rows;
  const Method methods[] = {Method::RootMusicFull, Method::Psac, Method::Pscc,
                            Method::PiMaxCsca};
  for (int n : n_grid) {
    if (n < m_fixed || n % m_fixed != 0) {
      if (warnings)
        *warnings << "complexity: skipping N=" << n << " (not divisible by M=" << m_fixed
                  << ")\n";
      continue;
    }
    ComplexityModel model;
    model.n_total = n;
    model.m_per_subarray = m_fixed;
    model.k_subarrays = n / m_fixed;
    model.n_init = m_fixed;
    model.l_snapshots = l;
    model.beta_pi = beta;
    for (Method m : methods) {
      model.method = m;
      rows.push_back({m, n, m_fixed, flops(model)});
    }
  }
  return rows;
}

inline std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::ostringstream out;
  out << "method,n_total,m_per_subarray,flops\n";
  for (const ComplexityRow& r : rows)
    out << method_name(r.method) << ',' << r.n_total << ',' << r.m_per_subarray << ','
        << detail::fmt_g(r.flops) << '\n';
  return out.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> items;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) items.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) items.push_back(cur);
  return items;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: boolean expected for '" + key + "'");
}

}  // namespace detail

/// Flat key = value sweep description; '#' starts a comment. Angles are in
/// degrees at this boundary. Required keys: n_total, k_subarrays, theta_deg,
/// snr_grid_db, trials, l_snapshots, methods, master_seed. Optional: n_init
/// (defaults to the subarray size), spacing, wavelength, sca_epsilon_rel,
/// sca_max_iter, sca_step_clip_deg, noiseless, timing.
inline ExperimentSpec parse_experiment_config(std::istream& in) {
  int n_total = 0, k_subarrays = 0, n_init = -1;
  double spacing = 0.5, wavelength = 1.0;
  ExperimentSpec spec;
  bool saw_theta = false, saw_trials = false, saw_l = false, saw_seed = false;
  double sca_step_clip_deg = -1.0;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (value.empty())
      throw std::invalid_argument("config: empty value for '" + key + "'");

    if (key == "n_total") n_total = std::stoi(value);
    else if (key == "k_subarrays") k_subarrays = std::stoi(value);
    else if (key == "n_init") n_init = std::stoi(value);
    else if (key == "spacing") spacing = std::stod(value);
    else if (key == "wavelength") wavelength = std::stod(value);
    else if (key == "theta_deg") { spec.theta_deg = std::stod(value); saw_theta = true; }
    else if (key == "snr_grid_db") {
      for (const std::string& item : detail::split_list(value))
        spec.snr_grid_db.push_back(std::stod(item));
    }
    else if (key == "trials") { spec.trials = std::stoi(value); saw_trials = true; }
    else if (key == "l_snapshots") { spec.l_snapshots = std::stoi(value); saw_l = true; }
    else if (key == "methods") {
      for (const std::string& item : detail::split_list(value)) {
        const auto m = method_from_name(item);
        if (!m) throw std::invalid_argument("config: unknown method '" + item + "'");
        spec.methods.push_back(*m);
      }
    }
    else if (key == "master_seed") { spec.master_seed = std::stoull(value); saw_seed = true; }
    else if (key == "sca_epsilon_rel") spec.sca.epsilon_rel = std::stod(value);
    else if (key == "sca_max_iter") spec.sca.max_iter = std::stoi(value);
    else if (key == "sca_step_clip_deg") sca_step_clip_deg = std::stod(value);
    else if (key == "noiseless") spec.noiseless = detail::parse_bool(value, key);
    else if (key == "timing") spec.timing = detail::parse_bool(value, key);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
  }

  if (n_total == 0 || k_subarrays == 0)
    throw std::invalid_argument("config: n_total and k_subarrays are required");
  if (!saw_theta || spec.snr_grid_db.empty() || !saw_trials || !saw_l ||
      spec.methods.empty() || !saw_seed)
    throw std::invalid_argument(
        "config: theta_deg, snr_grid_db, trials, l_snapshots, methods and master_seed "
        "are required");
  if (n_init < 0) n_init = n_total / k_subarrays;
  spec.array = ArrayConfig::make(n_total, k_subarrays, n_init, spacing, wavelength);
  if (sca_step_clip_deg > 0.0) spec.sca.step_clip = deg2rad(sca_step_clip_deg);
  spec.validate();
  return spec;
}

}  // namespace doa
