// Acceptance suite: end-to-end checks of the estimator stack, the analytic
// bounds and the harness determinism at desk scale, plus the exact
// complexity-model pins. Each criterion prints one PASS/FAIL line; the
// process exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "doa/doa.hpp"
#include "support/oracles.hpp"

using namespace doa;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream notes;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      notes << "    FAILED: " << what << "\n";
    }
  }
  void note(const std::string& what) { notes << "    note: " << what << "\n"; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Noiseless exactness: all four estimators recover 50 random angles in
//    (-60, 60) degrees within 1e-5 degrees at N=64, K=4, N0=16, L=1.
Outcome criterion_noiseless_exactness() {
  Outcome out;
  const ArrayConfig cfg = ArrayConfig::make(64, 4, 16);
  SplitMix64 rng(20240501);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const double theta_deg = testsupport::uniform_in(rng, -60.0, 60.0);
    const SnapshotMatrix snap =
        synthesize(cfg, deg2rad(theta_deg), 10.0, 1, 9000 + trial, /*noiseless=*/true);
    const double errs[] = {
        std::abs(rad2deg(estimate_full_root_music(snap).theta) - theta_deg),
        std::abs(rad2deg(estimate_psac(snap).theta) - theta_deg),
        std::abs(rad2deg(estimate_pscc(snap).theta) - theta_deg),
        std::abs(rad2deg(estimate_pi_max_csca(snap).theta) - theta_deg)};
    for (double e : errs) worst = std::max(worst, e);
  }
  out.require(worst < 1e-5, "worst-case noiseless error " + fmt(worst) + " deg >= 1e-5 deg");
  out.note("worst noiseless error over 200 runs: " + fmt(worst) + " deg");
  return out;
}

// ---------------------------------------------------------------------------
// 2. Oracle equivalence: Root-MUSIC agrees with a 0.001-degree grid search of
//    the MUSIC pseudospectrum within 0.002 degrees (M=16, SNR 10 dB, L=1).
Outcome criterion_grid_oracle() {
  Outcome out;
  const ArrayConfig cfg = ArrayConfig::make(16, 1, 16);
  SplitMix64 rng(777);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double theta_deg = testsupport::uniform_in(rng, -60.0, 60.0);
    const SnapshotMatrix snap =
        synthesize(cfg, deg2rad(theta_deg), 10.0, 1, derive_seed(555, 0, trial));
    const HermitianMatrix r = sample_covariance(snap);
    const double est = rad2deg(root_music(r, 1, cfg)[0]);
    const double grid =
        testsupport::grid_music_argmax_deg(noise_subspace(r, 1), cfg, 0.001);
    worst = std::max(worst, std::abs(est - grid));
  }
  out.require(worst < 0.002, "worst root-vs-grid gap " + fmt(worst) + " deg >= 0.002 deg");
  out.note("worst root-vs-grid gap over 100 trials: " + fmt(worst) + " deg");
  return out;
}

// ---------------------------------------------------------------------------
// 3. Derivative checks: analytic J' and J'' match central finite differences
//    within relative 1e-5 and 1e-3 over 100 random (theta, Vs) pairs, N=64.
Outcome criterion_derivatives() {
  Outcome out;
  const ArrayConfig cfg = ArrayConfig::make(64, 1, 64);
  SplitMix64 rng(246810);
  double worst1 = 0.0, worst2 = 0.0;
  // Richardson-extrapolated central differences push the oracle's own
  // truncation error orders of magnitude below the asserted tolerances, so
  // the comparison measures the implementation rather than the step size;
  // floors at 1e-6 of the natural scale guard exact zero crossings.
  const double kp = 2.0 * kPi * cfg.position(63);
  const auto d1 = [&](double theta, const Eigen::VectorXcd& vs, double h) {
    return (objective_J(theta + h, vs, cfg) - objective_J(theta - h, vs, cfg)) / (2.0 * h);
  };
  const auto d2 = [&](double theta, const Eigen::VectorXcd& vs, double h) {
    return (objective_J(theta + h, vs, cfg) - 2.0 * objective_J(theta, vs, cfg) +
            objective_J(theta - h, vs, cfg)) /
           (h * h);
  };
  for (int trial = 0; trial < 100; ++trial) {
    const double theta = testsupport::uniform_in(rng, deg2rad(-75.0), deg2rad(75.0));
    Eigen::VectorXcd vs = testsupport::random_complex(64, 1, 40000 + trial).col(0);
    vs.normalize();
    const ScaDerivatives d = sca_derivatives(theta, vs, cfg);
    const double h1 = 1e-5, h2 = 1e-4;
    const double g1 = (4.0 * d1(theta, vs, h1 / 2.0) - d1(theta, vs, h1)) / 3.0;
    const double g2 = (4.0 * d2(theta, vs, h2 / 2.0) - d2(theta, vs, h2)) / 3.0;
    const double floor1 = 1e-6 * kp * (d.j + 1.0);
    const double floor2 = 1e-6 * kp * kp * (d.j + 1.0);
    worst1 = std::max(worst1, std::abs(d.j1 - g1) /
                                  std::max({std::abs(g1), std::abs(d.j1), floor1}));
    worst2 = std::max(worst2, std::abs(d.j2 - g2) /
                                  std::max({std::abs(g2), std::abs(d.j2), floor2}));
  }
  out.require(worst1 < 1e-5, "J' relative error " + fmt(worst1) + " >= 1e-5");
  out.require(worst2 < 1e-3, "J'' relative error " + fmt(worst2) + " >= 1e-3");
  out.note("worst relative errors: J' " + fmt(worst1) + ", J'' " + fmt(worst2));
  return out;
}

// ---------------------------------------------------------------------------
// 4. Desk-scale RMSE-vs-SNR sweep: N=128, K=4, M=N0=32, L=1, theta=10 deg,
//    500 trials per SNR in {-10..20 step 5}. PSCC and PI-Max-CSCA stay within
//    3 dB of the full-array bound at SNR >= 10 dB; the PSAC sample variance
//    stays within a factor 2 of its combined bound there; summary RMSE
//    decreases with SNR for all three methods.
Outcome criterion_desk_sweep() {
  Outcome out;
  ExperimentSpec spec;
  spec.array = ArrayConfig::make(128, 4, 32);
  spec.theta_deg = 10.0;
  spec.snr_grid_db = {-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0};
  spec.trials = 500;
  spec.l_snapshots = 1;
  spec.methods = {Method::Psac, Method::Pscc, Method::PiMaxCsca};
  spec.master_seed = 20240817;

  const unsigned hw = std::thread::hardware_concurrency();
  const int workers = static_cast<int>(std::max(2u, std::min(8u, hw ? hw : 2u)));
  const SweepResult res = run_sweep(spec, workers);

  const double truth = deg2rad(spec.theta_deg);
  for (const Method m : spec.methods) {
    std::vector<double> curve;
    for (const SummaryRow& row : res.summary) {
      if (row.method != m) continue;
      curve.push_back(row.rmse_deg);
      out.require(row.failures == 0, std::string(method_name(m)) + ": trial failures present");

      if (row.snr_db >= 10.0) {
        if (m == Method::Pscc || m == Method::PiMaxCsca) {
          const double gap_db = 20.0 * std::log10(row.rmse_deg / row.crlb_deg);
          out.require(gap_db <= 3.0, std::string(method_name(m)) + " at " + fmt(row.snr_db) +
                                         " dB: " + fmt(gap_db) + " dB above full-array bound");
          out.note(std::string(method_name(m)) + " snr " + fmt(row.snr_db) + " dB: rmse " +
                   fmt(row.rmse_deg) + " deg, bound gap " + fmt(gap_db, 3) + " dB");
        }
        if (m == Method::Psac) {
          std::vector<double> thetas;
          for (const TrialRecord& rec : res.trials)
            if (rec.method == m && rec.snr_db == row.snr_db && !rec.failed)
              thetas.push_back(deg2rad(rec.estimate_deg));
          double mean = 0.0;
          for (double t : thetas) mean += t;
          mean /= static_cast<double>(thetas.size());
          double var = 0.0;
          for (double t : thetas) var += (t - mean) * (t - mean);
          var /= static_cast<double>(thetas.size());
          CrlbInputs in;
          in.m_elements = spec.array.m_per_subarray;
          in.k_combined = spec.array.k_subarrays;
          in.l_snapshots = 1;
          in.snr_linear = std::pow(10.0, row.snr_db / 10.0);
          in.theta = truth;
          const double predicted = crlb_psac(in);
          const double ratio = var / predicted;
          out.require(ratio > 0.5 && ratio < 2.0,
                      "psac variance ratio vs prediction at " + fmt(row.snr_db) +
                          " dB: " + fmt(ratio));
          out.note("psac snr " + fmt(row.snr_db) + " dB: variance ratio vs prediction " +
                   fmt(ratio, 3));
        }
      }
    }
    for (std::size_t i = 1; i < curve.size(); ++i)
      out.require(curve[i] < curve[i - 1],
                  std::string(method_name(m)) + ": rmse curve not decreasing at point " +
                      std::to_string(i));
  }
  return out;
}

// ---------------------------------------------------------------------------
// 5. SCA iteration budget: at N=1024, M=N0=256, L=1 the refinement terminates
//    within 10 iterations at SNR in {-20, 0, 20} dB; same bound at the desk
//    scale N=256, N0=64.
Outcome criterion_sca_iterations() {
  Outcome out;
  const struct {
    ArrayConfig cfg;
    const char* label;
  } scales[] = {{ArrayConfig::make(1024, 4, 256), "N=1024/N0=256"},
                {ArrayConfig::make(256, 4, 64), "N=256/N0=64"}};
  for (const auto& scale : scales) {
    for (const double snr_db : {-20.0, 0.0, 20.0}) {
      int worst = 0;
      for (int rep = 0; rep < 2; ++rep) {
        const SnapshotMatrix snap = synthesize(scale.cfg, deg2rad(10.0), snr_db, 1,
                                               derive_seed(31, static_cast<std::uint64_t>(snr_db + 100), rep));
        const DirectionEstimate est = estimate_pi_max_csca(snap);
        worst = std::max(worst, est.iterations_sca.value());
      }
      out.require(worst <= 10, std::string(scale.label) + " at " + fmt(snr_db) +
                                   " dB: " + std::to_string(worst) + " SCA iterations > 10");
      out.note(std::string(scale.label) + " snr " + fmt(snr_db) +
               " dB: max SCA iterations " + std::to_string(worst));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// 6. Complexity models: exact pinned values, the headline-scale ordering, the
//    reduction window at N=1024, and the grid-wide relations that follow from
//    the formulas (the PSAC/PSCC order flips at K=2 and PI-Max-CSCA overtakes
//    PSAC at M=64, N=1024; both flips are pinned so regressions surface).
Outcome criterion_complexity() {
  Outcome out;
  auto eval = [](Method method, int n, int m, int beta) {
    ComplexityModel model;
    model.method = method;
    model.n_total = n;
    model.k_subarrays = n / m;
    model.m_per_subarray = m;
    model.n_init = m;
    model.l_snapshots = 1;
    model.beta_pi = beta;
    return flops(model);
  };

  const double root_paper = eval(Method::RootMusicFull, 1024, 1024, 1);
  const double psac_paper = eval(Method::Psac, 1024, 256, 1);
  const double pscc_paper = eval(Method::Pscc, 1024, 256, 1);
  const double pimax_paper = eval(Method::PiMaxCsca, 1024, 256, 5);
  out.require(root_paper == 1074791424.0, "baseline pin: got " + fmt(root_paper, 12));
  out.require(psac_paper == 67372032.0, "psac pin: got " + fmt(psac_paper, 12));
  out.require(pimax_paper == 23135488.0, "pimax pin: got " + fmt(pimax_paper, 12));
  out.require(pimax_paper < psac_paper && psac_paper < pscc_paper && pscc_paper < root_paper,
              "headline-scale ordering violated");
  out.note("pins: baseline 1.074791424e9, psac 6.7372032e7, pscc " + fmt(pscc_paper, 10) +
           ", pimax 2.3135488e7");

  for (const int m : {64, 128}) {
    for (int n = 32; n <= 1024; n *= 2) {
      if (n < 2 * m || n % m != 0) continue;  // partitioned methods need K >= 2
      const int k = n / m;
      const double root = eval(Method::RootMusicFull, n, n, 1);
      const double psac = eval(Method::Psac, n, m, 1);
      const double pscc = eval(Method::Pscc, n, m, 1);
      const double pimax = eval(Method::PiMaxCsca, n, m, 5);
      const std::string at = "M=" + std::to_string(m) + ", N=" + std::to_string(n);
      out.require(psac < root, "psac >= baseline at " + at);
      out.require(pscc < root, "pscc >= baseline at " + at);
      out.require(pimax < root, "pimax >= baseline at " + at);
      out.require(pimax < pscc, "pimax >= pscc at " + at);
      if (k >= 3)
        out.require(psac < pscc, "psac >= pscc at " + at);
      else
        out.require(pscc < psac, "K=2 flip no longer holds at " + at);
      if (m == 64 && n == 1024)
        out.require(pimax > psac, "M=64/N=1024 flip no longer holds");
      else
        out.require(pimax < psac, "pimax >= psac at " + at);
      if (n == 1024) {
        for (const double proposed : {psac, pscc, pimax}) {
          const double ratio = proposed / root;
          out.require(ratio < 1e-1 && ratio > 1e-3,
                      "reduction ratio " + fmt(ratio) + " outside (1e-3, 1e-1) at " + at);
        }
      }
    }
  }
  out.note("as printed, the models order pscc < psac at K=2 and pimax > psac at "
           "M=64/N=1024; the sweep pins both");
  return out;
}

// ---------------------------------------------------------------------------
// 7. Determinism: the same sweep run twice under 1 worker and under 8 workers
//    produces byte-identical trial and summary CSVs.
Outcome criterion_determinism() {
  Outcome out;
  ExperimentSpec spec;
  spec.array = ArrayConfig::make(64, 4, 16);
  spec.theta_deg = 12.0;
  spec.snr_grid_db = {0.0, 10.0};
  spec.trials = 25;
  spec.l_snapshots = 1;
  spec.methods = {Method::RootMusicFull, Method::Psac, Method::Pscc, Method::PiMaxCsca};
  spec.master_seed = 424242;

  const SweepResult first_1 = run_sweep(spec, 1);
  const SweepResult second_1 = run_sweep(spec, 1);
  const SweepResult first_8 = run_sweep(spec, 8);
  const SweepResult second_8 = run_sweep(spec, 8);
  const std::string t = trials_csv(first_1);
  const std::string s = summary_csv(first_1);
  out.require(t == trials_csv(second_1), "trial CSV differs across runs (1 worker)");
  out.require(t == trials_csv(first_8), "trial CSV differs between 1 and 8 workers");
  out.require(t == trials_csv(second_8), "trial CSV differs across runs (8 workers)");
  out.require(s == summary_csv(second_1), "summary CSV differs across runs (1 worker)");
  out.require(s == summary_csv(first_8), "summary CSV differs between 1 and 8 workers");
  out.require(s == summary_csv(second_8), "summary CSV differs across runs (8 workers)");
  out.note("trial CSV bytes: " + std::to_string(t.size()));
  return out;
}

// ---------------------------------------------------------------------------
// 8. Candidate structure at M=4, offset 1, theta=10 deg, noiseless: the set
//    equals the hand enumeration arcsin(sin 10 deg + j/2), j = -2..1, within
//    0.01 degrees.
Outcome criterion_candidates() {
  Outcome out;
  const ArrayConfig cfg = ArrayConfig::make(8, 2, 4);
  const SnapshotMatrix snap = synthesize(cfg, deg2rad(10.0), 10.0, 1, 3, /*noiseless=*/true);
  const cplx z = pscc_phase(snap.subarray(0), snap.subarray(1));
  const std::vector<double> cands = pscc_candidates(z, 1, cfg);
  out.require(cands.size() == 4, "expected 4 candidates, got " + std::to_string(cands.size()));
  const double s10 = std::sin(deg2rad(10.0));
  // u_j = sin(theta) + j * lambda / (2 i M d) = sin(10 deg) + j/2
  const double expected[] = {std::asin(s10 - 1.0), std::asin(s10 - 0.5), std::asin(s10),
                             std::asin(s10 + 0.5)};
  std::ostringstream list;
  for (std::size_t i = 0; i < cands.size() && i < 4; ++i) {
    const double got = rad2deg(cands[i]);
    const double want = rad2deg(expected[i]);
    out.require(std::abs(got - want) < 0.01,
                "candidate " + std::to_string(i) + ": " + fmt(got, 6) + " vs " + fmt(want, 6));
    list << (i ? ", " : "") << fmt(got, 6);
  }
  out.note("candidates (deg): " + list.str());
  return out;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const Entry entries[] = {
      {1, "noiseless exactness of all four estimators", 10.0, criterion_noiseless_exactness},
      {2, "root-music vs grid pseudospectrum oracle", 30.0, criterion_grid_oracle},
      {3, "analytic derivatives vs finite differences", 60.0, criterion_derivatives},
      {4, "desk-scale RMSE sweep against the bounds", 300.0, criterion_desk_sweep},
      {5, "SCA iteration budget at paper and desk scale", 60.0, criterion_sca_iterations},
      {6, "complexity model pins, ordering and reduction", 1.0, criterion_complexity},
      {7, "byte-identical CSVs across runs and workers", 120.0, criterion_determinism},
      {8, "PSCC candidate set vs hand enumeration", 10.0, criterion_candidates},
  };

  int failures = 0;
  for (const Entry& entry : entries) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out = entry.run();
    const double elapsed = seconds_since(t0);
    if (elapsed >= entry.budget_seconds) {
      out.pass = false;
      out.notes << "    FAILED: runtime " << fmt(elapsed, 3) << " s exceeds "
                << fmt(entry.budget_seconds, 3) << " s budget\n";
    }
    std::printf("[%s] criterion %d: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", entry.id,
                entry.label, elapsed);
    std::fputs(out.notes.str().c_str(), stdout);
    if (!out.pass) ++failures;
  }
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
