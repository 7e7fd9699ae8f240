// SPDX-License-Identifier: Apache-2.0
//
// Acceptance run: one PASS/FAIL line per criterion. Hard criteria set the
// exit status; lines tagged "soft" are reported but never fail the run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dpst/channel_model.hpp"
#include "dpst/linalg.hpp"
#include "dpst/pulse_shaping.hpp"
#include "dpst/system_sim.hpp"
#include "dpst/transceiver.hpp"

namespace {

namespace fs = std::filesystem;
using dpst::ComplexMatrix;
using dpst::sim::ScenarioConfig;
using dpst::sim::SimMode;

// Tolerances.
constexpr double kRayleigh2x2 = 4.45;
constexpr double kRayleigh4x4 = 9.35;
constexpr double kRayleighRelTol = 0.10;
constexpr double kOptimumAbsTol = 1e-6;
constexpr double kRuntimeLimitS = 60.0;
constexpr double kDpstCondLimit = 2.0;
constexpr double kDpst2x2 = 1.31;
constexpr double kDpst4x4 = 1.42;
constexpr double kDpstRelTol = 0.20;
constexpr double kRatioRelTol = 0.15;
constexpr double kRatioCorr2x2 = 1.93;
constexpr double kRatioCorr4x4 = 3.76;
constexpr double kRatioOpt2x2 = 1.03;
constexpr double kRatioOpt4x4 = 1.13;
constexpr double kRatioOptRelTol = 0.10;
constexpr double kSinrDeltaTolDb = 2.0;
constexpr double kCollapseTol = 1e-6;
constexpr double kOffDiagFloor = 1e-3;
constexpr double kCapacityTol = 1e-9;
constexpr double kSvApproxTol = 0.05;
constexpr double kMmseTol = 1e-6;
constexpr std::size_t kDrops = 10000;

int g_hard_failures = 0;

void report(const std::string &id, bool pass, const std::string &detail, bool soft = false) {
  std::printf("%s %s%s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), soft ? " (soft)" : "", detail.c_str());
  std::fflush(stdout);
  if (!pass && !soft) ++g_hard_failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

bool within_rel(double v, double ref, double tol) { return std::abs(v - ref) <= tol * ref; }

std::size_t threads() { return std::max(1u, std::thread::hardware_concurrency()); }

ScenarioConfig scenario(std::size_t mimo, double isd = 50.0) {
  ScenarioConfig s;
  s.mimo = mimo;
  s.isd_m = isd;
  s.n_drops = kDrops;
  s.master_seed = 1;
  return s;
}

std::map<std::size_t, std::vector<double>> g_delays;

const std::vector<double> &delays_for(std::size_t mimo) {
  auto it = g_delays.find(mimo);
  if (it == g_delays.end()) it = g_delays.emplace(mimo, dpst::sim::resolve_delays(scenario(mimo), threads())).first;
  return it->second;
}

std::string join(const std::vector<double> &v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ", ") + fmt("%.4f", x);
  return "{" + s + "}";
}

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r2 = dpst::sim::channel_statistics(scenario(2), SimMode::Rayleigh, {}, threads());
  const auto r4 = dpst::sim::channel_statistics(scenario(4), SimMode::Rayleigh, {}, threads());
  const auto o2 = dpst::sim::channel_statistics(scenario(2), SimMode::Optimum, {}, threads());
  const auto o4 = dpst::sim::channel_statistics(scenario(4), SimMode::Optimum, {}, threads());
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok2 = within_rel(r2.mean_condition, kRayleigh2x2, kRayleighRelTol);
  const bool ok4 = within_rel(r4.mean_condition, kRayleigh4x4, kRayleighRelTol);
  const bool oko = std::abs(o2.mean_condition - 1.0) <= kOptimumAbsTol && std::abs(o4.mean_condition - 1.0) <= kOptimumAbsTol;
  report("1a rayleigh 2x2 condition", ok2, fmt("%.4f vs %.2f +/- 10%%", r2.mean_condition, kRayleigh2x2));
  report("1b rayleigh 4x4 condition", ok4, fmt("%.4f vs %.2f +/- 10%%", r4.mean_condition, kRayleigh4x4));
  report("1c optimum condition", oko, fmt("2x2 %.9f, 4x4 %.9f vs 1 +/- 1e-6", o2.mean_condition, o4.mean_condition));
  report("1d runtime", secs < kRuntimeLimitS, fmt("%.1f s for 4 x %zu draws (limit %.0f s)", secs, kDrops, kRuntimeLimitS));
}

void criterion2() {
  for (std::size_t mimo : {2u, 4u}) {
    const auto &d = delays_for(mimo);
    const auto s = scenario(mimo);
    const auto dp = dpst::sim::channel_statistics(s, SimMode::Dpst, d, threads());
    const std::vector<double> zeros(mimo, 0.0);
    const auto base = dpst::sim::channel_statistics(s, SimMode::Dpst, zeros, threads());
    const std::string tag = mimo == 2 ? "2x2" : "4x4";
    report("2 dpst " + tag + " conditioning", dp.mean_condition < kDpstCondLimit && dp.mean_condition < base.mean_condition,
           fmt("mean cond %.4f (limit %.1f, tau=0 baseline %.4f), delays %s", dp.mean_condition, kDpstCondLimit,
               base.mean_condition, join(d).c_str()));
    const double paper = mimo == 2 ? kDpst2x2 : kDpst4x4;
    report("2 dpst " + tag + " vs reference value", within_rel(dp.mean_condition, paper, kDpstRelTol),
           fmt("%.4f vs %.2f +/- 20%%", dp.mean_condition, paper), true);
  }
}

struct Medians {
  double throughput = 0.0;
  double sinr_db = 0.0;
};

std::map<std::tuple<std::size_t, double, SimMode>, Medians> g_medians;

Medians medians(std::size_t mimo, double isd, SimMode mode) {
  const auto key = std::make_tuple(mimo, isd, mode);
  if (auto it = g_medians.find(key); it != g_medians.end()) return it->second;
  auto s = scenario(mimo, isd);
  s.mode = mode;
  if (mode == SimMode::Dpst) s.delays = delays_for(mimo);
  const auto r = dpst::sim::run_scenario(s, threads());
  const Medians m{r.cdfs.at("throughput").percentile(50), r.cdfs.at("sinr").percentile(50)};
  g_medians[key] = m;
  return m;
}

void criterion3() {
  for (std::size_t mimo : {2u, 4u}) {
    const auto corr = medians(mimo, 50.0, SimMode::Correlated);
    const auto dp = medians(mimo, 50.0, SimMode::Dpst);
    const auto opt = medians(mimo, 50.0, SimMode::Optimum);
    const double r_corr = dp.throughput / corr.throughput;
    const double r_opt = opt.throughput / dp.throughput;
    const double ref_corr = mimo == 2 ? kRatioCorr2x2 : kRatioCorr4x4;
    const double ref_opt = mimo == 2 ? kRatioOpt2x2 : kRatioOpt4x4;
    const std::string tag = mimo == 2 ? "2x2" : "4x4";
    report("3 throughput dpst/correlated " + tag, within_rel(r_corr, ref_corr, kRatioRelTol),
           fmt("%.3f vs %.2f +/- 15%% (medians %.3g / %.3g bit/s)", r_corr, ref_corr, dp.throughput, corr.throughput));
    report("3 throughput optimum/dpst " + tag, within_rel(r_opt, ref_opt, kRatioOptRelTol),
           fmt("%.3f vs %.2f +/- 10%% (optimum median %.3g bit/s)", r_opt, ref_opt, opt.throughput));
  }
}

void criterion4() {
  const double isds[] = {20.0, 50.0, 100.0};
  const double ref[2][3] = {{6.7, 10.2, 13.6}, {9.6, 12.6, 14.8}};
  for (std::size_t k = 0; k < 2; ++k) {
    const std::size_t mimo = k == 0 ? 2 : 4;
    const std::string tag = mimo == 2 ? "2x2" : "4x4";
    double gain[3];
    bool strict = true;
    std::string detail;
    for (std::size_t i = 0; i < 3; ++i) {
      gain[i] = medians(mimo, isds[i], SimMode::Dpst).sinr_db - medians(mimo, isds[i], SimMode::Correlated).sinr_db;
      strict = strict && std::abs(gain[i] - ref[k][i]) <= kSinrDeltaTolDb;
      detail += fmt("%sISD %.0f: %+.2f dB (ref %.1f)", i ? ", " : "", isds[i], gain[i], ref[k][i]);
    }
    report("4 sinr gain " + tag + " within 2 dB", strict, detail, true);
    const bool qualitative = gain[0] > 0.0 && gain[0] < gain[1] && gain[1] < gain[2];
    report("4 sinr gain " + tag + " positive and increasing with ISD", strict || qualitative,
           fmt("%+.2f < %+.2f < %+.2f dB", gain[0], gain[1], gain[2]));
  }
}

void criterion5() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    dpst::channel::ChannelParams p;
    p.n_tx = p.n_rx = i % 2 == 0 ? 2 : 4;
    dpst::Rng rng(5, i);
    const auto h = dpst::channel::assemble_channel(p, rng).h;
    const double k = dpst::condition_number(h);
    const double kn = dpst::condition_number(dpst::shaping::virtual_channel(h, {}).h_n);
    worst = std::max(worst, std::abs(kn - k) / k);
  }
  report("5 collapse at zero delay", worst < kCollapseTol, fmt("max relative deviation %.3g (limit 1e-6)", worst));
}

void criterion6() {
  bool identity = true;
  for (std::size_t m : {1u, 2u, 5u, 10u, 32u})
    identity = identity && dpst::shaping::tx_interpolation_matrix(m, m, 0.0, 1.0) == ComplexMatrix::identity(m);
  double weakest = std::numeric_limits<double>::infinity();
  for (int g = 1; g < 100; ++g) {
    const double tau = g / 100.0;
    const auto i = dpst::shaping::tx_interpolation_matrix(10, 20, tau, 1.0);
    const auto gram = i.transpose() * i;
    double worst = 0.0;
    for (std::size_t a = 0; a < gram.rows(); ++a)
      for (std::size_t b = 0; b < gram.cols(); ++b)
        if (a != b) worst = std::max(worst, std::abs(gram(a, b)));
    weakest = std::min(weakest, worst);
  }
  report("6 zero-ISI and fractional-delay overlap", identity && weakest > kOffDiagFloor,
         fmt("I(0) identity: %s, smallest max off-diagonal over tau in (0,1): %.4g", identity ? "yes" : "no", weakest));
}

void criterion7() {
  dpst::Rng rng(7, 0);
  double cap_dev = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 2 + static_cast<std::size_t>(i % 3);
    ComplexMatrix h(n, n);
    for (auto &z : h.entries()) z = rng.complex_normal();
    const double snr = std::pow(10.0, rng.uniform(-1.0, 3.0));
    cap_dev = std::max(cap_dev, std::abs(dpst::channel::capacity(h, snr) - dpst::channel::capacity_logdet(h, snr)));
  }

  const dpst::channel::ChannelGenerator gen(2, 2, 0.5, 0.5);
  double sv_dev = 0.0;
  std::size_t sv_checked = 0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    dpst::Rng r(71, i);
    const auto h = gen.draw(10.0, dpst::channel::ChannelMode::Correlated, r).h;
    if (dpst::condition_number(h) <= 10.0) continue;
    const auto [l1, l2] = dpst::channel::sv_approx_2x2(h);
    Eigen::Matrix2cd m;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a, b) = h(a, b);
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(m * m.adjoint());
    sv_dev = std::max({sv_dev, std::abs(l1 - es.eigenvalues()(1)) / es.eigenvalues()(1),
                       std::abs(l2 - es.eigenvalues()(0)) / es.eigenvalues()(0)});
    ++sv_checked;
  }

  bool corr_ok = true;
  for (std::size_t n : {1u, 2u, 4u, 8u})
    for (double s : {0.1, 0.5, 1.0}) {
      dpst::channel::ChannelParams p;
      p.n_tx = p.n_rx = n;
      p.tx_spacing_wl = p.rx_spacing_wl = s;
      const auto c = dpst::channel::build_correlation_matrices(p);
      for (const auto *r : {&c.r_tx, &c.r_rx}) {
        corr_ok = corr_ok && dpst::hermitian_defect(*r) == 0.0 && dpst::hermitian_eigenvalues(*r).front() >= -1e-10;
        for (std::size_t i = 0; i < n; ++i) corr_ok = corr_ok && (*r)(i, i) == dpst::cplx(1.0);
      }
    }

  const ComplexMatrix zero(2, 2);
  const double mmse_unit =
      dpst::max_abs_diff(dpst::link::mmse_filter(ComplexMatrix::identity(2), zero, 1.0), 0.5 * ComplexMatrix::identity(2));
  const double mmse_pinv = dpst::max_abs_diff(dpst::link::mmse_filter(ComplexMatrix{{2, 0}, {0, 1}}, zero, 1e-9),
                                              ComplexMatrix{{0.5, 0}, {0, 1}});

  report("7a capacity sum vs determinant", cap_dev <= kCapacityTol, fmt("max deviation %.3g over 1000 draws", cap_dev));
  report("7b 2x2 eigenvalue approximation", sv_checked > 0 && sv_dev < kSvApproxTol,
         fmt("max relative error %.4f over %zu draws with condition > 10", sv_dev, sv_checked));
  report("7c correlation matrices", corr_ok, "Hermitian, PSD, unit diagonal");
  report("7d mmse limits", mmse_unit <= kMmseTol && mmse_pinv <= kMmseTol,
         fmt("unit-noise deviation %.3g, zero-noise deviation %.3g", mmse_unit, mmse_pinv));
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion8() {
#ifdef DPST_SIM_BINARY
  const fs::path dir = fs::temp_directory_path() / "dpst_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream(dir / "c2.ini") << "[scenario]\nn_drops = 500\n[search]\nensemble_size = 50\n";
    std::ofstream(dir / "c4.ini")
        << "[scenario]\nn_drops = 200\nmimo = 4\n[search]\nensemble_size = 20\nevaluation_budget = 3000\n";
  }
  bool same = true;
  std::size_t files = 0;
  for (const char *cfg : {"c2.ini", "c4.ini"}) {
    for (const char *cmd : {"simulate --mode all", "optimize-delay"}) {
      for (int t : {1, 3}) {
        const auto out = dir / (std::string(cfg) + cmd[0] + std::to_string(t));
        const std::string line = std::string(DPST_SIM_BINARY) + " " + cmd + " --config " + (dir / cfg).string() +
                                 " --threads " + std::to_string(t) + " --out-dir " + out.string() + " > /dev/null";
        if (std::system(line.c_str()) != 0) same = false;
      }
      const auto a = dir / (std::string(cfg) + cmd[0] + "1");
      const auto b = dir / (std::string(cfg) + cmd[0] + "3");
      for (const auto &entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".csv") continue;
        ++files;
        same = same && slurp(entry.path()) == slurp(b / entry.path().filename());
      }
    }
  }
  fs::remove_all(dir);
  report("8 determinism across --threads", same && files > 0, fmt("%zu CSV files compared for 1 vs 3 threads", files));
#else
  report("8 determinism across --threads", false, "binary path not configured");
#endif
}

}  // namespace

int main() {
  std::printf("threads: %zu\n", threads());
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%d hard criterion line(s) failed\n", g_hard_failures);
  return g_hard_failures == 0 ? 0 : 1;
}
