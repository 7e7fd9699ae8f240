// SPDX-License-Identifier: Apache-2.0
#include "dpst/delay_optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>

#include "dpst/error.hpp"
#include "dpst/linalg.hpp"
#include "dpst/parallel.hpp"
#include "dpst/rng.hpp"

namespace dpst::optim {

std::string_view to_string(SearchMetric m) noexcept {
  switch (m) {
    case SearchMetric::CovarianceDiagonalization:
      return "covariance_diagonalization";
    case SearchMetric::ConditionNumber:
      return "condition_number";
  }
  return "unknown";
}

void DelaySearchConfig::validate(double symbol_period) const {
  if (grid_points_per_dim < 2) throw ConfigError("search.grid_points_per_dim", "must be at least 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("search.epsilon", "must lie in (0, 1)");
  if (ensemble_size == 0) throw ConfigError("search.ensemble_size", "must be positive");
  if (evaluation_budget == 0) throw ConfigError("search.evaluation_budget", "must be positive");
  if (!(ensemble_distance_m > 0.0)) throw ConfigError("search.ensemble_distance_m", "must be positive");
  const double mx = effective_max_delay(symbol_period);
  if (!(mx > 0.0) || mx > symbol_period)
    throw ConfigError("search.max_delay", "must lie in (0, symbol_period]");
}

std::vector<double> delay_grid(const DelaySearchConfig &search, double symbol_period) {
  const double mx = search.effective_max_delay(symbol_period);
  const std::size_t g = search.grid_points_per_dim;
  std::vector<double> out(g);
  for (std::size_t i = 0; i < g; ++i)
    out[i] = static_cast<double>(i + 1) * mx / static_cast<double>(g + 1);
  return out;
}

ChannelEnsemble make_ensemble(const EnsembleSpec &spec) {
  if (spec.size == 0) throw std::invalid_argument("make_ensemble: empty ensemble");
  const channel::ChannelGenerator gen(spec.n_tx, spec.n_rx, spec.spacing_wl, spec.spacing_wl);
  ChannelEnsemble out;
  out.channels.reserve(spec.size);
  for (std::size_t i = 0; i < spec.size; ++i) {
    Rng rng(spec.seed, i);
    out.channels.push_back(gen.draw(spec.distance_m, spec.mode, rng).h);
  }
  return out;
}

ComplexMatrix shaped_channel_covariance(const ComplexMatrix &h, std::span<const double> delays,
                                        const shaping::ShapingConfig &cfg) {
  if (h.empty()) throw std::invalid_argument("shaped_channel_covariance: empty channel");
  if (delays.size() != h.cols())
    throw std::invalid_argument("shaped_channel_covariance: " + std::to_string(delays.size()) + " delays for " +
                                std::to_string(h.cols()) + " transmit antennas");
  shaping::ShapingConfig c = cfg;
  c.delays.assign(delays.begin(), delays.end());
  c.validate(h.cols());
  const std::size_t m = c.m_len;
  const std::size_t n = c.n_samples();
  ComplexMatrix h_tx(h.rows() * n, h.cols() * m);
  for (std::size_t u = 0; u < h.cols(); ++u) {
    const ComplexMatrix interp = shaping::tx_interpolation_matrix(m, n, delays[u], c.symbol_period);
    for (std::size_t i = 0; i < h.rows(); ++i) h_tx.set_block(i * n, u * m, h(i, u) * interp);
  }
  return h_tx.adjoint() * h_tx;
}

double diagonalization_objective(const ComplexMatrix &r_x) {
  if (!r_x.is_square() || r_x.empty()) throw std::invalid_argument("diagonalization_objective: expects a square matrix");
  const std::size_t n = r_x.rows();
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = r_x(i, i).real();
    if (!(d > 0.0)) throw std::invalid_argument("diagonalization_objective: non-positive diagonal entry");
    inv_sqrt[i] = 1.0 / std::sqrt(d);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      cplx v = r_x(i, j) * inv_sqrt[i] * inv_sqrt[j];
      if (i == j) v -= 1.0;
      acc += std::norm(v);
    }
  return std::sqrt(acc);
}

double condition_metric(const ComplexMatrix &h, std::span<const double> delays, const shaping::ShapingConfig &cfg) {
  shaping::ShapingConfig c = cfg;
  c.delays.assign(delays.begin(), delays.end());
  return condition_number(shaping::virtual_channel(h, c).h_n);
}

std::vector<double> mean_normalized_singular_values(const ChannelEnsemble &ensemble, std::span<const double> delays,
                                                    const shaping::ShapingConfig &cfg) {
  if (ensemble.channels.empty()) throw std::invalid_argument("mean_normalized_singular_values: empty ensemble");
  shaping::ShapingConfig c = cfg;
  c.delays.assign(delays.begin(), delays.end());
  const shaping::ShapingPlan plan(c, ensemble.n_tx());
  std::vector<double> mean;
  for (const auto &h : ensemble.channels) {
    const auto sigma = singular_values(plan.virtual_channel(h).h_n);
    double ms = 0.0;
    for (double s : sigma) ms += s * s;
    const double rms = std::sqrt(ms / static_cast<double>(sigma.size()));
    if (mean.empty()) mean.assign(sigma.size(), 0.0);
    for (std::size_t i = 0; i < sigma.size(); ++i) mean[i] += sigma[i] / rms;
  }
  for (double &v : mean) v /= static_cast<double>(ensemble.channels.size());
  return mean;
}

DelayEvaluator::DelayEvaluator(const ChannelEnsemble &ensemble, const DelaySearchConfig &search,
                               const shaping::ShapingConfig &cfg)
    : metric_(search.metric), n_tx_(ensemble.n_tx()), n_rx_(ensemble.n_rx()), m_len_(cfg.m_len) {
  if (ensemble.channels.empty()) throw std::invalid_argument("DelayEvaluator: empty ensemble");
  if (n_tx_ < 2) throw std::invalid_argument("DelayEvaluator: needs at least two transmit antennas");
  search.validate(cfg.symbol_period);
  grid_.push_back(0.0);
  for (double tau : delay_grid(search, cfg.symbol_period)) grid_.push_back(tau);
  stride_ = grid_.size();
  pair_table_.assign(stride_ * stride_, 0.0);

  if (metric_ == SearchMetric::ConditionNumber) {
    std::vector<std::vector<double>> pulses;
    pulses.reserve(stride_);
    for (double tau : grid_) pulses.push_back(shaping::received_pulse(cfg, tau));
    for (std::size_t a = 0; a < stride_; ++a)
      for (std::size_t b = 0; b < stride_; ++b) {
        double acc = 0.0;
        for (std::size_t p = 0; p < pulses[a].size(); ++p) acc += pulses[a][p] * pulses[b][p];
        pair_table_[a * stride_ + b] = acc;
      }
    grams_.reserve(ensemble.channels.size());
    for (const auto &h : ensemble.channels) grams_.push_back(h.adjoint() * h);
  } else {
    // Normalized squared mass of the cross block I(a)^T I(b), summed over
    // all symbol pairs.
    const std::size_t n = cfg.n_samples();
    std::vector<ComplexMatrix> interp;
    interp.reserve(stride_);
    for (double tau : grid_) interp.push_back(shaping::tx_interpolation_matrix(cfg.m_len, n, tau, cfg.symbol_period));
    std::vector<ComplexMatrix> cross(stride_ * stride_);
    for (std::size_t a = 0; a < stride_; ++a)
      for (std::size_t b = 0; b < stride_; ++b) cross[a * stride_ + b] = interp[a].transpose() * interp[b];
    for (std::size_t a = 0; a < stride_; ++a)
      for (std::size_t b = 0; b < stride_; ++b) {
        const auto &c = cross[a * stride_ + b];
        const auto &ca = cross[a * stride_ + a];
        const auto &cb = cross[b * stride_ + b];
        double acc = 0.0;
        for (std::size_t i = 0; i < m_len_; ++i)
          for (std::size_t j = 0; j < m_len_; ++j)
            acc += std::norm(c(i, j)) / (ca(i, i).real() * cb(j, j).real());
        pair_table_[a * stride_ + b] = acc;
      }
    coherence_.reserve(ensemble.channels.size());
    for (const auto &h : ensemble.channels) {
      const ComplexMatrix g = h.adjoint() * h;
      std::vector<double> rho(n_tx_ * n_tx_);
      for (std::size_t u = 0; u < n_tx_; ++u)
        for (std::size_t v = 0; v < n_tx_; ++v) {
          const double du = g(u, u).real();
          const double dv = g(v, v).real();
          if (!(du > 0.0) || !(dv > 0.0)) throw std::invalid_argument("DelayEvaluator: zero channel column");
          rho[u * n_tx_ + v] = std::norm(g(u, v)) / (du * dv);
        }
      coherence_.push_back(std::move(rho));
    }
  }
}

namespace {

constexpr std::size_t kSmall = 8;

// Extreme eigenvalues of a small Hermitian PSD matrix (row-major, n <= 8).
// The characteristic polynomial comes from the power sums tr(G^k) via
// Newton's identities; for Hermitian G, tr(G^(a+b)) is the real inner
// product of G^a and G^b, so only powers up to ceil(n/2) are formed. A
// real-rooted polynomial is convex beyond its outermost roots, so Newton
// started from the Gershgorin bounds approaches each extreme root
// monotonically; iteration stops once a step fails to move inward.
template <std::size_t n>
std::pair<double, double> extreme_eigenvalues(const cplx *g) {
  constexpr std::size_t nn = n * n;
  constexpr std::size_t half = (n + 1) / 2;
  // pw[k - 1] holds G^k as split real/imaginary parts.
  std::array<std::array<double, kSmall * kSmall>, kSmall / 2> re;
  std::array<std::array<double, kSmall * kSmall>, kSmall / 2> im;
  for (std::size_t i = 0; i < nn; ++i) {
    re[0][i] = g[i].real();
    im[0][i] = g[i].imag();
  }
  for (std::size_t k = 1; k < half; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        double sr = 0.0;
        double si = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
          const double ar = re[k - 1][i * n + l], ai = im[k - 1][i * n + l];
          const double br = re[0][l * n + j], bi = im[0][l * n + j];
          sr += ar * br - ai * bi;
          si += ar * bi + ai * br;
        }
        re[k][i * n + j] = sr;
        im[k][i * n + j] = si;
      }

  std::array<double, kSmall + 1> psum{};
  for (std::size_t i = 0; i < n; ++i) psum[1] += re[0][i * n + i];
  for (std::size_t k = 2; k <= n; ++k) {
    const std::size_t x = (k + 1) / 2 - 1;
    const std::size_t y = k / 2 - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < nn; ++i) acc += re[x][i] * re[y][i] + im[x][i] * im[y][i];
    psum[k] = acc;
  }
  // Elementary symmetric polynomials e_k, then p(x) = sum c[k] x^k.
  std::array<double, kSmall + 1> e{};
  e[0] = 1.0;
  for (std::size_t k = 1; k <= n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += (i % 2 ? 1.0 : -1.0) * e[k - i] * psum[i];
    e[k] = acc / static_cast<double>(k);
  }
  std::array<double, kSmall + 1> c{};
  for (std::size_t k = 0; k <= n; ++k) c[n - k] = (k % 2 ? -1.0 : 1.0) * e[k];

  const auto newton = [&](double x, bool from_above) {
    for (int it = 0; it < 400; ++it) {
      double p = c[n];
      double dp = 0.0;
      for (std::size_t k = n; k-- > 0;) {
        dp = dp * x + p;
        p = p * x + c[k];
      }
      if (dp == 0.0) break;
      const double next = x - p / dp;
      if (from_above ? !(next < x) : !(next > x)) break;
      x = next;
    }
    return x;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double radius = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) radius += std::sqrt(re[0][i * n + j] * re[0][i * n + j] + im[0][i * n + j] * im[0][i * n + j]);
    lo = std::min(lo, re[0][i * n + i] - radius);
    hi = std::max(hi, re[0][i * n + i] + radius);
  }
  return {newton(std::max(lo, 0.0), false), newton(hi, true)};
}

double condition_from_gram(const cplx *g, std::size_t n, std::size_t rank) {
  double top = 0.0;
  double low = 0.0;
  if (n == 2) {
    const double a = g[0].real();
    const double d = g[3].real();
    const double half = 0.5 * (a - d);
    top = 0.5 * (a + d) + std::sqrt(half * half + std::norm(g[1]));
    low = rank == 2 ? (a * d - std::norm(g[1])) / top : top;
  } else if (rank == n && n <= kSmall) {
    switch (n) {
      case 3:
        std::tie(low, top) = extreme_eigenvalues<3>(g);
        break;
      case 4:
        std::tie(low, top) = extreme_eigenvalues<4>(g);
        break;
      case 5:
        std::tie(low, top) = extreme_eigenvalues<5>(g);
        break;
      case 6:
        std::tie(low, top) = extreme_eigenvalues<6>(g);
        break;
      case 7:
        std::tie(low, top) = extreme_eigenvalues<7>(g);
        break;
      default:
        std::tie(low, top) = extreme_eigenvalues<8>(g);
        break;
    }
  } else {
    const auto ev = hermitian_eigenvalues(ComplexMatrix(n, n, std::vector<cplx>(g, g + n * n)));  // ascending
    top = ev.back();
    low = ev[ev.size() - rank];
  }
  constexpr double floor = kRankTolerance * kRankTolerance;
  if (!(top > 0.0) || low < floor * top) return std::numeric_limits<double>::infinity();
  return std::sqrt(top / low);
}

}  // namespace

double DelayEvaluator::evaluate_draw(std::size_t draw, std::span<const std::size_t> idx) const {
  if (idx.size() != n_tx_) throw std::invalid_argument("DelayEvaluator: wrong number of delay indices");
  if (idx[0] != 0) throw std::invalid_argument("DelayEvaluator: first antenna delay must be 0");
  for (std::size_t v : idx)
    if (v >= stride_) throw std::invalid_argument("DelayEvaluator: grid index out of range");

  if (metric_ == SearchMetric::ConditionNumber) {
    const ComplexMatrix &hh = grams_.at(draw);
    std::vector<cplx> heap;
    std::array<cplx, kSmall * kSmall> local;
    cplx *g = local.data();
    if (n_tx_ > kSmall) {
      heap.resize(n_tx_ * n_tx_);
      g = heap.data();
    }
    for (std::size_t j = 0; j < n_tx_; ++j)
      for (std::size_t l = 0; l < n_tx_; ++l) g[j * n_tx_ + l] = hh(j, l) * pair_table_[idx[j] * stride_ + idx[l]];
    return condition_from_gram(g, n_tx_, std::min(n_tx_, n_rx_));
  }
  const auto &rho = coherence_.at(draw);
  double acc = 0.0;
  for (std::size_t u = 0; u < n_tx_; ++u)
    for (std::size_t v = 0; v < n_tx_; ++v) acc += rho[u * n_tx_ + v] * pair_table_[idx[u] * stride_ + idx[v]];
  return std::sqrt(std::max(0.0, acc - static_cast<double>(n_tx_ * m_len_)));
}

double DelayEvaluator::evaluate(std::span<const std::size_t> idx) const {
  const std::size_t draws = metric_ == SearchMetric::ConditionNumber ? grams_.size() : coherence_.size();
  double acc = 0.0;
  for (std::size_t d = 0; d < draws; ++d) acc += evaluate_draw(d, idx);
  return acc / static_cast<double>(draws);
}

namespace {

// Lexicographic compare of index tuples; smaller tuple = smaller delays.
bool better(double value, const std::vector<std::size_t> &cand, double best_value,
            const std::vector<std::size_t> &best) {
  if (value < best_value) return true;
  if (value > best_value || std::isnan(value)) return false;
  return std::lexicographical_compare(cand.begin(), cand.end(), best.begin(), best.end());
}

struct Scored {
  std::vector<std::size_t> indices;
  double value = 0.0;
};

std::vector<Scored> score_all(const DelayEvaluator &ev, std::vector<std::vector<std::size_t>> candidates,
                              std::size_t threads) {
  std::vector<Scored> out(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    out[i].value = ev.evaluate(candidates[i]);
    out[i].indices = std::move(candidates[i]);
  });
  return out;
}

}  // namespace

DelaySearchResult optimize_delays(const ChannelEnsemble &ensemble, const DelaySearchConfig &search,
                                  const shaping::ShapingConfig &cfg, std::size_t threads) {
  const std::size_t n_tx = ensemble.n_tx();
  if (n_tx < 2) throw std::invalid_argument("optimize_delays: needs at least two transmit antennas");
  search.validate(cfg.symbol_period);
  const std::size_t g_fine = search.grid_points_per_dim;
  const std::size_t dims = n_tx - 1;

  // Largest coarse resolution whose full grid plus one refinement pass per
  // coordinate fits the evaluation budget.
  std::size_t g_coarse = 0;
  if (dims == 1) {
    if (g_fine > search.evaluation_budget)
      throw ConfigError("search.evaluation_budget", "grid of " + std::to_string(g_fine) + " points exceeds budget");
    g_coarse = g_fine;
  } else {
    const std::size_t refine = dims * g_fine;
    for (std::size_t g = 2; g <= g_fine; ++g) {
      double total = std::pow(static_cast<double>(g), static_cast<double>(dims)) + static_cast<double>(refine);
      if (total > static_cast<double>(search.evaluation_budget)) break;
      g_coarse = g;
    }
    if (g_coarse < 2)
      throw ConfigError("search.evaluation_budget", "too small for a coarse grid of at least 2 points per delay");
  }

  const DelayEvaluator ev(ensemble, search, cfg);
  std::vector<std::size_t> coarse(g_coarse);
  for (std::size_t c = 1; c <= g_coarse; ++c)
    coarse[c - 1] = (2 * c * (g_fine + 1) + (g_coarse + 1)) / (2 * (g_coarse + 1));

  // Coarse grid in lexicographic order.
  std::vector<std::vector<std::size_t>> cands;
  std::vector<std::size_t> digit(dims, 0);
  for (;;) {
    std::vector<std::size_t> idx(n_tx, 0);
    for (std::size_t d = 0; d < dims; ++d) idx[d + 1] = coarse[digit[d]];
    cands.push_back(std::move(idx));
    std::size_t d = dims;
    while (d > 0 && ++digit[d - 1] == g_coarse) digit[--d] = 0;
    if (d == 0) break;
  }

  DelaySearchResult res;
  res.coarse_points_per_dim = g_coarse;
  const auto &grid = ev.grid();
  const auto record = [&](const Scored &s, bool refinement) {
    TracePoint tp;
    tp.delays.reserve(n_tx);
    for (std::size_t v : s.indices) tp.delays.push_back(grid[v]);
    tp.value = s.value;
    tp.refinement = refinement;
    res.metric_trace.push_back(std::move(tp));
  };

  std::vector<std::size_t> best;
  double best_value = std::numeric_limits<double>::infinity();
  for (const auto &s : score_all(ev, std::move(cands), threads)) {
    record(s, false);
    if (best.empty() || better(s.value, s.indices, best_value, best)) {
      best = s.indices;
      best_value = s.value;
    }
  }

  if (dims > 1) {
    for (std::size_t d = 1; d < n_tx; ++d) {
      std::vector<std::vector<std::size_t>> line;
      for (std::size_t g = 1; g <= g_fine; ++g) {
        auto idx = best;
        idx[d] = g;
        line.push_back(std::move(idx));
      }
      for (const auto &s : score_all(ev, std::move(line), threads)) {
        record(s, true);
        if (better(s.value, s.indices, best_value, best)) {
          best = s.indices;
          best_value = s.value;
        }
      }
    }
  }

  res.delays.reserve(n_tx);
  for (std::size_t v : best) res.delays.push_back(grid[v]);
  res.objective_value = best_value;
  res.mean_normalized_sigma = mean_normalized_singular_values(ensemble, res.delays, cfg);
  res.within_epsilon = std::all_of(res.mean_normalized_sigma.begin(), res.mean_normalized_sigma.end(), [&](double s) {
    return s >= 1.0 - search.epsilon && s <= 1.0 + search.epsilon;
  });
  return res;
}

}  // namespace dpst::optim
