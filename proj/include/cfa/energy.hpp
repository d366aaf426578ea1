#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

#include "cfa/common.hpp"
#include "cfa/config.hpp"

namespace cfa::energy {

/// Deterministic seasonal demand, floored to whole energy units.
inline double demand(int t, int T) {
  double v = 100.0 - 50.0 * std::sin(5.0 * std::numbers::pi * t / T);
  return std::floor(std::max(0.0, v));
}

/// Energy available from the main grid, clamped to [G_min, G_max].
inline double grid_available(int t, int T, double g_min, double g_max) {
  double v = 90.0 - 50.0 * std::sin(5.0 * std::numbers::pi * t / (2.0 * T));
  return std::min(std::max(v, g_min), g_max);
}

struct PriceModel {
  double p_min = -10.0;
  double p_max = 70.0;
  double mu_p = 0.0;
  double sigma_p = 5.0;
  double sigma_f = 0.0;  // forecast-noise std; 0 = perfect foresight
};

struct RenewableModel {
  double base_level = 60.0;
  double base_amplitude = 40.0;
  double rho_cross = 0.9;  // sign-persistence of the error process
  double sigma_e = 20.0;   // realized-error magnitude scale
  double sigma_f = 0.0;    // forecast-error multiplier; 0 = perfect
};

/// Seasonal mean of the renewable supply, clamped at zero.
inline double renewable_base(const RenewableModel& m, int t, int T) {
  double v =
      m.base_level + m.base_amplitude * std::sin(2.0 * std::numbers::pi * t / T);
  return std::max(0.0, v);
}

/// One realized trajectory of the exogenous processes together with the
/// rolling forecast matrices. Forecast row t holds leads 0..min(H, T-t);
/// lead 0 is the realized value by construction.
struct SamplePath {
  Eigen::VectorXd E, P, D, G;            // length T+1
  std::vector<Eigen::VectorXd> F_E, F_P;  // [t](lead)
  std::uint64_t seed = 0;

  int periods() const { return static_cast<int>(E.size()) - 1; }
  int leads(int t) const { return static_cast<int>(F_E[static_cast<std::size_t>(t)].size()) - 1; }
};

namespace detail {

// Sign chain with stay-probability rho: runs have geometric mean 1/(1-rho).
class SignChain {
 public:
  SignChain(double rho, std::mt19937_64& rng) : rho_(rho), rng_(rng) {
    sign_ = unit_(rng_) < 0.5 ? 1.0 : -1.0;
  }
  double next() {
    double s = sign_;
    if (unit_(rng_) > rho_) sign_ = -sign_;
    return s;
  }

 private:
  double rho_;
  std::mt19937_64& rng_;
  double sign_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace detail

/// Realized spot prices (clamped sinusoid plus Gaussian innovation) and
/// their rolling forecasts: fresh noise of std sigma_f around the realized
/// path for every origin, clamped back into the price band.
inline std::pair<Eigen::VectorXd, std::vector<Eigen::VectorXd>>
generate_prices(const PriceModel& m, int T, int H, std::uint64_t seed) {
  const double pi = std::numbers::pi;
  const double mid = 0.5 * (m.p_max + m.p_min);
  const double amp = m.p_max - m.p_min;
  auto clamp = [&](double v) { return std::min(std::max(v, m.p_min), m.p_max); };

  std::mt19937_64 path_rng(derive_seed(seed, {1}));
  std::normal_distribution<double> innovation(m.mu_p, m.sigma_p);
  Eigen::VectorXd P(T + 1);
  for (int t = 0; t <= T; ++t) {
    double eps = m.sigma_p > 0.0 ? innovation(path_rng) : m.mu_p;
    P(t) = clamp(mid - amp * std::sin(5.0 * pi * t / (2.0 * T)) + eps);
  }

  std::mt19937_64 fc_rng(derive_seed(seed, {2}));
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> F(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    int L = std::min(H, T - t);
    Eigen::VectorXd row(L + 1);
    row(0) = P(t);
    for (int l = 1; l <= L; ++l) row(l) = clamp(P(t + l) + m.sigma_f * unit(fc_rng));
    F[static_cast<std::size_t>(t)] = std::move(row);
  }
  return {std::move(P), std::move(F)};
}

/// Realized renewable supply and rolling forecasts. Both the realized error
/// and the forecast error carry the crossing-time structure: the error sign
/// persists with probability rho_cross per step, magnitudes are folded
/// Gaussians. sigma_f scales the forecast error only, so the same seed with
/// a larger sigma_f degrades every forecast pointwise.
inline std::pair<Eigen::VectorXd, std::vector<Eigen::VectorXd>>
generate_renewables(const RenewableModel& m, int T, int H, std::uint64_t seed) {
  std::mt19937_64 path_rng(derive_seed(seed, {3}));
  std::normal_distribution<double> unit(0.0, 1.0);
  detail::SignChain path_sign(m.rho_cross, path_rng);
  Eigen::VectorXd E(T + 1);
  for (int t = 0; t <= T; ++t) {
    double eps = path_sign.next() * std::abs(unit(path_rng)) * m.sigma_e;
    E(t) = std::max(0.0, renewable_base(m, t, T) + eps);
  }

  std::mt19937_64 fc_rng(derive_seed(seed, {4}));
  std::normal_distribution<double> fc_unit(0.0, 1.0);
  std::vector<Eigen::VectorXd> F(static_cast<std::size_t>(T) + 1);
  for (int t = 0; t <= T; ++t) {
    int L = std::min(H, T - t);
    Eigen::VectorXd row(L + 1);
    row(0) = E(t);
    detail::SignChain eta_sign(m.rho_cross, fc_rng);
    for (int l = 1; l <= L; ++l) {
      double eta = eta_sign.next() * std::abs(fc_unit(fc_rng));
      row(l) = std::max(0.0, E(t + l) - m.sigma_f * eta);
    }
    F[static_cast<std::size_t>(t)] = std::move(row);
  }
  return {std::move(E), std::move(F)};
}

inline PriceModel price_model(const ExperimentConfig& cfg, double sigma_f) {
  return PriceModel{cfg.P_min, cfg.P_max, cfg.mu_p, cfg.sigma_p, sigma_f};
}

inline RenewableModel renewable_model(const ExperimentConfig& cfg,
                                      double sigma_f) {
  return RenewableModel{cfg.base_level, cfg.base_amplitude, cfg.rho_cross,
                        cfg.sigma_E, sigma_f};
}

/// Assemble a full sample path: stochastic prices and renewables plus the
/// deterministic demand and grid series (carried along for uniformity).
inline SamplePath make_sample_path(const ExperimentConfig& cfg, double sigma_f,
                                   std::uint64_t seed) {
  SamplePath sp;
  sp.seed = seed;
  auto [P, FP] = generate_prices(price_model(cfg, sigma_f), cfg.T, cfg.H, seed);
  auto [E, FE] =
      generate_renewables(renewable_model(cfg, sigma_f), cfg.T, cfg.H, seed);
  sp.P = std::move(P);
  sp.F_P = std::move(FP);
  sp.E = std::move(E);
  sp.F_E = std::move(FE);
  sp.D.resize(cfg.T + 1);
  sp.G.resize(cfg.T + 1);
  for (int t = 0; t <= cfg.T; ++t) {
    sp.D(t) = demand(t, cfg.T);
    sp.G(t) = grid_available(t, cfg.T, cfg.G_min, cfg.G_max);
  }
  return sp;
}

}  // namespace cfa::energy
