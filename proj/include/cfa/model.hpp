#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfa/common.hpp"
#include "cfa/config.hpp"
#include "cfa/energy.hpp"

namespace cfa::model {

struct InfeasibleDecision : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// (R, E, P, D, G): storage level, renewable supply, spot price, demand,
/// grid availability.
struct State {
  double R = 0.0;
  double E = 0.0;
  double P = 0.0;
  double D = 0.0;
  double G = 0.0;
};

/// Flow order is fixed project-wide; LP columns and jacobians rely on it.
enum Flow : int {
  WindToDemand = 0,
  GridToDemand = 1,
  StorageToDemand = 2,
  WindToStorage = 3,
  GridToStorage = 4,
  StorageToGrid = 5,
};
inline constexpr int kNumFlows = 6;

struct Decision {
  std::array<double, kNumFlows> v{};  // all >= 0

  double& operator[](int f) { return v[static_cast<std::size_t>(f)]; }
  double operator[](int f) const { return v[static_cast<std::size_t>(f)]; }
  double wd() const { return v[WindToDemand]; }
  double gd() const { return v[GridToDemand]; }
  double rd() const { return v[StorageToDemand]; }
  double wr() const { return v[WindToStorage]; }
  double gr() const { return v[GridToStorage]; }
  double rg() const { return v[StorageToGrid]; }

  bool operator==(const Decision&) const = default;
};

struct Horizon {
  int T = 48;
  int H = 24;
};

/// Left-hand sides of the seven physical constraint rows for (s, x), in the
/// canonical row order: demand, grid, storage-out, storage-room, wind,
/// charge cap, discharge cap.
inline std::array<double, 7> constraint_lhs(const Decision& x, double beta_d) {
  return {
      x.wd() + beta_d * x.rd() + x.gd(),  // <= D
      x.gd() + x.gr(),                    // <= G
      x.rd() + x.rg(),                    // <= R
      x.wr() + x.gr(),                    // <= R_max - R
      x.wr() + x.wd(),                    // <= E
      x.wr() + x.gr(),                    // <= gamma_c
      x.rd() + x.rg(),                    // <= gamma_d
  };
}

inline std::array<double, 7> constraint_rhs(const State& s,
                                            const ExperimentConfig& cfg) {
  return {s.D, s.G, s.R, cfg.R_max - s.R, s.E, cfg.gamma_c, cfg.gamma_d};
}

/// Largest violation across the seven rows and the sign constraints;
/// a feasible decision returns a value <= 0 (up to round-off).
inline double max_violation(const State& s, const Decision& x,
                            const ExperimentConfig& cfg) {
  double worst = 0.0;
  for (double f : x.v) worst = std::max(worst, -f);
  auto lhs = constraint_lhs(x, cfg.beta_d);
  auto rhs = constraint_rhs(s, cfg);
  for (int i = 0; i < 7; ++i) worst = std::max(worst, lhs[static_cast<std::size_t>(i)] - rhs[static_cast<std::size_t>(i)]);
  return worst;
}

inline bool is_feasible(const State& s, const Decision& x,
                        const ExperimentConfig& cfg, double tol = 1e-7) {
  return max_violation(s, x, cfg) <= tol;
}

/// Profit realized in one period: sold energy at the spot price minus the
/// penalty on unserved demand. Linear in x.
inline double contribution(const State& s, const Decision& x, double penalty,
                           double beta_d) {
  double sold = x.wd() + beta_d * x.rd() + x.gd() + beta_d * x.rg() - x.gr() -
                x.gd();
  double unmet = s.D - x.wd() - beta_d * x.rd() - x.gd();
  return s.P * sold - penalty * unmet;
}

/// Contribution as coefficients on the six flows (the constant -penalty*D
/// is excluded). Used both for lookahead objectives (with forecast prices)
/// and for the gradient chain (with realized prices).
inline Eigen::Matrix<double, kNumFlows, 1> contribution_coefficients(
    double price, double penalty, double beta_d) {
  Eigen::Matrix<double, kNumFlows, 1> c;
  c(WindToDemand) = price + penalty;
  c(GridToDemand) = penalty;
  c(StorageToDemand) = beta_d * (price + penalty);
  c(WindToStorage) = 0.0;
  c(GridToStorage) = -price;
  c(StorageToGrid) = beta_d * price;
  return c;
}

/// Coefficients of the storage balance R' = R + coef . x.
inline Eigen::Matrix<double, kNumFlows, 1> storage_transition_coefficients(
    double beta_c) {
  Eigen::Matrix<double, kNumFlows, 1> k;
  k(WindToDemand) = 0.0;
  k(GridToDemand) = 0.0;
  k(StorageToDemand) = -1.0;
  k(WindToStorage) = beta_c;
  k(GridToStorage) = beta_c;
  k(StorageToGrid) = -1.0;
  return k;
}

/// Exogenous information revealed for the next period.
struct Exogenous {
  double E = 0.0;
  double P = 0.0;
  double D = 0.0;
  double G = 0.0;
};

/// Net storage change caused by a decision. Single definition so that the
/// conservation invariant can be checked bit-for-bit.
inline double storage_delta(const Decision& x, double beta_c) {
  return -x.rd() + beta_c * x.wr() + beta_c * x.gr() - x.rg();
}

inline double clamp_storage(double r, double r_max) {
  return std::min(std::max(r, 0.0), r_max);
}

/// Advance the state. Only storage carries over; the rest is exogenous.
/// Throws InfeasibleDecision when x violates a constraint row beyond tol.
/// Feasible flows keep storage in range; the clamp trims round-off only.
inline State transition(const State& s, const Decision& x,
                        const Exogenous& w_next, const ExperimentConfig& cfg,
                        double tol = 1e-7) {
  double viol = max_violation(s, x, cfg);
  if (viol > tol)
    throw InfeasibleDecision("decision violates constraints by " +
                             std::to_string(viol));
  double r_next = clamp_storage(s.R + storage_delta(x, cfg.beta_c), cfg.R_max);
  return State{r_next, w_next.E, w_next.P, w_next.D, w_next.G};
}

inline State initial_state(const energy::SamplePath& path,
                           const ExperimentConfig& cfg) {
  return State{cfg.R0, path.E(0), path.P(0), path.D(0), path.G(0)};
}

inline Exogenous exogenous_at(const energy::SamplePath& path, int t) {
  return Exogenous{path.E(t), path.P(t), path.D(t), path.G(t)};
}

struct PeriodRecord {
  State state;
  Decision decision;
  double contribution = 0.0;
};

struct TrajectoryResult {
  double cumulative_reward = 0.0;
  std::vector<PeriodRecord> per_period;
  std::vector<double> storage_series;  // R_t for t = 0..T
};

using PolicyFn = std::function<Decision(const State&, int)>;

/// Roll a policy over one sample path, accumulating realized contributions.
/// Deterministic given (policy, path).
inline TrajectoryResult simulate(const PolicyFn& policy,
                                 const energy::SamplePath& path,
                                 const Horizon& horizon,
                                 const ExperimentConfig& cfg) {
  TrajectoryResult out;
  out.per_period.reserve(static_cast<std::size_t>(horizon.T) + 1);
  out.storage_series.reserve(static_cast<std::size_t>(horizon.T) + 1);
  State s = initial_state(path, cfg);
  CompensatedSum total;
  for (int t = 0; t <= horizon.T; ++t) {
    out.storage_series.push_back(s.R);
    Decision x = policy(s, t);
    double c = contribution(s, x, cfg.C_penalty, cfg.beta_d);
    total.add(c);
    out.per_period.push_back(PeriodRecord{s, x, c});
    if (t < horizon.T) s = transition(s, x, exogenous_at(path, t + 1), cfg);
  }
  out.cumulative_reward = total.value();
  return out;
}

}  // namespace cfa::model
