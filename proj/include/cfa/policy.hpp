#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cfa/config.hpp"
#include "cfa/energy.hpp"
#include "cfa/lp.hpp"
#include "cfa/model.hpp"

namespace cfa::policy {

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Variant { Benchmark, Constant, Lookup, Exponential, Capacity };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Benchmark: return "benchmark";
    case Variant::Constant: return "constant";
    case Variant::Lookup: return "lookup";
    case Variant::Exponential: return "exponential";
    case Variant::Capacity: return "capacity";
  }
  return "?";
}

inline Variant parse_variant(const std::string& name) {
  for (Variant v : {Variant::Benchmark, Variant::Constant, Variant::Lookup,
                    Variant::Exponential, Variant::Capacity})
    if (name == variant_name(v)) return v;
  throw std::invalid_argument("unknown variant: " + name);
}

/// A parameterization variant with its flat parameter vector and box.
/// The benchmark carries no parameters; every variant at its identity
/// values reproduces the benchmark exactly.
struct Theta {
  Variant variant = Variant::Benchmark;
  Eigen::VectorXd values;
  Eigen::VectorXd lower, upper;

  static Theta benchmark() { return Theta{}; }

  static Theta constant(double v = 1.0) {
    return make(Variant::Constant, Eigen::VectorXd::Constant(1, v),
                Eigen::VectorXd::Constant(1, 0.0),
                Eigen::VectorXd::Constant(1, 2.0));
  }

  /// One multiplier per lookahead offset tau = 1..H.
  static Theta lookup(int H, double v = 1.0) {
    if (H < 1) throw std::invalid_argument("lookup needs H >= 1");
    return make(Variant::Lookup, Eigen::VectorXd::Constant(H, v),
                Eigen::VectorXd::Constant(H, 0.0),
                Eigen::VectorXd::Constant(H, 2.0));
  }

  static Theta exponential(double t1 = 1.0, double t2 = 0.0) {
    Eigen::VectorXd v(2), lo(2), up(2);
    v << t1, t2;
    lo << 0.0, -1.0;
    up << 2.0, 0.1;
    return make(Variant::Exponential, v, lo, up);
  }

  static Theta capacity(double u = 1.0, double l = 0.0) {
    Eigen::VectorXd v(2), lo(2), up(2);
    v << u, l;
    lo << 0.0, 0.0;
    up << 1.0, 1.0;
    return make(Variant::Capacity, v, lo, up);
  }

  static Theta identity(Variant variant, int H) {
    switch (variant) {
      case Variant::Benchmark: return benchmark();
      case Variant::Constant: return constant(1.0);
      case Variant::Lookup: return lookup(H, 1.0);
      case Variant::Exponential: return exponential(1.0, 0.0);
      case Variant::Capacity: return capacity(1.0, 0.0);
    }
    throw std::invalid_argument("bad variant");
  }

  int dim() const { return static_cast<int>(values.size()); }

  bool inside_box(double tol = 0.0) const {
    for (int i = 0; i < dim(); ++i)
      if (values(i) < lower(i) - tol || values(i) > upper(i) + tol)
        return false;
    return true;
  }

  void project_onto_box() {
    for (int i = 0; i < dim(); ++i)
      values(i) = std::min(std::max(values(i), lower(i)), upper(i));
  }

  void validate() const {
    if (values.size() != lower.size() || values.size() != upper.size())
      throw std::invalid_argument("theta: box size mismatch");
    if (!inside_box())
      throw std::invalid_argument("theta: values outside box");
  }

 private:
  static Theta make(Variant variant, Eigen::VectorXd v, Eigen::VectorXd lo,
                    Eigen::VectorXd up) {
    Theta t;
    t.variant = variant;
    t.values = std::move(v);
    t.lower = std::move(lo);
    t.upper = std::move(up);
    return t;
  }
};

enum class RowKind {
  Demand,
  Grid,
  StorageOut,
  StorageRoom,
  Wind,
  ChargeCap,
  DischargeCap,
  StorageFloor,
};

struct RowRef {
  int tau;
  RowKind kind;
};

struct ColRef {
  int tau;
  model::Flow flow;
};

/// The assembled lookahead LP for one (theta, state, origin) triple,
/// together with the exact derivatives of its right-hand side. Storage is
/// propagated inside the LP: the storage rows of period tau carry the
/// accumulated charge/discharge columns of all earlier periods, so the
/// only state dependence left in b is R_t itself.
struct LookaheadAssembly {
  lp::LpProblem problem;
  int lookahead = 0;   // L = min(H, T - t)
  int floor_rows = 0;  // capacity lower-bound rows (tau = 1..L)
  Eigen::MatrixXd rhs_jacobian_theta;  // m x dim(theta); empty when skipped
  Eigen::VectorXd rhs_jacobian_state;  // m; d b / d R_t

  int rows() const { return static_cast<int>(problem.rows()); }
  int cols() const { return static_cast<int>(problem.cols()); }

  RowRef row_ref(int i) const {
    int base = 7 * (lookahead + 1);
    if (i < base) return {i / 7, static_cast<RowKind>(i % 7)};
    return {i - base + 1, RowKind::StorageFloor};
  }
  ColRef col_ref(int j) const {
    return {j / model::kNumFlows,
            static_cast<model::Flow>(j % model::kNumFlows)};
  }
};

/// Per-thread cache of constraint matrices. The matrix depends only on the
/// lookahead length, the efficiencies, and whether floor rows are present,
/// so rolling-horizon loops reuse a handful of allocations.
class AssemblyCache {
 public:
  std::shared_ptr<const Eigen::MatrixXd> matrix(int L, bool floors,
                                                double beta_c, double beta_d) {
    Key key{L, floors, beta_c, beta_d};
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto mat = std::make_shared<const Eigen::MatrixXd>(
        build_matrix(L, floors, beta_c, beta_d));
    cache_.emplace(key, mat);
    return mat;
  }

  static Eigen::MatrixXd build_matrix(int L, bool floors, double beta_c,
                                      double beta_d) {
    const int n = model::kNumFlows * (L + 1);
    const int base = 7 * (L + 1);
    const int m = base + (floors ? L : 0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, n);
    auto col = [](int tau, model::Flow f) {
      return model::kNumFlows * tau + static_cast<int>(f);
    };
    auto storage_out_into = [&](int row, int tau) {
      A(row, col(tau, model::StorageToDemand)) = 1.0;
      A(row, col(tau, model::StorageToGrid)) = 1.0;
      for (int s = 0; s < tau; ++s) {
        A(row, col(s, model::StorageToDemand)) = 1.0;
        A(row, col(s, model::WindToStorage)) = -beta_c;
        A(row, col(s, model::GridToStorage)) = -beta_c;
        A(row, col(s, model::StorageToGrid)) = 1.0;
      }
    };
    for (int tau = 0; tau <= L; ++tau) {
      int r = 7 * tau;
      A(r + 0, col(tau, model::WindToDemand)) = 1.0;
      A(r + 0, col(tau, model::StorageToDemand)) = beta_d;
      A(r + 0, col(tau, model::GridToDemand)) = 1.0;
      A(r + 1, col(tau, model::GridToDemand)) = 1.0;
      A(r + 1, col(tau, model::GridToStorage)) = 1.0;
      storage_out_into(r + 2, tau);
      A(r + 3, col(tau, model::WindToStorage)) = 1.0;
      A(r + 3, col(tau, model::GridToStorage)) = 1.0;
      for (int s = 0; s < tau; ++s) {
        A(r + 3, col(s, model::StorageToDemand)) = -1.0;
        A(r + 3, col(s, model::WindToStorage)) = beta_c;
        A(r + 3, col(s, model::GridToStorage)) = beta_c;
        A(r + 3, col(s, model::StorageToGrid)) = -1.0;
      }
      A(r + 4, col(tau, model::WindToStorage)) = 1.0;
      A(r + 4, col(tau, model::WindToDemand)) = 1.0;
      A(r + 5, col(tau, model::WindToStorage)) = 1.0;
      A(r + 5, col(tau, model::GridToStorage)) = 1.0;
      A(r + 6, col(tau, model::StorageToDemand)) = 1.0;
      A(r + 6, col(tau, model::StorageToGrid)) = 1.0;
    }
    if (floors)
      for (int tau = 1; tau <= L; ++tau) storage_out_into(base + tau - 1, tau);
    return A;
  }

 private:
  using Key = std::tuple<int, bool, double, double>;
  std::map<Key, std::shared_ptr<const Eigen::MatrixXd>> cache_;
};

namespace detail {

/// Multiplier applied to the wind-row forecast at offset tau. Offset 0 uses
/// the realized value and is never modified; the parameterizations act on
/// the genuinely forecasted periods tau >= 1.
inline double wind_multiplier(const Theta& th, int tau) {
  if (tau == 0) return 1.0;
  switch (th.variant) {
    case Variant::Benchmark:
    case Variant::Capacity:
      return 1.0;
    case Variant::Constant:
      return th.values(0);
    case Variant::Lookup:
      return tau - 1 < th.dim() ? th.values(tau - 1) : 1.0;
    case Variant::Exponential:
      return th.values(0) * std::exp(th.values(1) * tau);
  }
  return 1.0;
}

inline bool has_floor_rows(const Theta& th) {
  return th.variant == Variant::Capacity && th.values(1) > 0.0;
}

}  // namespace detail

/// Build the (H_t + 1)-period lookahead LP for state s at origin t.
/// Set with_jacobians = false to skip the derivative blocks when only the
/// decision is needed.
inline LookaheadAssembly assemble(const Theta& th, const model::State& s,
                                  const energy::SamplePath& path, int t,
                                  const model::Horizon& horizon,
                                  const ExperimentConfig& cfg,
                                  AssemblyCache* cache = nullptr,
                                  bool with_jacobians = true) {
  if (t < 0 || t > horizon.T) throw AssemblyError("origin outside horizon");
  if (path.periods() < horizon.T) throw AssemblyError("path too short");
  const int L = std::min(horizon.H, horizon.T - t);
  const auto& fe = path.F_E[static_cast<std::size_t>(t)];
  const auto& fp = path.F_P[static_cast<std::size_t>(t)];
  if (static_cast<int>(fe.size()) < L + 1 ||
      static_cast<int>(fp.size()) < L + 1)
    throw AssemblyError("forecast rows shorter than lookahead");

  const bool floors = detail::has_floor_rows(th);
  const int base = 7 * (L + 1);
  const int m = base + (floors ? L : 0);
  const int n = model::kNumFlows * (L + 1);
  const double theta_u =
      th.variant == Variant::Capacity ? th.values(0) : 1.0;

  LookaheadAssembly out;
  out.lookahead = L;
  out.floor_rows = floors ? L : 0;

  AssemblyCache local;
  AssemblyCache& store = cache ? *cache : local;
  out.problem.A = store.matrix(L, floors, cfg.beta_c, cfg.beta_d);

  // Offset 0 reads the realized state; offsets >= 1 read the rolling
  // forecasts (identical in simulation, where lead-0 forecasts equal the
  // realized values).
  Eigen::VectorXd b(m), c(n);
  for (int tau = 0; tau <= L; ++tau) {
    int r = 7 * tau;
    b(r + 0) = tau == 0 ? s.D : path.D(t + tau);
    b(r + 1) = tau == 0 ? s.G : path.G(t + tau);
    b(r + 2) = s.R;
    double room = cfg.R_max * theta_u - s.R;
    if (room < 0.0 && room > -1e-9) room = 0.0;  // round-off guard
    b(r + 3) = room;
    b(r + 4) =
        tau == 0 ? s.E : fe(tau) * detail::wind_multiplier(th, tau);
    b(r + 5) = cfg.gamma_c;
    b(r + 6) = cfg.gamma_d;
    c.segment<model::kNumFlows>(model::kNumFlows * tau) =
        model::contribution_coefficients(tau == 0 ? s.P : fp(tau),
                                         cfg.C_penalty, cfg.beta_d);
  }
  if (floors) {
    const double floor_level = cfg.R_max * th.values(1);
    for (int tau = 1; tau <= L; ++tau) b(base + tau - 1) = s.R - floor_level;
  }
  out.problem.b = std::move(b);
  out.problem.c = std::move(c);

  Eigen::VectorXd js = Eigen::VectorXd::Zero(m);
  for (int tau = 0; tau <= L; ++tau) {
    js(7 * tau + 2) = 1.0;
    js(7 * tau + 3) = -1.0;
  }
  for (int i = base; i < m; ++i) js(i) = 1.0;
  out.rhs_jacobian_state = std::move(js);

  if (with_jacobians) {
    const int K = th.dim();
    Eigen::MatrixXd jt = Eigen::MatrixXd::Zero(m, K);
    switch (th.variant) {
      case Variant::Benchmark:
        break;
      case Variant::Constant:
        for (int tau = 1; tau <= L; ++tau) jt(7 * tau + 4, 0) = fe(tau);
        break;
      case Variant::Lookup:
        for (int tau = 1; tau <= L && tau - 1 < K; ++tau)
          jt(7 * tau + 4, tau - 1) = fe(tau);
        break;
      case Variant::Exponential:
        for (int tau = 1; tau <= L; ++tau) {
          double grow = std::exp(th.values(1) * tau);
          jt(7 * tau + 4, 0) = fe(tau) * grow;
          jt(7 * tau + 4, 1) = fe(tau) * th.values(0) * tau * grow;
        }
        break;
      case Variant::Capacity:
        for (int tau = 0; tau <= L; ++tau) jt(7 * tau + 3, 0) = cfg.R_max;
        for (int i = base; i < m; ++i) jt(i, 1) = -cfg.R_max;
        break;
    }
    out.rhs_jacobian_theta = std::move(jt);
  }
  return out;
}

/// Executed when the lookahead LP has no feasible point (possible only for
/// capacity parameters that demand an unreachable buffer): serve demand
/// from the grid, touch nothing else.
inline model::Decision fallback_decision(const model::State& s) {
  model::Decision x;
  x[model::GridToDemand] = std::min(s.D, s.G);
  return x;
}

struct DecideResult {
  model::Decision decision;
  lp::LpSolution solution;
  LookaheadAssembly assembly;
  bool fallback_used = false;
  bool repaired = false;
  double repair_magnitude = 0.0;
};

namespace detail {

/// Proportionally scale flow groups back onto the true-state rows. The
/// offset-0 rows of the LP already use realized values, so this fires only
/// on numerically negligible violations.
inline void repair_against_state(model::Decision& x, const model::State& s,
                                 const ExperimentConfig& cfg) {
  for (double& f : x.v)
    if (f < 0.0) f = 0.0;
  static constexpr int kRowFlows[7][3] = {
      {model::WindToDemand, model::StorageToDemand, model::GridToDemand},
      {model::GridToDemand, model::GridToStorage, -1},
      {model::StorageToDemand, model::StorageToGrid, -1},
      {model::WindToStorage, model::GridToStorage, -1},
      {model::WindToStorage, model::WindToDemand, -1},
      {model::WindToStorage, model::GridToStorage, -1},
      {model::StorageToDemand, model::StorageToGrid, -1}};
  for (int pass = 0; pass < 8; ++pass) {
    double worst = model::max_violation(s, x, cfg);
    if (worst <= 1e-12) return;
    auto lhs = model::constraint_lhs(x, cfg.beta_d);
    auto rhs = model::constraint_rhs(s, cfg);
    for (int i = 0; i < 7; ++i) {
      double l = lhs[static_cast<std::size_t>(i)];
      double r = std::max(rhs[static_cast<std::size_t>(i)], 0.0);
      if (l <= r || l <= 0.0) continue;
      double scale = r / l;
      for (int k = 0; k < 3; ++k) {
        int f = kRowFlows[i][k];
        if (f >= 0) x[f] *= scale;
      }
      lhs = model::constraint_lhs(x, cfg.beta_d);
    }
  }
}

}  // namespace detail

/// Solve the assembled lookahead and execute its first-period block.
/// Pure given (theta, state, path, t); the cache and warm-start hint only
/// accelerate the solve.
inline DecideResult decide(const Theta& th, const model::State& s,
                           const energy::SamplePath& path, int t,
                           const model::Horizon& horizon,
                           const ExperimentConfig& cfg,
                           AssemblyCache* cache = nullptr,
                           const lp::WarmStart* hint = nullptr,
                           bool with_jacobians = true) {
  DecideResult out;
  out.assembly = assemble(th, s, path, t, horizon, cfg, cache, with_jacobians);
  out.solution = hint ? lp::solve(out.assembly.problem, *hint)
                      : lp::solve(out.assembly.problem);
  if (out.solution.status == lp::SolveStatus::Unbounded)
    throw lp::NumericalBreakdown("lookahead LP reported unbounded");
  if (out.solution.status == lp::SolveStatus::Infeasible) {
    out.fallback_used = true;
    out.decision = fallback_decision(s);
    return out;
  }
  model::Decision x;
  for (int f = 0; f < model::kNumFlows; ++f) {
    double v = out.solution.x(f);
    x[f] = std::abs(v) < 1e-11 ? 0.0 : v;
  }
  out.repair_magnitude = model::max_violation(s, x, cfg);
  if (out.repair_magnitude > 1e-12) {
    detail::repair_against_state(x, s, cfg);
    out.repaired = out.repair_magnitude > 1e-7;
  }
  out.decision = x;
  return out;
}

/// Wrap a parameterization as a plain simulation policy. Consecutive calls
/// warm-start from the previous period's basis; the solver falls back to a
/// cold solve whenever the basis no longer fits, so results stay
/// deterministic either way.
inline model::PolicyFn make_policy(const Theta& th,
                                   const energy::SamplePath& path,
                                   const model::Horizon& horizon,
                                   const ExperimentConfig& cfg,
                                   bool warm_start = true) {
  auto cache = std::make_shared<AssemblyCache>();
  auto last = std::make_shared<std::optional<lp::WarmStart>>();
  Theta theta = th;
  return [=, &path, &cfg](const model::State& s, int t) {
    const lp::WarmStart* hint =
        warm_start && last->has_value() ? &**last : nullptr;
    auto res = decide(theta, s, path, t, horizon, cfg, cache.get(), hint,
                      /*with_jacobians=*/false);
    if (warm_start && res.solution.status == lp::SolveStatus::Optimal)
      *last = lp::WarmStart{res.solution.basis, res.solution.basis_inverse};
    return res.decision;
  };
}

}  // namespace cfa::policy
