#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfa {

/// Every knob of an experiment in one flat struct. Physical defaults are
/// implementation-chosen (the storage benchmark literature gives formulas,
/// not numbers) and all of them can be overridden from the config file.
struct ExperimentConfig {
  // horizons (hourly periods)
  int T = 48;
  int H = 24;

  // storage device
  double R_max = 120.0;
  double gamma_c = 30.0;  // max charge per period
  double gamma_d = 30.0;  // max discharge per period
  double beta_c = 0.9;    // charge efficiency
  double beta_d = 0.9;    // discharge efficiency
  double R0 = 0.0;        // initial storage level

  // economics
  double C_penalty = 700.0;  // unmet-demand price; default 10 * P_max

  // spot price process
  double P_min = -10.0;
  double P_max = 70.0;
  double mu_p = 0.0;
  double sigma_p = 5.0;

  // renewable process
  double base_level = 60.0;
  double base_amplitude = 40.0;
  double rho_cross = 0.9;  // per-period probability the error sign persists
  double sigma_E = 20.0;   // realized-error magnitude scale

  // grid availability clamps
  double G_min = 40.0;
  double G_max = 140.0;

  // experiment grid
  std::vector<double> sigma_f_grid = {20.0, 25.0, 30.0, 35.0};
  std::vector<std::string> variants = {"constant", "lookup", "exponential",
                                       "capacity"};

  // search
  int N = 500;
  int batch_size = 8;
  int n_eval_paths = 500;
  double eta = 0.1;
  double adagrad_eps = 1e-8;
  int checkpoint_every = 100;

  // plumbing
  std::uint64_t master_seed = 20260801ULL;
  unsigned threads = 0;  // 0 = hardware concurrency

  void validate() const {
    auto fail = [](const std::string& msg) {
      throw std::invalid_argument("config: " + msg);
    };
    if (T < 1) fail("T must be >= 1");
    if (H < 1) fail("H must be >= 1");
    if (R_max <= 0) fail("R_max must be positive");
    if (gamma_c <= 0 || gamma_d <= 0) fail("charge/discharge caps must be positive");
    if (!(beta_c > 0 && beta_c < 1)) fail("beta_c must lie in (0,1)");
    if (!(beta_d > 0 && beta_d < 1)) fail("beta_d must lie in (0,1)");
    if (R0 < 0 || R0 > R_max) fail("R0 must lie in [0, R_max]");
    if (C_penalty <= 0) fail("C_penalty must be positive");
    if (!(P_min < P_max)) fail("P_min must be < P_max");
    if (sigma_p < 0) fail("sigma_p must be >= 0");
    if (!(rho_cross > 0 && rho_cross < 1)) fail("rho_cross must lie in (0,1)");
    if (sigma_E < 0) fail("sigma_E must be >= 0");
    if (G_min < 0 || G_max < G_min) fail("grid clamps need 0 <= G_min <= G_max");
    for (double s : sigma_f_grid)
      if (s < 0) fail("sigma_f values must be >= 0");
    if (sigma_f_grid.empty()) fail("sigma_f_grid must not be empty");
    if (variants.empty()) fail("variants must not be empty");
    if (N < 1) fail("N must be >= 1");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (n_eval_paths < 2) fail("n_eval_paths must be >= 2");
    if (eta <= 0) fail("eta must be positive");
    if (adagrad_eps <= 0) fail("adagrad_eps must be positive");
    if (checkpoint_every < 1) fail("checkpoint_every must be >= 1");
  }
};

}  // namespace cfa
