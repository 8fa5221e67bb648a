#pragma once

// Population dynamics of a damped oscillator in a truncated Fock basis.
//
// The Lindblad channel gamma (n_th + 1) D[b] + gamma n_th D[b^dag] keeps
// diagonal states diagonal, so only the birth-death equations
//   dp_n/dt = gamma (n_th + 1) [(n + 1) p_{n+1} - n p_n]
//           + gamma n_th [n p_{n-1} - (n + 1) p_n]
// are integrated. The truncation is reflecting, so the trace is conserved.

#include <cstddef>
#include <vector>

namespace optoent {

struct FockThermalState {
  std::vector<double> populations;  // p_0 .. p_{n_max}
  double occupation = 0.0;
  double time = 0.0;
  std::size_t n_max = 0;
  bool truncation_flag = false;   // p_{n_max} > 1e-10 after all doublings
  double trace_error = 0.0;       // |sum p_n - 1|
  double ratio_spread = 0.0;      // relative spread of p_{n+1}/p_n where p_n > 1e-6 max p
};

// Geometric populations with mean n on 0..n_max, normalised on the truncated grid.
std::vector<double> thermal_populations(double n, std::size_t n_max);

// Default truncation 10 max(n_m, n_th) + 20.
std::size_t default_fock_cutoff(double n_m, double n_th);

struct RelaxOptions {
  double abs_tol = 1e-15;
  double rel_tol = 1e-12;
  double truncation_tol = 1e-10;
  int max_doublings = 6;
};

/// Evolves the thermal state of occupation n_m under a reservoir of
/// occupation n_th for time t. The cutoff is doubled while (n_max + 1) p_{n_max}
/// exceeds the truncation tolerance, at the start or the end of the run.
FockThermalState relax_occupation(double n_m, double n_th, double gamma_m, double t,
                                  const RelaxOptions& options = {});

// n_th + (n_m - n_th) exp(-rate t).
double closed_form_occupation(double n_m, double n_th, double rate, double t);

struct RelaxationProbe {
  double measured_rate = 0.0;     // least-squares slope of -ln|n(t) - n_th|
  double fit_residual = 0.0;      // max |log deviation| from the fitted line
  double gamma_m = 0.0;
  std::vector<double> times;
  std::vector<double> occupations;

  // Measured rate in units of gamma_m: 1 for e^{-gamma t}, 0.5 for e^{-gamma t/2}.
  double rate_ratio() const { return measured_rate / gamma_m; }
};

/// Samples the integrated occupation at `samples` points on (0, t_end] and
/// fits the relaxation exponent. Requires n_m != n_th.
RelaxationProbe relaxation_exponent(double n_m, double n_th, double gamma_m, double t_end,
                                    std::size_t samples = 20, const RelaxOptions& options = {});

}  // namespace optoent
