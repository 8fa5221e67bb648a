#pragma once

// Physical parameters, drive profiles and the cavity displacement D(tau).
//
// Units: the cavity decay rate kappa is the unit of frequency and 1/kappa the
// unit of time. Quadratures follow x = (a + a^dag)/sqrt(2),
// p = -i (a - a^dag)/sqrt(2), so the vacuum variance is 1/2.

#include <complex>
#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace optoent {

using Complex = std::complex<double>;

struct SystemParams {
  double g = 1e-6;         // optomechanical coupling
  double kappa = 1.0;      // cavity decay rate
  double gamma_m = 2.5e-7; // mechanical decay rate
  double omega_m = 2.5;    // mechanical frequency
  double delta0 = -2.5;    // drive detuning omega_c - omega_0
  double n_m = 0.0;        // initial mechanical thermal occupation
  std::optional<double> n_th;  // mechanical reservoir occupation, defaults to n_m
  double n_c = 0.0;        // optical reservoir occupation

  double reservoir_occupation() const { return n_th.value_or(n_m); }

  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  // Non-fatal diagnostics, e.g. a quality factor too low for the white-noise
  // mechanical reservoir.
  std::vector<std::string> warnings() const;
};

struct CwDrive {
  double amplitude = 0.0;
};

// E(t) = amplitude * exp(-width^2 t^2), evaluated for t >= 0 only.
struct GaussianPulse {
  double amplitude = 0.0;
  double width = 1.0;
};

using DriveProfile = std::variant<CwDrive, GaussianPulse>;

void validate(const DriveProfile& drive);

double drive_amplitude(const DriveProfile& drive, double t);

double peak_amplitude(const DriveProfile& drive);

/// Cavity displacement
///   D(tau) = \int_0^tau dt' E(t') e^{i delta0 t'} e^{-kappa (tau - t') / 2}.
///
/// The outer evolution time drops out once the noise-commutator kernel is
/// combined with the doubly decayed drive term, so D depends on tau only.
/// CW drives use the closed form, pulses a composite Gauss-Legendre rule
/// refined until two successive panel counts agree to 1e-9 relative.
Complex eval_displacement(const SystemParams& params, const DriveProfile& drive, double tau);

/// D at tau_k = k * step for k = 0..intervals. Pulses are advanced with the
/// exact one-step recursion D(tau + h) = e^{-kappa h/2} D(tau) + (segment integral).
std::vector<Complex> displacement_on_grid(const SystemParams& params, const DriveProfile& drive,
                                          double step, std::size_t intervals);

// D at start + k * step for k = 0..intervals.
std::vector<Complex> displacement_on_grid(const SystemParams& params, const DriveProfile& drive,
                                          double start, double step, std::size_t intervals);

}  // namespace optoent
