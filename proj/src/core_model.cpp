#include "optoent/core_model.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace optoent {

namespace {

constexpr double kPulseRelTol = 1e-9;
constexpr int kMaxPanelDoublings = 12;

using GaussRule = boost::math::quadrature::gauss<double, 8>;

void require(bool ok, const char* field, const char* what) {
  if (!ok) {
    std::ostringstream msg;
    msg << "invalid parameter '" << field << "': " << what;
    throw std::invalid_argument(msg.str());
  }
}

// Integrand of D(tau) for a fixed upper limit.
struct DisplacementIntegrand {
  const SystemParams& params;
  const DriveProfile& drive;
  double tau;

  Complex operator()(double s) const {
    const double envelope = drive_amplitude(drive, s) * std::exp(-0.5 * params.kappa * (tau - s));
    return envelope * std::polar(1.0, params.delta0 * s);
  }
};

// Eight-point Gauss-Legendre on [a, b]. The boost rule stores only the
// non-negative abscissae, so the symmetric pairs are expanded here.
template <typename F>
Complex gauss_panel(const F& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  const auto& x = GaussRule::abscissa();
  const auto& w = GaussRule::weights();
  Complex sum{0.0, 0.0};
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      sum += w[i] * f(mid);
    } else {
      sum += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
  }
  return half * sum;
}

template <typename F>
Complex composite_gauss(const F& f, double a, double b, std::size_t panels) {
  const double width = (b - a) / static_cast<double>(panels);
  Complex sum{0.0, 0.0};
  for (std::size_t k = 0; k < panels; ++k) {
    sum += gauss_panel(f, a + k * width, a + (k + 1) * width);
  }
  return sum;
}

Complex cw_displacement(const SystemParams& p, double amplitude, double tau) {
  const Complex denom{0.5 * p.kappa, p.delta0};
  return amplitude * (std::polar(1.0, p.delta0 * tau) - std::exp(-0.5 * p.kappa * tau)) / denom;
}

Complex pulse_displacement(const SystemParams& p, const GaussianPulse& pulse, const DriveProfile& drive,
                           double tau) {
  if (tau <= 0.0 || pulse.amplitude == 0.0) return {0.0, 0.0};
  const double panel = std::min(1.0 / p.kappa, 1.0 / pulse.width) / 8.0;
  std::size_t panels = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(tau / panel)));
  const DisplacementIntegrand f{p, drive, tau};
  Complex coarse = composite_gauss(f, 0.0, tau, panels);
  for (int i = 0; i < kMaxPanelDoublings; ++i) {
    panels *= 2;
    const Complex fine = composite_gauss(f, 0.0, tau, panels);
    if (std::abs(fine - coarse) <= kPulseRelTol * std::abs(fine) + 1e-300) return fine;
    coarse = fine;
  }
  return coarse;
}

}  // namespace

void SystemParams::validate() const {
  require(std::isfinite(kappa) && kappa > 0.0, "kappa", "must be positive");
  require(std::isfinite(omega_m) && omega_m > 0.0, "omega_m", "must be positive");
  require(std::isfinite(gamma_m) && gamma_m > 0.0, "gamma_m", "must be positive");
  require(std::isfinite(g) && g >= 0.0, "g", "must be non-negative");
  require(std::isfinite(delta0), "delta0", "must be finite");
  require(std::isfinite(n_m) && n_m >= 0.0, "n_m", "must be non-negative");
  require(std::isfinite(reservoir_occupation()) && reservoir_occupation() >= 0.0, "n_th",
          "must be non-negative");
  require(std::isfinite(n_c) && n_c >= 0.0, "n_c", "must be non-negative");
}

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> out;
  if (omega_m / gamma_m < 100.0) {
    std::ostringstream msg;
    msg << "omega_m/gamma_m = " << omega_m / gamma_m
        << " < 100: the white-noise mechanical reservoir is a poor approximation";
    out.push_back(msg.str());
  }
  return out;
}

void validate(const DriveProfile& drive) {
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        require(std::isfinite(d.amplitude) && d.amplitude >= 0.0, "E", "must be non-negative");
        if constexpr (std::is_same_v<T, GaussianPulse>) {
          require(std::isfinite(d.width) && d.width > 0.0, "pulse_width", "must be positive");
        }
      },
      drive);
}

double drive_amplitude(const DriveProfile& drive, double t) {
  return std::visit(
      [t](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, CwDrive>) {
          return d.amplitude;
        } else {
          return d.amplitude * std::exp(-d.width * d.width * t * t);
        }
      },
      drive);
}

double peak_amplitude(const DriveProfile& drive) {
  return std::visit([](const auto& d) { return d.amplitude; }, drive);
}

Complex eval_displacement(const SystemParams& params, const DriveProfile& drive, double tau) {
  if (tau < 0.0) throw std::invalid_argument("eval_displacement: tau must be non-negative");
  if (const auto* cw = std::get_if<CwDrive>(&drive)) return cw_displacement(params, cw->amplitude, tau);
  return pulse_displacement(params, std::get<GaussianPulse>(drive), drive, tau);
}

std::vector<Complex> displacement_on_grid(const SystemParams& params, const DriveProfile& drive,
                                          double step, std::size_t intervals) {
  return displacement_on_grid(params, drive, 0.0, step, intervals);
}

std::vector<Complex> displacement_on_grid(const SystemParams& params, const DriveProfile& drive,
                                          double start, double step, std::size_t intervals) {
  std::vector<Complex> out(intervals + 1);
  if (const auto* cw = std::get_if<CwDrive>(&drive)) {
    for (std::size_t k = 0; k <= intervals; ++k) {
      out[k] = cw_displacement(params, cw->amplitude, start + k * step);
    }
    return out;
  }
  const double decay = std::exp(-0.5 * params.kappa * step);
  out[0] = eval_displacement(params, drive, start);
  for (std::size_t k = 0; k < intervals; ++k) {
    const double a = start + k * step;
    const double b = start + (k + 1) * step;
    const DisplacementIntegrand f{params, drive, b};
    out[k + 1] = decay * out[k] + gauss_panel(f, a, b);
  }
  return out;
}

}  // namespace optoent
