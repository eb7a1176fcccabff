#include "qhhg/pulse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qhhg/units.hpp"

namespace qhhg {

namespace {
constexpr double kPi = std::numbers::pi;

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

// Shared implementation: envelope normalization integral with either the exact
// 1/omega weight or 1/omega0. Works in scaled units (omega0 = 1), where the
// result depends only on the cycle counts.
double norm_integral_impl(int n_ramp, int n_flat, bool carrier_denominator) {
    if (n_ramp < 1) throw std::invalid_argument("normalization_integral: n_ramp must be >= 1");
    if (n_flat < 0) throw std::invalid_argument("normalization_integral: n_flat must be >= 0");

    const double omega0 = 1.0;
    const double period = 2.0 * kPi;
    const double t_half = (n_ramp + 0.5 * n_flat) * period;
    const int samples_per_cycle = 1024;
    const int n_support = samples_per_cycle * (2 * n_ramp + n_flat);
    const int n_fft = next_pow2(32 * n_support);
    const double dt = 2.0 * t_half / n_support;
    const double t0 = -t_half;

    const double t_flat = 0.5 * n_flat * period;
    const double t_ramp = n_ramp * period;
    auto envelope = [&](double t) {
        const double at = std::abs(t);
        if (at <= t_flat) return 1.0;
        if (at <= t_ramp + t_flat) return 1.0 - (at - t_flat) / t_ramp;
        return 0.0;
    };

    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n_fft);
    for (int k = 0; k < n_support; ++k) {
        const double t = t0 + k * dt;
        g(k) = envelope(t) * std::exp(Complex(0.0, -omega0 * t));
    }

    PositiveSpectrum spec = positive_unitary_spectrum(t0, dt, g);
    const double omega_cut = 8.0 * omega0;
    double integral = 0.0;
    double prev = 0.0;
    for (int j = 0; j < spec.omega.size(); ++j) {
        const double w = spec.omega(j);
        if (w > omega_cut) break;
        const double denom = carrier_denominator ? omega0 : w;
        const double f = std::norm(spec.value(j)) / denom;
        if (j > 0) integral += 0.5 * (prev + f) * spec.domega;
        prev = f;
    }
    return 0.25 * omega0 * omega0 * integral;
}
}  // namespace

double flat_top_envelope(double t_au, const PulseMode& mode) {
    const double t_flat = 0.5 * mode.n_flat * mode.period_au;
    const double t_ramp = mode.n_ramp * mode.period_au;
    const double at = std::abs(t_au);
    if (at <= t_flat) return 1.0;
    if (at < t_ramp + t_flat) {
        const double v = 1.0 - (at - t_flat) / t_ramp;
        // Samples within rounding of the support edge must come out exactly 0.
        return (v < 1e-12) ? 0.0 : v;
    }
    return 0.0;
}

double normalization_integral(int n_ramp, int n_flat) {
    return norm_integral_impl(n_ramp, n_flat, false);
}

double normalization_integral_carrier_denominator(int n_ramp, int n_flat) {
    return norm_integral_impl(n_ramp, n_flat, true);
}

PulseMode build_mode(double lambda0_m, int n_ramp, int n_flat, double area_m2) {
    if (lambda0_m <= 0.0) throw std::invalid_argument("build_mode: wavelength must be positive");
    if (area_m2 <= 0.0) throw std::invalid_argument("build_mode: area must be positive");

    PulseMode mode;
    mode.lambda0_m = lambda0_m;
    mode.n_ramp = n_ramp;
    mode.n_flat = n_flat;
    mode.area_m2 = area_m2;

    const double lambda_au = lambda0_m / constants::bohr_m;
    mode.omega0_au = 2.0 * kPi * constants::c_au / lambda_au;
    mode.period_au = 2.0 * kPi / mode.omega0_au;

    mode.norm_integral = normalization_integral(n_ramp, n_flat);
    mode.effective_cycles = (2.0 / kPi) * mode.norm_integral;
    mode.v_eff_m3 = mode.effective_cycles * area_m2 * lambda0_m;

    const double omega0_si = 2.0 * kPi * constants::c_SI / lambda0_m;
    mode.e1p_v_per_m =
        std::sqrt(constants::hbar_SI * omega0_si / (2.0 * constants::eps0_SI * mode.v_eff_m3));
    mode.e1p_au = mode.e1p_v_per_m / constants::au_efield_V_per_m;
    const double i1p_w_m2 = constants::c_SI * constants::hbar_SI * omega0_si / mode.v_eff_m3;
    mode.i1p_w_cm2 = i1p_w_m2 * 1e-4;
    return mode;
}

double alpha_for_peak_intensity(const PulseMode& mode, double intensity_w_cm2) {
    if (intensity_w_cm2 < 0.0)
        throw std::invalid_argument("alpha_for_peak_intensity: intensity must be >= 0");
    return std::sqrt(intensity_w_cm2 / mode.i1p_w_cm2);
}

ClassicalField classical_field(const PulseMode& mode, Complex alpha, const Eigen::ArrayXd& times) {
    const int n = static_cast<int>(times.size());
    if (n < 2) throw std::invalid_argument("classical_field: need at least two samples");
    const double dt = times(1) - times(0);
    for (int k = 1; k < n; ++k) {
        if (std::abs((times(k) - times(k - 1)) - dt) > 1e-9 * std::abs(dt))
            throw std::invalid_argument("classical_field: time samples must be uniform");
    }

    ClassicalField field;
    field.times = times;
    field.alpha = alpha;
    field.dt = dt;
    field.efield.resize(n);
    const double amp = 2.0 * mode.e1p_au * std::abs(alpha);
    const double phase0 = std::arg(alpha);
    for (int k = 0; k < n; ++k) {
        const double t = times(k);
        field.efield(k) =
            amp * flat_top_envelope(t, mode) * std::cos(mode.omega0_au * t - phase0 + 0.5 * kPi);
    }
    return field;
}

ClassicalField classical_field(const PulseMode& mode, Complex alpha, double t0, double dt, int n) {
    Eigen::ArrayXd times = t0 + dt * Eigen::ArrayXd::LinSpaced(n, 0, n - 1);
    return classical_field(mode, alpha, times);
}

Eigen::VectorXcd mode_samples(const PulseMode& mode, double t0, double dt, int n) {
    Eigen::VectorXcd g(n);
    const Complex minus_i(0.0, -1.0);
    for (int k = 0; k < n; ++k) {
        const double t = t0 + k * dt;
        g(k) = minus_i * mode.e1p_au * flat_top_envelope(t, mode) *
               std::exp(Complex(0.0, -mode.omega0_au * t));
    }
    return g;
}

Eigen::VectorXcd mode_samples_projected(const PulseMode& mode, double t0, double dt, int n) {
    return project_positive_frequency(mode_samples(mode, t0, dt, n));
}

ClassicalField classical_field_projected(const PulseMode& mode, Complex alpha,
                                         double t0, double dt, int n) {
    const Eigen::VectorXcd gp = mode_samples_projected(mode, t0, dt, n);
    ClassicalField field;
    field.times = t0 + dt * Eigen::ArrayXd::LinSpaced(n, 0, n - 1);
    field.alpha = alpha;
    field.dt = dt;
    field.efield.resize(n);
    for (int k = 0; k < n; ++k) field.efield(k) = 2.0 * std::real(alpha * gp(k));
    return field;
}

PositiveSpectrum field_spectrum(const ClassicalField& field) {
    Eigen::VectorXcd samples = field.efield.cast<Complex>().matrix();
    return positive_unitary_spectrum(field.times(0), field.dt, samples);
}

}  // namespace qhhg
