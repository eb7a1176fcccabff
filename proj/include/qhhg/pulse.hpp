#ifndef QHHG_PULSE_HPP
#define QHHG_PULSE_HPP

#include <Eigen/Dense>
#include <complex>

#include "qhhg/fft.hpp"
#include "qhhg/grid.hpp"

namespace qhhg {

// Quantized temporal pulse mode: flat-top envelope with integer ramp/flat cycle
// counts, normalized so that one photon in the mode produces the single-photon
// field amplitude e1p. All derived numbers are fixed at build time.
struct PulseMode {
    double lambda0_m = 0.0;       // carrier wavelength
    double omega0_au = 0.0;       // carrier angular frequency
    double period_au = 0.0;       // optical period T = 2*pi/omega0
    int n_ramp = 0;               // ramp-on (= ramp-off) cycles
    int n_flat = 0;               // flat-top cycles
    double area_m2 = 0.0;         // transverse cross-section
    double norm_integral = 0.0;   // unitless normalization integral of the envelope
    double effective_cycles = 0;  // (2/pi) * norm_integral
    double v_eff_m3 = 0.0;        // effective quantization volume
    double e1p_v_per_m = 0.0;     // single-photon field amplitude (SI)
    double e1p_au = 0.0;          // same in atomic units
    double i1p_w_cm2 = 0.0;       // peak intensity per photon

    // Envelope support is |t| <= half_support().
    double half_support() const { return (n_ramp + 0.5 * n_flat) * period_au; }
};

// Sampled classical drive E_alpha(t) for one coherent amplitude.
struct ClassicalField {
    Eigen::ArrayXd times;   // au, uniform
    Eigen::ArrayXd efield;  // au
    Complex alpha{0.0, 0.0};
    double dt = 0.0;
};

// Piecewise-linear flat-top envelope, 1 on the flat part, linear ramps, 0 outside.
double flat_top_envelope(double t_au, const PulseMode& mode);

// Unitless envelope normalization integral I(n_ramp, n_flat). Computed from a
// dense FFT of the unit-amplitude complex pulse; depends only on cycle counts.
double normalization_integral(int n_ramp, int n_flat);

// As above, but with the frequency denominator frozen at the carrier. Equals
// n_flat + (2/3) n_ramp times pi/2 exactly; exposed for the consistency check.
double normalization_integral_carrier_denominator(int n_ramp, int n_flat);

PulseMode build_mode(double lambda0_m, int n_ramp, int n_flat, double area_m2);

// Required |alpha| so the coherent-state peak intensity matches the target.
double alpha_for_peak_intensity(const PulseMode& mode, double intensity_w_cm2);

// E(t) = 2 e1p |alpha| F(t) cos(omega0 t - arg(alpha) + pi/2).
// Sign convention: the field is g(t) alpha + c.c. with g(t) = -i e1p F(t) e^{-i omega0 t};
// the pi/2 carries the i of the mode function. One convention, used everywhere.
ClassicalField classical_field(const PulseMode& mode, Complex alpha, const Eigen::ArrayXd& times);
ClassicalField classical_field(const PulseMode& mode, Complex alpha, double t0, double dt, int n);

// Complex mode samples g(t) (per unit alpha) on the given time grid.
Eigen::VectorXcd mode_samples(const PulseMode& mode, double t0, double dt, int n);

// Strictly positive-frequency variant of the field: E(t) = 2 Re[alpha g+(t)] with
// g+ the positive-frequency projection of g on this time grid. Used where field
// and mode decomposition must agree exactly.
ClassicalField classical_field_projected(const PulseMode& mode, Complex alpha,
                                         double t0, double dt, int n);
Eigen::VectorXcd mode_samples_projected(const PulseMode& mode, double t0, double dt, int n);

// Unitary Fourier transform of the sampled field, omega > 0 part.
PositiveSpectrum field_spectrum(const ClassicalField& field);

}  // namespace qhhg

#endif  // QHHG_PULSE_HPP
