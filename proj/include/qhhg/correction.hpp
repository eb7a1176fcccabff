#ifndef QHHG_CORRECTION_HPP
#define QHHG_CORRECTION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "qhhg/fft.hpp"
#include "qhhg/spectrum.hpp"

namespace qhhg {

// Exponent from the radiated-field mismatch between the two branches:
//   (1/(3 pi c^3)) Int w^3 [2 d_a(w) d_b*(w) - |d_a|^2 - |d_b|^2] dw
// in atomic units (the 1/(12 pi^2 hbar c^3 eps0) of the SI form with
// eps0 = 1/(4 pi)). Real part is -(1/(3 pi c^3)) Int w^3 |d_a - d_b|^2 <= 0.
// If tail_ratio_out is given it receives the endpoint-to-peak integrand ratio
// (values above ~1e-8 mean the axis truncates the integral).
Complex radiative_overlap_exponent(const SpectralDipole& da, const SpectralDipole& db,
                                   double* tail_ratio_out = nullptr);

// Exponent from the interference of the drive with the differential dipole
// response:
//   (2i/sqrt(2 pi)) Int_0^inf [dE+(w) d_b*(w) + dE+*(w) d_a(w)] dw,
// dE+ = (E_a+ - E_b+)/2 on the dipoles' frequency axis. This is the form that
// cancels the first-order phase of <phi_b|phi_a>; the published layout of the
// same term (kept below for the consistency test) does not. Field and dipole
// spectra must share one axis; both use the conventions of SpectralDipole.
Complex drive_overlap_exponent(const PositiveSpectrum& field_a, const PositiveSpectrum& field_b,
                               const SpectralDipole& da, const SpectralDipole& db);

// Literal transcription of the published form,
//   (1/sqrt(2 pi)) Int [E_a+*(w)(d_b - d_a) - E_b+(w)(d_b* - d_a*)] dw.
// Retained only so tests can document why the re-derived form above is used.
Complex drive_overlap_exponent_printed(const PositiveSpectrum& field_a,
                                       const PositiveSpectrum& field_b,
                                       const SpectralDipole& da, const SpectralDipole& db);

struct CorrectionInputs {
    Complex alpha_m{0.0, 0.0};
    Complex delta_alpha{0.0, 0.0};
    const SpectralDipole* dipole_alpha = nullptr;  // alpha = alpha_m + delta
    const SpectralDipole* dipole_beta = nullptr;   // beta  = alpha_m - delta
    const SpectralDipole* dipole_mean = nullptr;
    // Dipole-route transforms for the drive-interference exponent (see
    // dipole_route_spectrum); the windowed acceleration-route spectra above
    // are used when these are absent.
    const SpectralDipole* dipole_alpha_drive = nullptr;
    const SpectralDipole* dipole_beta_drive = nullptr;
    const PositiveSpectrum* field_alpha = nullptr;
    const PositiveSpectrum* field_beta = nullptr;
    Complex overlap{0.0, 0.0};  // <phi_beta | phi_alpha>
};

// f_ov = <phi_beta|phi_alpha> e^{t1 + t2}. Throws if |t1 + t2| > 50, which can
// only happen through an upstream bug.
Complex overlap_factor(const CorrectionInputs& in);
Complex overlap_factor(Complex overlap, Complex t1, Complex t2);

// Frequency-resolved factor f(w) = d_a(w) d_b*(w) / |d_m(w)|^2 * f_ov.
// Bins where |d_m|^2 < denom_floor are reported as exactly 1 and flagged in
// masked_out ("spectral-minimum, unreliable"); bins below the dipole's
// omega_min are likewise flagged.
Eigen::VectorXcd mode_correction(const CorrectionInputs& in, double denom_floor,
                                 std::vector<std::uint8_t>* masked_out = nullptr);

// Absolute floor for the ratio denominator: rel times the median of |d_m|^2
// over [omega_lo, omega_hi].
double denominator_floor(const SpectralDipole& dm, double omega_lo, double omega_hi, double rel);

// Per-bin reliability mask for the ratio: a bin is masked when |d_m|^2 sits
// more than local_db below its neighborhood maximum (window +-halo_omega) or
// below the absolute floor. Minima flanks and the suppressed even-harmonic
// bands are excluded this way; the survivors are the harmonic-peak structures
// the ratio is reliable on.
std::vector<std::uint8_t> ratio_mask(const SpectralDipole& dm, double abs_floor,
                                     double local_db, double halo_omega);

// Map of f(w, delta_alpha) over a real offset grid, plus f_ov per offset.
struct CorrectionMap {
    Eigen::ArrayXd omegas;
    Eigen::ArrayXd delta_alphas;
    Eigen::MatrixXcd f_values;  // n_omega x n_delta
    Eigen::VectorXcd f_ov;      // per delta
    std::vector<std::uint8_t> masked;  // per omega
    Complex alpha_m{0.0, 0.0};
    double denom_floor = 0.0;
};

// Node set for Int d^2(delta) e^{-|delta|^2}/pi f(delta): tensor Gauss-Hermite
// over (Re delta, Im delta); weights sum to 1.
struct GaussianNode {
    Complex delta;
    double weight;
};
std::vector<GaussianNode> gaussian_correction_nodes(int quad_order);

// C(w) = sum_i weight_i f_i(w) for rows evaluated at the node offsets.
Eigen::VectorXcd gaussian_weighted_correction(const std::vector<Eigen::VectorXcd>& f_rows,
                                              const std::vector<GaussianNode>& nodes);

}  // namespace qhhg

#endif  // QHHG_CORRECTION_HPP
