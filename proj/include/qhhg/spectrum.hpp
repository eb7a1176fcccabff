#ifndef QHHG_SPECTRUM_HPP
#define QHHG_SPECTRUM_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "qhhg/fft.hpp"
#include "qhhg/light_states.hpp"
#include "qhhg/tdse.hpp"

namespace qhhg {

// Windowed Fourier transform of one dipole record.
//
// Conventions, used consistently by the spectrum and correction modules:
//   accel_spectrum(w) = (1/sqrt(2 pi)) Int a(t) e^{+i w t} dt   (unitary)
//   value(w)          = -sqrt(2 pi) accel_spectrum(w) / w^2
// so value(w) is the plain e^{+iwt} transform of the dipole itself, the form
// the radiated-energy prefactors below expect. Frequencies below omega_min are
// stored as zero (the 1/w^2 map is singular at zero).
struct SpectralDipole {
    Eigen::ArrayXd omegas;            // > 0, uniform
    Eigen::VectorXcd value;           // dipole transform, plain convention
    Eigen::VectorXcd accel_spectrum;  // unitary transform of the acceleration
    Complex alpha{0.0, 0.0};
    double domega = 0.0;
    double omega_min = 0.0;
    std::string window_meta;
};

struct SpectrumResult {
    Eigen::ArrayXd omegas;             // au
    Eigen::ArrayXd spectral_density;   // d eps / d omega, au
    Eigen::MatrixXd node_densities;    // |d_i(w)|^2 per node (row: omega, col: node)
    Eigen::ArrayXd weights;            // quadrature weights used
    std::string state_label;
};

// Multiply the acceleration by 1 during the pulse, a cos^2 ramp to zero over
// [pulse_end, pulse_end + taper], exactly zero beyond.
DipoleRecord temporal_window(const DipoleRecord& rec, double pulse_end_au, double taper_au);
DipoleRecord temporal_window(const DipoleRecord& rec, const PulseMode& mode, double taper_cycles);

// Transform a windowed record. Optionally zero-pad to pad_to samples (>=
// record length) so several records share one frequency axis.
SpectralDipole spectral_dipole(const DipoleRecord& rec, double omega_min, int pad_to = 0);

// Dipole transform taken directly from the recorded <d>(t) (no window, no
// 1/w^2 reconstruction). The acceleration route divides out w^2 at the carrier,
// where the recorded acceleration is a deep cancellation between the binding
// force and the drive; that amplifies the splitting error by the ratio of the
// two, so drive-dipole interference integrals use this route instead.
SpectralDipole dipole_route_spectrum(const DipoleRecord& rec, int pad_to = 0);

// d eps/d omega = (2/(3 pi)) (w^4 / c^3) sum_i w_i |d_i(w)|^2 in atomic units.
// This is the free-space radiated energy density with eps0 = 1/(4 pi) folded in.
SpectrumResult assemble_spectrum(const std::vector<SpectralDipole>& dipoles,
                                 const RadialQuadrature& quad,
                                 const std::string& state_label = "");

// Same assembly with a per-frequency correction factor applied inside the sum
// (real part; the imaginary residue of the factor is quadrature noise).
SpectrumResult assemble_spectrum_corrected(const std::vector<SpectralDipole>& dipoles,
                                           const RadialQuadrature& quad,
                                           const Eigen::VectorXcd& correction,
                                           const std::string& state_label = "");

}  // namespace qhhg

#endif  // QHHG_SPECTRUM_HPP
