#include "qhhg/spectrum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qhhg/units.hpp"

namespace qhhg {

namespace {
constexpr double kPi = std::numbers::pi;
}

DipoleRecord temporal_window(const DipoleRecord& rec, double pulse_end_au, double taper_au) {
    const int n = static_cast<int>(rec.times.size());
    if (taper_au < 0.0) throw std::invalid_argument("temporal_window: taper must be >= 0");
    const double t_last = rec.times(n - 1);
    if (pulse_end_au + taper_au > t_last + 0.5 * rec.dt)
        throw std::invalid_argument("temporal_window: taper does not fit inside the record tail");

    DipoleRecord out = rec;
    for (int i = 0; i < n; ++i) {
        const double t = rec.times(i);
        if (t <= pulse_end_au) continue;
        if (taper_au > 0.0 && t < pulse_end_au + taper_au) {
            const double xi = (t - pulse_end_au) / taper_au;
            const double c = std::cos(0.5 * kPi * xi);
            out.accel(i) *= c * c;
        } else {
            out.accel(i) = 0.0;
        }
    }
    return out;
}

DipoleRecord temporal_window(const DipoleRecord& rec, const PulseMode& mode, double taper_cycles) {
    return temporal_window(rec, mode.half_support(), taper_cycles * mode.period_au);
}

SpectralDipole spectral_dipole(const DipoleRecord& rec, double omega_min, int pad_to) {
    if (omega_min <= 0.0)
        throw std::invalid_argument("spectral_dipole: omega_min must be positive");
    const int n = static_cast<int>(rec.times.size());
    int n_fft = (pad_to > 0) ? pad_to : n;
    if (n_fft < n)
        throw std::invalid_argument("spectral_dipole: pad length shorter than record");

    Eigen::VectorXcd samples = Eigen::VectorXcd::Zero(n_fft);
    for (int i = 0; i < n; ++i) samples(i) = Complex(rec.accel(i), 0.0);

    PositiveSpectrum accel = positive_unitary_spectrum(rec.times(0), rec.dt, samples);

    SpectralDipole out;
    out.omegas = accel.omega;
    out.accel_spectrum = accel.value;
    out.domega = accel.domega;
    out.omega_min = omega_min;
    out.alpha = rec.alpha;
    out.value.resize(accel.value.size());
    const double root_2pi = std::sqrt(2.0 * kPi);
    for (int j = 0; j < accel.value.size(); ++j) {
        const double w = accel.omega(j);
        out.value(j) = (w >= omega_min)
                           ? -root_2pi * accel.value(j) / (w * w)
                           : Complex(0.0, 0.0);
    }
    return out;
}

SpectralDipole dipole_route_spectrum(const DipoleRecord& rec, int pad_to) {
    const int n = static_cast<int>(rec.times.size());
    int n_fft = (pad_to > 0) ? pad_to : n;
    if (n_fft < n)
        throw std::invalid_argument("dipole_route_spectrum: pad length shorter than record");
    if (rec.position.size() != n)
        throw std::invalid_argument("dipole_route_spectrum: record carries no dipole samples");

    Eigen::VectorXcd samples = Eigen::VectorXcd::Zero(n_fft);
    for (int i = 0; i < n; ++i) samples(i) = Complex(rec.position(i), 0.0);
    PositiveSpectrum z = positive_unitary_spectrum(rec.times(0), rec.dt, samples);

    SpectralDipole out;
    out.omegas = z.omega;
    out.value = std::sqrt(2.0 * kPi) * z.value;
    out.accel_spectrum = Eigen::VectorXcd::Zero(z.value.size());
    out.domega = z.domega;
    out.omega_min = 0.0;
    out.alpha = rec.alpha;
    out.window_meta = "dipole route, unwindowed";
    return out;
}

namespace {
SpectrumResult assemble_impl(const std::vector<SpectralDipole>& dipoles,
                             const RadialQuadrature& quad,
                             const Eigen::VectorXcd* correction,
                             const std::string& state_label) {
    if (dipoles.empty()) throw std::invalid_argument("assemble_spectrum: no dipoles");
    const int n_nodes = static_cast<int>(dipoles.size());
    if (n_nodes != quad.nodes.size())
        throw std::invalid_argument("assemble_spectrum: node count does not match weights");
    const auto& ref = dipoles.front();
    for (const auto& d : dipoles) {
        if (d.omegas.size() != ref.omegas.size() || d.domega != ref.domega)
            throw std::invalid_argument("assemble_spectrum: dipoles on different frequency axes");
    }
    if (correction && correction->size() != ref.omegas.size())
        throw std::invalid_argument("assemble_spectrum: correction axis mismatch");

    const int n_omega = static_cast<int>(ref.omegas.size());
    SpectrumResult res;
    res.omegas = ref.omegas;
    res.weights = quad.weights;
    res.state_label = state_label;
    res.node_densities.resize(n_omega, n_nodes);
    for (int i = 0; i < n_nodes; ++i)
        res.node_densities.col(i) = dipoles[i].value.array().abs2();

    res.spectral_density.resize(n_omega);
    const double c3 = constants::c_au * constants::c_au * constants::c_au;
    for (int j = 0; j < n_omega; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n_nodes; ++i) acc += quad.weights(i) * res.node_densities(j, i);
        if (correction) acc *= std::real((*correction)(j));
        const double w = res.omegas(j);
        res.spectral_density(j) = (2.0 / (3.0 * kPi)) * (w * w * w * w / c3) * acc;
    }
    return res;
}
}  // namespace

SpectrumResult assemble_spectrum(const std::vector<SpectralDipole>& dipoles,
                                 const RadialQuadrature& quad,
                                 const std::string& state_label) {
    return assemble_impl(dipoles, quad, nullptr, state_label);
}

SpectrumResult assemble_spectrum_corrected(const std::vector<SpectralDipole>& dipoles,
                                           const RadialQuadrature& quad,
                                           const Eigen::VectorXcd& correction,
                                           const std::string& state_label) {
    return assemble_impl(dipoles, quad, &correction, state_label);
}

}  // namespace qhhg
