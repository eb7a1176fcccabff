#include "qhhg/correction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qhhg/quadrature.hpp"
#include "qhhg/units.hpp"

namespace qhhg {

namespace {
constexpr double kPi = std::numbers::pi;

void require_shared_axis(const SpectralDipole& a, const SpectralDipole& b) {
    if (a.omegas.size() != b.omegas.size() || a.domega != b.domega)
        throw std::invalid_argument("correction: spectra on different frequency axes");
}

void require_shared_axis(const PositiveSpectrum& f, const SpectralDipole& d) {
    if (f.omega.size() != d.omegas.size() || f.domega != d.domega)
        throw std::invalid_argument("correction: field and dipole on different frequency axes");
}
}  // namespace

Complex radiative_overlap_exponent(const SpectralDipole& da, const SpectralDipole& db,
                                   double* tail_ratio_out) {
    require_shared_axis(da, db);
    const int n = static_cast<int>(da.omegas.size());
    const double c3 = constants::c_au * constants::c_au * constants::c_au;
    const double prefactor = 1.0 / (3.0 * kPi * c3);

    Complex sum(0.0, 0.0);
    double peak = 0.0;
    double last = 0.0;
    Complex prev(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        const double w = da.omegas(j);
        const Complex va = da.value(j);
        const Complex vb = db.value(j);
        const Complex cur =
            w * w * w * (2.0 * va * std::conj(vb) - std::norm(va) - std::norm(vb));
        if (j > 0) sum += 0.5 * (prev + cur) * da.domega;
        prev = cur;
        const double mag = std::abs(cur);
        peak = std::max(peak, mag);
        if (j == n - 1) last = mag;
    }
    if (tail_ratio_out) *tail_ratio_out = (peak > 0.0) ? last / peak : 0.0;
    return prefactor * sum;
}

Complex drive_overlap_exponent(const PositiveSpectrum& field_a, const PositiveSpectrum& field_b,
                               const SpectralDipole& da, const SpectralDipole& db) {
    require_shared_axis(da, db);
    require_shared_axis(field_a, da);
    require_shared_axis(field_b, db);
    const int n = static_cast<int>(da.omegas.size());

    Complex sum(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        const Complex de_plus = 0.5 * (field_a.value(j) - field_b.value(j));
        sum += de_plus * std::conj(db.value(j)) + std::conj(de_plus) * da.value(j);
    }
    sum *= da.domega;
    return Complex(0.0, 2.0 / std::sqrt(2.0 * kPi)) * sum;
}

Complex drive_overlap_exponent_printed(const PositiveSpectrum& field_a,
                                       const PositiveSpectrum& field_b,
                                       const SpectralDipole& da, const SpectralDipole& db) {
    require_shared_axis(da, db);
    require_shared_axis(field_a, da);
    require_shared_axis(field_b, db);
    const int n = static_cast<int>(da.omegas.size());

    Complex sum(0.0, 0.0);
    for (int j = 0; j < n; ++j) {
        const Complex diff = db.value(j) - da.value(j);
        sum += std::conj(field_a.value(j)) * diff - field_b.value(j) * std::conj(diff);
    }
    sum *= da.domega;
    return sum / std::sqrt(2.0 * kPi);
}

Complex overlap_factor(Complex overlap, Complex t1, Complex t2) {
    const Complex expo = t1 + t2;
    if (std::abs(expo) > 50.0)
        throw std::runtime_error("overlap_factor: exponent magnitude exceeds guard (upstream bug)");
    return overlap * std::exp(expo);
}

Complex overlap_factor(const CorrectionInputs& in) {
    if (!in.dipole_alpha || !in.dipole_beta || !in.field_alpha || !in.field_beta)
        throw std::invalid_argument("overlap_factor: missing spectra");
    const Complex t1 = radiative_overlap_exponent(*in.dipole_alpha, *in.dipole_beta);
    const SpectralDipole& da = in.dipole_alpha_drive ? *in.dipole_alpha_drive : *in.dipole_alpha;
    const SpectralDipole& db = in.dipole_beta_drive ? *in.dipole_beta_drive : *in.dipole_beta;
    const Complex t2 = drive_overlap_exponent(*in.field_alpha, *in.field_beta, da, db);
    return overlap_factor(in.overlap, t1, t2);
}

double denominator_floor(const SpectralDipole& dm, double omega_lo, double omega_hi, double rel) {
    std::vector<double> mags;
    for (int j = 0; j < dm.omegas.size(); ++j) {
        const double w = dm.omegas(j);
        if (w < omega_lo || w > omega_hi) continue;
        const double m2 = std::norm(dm.value(j));
        if (m2 > 0.0) mags.push_back(m2);
    }
    if (mags.empty()) throw std::invalid_argument("denominator_floor: empty band");
    std::nth_element(mags.begin(), mags.begin() + mags.size() / 2, mags.end());
    return rel * mags[mags.size() / 2];
}

std::vector<std::uint8_t> ratio_mask(const SpectralDipole& dm, double abs_floor,
                                     double local_db, double halo_omega) {
    const int n = static_cast<int>(dm.omegas.size());
    const int halo = std::max(1, static_cast<int>(std::llround(halo_omega / dm.domega)));
    const double rel = std::pow(10.0, -local_db / 10.0);
    Eigen::ArrayXd m2(n);
    for (int j = 0; j < n; ++j) m2(j) = std::norm(dm.value(j));

    std::vector<std::uint8_t> masked(n, 0);
    for (int j = 0; j < n; ++j) {
        const int lo = std::max(0, j - halo);
        const int hi = std::min(n - 1, j + halo);
        const double neighborhood = m2.segment(lo, hi - lo + 1).maxCoeff();
        const bool below_axis = dm.omegas(j) < dm.omega_min;
        if (below_axis || m2(j) < abs_floor || m2(j) < rel * neighborhood) masked[j] = 1;
    }
    return masked;
}

Eigen::VectorXcd mode_correction(const CorrectionInputs& in, double denom_floor,
                                 std::vector<std::uint8_t>* masked_out) {
    if (!in.dipole_alpha || !in.dipole_beta || !in.dipole_mean)
        throw std::invalid_argument("mode_correction: missing spectra");
    require_shared_axis(*in.dipole_alpha, *in.dipole_mean);
    const Complex fov = overlap_factor(in);

    const int n = static_cast<int>(in.dipole_mean->omegas.size());
    Eigen::VectorXcd f(n);
    if (masked_out) masked_out->assign(n, 0);
    for (int j = 0; j < n; ++j) {
        const double denom = std::norm(in.dipole_mean->value(j));
        const bool below_axis = in.dipole_mean->omegas(j) < in.dipole_mean->omega_min;
        if (below_axis || denom < denom_floor) {
            f(j) = Complex(1.0, 0.0);
            if (masked_out) (*masked_out)[j] = 1;
            continue;
        }
        const Complex ratio = in.dipole_alpha->value(j) * std::conj(in.dipole_beta->value(j)) / denom;
        f(j) = ratio * fov;
    }
    return f;
}

std::vector<GaussianNode> gaussian_correction_nodes(int quad_order) {
    if (quad_order < 2)
        throw std::invalid_argument("gaussian_correction_nodes: order must be >= 2");
    const QuadratureRule gh = gauss_hermite(quad_order);
    std::vector<GaussianNode> nodes;
    nodes.reserve(static_cast<size_t>(quad_order) * quad_order);
    for (int i = 0; i < quad_order; ++i) {
        for (int j = 0; j < quad_order; ++j) {
            GaussianNode node;
            node.delta = Complex(gh.nodes(i), gh.nodes(j));
            node.weight = gh.weights(i) * gh.weights(j) / kPi;
            nodes.push_back(node);
        }
    }
    return nodes;
}

Eigen::VectorXcd gaussian_weighted_correction(const std::vector<Eigen::VectorXcd>& f_rows,
                                              const std::vector<GaussianNode>& nodes) {
    if (f_rows.size() != nodes.size())
        throw std::invalid_argument("gaussian_weighted_correction: row/node count mismatch");
    if (f_rows.empty()) throw std::invalid_argument("gaussian_weighted_correction: empty");
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(f_rows.front().size());
    for (size_t i = 0; i < nodes.size(); ++i) {
        if (f_rows[i].size() != c.size())
            throw std::invalid_argument("gaussian_weighted_correction: axis mismatch");
        c += nodes[i].weight * f_rows[i];
    }
    return c;
}

}  // namespace qhhg
