#include "qhhg/tdse.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qhhg/fft.hpp"

namespace qhhg {

namespace {
constexpr double kPi = std::numbers::pi;

Eigen::ArrayXd momentum_grid(const Grid& grid) {
    const int n = grid.n_points;
    const double dk = 2.0 * kPi / (grid.dx * n);
    Eigen::ArrayXd k(n);
    for (int j = 0; j < n; ++j) {
        const int j_shift = (j < (n + 1) / 2) ? j : j - n;
        k(j) = dk * j_shift;
    }
    return k;
}

Eigen::ArrayXd soft_coulomb(const Eigen::ArrayXd& z, double a) {
    return -1.0 / (z.square() + a * a).sqrt();
}

Eigen::ArrayXd soft_coulomb_force_term(const Eigen::ArrayXd& z, double a) {
    // dV/dz for V = -(z^2+a^2)^(-1/2)
    return z / (z.square() + a * a).pow(1.5);
}

Eigen::ArrayXd absorber_mask(const Grid& grid, const AbsorberSpec& spec) {
    Eigen::ArrayXd mask = Eigen::ArrayXd::Ones(grid.n_points);
    if (!spec.enabled || spec.fraction <= 0.0) return mask;
    const double z_abs = grid.x_max * (1.0 - spec.fraction);
    const double width = grid.x_max - z_abs;
    const Eigen::ArrayXd z = grid.points();
    for (int i = 0; i < grid.n_points; ++i) {
        const double az = std::abs(z(i));
        if (az > z_abs) {
            const double xi = std::min((az - z_abs) / width, 1.0);
            mask(i) = std::pow(std::cos(0.5 * kPi * xi), spec.exponent);
        }
    }
    return mask;
}

double spectral_energy(const Eigen::VectorXcd& psi, const Eigen::ArrayXd& kinetic,
                       const Eigen::ArrayXd& potential, double dx, Fft& fft) {
    const int n = static_cast<int>(psi.size());
    const double n2 = psi.squaredNorm() * dx;
    Eigen::VectorXcd phik = psi;
    fft.forward_inplace(phik.data());
    // Unitary-normalized momentum amplitudes: divide by sqrt(N), measure dx.
    const double norm_k = dx / static_cast<double>(n);
    const double t_kin = (phik.array().abs2() * kinetic).sum() * norm_k;
    const double v_pot = (psi.array().abs2() * potential).sum() * dx;
    return (t_kin + v_pot) / n2;
}
}  // namespace

double position_expectation(const Wavefunction& psi) {
    const Eigen::ArrayXd z = psi.grid.points();
    const double n2 = psi.norm_squared();
    return (psi.psi.array().abs2() * z).sum() * psi.grid.dx / n2;
}

double energy_expectation(const Wavefunction& psi, double a_soft) {
    const Eigen::ArrayXd z = psi.grid.points();
    const Eigen::ArrayXd v = soft_coulomb(z, a_soft);
    const Eigen::ArrayXd k = momentum_grid(psi.grid);
    const Eigen::ArrayXd kin = 0.5 * k.square();
    Fft fft(psi.grid.n_points);
    Eigen::VectorXcd work = psi.psi;
    return spectral_energy(work, kin, v, psi.grid.dx, fft);
}

SoftCoulombAtom ground_state(const Grid& grid, double a_soft, const GroundStateOptions& opts) {
    if (a_soft <= 0.0) throw std::invalid_argument("ground_state: softening length must be > 0");

    const int n = grid.n_points;
    const Eigen::ArrayXd z = grid.points();
    const Eigen::ArrayXd v = soft_coulomb(z, a_soft);
    const Eigen::ArrayXd k = momentum_grid(grid);
    const Eigen::ArrayXd kinetic = 0.5 * k.square();
    Fft fft(n);

    // Even Gaussian seed; parity is preserved by every operator below.
    Eigen::VectorXcd psi(n);
    for (int i = 0; i < n; ++i) psi(i) = std::exp(-0.5 * z(i) * z(i));

    auto normalize = [&](Eigen::VectorXcd& p) {
        p /= std::sqrt(p.squaredNorm() * grid.dx);
    };
    normalize(psi);

    // Staged imaginary-time steps: coarse to converge fast, fine to remove the
    // Trotter bias from the reported state.
    const double stages[] = {0.5, 0.1, 0.02};
    double energy = spectral_energy(psi, kinetic, v, grid.dx, fft);
    int iterations = 0;
    for (int stage = 0; stage < 3; ++stage) {
        const double dtau = stages[stage];
        const Eigen::ArrayXd decay_v_half = (-0.5 * dtau * v).exp();
        const Eigen::ArrayXd decay_k = (-dtau * kinetic).exp();
        const int stage_min = (stage < 2) ? 300 : 0;
        int stage_iter = 0;
        while (true) {
            psi.array() *= decay_v_half;
            fft.forward_inplace(psi.data());
            psi.array() *= decay_k;
            fft.backward_inplace(psi.data());
            psi /= static_cast<double>(n);
            psi.array() *= decay_v_half;
            normalize(psi);
            ++iterations;
            ++stage_iter;

            const double e_new = spectral_energy(psi, kinetic, v, grid.dx, fft);
            const double de = std::abs(e_new - energy);
            energy = e_new;
            if (stage < 2) {
                if (stage_iter >= stage_min) break;
            } else {
                if (de < opts.energy_tol) break;
                if (iterations >= opts.max_iterations)
                    throw std::runtime_error(
                        "ground_state: imaginary-time iteration did not converge; "
                        "last energy change " + std::to_string(de));
            }
        }
    }

    SoftCoulombAtom atom;
    atom.a_soft = a_soft;
    atom.grid = grid;
    atom.ground_state = Wavefunction(grid, psi);
    atom.ground_energy = energy;
    atom.boundary_amplitude = std::max(std::abs(psi(0)), std::abs(psi(n - 1)));
    if (atom.boundary_amplitude > opts.boundary_tol)
        throw std::runtime_error(
            "ground_state: wavefunction does not decay at the grid boundary (|psi| = " +
            std::to_string(atom.boundary_amplitude) + "); enlarge the grid");
    return atom;
}

PropagationResult propagate(const SoftCoulombAtom& atom, const ClassicalField& field,
                            const AbsorberSpec& absorber) {
    const Grid& grid = atom.grid;
    const int n = grid.n_points;
    const int n_samples = static_cast<int>(field.times.size());
    if (n_samples < 2) throw std::invalid_argument("propagate: field must carry >= 2 samples");
    const double dt = field.dt;

    const Eigen::ArrayXd z = grid.points();
    const Eigen::ArrayXd v = soft_coulomb(z, atom.a_soft);
    const Eigen::ArrayXd dv = soft_coulomb_force_term(z, atom.a_soft);
    const Eigen::ArrayXd k = momentum_grid(grid);
    const Eigen::ArrayXd kinetic = 0.5 * k.square();
    const Eigen::ArrayXd mask = absorber_mask(grid, absorber);
    const bool masked = absorber.enabled && absorber.fraction > 0.0;
    Fft fft(n);

    // Kinetic full-step phase (fixed), potential phases assembled per step.
    const Eigen::ArrayXcd kin_phase =
        (Complex(0.0, -dt) * kinetic).exp() / static_cast<double>(n);

    Eigen::VectorXcd psi = atom.ground_state.psi;

    DipoleRecord rec;
    rec.times = field.times;
    rec.alpha = field.alpha;
    rec.dt = dt;
    rec.accel.resize(n_samples);
    rec.position.resize(n_samples);
    rec.norm_history.resize(n_samples);

    Eigen::ArrayXd density(n);
    auto record_sample = [&](int idx) {
        density = psi.array().abs2();
        const double n2 = density.sum() * grid.dx;
        rec.norm_history(idx) = n2;
        rec.accel(idx) = -(density * dv).sum() * grid.dx / n2 - field.efield(idx);
        rec.position(idx) = (density * z).sum() * grid.dx / n2;
        if (n2 > 1.0 + 1e-6)
            throw std::runtime_error(
                "propagate: norm grew beyond tolerance (dt = " + std::to_string(dt) +
                ", dx = " + std::to_string(grid.dx) + ")");
    };

    record_sample(0);
    for (int step = 0; step < n_samples - 1; ++step) {
        const double e_mid = 0.5 * (field.efield(step) + field.efield(step + 1));
        const Eigen::ArrayXcd pot_half = (Complex(0.0, -0.5 * dt) * (v + e_mid * z)).exp();
        psi.array() *= pot_half;
        fft.forward_inplace(psi.data());
        psi.array() *= kin_phase;
        fft.backward_inplace(psi.data());
        psi.array() *= pot_half;
        if (masked) psi.array() *= mask;
        record_sample(step + 1);
    }

    PropagationResult out;
    out.record = std::move(rec);
    out.final_state = Wavefunction(grid, std::move(psi));
    out.absorbed_norm = 1.0 - out.record.norm_history(n_samples - 1);
    return out;
}

Complex final_overlap(const PropagationResult& a, const PropagationResult& b) {
    if (a.final_state.grid != b.final_state.grid)
        throw std::invalid_argument("final_overlap: grids differ");
    const auto& ta = a.record.times;
    const auto& tb = b.record.times;
    if (ta.size() != tb.size() || ta(0) != tb(0) ||
        ta(ta.size() - 1) != tb(tb.size() - 1))
        throw std::invalid_argument("final_overlap: time spans differ");
    return inner_product(b.final_state, a.final_state);
}

}  // namespace qhhg
