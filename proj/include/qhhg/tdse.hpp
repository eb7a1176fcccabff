#ifndef QHHG_TDSE_HPP
#define QHHG_TDSE_HPP

#include <Eigen/Dense>
#include <string>

#include "qhhg/grid.hpp"
#include "qhhg/pulse.hpp"

namespace qhhg {

// 1D single-active-electron model atom, V(z) = -1/sqrt(z^2 + a^2).
struct SoftCoulombAtom {
    double a_soft = 0.0;       // softening length (bohr)
    Grid grid;
    Wavefunction ground_state;
    double ground_energy = 0.0;  // Hartree
    double boundary_amplitude = 0.0;
};

struct GroundStateOptions {
    double energy_tol = 1e-12;   // stop when the per-step energy change is below this
    int max_iterations = 200000;
    double boundary_tol = 1e-8;  // required |psi| decay at the grid edge
};

// Lowest eigenstate via imaginary-time propagation with the same split-step
// kernel as the real-time solver.
SoftCoulombAtom ground_state(const Grid& grid, double a_soft,
                             const GroundStateOptions& opts = {});

// Boundary mask applied once per step over the outer fraction of the grid.
struct AbsorberSpec {
    bool enabled = true;
    double fraction = 0.1;    // of the half-width, each side
    double exponent = 0.125;  // cos^exponent profile
};

struct DipoleRecord {
    Eigen::ArrayXd times;         // au, uniform
    Eigen::ArrayXd accel;         // <d..>(t), au
    Eigen::ArrayXd position;      // <d>(t), au (dipole route, for cross-checks)
    Eigen::ArrayXd norm_history;  // surviving norm^2 at each sample
    Complex alpha{0.0, 0.0};
    double dt = 0.0;
};

struct PropagationResult {
    DipoleRecord record;
    Wavefunction final_state;
    double absorbed_norm = 0.0;  // 1 - final norm^2
};

// Propagate the ground state under the sampled classical field. The field's
// time grid is the record grid; steps use the averaged field between adjacent
// samples (second-order Strang splitting). The dipole acceleration is recorded
// at every sample via Ehrenfest: accel = -<dV/dz> - E(t) for the interaction
// +z E(t) used here (one global sign convention; see pulse.hpp).
PropagationResult propagate(const SoftCoulombAtom& atom, const ClassicalField& field,
                            const AbsorberSpec& absorber);

// <phi_b | phi_a> of the retained final states. Requires matching grids and
// time spans.
Complex final_overlap(const PropagationResult& a, const PropagationResult& b);

// Expectation values used by tests and diagnostics.
double position_expectation(const Wavefunction& psi);
double energy_expectation(const Wavefunction& psi, double a_soft);

}  // namespace qhhg

#endif  // QHHG_TDSE_HPP
