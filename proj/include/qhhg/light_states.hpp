#ifndef QHHG_LIGHT_STATES_HPP
#define QHHG_LIGHT_STATES_HPP

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "qhhg/grid.hpp"

namespace qhhg {

enum class StateKind { coherent, fock, thermal, bsv };

StateKind state_kind_from_string(const std::string& s);
std::string to_string(StateKind kind);

// Quantum state of the pulse mode at a prescribed mean photon number.
// Parameters are fixed per kind: coherent amplitude alpha0 (real, >= 0),
// Fock occupation n, thermal n_bar, squeezing r with sinh^2 r = n_bar.
struct LightState {
    StateKind kind = StateKind::coherent;
    double mean_photons = 0.0;
    Complex alpha0{0.0, 0.0};
    long long fock_n = 0;
    double squeeze_r = 0.0;
};

LightState make_coherent(double n_bar);
LightState make_fock(double n_bar);  // rounds to the nearest integer occupation
LightState make_thermal(double n_bar);
LightState make_bsv(double n_bar);
LightState make_state(StateKind kind, double n_bar);

// Analytic <b' b> for the constructed state.
double mean_photons_analytic(const LightState& state);

// Analytic Husimi intensity moment <|alpha|^2>_Q (= mean photons + 1).
double husimi_intensity_moment(const LightState& state);

// Husimi density Q(alpha) = <alpha|rho|alpha>/pi, normalized to Int Q d^2alpha = 1.
double husimi(const LightState& state, Complex alpha);

// Discretization of Int d^2alpha Q(alpha) f(|alpha|) as sum w_i f(node_i),
// with nodes in |alpha|. Valid for phase-symmetric Q; the squeezed state is
// phase-averaged over the antisqueezed quadrature (spectra of the long flat-top
// pulse are carrier-phase insensitive).
struct RadialQuadrature {
    Eigen::ArrayXd nodes;               // |alpha|
    Eigen::ArrayXd weights;             // sum to 1
    Eigen::ArrayXd intensities_w_cm2;   // i1p * node^2, if i1p was provided
    double tail_quantile = 0.0;         // probability mass beyond the last node
};

RadialQuadrature radial_quadrature(const LightState& state, int n_nodes,
                                   double i1p_w_cm2 = 0.0, double tail_quantile = 1e-6);

// Quantile of the intensity distribution s = |alpha|^2 implied by Q. Exposed
// for tests.
double intensity_quantile(const LightState& state, double p);

}  // namespace qhhg

#endif  // QHHG_LIGHT_STATES_HPP
