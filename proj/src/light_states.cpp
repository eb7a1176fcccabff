#include "qhhg/light_states.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qhhg/quadrature.hpp"

namespace qhhg {

namespace {
constexpr double kPi = std::numbers::pi;

// Scaled modified Bessel I0e(x) = e^{-x} I0(x), stable for large arguments.
double bessel_i0_scaled(double x) {
    if (x < 0.0) x = -x;
    if (x < 20.0) return std::exp(-x) * std::cyl_bessel_i(0.0, x);
    // Asymptotic series for large x.
    const double inv = 1.0 / (8.0 * x);
    const double series = 1.0 + inv * (1.0 + inv * (4.5 + inv * 37.5));
    return series / std::sqrt(2.0 * kPi * x);
}

// Radial intensity pdf p(s), s = |alpha|^2, implied by Q after phase
// integration: Int Q d^2alpha = Int p(s) ds.
double intensity_pdf(const LightState& st, double s) {
    if (s < 0.0) return 0.0;
    switch (st.kind) {
        case StateKind::thermal: {
            const double m = st.mean_photons + 1.0;
            return std::exp(-s / m) / m;
        }
        case StateKind::coherent: {
            const double n = std::norm(st.alpha0);
            // Rician radial profile in stable scaled form.
            const double x = 2.0 * std::sqrt(s * n);
            const double expo = -(std::sqrt(s) - std::sqrt(n)) * (std::sqrt(s) - std::sqrt(n));
            return bessel_i0_scaled(x) * std::exp(expo);
        }
        case StateKind::fock: {
            // Gamma(n+1) profile: s^n e^{-s} / n!.
            const double n = static_cast<double>(st.fock_n);
            if (s == 0.0) return (st.fock_n == 0) ? 1.0 : 0.0;
            return std::exp(n * std::log(s) - s - std::lgamma(n + 1.0));
        }
        case StateKind::bsv: {
            // Exact phase average of the squeezed-vacuum Q at radius sqrt(s):
            // p(s) = e^{-s} I0(s tanh r) / cosh r.
            const double t = std::tanh(st.squeeze_r);
            const double c = std::cosh(st.squeeze_r);
            // e^{-s} I0(s t) = I0e(s t) e^{s t - s}
            return bessel_i0_scaled(s * t) * std::exp(s * (t - 1.0)) / c;
        }
    }
    return 0.0;
}

// Numeric quantile table for kinds without a closed-form inverse CDF.
struct QuantileTable {
    std::vector<double> s;
    std::vector<double> cdf;

    double invert(double p) const {
        auto it = std::lower_bound(cdf.begin(), cdf.end(), p);
        if (it == cdf.begin()) return s.front();
        if (it == cdf.end()) return s.back();
        const size_t i = static_cast<size_t>(it - cdf.begin());
        const double c0 = cdf[i - 1], c1 = cdf[i];
        const double w = (c1 > c0) ? (p - c0) / (c1 - c0) : 0.0;
        return s[i - 1] + w * (s[i] - s[i - 1]);
    }
};

QuantileTable build_quantile_table(const LightState& st, double s_max) {
    const int n_grid = 200000;
    QuantileTable table;
    table.s.resize(n_grid);
    table.cdf.resize(n_grid);
    const double ds = s_max / (n_grid - 1);
    double acc = 0.0;
    double prev = intensity_pdf(st, 0.0);
    table.s[0] = 0.0;
    table.cdf[0] = 0.0;
    for (int i = 1; i < n_grid; ++i) {
        const double s = i * ds;
        const double cur = intensity_pdf(st, s);
        acc += 0.5 * (prev + cur) * ds;
        prev = cur;
        table.s[i] = s;
        table.cdf[i] = acc;
    }
    // Normalize away the residual truncation of the table itself.
    const double total = table.cdf.back();
    for (double& c : table.cdf) c /= total;
    return table;
}

double large_n_quantile(const LightState& st, double p) {
    switch (st.kind) {
        case StateKind::thermal:
            return -(st.mean_photons + 1.0) * std::log1p(-p);
        case StateKind::coherent: {
            // s is asymptotically normal with mean n+1, sd sqrt(2n+1).
            const double n = std::norm(st.alpha0);
            const double s = n + 1.0 + std::sqrt(2.0 * n + 1.0) * normal_quantile(p);
            return std::max(s, 0.0);
        }
        case StateKind::fock: {
            const double n = static_cast<double>(st.fock_n);
            const double s = n + 1.0 + std::sqrt(n + 1.0) * normal_quantile(p);
            return std::max(s, 0.0);
        }
        case StateKind::bsv: {
            // Antisqueezed quadrature dominates: s = y^2, y ~ N(0, sigma^2),
            // sigma^2 = 1/(2(1 - tanh r)). Quantile of s: 2 sigma^2 erfinv(p)^2.
            const double t = std::tanh(st.squeeze_r);
            const double sigma2 = 1.0 / (2.0 * (1.0 - t));
            const double e = erf_inv(p);
            return 2.0 * sigma2 * e * e;
        }
    }
    throw std::logic_error("large_n_quantile: unreachable");
}

bool use_large_n_path(const LightState& st) {
    return st.mean_photons > 1e6;
}
}  // namespace

StateKind state_kind_from_string(const std::string& s) {
    if (s == "coherent") return StateKind::coherent;
    if (s == "fock") return StateKind::fock;
    if (s == "thermal") return StateKind::thermal;
    if (s == "bsv") return StateKind::bsv;
    throw std::invalid_argument("unknown light state kind: " + s);
}

std::string to_string(StateKind kind) {
    switch (kind) {
        case StateKind::coherent: return "coherent";
        case StateKind::fock: return "fock";
        case StateKind::thermal: return "thermal";
        case StateKind::bsv: return "bsv";
    }
    return "?";
}

LightState make_coherent(double n_bar) {
    if (n_bar < 0.0) throw std::invalid_argument("make_coherent: n_bar must be >= 0");
    LightState st;
    st.kind = StateKind::coherent;
    st.mean_photons = n_bar;
    st.alpha0 = Complex(std::sqrt(n_bar), 0.0);
    return st;
}

LightState make_fock(double n_bar) {
    if (n_bar < 0.0) throw std::invalid_argument("make_fock: n_bar must be >= 0");
    LightState st;
    st.kind = StateKind::fock;
    st.fock_n = static_cast<long long>(std::llround(n_bar));
    st.mean_photons = static_cast<double>(st.fock_n);
    return st;
}

LightState make_thermal(double n_bar) {
    if (n_bar < 0.0) throw std::invalid_argument("make_thermal: n_bar must be >= 0");
    LightState st;
    st.kind = StateKind::thermal;
    st.mean_photons = n_bar;
    return st;
}

LightState make_bsv(double n_bar) {
    if (n_bar < 0.0) throw std::invalid_argument("make_bsv: n_bar must be >= 0");
    LightState st;
    st.kind = StateKind::bsv;
    st.mean_photons = n_bar;
    st.squeeze_r = std::asinh(std::sqrt(n_bar));
    return st;
}

LightState make_state(StateKind kind, double n_bar) {
    switch (kind) {
        case StateKind::coherent: return make_coherent(n_bar);
        case StateKind::fock: return make_fock(n_bar);
        case StateKind::thermal: return make_thermal(n_bar);
        case StateKind::bsv: return make_bsv(n_bar);
    }
    throw std::logic_error("make_state: unreachable");
}

double mean_photons_analytic(const LightState& state) {
    switch (state.kind) {
        case StateKind::coherent: return std::norm(state.alpha0);
        case StateKind::fock: return static_cast<double>(state.fock_n);
        case StateKind::thermal: return state.mean_photons;
        case StateKind::bsv: {
            const double sh = std::sinh(state.squeeze_r);
            return sh * sh;
        }
    }
    throw std::logic_error("mean_photons_analytic: unreachable");
}

double husimi_intensity_moment(const LightState& state) {
    return mean_photons_analytic(state) + 1.0;
}

double husimi(const LightState& state, Complex alpha) {
    switch (state.kind) {
        case StateKind::coherent:
            return std::exp(-std::norm(alpha - state.alpha0)) / kPi;
        case StateKind::fock: {
            const double s = std::norm(alpha);
            const double n = static_cast<double>(state.fock_n);
            if (s == 0.0) return (state.fock_n == 0) ? 1.0 / kPi : 0.0;
            return std::exp(n * std::log(s) - s - std::lgamma(n + 1.0)) / kPi;
        }
        case StateKind::thermal: {
            const double m = state.mean_photons + 1.0;
            return std::exp(-std::norm(alpha) / m) / (kPi * m);
        }
        case StateKind::bsv: {
            // Squeezing axis along the real quadrature; Q(alpha) =
            // exp(-|alpha|^2 - tanh r Re(alpha*^2)) / (pi cosh r).
            const double t = std::tanh(state.squeeze_r);
            const double c = std::cosh(state.squeeze_r);
            const double re2 = std::real(std::conj(alpha) * std::conj(alpha));
            return std::exp(-std::norm(alpha) - t * re2) / (kPi * c);
        }
    }
    throw std::logic_error("husimi: unreachable");
}

double intensity_quantile(const LightState& state, double p) {
    if (p <= 0.0) return 0.0;
    if (p >= 1.0) throw std::invalid_argument("intensity_quantile: p must be < 1");
    if (state.kind == StateKind::thermal || use_large_n_path(state))
        return large_n_quantile(state, p);
    // Numeric inversion on a table reaching well past the requested quantile.
    const double s_hi = large_n_quantile(state, 1.0 - 1e-12) * 1.5 + 20.0;
    static thread_local struct {
        StateKind kind;
        double param;
        double s_max;
        QuantileTable table;
        bool valid = false;
    } cache;
    const double param = (state.kind == StateKind::coherent) ? std::norm(state.alpha0)
                         : (state.kind == StateKind::fock)
                             ? static_cast<double>(state.fock_n)
                             : state.squeeze_r;
    if (!cache.valid || cache.kind != state.kind || cache.param != param || cache.s_max != s_hi) {
        cache.table = build_quantile_table(state, s_hi);
        cache.kind = state.kind;
        cache.param = param;
        cache.s_max = s_hi;
        cache.valid = true;
    }
    return cache.table.invert(p);
}

RadialQuadrature radial_quadrature(const LightState& state, int n_nodes,
                                   double i1p_w_cm2, double tail_quantile) {
    if (n_nodes < 2) throw std::invalid_argument("radial_quadrature: need at least 2 nodes");
    if (tail_quantile <= 0.0 || tail_quantile >= 1.0)
        throw std::invalid_argument("radial_quadrature: tail quantile must lie in (0, 1)");

    // Int f(s) p(s) ds = Int_0^1 f(s(xi)) dxi: Gauss-Legendre in the CDF
    // variable places nodes by probability mass. The quantile map steepens
    // toward xi -> 1, so the CDF interval is split into decade panels that
    // refine geometrically into the tail (the tail carries the cutoff physics).
    std::vector<double> tail_edges;
    for (double rem = 0.1; rem > tail_quantile * 1.0000001 && tail_edges.size() < 12; rem *= 0.1)
        tail_edges.push_back(rem);
    const int max_panels = std::max(1, n_nodes / 4);
    if (1 + static_cast<int>(tail_edges.size()) > max_panels)
        tail_edges.resize(max_panels - 1);
    std::vector<double> edges{0.0};
    for (double r : tail_edges) edges.push_back(1.0 - r);
    edges.push_back(1.0 - tail_quantile);
    const int panels = static_cast<int>(edges.size()) - 1;

    RadialQuadrature quad;
    quad.tail_quantile = tail_quantile;
    quad.nodes.resize(n_nodes);
    quad.weights.resize(n_nodes);
    int written = 0;
    const int base = n_nodes / panels;
    const int extra = n_nodes % panels;
    for (int p = 0; p < panels; ++p) {
        const int n_p = base + (p < extra ? 1 : 0);
        const QuadratureRule gl = gauss_legendre(n_p, edges[p], edges[p + 1]);
        for (int i = 0; i < n_p; ++i) {
            const double s = intensity_quantile(state, gl.nodes(i));
            quad.nodes(written) = std::sqrt(s);
            quad.weights(written) = gl.weights(i);
            ++written;
        }
    }
    const double wsum = quad.weights.sum();
    quad.weights /= wsum;

    if (i1p_w_cm2 > 0.0)
        quad.intensities_w_cm2 = i1p_w_cm2 * quad.nodes.square();
    return quad;
}

}  // namespace qhhg
