#ifndef QHHG_GRID_HPP
#define QHHG_GRID_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace qhhg {

using Complex = std::complex<double>;

// Uniform 1D spatial grid, symmetric about z = 0 (the model potential is even).
struct Grid {
    double x_min = 0.0;  // bohr
    double x_max = 0.0;  // bohr
    int n_points = 0;
    double dx = 0.0;     // bohr

    Grid() = default;

    Grid(double half_width, int n) {
        if (n < 2) throw std::invalid_argument("Grid: n_points must be >= 2");
        if (half_width <= 0.0) throw std::invalid_argument("Grid: half width must be positive");
        x_min = -half_width;
        x_max = half_width;
        n_points = n;
        dx = (x_max - x_min) / static_cast<double>(n - 1);
    }

    Eigen::ArrayXd points() const {
        return Eigen::ArrayXd::LinSpaced(n_points, x_min, x_max);
    }

    bool operator==(const Grid& other) const {
        return n_points == other.n_points && x_min == other.x_min && x_max == other.x_max;
    }
    bool operator!=(const Grid& other) const { return !(*this == other); }
};

struct Wavefunction {
    Grid grid;
    Eigen::VectorXcd psi;  // amplitudes, bohr^(-1/2)

    Wavefunction() = default;
    Wavefunction(const Grid& g, Eigen::VectorXcd amplitudes)
        : grid(g), psi(std::move(amplitudes)) {
        if (psi.size() != grid.n_points)
            throw std::invalid_argument("Wavefunction: amplitude count does not match grid");
    }

    double norm_squared() const { return psi.squaredNorm() * grid.dx; }

    void normalize() {
        const double n2 = norm_squared();
        if (n2 <= 0.0) throw std::runtime_error("Wavefunction: cannot normalize zero state");
        psi /= std::sqrt(n2);
    }
};

// <a|b> = sum conj(a_i) b_i dx on the shared grid.
inline Complex inner_product(const Wavefunction& a, const Wavefunction& b) {
    if (a.grid != b.grid)
        throw std::invalid_argument("inner_product: wavefunctions live on different grids");
    return a.psi.dot(b.psi) * a.grid.dx;
}

}  // namespace qhhg

#endif  // QHHG_GRID_HPP
