#include "qhhg/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace qhhg {

namespace {
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("Fft: size must be >= 2");
    std::lock_guard<std::mutex> lock(plan_mutex());
    // UNALIGNED lets the same plan execute on any buffer, which keeps the
    // propagator free to transform Eigen-owned storage.
    fftw_complex* scratch = fftw_alloc_complex(static_cast<size_t>(n));
    fwd_ = fftw_plan_dft_1d(n, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    bwd_ = fftw_plan_dft_1d(n, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
    if (!fwd_ || !bwd_) throw std::runtime_error("Fft: FFTW planning failed");
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (fwd_) fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    if (bwd_) fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
}

void Fft::forward_inplace(Complex* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(fwd_), p, p);
}

void Fft::backward_inplace(Complex* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(static_cast<fftw_plan>(bwd_), p, p);
}

PositiveSpectrum positive_unitary_spectrum(double t0, double dt, const Eigen::VectorXcd& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 4) throw std::invalid_argument("positive_unitary_spectrum: too few samples");
    if (dt <= 0.0) throw std::invalid_argument("positive_unitary_spectrum: dt must be positive");

    Eigen::VectorXcd work = samples;
    Fft fft(n);
    // e^{+i w t} kernel = FFTW backward direction.
    fft.backward_inplace(work.data());

    const double domega = 2.0 * std::numbers::pi / (dt * static_cast<double>(n));
    const double scale = dt / std::sqrt(2.0 * std::numbers::pi);
    const int n_pos = n / 2;

    PositiveSpectrum out;
    out.domega = domega;
    out.omega.resize(n_pos);
    out.value.resize(n_pos);
    for (int j = 1; j <= n_pos; ++j) {
        const double w = domega * j;
        out.omega(j - 1) = w;
        out.value(j - 1) = scale * std::exp(Complex(0.0, w * t0)) * work(j);
    }
    return out;
}

FullSpectrum full_unitary_spectrum(double t0, double dt, const Eigen::VectorXcd& samples) {
    const int n = static_cast<int>(samples.size());
    if (n < 4) throw std::invalid_argument("full_unitary_spectrum: too few samples");

    Eigen::VectorXcd work = samples;
    Fft fft(n);
    fft.backward_inplace(work.data());

    const double domega = 2.0 * std::numbers::pi / (dt * static_cast<double>(n));
    const double scale = dt / std::sqrt(2.0 * std::numbers::pi);

    FullSpectrum out;
    out.domega = domega;
    out.omega.resize(n);
    out.value.resize(n);
    // DFT index j maps to omega_j = j*domega for j < N/2, (j - N)*domega otherwise.
    for (int j = 0; j < n; ++j) {
        const int j_shift = (j < (n + 1) / 2) ? j : j - n;
        const double w = domega * j_shift;
        const int slot = j_shift + n / 2;
        out.omega(slot) = w;
        out.value(slot) = scale * std::exp(Complex(0.0, w * t0)) * work(j);
    }
    return out;
}

Eigen::VectorXcd project_positive_frequency(const Eigen::VectorXcd& samples) {
    const int n = static_cast<int>(samples.size());
    Eigen::VectorXcd work = samples;
    Fft fft(n);
    fft.backward_inplace(work.data());  // bins j: omega_j = j*domega (j < N/2 positive)
    work(0) = Complex(0.0, 0.0);
    for (int j = n / 2; j < n; ++j) work(j) = Complex(0.0, 0.0);
    fft.forward_inplace(work.data());
    work /= static_cast<double>(n);
    return work;
}

}  // namespace qhhg
