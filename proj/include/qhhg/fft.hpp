#ifndef QHHG_FFT_HPP
#define QHHG_FFT_HPP

#include <Eigen/Dense>
#include <complex>

#include "qhhg/grid.hpp"

namespace qhhg {

// Thin wrapper around FFTW complex transforms. Plans are created with
// FFTW_ESTIMATE so results are bit-reproducible across runs and machines
// with the same binary; planning happens under a global lock.
class Fft {
public:
    explicit Fft(int n);
    ~Fft();

    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    int size() const { return n_; }

    // Unnormalized DFT, kernel e^{-2*pi*i*j*k/N}.
    void forward_inplace(Complex* data) const;
    // Unnormalized inverse kernel e^{+2*pi*i*j*k/N} (no 1/N).
    void backward_inplace(Complex* data) const;

private:
    int n_ = 0;
    void* fwd_ = nullptr;  // fftw_plan
    void* bwd_ = nullptr;
};

// One-sided spectrum on the DFT frequency grid omega_j = j * domega, j = 1..N/2.
struct PositiveSpectrum {
    Eigen::ArrayXd omega;    // au
    Eigen::VectorXcd value;  // convention depends on producer
    double domega = 0.0;
};

// Unitary continuum transform X(w) = (1/sqrt(2*pi)) * Int x(t) e^{+i w t} dt,
// approximated as (dt/sqrt(2*pi)) * sum_k x(t_k) e^{+i w t_k}, restricted to w > 0.
// t0 is the time of the first sample.
PositiveSpectrum positive_unitary_spectrum(double t0, double dt, const Eigen::VectorXcd& samples);

// Full-axis version in natural DFT order folded to [-Nyquist, Nyquist):
// returns omegas sorted ascending with matching values.
struct FullSpectrum {
    Eigen::ArrayXd omega;
    Eigen::VectorXcd value;
    double domega = 0.0;
};
FullSpectrum full_unitary_spectrum(double t0, double dt, const Eigen::VectorXcd& samples);

// Positive-frequency projection of a complex signal: FFT, zero the bins with
// omega <= 0, inverse FFT. Used to build strictly positive-frequency pulse modes.
Eigen::VectorXcd project_positive_frequency(const Eigen::VectorXcd& samples);

}  // namespace qhhg

#endif  // QHHG_FFT_HPP
