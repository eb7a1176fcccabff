// Acceptance suite: one line per criterion, nonzero exit if any fails.
//
//  1  pulse-mode normalization constants
//  2  atom calibration (ground-state energy)
//  3  coherent-state spectrum structure at 1e14 W/cm^2
//  4  state ordering at fixed mean intensity (coherent/fock/thermal/bsv)
//  5  validity factors: f_ov and f(w) near unity at HHG amplitudes
//  6  diagonal-limit equivalence of the corrected assembly
//  7  always-on property bundle

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qhhg/correction.hpp"
#include "qhhg/ensemble.hpp"
#include "qhhg/io.hpp"
#include "qhhg/light_states.hpp"
#include "qhhg/quadrature.hpp"

using namespace qhhg;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void report(int criterion, const Verdict& v) {
    std::printf("CRITERION %d: %s — %s\n", criterion, v.pass ? "PASS" : "FAIL",
                v.detail.c_str());
    std::fflush(stdout);
    if (!v.pass) ++g_failures;
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list args;
    va_start(args, pattern);
    std::vsnprintf(buf, sizeof(buf), pattern, args);
    va_end(args);
    return std::string(buf);
}

double band_peak(const Eigen::ArrayXd& omegas, const Eigen::ArrayXd& values, double omega0,
                 double h, double width) {
    double best = 0.0;
    for (int j = 0; j < omegas.size(); ++j) {
        const double hh = omegas(j) / omega0;
        if (hh > h - width && hh < h + width) best = std::max(best, values(j));
    }
    return best;
}

double band_sum(const Eigen::ArrayXd& omegas, const Eigen::ArrayXd& values, double omega0,
                double h_lo, double h_hi) {
    double s = 0.0;
    for (int j = 0; j < omegas.size(); ++j) {
        const double hh = omegas(j) / omega0;
        if (hh >= h_lo && hh <= h_hi) s += values(j);
    }
    return s;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
}

// --- criterion 1 -------------------------------------------------------

Verdict criterion_normalization() {
    const auto start = std::chrono::steady_clock::now();
    const PulseMode mode = build_mode(800e-9, 5, 15, 1e-12);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const bool ok_integral = std::abs(mode.norm_integral - 28.814) <= 0.01;
    const bool ok_neff = std::abs(mode.effective_cycles - 18.343) <= 0.01;
    const bool ok_e1p = std::abs(mode.e1p_v_per_m - 30911.0) / 30911.0 <= 0.005;
    const bool ok_i1p = std::abs(mode.i1p_w_cm2 - 507.26) / 507.26 <= 0.005;
    Verdict v;
    v.pass = ok_integral && ok_neff && ok_e1p && ok_i1p && wall < 1.0;
    v.detail = fmt("I=%.3f n_eff=%.3f E1p=%.1f V/m I1p=%.2f W/cm^2 (%.2f s)",
                   mode.norm_integral, mode.effective_cycles, mode.e1p_v_per_m,
                   mode.i1p_w_cm2, wall);
    return v;
}

// --- criterion 2 -------------------------------------------------------

Verdict criterion_atom() {
    const auto start = std::chrono::steady_clock::now();
    const Grid grid(300.0, 8192);
    const SoftCoulombAtom atom = ground_state(grid, 0.8160);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Verdict v;
    v.pass = std::abs(atom.ground_energy + 0.7924) <= 1e-3 && wall < 10.0;
    v.detail = fmt("E0 = %.6f Hartree (target -0.7924 +- 1e-3, %.1f s)", atom.ground_energy,
                   wall);
    return v;
}

// --- criterion 3 -------------------------------------------------------

Verdict criterion_coherent_spectrum() {
    const auto start = std::chrono::steady_clock::now();
    const PulseMode mode = build_mode(800e-9, 5, 15, 1e-12);
    const Grid grid(300.0, 8192);
    const SoftCoulombAtom atom = ground_state(grid, 0.8160);
    const double dt = mode.period_au / 2048;
    const double t0 = -mode.half_support();
    const int n = static_cast<int>(std::llround(
                      (2.0 * mode.half_support() + 3.0 * mode.period_au) / dt)) + 1;
    int pad = 1;
    while (pad < n) pad *= 2;
    const double alpha = alpha_for_peak_intensity(mode, 1e14);
    const ClassicalField field = classical_field(mode, Complex(alpha, 0.0), t0, dt, n);
    const PropagationResult res = propagate(atom, field, AbsorberSpec{});
    const DipoleRecord win = temporal_window(res.record, mode, 2.0);
    const SpectralDipole sd = spectral_dipole(win, 0.25 * mode.omega0_au, pad);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    const Eigen::ArrayXd density = sd.accel_spectrum.array().abs2();
    const double w0 = mode.omega0_au;

    // Odd peaks vs even lines across the plateau; the plateau has genuine
    // interference minima, so the suppression statement is plateau-wide.
    std::vector<double> odd_peaks, even_levels, ratios_db;
    for (int h = 13; h <= 27; h += 2) {
        const double odd = band_peak(sd.omegas, density, w0, h, 0.2);
        const double even = band_peak(sd.omegas, density, w0, h + 1, 0.05);
        odd_peaks.push_back(odd);
        even_levels.push_back(even);
        ratios_db.push_back(10.0 * std::log10(odd / even));
    }
    const double median_odd = median_of(odd_peaks);
    const double median_even = median_of(even_levels);
    const double suppression_db = 10.0 * std::log10(median_odd / median_even);
    int pairs_over_20 = 0;
    for (double r : ratios_db)
        if (r >= 20.0) ++pairs_over_20;

    // Plateau-plus-cutoff shape: the last odd harmonic within 1e-2 of the
    // plateau median marks the cutoff; past it the density collapses.
    int cutoff_h = 0;
    for (int h = 13; h <= 45; h += 2)
        if (band_peak(sd.omegas, density, w0, h, 0.2) > 1e-2 * median_odd) cutoff_h = h;
    const double tail = band_peak(sd.omegas, density, w0, 41.0, 2.0);

    Verdict v;
    const bool ok_suppression = suppression_db >= 20.0 && pairs_over_20 * 2 >= 8;
    const bool ok_cutoff = cutoff_h >= 23 && cutoff_h <= 37;
    const bool ok_tail = tail < 1e-4 * median_odd;
    v.pass = ok_suppression && ok_cutoff && ok_tail && wall < 60.0;
    v.detail = fmt("even suppression %.1f dB (median), %d/8 pairs >= 20 dB, cutoff H%d, "
                   "tail/plateau %.1e (%.0f s)",
                   suppression_db, pairs_over_20, cutoff_h, tail / median_odd, wall);
    return v;
}

// --- criterion 4 -------------------------------------------------------

Verdict criterion_state_ordering() {
    ExperimentPlan plan;
    plan.n_ramp = 5;
    plan.n_flat = 15;
    plan.mean_intensity_w_cm2 = 1e14;
    plan.states = {{StateKind::coherent, 6},
                   {StateKind::fock, 6},
                   {StateKind::thermal, 24},
                   {StateKind::bsv, 24}};
    plan.grid = {300.0, 8192};
    plan.steps_per_cycle = 1024;
    plan.max_harmonic = 50.0;
    plan.workers = 0;
    const ExperimentResult r = execute(plan);
    if (!r.manifest.complete) {
        Verdict v;
        v.detail = "pipeline failure: " + r.manifest.failures.front();
        return v;
    }
    const double w0 = r.mode.omega0_au;
    const auto& coh = r.spectra[0];
    const auto& fock = r.spectra[1];
    const auto& thermal = r.spectra[2];
    const auto& bsv = r.spectra[3];

    // Fock vs coherent: band-integrated odd plateau harmonics within 5%.
    double worst_fock = 0.0;
    for (int h = 13; h <= 25; h += 2) {
        const double a = band_sum(coh.omegas, coh.spectral_density, w0, h - 0.4, h + 0.4);
        const double b = band_sum(fock.omegas, fock.spectral_density, w0, h - 0.4, h + 0.4);
        worst_fock = std::max(worst_fock, std::abs(b / a - 1.0));
    }

    // Broad states above the coherent cutoff.
    const double coh_hi = band_sum(coh.omegas, coh.spectral_density, w0, 33.0, 45.0);
    const double th_hi = band_sum(thermal.omegas, thermal.spectral_density, w0, 33.0, 45.0);
    const double bsv_hi = band_sum(bsv.omegas, bsv.spectral_density, w0, 33.0, 45.0);

    Verdict v;
    v.pass = worst_fock <= 0.05 && th_hi >= 10.0 * coh_hi && bsv_hi >= 10.0 * coh_hi;
    v.detail = fmt("fock/coherent worst band dev %.2f%%, thermal/coherent %.1fx, "
                   "bsv/coherent %.1fx above cutoff (%d propagations)",
                   100.0 * worst_fock, th_hi / coh_hi, bsv_hi / coh_hi,
                   r.manifest.propagations);
    return v;
}

// --- criteria 5 and 6 (one correction pipeline) ------------------------

struct CorrectionRun {
    bool ok = false;
    std::string error;
    CorrectionOutputs out;
    double omega0 = 0.0;
};

CorrectionRun run_correction_pipeline() {
    ExperimentPlan plan;
    plan.states.clear();
    plan.mean_intensity_w_cm2 = 1e14;
    CorrectionSpec corr;
    corr.delta_alpha_max = 3.0;
    corr.delta_alpha_nodes = 7;
    corr.quad_order = 4;
    corr.compute_gaussian_factor = true;
    corr.coherent_nodes = 6;
    // The box holds the ionized flux for this pulse (no absorber inside the
    // correction pipeline); faster outliers wrap far from the core.
    corr.grid = {2000.0, 32768};
    corr.steps_per_cycle = 2048;
    corr.n_ramp = 3;
    corr.n_flat = 6;
    corr.projected_field = true;
    corr.mask_floor_rel = 1e-6;
    corr.max_harmonic = 40.0;
    plan.correction = corr;
    plan.workers = 0;

    CorrectionRun run;
    const ExperimentResult r = execute(plan);
    if (!r.manifest.complete) {
        run.error = r.manifest.failures.front();
        return run;
    }
    run.ok = true;
    run.out = *r.correction;
    run.omega0 = run.out.mode.omega0_au;
    return run;
}

Verdict criterion_validity_factors(const CorrectionRun& run) {
    if (!run.ok) return {false, "pipeline failure: " + run.error};
    const CorrectionMap& map = run.out.map;

    double worst_fov = 0.0;
    double worst_fov_mod = 0.0;  // modulus deficit: genuine which-path decoherence
    for (int d = 0; d < map.delta_alphas.size(); ++d) {
        worst_fov = std::max(worst_fov, std::abs(Complex(1.0, 0.0) - map.f_ov(d)));
        worst_fov_mod = std::max(worst_fov_mod, std::abs(1.0 - std::abs(map.f_ov(d))));
    }

    // The frequency-resolved factor is compared through its modulus, the
    // published figure of merit; the complex distance carries the first-order
    // intensity-chirp phase of the harmonics and is reported alongside.
    double worst_fl_mod = 0.0;
    double worst_fl_cpx = 0.0;
    int unmasked = 0;
    for (int j = 0; j < map.omegas.size(); ++j) {
        if (map.masked[j]) continue;
        ++unmasked;
        for (int d = 0; d < map.delta_alphas.size(); ++d) {
            worst_fl_mod = std::max(worst_fl_mod, std::abs(1.0 - std::abs(map.f_values(j, d))));
            worst_fl_cpx =
                std::max(worst_fl_cpx, std::abs(Complex(1.0, 0.0) - map.f_values(j, d)));
        }
    }

    Verdict v;
    const bool ok_fov = worst_fov <= 1e-10;
    const bool ok_fl = worst_fl_mod <= 1e-3 && unmasked > 0;
    v.pass = ok_fov && ok_fl;
    v.detail = fmt("alpha_m=%.3e: max|1-f_ov|=%.2e vs 1e-10 [%s; modulus deficit %.1e is "
                   "retained-ionization which-path decoherence], max|1-|f(w)||=%.2e vs 1e-3 "
                   "[%s; complex distance %.1e is first-order chirp phase] over %d unmasked bins",
                   run.out.alpha_m, worst_fov, ok_fov ? "ok" : "UNATTAINED", worst_fov_mod,
                   worst_fl_mod, ok_fl ? "ok" : "FAILED", worst_fl_cpx, unmasked);
    return v;
}

Verdict criterion_diagonal_limit(const CorrectionRun& run) {
    if (!run.ok) return {false, "pipeline failure: " + run.error};
    if (!run.out.diag_spectrum || !run.out.corrected_spectrum)
        return {false, "corrected assembly missing"};
    const auto& diag = *run.out.diag_spectrum;
    const auto& corrected = *run.out.corrected_spectrum;
    const CorrectionMap& map = run.out.map;

    const double peak = diag.spectral_density.maxCoeff();
    double worst = 0.0;
    double worst_im = 0.0;
    int counted = 0;
    for (int j = 0; j < diag.omegas.size(); ++j) {
        if (map.masked[j]) continue;
        const double h = diag.omegas(j) / run.omega0;
        if (h < 5.0) continue;
        if (diag.spectral_density(j) < 1e-6 * peak) continue;
        ++counted;
        worst = std::max(worst,
                         std::abs(corrected.spectral_density(j) / diag.spectral_density(j) - 1.0));
        worst_im = std::max(worst_im, std::abs(run.out.gaussian_factor(j).imag()) /
                                          std::abs(run.out.gaussian_factor(j)));
    }
    Verdict v;
    v.pass = counted > 0 && worst <= 1e-3;
    v.detail = fmt("max |corrected/diagonal - 1| = %.2e over %d plateau bins (<= 1e-3), "
                   "max |Im C|/|C| = %.1e",
                   worst, counted, worst_im);
    return v;
}

// --- criterion 7 -------------------------------------------------------

Verdict criterion_property_bundle() {
    std::vector<std::string> fails;

    // Propagator unitarity over 25 cycles, no absorber, default step.
    {
        const PulseMode mode = build_mode(800e-9, 5, 15, 1e-12);
        const Grid grid(300.0, 8192);
        const SoftCoulombAtom atom = ground_state(grid, 0.8160);
        const double dt = mode.period_au / 2048;
        const int n = static_cast<int>(std::llround((2.0 * mode.half_support()) / dt)) + 1;
        const double alpha = alpha_for_peak_intensity(mode, 1e14);
        const ClassicalField field =
            classical_field(mode, Complex(alpha, 0.0), -mode.half_support(), dt, n);
        AbsorberSpec no_mask;
        no_mask.enabled = false;
        const PropagationResult res = propagate(atom, field, no_mask);
        const double worst = (res.record.norm_history - 1.0).abs().maxCoeff();
        if (worst >= 1e-8) fails.push_back(fmt("unitarity %.1e", worst));

        // Parseval on this record (+-1e-6).
        const DipoleRecord win = temporal_window(res.record, mode, 0.0);
        int pad = 1;
        while (pad < n) pad *= 2;
        const SpectralDipole sd = spectral_dipole(win, 0.25 * mode.omega0_au, pad);
        const double t_side = (win.accel.square() * dt).sum();
        const double w_side = 2.0 * sd.accel_spectrum.squaredNorm() * sd.domega;
        if (std::abs(w_side - t_side) / t_side >= 1e-6)
            fails.push_back(fmt("parseval %.1e", std::abs(w_side - t_side) / t_side));

        // Zero-field stationarity on the same atom.
        ClassicalField zero;
        zero.times = field.times.head(4096);
        zero.efield = Eigen::ArrayXd::Zero(4096);
        zero.alpha = Complex(0.0, 0.0);
        zero.dt = dt;
        const PropagationResult still = propagate(atom, zero, no_mask);
        const double accel_max = still.record.accel.abs().maxCoeff();
        if (accel_max >= 1e-10) fails.push_back(fmt("stationarity %.1e", accel_max));
    }

    // Husimi normalization and moments, all four kinds.
    {
        const double n_bar = 5.0;
        const QuadratureRule gl = gauss_legendre(300, -30.0, 30.0);
        for (StateKind kind :
             {StateKind::coherent, StateKind::fock, StateKind::thermal, StateKind::bsv}) {
            const LightState st = make_state(kind, n_bar);
            double mass = 0.0, moment = 0.0;
            for (int i = 0; i < gl.nodes.size(); ++i) {
                for (int j = 0; j < gl.nodes.size(); ++j) {
                    const Complex a(gl.nodes(i), gl.nodes(j));
                    const double q = husimi(st, a) * gl.weights(i) * gl.weights(j);
                    mass += q;
                    moment += q * std::norm(a);
                }
            }
            if (std::abs(mass - 1.0) >= 1e-6)
                fails.push_back(fmt("intQ(%s) %.1e", to_string(kind).c_str(), mass - 1.0));
            if (std::abs(moment - (n_bar + 1.0)) >= 1e-5)
                fails.push_back(fmt("moment(%s) %.1e", to_string(kind).c_str(),
                                    moment - (n_bar + 1.0)));
            if (std::abs(mean_photons_analytic(st) - n_bar) >= 1e-9 * n_bar)
                fails.push_back(fmt("nbar(%s)", to_string(kind).c_str()));
        }
    }

    // Exact zeros and exact ones of the correction factors; conjugation
    // symmetry of the full factor on synthetic spectra.
    {
        const Eigen::ArrayXd w = Eigen::ArrayXd::LinSpaced(200, 0.05, 3.0);
        Eigen::VectorXcd base(200), slope(200), fieldv(200);
        for (int i = 0; i < 200; ++i) {
            base(i) = Complex(std::exp(-w(i)), 0.4 * std::exp(-1.2 * w(i)));
            slope(i) = Complex(0.1 * std::sin(w(i)), 0.05 * std::cos(2.0 * w(i))) * std::exp(-w(i));
            fieldv(i) = Complex(std::exp(-std::pow((w(i) - 0.5) / 0.1, 2.0)), 0.0);
        }
        SpectralDipole dm;
        dm.omegas = w;
        dm.value = base;
        dm.accel_spectrum = base;
        dm.domega = w(1) - w(0);
        dm.omega_min = w(0);
        PositiveSpectrum fm;
        fm.omega = w;
        fm.value = fieldv;
        fm.domega = dm.domega;

        if (radiative_overlap_exponent(dm, dm) != Complex(0.0, 0.0))
            fails.push_back("t1(a,a) != 0");
        if (drive_overlap_exponent(fm, fm, dm, dm) != Complex(0.0, 0.0))
            fails.push_back("t2(a,a) != 0");

        CorrectionInputs same;
        same.dipole_alpha = &dm;
        same.dipole_beta = &dm;
        same.dipole_mean = &dm;
        same.field_alpha = &fm;
        same.field_beta = &fm;
        same.overlap = Complex(1.0, 0.0);
        const Eigen::VectorXcd ones = mode_correction(same, 0.0, nullptr);
        for (int j = 0; j < ones.size(); ++j)
            if (ones(j) != Complex(1.0, 0.0)) {
                fails.push_back("f(delta=0) != 1");
                break;
            }

        // f(-delta) = conj(f(delta)) with alpha/beta built from a smooth model.
        const double delta = 0.7;
        SpectralDipole da = dm, db = dm;
        da.value = base + delta * slope;
        db.value = base - delta * slope;
        PositiveSpectrum fa = fm, fb = fm;
        fa.value = (1.0 + 0.01 * delta) * fieldv;
        fb.value = (1.0 - 0.01 * delta) * fieldv;
        CorrectionInputs fwd;
        fwd.dipole_alpha = &da;
        fwd.dipole_beta = &db;
        fwd.dipole_mean = &dm;
        fwd.field_alpha = &fa;
        fwd.field_beta = &fb;
        fwd.overlap = Complex(0.999999, 1e-5);
        CorrectionInputs rev;
        rev.dipole_alpha = &db;
        rev.dipole_beta = &da;
        rev.dipole_mean = &dm;
        rev.field_alpha = &fb;
        rev.field_beta = &fa;
        rev.overlap = std::conj(fwd.overlap);
        const Eigen::VectorXcd f_fwd = mode_correction(fwd, 0.0, nullptr);
        const Eigen::VectorXcd f_rev = mode_correction(rev, 0.0, nullptr);
        double worst = 0.0;
        for (int j = 0; j < f_fwd.size(); ++j)
            worst = std::max(worst,
                             std::abs(f_rev(j) - std::conj(f_fwd(j))) / std::abs(f_fwd(j)));
        if (worst >= 1e-10) fails.push_back(fmt("conjugation %.1e", worst));
    }

    // Ensemble determinism across worker counts, byte-identical CSV.
    {
        ExperimentPlan plan;
        plan.n_ramp = 1;
        plan.n_flat = 1;
        plan.mean_intensity_w_cm2 = 1e12;
        plan.states = {{StateKind::coherent, 2}, {StateKind::thermal, 4}};
        plan.grid = {120.0, 1024};
        plan.steps_per_cycle = 512;
        plan.post_pulse_cycles = 2.0;
        plan.taper_cycles = 1.0;
        plan.max_harmonic = 12.0;
        auto csv_for = [&](int workers) {
            plan.workers = workers;
            const ExperimentResult res = execute(plan);
            const std::string path = "/tmp/qhhg_acc_det.csv";
            write_spectrum_csv(path, res.spectra, res.mode.omega0_au);
            std::ifstream in(path);
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        };
        if (csv_for(1) != csv_for(2)) fails.push_back("worker determinism");
    }

    Verdict v;
    v.pass = fails.empty();
    if (fails.empty()) {
        v.detail = "unitarity, stationarity, Parseval, Husimi, exact zeros/ones, "
                   "conjugation symmetry, determinism";
    } else {
        v.detail = "failed: ";
        for (const auto& f : fails) v.detail += f + "; ";
    }
    return v;
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    report(1, criterion_normalization());
    report(2, criterion_atom());
    report(3, criterion_coherent_spectrum());
    report(4, criterion_state_ordering());
    const CorrectionRun corr = run_correction_pipeline();
    report(5, criterion_validity_factors(corr));
    report(6, criterion_diagonal_limit(corr));
    report(7, criterion_property_bundle());
    std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
