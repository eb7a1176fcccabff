#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qhhg/ensemble.hpp"
#include "qhhg/io.hpp"

using namespace qhhg;

namespace {

// Small, fast plan: short pulse, coarse grid, low intensity.
ExperimentPlan tiny_plan() {
    ExperimentPlan plan;
    plan.lambda0_nm = 800.0;
    plan.n_ramp = 1;
    plan.n_flat = 1;
    plan.area_um2 = 1.0;
    plan.mean_intensity_w_cm2 = 1e12;
    plan.states = {{StateKind::coherent, 2}, {StateKind::thermal, 4}};
    plan.a_soft = 0.8160;
    plan.grid = {120.0, 1024};
    plan.steps_per_cycle = 512;
    plan.post_pulse_cycles = 2.0;
    plan.taper_cycles = 1.0;
    plan.max_harmonic = 12.0;
    plan.workers = 1;
    return plan;
}

std::string spectrum_csv_text(const ExperimentResult& result) {
    const std::string path = "/tmp/qhhg_test_spectrum.csv";
    write_spectrum_csv(path, result.spectra, result.mode.omega0_au);
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("execute composes the single-run pipeline") {
    ExperimentPlan plan = tiny_plan();
    plan.states = {{StateKind::coherent, 2}};
    const ExperimentResult result = execute(plan);

    REQUIRE(result.spectra.size() == 1);
    REQUIRE(result.manifest.complete);
    CHECK(result.manifest.propagations == 2);  // two nodes, no duplicates

    // Direct pipeline for the same two node amplitudes.
    const PulseMode mode = build_mode(800e-9, 1, 1, 1e-12);
    const Grid grid(120.0, 1024);
    const SoftCoulombAtom atom = ground_state(grid, 0.8160);
    const double dt = mode.period_au / 512;
    const double t0 = -mode.half_support();
    const int n = static_cast<int>(std::llround(
                      (2.0 * mode.half_support() + 2.0 * mode.period_au) / dt)) + 1;
    int pad = 1;
    while (pad < n) pad *= 2;

    std::vector<SpectralDipole> dipoles;
    const RadialQuadrature& quad = result.quadratures[0];
    for (int i = 0; i < quad.nodes.size(); ++i) {
        const ClassicalField field =
            classical_field(mode, Complex(quad.nodes(i), 0.0), t0, dt, pad);
        ClassicalField head;
        head.times = field.times.head(n);
        head.efield = field.efield.head(n);
        head.alpha = field.alpha;
        head.dt = dt;
        const PropagationResult prop = propagate(atom, head, plan.absorber);
        const DipoleRecord win = temporal_window(prop.record, mode, 1.0);
        SpectralDipole sd = spectral_dipole(win, 0.25 * mode.omega0_au, pad);
        // Mirror the pipeline's stored band.
        int keep = 0;
        while (keep < sd.omegas.size() && sd.omegas(keep) <= plan.max_harmonic * mode.omega0_au)
            ++keep;
        sd.omegas.conservativeResize(keep);
        sd.value.conservativeResize(keep);
        sd.accel_spectrum.conservativeResize(keep);
        dipoles.push_back(std::move(sd));
    }
    const SpectrumResult direct = assemble_spectrum(dipoles, quad, "coherent");

    REQUIRE(direct.omegas.size() == result.spectra[0].omegas.size());
    for (int j = 0; j < direct.omegas.size(); ++j)
        CHECK(result.spectra[0].spectral_density(j) ==
              doctest::Approx(direct.spectral_density(j)).epsilon(1e-12));
}

TEST_CASE("worker count does not change the bytes") {
    ExperimentPlan plan = tiny_plan();
    plan.workers = 1;
    const std::string csv1 = spectrum_csv_text(execute(plan));
    plan.workers = 2;
    const std::string csv2 = spectrum_csv_text(execute(plan));
    plan.workers = 8;
    const std::string csv8 = spectrum_csv_text(execute(plan));
    CHECK(csv1 == csv2);
    CHECK(csv1 == csv8);
    CHECK(csv1.find("harmonic_order,coherent,thermal") == 0);
}

TEST_CASE("node dedup counts work once") {
    ExperimentPlan plan = tiny_plan();
    // Two identical state blocks share every node propagation.
    plan.states = {{StateKind::coherent, 2}, {StateKind::coherent, 2}};
    const ExperimentResult result = execute(plan);
    CHECK(result.manifest.propagations == 2);
    CHECK(result.spectra[0].spectral_density.isApprox(result.spectra[1].spectral_density));
}

TEST_CASE("cache: resume, corruption recovery, work conservation") {
    namespace fs = std::filesystem;
    const std::string cache_dir = "/tmp/qhhg_test_cache";
    fs::remove_all(cache_dir);

    ExperimentPlan plan = tiny_plan();
    plan.cache_dir = cache_dir;

    const ExperimentResult fresh = execute(plan);
    const std::string fresh_csv = spectrum_csv_text(fresh);
    const int planned = fresh.manifest.planned_jobs;
    CHECK(fresh.manifest.propagations == planned);
    CHECK(fresh.manifest.cache_hits == 0);

    SUBCASE("all-cached resume does assembly only") {
        const ExperimentResult warm = resume(plan_hash(plan), plan);
        CHECK(warm.manifest.propagations == 0);
        CHECK(warm.manifest.cache_hits == planned);
        CHECK(warm.manifest.cache_hits + warm.manifest.propagations == planned);
        CHECK(spectrum_csv_text(warm) == fresh_csv);
    }

    SUBCASE("corrupt record re-runs that node only, output unchanged") {
        std::vector<fs::path> files;
        for (const auto& e : fs::directory_iterator(cache_dir)) files.push_back(e.path());
        REQUIRE(!files.empty());
        std::sort(files.begin(), files.end());
        {
            std::fstream f(files[files.size() / 2],
                           std::ios::in | std::ios::out | std::ios::binary);
            f.seekp(128);
            const char junk[8] = {'x', 'x', 'x', 'x', 'x', 'x', 'x', 'x'};
            f.write(junk, sizeof(junk));
        }
        const ExperimentResult repaired = execute(plan);
        CHECK(repaired.manifest.propagations == 1);
        CHECK(repaired.manifest.cache_hits == planned - 1);
        CHECK(spectrum_csv_text(repaired) == fresh_csv);
    }

    SUBCASE("resume refuses a different configuration") {
        ExperimentPlan other = plan;
        other.mean_intensity_w_cm2 *= 2.0;
        CHECK_THROWS_AS(resume(plan_hash(plan), other), std::invalid_argument);
    }

    fs::remove_all(cache_dir);
}

TEST_CASE("correction pipeline plumbing on a small setup") {
    ExperimentPlan plan = tiny_plan();
    plan.states.clear();
    plan.mean_intensity_w_cm2 = 1e10;  // perturbative: ratio term ~ 1 - (d/a_m)^2
    CorrectionSpec corr;
    corr.delta_alpha_max = 3.0;
    corr.delta_alpha_nodes = 3;
    corr.quad_order = 2;
    corr.coherent_nodes = 2;
    corr.grid = {120.0, 1024};
    corr.steps_per_cycle = 512;
    corr.n_ramp = 1;
    corr.n_flat = 1;
    corr.max_harmonic = 8.0;
    corr.post_pulse_cycles = 2.0;
    corr.taper_cycles = 1.0;
    plan.correction = corr;
    plan.workers = 2;

    const ExperimentResult result = execute(plan);
    REQUIRE(result.manifest.complete);
    REQUIRE(result.correction.has_value());
    const CorrectionOutputs& out = *result.correction;

    CHECK(out.alpha_m == doctest::Approx(std::sqrt(1e10 / out.mode.i1p_w_cm2)));

    // delta = 0 column is exactly one (same run on both sides).
    for (int j = 0; j < out.map.omegas.size(); ++j)
        CHECK(std::abs(out.map.f_values(j, 0) - Complex(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(out.map.f_ov(0) - Complex(1.0, 0.0)) < 1e-12);

    // Unmasked bins stay near one in the perturbative regime.
    for (int j = 0; j < out.map.omegas.size(); ++j) {
        if (out.map.masked[j]) continue;
        for (int d = 0; d < out.map.delta_alphas.size(); ++d)
            CHECK(std::abs(out.map.f_values(j, d) - Complex(1.0, 0.0)) < 1e-3);
    }

    // Gaussian factor present, near one on unmasked bins; Eq-26/Eq-27 pair exists.
    REQUIRE(out.gaussian_factor.size() == out.map.omegas.size());
    for (int j = 0; j < out.map.omegas.size(); ++j) {
        if (out.map.masked[j]) continue;
        CHECK(std::abs(out.gaussian_factor(j) - Complex(1.0, 0.0)) < 1e-3);
    }
    REQUIRE(out.diag_spectrum.has_value());
    REQUIRE(out.corrected_spectrum.has_value());
    CHECK(out.diag_spectrum->omegas.size() == out.map.omegas.size());

    // Work conservation across both pipelines.
    CHECK(result.manifest.planned_jobs ==
          result.manifest.propagations + result.manifest.cache_hits);
}

TEST_CASE("plan hash distinguishes configurations") {
    ExperimentPlan a = tiny_plan();
    ExperimentPlan b = tiny_plan();
    CHECK(plan_hash(a) == plan_hash(b));
    b.steps_per_cycle = 1024;
    CHECK(plan_hash(a) != plan_hash(b));
}

TEST_CASE("invalid plans are rejected") {
    ExperimentPlan plan = tiny_plan();
    plan.mean_intensity_w_cm2 = 0.0;
    CHECK_THROWS_AS(execute(plan), std::invalid_argument);
    plan = tiny_plan();
    plan.states.clear();
    CHECK_THROWS_AS(execute(plan), std::invalid_argument);
}

TEST_CASE("job failures produce a failure manifest, not a crash") {
    ExperimentPlan plan = tiny_plan();
    plan.taper_cycles = 5.0;  // cannot fit in the 2-cycle tail: every job fails
    const ExperimentResult result = execute(plan);
    CHECK(!result.manifest.complete);
    CHECK(!result.manifest.failures.empty());
    CHECK(result.spectra.empty());
    CHECK(result.manifest.failures.front().find("taper") != std::string::npos);
}
