// Command-line front end: parse configuration, run the ensemble pipeline, and
// emit analysis-ready CSV/JSON bundles.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "qhhg/ensemble.hpp"
#include "qhhg/io.hpp"
#include "qhhg/pulse.hpp"
#include "qhhg/units.hpp"

namespace {

constexpr int kExitValidation = 2;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    int workers = -1;
    std::string out_dir;
    long long seed = 0;  // reserved; quadrature mode is deterministic
    bool verbose = false;
};

qhhg::Config load_config(const GlobalOptions& g) {
    qhhg::Config cfg = qhhg::Config::defaults();
    if (!g.config_path.empty()) cfg.apply_file(g.config_path);
    for (const auto& ov : g.overrides) {
        const auto eq = ov.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got '" + ov + "'");
        cfg.apply_override(ov.substr(0, eq), ov.substr(eq + 1));
    }
    if (g.workers >= 0) cfg.apply_override("workers", std::to_string(g.workers));
    if (!g.out_dir.empty()) cfg.apply_override("out_dir", g.out_dir);
    return cfg;
}

void print_failures(const qhhg::RunManifest& manifest) {
    for (const auto& f : manifest.failures) std::cerr << "error: " << f << "\n";
}

int cmd_normalize(double lambda0_nm, int n_ramp, int n_flat, double area_um2,
                  double target_intensity, double volume_nm3) {
    using namespace qhhg;
    const PulseMode mode = build_mode(lambda0_nm * 1e-9, n_ramp, n_flat, area_um2 * 1e-12);
    std::printf("pulse mode: lambda0 = %.6g nm, ramp %d cycles, flat %d cycles, A = %.6g um^2\n",
                lambda0_nm, n_ramp, n_flat, area_um2);
    std::printf("  normalization integral  I(n_r,n_f) = %.6f\n", mode.norm_integral);
    std::printf("  effective cycles        n_eff      = %.6f\n", mode.effective_cycles);
    std::printf("  effective volume        V_eff      = %.6e m^3\n", mode.v_eff_m3);
    std::printf("  single-photon field     E_1p       = %.4f V/m (%.6e au)\n", mode.e1p_v_per_m,
                mode.e1p_au);
    std::printf("  per-photon intensity    I_1p       = %.4f W/cm^2\n", mode.i1p_w_cm2);
    if (target_intensity > 0.0) {
        const double alpha = alpha_for_peak_intensity(mode, target_intensity);
        std::printf("  photons for %.3e W/cm^2: |alpha|^2 = %.6e (|alpha| = %.6e)\n",
                    target_intensity, alpha * alpha, alpha);
    }
    if (volume_nm3 > 0.0 && target_intensity > 0.0) {
        // Same target intensity in a confined mode of the given volume.
        const double omega0_si = 2.0 * std::numbers::pi * constants::c_SI / (lambda0_nm * 1e-9);
        const double i1p_confined =
            constants::c_SI * constants::hbar_SI * omega0_si / (volume_nm3 * 1e-27) * 1e-4;
        std::printf("  photons for %.3e W/cm^2 at V = %.3g nm^3: %.4f\n", target_intensity,
                    volume_nm3, target_intensity / i1p_confined);
    }
    return 0;
}

int cmd_validate(const qhhg::Config& cfg, bool verbose) {
    const qhhg::ExperimentPlan plan = cfg.to_plan();  // throws on bad values
    (void)plan;
    std::printf("configuration valid; hash %s\n", cfg.hash().c_str());
    if (verbose)
        for (const auto& [k, v] : cfg.entries()) std::printf("  %s = %s\n", k.c_str(), v.c_str());
    return 0;
}

int cmd_spectrum(const qhhg::Config& cfg, bool resume_run, bool verbose) {
    using namespace qhhg;
    ExperimentPlan plan = cfg.to_plan();
    const std::string out_dir = cfg.out_dir();
    std::filesystem::create_directories(out_dir);
    const std::string manifest_path = out_dir + "/manifest.json";

    if (resume_run) {
        const auto prior = read_manifest_hash(manifest_path);
        if (!prior)
            throw std::invalid_argument("resume requested but no readable manifest at " +
                                        manifest_path);
        if (*prior != cfg.hash())
            throw std::invalid_argument(
                "resume: manifest " + manifest_path + " belongs to config hash " + *prior +
                ", current config hashes to " + cfg.hash());
        if (plan.cache_dir.empty()) plan.cache_dir = out_dir + "/cache";
    }

    if (verbose) std::printf("running spectrum pipeline (config %s)\n", cfg.hash().c_str());
    const ExperimentResult result = execute(plan);

    std::vector<std::string> outputs;
    if (!result.spectra.empty()) {
        const std::string spectrum_path = out_dir + "/spectrum.csv";
        write_spectrum_csv(spectrum_path, result.spectra, result.mode.omega0_au);
        outputs.push_back(spectrum_path);
        const std::string sidecar_path = out_dir + "/spectrum_meta.json";
        write_sidecar_json(sidecar_path, plan, result);
        outputs.push_back(sidecar_path);
    }
    if (plan.keep_records) {
        for (size_t i = 0; i < result.records.size(); ++i) {
            const std::string p = out_dir + "/record_" + std::to_string(i) + ".csv";
            write_record_csv(p, result.records[i]);
            outputs.push_back(p);
        }
    }
    write_manifest_json(manifest_path, cfg, result, outputs);

    if (!result.manifest.complete) {
        print_failures(result.manifest);
        std::fprintf(stderr, "partial results written to %s\n", out_dir.c_str());
        return 1;
    }
    if (verbose)
        std::printf("done: %d propagations, %d cache hits\n", result.manifest.propagations,
                    result.manifest.cache_hits);
    std::printf("wrote %s\n", (out_dir + "/spectrum.csv").c_str());
    return 0;
}

int cmd_correction(const qhhg::Config& cfg, bool verbose) {
    using namespace qhhg;
    Config with_corr = cfg;
    with_corr.apply_override("correction_enabled", "true");
    with_corr.apply_override("states", with_corr.get("states"));
    ExperimentPlan plan = with_corr.to_plan();
    plan.states.clear();  // correction command runs only the validity pipeline

    const std::string out_dir = with_corr.out_dir();
    std::filesystem::create_directories(out_dir);

    if (verbose) std::printf("running correction pipeline (config %s)\n", with_corr.hash().c_str());
    const ExperimentResult result = execute(plan);

    std::vector<std::string> outputs;
    if (result.correction && result.manifest.complete) {
        const auto& corr = *result.correction;
        const std::string map_path = out_dir + "/correction_map.csv";
        write_correction_csv(map_path, corr.map, corr.mode.omega0_au);
        outputs.push_back(map_path);
        const std::string fov_path = out_dir + "/f_ov.csv";
        write_fov_csv(fov_path, corr.map);
        outputs.push_back(fov_path);
        if (corr.diag_spectrum && corr.corrected_spectrum) {
            const std::string cmp_path = out_dir + "/diagonal_vs_corrected.csv";
            write_spectrum_csv(cmp_path, {*corr.diag_spectrum, *corr.corrected_spectrum},
                               corr.mode.omega0_au);
            outputs.push_back(cmp_path);
        }
        if (verbose) {
            double max_dev = 0.0;
            for (int d = 0; d < corr.map.delta_alphas.size(); ++d)
                max_dev = std::max(max_dev,
                                   std::abs(qhhg::Complex(1.0, 0.0) - corr.map.f_ov(d)));
            std::printf("alpha_m = %.4e, max |1 - f_ov| = %.3e, absorbed norm <= %.3e\n",
                        corr.alpha_m, max_dev, corr.max_absorbed_norm);
        }
    }
    write_manifest_json(out_dir + "/correction_manifest.json", with_corr, result, outputs);

    if (!result.manifest.complete) {
        print_failures(result.manifest);
        return 1;
    }
    std::printf("wrote %s\n", (out_dir + "/correction_map.csv").c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-harmonic spectra driven by quantum states of light"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand name

    GlobalOptions g;
    app.add_option("--config", g.config_path, "configuration file (key = value lines)");
    app.add_option("--set", g.overrides, "override a config key (key=value), repeatable");
    app.add_option("--workers", g.workers, "worker thread count (0 = hardware)");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "reserved; the quadrature pipeline is deterministic");
    app.add_flag("--verbose", g.verbose, "chatty progress output");

    auto* normalize = app.add_subcommand("normalize", "report pulse-mode normalization constants");
    normalize->fallthrough();
    double lambda0_nm = 800.0, area_um2 = 1.0, target_intensity = 1e14, volume_nm3 = 0.0;
    int n_ramp = 5, n_flat = 15;
    normalize->add_option("--lambda0-nm", lambda0_nm, "carrier wavelength (nm)");
    normalize->add_option("--ramp-cycles", n_ramp, "ramp cycles (integer)");
    normalize->add_option("--flat-cycles", n_flat, "flat cycles (integer)");
    normalize->add_option("--area-um2", area_um2, "cross-section (um^2)");
    normalize->add_option("--target-intensity", target_intensity,
                          "report photon number for this peak intensity (W/cm^2)");
    normalize->add_option("--volume-nm3", volume_nm3,
                          "also report photons for a confined mode of this volume");

    auto* spectrum = app.add_subcommand("spectrum", "compute HHG spectra for the configured states");
    spectrum->fallthrough();
    bool resume_flag = false;
    spectrum->add_flag("--resume", resume_flag, "reuse cached propagations from a prior run");

    auto* correction = app.add_subcommand("correction",
                                          "evaluate the single-mode validity factors");
    correction->fallthrough();
    auto* validate = app.add_subcommand("validate", "parse and validate the configuration");
    validate->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        if (normalize->parsed())
            return cmd_normalize(lambda0_nm, n_ramp, n_flat, area_um2, target_intensity,
                                 volume_nm3);
        const qhhg::Config cfg = load_config(g);
        if (validate->parsed()) return cmd_validate(cfg, g.verbose);
        if (spectrum->parsed()) return cmd_spectrum(cfg, resume_flag, g.verbose);
        if (correction->parsed()) return cmd_correction(cfg, g.verbose);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
