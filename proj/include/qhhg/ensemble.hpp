#ifndef QHHG_ENSEMBLE_HPP
#define QHHG_ENSEMBLE_HPP

#include <optional>
#include <string>
#include <vector>

#include "qhhg/correction.hpp"
#include "qhhg/light_states.hpp"
#include "qhhg/spectrum.hpp"
#include "qhhg/tdse.hpp"

namespace qhhg {

struct GridSpec {
    double x_max_bohr = 300.0;
    int n_points = 8192;
};

struct StateSpec {
    StateKind kind = StateKind::coherent;
    int n_nodes = 8;
};

// Settings for the single-mode-validity pipeline. It runs on its own pulse and
// grid: the offset runs must retain the ionized flux (no absorber), so the box
// is sized to contain it, and shorter cycle counts keep that affordable. The
// target mean intensity and hence alpha_m are taken from the parent plan.
struct CorrectionSpec {
    double delta_alpha_max = 3.0;
    int delta_alpha_nodes = 13;
    int quad_order = 4;
    bool compute_gaussian_factor = true;
    int coherent_nodes = 8;  // Eq-26/Eq-27 comparison ensemble
    GridSpec grid{4000.0, 65536};
    int steps_per_cycle = 2048;
    int n_ramp = 3;
    int n_flat = 6;
    bool projected_field = true;
    double mask_floor_rel = 1e-6;
    double mask_local_db = 13.0;  // neighborhood depth that marks minima flanks
    double max_harmonic = 40.0;
    double post_pulse_cycles = 3.0;
    double taper_cycles = 2.0;
};

struct ExperimentPlan {
    double lambda0_nm = 800.0;
    int n_ramp = 5;
    int n_flat = 15;
    double area_um2 = 1.0;
    double mean_intensity_w_cm2 = 1e14;
    std::vector<StateSpec> states;
    double a_soft = 0.8160;
    GridSpec grid;
    int steps_per_cycle = 2048;
    double post_pulse_cycles = 3.0;
    double taper_cycles = 2.0;
    double omega_min_factor = 0.25;  // omega_min = factor * omega0
    double max_harmonic = 60.0;      // stored/reported band
    AbsorberSpec absorber;
    double tail_quantile = 1e-6;
    std::optional<CorrectionSpec> correction;
    int workers = 0;  // 0 = hardware concurrency
    std::string cache_dir;
    bool keep_records = false;  // retain per-run dipole records in the result
};

struct RunRecord {
    Complex alpha{0.0, 0.0};
    double wall_ms = 0.0;
    double norm_loss = 0.0;
    bool cache_hit = false;
    std::string pipeline;  // "spectrum" or "correction"
};

struct RunManifest {
    std::string config_hash;
    int propagations = 0;
    int cache_hits = 0;
    int planned_jobs = 0;
    std::vector<RunRecord> runs;
    std::vector<std::string> failures;
    bool complete = false;
};

struct CorrectionOutputs {
    PulseMode mode;  // correction-pulse mode (may differ from the spectrum pulse)
    double alpha_m = 0.0;
    CorrectionMap map;
    Eigen::VectorXcd gaussian_factor;        // C(w) on the map axis (empty if skipped)
    std::optional<SpectrumResult> diag_spectrum;       // Eq-26 assembly
    std::optional<SpectrumResult> corrected_spectrum;  // Eq-27 assembly
    double max_absorbed_norm = 0.0;
};

struct ExperimentResult {
    PulseMode mode;
    double mean_photons = 0.0;
    double ground_energy = 0.0;
    std::vector<SpectrumResult> spectra;  // parallel to plan.states
    std::vector<RadialQuadrature> quadratures;
    std::optional<CorrectionOutputs> correction;
    std::vector<DipoleRecord> records;  // only if keep_records
    RunManifest manifest;
};

// Run the full pipeline. Deterministic for a fixed plan: jobs are indexed and
// reduced in index order regardless of worker count.
ExperimentResult execute(const ExperimentPlan& plan);

// execute() with a prior manifest's config hash enforced; completed runs are
// picked up from the on-disk cache.
ExperimentResult resume(const std::string& prior_config_hash, const ExperimentPlan& plan);

// Canonical hash of the plan (drives cache keys and resume checks).
std::string plan_hash(const ExperimentPlan& plan);

}  // namespace qhhg

#endif  // QHHG_ENSEMBLE_HPP
