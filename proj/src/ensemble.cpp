#include "qhhg/ensemble.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <thread>

#include "qhhg/io.hpp"

namespace qhhg {

namespace {

int next_pow2(int n) {
    int p = 1;
    while (p < n) p *= 2;
    return p;
}

struct PipelineContext {
    PulseMode mode;
    const SoftCoulombAtom* atom = nullptr;
    double t0 = 0.0;
    double dt = 0.0;
    int n_samples = 0;
    int n_pad = 0;
    double omega_min = 0.0;
    double omega_max = 0.0;  // storage cap for spectra
    double taper_au = 0.0;
    AbsorberSpec absorber;
    bool projected = false;
    Eigen::VectorXcd g_plus;  // projected mode samples on the padded grid
    std::string cache_dir;
    std::uint64_t context_hash = 0;
    std::string pipeline_name;
};

std::uint64_t hash_doubles(std::uint64_t h, std::initializer_list<double> vals) {
    for (double v : vals) h = fnv1a(&v, sizeof(v), h);
    return h;
}

PipelineContext make_context(const PulseMode& mode, const SoftCoulombAtom& atom,
                             int steps_per_cycle, double post_pulse_cycles, double taper_cycles,
                             double omega_min, double max_harmonic, const AbsorberSpec& absorber,
                             bool projected, const std::string& cache_dir,
                             const std::string& name) {
    PipelineContext ctx;
    ctx.mode = mode;
    ctx.atom = &atom;
    ctx.dt = mode.period_au / steps_per_cycle;
    ctx.t0 = -mode.half_support();
    const double span = 2.0 * mode.half_support() + post_pulse_cycles * mode.period_au;
    ctx.n_samples = static_cast<int>(std::llround(span / ctx.dt)) + 1;
    ctx.n_pad = next_pow2(ctx.n_samples);
    ctx.omega_min = omega_min;
    ctx.omega_max = max_harmonic * mode.omega0_au;
    ctx.taper_au = taper_cycles * mode.period_au;
    ctx.absorber = absorber;
    ctx.projected = projected;
    ctx.cache_dir = cache_dir;
    ctx.pipeline_name = name;
    if (projected)
        ctx.g_plus = mode_samples_projected(mode, ctx.t0, ctx.dt, ctx.n_pad);

    std::uint64_t h = fnv1a_string(name);
    h = hash_doubles(h, {mode.lambda0_m, static_cast<double>(mode.n_ramp),
                         static_cast<double>(mode.n_flat), mode.area_m2, mode.e1p_au,
                         ctx.t0, ctx.dt, static_cast<double>(ctx.n_samples),
                         atom.a_soft, atom.grid.x_max, static_cast<double>(atom.grid.n_points),
                         absorber.enabled ? absorber.fraction : -1.0, absorber.exponent,
                         projected ? 1.0 : 0.0});
    ctx.context_hash = h;
    return ctx;
}

Eigen::ArrayXd padded_field_samples(const PipelineContext& ctx, Complex alpha) {
    if (ctx.projected) {
        Eigen::ArrayXd e(ctx.n_pad);
        for (int k = 0; k < ctx.n_pad; ++k) e(k) = 2.0 * std::real(alpha * ctx.g_plus(k));
        return e;
    }
    const ClassicalField f = classical_field(ctx.mode, alpha, ctx.t0, ctx.dt, ctx.n_pad);
    return f.efield;
}

PositiveSpectrum capped(PositiveSpectrum spec, double omega_max) {
    if (omega_max <= 0.0) return spec;
    int keep = 0;
    while (keep < spec.omega.size() && spec.omega(keep) <= omega_max) ++keep;
    spec.omega.conservativeResize(keep);
    spec.value.conservativeResize(keep);
    return spec;
}

SpectralDipole capped(SpectralDipole d, double omega_max) {
    if (omega_max <= 0.0) return d;
    int keep = 0;
    while (keep < d.omegas.size() && d.omegas(keep) <= omega_max) ++keep;
    d.omegas.conservativeResize(keep);
    d.value.conservativeResize(keep);
    d.accel_spectrum.conservativeResize(keep);
    return d;
}

struct JobOutput {
    SpectralDipole dipole;
    SpectralDipole dipole_drive;  // dipole-route transform, correction jobs only
    PositiveSpectrum field_spec;
    Wavefunction final_state;
    DipoleRecord record;
    double absorbed = 0.0;
    double wall_ms = 0.0;
    bool cache_hit = false;
    bool ok = false;
    std::string error;
};

JobOutput run_one(const PipelineContext& ctx, Complex alpha, bool keep_state, bool with_field,
                  bool keep_record) {
    JobOutput out;
    const auto start = std::chrono::steady_clock::now();

    const Eigen::ArrayXd efield_pad = padded_field_samples(ctx, alpha);
    ClassicalField tdse_field;
    tdse_field.times =
        ctx.t0 + ctx.dt * Eigen::ArrayXd::LinSpaced(ctx.n_samples, 0, ctx.n_samples - 1);
    tdse_field.efield = efield_pad.head(ctx.n_samples);
    tdse_field.alpha = alpha;
    tdse_field.dt = ctx.dt;

    DipoleRecord record;
    Wavefunction final_state;
    double absorbed = 0.0;
    bool from_cache = false;

    if (!ctx.cache_dir.empty()) {
        const std::string path =
            ctx.cache_dir + "/" + cache_file_name(ctx.context_hash, alpha);
        if (auto cached = read_cached_run(path, ctx.atom->grid, ctx.n_samples)) {
            record = std::move(cached->record);
            final_state = std::move(cached->final_state);
            absorbed = cached->absorbed_norm;
            from_cache = true;
        }
    }
    if (!from_cache) {
        PropagationResult prop = propagate(*ctx.atom, tdse_field, ctx.absorber);
        record = std::move(prop.record);
        final_state = std::move(prop.final_state);
        absorbed = prop.absorbed_norm;
        if (!ctx.cache_dir.empty()) {
            CachedRun cached;
            cached.record = record;
            cached.final_state = final_state;
            cached.absorbed_norm = absorbed;
            write_cached_run(ctx.cache_dir + "/" + cache_file_name(ctx.context_hash, alpha),
                             cached);
        }
    }

    const DipoleRecord windowed =
        temporal_window(record, ctx.mode.half_support(), ctx.taper_au);
    out.dipole = capped(spectral_dipole(windowed, ctx.omega_min, ctx.n_pad), ctx.omega_max);
    if (with_field) {
        Eigen::VectorXcd field_cplx = efield_pad.cast<Complex>().matrix();
        out.field_spec =
            capped(positive_unitary_spectrum(ctx.t0, ctx.dt, field_cplx), ctx.omega_max);
        out.dipole_drive = capped(dipole_route_spectrum(record, ctx.n_pad), ctx.omega_max);
    }
    if (keep_state) out.final_state = std::move(final_state);
    if (keep_record) out.record = std::move(record);
    out.absorbed = absorbed;
    out.cache_hit = from_cache;
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    out.ok = true;
    return out;
}

void run_pool(const PipelineContext& ctx, const std::vector<Complex>& alphas, int workers,
              bool keep_state, bool with_field, bool keep_record,
              std::vector<JobOutput>& outputs) {
    const int n_jobs = static_cast<int>(alphas.size());
    outputs.resize(n_jobs);
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, n_jobs);

    std::atomic<int> next{0};
    auto body = [&]() {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n_jobs) break;
            try {
                outputs[i] = run_one(ctx, alphas[i], keep_state, with_field, keep_record);
            } catch (const std::exception& e) {
                outputs[i].ok = false;
                outputs[i].error = e.what();
            }
        }
    };
    if (workers == 1) {
        body();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (int w = 0; w < workers; ++w) threads.emplace_back(body);
        for (auto& t : threads) t.join();
    }
}

// Deterministic unique-alpha registry: insertion order is the job order.
class AlphaSet {
public:
    int index_of(Complex alpha) {
        const auto key = std::make_pair(alpha.real(), alpha.imag());
        auto it = lookup_.find(key);
        if (it != lookup_.end()) return it->second;
        const int idx = static_cast<int>(alphas_.size());
        lookup_.emplace(key, idx);
        alphas_.push_back(alpha);
        return idx;
    }
    const std::vector<Complex>& alphas() const { return alphas_; }

private:
    std::map<std::pair<double, double>, int> lookup_;
    std::vector<Complex> alphas_;
};

void append_manifest(RunManifest& manifest, const PipelineContext& ctx,
                     const std::vector<Complex>& alphas, const std::vector<JobOutput>& outputs) {
    for (size_t i = 0; i < outputs.size(); ++i) {
        const auto& o = outputs[i];
        if (!o.ok) {
            manifest.failures.push_back(ctx.pipeline_name + " alpha=(" +
                                        shortest_double(alphas[i].real()) + "," +
                                        shortest_double(alphas[i].imag()) + "): " + o.error);
            continue;
        }
        RunRecord r;
        r.alpha = alphas[i];
        r.wall_ms = o.wall_ms;
        r.norm_loss = o.absorbed;
        r.cache_hit = o.cache_hit;
        r.pipeline = ctx.pipeline_name;
        manifest.runs.push_back(r);
        manifest.planned_jobs += 1;
        if (o.cache_hit)
            manifest.cache_hits += 1;
        else
            manifest.propagations += 1;
    }
}

CorrectionOutputs run_correction(const ExperimentPlan& plan, const CorrectionSpec& spec,
                                 RunManifest& manifest) {
    CorrectionOutputs out;
    out.mode = build_mode(plan.lambda0_nm * 1e-9, spec.n_ramp, spec.n_flat, plan.area_um2 * 1e-12);
    out.alpha_m = std::sqrt(plan.mean_intensity_w_cm2 / out.mode.i1p_w_cm2);

    const Grid grid(spec.grid.x_max_bohr, spec.grid.n_points);
    const SoftCoulombAtom atom = ground_state(grid, plan.a_soft);

    AbsorberSpec no_absorber;
    no_absorber.enabled = false;  // offset runs must retain the ionized flux
    PipelineContext ctx = make_context(
        out.mode, atom, spec.steps_per_cycle, spec.post_pulse_cycles, spec.taper_cycles,
        plan.omega_min_factor * out.mode.omega0_au, spec.max_harmonic, no_absorber,
        spec.projected_field, plan.cache_dir, "correction");

    // Real-offset grid for the f_ov / f(w) map, plus Gauss-Hermite nodes for C(w).
    Eigen::ArrayXd deltas;
    if (spec.delta_alpha_nodes == 1)
        deltas = Eigen::ArrayXd::Zero(1);
    else
        deltas = Eigen::ArrayXd::LinSpaced(spec.delta_alpha_nodes, 0.0, spec.delta_alpha_max);
    std::vector<GaussianNode> gh_nodes;
    if (spec.compute_gaussian_factor) gh_nodes = gaussian_correction_nodes(spec.quad_order);

    AlphaSet set;
    const int idx_mean = set.index_of(Complex(out.alpha_m, 0.0));
    std::vector<std::pair<int, int>> delta_pairs;  // (alpha index, beta index) per real delta
    for (int d = 0; d < deltas.size(); ++d) {
        const Complex da(deltas(d), 0.0);
        delta_pairs.emplace_back(set.index_of(Complex(out.alpha_m, 0.0) + da),
                                 set.index_of(Complex(out.alpha_m, 0.0) - da));
    }
    std::vector<std::pair<int, int>> gh_pairs;
    for (const auto& node : gh_nodes) {
        gh_pairs.emplace_back(set.index_of(Complex(out.alpha_m, 0.0) + node.delta),
                              set.index_of(Complex(out.alpha_m, 0.0) - node.delta));
    }

    std::vector<JobOutput> outputs;
    run_pool(ctx, set.alphas(), plan.workers, /*keep_state=*/true, /*with_field=*/true,
             /*keep_record=*/false, outputs);
    append_manifest(manifest, ctx, set.alphas(), outputs);
    for (const auto& o : outputs)
        if (!o.ok) return out;  // failures already recorded

    for (const auto& o : outputs) out.max_absorbed_norm = std::max(out.max_absorbed_norm, o.absorbed);

    const SpectralDipole& dm = outputs[idx_mean].dipole;
    out.map.denom_floor =
        denominator_floor(dm, 2.0 * out.mode.omega0_au, ctx.omega_max, spec.mask_floor_rel);
    out.map.alpha_m = Complex(out.alpha_m, 0.0);
    out.map.omegas = dm.omegas;
    out.map.delta_alphas = deltas;
    out.map.f_values.resize(dm.omegas.size(), deltas.size());
    out.map.f_ov.resize(deltas.size());
    out.map.masked = ratio_mask(dm, out.map.denom_floor, spec.mask_local_db,
                                0.75 * out.mode.omega0_au);

    auto build_inputs = [&](int ia, int ib, Complex delta) {
        CorrectionInputs in;
        in.alpha_m = Complex(out.alpha_m, 0.0);
        in.delta_alpha = delta;
        in.dipole_alpha = &outputs[ia].dipole;
        in.dipole_beta = &outputs[ib].dipole;
        in.dipole_mean = &dm;
        in.dipole_alpha_drive = &outputs[ia].dipole_drive;
        in.dipole_beta_drive = &outputs[ib].dipole_drive;
        in.field_alpha = &outputs[ia].field_spec;
        in.field_beta = &outputs[ib].field_spec;
        // <phi_beta | phi_alpha>
        in.overlap = inner_product(outputs[ib].final_state, outputs[ia].final_state);
        return in;
    };

    for (int d = 0; d < deltas.size(); ++d) {
        const auto [ia, ib] = delta_pairs[d];
        CorrectionInputs in = build_inputs(ia, ib, Complex(deltas(d), 0.0));
        out.map.f_ov(d) = overlap_factor(in);
        std::vector<std::uint8_t> masked = out.map.masked;
        out.map.f_values.col(d) = mode_correction(in, out.map.denom_floor, nullptr);
        // Re-impose the neighborhood mask on the stored column: bins the mask
        // rejects are reported as exactly one.
        for (int j = 0; j < out.map.f_values.rows(); ++j)
            if (masked[static_cast<size_t>(j)]) out.map.f_values(j, d) = Complex(1.0, 0.0);
    }

    if (spec.compute_gaussian_factor) {
        std::vector<Eigen::VectorXcd> rows;
        rows.reserve(gh_nodes.size());
        for (size_t g = 0; g < gh_nodes.size(); ++g) {
            const auto [ia, ib] = gh_pairs[g];
            CorrectionInputs in = build_inputs(ia, ib, gh_nodes[g].delta);
            rows.push_back(mode_correction(in, out.map.denom_floor, nullptr));
        }
        out.gaussian_factor = gaussian_weighted_correction(rows, gh_nodes);

        // Eq-26 vs Eq-27 comparison on this pulse: one coherent ensemble,
        // assembled with and without the factor.
        const double n_bar = plan.mean_intensity_w_cm2 / out.mode.i1p_w_cm2;
        const RadialQuadrature quad = radial_quadrature(
            make_coherent(n_bar), spec.coherent_nodes, out.mode.i1p_w_cm2, plan.tail_quantile);
        AlphaSet coh_set;
        std::vector<int> node_jobs;
        for (int i = 0; i < quad.nodes.size(); ++i)
            node_jobs.push_back(coh_set.index_of(Complex(quad.nodes(i), 0.0)));
        std::vector<JobOutput> coh_outputs;
        run_pool(ctx, coh_set.alphas(), plan.workers, false, false, false, coh_outputs);
        append_manifest(manifest, ctx, coh_set.alphas(), coh_outputs);
        for (const auto& o : coh_outputs)
            if (!o.ok) return out;
        std::vector<SpectralDipole> dipoles;
        dipoles.reserve(node_jobs.size());
        for (int j : node_jobs) dipoles.push_back(coh_outputs[j].dipole);
        out.diag_spectrum = assemble_spectrum(dipoles, quad, "coherent_diag");
        out.corrected_spectrum =
            assemble_spectrum_corrected(dipoles, quad, out.gaussian_factor, "coherent_corrected");
    }
    return out;
}

}  // namespace

std::string plan_hash(const ExperimentPlan& plan) {
    std::uint64_t h = fnv1a_string("qhhg-plan");
    h = hash_doubles(
        h, {plan.lambda0_nm, static_cast<double>(plan.n_ramp), static_cast<double>(plan.n_flat),
            plan.area_um2, plan.mean_intensity_w_cm2, plan.a_soft, plan.grid.x_max_bohr,
            static_cast<double>(plan.grid.n_points), static_cast<double>(plan.steps_per_cycle),
            plan.post_pulse_cycles, plan.taper_cycles, plan.omega_min_factor, plan.max_harmonic,
            plan.absorber.enabled ? 1.0 : 0.0, plan.absorber.fraction, plan.absorber.exponent,
            plan.tail_quantile});
    for (const auto& s : plan.states)
        h = hash_doubles(h, {static_cast<double>(static_cast<int>(s.kind)),
                             static_cast<double>(s.n_nodes)});
    if (plan.correction) {
        const auto& c = *plan.correction;
        h = hash_doubles(h, {c.delta_alpha_max, static_cast<double>(c.delta_alpha_nodes),
                             static_cast<double>(c.quad_order),
                             c.compute_gaussian_factor ? 1.0 : 0.0,
                             static_cast<double>(c.coherent_nodes), c.grid.x_max_bohr,
                             static_cast<double>(c.grid.n_points),
                             static_cast<double>(c.steps_per_cycle),
                             static_cast<double>(c.n_ramp), static_cast<double>(c.n_flat),
                             c.projected_field ? 1.0 : 0.0, c.mask_floor_rel, c.mask_local_db, c.max_harmonic,
                             c.post_pulse_cycles, c.taper_cycles});
    }
    return hash_hex(h);
}

ExperimentResult execute(const ExperimentPlan& plan) {
    if (plan.mean_intensity_w_cm2 <= 0.0)
        throw std::invalid_argument("execute: mean intensity must be positive");
    if (plan.states.empty() && !plan.correction)
        throw std::invalid_argument("execute: nothing to do");
    if (!plan.cache_dir.empty()) std::filesystem::create_directories(plan.cache_dir);

    ExperimentResult result;
    result.manifest.config_hash = plan_hash(plan);
    result.mode =
        build_mode(plan.lambda0_nm * 1e-9, plan.n_ramp, plan.n_flat, plan.area_um2 * 1e-12);
    result.mean_photons = plan.mean_intensity_w_cm2 / result.mode.i1p_w_cm2;

    if (!plan.states.empty()) {
        const Grid grid(plan.grid.x_max_bohr, plan.grid.n_points);
        const SoftCoulombAtom atom = ground_state(grid, plan.a_soft);
        result.ground_energy = atom.ground_energy;

        PipelineContext ctx = make_context(
            result.mode, atom, plan.steps_per_cycle, plan.post_pulse_cycles, plan.taper_cycles,
            plan.omega_min_factor * result.mode.omega0_au, plan.max_harmonic, plan.absorber,
            /*projected=*/false, plan.cache_dir, "spectrum");

        AlphaSet set;
        std::vector<std::vector<int>> node_jobs(plan.states.size());
        for (size_t s = 0; s < plan.states.size(); ++s) {
            const LightState state = make_state(plan.states[s].kind, result.mean_photons);
            RadialQuadrature quad =
                radial_quadrature(state, plan.states[s].n_nodes, result.mode.i1p_w_cm2,
                                  plan.tail_quantile);
            for (int i = 0; i < quad.nodes.size(); ++i)
                node_jobs[s].push_back(set.index_of(Complex(quad.nodes(i), 0.0)));
            result.quadratures.push_back(std::move(quad));
        }

        std::vector<JobOutput> outputs;
        run_pool(ctx, set.alphas(), plan.workers, false, false, plan.keep_records, outputs);
        append_manifest(result.manifest, ctx, set.alphas(), outputs);

        bool all_ok = true;
        for (const auto& o : outputs) all_ok = all_ok && o.ok;
        if (all_ok) {
            for (size_t s = 0; s < plan.states.size(); ++s) {
                std::vector<SpectralDipole> dipoles;
                dipoles.reserve(node_jobs[s].size());
                for (int j : node_jobs[s]) dipoles.push_back(outputs[j].dipole);
                result.spectra.push_back(assemble_spectrum(dipoles, result.quadratures[s],
                                                           to_string(plan.states[s].kind)));
            }
            if (plan.keep_records)
                for (auto& o : outputs) result.records.push_back(std::move(o.record));
        }
    } else {
        // Correction-only plans still report the atom calibration.
        result.ground_energy = 0.0;
    }

    if (plan.correction)
        result.correction = run_correction(plan, *plan.correction, result.manifest);

    result.manifest.complete = result.manifest.failures.empty();
    return result;
}

ExperimentResult resume(const std::string& prior_config_hash, const ExperimentPlan& plan) {
    if (prior_config_hash != plan_hash(plan))
        throw std::invalid_argument(
            "resume: the stored manifest was produced by a different configuration (hash " +
            prior_config_hash + " vs " + plan_hash(plan) + "); refusing to mix results");
    if (plan.cache_dir.empty())
        throw std::invalid_argument("resume: plan has no cache directory to resume from");
    return execute(plan);
}

}  // namespace qhhg
