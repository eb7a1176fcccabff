#include "qhhg/io.hpp"

#include <charconv>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qhhg/units.hpp"

namespace qhhg {

using nlohmann::json;

// --- hashing -----------------------------------------------------------

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a_string(const std::string& s, std::uint64_t seed) {
    return fnv1a(s.data(), s.size(), seed);
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string shortest_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// --- configuration ------------------------------------------------------

namespace {
const std::map<std::string, std::string>& default_entries() {
    static const std::map<std::string, std::string> defaults = {
        {"lambda0_nm", "800"},
        {"n_ramp_cycles", "5"},
        {"n_flat_cycles", "15"},
        {"area_um2", "1"},
        {"mean_intensity_W_cm2", "1e14"},
        {"states", "coherent,fock,thermal,bsv"},
        {"nodes_narrow", "8"},
        {"nodes_broad", "32"},
        {"tail_quantile", "1e-6"},
        {"a_soft_bohr", "0.8160"},
        {"x_max_bohr", "300"},
        {"n_points", "8192"},
        {"steps_per_cycle", "2048"},
        {"post_pulse_cycles", "3"},
        {"taper_cycles", "2"},
        {"omega_min_over_omega0", "0.25"},
        {"max_harmonic", "60"},
        {"absorber_enabled", "true"},
        {"absorber_fraction", "0.1"},
        {"absorber_exponent", "0.125"},
        {"workers", "0"},
        {"out_dir", "out"},
        {"cache_dir", ""},
        {"dump_records", "false"},
        {"correction_enabled", "false"},
        {"correction_delta_alpha_max", "3"},
        {"correction_delta_alpha_nodes", "13"},
        {"correction_quad_order", "4"},
        {"correction_gaussian_factor", "true"},
        {"correction_coherent_nodes", "8"},
        {"correction_x_max_bohr", "4000"},
        {"correction_n_points", "65536"},
        {"correction_steps_per_cycle", "2048"},
        {"correction_n_ramp_cycles", "3"},
        {"correction_n_flat_cycles", "6"},
        {"correction_projected_field", "true"},
        {"correction_mask_floor_rel", "1e-6"},
        {"correction_mask_local_db", "13"},
        {"correction_max_harmonic", "40"},
        {"correction_post_pulse_cycles", "3"},
        {"correction_taper_cycles", "2"},
    };
    return defaults;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const Config& cfg, const std::string& key) {
    const std::string& v = cfg.get(key);
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing characters");
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "' as number");
    }
}

int parse_int(const Config& cfg, const std::string& key) {
    const double d = parse_double(cfg, key);
    const int i = static_cast<int>(std::llround(d));
    if (std::abs(d - i) > 1e-9)
        throw std::invalid_argument("config key '" + key + "': expected an integer, got '" +
                                    cfg.get(key) + "'");
    return i;
}

bool parse_bool(const Config& cfg, const std::string& key) {
    const std::string& v = cfg.get(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': cannot parse '" + v + "' as boolean");
}
}  // namespace

Config Config::defaults() {
    Config cfg;
    cfg.values_ = default_entries();
    return cfg;
}

void Config::apply_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        apply_override(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void Config::apply_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    apply_text(ss.str(), path);
}

void Config::apply_override(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end())
        throw std::invalid_argument("unknown config key: '" + key + "'");
    it->second = value;
}

const std::string& Config::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end())
        throw std::invalid_argument("unknown config key: '" + key + "'");
    return it->second;
}

bool Config::dump_records() const { return parse_bool(*this, "dump_records"); }

ExperimentPlan Config::to_plan() const {
    ExperimentPlan plan;
    plan.lambda0_nm = parse_double(*this, "lambda0_nm");
    if (plan.lambda0_nm <= 0.0) throw std::invalid_argument("lambda0_nm must be > 0");
    plan.n_ramp = parse_int(*this, "n_ramp_cycles");
    plan.n_flat = parse_int(*this, "n_flat_cycles");
    if (plan.n_ramp < 1) throw std::invalid_argument("n_ramp_cycles must be >= 1");
    if (plan.n_flat < 0) throw std::invalid_argument("n_flat_cycles must be >= 0");
    plan.area_um2 = parse_double(*this, "area_um2");
    if (plan.area_um2 <= 0.0) throw std::invalid_argument("area_um2 must be > 0");
    plan.mean_intensity_w_cm2 = parse_double(*this, "mean_intensity_W_cm2");
    if (plan.mean_intensity_w_cm2 <= 0.0)
        throw std::invalid_argument("mean_intensity_W_cm2 must be > 0");

    const int nodes_narrow = parse_int(*this, "nodes_narrow");
    const int nodes_broad = parse_int(*this, "nodes_broad");
    if (nodes_narrow < 2 || nodes_broad < 2)
        throw std::invalid_argument("nodes_narrow/nodes_broad must be >= 2");
    {
        std::stringstream ss(get("states"));
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            StateSpec spec;
            spec.kind = state_kind_from_string(item);  // throws on typos
            spec.n_nodes = (spec.kind == StateKind::thermal || spec.kind == StateKind::bsv)
                               ? nodes_broad
                               : nodes_narrow;
            plan.states.push_back(spec);
        }
    }
    if (plan.states.empty()) throw std::invalid_argument("states must name at least one state");

    plan.tail_quantile = parse_double(*this, "tail_quantile");
    plan.a_soft = parse_double(*this, "a_soft_bohr");
    if (plan.a_soft <= 0.0) throw std::invalid_argument("a_soft_bohr must be > 0");
    plan.grid.x_max_bohr = parse_double(*this, "x_max_bohr");
    plan.grid.n_points = parse_int(*this, "n_points");
    plan.steps_per_cycle = parse_int(*this, "steps_per_cycle");
    if (plan.steps_per_cycle < 512)
        throw std::invalid_argument("steps_per_cycle must be >= 512 to resolve the field");
    plan.post_pulse_cycles = parse_double(*this, "post_pulse_cycles");
    plan.taper_cycles = parse_double(*this, "taper_cycles");
    if (plan.taper_cycles > plan.post_pulse_cycles)
        throw std::invalid_argument("taper_cycles must not exceed post_pulse_cycles");
    plan.omega_min_factor = parse_double(*this, "omega_min_over_omega0");
    if (plan.omega_min_factor <= 0.0)
        throw std::invalid_argument("omega_min_over_omega0 must be > 0");
    plan.max_harmonic = parse_double(*this, "max_harmonic");
    plan.absorber.enabled = parse_bool(*this, "absorber_enabled");
    plan.absorber.fraction = parse_double(*this, "absorber_fraction");
    plan.absorber.exponent = parse_double(*this, "absorber_exponent");
    plan.workers = parse_int(*this, "workers");
    plan.cache_dir = get("cache_dir");
    plan.keep_records = dump_records();

    if (parse_bool(*this, "correction_enabled")) {
        CorrectionSpec corr;
        corr.delta_alpha_max = parse_double(*this, "correction_delta_alpha_max");
        corr.delta_alpha_nodes = parse_int(*this, "correction_delta_alpha_nodes");
        if (corr.delta_alpha_nodes < 1)
            throw std::invalid_argument("correction_delta_alpha_nodes must be >= 1");
        corr.quad_order = parse_int(*this, "correction_quad_order");
        if (corr.quad_order < 2) throw std::invalid_argument("correction_quad_order must be >= 2");
        corr.compute_gaussian_factor = parse_bool(*this, "correction_gaussian_factor");
        corr.coherent_nodes = parse_int(*this, "correction_coherent_nodes");
        corr.grid.x_max_bohr = parse_double(*this, "correction_x_max_bohr");
        corr.grid.n_points = parse_int(*this, "correction_n_points");
        corr.steps_per_cycle = parse_int(*this, "correction_steps_per_cycle");
        corr.n_ramp = parse_int(*this, "correction_n_ramp_cycles");
        corr.n_flat = parse_int(*this, "correction_n_flat_cycles");
        if (corr.n_ramp < 1) throw std::invalid_argument("correction_n_ramp_cycles must be >= 1");
        corr.projected_field = parse_bool(*this, "correction_projected_field");
        corr.mask_floor_rel = parse_double(*this, "correction_mask_floor_rel");
        corr.mask_local_db = parse_double(*this, "correction_mask_local_db");
        corr.max_harmonic = parse_double(*this, "correction_max_harmonic");
        corr.post_pulse_cycles = parse_double(*this, "correction_post_pulse_cycles");
        corr.taper_cycles = parse_double(*this, "correction_taper_cycles");
        if (corr.taper_cycles > corr.post_pulse_cycles)
            throw std::invalid_argument(
                "correction_taper_cycles must not exceed correction_post_pulse_cycles");
        plan.correction = corr;
    }
    return plan;
}

std::string Config::hash() const {
    std::string canon;
    for (const auto& [k, v] : values_) {
        canon += k;
        canon += '=';
        canon += v;
        canon += '\n';
    }
    return hash_hex(fnv1a_string(canon));
}

// --- result files -------------------------------------------------------

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumResult>& spectra,
                        double omega0_au) {
    if (spectra.empty()) throw std::invalid_argument("write_spectrum_csv: nothing to write");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "harmonic_order";
    for (const auto& s : spectra) out << "," << s.state_label;
    out << "\n";
    const auto& omegas = spectra.front().omegas;
    for (const auto& s : spectra)
        if (s.omegas.size() != omegas.size())
            throw std::invalid_argument("write_spectrum_csv: spectra on different axes");
    for (int j = 0; j < omegas.size(); ++j) {
        out << shortest_double(omegas(j) / omega0_au);
        for (const auto& s : spectra) out << "," << shortest_double(s.spectral_density(j));
        out << "\n";
    }
}

void write_correction_csv(const std::string& path, const CorrectionMap& map, double omega0_au) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    // Both deviation measures per offset: the complex distance (carries the
    // first-order chirp phase) and the modulus deviation (second order; the
    // single-mode-validity figure of merit).
    out << "harmonic_order,masked";
    for (int d = 0; d < map.delta_alphas.size(); ++d) {
        const std::string tag = shortest_double(map.delta_alphas(d));
        out << ",abs_one_minus_f_delta_" << tag << ",one_minus_abs_f_delta_" << tag;
    }
    out << "\n";
    for (int j = 0; j < map.omegas.size(); ++j) {
        out << shortest_double(map.omegas(j) / omega0_au) << ","
            << (map.masked[static_cast<size_t>(j)] ? 1 : 0);
        for (int d = 0; d < map.delta_alphas.size(); ++d) {
            const Complex f = map.f_values(j, d);
            out << "," << shortest_double(std::abs(Complex(1.0, 0.0) - f)) << ","
                << shortest_double(1.0 - std::abs(f));
        }
        out << "\n";
    }
}

void write_fov_csv(const std::string& path, const CorrectionMap& map) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "delta_alpha,f_ov_re,f_ov_im,abs_one_minus_f_ov\n";
    for (int d = 0; d < map.delta_alphas.size(); ++d) {
        const Complex f = map.f_ov(d);
        out << shortest_double(map.delta_alphas(d)) << "," << shortest_double(f.real()) << ","
            << shortest_double(f.imag()) << ","
            << shortest_double(std::abs(Complex(1.0, 0.0) - f)) << "\n";
    }
}

void write_sidecar_json(const std::string& path, const ExperimentPlan& plan,
                        const ExperimentResult& result) {
    json doc;
    doc["mode"] = {
        {"lambda0_nm", plan.lambda0_nm},
        {"omega0_au", result.mode.omega0_au},
        {"n_ramp", result.mode.n_ramp},
        {"n_flat", result.mode.n_flat},
        {"norm_integral", result.mode.norm_integral},
        {"effective_cycles", result.mode.effective_cycles},
        {"v_eff_m3", result.mode.v_eff_m3},
        {"e1p_v_per_m", result.mode.e1p_v_per_m},
        {"i1p_w_cm2", result.mode.i1p_w_cm2},
    };
    doc["mean_photons"] = result.mean_photons;
    doc["ground_energy_hartree"] = result.ground_energy;
    doc["states"] = json::array();
    for (size_t i = 0; i < result.spectra.size(); ++i) {
        json st;
        st["label"] = result.spectra[i].state_label;
        const auto& quad = result.quadratures[i];
        st["nodes_abs_alpha"] = std::vector<double>(quad.nodes.begin(), quad.nodes.end());
        st["weights"] = std::vector<double>(quad.weights.begin(), quad.weights.end());
        if (quad.intensities_w_cm2.size() > 0)
            st["node_intensities_w_cm2"] =
                std::vector<double>(quad.intensities_w_cm2.begin(), quad.intensities_w_cm2.end());
        st["tail_quantile"] = quad.tail_quantile;
        // Convergence bookkeeping: how well the discrete weights reproduce the
        // analytic intensity moment of the state.
        st["weight_sum"] = quad.weights.sum();
        const double moment = (quad.weights * quad.nodes.square()).sum();
        st["intensity_moment"] = moment;
        st["intensity_moment_rel_err"] =
            std::abs(moment - result.mean_photons) / std::max(result.mean_photons, 1.0);
        doc["states"].push_back(st);
    }
    doc["axis"] = {{"label", "harmonic_order"}, {"scale", "log-y recommended"}};
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
}

void write_manifest_json(const std::string& path, const Config& config,
                         const ExperimentResult& result, const std::vector<std::string>& outputs) {
    json doc;
    doc["software"] = "qhhg";
    doc["version"] = "0.1.0";
    doc["config_hash"] = config.hash();
    json echo;
    for (const auto& [k, v] : config.entries()) echo[k] = v;
    doc["config"] = echo;
    doc["complete"] = result.manifest.complete;
    doc["planned_jobs"] = result.manifest.planned_jobs;
    doc["propagations"] = result.manifest.propagations;
    doc["cache_hits"] = result.manifest.cache_hits;
    doc["failures"] = result.manifest.failures;
    doc["outputs"] = outputs;
    json runs = json::array();
    for (const auto& r : result.manifest.runs) {
        runs.push_back({{"alpha_re", r.alpha.real()},
                        {"alpha_im", r.alpha.imag()},
                        {"wall_ms", r.wall_ms},
                        {"norm_loss", r.norm_loss},
                        {"cache_hit", r.cache_hit},
                        {"pipeline", r.pipeline}});
    }
    doc["runs"] = runs;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << "\n";
}

std::optional<std::string> read_manifest_hash(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    try {
        json doc = json::parse(in);
        if (!doc.contains("config_hash")) return std::nullopt;
        return doc["config_hash"].get<std::string>();
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

void write_record_csv(const std::string& path, const DipoleRecord& rec) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t_au,accel_au,norm\n";
    for (int i = 0; i < rec.times.size(); ++i) {
        out << shortest_double(rec.times(i)) << "," << shortest_double(rec.accel(i)) << ","
            << shortest_double(rec.norm_history(i)) << "\n";
    }
}

// --- propagation cache --------------------------------------------------

namespace {
constexpr std::uint32_t kCacheMagic = 0x51484731;  // "QHG1"

template <typename T>
void put(std::string& buf, const T& v) {
    const char* p = reinterpret_cast<const char*>(&v);
    buf.append(p, sizeof(T));
}

template <typename T>
bool take(const std::string& buf, size_t& pos, T& v) {
    if (pos + sizeof(T) > buf.size()) return false;
    std::memcpy(&v, buf.data() + pos, sizeof(T));
    pos += sizeof(T);
    return true;
}
}  // namespace

void write_cached_run(const std::string& path, const CachedRun& run) {
    std::string buf;
    put(buf, kCacheMagic);
    const std::int64_t n_samples = run.record.times.size();
    const std::int64_t n_grid = run.final_state.psi.size();
    put(buf, n_samples);
    put(buf, n_grid);
    put(buf, run.record.alpha);
    put(buf, run.record.dt);
    put(buf, run.absorbed_norm);
    put(buf, run.final_state.grid.x_min);
    put(buf, run.final_state.grid.x_max);
    buf.append(reinterpret_cast<const char*>(run.record.times.data()),
               sizeof(double) * n_samples);
    buf.append(reinterpret_cast<const char*>(run.record.accel.data()),
               sizeof(double) * n_samples);
    buf.append(reinterpret_cast<const char*>(run.record.position.data()),
               sizeof(double) * n_samples);
    buf.append(reinterpret_cast<const char*>(run.record.norm_history.data()),
               sizeof(double) * n_samples);
    buf.append(reinterpret_cast<const char*>(run.final_state.psi.data()),
               sizeof(Complex) * n_grid);
    const std::uint64_t checksum = fnv1a(buf.data(), buf.size());
    put(buf, checksum);

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw std::runtime_error("cannot open for writing: " + tmp);
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    }
    std::filesystem::rename(tmp, path);
}

std::optional<CachedRun> read_cached_run(const std::string& path, const Grid& expected_grid,
                                         int expected_samples) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string buf = ss.str();
    if (buf.size() < sizeof(std::uint64_t)) return std::nullopt;

    const std::string body = buf.substr(0, buf.size() - sizeof(std::uint64_t));
    std::uint64_t stored = 0;
    std::memcpy(&stored, buf.data() + body.size(), sizeof(stored));
    if (fnv1a(body.data(), body.size()) != stored) return std::nullopt;

    size_t pos = 0;
    std::uint32_t magic = 0;
    std::int64_t n_samples = 0, n_grid = 0;
    Complex alpha;
    double dt = 0.0, absorbed = 0.0, x_min = 0.0, x_max = 0.0;
    if (!take(body, pos, magic) || magic != kCacheMagic) return std::nullopt;
    if (!take(body, pos, n_samples) || !take(body, pos, n_grid)) return std::nullopt;
    if (!take(body, pos, alpha) || !take(body, pos, dt) || !take(body, pos, absorbed))
        return std::nullopt;
    if (!take(body, pos, x_min) || !take(body, pos, x_max)) return std::nullopt;
    if (n_samples != expected_samples || n_grid != expected_grid.n_points) return std::nullopt;
    if (x_min != expected_grid.x_min || x_max != expected_grid.x_max) return std::nullopt;
    const size_t need = pos + sizeof(double) * 4 * n_samples + sizeof(Complex) * n_grid;
    if (body.size() != need) return std::nullopt;

    CachedRun run;
    run.record.alpha = alpha;
    run.record.dt = dt;
    run.absorbed_norm = absorbed;
    run.record.times.resize(n_samples);
    run.record.accel.resize(n_samples);
    run.record.position.resize(n_samples);
    run.record.norm_history.resize(n_samples);
    std::memcpy(run.record.times.data(), body.data() + pos, sizeof(double) * n_samples);
    pos += sizeof(double) * n_samples;
    std::memcpy(run.record.accel.data(), body.data() + pos, sizeof(double) * n_samples);
    pos += sizeof(double) * n_samples;
    std::memcpy(run.record.position.data(), body.data() + pos, sizeof(double) * n_samples);
    pos += sizeof(double) * n_samples;
    std::memcpy(run.record.norm_history.data(), body.data() + pos, sizeof(double) * n_samples);
    pos += sizeof(double) * n_samples;
    Eigen::VectorXcd psi(n_grid);
    std::memcpy(psi.data(), body.data() + pos, sizeof(Complex) * n_grid);
    run.final_state = Wavefunction(expected_grid, std::move(psi));
    return run;
}

std::string cache_file_name(std::uint64_t context_hash, Complex alpha) {
    std::uint64_t h = context_hash;
    h = fnv1a(&alpha, sizeof(alpha), h);
    return hash_hex(h) + ".rec";
}

}  // namespace qhhg
