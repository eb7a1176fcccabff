#ifndef QHHG_IO_HPP
#define QHHG_IO_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qhhg/ensemble.hpp"

namespace qhhg {

// --- hashing -----------------------------------------------------------

std::uint64_t fnv1a(const void* data, std::size_t len,
                    std::uint64_t seed = 1469598103934665603ull);
std::uint64_t fnv1a_string(const std::string& s, std::uint64_t seed = 1469598103934665603ull);
std::string hash_hex(std::uint64_t h);

// Shortest round-trip decimal form of a double ('.' decimal point, RFC-4180
// friendly, bit-reproducible).
std::string shortest_double(double v);

// --- configuration ------------------------------------------------------

// Flat key = value document with '#' comments. Every key has a default;
// unknown keys are rejected. Values are kept as strings until to_plan().
class Config {
public:
    static Config defaults();

    void apply_file(const std::string& path);
    void apply_text(const std::string& text, const std::string& origin = "<text>");
    void apply_override(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    const std::map<std::string, std::string>& entries() const { return values_; }

    // Validates and materializes the plan; throws std::invalid_argument naming
    // the offending key.
    ExperimentPlan to_plan() const;

    std::string out_dir() const { return get("out_dir"); }
    bool dump_records() const;

    std::string hash() const;

private:
    std::map<std::string, std::string> values_;
};

// --- result files -------------------------------------------------------

void write_spectrum_csv(const std::string& path, const std::vector<SpectrumResult>& spectra,
                        double omega0_au);
void write_sidecar_json(const std::string& path, const ExperimentPlan& plan,
                        const ExperimentResult& result);
void write_correction_csv(const std::string& path, const CorrectionMap& map, double omega0_au);
void write_fov_csv(const std::string& path, const CorrectionMap& map);
void write_manifest_json(const std::string& path, const Config& config,
                         const ExperimentResult& result, const std::vector<std::string>& outputs);
std::optional<std::string> read_manifest_hash(const std::string& path);

void write_record_csv(const std::string& path, const DipoleRecord& rec);

// --- propagation cache --------------------------------------------------

struct CachedRun {
    DipoleRecord record;
    Wavefunction final_state;
    double absorbed_norm = 0.0;
};

// Binary record+state file with an embedded checksum. Reads return nullopt on
// missing, mismatched, or corrupt files (callers then recompute).
void write_cached_run(const std::string& path, const CachedRun& run);
std::optional<CachedRun> read_cached_run(const std::string& path, const Grid& expected_grid,
                                         int expected_samples);

std::string cache_file_name(std::uint64_t context_hash, Complex alpha);

}  // namespace qhhg

#endif  // QHHG_IO_HPP
