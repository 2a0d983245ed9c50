#pragma once

/// @file experiment.hpp
/// @brief Experiment specs, validation, execution and run manifests.

#include "cbias/primes.hpp"
#include "cbias/summation.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbias::experiment {

using primes::u64;

inline constexpr const char* kVersion = "1.0.0";
inline constexpr int kManifestSchema = 1;

/// Invalid experiment specification; `key()` names the offending key.
class SpecError : public std::invalid_argument {
public:
    SpecError(std::string key, const std::string& what)
        : std::invalid_argument(what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

const std::vector<std::string>& kinds();

struct ExperimentSpec {
    std::string kind;
    std::map<std::string, std::string> params;  ///< kind-specific
    u64 limit = 1000000;
    u64 x_min = 1000;
    double grid_ratio = 1.05;
    unsigned threads = 1;
    u64 segment_size = primes::kDefaultSegmentSize;
    std::filesystem::path out = "out";
    bool resume = false;
    /// Journal the accumulator state every this many segments (0 = never).
    u64 journal_every = 16;

    /// Stable text form of everything that affects the emitted data.
    std::string canonical() const;
};

/// Parses "key = value" lines ('#' starts a comment).
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Applies global keys (limit, x-min, grid-ratio, threads, out, segment-size,
/// journal-every) from `values` to the spec and the rest to spec.params.
void apply_values(ExperimentSpec& spec, const std::map<std::string, std::string>& values);

/// Throws SpecError naming the offending key.
void validate(const ExperimentSpec& spec);

struct NamedSeries {
    std::string file;  ///< output file name, e.g. "classes.csv"
    sums::CheckpointSeries series;
};

/// Validates and computes every series of the experiment without writing files.
std::vector<NamedSeries> compute(const ExperimentSpec& spec);

struct OutputFile {
    std::string file;
    std::size_t rows;
    std::string checksum;  ///< FNV-1a 64, hex
};

struct RunManifest {
    std::string started, finished;
    std::vector<OutputFile> outputs;
    std::string json;  ///< the manifest as written
};

/// compute(), then one CSV per series and manifest.json in spec.out.
/// The manifest is written only after every CSV is in place.
RunManifest run(const ExperimentSpec& spec);

}  // namespace cbias::experiment
