#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "idsim/classify.hpp"
#include "idsim/clustering.hpp"
#include "idsim/ingest.hpp"
#include "idsim/scalar_reduce.hpp"
#include "idsim/serialize.hpp"
#include "idsim/spectral.hpp"

namespace idsim {

inline constexpr const char* kVersion = "0.1.0";

enum class InputFormat { trace, kdd_csv, synthetic };

std::string to_string(InputFormat format);
InputFormat parse_input_format(std::string_view name);

struct PipelineConfig {
    InputFormat format = InputFormat::trace;
    std::string input;        // trace / kdd-csv path
    std::string test_input;   // optional; otherwise a stratified split of `input`
    std::string generator;    // synthetic: generator file path or "preset:<name>"
    std::string category_map; // kdd-csv: attack -> category table
    double test_fraction = 0.2;
    MatrixMode mode = MatrixMode::count;
    double energy_fraction = 0.90;
    bool kaiser = true;
    std::optional<std::size_t> keep_count;
    MeasureKind measure = MeasureKind::idsim;
    std::size_t clusters = 0;  // 0: number of distinct training labels
    std::optional<std::uint64_t> seed;
    std::size_t knn_k = 1;
    std::string normal_label = "normal";
    std::size_t max_iter = 100;
    double tol = 1e-6;
    std::string output_dir = "out";

    // Throws ConfigError naming the offending key.
    void validate() const;

    // Flat `key = value` form; `to_key_values` materializes every default.
    static PipelineConfig from_key_values(const std::map<std::string, std::string>& kv);
    std::map<std::string, std::string> to_key_values() const;
};

std::map<std::string, std::string> parse_key_values(std::istream& in);
PipelineConfig parse_pipeline_config(std::istream& in);

// Seeds for each stochastic stage, derived from the single configured seed.
struct StageSeeds {
    std::uint64_t generator;
    std::uint64_t split;
    std::uint64_t clustering;
};
StageSeeds derive_seeds(std::uint64_t seed);

// Per-label shuffled split; test takes round(fraction * count) of every label
// (at least one sample stays in training). Both sides keep input order.
struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};
SplitIndices stratified_split(const std::vector<std::optional<std::string>>& labels, double test_fraction,
                              std::uint64_t seed);

FrequencyMatrix select_rows(const FrequencyMatrix& matrix, const std::vector<std::size_t>& rows);

struct PipelineResult {
    PipelineConfig config;
    StageSeeds seeds{};
    FrequencyMatrix train;  // after spectral reduction
    FrequencyMatrix test;
    SpectralReport spectral;
    ClusterModel model;
    ScalarFeatureSet train_features;
    ScalarFeatureSet test_features;
    std::vector<std::string> predictions;
    std::optional<EvaluationReport> evaluation;
    Json ingest_report;
};

// Raised by run_pipeline; `stage()` names the failing step.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

PipelineResult run_pipeline(const PipelineConfig& config);

// Writes spectral_report.json, cluster_model.json, train_features.csv,
// test_features.csv, predictions.csv, evaluation.json, evaluation.txt and
// manifest.json into config.output_dir.
void write_artifacts(const PipelineResult& result);

Json make_manifest(const PipelineResult& result);
PipelineConfig config_from_manifest(const Json& manifest);

} // namespace idsim
