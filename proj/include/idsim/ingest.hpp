#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace idsim {

// One process execution: id, optional class label, ordered syscall tokens.
struct SyscallTrace {
    std::string trace_id;
    std::optional<std::string> label;
    std::vector<std::string> calls;

    bool operator==(const SyscallTrace&) const = default;
};

// Sorted, de-duplicated token list; column basis of a FrequencyMatrix.
class SyscallVocabulary {
public:
    SyscallVocabulary() = default;
    // Tokens are sorted and de-duplicated.
    explicit SyscallVocabulary(std::vector<std::string> tokens);

    static SyscallVocabulary from_traces(const std::vector<SyscallTrace>& traces);

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    const std::string& operator[](std::size_t i) const { return tokens_.at(i); }
    std::optional<std::size_t> find(std::string_view token) const;

    SyscallVocabulary slice(const std::vector<std::size_t>& columns) const;

    bool operator==(const SyscallVocabulary& other) const { return tokens_ == other.tokens_; }

private:
    std::vector<std::string> tokens_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

// `raw` carries real-valued feature tables (KDD records) that are not syscall counts.
enum class MatrixMode { count, binary, normalized, raw };

std::string to_string(MatrixMode mode);
MatrixMode parse_matrix_mode(std::string_view name);

// Process-vs-syscall matrix: n sample rows by m vocabulary columns.
struct FrequencyMatrix {
    std::vector<std::string> rows;
    SyscallVocabulary vocab;
    MatrixMode mode = MatrixMode::count;
    Eigen::MatrixXd values;
    std::vector<std::optional<std::string>> labels;

    Eigen::Index n() const noexcept { return values.rows(); }
    Eigen::Index m() const noexcept { return values.cols(); }
    bool fully_labeled() const;
    // Distinct labels in order of first appearance.
    std::vector<std::string> distinct_labels() const;
    // Throws ValidationError when the mode invariant or shape bookkeeping is broken.
    void validate() const;
};

// Side report from build_matrix.
struct BuildReport {
    std::map<std::string, std::size_t> dropped_tokens;
    std::vector<std::string> all_zero_rows;

    std::size_t dropped_total() const;
};

std::vector<SyscallTrace> parse_trace_file(std::istream& in);
void write_trace_file(std::ostream& out, const std::vector<SyscallTrace>& traces);

FrequencyMatrix build_matrix(const std::vector<SyscallTrace>& traces, MatrixMode mode,
                             const std::optional<SyscallVocabulary>& vocab = std::nullopt,
                             BuildReport* report = nullptr);

// Scales every non-zero row to sum 1 in place.
void normalize_rows(Eigen::MatrixXd& values);

// ---------------------------------------------------------------------------
// KDD-Cup style connection records

inline constexpr std::size_t kKddFeatureCount = 41;

enum class FeatureKind { intrinsic, content, traffic };

std::string to_string(FeatureKind kind);

struct KddFeature {
    std::string_view name;
    FeatureKind kind;
    bool symbolic;
};

const std::array<KddFeature, kKddFeatureCount>& kdd_schema();

struct LabeledRecordSet {
    Eigen::MatrixXd features;
    std::vector<std::string> labels;
    std::array<FeatureKind, kKddFeatureCount> feature_kinds{};
    // Symbolic column -> codes in order of first appearance (code = position).
    std::map<std::size_t, std::vector<std::string>> symbol_codes;
};

// Attack name -> class label. Trailing periods on keys are ignored.
using CategoryMap = std::map<std::string, std::string>;

LabeledRecordSet parse_kdd_csv(std::istream& in, const CategoryMap& category_map);
// Reads `attack,category` lines (comments with '#').
CategoryMap parse_category_map(std::istream& in);

// Rows named `r<index>`, columns `fNN_<feature>` so lexicographic order is positional.
FrequencyMatrix records_to_matrix(const LabeledRecordSet& records);

// ---------------------------------------------------------------------------
// Synthetic trace generation

struct ClassProfile {
    std::string label;
    // Token -> per-position occurrence probability in [0, 1].
    std::map<std::string, double> rates;
};

struct GeneratorConfig {
    std::vector<ClassProfile> classes;
    std::size_t samples_per_class = 0;
    std::size_t min_length = 1;
    std::size_t max_length = 1;

    void validate() const;
};

std::vector<SyscallTrace> generate_synthetic(const GeneratorConfig& config, std::uint64_t seed);

GeneratorConfig parse_generator_config(std::istream& in);
void write_generator_config(std::ostream& out, const GeneratorConfig& config);
// Built-in profiles: "two-class", "five-class".
GeneratorConfig generator_preset(std::string_view name);

} // namespace idsim
