#include "idsim/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "idsim/error.hpp"
#include "text_util.hpp"

namespace idsim {

SyscallVocabulary::SyscallVocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    std::sort(tokens_.begin(), tokens_.end());
    tokens_.erase(std::unique(tokens_.begin(), tokens_.end()), tokens_.end());
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        index_.emplace(tokens_[i], i);
    }
}

SyscallVocabulary SyscallVocabulary::from_traces(const std::vector<SyscallTrace>& traces) {
    std::set<std::string> seen;
    for (const auto& t : traces) {
        seen.insert(t.calls.begin(), t.calls.end());
    }
    return SyscallVocabulary({seen.begin(), seen.end()});
}

std::optional<std::size_t> SyscallVocabulary::find(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

SyscallVocabulary SyscallVocabulary::slice(const std::vector<std::size_t>& columns) const {
    std::vector<std::string> out;
    out.reserve(columns.size());
    for (auto c : columns) out.push_back(tokens_.at(c));
    return SyscallVocabulary(std::move(out));
}

std::string to_string(MatrixMode mode) {
    switch (mode) {
    case MatrixMode::count: return "count";
    case MatrixMode::binary: return "binary";
    case MatrixMode::normalized: return "normalized";
    case MatrixMode::raw: return "raw";
    }
    return "count";
}

MatrixMode parse_matrix_mode(std::string_view name) {
    if (name == "count") return MatrixMode::count;
    if (name == "binary") return MatrixMode::binary;
    if (name == "normalized") return MatrixMode::normalized;
    if (name == "raw") return MatrixMode::raw;
    throw ConfigError("unknown matrix mode '" + std::string(name) + "'");
}

bool FrequencyMatrix::fully_labeled() const {
    return std::all_of(labels.begin(), labels.end(), [](const auto& l) { return l.has_value(); });
}

std::vector<std::string> FrequencyMatrix::distinct_labels() const {
    std::vector<std::string> out;
    for (const auto& l : labels) {
        if (l && std::find(out.begin(), out.end(), *l) == out.end()) out.push_back(*l);
    }
    return out;
}

void FrequencyMatrix::validate() const {
    if (static_cast<std::size_t>(values.rows()) != rows.size() ||
        static_cast<std::size_t>(values.rows()) != labels.size()) {
        throw ValidationError("matrix row bookkeeping mismatch");
    }
    if (static_cast<std::size_t>(values.cols()) != vocab.size()) {
        throw ValidationError("matrix column count does not match vocabulary");
    }
    if (!values.allFinite()) throw ValidationError("matrix has non-finite values");
    if (mode == MatrixMode::raw) return;
    if ((values.array() < 0.0).any()) throw ValidationError("matrix has negative values");
    switch (mode) {
    case MatrixMode::count:
        if ((values.array() != values.array().floor()).any()) {
            throw ValidationError("count matrix has non-integer values");
        }
        break;
    case MatrixMode::binary:
        if ((values.array() != 0.0 && values.array() != 1.0).any()) {
            throw ValidationError("binary matrix has values outside {0,1}");
        }
        break;
    case MatrixMode::normalized:
        for (Eigen::Index i = 0; i < values.rows(); ++i) {
            const double s = values.row(i).sum();
            if (s != 0.0 && std::abs(s - 1.0) > 1e-9) {
                throw ValidationError("normalized row " + rows[i] + " does not sum to 1");
            }
        }
        break;
    case MatrixMode::raw: break;
    }
}

std::size_t BuildReport::dropped_total() const {
    std::size_t total = 0;
    for (const auto& [_, c] : dropped_tokens) total += c;
    return total;
}

std::vector<SyscallTrace> parse_trace_file(std::istream& in) {
    std::vector<SyscallTrace> traces;
    std::map<std::string, std::size_t> first_seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto fields = detail::split_ws(line);
        if (fields.empty() || fields.front().front() == '#') continue;
        if (fields.size() < 3) {
            throw ParseError(line_no, "expected '<trace_id> <label|-> <token> ...', got " +
                                          std::to_string(fields.size()) + " field(s)");
        }
        SyscallTrace t;
        t.trace_id = fields[0];
        if (fields[1] != "-") t.label = fields[1];
        t.calls.assign(fields.begin() + 2, fields.end());
        auto [it, inserted] = first_seen.emplace(t.trace_id, line_no);
        if (!inserted) {
            throw ValidationError("duplicate trace id '" + t.trace_id + "' on lines " +
                                  std::to_string(it->second) + " and " + std::to_string(line_no));
        }
        traces.push_back(std::move(t));
    }
    return traces;
}

void write_trace_file(std::ostream& out, const std::vector<SyscallTrace>& traces) {
    for (const auto& t : traces) {
        out << t.trace_id << ' ' << t.label.value_or("-");
        for (const auto& c : t.calls) out << ' ' << c;
        out << '\n';
    }
}

void normalize_rows(Eigen::MatrixXd& values) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        const double s = values.row(i).sum();
        if (s > 0.0) values.row(i) /= s;
    }
}

FrequencyMatrix build_matrix(const std::vector<SyscallTrace>& traces, MatrixMode mode,
                             const std::optional<SyscallVocabulary>& vocab, BuildReport* report) {
    if (traces.empty()) throw ValidationError("no traces");
    if (mode == MatrixMode::raw) throw ConfigError("raw mode is reserved for record tables");

    FrequencyMatrix fm;
    fm.mode = mode;
    fm.vocab = vocab ? *vocab : SyscallVocabulary::from_traces(traces);
    fm.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(traces.size()),
                                      static_cast<Eigen::Index>(fm.vocab.size()));
    BuildReport local;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& t = traces[i];
        fm.rows.push_back(t.trace_id);
        fm.labels.push_back(t.label);
        for (const auto& call : t.calls) {
            if (auto col = fm.vocab.find(call)) {
                fm.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*col)) += 1.0;
            } else {
                ++local.dropped_tokens[call];
            }
        }
        if (fm.values.row(static_cast<Eigen::Index>(i)).isZero(0.0)) {
            local.all_zero_rows.push_back(t.trace_id);
        }
    }
    if (mode == MatrixMode::binary) {
        fm.values = (fm.values.array() > 0.0).cast<double>();
    } else if (mode == MatrixMode::normalized) {
        normalize_rows(fm.values);
    }
    if (report) *report = std::move(local);
    return fm;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::array<KddFeature, kKddFeatureCount> kSchema{{
    {"duration", FeatureKind::intrinsic, false},
    {"protocol_type", FeatureKind::intrinsic, true},
    {"service", FeatureKind::intrinsic, true},
    {"flag", FeatureKind::intrinsic, true},
    {"src_bytes", FeatureKind::intrinsic, false},
    {"dst_bytes", FeatureKind::intrinsic, false},
    {"land", FeatureKind::intrinsic, false},
    {"wrong_fragment", FeatureKind::intrinsic, false},
    {"urgent", FeatureKind::intrinsic, false},
    {"hot", FeatureKind::content, false},
    {"num_failed_logins", FeatureKind::content, false},
    {"logged_in", FeatureKind::content, false},
    {"num_compromised", FeatureKind::content, false},
    {"root_shell", FeatureKind::content, false},
    {"su_attempted", FeatureKind::content, false},
    {"num_root", FeatureKind::content, false},
    {"num_file_creations", FeatureKind::content, false},
    {"num_shells", FeatureKind::content, false},
    {"num_access_files", FeatureKind::content, false},
    {"num_outbound_cmds", FeatureKind::content, false},
    {"is_host_login", FeatureKind::content, false},
    {"is_guest_login", FeatureKind::content, false},
    {"count", FeatureKind::traffic, false},
    {"srv_count", FeatureKind::traffic, false},
    {"serror_rate", FeatureKind::traffic, false},
    {"srv_serror_rate", FeatureKind::traffic, false},
    {"rerror_rate", FeatureKind::traffic, false},
    {"srv_rerror_rate", FeatureKind::traffic, false},
    {"same_srv_rate", FeatureKind::traffic, false},
    {"diff_srv_rate", FeatureKind::traffic, false},
    {"srv_diff_host_rate", FeatureKind::traffic, false},
    {"dst_host_count", FeatureKind::traffic, false},
    {"dst_host_srv_count", FeatureKind::traffic, false},
    {"dst_host_same_srv_rate", FeatureKind::traffic, false},
    {"dst_host_diff_srv_rate", FeatureKind::traffic, false},
    {"dst_host_same_src_port_rate", FeatureKind::traffic, false},
    {"dst_host_srv_diff_host_rate", FeatureKind::traffic, false},
    {"dst_host_serror_rate", FeatureKind::traffic, false},
    {"dst_host_srv_serror_rate", FeatureKind::traffic, false},
    {"dst_host_rerror_rate", FeatureKind::traffic, false},
    {"dst_host_srv_rerror_rate", FeatureKind::traffic, false},
}};

std::string strip_period(std::string s) {
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

} // namespace

std::string to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::intrinsic: return "intrinsic";
    case FeatureKind::content: return "content";
    case FeatureKind::traffic: return "traffic";
    }
    return "intrinsic";
}

const std::array<KddFeature, kKddFeatureCount>& kdd_schema() { return kSchema; }

LabeledRecordSet parse_kdd_csv(std::istream& in, const CategoryMap& category_map) {
    CategoryMap lookup;
    for (const auto& [k, v] : category_map) lookup[strip_period(k)] = v;

    LabeledRecordSet out;
    for (std::size_t j = 0; j < kKddFeatureCount; ++j) out.feature_kinds[j] = kSchema[j].kind;

    std::vector<std::array<double, kKddFeatureCount>> rows;
    std::set<std::string> unknown;
    std::string line;
    std::size_t row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, ',');
        if (fields.size() != kKddFeatureCount + 1) {
            throw ParseError(row_no, "expected 42 fields, got " + std::to_string(fields.size()));
        }
        std::array<double, kKddFeatureCount> rec{};
        for (std::size_t j = 0; j < kKddFeatureCount; ++j) {
            const std::string field{detail::trim(fields[j])};
            if (kSchema[j].symbolic) {
                auto& codes = out.symbol_codes[j];
                auto it = std::find(codes.begin(), codes.end(), field);
                if (it == codes.end()) {
                    codes.push_back(field);
                    it = codes.end() - 1;
                }
                rec[j] = static_cast<double>(it - codes.begin());
            } else {
                auto v = detail::parse_double(field);
                if (!v) {
                    throw ParseError(row_no, "field " + std::to_string(j + 1) + " (" +
                                                 std::string(kSchema[j].name) + ") is not numeric: '" +
                                                 field + "'");
                }
                rec[j] = *v;
            }
        }
        const std::string raw_label = strip_period(std::string(detail::trim(fields.back())));
        auto it = lookup.find(raw_label);
        if (it == lookup.end()) {
            unknown.insert(raw_label);
            continue;
        }
        out.labels.push_back(it->second);
        rows.push_back(rec);
    }
    if (!unknown.empty()) {
        std::string msg = "unmapped label(s):";
        for (const auto& u : unknown) msg += " " + u;
        throw ValidationError(msg);
    }
    std::set<std::string> distinct(out.labels.begin(), out.labels.end());
    if (distinct.size() > 5) {
        throw ValidationError("record set has " + std::to_string(distinct.size()) +
                              " distinct classes; at most 5 are allowed");
    }
    out.features.resize(static_cast<Eigen::Index>(rows.size()), kKddFeatureCount);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < kKddFeatureCount; ++j) {
            out.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return out;
}

CategoryMap parse_category_map(std::istream& in) {
    CategoryMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto fields = detail::split(t, ',');
        if (fields.size() != 2) throw ParseError(line_no, "expected 'attack,category'");
        map[strip_period(std::string(detail::trim(fields[0])))] = std::string(detail::trim(fields[1]));
    }
    return map;
}

FrequencyMatrix records_to_matrix(const LabeledRecordSet& records) {
    FrequencyMatrix fm;
    fm.mode = MatrixMode::raw;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < kKddFeatureCount; ++j) {
        char buf[8];
        std::snprintf(buf, sizeof buf, "f%02zu_", j + 1);
        names.push_back(buf + std::string(kSchema[j].name));
    }
    fm.vocab = SyscallVocabulary(std::move(names));
    fm.values = records.features;
    for (std::size_t i = 0; i < records.labels.size(); ++i) {
        fm.rows.push_back("r" + std::to_string(i + 1));
        fm.labels.emplace_back(records.labels[i]);
    }
    return fm;
}

} // namespace idsim
