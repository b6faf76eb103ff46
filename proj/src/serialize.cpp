#include "idsim/serialize.hpp"

#include <istream>
#include <ostream>

#include "idsim/error.hpp"
#include "text_util.hpp"

namespace idsim {
namespace {

Json vector_json(const Eigen::VectorXd& v) {
    Json a = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vector_from(const Json& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
    return v;
}

Json matrix_json(const Eigen::MatrixXd& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_json(m.row(i).transpose()));
    return rows;
}

Eigen::MatrixXd matrix_from(const Json& rows, Eigen::Index cols) {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows.at(i);
        if (static_cast<Eigen::Index>(r.size()) != cols) throw ValidationError("ragged matrix row in JSON");
        for (Eigen::Index j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), j) = r.at(static_cast<std::size_t>(j)).get<double>();
    }
    return m;
}

template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed ") + what + ": " + e.what());
    }
}

std::string csv_field(std::string_view s, std::size_t line_no) {
    if (s.find(',') != std::string_view::npos) throw ParseError(line_no, "unexpected comma");
    return std::string(detail::trim(s));
}

} // namespace

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Json to_json(const FrequencyMatrix& matrix) {
    Json j;
    j["mode"] = to_string(matrix.mode);
    j["vocab"] = matrix.vocab.tokens();
    j["rows"] = matrix.rows;
    Json labels = Json::array();
    for (const auto& l : matrix.labels) labels.push_back(l ? Json(*l) : Json(nullptr));
    j["labels"] = labels;
    j["values"] = matrix_json(matrix.values);
    return j;
}

FrequencyMatrix matrix_from_json(const Json& j) {
    return guarded("matrix", [&] {
        FrequencyMatrix fm;
        fm.mode = parse_matrix_mode(j.at("mode").get<std::string>());
        fm.vocab = SyscallVocabulary(j.at("vocab").get<std::vector<std::string>>());
        if (fm.vocab.tokens() != j.at("vocab").get<std::vector<std::string>>()) {
            throw ValidationError("matrix vocabulary must be sorted and distinct");
        }
        fm.rows = j.at("rows").get<std::vector<std::string>>();
        for (const auto& l : j.at("labels")) {
            fm.labels.push_back(l.is_null() ? std::nullopt : std::optional<std::string>(l.get<std::string>()));
        }
        fm.values = matrix_from(j.at("values"), static_cast<Eigen::Index>(fm.vocab.size()));
        fm.validate();
        return fm;
    });
}

Json to_json(const SpectralReport& r) {
    Json j;
    j["singular_values"] = vector_json(r.singular_values);
    j["eigenvalues"] = vector_json(r.eigenvalues);
    j["kaiser_retained"] = r.kaiser_retained;
    j["energy_retained"] = r.energy_retained;
    j["syscall_scores"] = vector_json(r.syscall_scores);
    j["selected_columns"] = r.selected_columns;
    j["energy_fraction_achieved"] = r.energy_fraction_achieved;
    return j;
}

SpectralReport spectral_report_from_json(const Json& j) {
    return guarded("spectral report", [&] {
        SpectralReport r;
        r.singular_values = vector_from(j.at("singular_values"));
        r.eigenvalues = vector_from(j.at("eigenvalues"));
        r.kaiser_retained = j.at("kaiser_retained").get<std::vector<std::size_t>>();
        r.energy_retained = j.at("energy_retained").get<std::vector<std::size_t>>();
        r.syscall_scores = vector_from(j.at("syscall_scores"));
        r.selected_columns = j.at("selected_columns").get<std::vector<std::size_t>>();
        r.energy_fraction_achieved = j.at("energy_fraction_achieved").get<double>();
        return r;
    });
}

Json to_json(const FeatureStats& stats) {
    Json j;
    j["mu"] = vector_json(stats.mu);
    j["sigma"] = vector_json(stats.sigma);
    j["sigma_floor"] = stats.sigma_floor;
    return j;
}

FeatureStats feature_stats_from_json(const Json& j) {
    return guarded("feature stats", [&] {
        FeatureStats s;
        s.mu = vector_from(j.at("mu"));
        s.sigma = vector_from(j.at("sigma"));
        s.sigma_floor = j.at("sigma_floor").get<double>();
        return s;
    });
}

Json to_json(const ClusterModel& model) {
    Json j;
    j["k"] = model.k;
    j["measure"] = to_string(model.measure_kind);
    j["seed"] = model.seed;
    j["iterations_run"] = model.iterations_run;
    j["converged"] = model.converged;
    j["centroids"] = matrix_json(model.centroids);
    j["assignments"] = model.assignments;
    j["stats"] = to_json(model.stats);
    return j;
}

ClusterModel cluster_model_from_json(const Json& j) {
    return guarded("cluster model", [&] {
        ClusterModel m;
        m.k = j.at("k").get<std::size_t>();
        m.measure_kind = parse_measure_kind(j.at("measure").get<std::string>());
        m.seed = j.at("seed").get<std::uint64_t>();
        m.iterations_run = j.at("iterations_run").get<std::size_t>();
        m.converged = j.at("converged").get<bool>();
        m.stats = feature_stats_from_json(j.at("stats"));
        m.centroids = matrix_from(j.at("centroids"), m.stats.size());
        m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
        if (static_cast<std::size_t>(m.centroids.rows()) != m.k) throw ValidationError("centroid count differs from k");
        for (auto a : m.assignments) {
            if (a >= m.k) throw ValidationError("assignment out of range");
        }
        return m;
    });
}

Json to_json(const FrequentItemsets& r) {
    Json j;
    j["min_support"] = r.min_support;
    j["transactions"] = r.transactions;
    Json sets = Json::array();
    for (const auto& s : r.itemsets) {
        Json e;
        e["items"] = s.items;
        e["support_count"] = s.support_count;
        e["support"] = s.support;
        sets.push_back(std::move(e));
    }
    j["itemsets"] = std::move(sets);
    return j;
}

Json to_json(const EvaluationReport& r) {
    Json j;
    j["class_order"] = r.class_order;
    Json conf = Json::array();
    for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < r.confusion.cols(); ++c) row.push_back(r.confusion(i, c));
        conf.push_back(std::move(row));
    }
    j["confusion"] = std::move(conf);
    j["total"] = r.total;
    j["accuracy"] = r.accuracy;
    j["detection_rate"] = r.detection_rate;
    j["detection_rate_undefined"] = r.detection_rate_undefined;
    j["false_alarm_rate"] = r.false_alarm_rate;
    j["false_alarm_rate_undefined"] = r.false_alarm_rate_undefined;
    j["per_class_recall"] = r.per_class_recall;
    return j;
}

Json to_json(const BuildReport& r) {
    Json j;
    Json dropped = Json::object();
    for (const auto& [token, count] : r.dropped_tokens) dropped[token] = count;
    j["dropped_tokens"] = std::move(dropped);
    j["dropped_total"] = r.dropped_total();
    j["all_zero_rows"] = r.all_zero_rows;
    return j;
}

Json symbol_codes_json(const LabeledRecordSet& records) {
    Json j = Json::object();
    for (const auto& [col, codes] : records.symbol_codes) j[std::string(kdd_schema()[col].name)] = codes;
    return j;
}

void write_features_csv(std::ostream& out, const ScalarFeatureSet& f) {
    out << "sample_id,cluster,scalar,label\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out << f.sample_ids[i] << ',' << f.cluster_of[i] << ',' << detail::format_double(f.values[i]) << ','
            << f.labels[i].value_or("-") << '\n';
    }
}

ScalarFeatureSet read_features_csv(std::istream& in, FeatureSource source) {
    ScalarFeatureSet f;
    f.source = source;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        if (line_no == 1 && t.rfind("sample_id", 0) == 0) continue;
        const auto fields = detail::split(t, ',');
        if (fields.size() != 4) throw ParseError(line_no, "expected 'sample_id,cluster,scalar,label'");
        const auto cluster = detail::parse_double(fields[1]);
        const auto value = detail::parse_double(fields[2]);
        if (!cluster || *cluster < 0 || !value) throw ParseError(line_no, "bad numeric field");
        f.sample_ids.push_back(csv_field(fields[0], line_no));
        f.cluster_of.push_back(static_cast<std::size_t>(*cluster));
        f.values.push_back(*value);
        const auto label = csv_field(fields[3], line_no);
        f.labels.push_back(label == "-" ? std::nullopt : std::optional<std::string>(label));
    }
    return f;
}

void write_labels_csv(std::ostream& out, const LabeledIds& rows, const std::string& label_header) {
    out << "sample_id," << label_header << '\n';
    for (std::size_t i = 0; i < rows.ids.size(); ++i) out << rows.ids[i] << ',' << rows.labels[i] << '\n';
}

LabeledIds read_labels_csv(std::istream& in) {
    LabeledIds rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty()) continue;
        if (line_no == 1 && t.rfind("sample_id", 0) == 0) continue;
        const auto fields = detail::split(t, ',');
        if (fields.size() < 2) throw ParseError(line_no, "expected 'sample_id,label'");
        rows.ids.emplace_back(detail::trim(fields[0]));
        rows.labels.emplace_back(detail::trim(fields[1]));
    }
    return rows;
}

} // namespace idsim
