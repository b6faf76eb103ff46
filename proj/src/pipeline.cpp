#include "idsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <Eigen/Core>

#include "idsim/error.hpp"
#include "idsim/random.hpp"
#include "text_util.hpp"

namespace idsim {

std::string to_string(InputFormat format) {
    switch (format) {
    case InputFormat::trace: return "trace";
    case InputFormat::kdd_csv: return "kdd-csv";
    case InputFormat::synthetic: return "synthetic";
    }
    return "trace";
}

InputFormat parse_input_format(std::string_view name) {
    if (name == "trace") return InputFormat::trace;
    if (name == "kdd-csv") return InputFormat::kdd_csv;
    if (name == "synthetic") return InputFormat::synthetic;
    throw ConfigError("unknown input format '" + std::string(name) + "'");
}

void PipelineConfig::validate() const {
    if (!(energy_fraction > 0.0 && energy_fraction <= 1.0)) throw ConfigError("energy fraction out of range (0, 1]");
    if (!seed) throw ConfigError("seed is required");
    if (format == InputFormat::synthetic) {
        if (generator.empty()) throw ConfigError("synthetic input needs 'generator'");
    } else if (input.empty()) {
        throw ConfigError("'input' is required for format " + to_string(format));
    }
    if (format == InputFormat::kdd_csv && category_map.empty()) throw ConfigError("kdd-csv input needs 'category_map'");
    if (test_input.empty() && !(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ConfigError("test fraction out of range (0, 1)");
    }
    if (keep_count && *keep_count == 0) throw ConfigError("keep_count must be positive");
    if (knn_k == 0) throw ConfigError("knn_k must be at least 1");
    if (max_iter == 0) throw ConfigError("max_iter must be at least 1");
    if (!(tol >= 0.0)) throw ConfigError("tol must be non-negative");
    if (normal_label.empty()) throw ConfigError("normal_label must not be empty");
    if (format == InputFormat::kdd_csv && mode != MatrixMode::raw && mode != MatrixMode::count) {
        throw ConfigError("kdd-csv input is always read as a raw feature table");
    }
}

namespace {

double as_real(const std::string& key, const std::string& v) {
    auto d = detail::parse_double(v);
    if (!d) throw ConfigError("'" + key + "' must be a number, got '" + v + "'");
    return *d;
}

std::uint64_t as_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto t = detail::trim(v);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
        throw ConfigError("'" + key + "' must be a non-negative integer, got '" + v + "'");
    }
    return out;
}

bool as_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("'" + key + "' must be true or false, got '" + v + "'");
}

} // namespace

PipelineConfig PipelineConfig::from_key_values(const std::map<std::string, std::string>& kv) {
    PipelineConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "format") c.format = parse_input_format(value);
        else if (key == "input") c.input = value;
        else if (key == "test_input") c.test_input = value;
        else if (key == "generator") c.generator = value;
        else if (key == "category_map") c.category_map = value;
        else if (key == "test_fraction") c.test_fraction = as_real(key, value);
        else if (key == "mode") c.mode = parse_matrix_mode(value);
        else if (key == "energy_fraction") c.energy_fraction = as_real(key, value);
        else if (key == "kaiser") c.kaiser = as_bool(key, value);
        else if (key == "keep_count") c.keep_count = value.empty() || value == "none" ? std::nullopt : std::optional<std::size_t>(as_uint(key, value));
        else if (key == "measure") c.measure = parse_measure_kind(value);
        else if (key == "clusters") c.clusters = value == "auto" ? 0 : as_uint(key, value);
        else if (key == "seed") c.seed = as_uint(key, value);
        else if (key == "knn_k") c.knn_k = as_uint(key, value);
        else if (key == "normal_label") c.normal_label = value;
        else if (key == "max_iter") c.max_iter = as_uint(key, value);
        else if (key == "tol") c.tol = as_real(key, value);
        else if (key == "output_dir") c.output_dir = value;
        else throw ConfigError("unknown config key '" + key + "'");
    }
    if (c.format == InputFormat::kdd_csv) c.mode = MatrixMode::raw;
    return c;
}

std::map<std::string, std::string> PipelineConfig::to_key_values() const {
    std::map<std::string, std::string> kv;
    kv["format"] = to_string(format);
    kv["input"] = input;
    kv["test_input"] = test_input;
    kv["generator"] = generator;
    kv["category_map"] = category_map;
    kv["test_fraction"] = detail::format_double(test_fraction);
    kv["mode"] = to_string(mode);
    kv["energy_fraction"] = detail::format_double(energy_fraction);
    kv["kaiser"] = kaiser ? "true" : "false";
    kv["keep_count"] = keep_count ? std::to_string(*keep_count) : "none";
    kv["measure"] = to_string(measure);
    kv["clusters"] = clusters == 0 ? "auto" : std::to_string(clusters);
    kv["seed"] = seed ? std::to_string(*seed) : "";
    kv["knn_k"] = std::to_string(knn_k);
    kv["normal_label"] = normal_label;
    kv["max_iter"] = std::to_string(max_iter);
    kv["tol"] = detail::format_double(tol);
    kv["output_dir"] = output_dir;
    return kv;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = detail::trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError(line_no, "expected 'key = value'");
        kv[std::string(detail::trim(t.substr(0, eq)))] = std::string(detail::trim(t.substr(eq + 1)));
    }
    return kv;
}

PipelineConfig parse_pipeline_config(std::istream& in) { return PipelineConfig::from_key_values(parse_key_values(in)); }

StageSeeds derive_seeds(std::uint64_t seed) {
    return {seed, seed ^ 0x9e3779b97f4a7c15ULL, seed};
}

SplitIndices stratified_split(const std::vector<std::optional<std::string>>& labels, double test_fraction,
                              std::uint64_t seed) {
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const std::string key = labels[i].value_or("-");
        if (!groups.count(key)) order.push_back(key);
        groups[key].push_back(i);
    }
    Rng rng(seed);
    SplitIndices out;
    for (const auto& key : order) {
        auto members = groups[key];
        rng.shuffle(members);
        auto n_test = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(members.size())));
        n_test = std::min(n_test, members.size() - 1);
        out.test.insert(out.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
        out.train.insert(out.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

FrequencyMatrix select_rows(const FrequencyMatrix& matrix, const std::vector<std::size_t>& rows) {
    FrequencyMatrix out;
    out.vocab = matrix.vocab;
    out.mode = matrix.mode;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), matrix.m());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = matrix.values.row(static_cast<Eigen::Index>(rows[i]));
        out.rows.push_back(matrix.rows.at(rows[i]));
        out.labels.push_back(matrix.labels.at(rows[i]));
    }
    return out;
}

namespace {

template <typename F>
auto stage(const char* name, F&& f) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file '" + path + "'");
    return in;
}

std::vector<SyscallTrace> load_traces(const std::string& path) {
    auto in = open_input(path);
    return parse_trace_file(in);
}

LabeledRecordSet load_kdd(const std::string& path, const CategoryMap& map) {
    auto in = open_input(path);
    return parse_kdd_csv(in, map);
}

// Returns (train, test) matrices on the same column basis.
std::pair<FrequencyMatrix, FrequencyMatrix> ingest(const PipelineConfig& c, const StageSeeds& seeds, Json& report) {
    if (c.format == InputFormat::kdd_csv) {
        auto map_in = open_input(c.category_map);
        const auto map = parse_category_map(map_in);
        const auto records = load_kdd(c.input, map);
        report["symbol_codes"] = symbol_codes_json(records);
        auto all = records_to_matrix(records);
        if (!c.test_input.empty()) {
            const auto test_records = load_kdd(c.test_input, map);
            return {std::move(all), records_to_matrix(test_records)};
        }
        const auto split = stratified_split(all.labels, c.test_fraction, seeds.split);
        return {select_rows(all, split.train), select_rows(all, split.test)};
    }

    std::vector<SyscallTrace> traces;
    if (c.format == InputFormat::synthetic) {
        GeneratorConfig gen;
        if (c.generator.rfind("preset:", 0) == 0) {
            gen = generator_preset(c.generator.substr(7));
        } else {
            auto in = open_input(c.generator);
            gen = parse_generator_config(in);
        }
        traces = generate_synthetic(gen, seeds.generator);
    } else {
        traces = load_traces(c.input);
    }

    if (!c.test_input.empty()) {
        auto train = build_matrix(traces, c.mode);
        BuildReport br;
        auto test = build_matrix(load_traces(c.test_input), c.mode, train.vocab, &br);
        report["test_build"] = to_json(br);
        return {std::move(train), std::move(test)};
    }
    // Split first so the vocabulary only sees training traces.
    std::vector<std::optional<std::string>> labels;
    for (const auto& t : traces) labels.push_back(t.label);
    const auto split = stratified_split(labels, c.test_fraction, seeds.split);
    std::vector<SyscallTrace> train_traces;
    std::vector<SyscallTrace> test_traces;
    for (auto i : split.train) train_traces.push_back(traces[i]);
    for (auto i : split.test) test_traces.push_back(traces[i]);
    auto train = build_matrix(train_traces, c.mode);
    BuildReport br;
    auto test = build_matrix(test_traces, c.mode, train.vocab, &br);
    report["test_build"] = to_json(br);
    return {std::move(train), std::move(test)};
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    stage("config", [&] {
        config.validate();
        return 0;
    });
    PipelineResult r;
    r.config = config;
    r.seeds = derive_seeds(*config.seed);
    r.ingest_report = Json::object();

    auto [train_full, test_full] = stage("ingest", [&] { return ingest(config, r.seeds, r.ingest_report); });
    if (!train_full.fully_labeled()) throw StageError("ingest", "every training sample needs a label");

    r.spectral = stage("reduce", [&] {
        SpectralOptions opts;
        opts.energy_fraction = config.energy_fraction;
        opts.kaiser = config.kaiser;
        opts.keep_count = config.keep_count;
        return analyze(train_full, opts);
    });
    r.train = stage("reduce", [&] { return reduce_matrix(train_full, r.spectral.selected_columns); });
    r.test = stage("reduce", [&] { return reduce_matrix(test_full, r.spectral.selected_columns); });

    r.model = stage("cluster", [&] {
        const std::size_t k = config.clusters ? config.clusters : r.train.distinct_labels().size();
        SimilarityMeasure measure(config.measure, FeatureStats::from_matrix(r.train.values));
        return kmeans_fit(r.train, k, measure, r.seeds.clustering, {config.max_iter, config.tol});
    });

    r.train_features = stage("compress", [&] { return reduce_train(r.train, r.model); });
    r.test_features = stage("compress", [&] { return reduce_test(r.test, r.model, r.train); });

    r.predictions = stage("classify", [&] {
        std::vector<std::string> order{config.normal_label};
        std::vector<std::string> out;
        for (double v : r.test_features.values) out.push_back(knn_scalar(r.train_features, v, config.knn_k, order));
        return out;
    });

    if (r.test.fully_labeled() && r.test.n() > 0) {
        r.evaluation = stage("eval", [&] {
            std::vector<std::string> truth;
            for (const auto& l : r.test.labels) truth.push_back(*l);
            return evaluate(r.predictions, truth, config.normal_label);
        });
    }
    return r;
}

Json make_manifest(const PipelineResult& r) {
    Json m;
    m["tool"] = "idsim";
    m["version"] = kVersion;
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    Json cfg = Json::object();
    // The output location does not influence results; leaving it out keeps
    // manifests identical across output directories.
    for (const auto& [k, v] : r.config.to_key_values()) {
        if (k != "output_dir") cfg[k] = v;
    }
    m["config"] = std::move(cfg);
    m["seeds"] = {{"generator", r.seeds.generator}, {"split", r.seeds.split}, {"clustering", r.seeds.clustering}};
    m["train_samples"] = r.train.n();
    m["test_samples"] = r.test.n();
    m["selected_syscalls"] = r.train.vocab.tokens();
    m["clusters"] = r.model.k;
    m["ingest"] = r.ingest_report;
    m["artifacts"] = {"spectral_report.json", "cluster_model.json", "train_features.csv", "test_features.csv",
                      "predictions.csv", "evaluation.json", "evaluation.txt"};
    return m;
}

PipelineConfig config_from_manifest(const Json& manifest) {
    if (!manifest.contains("config") || !manifest["config"].is_object()) {
        throw ConfigError("manifest has no 'config' object");
    }
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : manifest["config"].items()) kv[k] = v.get<std::string>();
    return PipelineConfig::from_key_values(kv);
}

void write_artifacts(const PipelineResult& r) {
    namespace fs = std::filesystem;
    const fs::path dir(r.config.output_dir);
    fs::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
        return out;
    };
    open("spectral_report.json") << dump(to_json(r.spectral));
    open("cluster_model.json") << dump(to_json(r.model));
    {
        auto out = open("train_features.csv");
        write_features_csv(out, r.train_features);
    }
    {
        auto out = open("test_features.csv");
        write_features_csv(out, r.test_features);
    }
    {
        auto out = open("predictions.csv");
        out << "sample_id,prediction,truth\n";
        for (std::size_t i = 0; i < r.predictions.size(); ++i) {
            out << r.test.rows[i] << ',' << r.predictions[i] << ',' << r.test.labels[i].value_or("-") << '\n';
        }
    }
    if (r.evaluation) {
        open("evaluation.json") << dump(to_json(*r.evaluation));
        open("evaluation.txt") << render_table(*r.evaluation);
    } else {
        open("evaluation.json") << dump(Json{{"evaluated", false}, {"reason", "test set is unlabeled"}});
        open("evaluation.txt") << "test set is unlabeled; no evaluation\n";
    }
    open("manifest.json") << dump(make_manifest(r));
}

} // namespace idsim
