// idsim command-line front end.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "idsim/classify.hpp"
#include "idsim/clustering.hpp"
#include "idsim/error.hpp"
#include "idsim/freqpat.hpp"
#include "idsim/ingest.hpp"
#include "idsim/pipeline.hpp"
#include "idsim/scalar_reduce.hpp"
#include "idsim/serialize.hpp"
#include "idsim/spectral.hpp"

using namespace idsim;

namespace {

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open input file '" + path + "'");
    return in;
}

Json read_json(const std::string& path) {
    auto in = open_in(path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    if (path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
}

MatrixMode mode_arg(const std::string& s) { return parse_matrix_mode(s); }

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Syscall-trace intrusion detection: frequency matrices, spectral reduction, "
                 "Gaussian-similarity k-means and scalar kNN"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    // gen
    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled trace file");
    std::string gen_preset, gen_spec, gen_out = "-";
    std::uint64_t gen_seed = 0;
    auto* gen_preset_opt = gen->add_option("--preset", gen_preset, "Built-in profile set (two-class, five-class)");
    gen->add_option("--spec", gen_spec, "Generator config file")->excludes(gen_preset_opt)->check(CLI::ExistingFile);
    gen->add_option("--seed", gen_seed, "Random seed")->required();
    gen->add_option("-o,--out", gen_out, "Output trace file ('-' for stdout)");

    // ingest
    auto* ing = app.add_subcommand("ingest", "Parse traces or KDD records into a frequency matrix (JSON)");
    std::string ing_input, ing_format = "trace", ing_mode = "count", ing_vocab, ing_catmap, ing_out = "-", ing_report;
    ing->add_option("-i,--input", ing_input, "Input file")->required();
    ing->add_option("--format", ing_format, "trace | kdd-csv")->check(CLI::IsMember({"trace", "kdd-csv"}));
    ing->add_option("--mode", ing_mode, "count | binary | normalized")->check(CLI::IsMember({"count", "binary", "normalized"}));
    ing->add_option("--vocab-from", ing_vocab, "Reuse the column basis of this matrix JSON");
    ing->add_option("--category-map", ing_catmap, "attack,category table (kdd-csv)");
    ing->add_option("-o,--out", ing_out, "Output matrix JSON");
    ing->add_option("--report", ing_report, "Write dropped-token / coding report JSON");

    // reduce
    auto* red = app.add_subcommand("reduce", "Spectral syscall selection");
    std::string red_matrix, red_report, red_apply, red_out = "-";
    double red_energy = 0.90;
    bool red_no_kaiser = false;
    std::size_t red_keep = 0;
    red->add_option("-m,--matrix", red_matrix, "Input matrix JSON")->required();
    red->add_option("--energy", red_energy, "Energy fraction to retain");
    red->add_flag("--no-kaiser", red_no_kaiser, "Skip the eigenvalue >= 1 filter");
    red->add_option("--keep-count", red_keep, "Keep the top-N syscalls by score");
    red->add_option("--apply", red_apply, "Apply the selection of an existing spectral report instead of analysing");
    red->add_option("--report", red_report, "Write SpectralReport JSON here");
    red->add_option("-o,--out", red_out, "Reduced matrix JSON");

    // cluster
    auto* clu = app.add_subcommand("cluster", "k-means with a pluggable similarity");
    std::string clu_matrix, clu_measure = "idsim", clu_out = "-";
    std::size_t clu_k = 0, clu_max_iter = 100;
    double clu_tol = 1e-6;
    std::uint64_t clu_seed = 0;
    clu->add_option("-m,--matrix", clu_matrix, "Training matrix JSON")->required();
    clu->add_option("--measure", clu_measure, "idsim | cosine | jaccard")->check(CLI::IsMember({"idsim", "cosine", "jaccard"}));
    clu->add_option("-k,--clusters", clu_k, "Cluster count (default: distinct labels)");
    clu->add_option("--seed", clu_seed, "Random seed")->required();
    clu->add_option("--max-iter", clu_max_iter, "Iteration cap");
    clu->add_option("--tol", clu_tol, "Centroid shift tolerance");
    clu->add_option("-o,--out", clu_out, "ClusterModel JSON");

    // compress
    auto* cmp = app.add_subcommand("compress", "Map every sample to one scalar feature (CSV)");
    std::string cmp_matrix, cmp_model, cmp_train, cmp_out = "-";
    cmp->add_option("-m,--matrix", cmp_matrix, "Matrix JSON to compress")->required();
    cmp->add_option("--model", cmp_model, "ClusterModel JSON")->required();
    cmp->add_option("--train-matrix", cmp_train, "Training matrix (compresses --matrix as a test set)");
    cmp->add_option("-o,--out", cmp_out, "Feature CSV");

    // classify
    auto* cls = app.add_subcommand("classify", "kNN classification on scalar features or raw vectors");
    std::string cls_train, cls_test, cls_normal = "normal", cls_out = "-", cls_measure;
    std::size_t cls_k = 1;
    cls->add_option("--train", cls_train, "Training features CSV (or matrix JSON with --measure)")->required();
    cls->add_option("--test", cls_test, "Test features CSV (or matrix JSON with --measure)")->required();
    cls->add_option("-k", cls_k, "Neighbours");
    cls->add_option("--normal-label", cls_normal, "Label ranked first on ties");
    cls->add_option("--measure", cls_measure, "Classify raw matrix rows with this similarity instead of scalars")
        ->check(CLI::IsMember({"idsim", "cosine", "jaccard"}));
    cls->add_option("-o,--out", cls_out, "Predictions CSV");

    // mine
    auto* mine = app.add_subcommand("mine", "Frequent syscall itemsets (Apriori)");
    std::string mine_matrix, mine_input, mine_out = "-";
    double mine_support = 0.5;
    bool mine_text = false;
    auto* mine_m = mine->add_option("-m,--matrix", mine_matrix, "Binary matrix JSON");
    mine->add_option("-i,--input", mine_input, "Trace file (binarized internally)")->excludes(mine_m);
    mine->add_option("--min-support", mine_support, "Minimum support fraction in (0,1]")->required();
    mine->add_flag("--text", mine_text, "Write the plain-text listing instead of JSON");
    mine->add_option("-o,--out", mine_out, "Output");

    // eval
    auto* ev = app.add_subcommand("eval", "Evaluation report from prediction and truth CSVs");
    std::string ev_pred, ev_truth, ev_normal = "normal", ev_out = "-";
    bool ev_text = false;
    ev->add_option("--predictions", ev_pred, "sample_id,prediction CSV")->required();
    ev->add_option("--truth", ev_truth, "sample_id,label CSV")->required();
    ev->add_option("--normal-label", ev_normal, "Normal class label");
    ev->add_flag("--text", ev_text, "Print the plain-text table instead of JSON");
    ev->add_option("-o,--out", ev_out, "Output");

    // run
    auto* run = app.add_subcommand("run", "Full pipeline: ingest, reduce, cluster, compress, classify, eval");
    std::string run_config, run_manifest;
    std::map<std::string, std::string> overrides;
    auto* run_cfg_opt = run->add_option("-c,--config", run_config, "Flat key = value config file");
    run->add_option("--manifest", run_manifest, "Re-run from a manifest.json")->excludes(run_cfg_opt);
    std::string o_seed, o_out, o_input, o_test_input, o_format, o_generator, o_mode, o_energy, o_measure, o_k,
        o_knn_k, o_normal, o_keep, o_kaiser, o_catmap;
    const std::vector<std::pair<std::string, std::string*>> flags = {
        {"seed", &o_seed}, {"output_dir", &o_out}, {"input", &o_input}, {"test_input", &o_test_input},
        {"format", &o_format}, {"generator", &o_generator}, {"mode", &o_mode}, {"energy_fraction", &o_energy},
        {"measure", &o_measure}, {"clusters", &o_k}, {"knn_k", &o_knn_k}, {"normal_label", &o_normal},
        {"keep_count", &o_keep}, {"kaiser", &o_kaiser}, {"category_map", &o_catmap}};
    for (const auto& [key, target] : flags) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        run->add_option(flag, *target, "Override '" + key + "'");
    }

    CLI11_PARSE(app, argc, argv);

    std::string stage_name;
    try {
        if (gen->parsed()) {
            stage_name = "gen";
            GeneratorConfig cfg;
            if (!gen_spec.empty()) {
                auto in = open_in(gen_spec);
                cfg = parse_generator_config(in);
            } else {
                cfg = generator_preset(gen_preset.empty() ? "two-class" : gen_preset);
            }
            std::ostringstream out;
            write_trace_file(out, generate_synthetic(cfg, gen_seed));
            write_text(gen_out, out.str());
        } else if (ing->parsed()) {
            stage_name = "ingest";
            Json report = Json::object();
            FrequencyMatrix fm;
            if (ing_format == "kdd-csv") {
                if (ing_catmap.empty()) throw ConfigError("kdd-csv input needs --category-map");
                auto map_in = open_in(ing_catmap);
                auto in = open_in(ing_input);
                const auto records = parse_kdd_csv(in, parse_category_map(map_in));
                report["symbol_codes"] = symbol_codes_json(records);
                fm = records_to_matrix(records);
            } else {
                auto in = open_in(ing_input);
                const auto traces = parse_trace_file(in);
                std::optional<SyscallVocabulary> vocab;
                if (!ing_vocab.empty()) vocab = matrix_from_json(read_json(ing_vocab)).vocab;
                BuildReport br;
                fm = build_matrix(traces, mode_arg(ing_mode), vocab, &br);
                report["build"] = to_json(br);
            }
            write_text(ing_out, dump(to_json(fm)));
            if (!ing_report.empty()) write_text(ing_report, dump(report));
        } else if (red->parsed()) {
            stage_name = "reduce";
            const auto fm = matrix_from_json(read_json(red_matrix));
            SpectralReport report;
            if (!red_apply.empty()) {
                report = spectral_report_from_json(read_json(red_apply));
            } else {
                SpectralOptions opts;
                opts.energy_fraction = red_energy;
                opts.kaiser = !red_no_kaiser;
                if (red_keep > 0) opts.keep_count = red_keep;
                report = analyze(fm, opts);
            }
            if (!red_report.empty()) write_text(red_report, dump(to_json(report)));
            write_text(red_out, dump(to_json(reduce_matrix(fm, report.selected_columns))));
        } else if (clu->parsed()) {
            stage_name = "cluster";
            const auto fm = matrix_from_json(read_json(clu_matrix));
            const std::size_t k = clu_k ? clu_k : fm.distinct_labels().size();
            SimilarityMeasure measure(parse_measure_kind(clu_measure), FeatureStats::from_matrix(fm.values));
            write_text(clu_out, dump(to_json(kmeans_fit(fm, k, measure, clu_seed, {clu_max_iter, clu_tol}))));
        } else if (cmp->parsed()) {
            stage_name = "compress";
            const auto fm = matrix_from_json(read_json(cmp_matrix));
            const auto model = cluster_model_from_json(read_json(cmp_model));
            std::ostringstream out;
            if (cmp_train.empty()) {
                write_features_csv(out, reduce_train(fm, model));
            } else {
                write_features_csv(out, reduce_test(fm, model, matrix_from_json(read_json(cmp_train))));
            }
            write_text(cmp_out, out.str());
        } else if (cls->parsed()) {
            stage_name = "classify";
            const std::vector<std::string> order{cls_normal};
            LabeledIds preds;
            if (!cls_measure.empty()) {
                const auto train = matrix_from_json(read_json(cls_train));
                const auto test = matrix_from_json(read_json(cls_test));
                if (!(train.vocab == test.vocab)) throw ValidationError("train/test vocabularies differ");
                SimilarityMeasure measure(parse_measure_kind(cls_measure), FeatureStats::from_matrix(train.values));
                for (Eigen::Index i = 0; i < test.n(); ++i) {
                    preds.ids.push_back(test.rows[static_cast<std::size_t>(i)]);
                    preds.labels.push_back(knn_vector(train, test.values.row(i).transpose(), measure, cls_k, order));
                }
            } else {
                auto train_in = open_in(cls_train);
                auto test_in = open_in(cls_test);
                const auto train = read_features_csv(train_in, FeatureSource::train);
                const auto test = read_features_csv(test_in, FeatureSource::test);
                for (std::size_t i = 0; i < test.size(); ++i) {
                    preds.ids.push_back(test.sample_ids[i]);
                    preds.labels.push_back(knn_scalar(train, test.values[i], cls_k, order));
                }
            }
            std::ostringstream out;
            write_labels_csv(out, preds, "prediction");
            write_text(cls_out, out.str());
        } else if (mine->parsed()) {
            stage_name = "mine";
            FrequencyMatrix fm;
            if (!mine_input.empty()) {
                auto in = open_in(mine_input);
                fm = build_matrix(parse_trace_file(in), MatrixMode::binary);
            } else if (!mine_matrix.empty()) {
                fm = matrix_from_json(read_json(mine_matrix));
            } else {
                throw ConfigError("mine needs --matrix or --input");
            }
            const auto result = apriori(fm, mine_support);
            write_text(mine_out, mine_text ? render_listing(result) : dump(to_json(result)));
        } else if (ev->parsed()) {
            stage_name = "eval";
            auto pin = open_in(ev_pred);
            auto tin = open_in(ev_truth);
            const auto preds = read_labels_csv(pin);
            const auto truth = read_labels_csv(tin);
            std::map<std::string, std::string> truth_by_id;
            for (std::size_t i = 0; i < truth.ids.size(); ++i) {
                if (!truth_by_id.emplace(truth.ids[i], truth.labels[i]).second) {
                    throw ValidationError("duplicate sample id '" + truth.ids[i] + "' in truth file");
                }
            }
            if (truth_by_id.size() != preds.ids.size()) {
                throw ValidationError("prediction and truth files cover different samples");
            }
            std::vector<std::string> aligned;
            for (const auto& id : preds.ids) {
                auto it = truth_by_id.find(id);
                if (it == truth_by_id.end()) throw ValidationError("no truth label for sample '" + id + "'");
                aligned.push_back(it->second);
            }
            const auto report = evaluate(preds.labels, aligned, ev_normal);
            write_text(ev_out, ev_text ? render_table(report) : dump(to_json(report)));
        } else if (run->parsed()) {
            stage_name = "config";
            PipelineConfig cfg;
            std::map<std::string, std::string> kv;
            if (!run_manifest.empty()) {
                kv = config_from_manifest(read_json(run_manifest)).to_key_values();
            } else if (!run_config.empty()) {
                auto in = open_in(run_config);
                kv = parse_key_values(in);
            }
            for (const auto& [key, target] : flags) {
                if (!target->empty()) kv[key] = *target;
            }
            cfg = PipelineConfig::from_key_values(kv);
            const auto result = run_pipeline(cfg);
            stage_name = "write";
            write_artifacts(result);
            if (result.evaluation) std::cout << render_table(*result.evaluation);
        }
    } catch (const StageError& e) {
        std::cerr << "idsim: stage '" << e.stage() << "' failed: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "idsim: stage '" << stage_name << "' failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
