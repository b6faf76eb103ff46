#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "idsim/classify.hpp"
#include "idsim/clustering.hpp"
#include "idsim/freqpat.hpp"
#include "idsim/ingest.hpp"
#include "idsim/scalar_reduce.hpp"
#include "idsim/spectral.hpp"

namespace idsim {

using Json = nlohmann::ordered_json;

Json to_json(const FrequencyMatrix& matrix);
FrequencyMatrix matrix_from_json(const Json& j);

Json to_json(const SpectralReport& report);
SpectralReport spectral_report_from_json(const Json& j);

Json to_json(const FeatureStats& stats);
FeatureStats feature_stats_from_json(const Json& j);

Json to_json(const ClusterModel& model);
ClusterModel cluster_model_from_json(const Json& j);

Json to_json(const FrequentItemsets& itemsets);
Json to_json(const EvaluationReport& report);
Json to_json(const BuildReport& report);
Json symbol_codes_json(const LabeledRecordSet& records);

// `sample_id,cluster,scalar,label`; absent labels are written as "-".
void write_features_csv(std::ostream& out, const ScalarFeatureSet& features);
ScalarFeatureSet read_features_csv(std::istream& in, FeatureSource source);

// `sample_id,label` rows with a header line.
struct LabeledIds {
    std::vector<std::string> ids;
    std::vector<std::string> labels;
};
void write_labels_csv(std::ostream& out, const LabeledIds& rows, const std::string& label_header = "label");
LabeledIds read_labels_csv(std::istream& in);

// Pretty-printed with a trailing newline.
std::string dump(const Json& j);

} // namespace idsim
