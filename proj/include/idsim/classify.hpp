#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "idsim/ingest.hpp"
#include "idsim/scalar_reduce.hpp"
#include "idsim/similarity.hpp"

namespace idsim {

// A training sample ranked for a query; smaller key means closer.
struct Neighbor {
    std::size_t index;
    std::string label;
    double key;
};

// Majority label among `ranked` (already ordered nearest first). Vote ties go
// to the label with the closest member, then to the earlier label in
// `class_order` (labels missing from it sort after, lexicographically).
std::string majority_vote(const std::vector<Neighbor>& ranked, const std::vector<std::string>& class_order);

// k nearest by |value - query|; distance ties to the lower sample index.
std::string knn_scalar(const ScalarFeatureSet& train, double query_value, std::size_t k,
                       const std::vector<std::string>& class_order = {});

// k most similar training rows under `measure`; similarity ties to the lower row index.
std::string knn_vector(const FrequencyMatrix& train, const Eigen::Ref<const Eigen::VectorXd>& query,
                       const SimilarityMeasure& measure, std::size_t k,
                       const std::vector<std::string>& class_order = {});

struct EvaluationReport {
    std::vector<std::string> class_order;  // normal label first
    Eigen::MatrixXi confusion;             // rows = truth, columns = prediction
    double accuracy = 0.0;
    double detection_rate = 0.0;
    double false_alarm_rate = 0.0;
    bool detection_rate_undefined = false;
    bool false_alarm_rate_undefined = false;
    std::vector<double> per_class_recall;
    std::size_t total = 0;
};

// Detection treats every non-normal label as one attack class.
EvaluationReport evaluate(const std::vector<std::string>& predictions, const std::vector<std::string>& truth,
                          const std::string& normal_label);

std::string render_table(const EvaluationReport& report);

} // namespace idsim
