#pragma once

#include <optional>
#include <string>
#include <vector>

#include "idsim/clustering.hpp"
#include "idsim/ingest.hpp"

namespace idsim {

enum class FeatureSource { train, test };

// One scalar per sample: summed distance to every centroid plus the distance
// to the nearest neighbour inside the sample's cluster.
struct ScalarFeatureSet {
    std::vector<std::string> sample_ids;
    std::vector<double> values;
    std::vector<std::optional<std::string>> labels;
    std::vector<std::size_t> cluster_of;
    FeatureSource source = FeatureSource::train;

    std::size_t size() const noexcept { return values.size(); }
};

// Singleton clusters contribute a neighbour distance of 0.
ScalarFeatureSet reduce_train(const FrequencyMatrix& matrix, const ClusterModel& model);

// Test samples are assigned to the trained clusters; the neighbour pool is the
// training members of the assigned cluster.
ScalarFeatureSet reduce_test(const FrequencyMatrix& matrix, const ClusterModel& model,
                             const FrequencyMatrix& train_matrix);

} // namespace idsim
