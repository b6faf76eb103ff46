#include "idsim/classify.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "idsim/error.hpp"

namespace idsim {
namespace {

bool before_in_order(const std::string& a, const std::string& b, const std::vector<std::string>& order) {
    const auto pa = std::find(order.begin(), order.end(), a) - order.begin();
    const auto pb = std::find(order.begin(), order.end(), b) - order.begin();
    if (pa != pb) return pa < pb;
    return a < b;
}

std::vector<Neighbor> take_nearest(std::vector<Neighbor> all, std::size_t k) {
    std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.key != b.key) return a.key < b.key;
        return a.index < b.index;
    });
    all.resize(k);
    return all;
}

} // namespace

std::string majority_vote(const std::vector<Neighbor>& ranked, const std::vector<std::string>& class_order) {
    if (ranked.empty()) throw ValidationError("majority_vote: no neighbors");
    struct Tally {
        std::size_t votes = 0;
        double best_key = 0.0;
    };
    std::map<std::string, Tally> tally;
    for (const auto& nb : ranked) {
        auto [it, fresh] = tally.try_emplace(nb.label);
        if (fresh || nb.key < it->second.best_key) it->second.best_key = nb.key;
        ++it->second.votes;
    }
    auto winner = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        const auto& w = winner->second;
        const auto& c = it->second;
        if (c.votes != w.votes) {
            if (c.votes > w.votes) winner = it;
        } else if (c.best_key != w.best_key) {
            if (c.best_key < w.best_key) winner = it;
        } else if (before_in_order(it->first, winner->first, class_order)) {
            winner = it;
        }
    }
    return winner->first;
}

std::string knn_scalar(const ScalarFeatureSet& train, double query_value, std::size_t k,
                       const std::vector<std::string>& class_order) {
    if (train.size() == 0) throw ValidationError("knn_scalar: empty training set");
    if (k == 0) throw ConfigError("knn k must be at least 1");
    if (k > train.size()) {
        throw ConfigError("knn k = " + std::to_string(k) + " exceeds training size " + std::to_string(train.size()));
    }
    std::vector<Neighbor> all;
    all.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (!train.labels[i]) throw ValidationError("training sample '" + train.sample_ids[i] + "' has no label");
        all.push_back({i, *train.labels[i], std::abs(train.values[i] - query_value)});
    }
    return majority_vote(take_nearest(std::move(all), k), class_order);
}

std::string knn_vector(const FrequencyMatrix& train, const Eigen::Ref<const Eigen::VectorXd>& query,
                       const SimilarityMeasure& measure, std::size_t k,
                       const std::vector<std::string>& class_order) {
    const auto n = static_cast<std::size_t>(train.n());
    if (n == 0) throw ValidationError("knn_vector: empty training set");
    if (k == 0) throw ConfigError("knn k must be at least 1");
    if (k > n) throw ConfigError("knn k = " + std::to_string(k) + " exceeds training size " + std::to_string(n));
    if (query.size() != train.m()) throw ValidationError("query length does not match training width");
    std::vector<Neighbor> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!train.labels[i]) throw ValidationError("training row '" + train.rows[i] + "' has no label");
        const double sim = measure.similarity(train.values.row(static_cast<Eigen::Index>(i)), query.transpose());
        all.push_back({i, *train.labels[i], -sim});
    }
    return majority_vote(take_nearest(std::move(all), k), class_order);
}

EvaluationReport evaluate(const std::vector<std::string>& predictions, const std::vector<std::string>& truth,
                          const std::string& normal_label) {
    if (predictions.size() != truth.size()) {
        throw ValidationError("prediction count " + std::to_string(predictions.size()) +
                              " does not match truth count " + std::to_string(truth.size()));
    }
    EvaluationReport r;
    std::set<std::string> others;
    for (const auto& l : truth) others.insert(l);
    for (const auto& l : predictions) others.insert(l);
    others.erase(normal_label);
    r.class_order.push_back(normal_label);
    r.class_order.insert(r.class_order.end(), others.begin(), others.end());

    const auto c = static_cast<Eigen::Index>(r.class_order.size());
    auto pos = [&](const std::string& l) {
        return static_cast<Eigen::Index>(std::find(r.class_order.begin(), r.class_order.end(), l) - r.class_order.begin());
    };
    r.confusion = Eigen::MatrixXi::Zero(c, c);
    for (std::size_t i = 0; i < truth.size(); ++i) ++r.confusion(pos(truth[i]), pos(predictions[i]));
    r.total = truth.size();

    r.accuracy = r.total ? static_cast<double>(r.confusion.trace()) / static_cast<double>(r.total) : 0.0;
    // Row 0 is normal; columns 1.. are attack predictions.
    const int normal_total = r.confusion.row(0).sum();
    const int false_alarms = r.confusion.row(0).tail(c - 1).sum();
    const int attack_total = r.confusion.bottomRows(c - 1).sum();
    const int detected = r.confusion.bottomRightCorner(c - 1, c - 1).sum();
    r.false_alarm_rate_undefined = normal_total == 0;
    r.false_alarm_rate = normal_total ? static_cast<double>(false_alarms) / normal_total : 0.0;
    r.detection_rate_undefined = attack_total == 0;
    r.detection_rate = attack_total ? static_cast<double>(detected) / attack_total : 0.0;
    for (Eigen::Index i = 0; i < c; ++i) {
        const int row = r.confusion.row(i).sum();
        r.per_class_recall.push_back(row ? static_cast<double>(r.confusion(i, i)) / row : 0.0);
    }
    return r;
}

std::string render_table(const EvaluationReport& report) {
    std::size_t width = 8;
    for (const auto& l : report.class_order) width = std::max(width, l.size() + 2);
    std::ostringstream out;
    auto cell = [&](const std::string& s) {
        out << s << std::string(width > s.size() ? width - s.size() : 1, ' ');
    };
    cell("truth\\pred");
    for (const auto& l : report.class_order) cell(l);
    out << "recall\n";
    for (std::size_t i = 0; i < report.class_order.size(); ++i) {
        cell(report.class_order[i]);
        for (std::size_t j = 0; j < report.class_order.size(); ++j) {
            cell(std::to_string(report.confusion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));
        }
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", report.per_class_recall[i]);
        out << buf << '\n';
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "accuracy %.4f  detection rate %.4f%s  false alarm rate %.4f%s\n", report.accuracy,
                  report.detection_rate, report.detection_rate_undefined ? " (undefined)" : "",
                  report.false_alarm_rate, report.false_alarm_rate_undefined ? " (undefined)" : "");
    out << buf;
    return out.str();
}

} // namespace idsim
