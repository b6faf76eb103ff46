#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "idsim/ingest.hpp"

namespace idsim {

struct Itemset {
    std::vector<std::size_t> columns;  // ascending
    std::vector<std::string> items;    // tokens for `columns`
    std::size_t support_count = 0;
    double support = 0.0;
};

struct FrequentItemsets {
    double min_support = 0.0;
    std::size_t transactions = 0;
    std::vector<Itemset> itemsets;  // by size, then lexicographic
};

// Level-wise Apriori over a binary matrix. An itemset is frequent when
// count / n >= min_support.
FrequentItemsets apriori(const FrequencyMatrix& matrix, double min_support);

// One line per itemset: `{a,b} count support`.
std::string render_listing(const FrequentItemsets& result);

} // namespace idsim
