#include "idsim/freqpat.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <sstream>

#include "idsim/error.hpp"
#include "text_util.hpp"

namespace idsim {
namespace {

// Row-membership bitmap for one itemset.
using Bitmap = std::vector<std::uint64_t>;

std::size_t popcount(const Bitmap& b) {
    std::size_t total = 0;
    for (auto w : b) total += static_cast<std::size_t>(std::popcount(w));
    return total;
}

Bitmap intersect(const Bitmap& a, const Bitmap& b) {
    Bitmap out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] & b[i];
    return out;
}

struct Level {
    std::vector<std::vector<std::size_t>> sets;
    std::vector<Bitmap> rows;
};

} // namespace

FrequentItemsets apriori(const FrequencyMatrix& matrix, double min_support) {
    if (matrix.mode != MatrixMode::binary) {
        throw ValidationError("apriori needs a binary matrix; rebuild the matrix with mode=binary");
    }
    if (!(min_support > 0.0 && min_support <= 1.0)) throw ConfigError("min_support must be in (0, 1]");
    const auto n = static_cast<std::size_t>(matrix.n());
    const auto m = static_cast<std::size_t>(matrix.m());
    if (n == 0 || m == 0) throw ValidationError("apriori: empty matrix");

    FrequentItemsets result;
    result.min_support = min_support;
    result.transactions = n;
    const auto frequent = [&](std::size_t count) {
        return static_cast<double>(count) / static_cast<double>(n) >= min_support;
    };
    const auto emit = [&](const std::vector<std::size_t>& cols, std::size_t count) {
        Itemset s;
        s.columns = cols;
        for (auto c : cols) s.items.push_back(matrix.vocab[c]);
        s.support_count = count;
        s.support = static_cast<double>(count) / static_cast<double>(n);
        result.itemsets.push_back(std::move(s));
    };

    const std::size_t words = (n + 63) / 64;
    Level level;
    for (std::size_t j = 0; j < m; ++j) {
        Bitmap b(words, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > 0.0) {
                b[i / 64] |= std::uint64_t{1} << (i % 64);
            }
        }
        const auto count = popcount(b);
        if (frequent(count)) {
            emit({j}, count);
            level.sets.push_back({j});
            level.rows.push_back(std::move(b));
        }
    }

    while (level.sets.size() > 1) {
        const std::set<std::vector<std::size_t>> known(level.sets.begin(), level.sets.end());
        Level next;
        // Sets are sorted, so joinable pairs share a prefix and sit next to each other.
        for (std::size_t a = 0; a < level.sets.size(); ++a) {
            for (std::size_t b = a + 1; b < level.sets.size(); ++b) {
                const auto& x = level.sets[a];
                const auto& y = level.sets[b];
                if (!std::equal(x.begin(), x.end() - 1, y.begin())) break;
                auto candidate = x;
                candidate.push_back(y.back());
                bool closed = true;
                for (std::size_t drop = 0; drop + 2 < candidate.size() && closed; ++drop) {
                    auto subset = candidate;
                    subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(drop));
                    closed = known.count(subset) > 0;
                }
                if (!closed) continue;
                auto rows = intersect(level.rows[a], level.rows[b]);
                const auto count = popcount(rows);
                if (!frequent(count)) continue;
                emit(candidate, count);
                next.sets.push_back(std::move(candidate));
                next.rows.push_back(std::move(rows));
            }
        }
        level = std::move(next);
    }
    return result;
}

std::string render_listing(const FrequentItemsets& result) {
    std::ostringstream out;
    for (const auto& s : result.itemsets) {
        out << '{';
        for (std::size_t i = 0; i < s.items.size(); ++i) out << (i ? "," : "") << s.items[i];
        out << "} " << s.support_count << ' ' << detail::format_double(s.support) << '\n';
    }
    return out.str();
}

} // namespace idsim
