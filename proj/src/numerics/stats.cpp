#include "cellflow/numerics/stats.hpp"

#include "cellflow/error.hpp"
#include "cellflow/numerics/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cellflow {

double mean(std::span<const double> v) {
    require(!v.empty(), "mean: empty input");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
    require(!v.empty(), "median: empty input");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

double pearson(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, "pearson: need equal sizes >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double stddev(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

double median_pairwise_distance(const Matrix& x, Index cap, std::uint64_t seed) {
    require(x.rows() >= 2, "median_pairwise_distance: need at least two rows");
    std::vector<Index> rows;
    if (x.rows() <= cap) {
        rows.resize(static_cast<std::size_t>(x.rows()));
        std::iota(rows.begin(), rows.end(), Index{0});
    } else {
        Rng rng(seed, 0x6d656469616eULL);
        auto perm = rng.permutation(x.rows());
        rows.assign(perm.begin(), perm.begin() + cap);
        std::sort(rows.begin(), rows.end());
    }
    std::vector<double> d;
    d.reserve(rows.size() * (rows.size() - 1) / 2);
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j) d.push_back((x.row(rows[i]) - x.row(rows[j])).norm());
    return median(std::move(d));
}

}  // namespace cellflow
