#pragma once

// Independent brute-force oracles used to freeze expected values. These are
// written straight from the definitions and deliberately share no code with
// the library implementations they check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

// Interpolated order statistic at 1-indexed position 1 + (n-1)p, selection
// done by insertion sort.
inline double quantile(std::vector<double> v, double p) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        double key = v[i];
        std::size_t j = i;
        while (j > 0 && v[j - 1] > key) {
            v[j] = v[j - 1];
            --j;
        }
        v[j] = key;
    }
    const double pos = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;  // 1-indexed
    const auto j = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - std::floor(pos);
    if (j >= v.size()) return v.back();
    if (frac == 0.0) return v[j - 1];
    return (1.0 - frac) * v[j - 1] + frac * v[j];
}

// Conformal threshold by full sort plus an integer scan for the smallest k
// with k >= (m+1)(1-alpha).
inline double sort_calibrate(std::vector<double> scores, double alpha) {
    std::sort(scores.begin(), scores.end());
    const auto m = static_cast<int>(scores.size());
    const double target = (static_cast<double>(m) + 1.0) * (1.0 - alpha);
    int k = m + 1;
    for (int cand = 1; cand <= m; ++cand) {
        if (static_cast<double>(cand) + 1e-9 >= target) {
            k = cand;
            break;
        }
    }
    if (k > m) return std::numeric_limits<double>::infinity();
    return scores[static_cast<std::size_t>(k - 1)];
}

// Ordinary least squares (with intercept) via Gauss-Jordan elimination on
// the normal equations. Column 0 of the result is the intercept.
inline std::vector<double> least_squares(const std::vector<std::vector<double>>& x,
                                         const std::vector<double>& y) {
    const std::size_t n = x.size();
    const std::size_t d = x.front().size();
    const std::size_t p = d + 1;
    std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
    auto design = [&](std::size_t i, std::size_t j) -> double {
        return j == 0 ? 1.0 : x[i][j - 1];
    };
    for (std::size_t r = 0; r < p; ++r) {
        for (std::size_t c = 0; c < p; ++c) {
            for (std::size_t i = 0; i < n; ++i) a[r][c] += design(i, r) * design(i, c);
        }
        for (std::size_t i = 0; i < n; ++i) a[r][p] += design(i, r) * y[i];
    }
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < p; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        }
        std::swap(a[col], a[pivot]);
        if (std::abs(a[col][col]) < 1e-12) throw std::runtime_error("singular system");
        const double inv = 1.0 / a[col][col];
        for (auto& v : a[col]) v *= inv;
        for (std::size_t r = 0; r < p; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            for (std::size_t c = 0; c <= p; ++c) a[r][c] -= f * a[col][c];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t r = 0; r < p; ++r) beta[r] = a[r][p];
    return beta;
}

// Local Outlier Factor from the definition: k-distance, reachability
// distance, local reachability density, LOF ratio. Points are rows.
inline std::vector<double> lof(const std::vector<std::vector<double>>& points, int k) {
    const std::size_t n = points.size();
    auto dist = [&](std::size_t i, std::size_t j) {
        double s = 0.0;
        for (std::size_t c = 0; c < points[i].size(); ++c) {
            const double d = points[i][c] - points[j][c];
            s += d * d;
        }
        return std::sqrt(s);
    };

    std::vector<double> kdist(n);
    std::vector<std::vector<std::size_t>> nbrs(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> ds;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) ds.push_back(dist(i, j));
        }
        std::sort(ds.begin(), ds.end());
        kdist[i] = ds[static_cast<std::size_t>(k - 1)];
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i && dist(i, j) <= kdist[i]) nbrs[i].push_back(j);
        }
    }

    std::vector<double> lrd(n);
    for (std::size_t i = 0; i < n; ++i) {
        double reach = 0.0;
        for (std::size_t j : nbrs[i]) reach += std::max(kdist[j], dist(i, j));
        const double mean_reach = reach / static_cast<double>(nbrs[i].size());
        lrd[i] = mean_reach > 0.0 ? 1.0 / mean_reach
                                  : std::numeric_limits<double>::infinity();
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isinf(lrd[i])) {
            out[i] = 1.0;
            continue;
        }
        double s = 0.0;
        bool inf = false;
        for (std::size_t j : nbrs[i]) {
            if (std::isinf(lrd[j])) {
                inf = true;
                break;
            }
            s += lrd[j];
        }
        out[i] = inf ? std::numeric_limits<double>::infinity()
                     : (s / static_cast<double>(nbrs[i].size())) / lrd[i];
    }
    return out;
}

// Direct per-point interval score.
inline double smis_one(double lo, double hi, double y, double alpha) {
    double v = hi - lo;
    if (y < lo) v += (2.0 / alpha) * (lo - y);
    if (y > hi) v += (2.0 / alpha) * (y - hi);
    return v;
}

}  // namespace oracle
