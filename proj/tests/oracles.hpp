#pragma once

// Independent reference computations used by the unit tests and the
// acceptance runner. Written with plain vectors and loops; nothing here calls
// into the library's numerical code.

#include "soclearn/model.hpp"
#include "soclearn/rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline Mat to_mat(const soclearn::Matrix& m) {
    Mat out(m.rows(), Vec(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    return out;
}

// Every vertex reaches every other along edges i -> j with w[i][j] > 0.
inline bool strongly_connected(const Mat& w) {
    const std::size_t n = w.size();
    for (std::size_t start = 0; start < n; ++start) {
        std::vector<bool> seen(n, false);
        std::queue<std::size_t> q;
        q.push(start);
        seen[start] = true;
        while (!q.empty()) {
            auto v = q.front();
            q.pop();
            for (std::size_t u = 0; u < n; ++u) {
                if (w[v][u] > 0.0 && !seen[u]) {
                    seen[u] = true;
                    q.push(u);
                }
            }
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end()) return false;
    }
    return true;
}

// One step of the learning rule, written out literally. lik[i][theta][s].
inline Mat update(const Mat& a, const Mat& mu, const std::vector<Mat>& lik, const std::vector<std::size_t>& obs) {
    const std::size_t n = mu.size(), m = mu[0].size();
    Mat next(n, Vec(m, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        double forecast = 0.0;
        for (std::size_t th = 0; th < m; ++th) forecast += mu[i][th] * lik[i][th][obs[i]];
        for (std::size_t th = 0; th < m; ++th) {
            double v = 0.0;
            if (a[i][i] > 0.0) v += a[i][i] * mu[i][th] * lik[i][th][obs[i]] / forecast;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) v += a[i][j] * mu[j][th];
            next[i][th] = v;
        }
        double s = 0.0;
        for (double v : next[i]) s += v;
        for (double& v : next[i]) v /= s;
    }
    return next;
}

// Isolated Bayesian agent: posterior proportional to prior times likelihood.
inline Vec bayes_filter(Vec prior, const Mat& lik, const std::vector<std::size_t>& observations) {
    for (auto s : observations) {
        double z = 0.0;
        for (std::size_t th = 0; th < prior.size(); ++th) {
            prior[th] *= lik[th][s];
            z += prior[th];
        }
        for (double& v : prior) v /= z;
    }
    return prior;
}

// DeGroot averaging: mu <- A mu.
inline Mat average(const Mat& a, const Mat& mu) {
    Mat next(mu.size(), Vec(mu[0].size(), 0.0));
    for (std::size_t i = 0; i < mu.size(); ++i)
        for (std::size_t j = 0; j < mu.size(); ++j)
            for (std::size_t th = 0; th < mu[0].size(); ++th) next[i][th] += a[i][j] * mu[j][th];
    return next;
}

// Closest p/q to x with q <= max_den; the smallest q wins ties.
inline soclearn::Rational best_rational(double x, std::int64_t max_den) {
    soclearn::Rational best(0);
    double best_err = INFINITY;
    for (std::int64_t q = 1; q <= max_den; ++q) {
        const auto p = static_cast<std::int64_t>(std::llround(x * static_cast<double>(q)));
        for (auto cand : {p - 1, p, p + 1}) {
            const double err = std::abs(x - static_cast<double>(cand) / static_cast<double>(q));
            if (err < best_err) {
                best_err = err;
                best = soclearn::Rational(cand, q);
            }
        }
    }
    return best;
}

// max over comparison states of prod_s (l(s|theta)/l(s|theta*))^counts[s], exactly.
inline soclearn::Rational delta(const soclearn::RationalTable& lik, std::size_t truth,
                                const std::vector<std::size_t>& comparison, const std::vector<std::size_t>& counts) {
    soclearn::Rational best(-1);
    for (auto th : comparison) {
        soclearn::Rational num(1), den(1);
        for (std::size_t s = 0; s < counts.size(); ++s)
            for (std::size_t k = 0; k < counts[s]; ++k) {
                num *= lik[th][s];
                den *= lik[truth][s];
            }
        const soclearn::Rational ratio = num / den;
        if (ratio > best) best = ratio;
    }
    return best;
}

inline Vec random_simplex(std::mt19937_64& gen, std::size_t m) {
    std::exponential_distribution<double> e(1.0);
    Vec v(m);
    double s = 0.0;
    for (auto& x : v) s += (x = e(gen));
    for (auto& x : v) x /= s;
    return v;
}

// Row-stochastic matrix with the given diagonal policy.
inline Mat random_stochastic(std::mt19937_64& gen, std::size_t n, bool zero_diagonal = false) {
    Mat a(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = random_simplex(gen, n);
        if (zero_diagonal && n > 1) {
            a[i][i] = 0.0;
            double s = 0.0;
            for (double v : a[i]) s += v;
            for (double& v : a[i]) v /= s;
        }
    }
    return a;
}

// Strictly positive rational distribution with denominators up to `den`.
inline std::vector<soclearn::Rational> random_rational_row(std::mt19937_64& gen, std::size_t m, int den) {
    std::uniform_int_distribution<int> d(1, den);
    std::vector<int> w(m);
    int total = 0;
    for (auto& x : w) total += (x = d(gen));
    std::vector<soclearn::Rational> row;
    for (int x : w) row.emplace_back(x, total);
    return row;
}

} // namespace oracle
