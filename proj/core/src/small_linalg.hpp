#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace curvot::detail {

inline double vdot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double vnorm(const std::vector<double>& a) { return std::sqrt(vdot(a, a)); }

inline void vaxpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void vscale(std::vector<double>& x, double s) {
    for (double& v : x) v *= s;
}

inline void remove_mean(std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double& v : x) v -= m;
}

/// Symmetric positive definite pentadiagonal system, stored by diagonals.
/// Used for the ADMM vertex update; Cholesky factor has the same bandwidth.
class BandedSpd {
public:
    explicit BandedSpd(int n) : n_(n), d0_(n, 0.0), d1_(n, 0.0), d2_(n, 0.0) {}

    double& at(int i, int j) {
        if (i == j) return d0_[i];
        if (j == i + 1) return d1_[i];
        return d2_[i];  // j == i + 2
    }

    void add(int i, int j, double v) {
        if (j < i) std::swap(i, j);
        at(i, j) += v;
    }

    // in-place LL^T with the same band structure
    void factor() {
        for (int i = 0; i < n_; ++i) {
            double s = d0_[i];
            if (i >= 1) s -= d1_[i - 1] * d1_[i - 1];
            if (i >= 2) s -= d2_[i - 2] * d2_[i - 2];
            d0_[i] = std::sqrt(s);
            if (i + 1 < n_) {
                double t = d1_[i];
                if (i >= 1) t -= d1_[i - 1] * d2_[i - 1];
                d1_[i] = t / d0_[i];
            }
            if (i + 2 < n_) d2_[i] = d2_[i] / d0_[i];
        }
    }

    // solves L L^T x = b after factor()
    void solve(std::vector<double>& b) const {
        for (int i = 0; i < n_; ++i) {
            double s = b[i];
            if (i >= 1) s -= d1_[i - 1] * b[i - 1];
            if (i >= 2) s -= d2_[i - 2] * b[i - 2];
            b[i] = s / d0_[i];
        }
        for (int i = n_ - 1; i >= 0; --i) {
            double s = b[i];
            if (i + 1 < n_) s -= d1_[i] * b[i + 1];
            if (i + 2 < n_) s -= d2_[i] * b[i + 2];
            b[i] = s / d0_[i];
        }
    }

private:
    int n_;
    std::vector<double> d0_, d1_, d2_;
};

}  // namespace curvot::detail
