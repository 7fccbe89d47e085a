#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

namespace curvot {

/// Small fixed-dimension point/vector type. The whole library is
/// instantiated for D = 2 and D = 3.
template <int D>
struct Vec {
    std::array<double, D> c{};

    double& operator[](int i) { return c[i]; }
    double operator[](int i) const { return c[i]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < D; ++i) c[i] += o.c[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < D; ++i) c[i] -= o.c[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < D; ++i) c[i] *= s;
        return *this;
    }

    friend Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend Vec operator*(Vec a, double s) { return a *= s; }
    friend Vec operator*(double s, Vec a) { return a *= s; }
    friend Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
    friend Vec operator-(Vec a) { return a *= -1.0; }
    friend bool operator==(const Vec& a, const Vec& b) { return a.c == b.c; }
};

using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

template <int D>
inline double dot(const Vec<D>& a, const Vec<D>& b) {
    double s = 0.0;
    for (int i = 0; i < D; ++i) s += a[i] * b[i];
    return s;
}

template <int D>
inline double norm_sq(const Vec<D>& a) {
    return dot(a, a);
}

template <int D>
inline double norm(const Vec<D>& a) {
    return std::sqrt(norm_sq(a));
}

template <int D>
inline double dist_sq(const Vec<D>& a, const Vec<D>& b) {
    return norm_sq(a - b);
}

template <int D>
inline double dist(const Vec<D>& a, const Vec<D>& b) {
    return std::sqrt(dist_sq(a, b));
}

/// Point on the segment [a,b] at parameter t in [0,1].
template <int D>
inline Vec<D> lerp(const Vec<D>& a, const Vec<D>& b, double t) {
    Vec<D> r;
    for (int i = 0; i < D; ++i) r[i] = (1.0 - t) * a[i] + t * b[i];
    return r;
}

template <int D>
struct Box {
    Vec<D> lo;
    Vec<D> hi;

    static Box unit() {
        Box b;
        for (int i = 0; i < D; ++i) {
            b.lo[i] = 0.0;
            b.hi[i] = 1.0;
        }
        return b;
    }

    void expand(const Vec<D>& p) {
        for (int i = 0; i < D; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }

    Vec<D> center() const {
        Vec<D> c;
        for (int i = 0; i < D; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
        return c;
    }

    double max_extent() const {
        double e = 0.0;
        for (int i = 0; i < D; ++i) e = std::max(e, hi[i] - lo[i]);
        return e;
    }

    double diagonal() const {
        return dist(lo, hi);
    }
};

template <int D>
inline Box<D> bounding_box(const std::vector<Vec<D>>& pts) {
    Box<D> b;
    for (int i = 0; i < D; ++i) {
        b.lo[i] = std::numeric_limits<double>::infinity();
        b.hi[i] = -std::numeric_limits<double>::infinity();
    }
    for (const auto& p : pts) b.expand(p);
    return b;
}

}  // namespace curvot
