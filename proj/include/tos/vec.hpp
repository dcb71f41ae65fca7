#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tos {

// Dense real vector. All solver state lives in these; matrix-valued
// variables travel flattened row-major.
using Vec = std::vector<double>;

inline bool is_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline void check_dim(const Vec& v, std::size_t dim, const char* what) {
    if (v.size() != dim)
        throw std::invalid_argument(std::string(what) + ": expected dim " +
                                    std::to_string(dim) + ", got " + std::to_string(v.size()));
}

inline Vec zeros(std::size_t n) { return Vec(n, 0.0); }

inline Vec ones(std::size_t n) { return Vec(n, 1.0); }

inline Vec constant(std::size_t n, double c) { return Vec(n, c); }

inline double dot(const Vec& a, const Vec& b) {
    check_dim(b, a.size(), "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_sq(const Vec& a) { return dot(a, a); }

inline double norm2(const Vec& a) { return std::sqrt(norm2_sq(a)); }

inline Vec add(const Vec& a, const Vec& b) {
    check_dim(b, a.size(), "add");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
    check_dim(b, a.size(), "sub");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec scale(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline Vec negate(const Vec& a) { return scale(-1.0, a); }

// r = a + s*b
inline Vec axpy(const Vec& a, double s, const Vec& b) {
    check_dim(b, a.size(), "axpy");
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + s * b[i];
    return r;
}

inline void add_scaled_inplace(Vec& a, double s, const Vec& b) {
    check_dim(b, a.size(), "add_scaled_inplace");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += s * b[i];
}

inline double dist2(const Vec& a, const Vec& b) { return norm2(sub(a, b)); }

}  // namespace tos
