#pragma once

// Small shared pieces: the point type for R^{d+1} (d <= 3), index helpers,
// and the error types thrown across the library.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace thinlab {

// Points live in R^{d+1} with the splitting X = (x_1..x_d, y); the y
// coordinate is always the last one.  Capacity is fixed at 4 (d <= 3).
struct Vec {
    std::array<double, 4> c{};
    int n = 3;

    Vec() = default;
    Vec(std::initializer_list<double> v) {
        n = static_cast<int>(v.size());
        int i = 0;
        for (double x : v) c[static_cast<size_t>(i++)] = x;
    }
    static Vec zero(int n_) {
        Vec v;
        v.n = n_;
        return v;
    }
    double& operator[](int i) { return c[static_cast<size_t>(i)]; }
    double operator[](int i) const { return c[static_cast<size_t>(i)]; }
    double y() const { return c[static_cast<size_t>(n - 1)]; }
    double& y() { return c[static_cast<size_t>(n - 1)]; }

    Vec& operator+=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[size_t(i)] += o[i];
        return *this;
    }
    Vec& operator-=(const Vec& o) {
        for (int i = 0; i < n; ++i) c[size_t(i)] -= o[i];
        return *this;
    }
    Vec& operator*=(double s) {
        for (int i = 0; i < n; ++i) c[size_t(i)] *= s;
        return *this;
    }
};

inline Vec operator+(Vec a, const Vec& b) { return a += b; }
inline Vec operator-(Vec a, const Vec& b) { return a -= b; }
inline Vec operator*(double s, Vec a) { return a *= s; }

inline double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
    return s;
}
inline double norm2(const Vec& a) { return dot(a, a); }
inline double norm(const Vec& a) { return std::sqrt(norm2(a)); }

inline double sq(double x) { return x * x; }

// Validation failures (bad arguments, violated preconditions).
struct invalid_input : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numerical failures (non-convergence, ill-conditioning).
struct numeric_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A scalar field over R^{d+1} with optional analytic gradient.  Analytic
// callables are passed around this way so quadratures can consume either
// closed-form solutions or grid interpolants through one interface.
struct AnalyticField {
    int dim = 3;  // d+1
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;  // may be empty

    double operator()(const Vec& X) const { return value(X); }
};

}  // namespace thinlab
