#pragma once

// 1-D Gauss-Legendre rules (nodes computed, not tabulated), adaptive panel
// integration with an embedded error estimate, and product quadrature rules
// on spheres S^d for d = 2, 3.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "thinlab/core.hpp"

namespace thinlab {

// Gauss-Legendre nodes/weights on [-1,1] by Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;

    explicit GaussLegendre(int n) : x(size_t(n)), w(size_t(n)) {
        for (int i = 0; i < n; ++i) {
            // Chebyshev-based initial guess, then Newton on P_n(t) = 0.
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (t * p1 - p0) / (t * t - 1.0);
                double dt = p1 / dp;
                t -= dt;
                if (std::abs(dt) < 1e-15) break;
            }
            x[size_t(i)] = t;
            w[size_t(i)] = 2.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

namespace detail {
inline const GaussLegendre& gl_cache(int n) {
    static GaussLegendre g12(12), g24(24), g8(8), g16(16), g32(32);
    switch (n) {
        case 8: return g8;
        case 12: return g12;
        case 16: return g16;
        case 24: return g24;
        default: return g32;
    }
}
}  // namespace detail

template <class F>
double gauss_legendre(const F& f, double a, double b, int n) {
    const GaussLegendre& g = detail::gl_cache(n);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0;
    for (size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * f(mid + half * g.x[i]);
    return s * half;
}

// Adaptive integration with a GL12-vs-GL24 embedded estimate per panel and
// global greedy refinement: the panel with the largest error estimate is
// bisected until the summed estimate meets abs_tol + rel_tol * |integral|.
template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-12,
                          double abs_tol = 0.0, int max_panels = 4000) {
    struct Panel {
        double a, b, val, err;
        bool operator<(const Panel& o) const { return err < o.err; }
    };
    auto make = [&](double lo, double hi) {
        double coarse = gauss_legendre(f, lo, hi, 12);
        double fine = gauss_legendre(f, lo, hi, 24);
        return Panel{lo, hi, fine, std::abs(fine - coarse)};
    };
    std::vector<Panel> heap{make(a, b)};
    double total = heap[0].val, total_err = heap[0].err;
    auto tol = [&] { return abs_tol + rel_tol * std::max(std::abs(total), 1e-300); };
    while (total_err > tol() && int(heap.size()) < max_panels) {
        std::pop_heap(heap.begin(), heap.end());
        Panel worst = heap.back();
        heap.pop_back();
        total -= worst.val;
        total_err -= worst.err;
        double m = 0.5 * (worst.a + worst.b);
        for (Panel p : {make(worst.a, m), make(m, worst.b)}) {
            total += p.val;
            total_err += p.err;
            heap.push_back(p);
            std::push_heap(heap.begin(), heap.end());
        }
    }
    if (total_err > 1e4 * tol())
        throw numeric_failure("integrate_adaptive: refinement stalled");
    return total;
}

// Quadrature nodes on the sphere |X| = r in R^{d+1}.  Product rules:
//   d = 2: Gauss-Legendre in cos(theta) x uniform trapezoid in phi,
//   d = 3: Gauss-Legendre in the extra polar angle nested over the S^2 rule.
// Weights sum to the surface measure |S^d| r^d.
struct SphereQuadrature {
    int d = 2;
    double radius = 1;
    std::vector<Vec> nodes;      // points on the sphere
    std::vector<double> weights;

    SphereQuadrature(int d_, double r, int n_polar = 32, int n_azimuth = 64)
        : d(d_), radius(r) {
        if (d_ == 2) {
            build_s2(r, n_polar, n_azimuth);
        } else if (d_ == 3) {
            build_s3(r, n_polar, n_azimuth);
        } else {
            throw invalid_input("SphereQuadrature: d must be 2 or 3");
        }
    }

    template <class F>
    double integrate(const F& f) const {
        double s = 0;
        for (size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }

    double area() const {
        double s = 0;
        for (double w : weights) s += w;
        return s;
    }

   private:
    void build_s2(double r, int nt, int nphi) {
        GaussLegendre gl(nt);
        for (int i = 0; i < nt; ++i) {
            double ct = gl.x[size_t(i)];  // cos(theta) in [-1,1]
            double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            for (int j = 0; j < nphi; ++j) {
                double phi = 2.0 * M_PI * j / nphi;
                Vec p = Vec::zero(3);
                p[0] = r * st * std::cos(phi);
                p[1] = r * st * std::sin(phi);
                p[2] = r * ct;  // y is the polar axis: nodes symmetric in y
                nodes.push_back(p);
                weights.push_back(gl.w[size_t(i)] * (2.0 * M_PI / nphi) * r * r);
            }
        }
    }
    void build_s3(double r, int nt, int nphi) {
        // X = (sin(chi) * omega, cos(chi) * r), omega on S^2 of radius sin(chi).
        int nchi = nt;
        GaussLegendre gl(nchi);
        SphereQuadrature s2(2, 1.0, nt / 2 + 8, nphi / 2 + 16);
        for (int i = 0; i < nchi; ++i) {
            double chi = 0.5 * M_PI * (gl.x[size_t(i)] + 1.0);
            double wchi = gl.w[size_t(i)] * 0.5 * M_PI;
            double s = std::sin(chi), c = std::cos(chi);
            for (size_t k = 0; k < s2.nodes.size(); ++k) {
                Vec p = Vec::zero(4);
                p[0] = r * s * s2.nodes[k][0];
                p[1] = r * s * s2.nodes[k][1];
                p[2] = r * s * s2.nodes[k][2];
                p[3] = r * c;
                nodes.push_back(p);
                weights.push_back(wchi * s * s * s2.weights[k] * r * r * r);
            }
        }
    }
};

// |S^d|: surface area of the unit sphere in R^{d+1}.
inline double unit_sphere_area(int d) {
    if (d == 2) return 4.0 * M_PI;
    if (d == 3) return 2.0 * M_PI * M_PI;
    throw invalid_input("unit_sphere_area: d must be 2 or 3");
}

// |B_1| in R^{d+1}.
inline double unit_ball_volume(int dplus1) {
    if (dplus1 == 3) return 4.0 * M_PI / 3.0;
    if (dplus1 == 4) return M_PI * M_PI / 2.0;
    throw invalid_input("unit_ball_volume: dimension must be 3 or 4");
}

}  // namespace thinlab
