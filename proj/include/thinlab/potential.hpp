#pragma once

// Closed-form Newtonian potentials of solid axis-aligned ellipsoids,
// normalized so that Delta V_E = -1 inside E and V_E is harmonic outside.
//
// Everything reduces to the one-parameter family of integrals
//   I_0(lam) = int_lam^inf ds / Delta(s),
//   I_j(lam) = int_lam^inf ds / ((l_j^2 + s) Delta(s)),
// with Delta(s) = sqrt(prod_k (l_k^2 + s)).  Inside E (lam = 0) the
// potential is the quadratic c0 - (1/2) sum_j c_j X_j^2 with
//   c_j = (prod l / 2) I_j(0),     sum_j c_j = 1  (exactly),
// and outside E the same expressions evaluated at the confocal parameter
// lam(X), the positive root of sum_j X_j^2/(l_j^2 + lam) = 1.  The c0
// prefactor is calibrated once against the radial solution on the unit
// ball (V(0) = 1/(2(N-2)) in R^N) and frozen.

#include <Eigen/Dense>
#include <vector>

#include "thinlab/core.hpp"
#include "thinlab/ellipsoid.hpp"
#include "thinlab/quadrature.hpp"

namespace thinlab {

namespace detail {

// int_lam^inf ds / ((l_j^2+s)^{pole} * Delta(s)) via s = lam + c tan^2(t),
// which maps the algebraic tail onto a smooth integrand on [0, pi/2].
inline double ellipsoid_integral(const std::vector<double>& axes2, double lam, int pole_axis,
                                 double rel_tol = 1e-13) {
    double lmin2 = axes2[0];
    for (double a2 : axes2) lmin2 = std::min(lmin2, a2);
    double c = lmin2 + lam;
    if (c <= 0) throw invalid_input("ellipsoid_integral: degenerate axis");
    auto f = [&](double t) -> double {
        double ct = std::cos(t);
        if (ct < 1e-12) return 0.0;
        double tn = std::tan(t);
        double s = lam + c * tn * tn;
        double prod = 1.0;
        for (double a2 : axes2) prod *= a2 + s;
        double val = 1.0 / std::sqrt(prod);
        if (pole_axis >= 0) val /= axes2[size_t(pole_axis)] + s;
        double jac = 2.0 * c * tn / (ct * ct);
        return val * jac;
    };
    return integrate_adaptive(f, 0.0, 0.5 * M_PI, rel_tol);
}

// c0 calibration factor, fixed by the unit ball where the radial solution
// gives V(0) = 1/(2(N-2)).
inline double c0_calibration(int dim) {
    static double cache[5] = {0, 0, 0, 0, 0};
    if (cache[dim] == 0.0) {
        std::vector<double> axes2(size_t(dim), 1.0);
        double raw = 0.5 * ellipsoid_integral(axes2, 0.0, -1);  // (prod l / 2) I_0
        double exact = 1.0 / (2.0 * (dim - 2));
        cache[dim] = exact / raw;
    }
    return cache[dim];
}

}  // namespace detail

struct InteriorQuadratic {
    double c0 = 0;           // V_E(0)
    std::vector<double> c;   // coefficients of -(1/2) X_j^2, sum = 1
};

inline InteriorQuadratic interior_coefficients(const Ellipsoid& E) {
    E.validate();
    if (E.thin()) throw invalid_input("interior_coefficients: ellipsoid must have l_y > 0");
    int nd = E.d + 1;
    std::vector<double> axes2(static_cast<size_t>(nd));
    double prodl = 1;
    for (int j = 0; j < nd; ++j) {
        axes2[size_t(j)] = sq(E.semi_axes[size_t(j)]);
        prodl *= E.semi_axes[size_t(j)];
    }
    InteriorQuadratic q;
    q.c.resize(size_t(nd));
    double sum = 0;
    for (int j = 0; j < nd; ++j) {
        q.c[size_t(j)] = 0.5 * prodl * detail::ellipsoid_integral(axes2, 0.0, j);
        sum += q.c[size_t(j)];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw numeric_failure("interior_coefficients: sum c_j deviates from 1 beyond quadrature tolerance");
    for (double& cj : q.c) cj /= sum;
    q.c0 = detail::c0_calibration(nd) * 0.5 * prodl * detail::ellipsoid_integral(axes2, 0.0, -1);
    return q;
}

// Confocal parameter of an exterior point: the positive root of
// sum X_j^2/(l_j^2 + lam) = 1.  Returns 0 for points in E.
inline double confocal_parameter(const Ellipsoid& E, const Vec& X) {
    if (E.thin()) throw invalid_input("confocal_parameter: ellipsoid must have l_y > 0");
    if (E.level(X) <= 1.0) return 0.0;
    int nd = E.d + 1;
    auto g = [&](double lam, double& gp) {
        double s = -1.0;
        gp = 0;
        for (int j = 0; j < nd; ++j) {
            double den = sq(E.semi_axes[size_t(j)]) + lam;
            double t = sq(X[j]) / den;
            s += t;
            gp -= t / den;
        }
        return s;
    };
    // g is decreasing and convex, so Newton from lam = 0 increases
    // monotonically toward the root; bisection only as a safeguard.
    double lo = 0.0, hi = norm2(X);
    double lam = 0.0;
    for (int it = 0; it < 200; ++it) {
        double gp, gv = g(lam, gp);
        if (gv > 0) lo = lam;
        else hi = lam;
        double step = -gv / gp;
        double next = lam + step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - lam) <= 1e-15 * (sq(E.max_semi_axis()) + lam)) return next;
        lam = next;
    }
    throw numeric_failure("confocal_parameter: no convergence");
}

// Newtonian potential of the solid ellipsoid, its gradient and Hessian.
// V and grad V are continuous across the boundary; the Hessian jumps by a
// rank-one normal term carrying the unit jump of Delta V.
struct PotentialEvaluator {
    Ellipsoid E;
    InteriorQuadratic q;
    std::vector<double> axes2;
    double prodl = 1;

    explicit PotentialEvaluator(const Ellipsoid& e) : E(e), q(interior_coefficients(e)) {
        int nd = E.d + 1;
        axes2.resize(size_t(nd));
        for (int j = 0; j < nd; ++j) {
            axes2[size_t(j)] = sq(E.semi_axes[size_t(j)]);
            prodl *= E.semi_axes[size_t(j)];
        }
    }

    double value(const Vec& X) const {
        double lam = confocal_parameter(E, X);
        if (lam == 0.0) {
            double s = q.c0;
            for (int j = 0; j <= E.d; ++j) s -= 0.5 * q.c[size_t(j)] * sq(X[j]);
            return s;
        }
        double s = detail::c0_calibration(E.d + 1) * 0.5 * prodl *
                   detail::ellipsoid_integral(axes2, lam, -1);
        for (int j = 0; j <= E.d; ++j)
            s -= 0.25 * prodl * detail::ellipsoid_integral(axes2, lam, j) * sq(X[j]);
        return s;
    }

    Vec gradient(const Vec& X) const {
        double lam = confocal_parameter(E, X);
        Vec g = Vec::zero(E.d + 1);
        for (int j = 0; j <= E.d; ++j) {
            double cj = (lam == 0.0) ? q.c[size_t(j)]
                                     : 0.5 * prodl * detail::ellipsoid_integral(axes2, lam, j);
            g[j] = -cj * X[j];
        }
        return g;
    }

    // dense (d+1)x(d+1) Hessian
    Eigen::MatrixXd hessian(const Vec& X) const {
        int nd = E.d + 1;
        double lam = confocal_parameter(E, X);
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nd, nd);
        for (int j = 0; j < nd; ++j) {
            double cj = (lam == 0.0) ? q.c[size_t(j)]
                                     : 0.5 * prodl * detail::ellipsoid_integral(axes2, lam, j);
            H(j, j) = -cj;
        }
        if (lam > 0.0) {
            double S = 0, delta = 1.0;
            Eigen::VectorXd g(nd);
            for (int j = 0; j < nd; ++j) {
                double den = axes2[size_t(j)] + lam;
                g(j) = X[j] / den;
                S += sq(g(j));
                delta *= den;
            }
            delta = std::sqrt(delta);
            H += (prodl / (S * delta)) * g * g.transpose();
        }
        return H;
    }
};

inline double potential_at(const Ellipsoid& E, const Vec& X) {
    return PotentialEvaluator(E).value(X);
}

// ----------------------------------------------------------------- decay

struct DecayReport {
    double R = 0, m = 0;
    double bound = 0;        // (m-1)^{1-d}
    double max_potential = 0;  // max of V/V(0) on the sampled sphere
    bool certified = false;
    double rescale = 1;      // factor applied so V(0) = 1
    nlohmann::json to_json() const {
        return {{"R", R}, {"m", m}, {"bound", bound}, {"max_potential", max_potential},
                {"certified", certified}, {"rescale", rescale}};
    }
};

// Checks V_E <= (m-1)^{1-d} on the sphere of radius m*R, after rescaling E
// so that V_E(0) = 1.  Requires E inside B_R.
inline DecayReport decay_certificate(const Ellipsoid& E, double R, double m, int min_samples = 1000) {
    if (E.max_semi_axis() > R) throw invalid_input("decay_certificate: E not contained in B_R");
    if (m <= 1.0) throw invalid_input("decay_certificate: need m > 1");
    double c0 = interior_coefficients(E).c0;
    double t = 1.0 / std::sqrt(c0);  // V_{tE}(0) = t^2 V_E(0) = 1
    Ellipsoid Es = E.scaled(t);
    double Rs = R * t;
    PotentialEvaluator V(Es);
    int n_polar = 32, n_az = 64;
    while (n_polar * n_az < min_samples) n_polar *= 2;
    SphereQuadrature sph(E.d, m * Rs, n_polar, n_az);
    double vmax = 0;
    for (const Vec& p : sph.nodes) vmax = std::max(vmax, V.value(p));
    DecayReport rep;
    rep.R = Rs;
    rep.m = m;
    rep.rescale = t;
    rep.bound = std::pow(m - 1.0, 1 - E.d);
    rep.max_potential = vmax;
    rep.certified = vmax <= rep.bound + 1e-12;
    return rep;
}

// -------------------------------------------------- inverse ellipsoid solve

struct InverseSolveResult {
    Ellipsoid E;
    bool converged = false;
    bool condition_warning = false;
    int iterations = 0;
    double residual = 0;  // ||c(l) - a||_inf after scaling
};

namespace detail {

inline std::vector<double> shape_coefficients(const std::vector<double>& l) {
    Ellipsoid E(int(l.size()) - 1, l);
    return interior_coefficients(E).c;
}

}  // namespace detail

// Finds the ellipsoid whose interior quadratic matches coefficients a
// (positive, sum 1) and V_E(0) = target_c0.  The c_j are scale invariant,
// so the shape is solved first on the slice prod l_j = 1 (log coordinates,
// damped Newton with a central-difference Jacobian), then the ellipsoid is
// rescaled to hit target_c0.
inline InverseSolveResult solve_inverse_ellipsoid(const std::vector<double>& a, double target_c0,
                                                  int max_iterations = 40) {
    int nd = int(a.size());
    int d = nd - 1;
    if (d < 2 || d > 3) throw invalid_input("solve_inverse_ellipsoid: need d+1 coefficients, d in {2,3}");
    double asum = 0;
    for (double aj : a) {
        if (aj <= 0) throw invalid_input("solve_inverse_ellipsoid: coefficients must be positive");
        asum += aj;
    }
    if (std::abs(asum - 1.0) > 1e-8) throw invalid_input("solve_inverse_ellipsoid: coefficients must sum to 1");
    if (target_c0 <= 0) throw invalid_input("solve_inverse_ellipsoid: target_c0 must be positive");

    InverseSolveResult res;
    for (double aj : a)
        if (aj <= 1e-6) res.condition_warning = true;

    // log-coordinates theta_1..theta_d with theta_{d+1} = -sum: prod l = 1
    auto axes_of = [&](const Eigen::VectorXd& th) {
        std::vector<double> l(static_cast<size_t>(nd));
        double s = 0;
        for (int j = 0; j < d; ++j) {
            l[size_t(j)] = std::exp(th(j));
            s += th(j);
        }
        l[size_t(d)] = std::exp(-s);
        return l;
    };
    auto F = [&](const Eigen::VectorXd& th) {
        std::vector<double> c = detail::shape_coefficients(axes_of(th));
        Eigen::VectorXd r(d);
        for (int j = 0; j < d; ++j) r(j) = c[size_t(j)] - a[size_t(j)] / asum;
        return r;
    };

    // initial guess: l_j ~ 1/sqrt(a_j), projected to prod l = 1
    Eigen::VectorXd th(d);
    {
        std::vector<double> l0(static_cast<size_t>(nd));
        double slog = 0;
        for (int j = 0; j < nd; ++j) {
            l0[size_t(j)] = 1.0 / std::sqrt(a[size_t(j)] * nd);
            slog += std::log(l0[size_t(j)]);
        }
        for (int j = 0; j < d; ++j) th(j) = std::log(l0[size_t(j)]) - slog / nd;
    }

    Eigen::VectorXd r = F(th);
    double rn = r.lpNorm<Eigen::Infinity>();
    const double fd_step = 1e-6;  // in log coordinates: step = 1e-6 * l_j
    int it = 0;
    for (; it < max_iterations && rn > 1e-12; ++it) {
        Eigen::MatrixXd J(d, d);
        for (int k = 0; k < d; ++k) {
            Eigen::VectorXd tp = th, tm = th;
            tp(k) += fd_step;
            tm(k) -= fd_step;
            J.col(k) = (F(tp) - F(tm)) / (2 * fd_step);
        }
        Eigen::VectorXd delta = J.fullPivLu().solve(-r);
        double t = 1.0;
        Eigen::VectorXd th_new;
        Eigen::VectorXd r_new;
        double rn_new = rn;
        for (int ls = 0; ls < 8; ++ls, t *= 0.5) {
            th_new = th + t * delta;
            r_new = F(th_new);
            rn_new = r_new.lpNorm<Eigen::Infinity>();
            if (rn_new < rn * (1.0 - 0.25 * t) || rn_new < 1e-12) break;
        }
        if (rn_new >= rn && rn > 1e-10) {
            res.iterations = it + 1;
            res.residual = rn;
            res.converged = false;
            res.E = Ellipsoid(d, axes_of(th));
            return res;  // stalled; best iterate with flag
        }
        th = th_new;
        r = r_new;
        rn = rn_new;
    }
    res.iterations = it;

    std::vector<double> l = axes_of(th);
    double c0_shape = interior_coefficients(Ellipsoid(d, l)).c0;
    double t = std::sqrt(target_c0 / c0_shape);
    for (double& lj : l) lj *= t;
    res.E = Ellipsoid(d, l);

    std::vector<double> c_final = interior_coefficients(res.E).c;
    double resid = 0;
    for (int j = 0; j < nd; ++j) resid = std::max(resid, std::abs(c_final[size_t(j)] - a[size_t(j)] / asum));
    res.residual = resid;
    res.converged = resid <= 1e-10;
    return res;
}

// ----------------------------------------------- global obstacle solutions

// The global solution U = P - c0 + V_E with P = (1/2) sum c_j X_j^2.
// U vanishes on E, is positive outside, and Delta U = chi_{E^c}.
struct PotentialSolution {
    Ellipsoid E;
    InteriorQuadratic q;
    PotentialEvaluator V;

    explicit PotentialSolution(const Ellipsoid& e) : E(e), q(interior_coefficients(e)), V(e) {}

    double P(const Vec& X) const {
        double s = 0;
        for (int j = 0; j <= E.d; ++j) s += 0.5 * q.c[size_t(j)] * sq(X[j]);
        return s;
    }

    double value(const Vec& X) const {
        if (E.level(X) <= 1.0) return 0.0;  // exact on the contact set
        return P(X) - q.c0 + V.value(X);
    }

    Vec gradient(const Vec& X) const {
        Vec g = Vec::zero(E.d + 1);
        if (E.level(X) <= 1.0) return g;
        Vec gv = V.gradient(X);
        for (int j = 0; j <= E.d; ++j) g[j] = q.c[size_t(j)] * X[j] + gv[j];
        return g;
    }

    Eigen::MatrixXd hessian(const Vec& X) const {
        Eigen::MatrixXd H = V.hessian(X);
        for (int j = 0; j <= E.d; ++j) H(j, j) += q.c[size_t(j)];
        return H;
    }

    double laplacian(const Vec& X) const { return hessian(X).trace(); }

    AnalyticField as_field() const {
        AnalyticField f;
        f.dim = E.d + 1;
        f.value = [s = *this](const Vec& X) { return s.value(X); };
        f.gradient = [s = *this](const Vec& X) { return s.gradient(X); };
        return f;
    }
};

inline PotentialSolution build_obstacle_solution(const Ellipsoid& E) { return PotentialSolution(E); }

}  // namespace thinlab
