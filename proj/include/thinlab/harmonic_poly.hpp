#pragma once

// Even-in-y harmonic polynomials on R^{d+1}: construction with harmonicity
// enforced by projection, membership classification for the sublevel-set
// classes used by normalized quadratics, and least-squares recovery of the
// polynomial expansion of a field that is harmonic outside the unit ball.

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <vector>

#include "thinlab/core.hpp"
#include "thinlab/grid.hpp"
#include "json.hpp"

namespace thinlab {

using MultiIndex = std::array<int, 4>;  // exponents, y last; unused axes 0

struct HarmonicPolynomial {
    int d = 2;
    int degree = 0;
    std::vector<std::pair<MultiIndex, double>> terms;  // sorted by exponent

    double evaluate(const Vec& X) const {
        double s = 0;
        for (const auto& [a, c] : terms) {
            double m = c;
            for (int j = 0; j <= d; ++j)
                for (int e = 0; e < a[size_t(j)]; ++e) m *= X[j];
            s += m;
        }
        return s;
    }
    double operator()(const Vec& X) const { return evaluate(X); }

    Vec gradient(const Vec& X) const {
        Vec g = Vec::zero(d + 1);
        for (const auto& [a, c] : terms)
            for (int j = 0; j <= d; ++j) {
                if (a[size_t(j)] == 0) continue;
                double m = c * a[size_t(j)];
                for (int i = 0; i <= d; ++i) {
                    int e = a[size_t(i)] - (i == j ? 1 : 0);
                    for (int q = 0; q < e; ++q) m *= X[i];
                }
                g[j] += m;
            }
        return g;
    }

    double coefficient(const MultiIndex& a) const {
        for (const auto& [b, c] : terms)
            if (b == a) return c;
        return 0.0;
    }

    AnalyticField as_field() const {
        AnalyticField f;
        f.dim = d + 1;
        f.value = [p = *this](const Vec& X) { return p.evaluate(X); };
        f.gradient = [p = *this](const Vec& X) { return p.gradient(X); };
        return f;
    }

    nlohmann::json to_json() const {
        nlohmann::json jt = nlohmann::json::array();
        for (const auto& [a, c] : terms) {
            std::vector<int> powers(a.begin(), a.begin() + d + 1);
            jt.push_back({{"powers", powers}, {"coeff", c}});
        }
        return {{"d", d}, {"degree", degree}, {"terms", jt}};
    }
};

namespace poly_detail {

// all exponent tuples with |a| <= k and even y power
inline std::vector<MultiIndex> monomials(int d, int k) {
    std::vector<MultiIndex> out;
    MultiIndex a{};
    std::function<void(int, int)> rec = [&](int axis, int left) {
        if (axis == d + 1) {
            out.push_back(a);
            return;
        }
        int step = (axis == d) ? 2 : 1;  // y exponent even
        for (int e = 0; e <= left; e += step) {
            a[size_t(axis)] = e;
            rec(axis + 1, left - e);
        }
        a[size_t(axis)] = 0;
    };
    rec(0, k);
    std::sort(out.begin(), out.end());
    return out;
}

inline int total_degree(const MultiIndex& a, int d) {
    int s = 0;
    for (int j = 0; j <= d; ++j) s += a[size_t(j)];
    return s;
}

// Laplacian as a matrix on the monomial space (target space = same list)
inline Eigen::MatrixXd laplacian_matrix(const std::vector<MultiIndex>& mons, int d) {
    std::map<MultiIndex, int> index;
    for (size_t i = 0; i < mons.size(); ++i) index[mons[i]] = int(i);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(long(mons.size()), long(mons.size()));
    for (size_t i = 0; i < mons.size(); ++i) {
        for (int j = 0; j <= d; ++j) {
            int e = mons[i][size_t(j)];
            if (e < 2) continue;
            MultiIndex b = mons[i];
            b[size_t(j)] = e - 2;
            L(index.at(b), long(i)) += double(e) * (e - 1);
        }
    }
    return L;
}

}  // namespace poly_detail

// Builds a polynomial from raw terms; rejects odd powers of y, projects
// onto the kernel of the Laplacian and rejects if the projection moves any
// coefficient by more than 1e-12 * scale.
inline HarmonicPolynomial make_harmonic_polynomial(int d, const std::vector<std::pair<MultiIndex, double>>& raw) {
    int k = 0;
    double scale = 0;
    for (const auto& [a, c] : raw) {
        if (a[size_t(d)] % 2 != 0) throw invalid_input("HarmonicPolynomial: not even in y");
        for (int j = d + 1; j < 4; ++j)
            if (a[size_t(j)] != 0) throw invalid_input("HarmonicPolynomial: exponent beyond dimension");
        k = std::max(k, poly_detail::total_degree(a, d));
        scale = std::max(scale, std::abs(c));
    }
    if (scale == 0) scale = 1;
    auto mons = poly_detail::monomials(d, k);
    std::map<MultiIndex, int> index;
    for (size_t i = 0; i < mons.size(); ++i) index[mons[i]] = int(i);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(long(mons.size()));
    for (const auto& [a, c] : raw) v(index.at(a)) += c;

    Eigen::MatrixXd L = poly_detail::laplacian_matrix(mons, d);
    // least-norm correction: h = v - L^T (L L^T)^+ L v
    Eigen::VectorXd Lv = L * v;
    Eigen::VectorXd corr = L.transpose() *
                           (L * L.transpose()).completeOrthogonalDecomposition().solve(Lv);
    if (corr.lpNorm<Eigen::Infinity>() > 1e-12 * scale)
        throw invalid_input("HarmonicPolynomial: coefficients are not harmonic");
    Eigen::VectorXd h = v - corr;

    HarmonicPolynomial p;
    p.d = d;
    p.degree = 0;
    for (size_t i = 0; i < mons.size(); ++i) {
        if (h(long(i)) == 0.0) continue;
        p.terms.push_back({mons[i], h(long(i))});
        p.degree = std::max(p.degree, poly_detail::total_degree(mons[i], d));
    }
    return p;
}

inline HarmonicPolynomial poly_from_json(const nlohmann::json& j) {
    std::vector<std::pair<MultiIndex, double>> raw;
    int d = j.at("d").get<int>();
    for (const auto& t : j.at("terms")) {
        MultiIndex a{};
        auto powers = t.at("powers").get<std::vector<int>>();
        for (size_t i = 0; i < powers.size(); ++i) a[i] = powers[i];
        raw.push_back({a, t.at("coeff").get<double>()});
    }
    return make_harmonic_polynomial(d, raw);
}

// The trace Laplacian of an arbitrary term list (identically zero for
// members); used by property tests.
inline std::vector<std::pair<MultiIndex, double>> laplacian_terms(const HarmonicPolynomial& p) {
    std::map<MultiIndex, double> acc;
    for (const auto& [a, c] : p.terms)
        for (int j = 0; j <= p.d; ++j) {
            int e = a[size_t(j)];
            if (e < 2) continue;
            MultiIndex b = a;
            b[size_t(j)] = e - 2;
            acc[b] += c * e * (e - 1);
        }
    std::vector<std::pair<MultiIndex, double>> out(acc.begin(), acc.end());
    return out;
}

// coordinate derivative d/dx_j, closed on harmonic polynomials
inline HarmonicPolynomial derivative(const HarmonicPolynomial& p, int j) {
    std::map<MultiIndex, double> acc;
    for (const auto& [a, c] : p.terms) {
        int e = a[size_t(j)];
        if (e == 0) continue;
        MultiIndex b = a;
        b[size_t(j)] = e - 1;
        acc[b] += c * e;
    }
    HarmonicPolynomial q;
    q.d = p.d;
    for (const auto& [a, c] : acc) {
        if (c == 0.0) continue;
        q.terms.push_back({a, c});
        q.degree = std::max(q.degree, poly_detail::total_degree(a, p.d));
    }
    return q;
}

// ------------------------------------------------------- normalized form

// p = (1/2) sum a_j x_j^2 - (1/2) y^2 - c with a_j > 0, sum a_j = 1.
struct NormalizedQuadratic {
    std::vector<double> a;
    double c = 0;

    int d() const { return int(a.size()); }

    double evaluate(const Vec& X) const {
        double s = -c - 0.5 * sq(X.y());
        for (int j = 0; j < d(); ++j) s += 0.5 * a[size_t(j)] * sq(X[j]);
        return s;
    }

    HarmonicPolynomial to_polynomial() const {
        std::vector<std::pair<MultiIndex, double>> raw;
        for (int j = 0; j < d(); ++j) {
            MultiIndex m{};
            m[size_t(j)] = 2;
            raw.push_back({m, 0.5 * a[size_t(j)]});
        }
        MultiIndex my{};
        my[size_t(d())] = 2;
        raw.push_back({my, -0.5});
        if (c != 0) raw.push_back({MultiIndex{}, -c});
        return make_harmonic_polynomial(d(), raw);
    }

    AnalyticField as_field() const {
        AnalyticField f;
        f.dim = d() + 1;
        f.value = [p = *this](const Vec& X) { return p.evaluate(X); };
        f.gradient = [p = *this](const Vec& X) {
            Vec g = Vec::zero(p.d() + 1);
            for (int j = 0; j < p.d(); ++j) g[j] = p.a[size_t(j)] * X[j];
            g[p.d()] = -X.y();
            return g;
        };
        return f;
    }
};

inline NormalizedQuadratic make_normalized_quadratic(std::vector<double> a, double c) {
    if (a.size() < 2) throw invalid_input("make_normalized_quadratic: need d >= 2 coefficients");
    double s = 0;
    for (double aj : a) {
        if (aj <= 0) throw invalid_input("make_normalized_quadratic: coefficients must be positive");
        s += aj;
    }
    if (std::abs(s - 1.0) > 1e-12) throw invalid_input("make_normalized_quadratic: sum != 1");
    for (double& aj : a) aj /= s;
    return NormalizedQuadratic{std::move(a), c};
}

// ------------------------------------------------------- classification

enum class Membership { InClass, BoundaryCase, EmptySublevel, NotMember };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::InClass: return "in_class";
        case Membership::BoundaryCase: return "boundary";
        case Membership::EmptySublevel: return "empty";
        default: return "not_member";
    }
}

// Classifies {p(.,0) <= 0}: compact with nonempty interior, a single point,
// empty, or noncompact.  Exact for quadratics via the plane Hessian; for
// higher degree the top form is sampled densely on the unit sphere of the
// plane and the minimum is located by sampling (a heuristic, recorded as
// such).
inline Membership classify_membership(const HarmonicPolynomial& p) {
    int d = p.d;
    if (p.degree <= 2) {
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(d, d);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
        double c0 = 0;
        for (const auto& [a, c] : p.terms) {
            if (a[size_t(d)] != 0) continue;  // y terms vanish on the plane
            int deg = poly_detail::total_degree(a, d);
            if (deg == 0) c0 = c;
            else if (deg == 1) {
                for (int j = 0; j < d; ++j)
                    if (a[size_t(j)] == 1) b(j) += c;
            } else {
                int j1 = -1, j2 = -1;
                for (int j = 0; j < d; ++j) {
                    if (a[size_t(j)] == 2) j1 = j2 = j;
                    if (a[size_t(j)] == 1) (j1 < 0 ? j1 : j2) = j;
                }
                if (j1 == j2) A(j1, j1) += 2 * c;
                else {
                    A(j1, j2) += c;
                    A(j2, j1) += c;
                }
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        if (es.eigenvalues().minCoeff() <= 1e-14) return Membership::NotMember;
        double minval = c0 - 0.5 * b.dot(A.ldlt().solve(b));
        if (minval < -1e-12) return Membership::InClass;
        if (minval > 1e-12) return Membership::EmptySublevel;
        return Membership::BoundaryCase;
    }

    // top plane form positivity by dense sphere sampling
    int k = p.degree;
    auto top_at = [&](const Vec& x) {
        double s = 0;
        for (const auto& [a, c] : p.terms) {
            if (a[size_t(d)] != 0 || poly_detail::total_degree(a, d) != k) continue;
            double m = c;
            for (int j = 0; j < d; ++j)
                for (int e = 0; e < a[size_t(j)]; ++e) m *= x[j];
            s += m;
        }
        return s;
    };
    double top_min = 1e300;
    int n_samples = (d == 2) ? 4096 : 64 * 64;
    for (int i = 0; i < n_samples; ++i) {
        Vec x = Vec::zero(d + 1);
        if (d == 2) {
            double t = 2 * M_PI * i / n_samples;
            x[0] = std::cos(t);
            x[1] = std::sin(t);
        } else {
            double u = -1.0 + 2.0 * ((i / 64) + 0.5) / 64.0;
            double t = 2 * M_PI * ((i % 64) + 0.5) / 64.0;
            double r = std::sqrt(std::max(0.0, 1 - u * u));
            x[0] = r * std::cos(t);
            x[1] = r * std::sin(t);
            x[2] = u;
        }
        top_min = std::min(top_min, top_at(x));
    }
    if (top_min <= 1e-12) return Membership::NotMember;  // sublevel set may escape to infinity
    // compact; locate the minimum of the plane restriction by sampling a
    // ball on which the top form dominates the lower-order terms
    double low = 0;
    for (const auto& [a, c] : p.terms)
        if (a[size_t(d)] == 0 && poly_detail::total_degree(a, d) < k) low += std::abs(c);
    double R = std::max(2.0, std::pow(4.0 * (low + 1.0) / top_min, 1.0 / k));
    double pmin = 1e300;
    int m = 80;
    std::function<void(int, Vec&)> rec = [&](int axis, Vec& x) {
        if (axis == d) {
            pmin = std::min(pmin, p.evaluate(x));
            return;
        }
        for (int i = 0; i <= m; ++i) {
            x[axis] = -R + 2.0 * R * i / m;
            rec(axis + 1, x);
        }
    };
    Vec x = Vec::zero(d + 1);
    rec(0, x);
    if (pmin < -1e-10) return Membership::InClass;
    if (pmin > 1e-10) return Membership::EmptySublevel;
    return Membership::BoundaryCase;
}

inline Membership classify_membership(const NormalizedQuadratic& q) {
    if (q.c > 0) return Membership::InClass;
    if (q.c == 0) return Membership::BoundaryCase;
    return Membership::EmptySublevel;
}

// --------------------------------------------- exterior expansion fitting

struct ExpansionFit {
    HarmonicPolynomial p;
    double residual_rms = 0;
    double residual_max = 0;
    std::vector<double> decay_coefficients;  // discarded exterior modes
};

// Least-squares recovery of the polynomial part of a field harmonic
// outside B_1, sampled on spheres of the given radii.  Residual rows are
// weighted by r^{d-1}; the regression basis carries both the even-y
// harmonic polynomials of degree <= k and their exterior duals
// Y(X)/|X|^{2 deg(Y)+d-1}, which absorb the decaying tail so it cannot
// alias onto the constant term.  Only the polynomial part is returned.
inline ExpansionFit fit_exterior_expansion(const AnalyticField& f, int d, int k,
                                           const std::vector<double>& radii,
                                           int nodes_polar = 12, int nodes_azimuth = 24) {
    if (radii.size() < 3) throw invalid_input("fit_exterior_expansion: need at least three radii");
    for (size_t i = 0; i < radii.size(); ++i) {
        if (radii[i] < 4.0) throw invalid_input("fit_exterior_expansion: radii must be >= 4");
        if (i > 0 && radii[i] <= radii[i - 1]) throw invalid_input("fit_exterior_expansion: radii must increase");
    }
    if (k > 4) throw invalid_input("fit_exterior_expansion: degree limited to k <= 4");

    // even-y harmonic basis of degree <= k: kernel of the Laplacian matrix
    auto mons = poly_detail::monomials(d, k);
    Eigen::MatrixXd L = poly_detail::laplacian_matrix(mons, d);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
    lu.setThreshold(1e-10);
    Eigen::MatrixXd kernel = lu.kernel();  // columns span harmonic coeff vectors
    int nb = int(kernel.cols());

    auto poly_of = [&](const Eigen::VectorXd& coef) {
        HarmonicPolynomial p;
        p.d = d;
        for (size_t i = 0; i < mons.size(); ++i) {
            if (std::abs(coef(long(i))) < 1e-300) continue;
            p.terms.push_back({mons[i], coef(long(i))});
            p.degree = std::max(p.degree, poly_detail::total_degree(mons[i], d));
        }
        return p;
    };
    std::vector<HarmonicPolynomial> basis;
    std::vector<int> basis_degree;
    for (int ib = 0; ib < nb; ++ib) {
        Eigen::VectorXd col = kernel.col(ib);
        col /= col.cwiseAbs().maxCoeff();
        basis.push_back(poly_of(col));
        basis_degree.push_back(basis.back().degree);
    }

    // sample rows: union of sphere nodes, also used to check y-evenness
    std::vector<Vec> pts;
    std::vector<double> rhs, wts;
    for (double r : radii) {
        SphereQuadrature sph(d, r, nodes_polar, nodes_azimuth);
        double w = std::pow(r, d - 1);
        for (const Vec& X : sph.nodes) {
            double v = f.value(X);
            Vec Xm = X;
            Xm.y() = -Xm.y();
            if (std::abs(f.value(Xm) - v) > 1e-8 * (1.0 + std::abs(v)))
                throw invalid_input("fit_exterior_expansion: field not even in y");
            pts.push_back(X);
            rhs.push_back(v);
            wts.push_back(w);
        }
    }

    long rows = long(pts.size());
    Eigen::MatrixXd M(rows, 2 * nb);
    Eigen::VectorXd b(rows);
    for (long i = 0; i < rows; ++i) {
        double rn = norm(pts[size_t(i)]);
        for (int jb = 0; jb < nb; ++jb) {
            double val = basis[size_t(jb)].evaluate(pts[size_t(i)]);
            M(i, jb) = wts[size_t(i)] * val;
            // exterior dual of a degree-m solid harmonic
            M(i, nb + jb) = wts[size_t(i)] * val / std::pow(rn, 2 * basis_degree[size_t(jb)] + d - 1);
        }
        b(i) = wts[size_t(i)] * rhs[size_t(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
    if (qr.rank() < 2 * nb)
        throw numeric_failure("fit_exterior_expansion: normal equations ill-conditioned (radii too clustered)");
    Eigen::VectorXd sol = qr.solve(b);

    ExpansionFit fit;
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(long(mons.size()));
    for (int jb = 0; jb < nb; ++jb) {
        Eigen::VectorXd col = kernel.col(jb);
        col /= col.cwiseAbs().maxCoeff();
        coef += sol(jb) * col;
    }
    fit.p = poly_of(coef);
    for (int jb = 0; jb < nb; ++jb) fit.decay_coefficients.push_back(sol(nb + jb));

    Eigen::VectorXd res = M * sol - b;
    fit.residual_rms = std::sqrt(res.squaredNorm() / double(rows));
    for (long i = 0; i < rows; ++i)
        fit.residual_max = std::max(fit.residual_max, std::abs(res(i)) / wts[size_t(i)]);
    return fit;
}

// Grid-field front end; verifies discrete harmonicity outside B_1 first.
inline ExpansionFit fit_exterior_expansion(const GridField& g, int k, const std::vector<double>& radii,
                                           double harmonicity_tol = 1e-2) {
    GridField lap = discrete_laplacian(g);
    double worst = 0;
    lap.for_each_stored([&](const std::array<int, 4>& li) {
        if (g.is_boundary(li)) return;
        Vec X = g.coords(li);
        if (norm(X) < 1.5) return;
        worst = std::max(worst, std::abs(lap.at(li)));
    });
    if (worst > harmonicity_tol)
        throw invalid_input("fit_exterior_expansion: field not harmonic outside B_1");
    return fit_exterior_expansion(g.as_field(), g.spec.d, k, radii);
}

}  // namespace thinlab
