#pragma once

// Uniform Cartesian grids on [-R,R]^{d+1} with even-reflection symmetry
// reduction (one octant stored per symmetric axis), second-order finite
// differences, multilinear interpolation, sphere/ball quadrature on grid
// data, and a flat binary file format (.gf).

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "thinlab/core.hpp"
#include "thinlab/quadrature.hpp"

namespace thinlab {

struct GridSpec {
    int d = 2;                          // space splits as R^d x R, y last
    double box_radius = 1.0;
    double spacing = 0.125;
    std::array<bool, 4> symmetric{};    // even reflection per axis

    int dim() const { return d + 1; }

    // Nodes per half-axis; R/h must be integral so the plane {y=0} and the
    // origin are nodes.
    int half_count() const {
        double q = box_radius / spacing;
        int n = int(std::lround(q));
        if (n < 2 || std::abs(q - n) > 1e-9 * q)
            throw invalid_input("GridSpec: spacing misaligned (box_radius/spacing not integral)");
        return n;
    }

    void validate() const {
        if (d < 2 || d > 3) throw invalid_input("GridSpec: d must be 2 or 3");
        if (box_radius <= 0 || spacing <= 0) throw invalid_input("GridSpec: box_radius and spacing must be positive");
        (void)half_count();
    }

    static GridSpec all_symmetric(int d, double R, double h) {
        GridSpec s;
        s.d = d;
        s.box_radius = R;
        s.spacing = h;
        for (int j = 0; j <= d; ++j) s.symmetric[size_t(j)] = true;
        return s;
    }
};

// Node values on the stored octant.  Logical indices run in [-N, N] per
// axis; a symmetric axis stores [0, N] and reads back through |i|, so
// reflected lookups return the identical stored value.
class GridField {
   public:
    GridSpec spec;

    GridField() = default;
    explicit GridField(const GridSpec& s) : spec(s) {
        spec.validate();
        N_ = spec.half_count();
        total_ = 1;
        for (int a = 0; a < spec.dim(); ++a) {
            size_[size_t(a)] = spec.symmetric[size_t(a)] ? N_ + 1 : 2 * N_ + 1;
            total_ *= size_[size_t(a)];
        }
        int64_t st = 1;
        for (int a = spec.dim() - 1; a >= 0; --a) {  // row-major, y fastest
            stride_[size_t(a)] = st;
            st *= size_[size_t(a)];
        }
        v_.assign(size_t(total_), 0.0);
    }

    int half_count() const { return N_; }
    int64_t node_count() const { return total_; }
    double h() const { return spec.spacing; }
    std::vector<double>& data() { return v_; }
    const std::vector<double>& data() const { return v_; }

    int stored_size(int axis) const { return size_[size_t(axis)]; }
    int64_t stride(int axis) const { return stride_[size_t(axis)]; }
    int stored_min(int axis) const { return spec.symmetric[size_t(axis)] ? 0 : -N_; }

    // storage offset from logical per-axis indices (reflective on symmetric axes)
    int64_t offset(const std::array<int, 4>& li) const {
        int64_t o = 0;
        for (int a = 0; a < spec.dim(); ++a) {
            int i = li[size_t(a)];
            if (spec.symmetric[size_t(a)]) i = std::abs(i);
            else i += N_;
            o += stride_[size_t(a)] * i;
        }
        return o;
    }
    double at(const std::array<int, 4>& li) const { return v_[size_t(offset(li))]; }
    double& at(const std::array<int, 4>& li) { return v_[size_t(offset(li))]; }

    Vec coords(const std::array<int, 4>& li) const {
        Vec p = Vec::zero(spec.dim());
        for (int a = 0; a < spec.dim(); ++a) p[a] = li[size_t(a)] * spec.spacing;
        return p;
    }

    // Visit every stored node (logical indices; symmetric axes nonnegative).
    template <class F>
    void for_each_stored(F&& f) const {
        std::array<int, 4> li{};
        visit(0, li, f);
    }

    // Number of full-box nodes this stored node represents.
    int multiplicity(const std::array<int, 4>& li) const {
        int m = 1;
        for (int a = 0; a < spec.dim(); ++a)
            if (spec.symmetric[size_t(a)] && li[size_t(a)] != 0) m *= 2;
        return m;
    }

    void fill(const std::function<double(const Vec&)>& f) {
        for_each_stored([&](const std::array<int, 4>& li) { at(li) = f(coords(li)); });
    }

    bool is_boundary(const std::array<int, 4>& li) const {
        for (int a = 0; a < spec.dim(); ++a) {
            int i = li[size_t(a)];
            if (i == N_ || (!spec.symmetric[size_t(a)] && i == -N_)) return true;
        }
        return false;
    }

    // Multilinear interpolation.  Symmetric axes fold the query through
    // |x_a| first, which is exact for even data.
    double interpolate(const Vec& X) const {
        double h = spec.spacing;
        std::array<int, 4> base{};
        std::array<double, 4> t{};
        for (int a = 0; a < spec.dim(); ++a) {
            double x = X[a];
            if (spec.symmetric[size_t(a)]) x = std::abs(x);
            if (std::abs(X[a]) > spec.box_radius + 1e-12)
                throw invalid_input("GridField::interpolate: query outside box");
            double s = x / h;
            int i0 = int(std::floor(s));
            int lo = spec.symmetric[size_t(a)] ? 0 : -N_;
            if (i0 < lo) i0 = lo;
            if (i0 >= N_) i0 = N_ - 1;
            base[size_t(a)] = i0;
            t[size_t(a)] = s - i0;
        }
        int nd = spec.dim();
        double acc = 0;
        for (int corner = 0; corner < (1 << nd); ++corner) {
            std::array<int, 4> li = base;
            double w = 1;
            for (int a = 0; a < nd; ++a) {
                if (corner & (1 << a)) {
                    li[size_t(a)] += 1;
                    w *= t[size_t(a)];
                } else {
                    w *= 1.0 - t[size_t(a)];
                }
            }
            if (w != 0.0) acc += w * at(li);
        }
        return acc;
    }

    AnalyticField as_field() const {
        AnalyticField f;
        f.dim = spec.dim();
        f.value = [this](const Vec& X) { return this->interpolate(X); };
        return f;
    }

   private:
    template <class F>
    void visit(int axis, std::array<int, 4>& li, F& f) const {
        if (axis == spec.dim()) {
            f(const_cast<const std::array<int, 4>&>(li));
            return;
        }
        int lo = stored_min(axis);
        for (int i = lo; i <= N_; ++i) {
            li[size_t(axis)] = i;
            visit(axis + 1, li, f);
        }
    }

    std::vector<double> v_;
    std::array<int, 4> size_{};
    std::array<int64_t, 4> stride_{};
    int64_t total_ = 0;
    int N_ = 0;
};

inline GridField build_grid(const GridSpec& spec) { return GridField(spec); }

// Standard (2(d+1)+1)-point Laplacian; box-boundary nodes get NaN.
inline GridField discrete_laplacian(const GridField& f) {
    GridField out(f.spec);
    double h2 = sq(f.spec.spacing);
    f.for_each_stored([&](const std::array<int, 4>& li) {
        if (f.is_boundary(li)) {
            out.at(li) = std::numeric_limits<double>::quiet_NaN();
            return;
        }
        double center = f.at(li), s = 0;
        for (int a = 0; a < f.spec.dim(); ++a) {
            auto lp = li, lm = li;
            lp[size_t(a)] += 1;
            lm[size_t(a)] -= 1;
            s += f.at(lp) + f.at(lm) - 2.0 * center;
        }
        out.at(li) = s / h2;
    });
    return out;
}

// One-sided second-order d/dy at y = 0:  (-3u(x,0) + 4u(x,h) - u(x,2h)) / (2h).
inline double one_sided_dy(const GridField& f, std::array<int, 4> li) {
    li[size_t(f.spec.d)] = 0;
    double u0 = f.at(li);
    li[size_t(f.spec.d)] = 1;
    double u1 = f.at(li);
    li[size_t(f.spec.d)] = 2;
    double u2 = f.at(li);
    return (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * f.spec.spacing);
}

inline double sphere_integral(const GridField& f, const SphereQuadrature& q) {
    if (q.radius + f.spec.spacing > f.spec.box_radius + 1e-12)
        throw invalid_input("sphere_integral: sphere not contained in box");
    return q.integrate([&](const Vec& X) { return f.interpolate(X); });
}

template <class F>
double sphere_integral(const F& f, const SphereQuadrature& q) {
    return q.integrate(f);
}

// Dirichlet energy over B_r from cell-centered difference gradients with
// partial-volume weights (4^{d+1}-point indicator subsampling on cut cells).
inline double ball_gradient_energy(const GridField& f, double r) {
    const GridSpec& s = f.spec;
    if (r + s.spacing > s.box_radius + 1e-12)
        throw invalid_input("ball_gradient_energy: ball not contained in box");
    double h = s.spacing;
    int nd = s.dim();
    int N = f.half_count();
    double cellvol = std::pow(h, nd);
    double total = 0;

    std::array<int, 4> lo{};
    // iterate cells by low corner; symmetric axes cover [0, N-1] with x2 weight
    std::function<void(int, double)> rec = [&](int axis, double mult) {
        if (axis == nd) {
            // corner classification
            double r2 = r * r;
            int inside = 0;
            Vec base = Vec::zero(nd);
            for (int a = 0; a < nd; ++a) base[a] = lo[size_t(a)] * h;
            for (int c = 0; c < (1 << nd); ++c) {
                double d2 = 0;
                for (int a = 0; a < nd; ++a) {
                    double x = base[a] + ((c >> a) & 1 ? h : 0.0);
                    d2 += x * x;
                }
                if (d2 <= r2) ++inside;
            }
            if (inside == 0) {
                // quick reject: cell's closest corner may still miss the ball
                // interior only if the whole cell is outside; corners suffice
                // since r >= h and cells are convex with diameter h*sqrt(nd)
                double dmin2 = 0;
                for (int a = 0; a < nd; ++a) {
                    double x0 = base[a], x1 = base[a] + h;
                    double c0 = (x0 > 0) ? x0 : ((x1 < 0) ? -x1 : 0.0);
                    dmin2 += c0 * c0;
                }
                if (dmin2 > r2) return;
            }
            double w = 1.0;
            if (inside < (1 << nd)) {
                int cnt = 0, tot = 0;
                int sub = 4;
                std::array<int, 4> k{};
                std::function<void(int)> srec = [&](int axis2) {
                    if (axis2 == nd) {
                        double d2 = 0;
                        for (int a = 0; a < nd; ++a) {
                            double x = base[a] + (k[size_t(a)] + 0.5) * h / sub;
                            d2 += x * x;
                        }
                        ++tot;
                        if (d2 <= r2) ++cnt;
                        return;
                    }
                    for (k[size_t(axis2)] = 0; k[size_t(axis2)] < sub; ++k[size_t(axis2)]) srec(axis2 + 1);
                };
                srec(0);
                w = double(cnt) / tot;
                if (w == 0.0) return;
            }
            // cell-centered gradient: average the 2^{nd-1} edge differences per axis
            double g2 = 0;
            for (int a = 0; a < nd; ++a) {
                double gsum = 0;
                int pairs = 0;
                for (int c = 0; c < (1 << nd); ++c) {
                    if ((c >> a) & 1) continue;
                    std::array<int, 4> liA = lo, liB = lo;
                    for (int b = 0; b < nd; ++b)
                        if ((c >> b) & 1) {
                            liA[size_t(b)] += 1;
                            liB[size_t(b)] += 1;
                        }
                    liB[size_t(a)] += 1;
                    gsum += (f.at(liB) - f.at(liA)) / h;
                    ++pairs;
                }
                g2 += sq(gsum / pairs);
            }
            total += mult * w * g2 * cellvol;
            return;
        }
        int lo0 = s.symmetric[size_t(axis)] ? 0 : -N;
        double m = s.symmetric[size_t(axis)] ? 2.0 : 1.0;
        for (int i = lo0; i < N; ++i) {
            lo[size_t(axis)] = i;
            rec(axis + 1, mult * m);
        }
    };
    rec(0, 1.0);
    return total;
}

// ---------------------------------------------------------------- file I/O

// .gf layout (little endian): "GFLD", u32 version, i32 d, u32 symmetry
// bitmask, f64 box_radius, f64 spacing, i32 stored size per axis, payload of
// stored values as f64 in row-major order (y fastest).
inline void write_gf(const GridField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw invalid_input("write_gf: cannot open " + path);
    auto put = [&](const void* p, size_t n) { os.write(static_cast<const char*>(p), std::streamsize(n)); };
    put("GFLD", 4);
    uint32_t version = 1;
    put(&version, 4);
    int32_t d = f.spec.d;
    put(&d, 4);
    uint32_t flags = 0;
    for (int a = 0; a <= f.spec.d; ++a)
        if (f.spec.symmetric[size_t(a)]) flags |= (1u << a);
    put(&flags, 4);
    double R = f.spec.box_radius, h = f.spec.spacing;
    put(&R, 8);
    put(&h, 8);
    for (int a = 0; a <= f.spec.d; ++a) {
        int32_t sz = f.stored_size(a);
        put(&sz, 4);
    }
    put(f.data().data(), f.data().size() * 8);
    if (!os) throw numeric_failure("write_gf: write failed for " + path);
}

inline GridField read_gf(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw invalid_input("read_gf: cannot open " + path);
    auto get = [&](void* p, size_t n) {
        is.read(static_cast<char*>(p), std::streamsize(n));
        if (!is) throw invalid_input("read_gf: truncated file " + path);
    };
    char magic[4];
    get(magic, 4);
    if (std::memcmp(magic, "GFLD", 4) != 0) throw invalid_input("read_gf: bad magic");
    uint32_t version;
    get(&version, 4);
    if (version != 1) throw invalid_input("read_gf: unsupported version");
    int32_t d;
    get(&d, 4);
    uint32_t flags;
    get(&flags, 4);
    GridSpec spec;
    spec.d = d;
    get(&spec.box_radius, 8);
    get(&spec.spacing, 8);
    for (int a = 0; a <= d; ++a) spec.symmetric[size_t(a)] = (flags >> a) & 1u;
    GridField f(spec);
    for (int a = 0; a <= d; ++a) {
        int32_t sz;
        get(&sz, 4);
        if (sz != f.stored_size(a)) throw invalid_input("read_gf: inconsistent axis size");
    }
    get(f.data().data(), f.data().size() * 8);
    return f;
}

// Sample a coarser field onto a finer grid (nested-iteration initial guess).
inline GridField resample(const GridField& coarse, const GridSpec& fine_spec) {
    GridField out(fine_spec);
    out.fill([&](const Vec& X) { return coarse.interpolate(X); });
    return out;
}

}  // namespace thinlab
