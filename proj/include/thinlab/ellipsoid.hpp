#pragma once

// Axis-aligned ellipsoids centered at the origin in R^{d+1}.  The y
// semi-axis may be zero, which marks a thin ellipsoid inside {y=0}.

#include <vector>

#include "thinlab/core.hpp"
#include "json.hpp"

namespace thinlab {

struct Ellipsoid {
    int d = 2;
    std::vector<double> semi_axes;  // l_1..l_d, l_y (l_y = 0 allowed)

    Ellipsoid() = default;
    Ellipsoid(int d_, std::vector<double> axes) : d(d_), semi_axes(std::move(axes)) { validate(); }

    void validate() const {
        if (int(semi_axes.size()) != d + 1) throw invalid_input("Ellipsoid: need d+1 semi-axes");
        for (int j = 0; j < d; ++j)
            if (semi_axes[size_t(j)] <= 0) throw invalid_input("Ellipsoid: spatial semi-axes must be positive");
        if (semi_axes[size_t(d)] < 0) throw invalid_input("Ellipsoid: y semi-axis must be nonnegative");
    }

    bool thin() const { return semi_axes[size_t(d)] == 0.0; }

    double max_semi_axis() const {
        double m = 0;
        for (double l : semi_axes) m = std::max(m, l);
        return m;
    }

    // sum_j X_j^2 / l_j^2; <= 1 is the solid ellipsoid.  For thin ellipsoids
    // only plane points can be inside.
    double level(const Vec& X) const {
        double q = 0;
        for (int j = 0; j <= d; ++j) {
            double l = semi_axes[size_t(j)];
            if (l == 0.0) {
                if (X[j] != 0.0) return std::numeric_limits<double>::infinity();
                continue;
            }
            q += sq(X[j] / l);
        }
        return q;
    }
    bool contains(const Vec& X) const { return level(X) <= 1.0; }

    Ellipsoid scaled(double t) const {
        Ellipsoid e = *this;
        for (double& l : e.semi_axes) l *= t;
        return e;
    }

    // radius at which the ray t*omega exits the solid ellipsoid (full only)
    double boundary_radius(const Vec& omega) const {
        double q = 0;
        for (int j = 0; j <= d; ++j) q += sq(omega[j] / semi_axes[size_t(j)]);
        return 1.0 / std::sqrt(q);
    }

    double volume() const {
        double v = unit_ball_volume_nd();
        for (double l : semi_axes) v *= l;
        return v;
    }

    nlohmann::json to_json() const {
        return {{"d", d}, {"semi_axes", semi_axes}};
    }
    static Ellipsoid from_json(const nlohmann::json& j) {
        return Ellipsoid(j.at("d").get<int>(), j.at("semi_axes").get<std::vector<double>>());
    }

   private:
    double unit_ball_volume_nd() const {
        if (d + 1 == 3) return 4.0 * M_PI / 3.0;
        if (d + 1 == 4) return M_PI * M_PI / 2.0;
        throw invalid_input("Ellipsoid::volume: d must be 2 or 3");
    }
};

}  // namespace thinlab
