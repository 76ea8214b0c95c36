#pragma once

// Seeded random instances for the falsification suites: open arcs of bounded
// total curvature, embedded perturbed polygons, and atomless piecewise
// constant measures. Deterministic for a given seed.

#include "distort/anneal.hpp"

namespace distort {

/// Open polyline with total curvature at most kappa_cap. Arcs with total
/// curvature below pi cannot self-intersect, so the result is embedded.
template <typename Real>
PolygonalCurve<Real> make_random_arc(std::uint64_t seed, int max_edges = 12,
                                     Real kappa_cap = Real(0.95) *
                                                      pi_v<Real>) {
    if (max_edges < 2) throw std::invalid_argument("make_random_arc: edges");
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        detail::Rng rng(seed * 0x9e3779b9ULL + attempt + 1);
        const int edges = 2 + rng.uniform_int(max_edges - 1);
        std::vector<Real> turns(static_cast<size_t>(edges) - 1);
        Real total = 0;
        for (auto& t : turns) {
            t = Real(rng.uniform(0.05, 1.0));
            total += t;
        }
        const Real target = Real(rng.uniform(0.1, 1.0)) * kappa_cap;
        for (auto& t : turns) t *= target / total;

        Vec3<Real> pos(Real(0), Real(0), Real(0));
        Vec3<Real> dir(Real(1), Real(0), Real(0));
        std::vector<Vec3<Real>> verts{pos};
        for (int e = 0; e < edges; ++e) {
            pos += Real(rng.uniform(0.3, 1.2)) * dir;
            verts.push_back(pos);
            if (e + 1 < edges) {
                Vec3<Real> seed_axis = std::abs(dir.x()) < Real(0.9)
                                           ? Vec3<Real>(1, 0, 0)
                                           : Vec3<Real>(0, 1, 0);
                const Vec3<Real> n1 = dir.cross(seed_axis).normalized();
                const Vec3<Real> n2 = dir.cross(n1);
                const Real roll = Real(rng.uniform(0.0, 2.0)) * pi_v<Real>;
                const Real a = turns[static_cast<size_t>(e)];
                dir = std::cos(a) * dir +
                      std::sin(a) * (std::cos(roll) * n1 + std::sin(roll) * n2);
                dir.normalize();
            }
        }
        PolygonalCurve<Real> arc =
            PolygonalCurve<Real>::open_curve(std::move(verts), "random_arc");
        if (check_embedded(arc)) return arc;
    }
    throw std::runtime_error("make_random_arc: no embedded sample found");
}

/// Embedded closed polygon: an n-gon with radial and vertical jitter.
template <typename Real>
PolygonalCurve<Real> make_random_polygon(std::uint64_t seed, int min_edges = 6,
                                         int max_edges = 12) {
    if (min_edges < 3 || max_edges < min_edges)
        throw std::invalid_argument("make_random_polygon: edge range");
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
        detail::Rng rng(seed * 0x51ed270b9ULL + attempt + 1);
        const int n = min_edges + rng.uniform_int(max_edges - min_edges + 1);
        std::vector<Vec3<Real>> verts;
        verts.reserve(n);
        for (int k = 0; k < n; ++k) {
            const Real th = Real(2) * pi_v<Real> * Real(k) / Real(n);
            const Real r = Real(1) + Real(rng.uniform(-0.25, 0.25));
            verts.emplace_back(r * std::cos(th), r * std::sin(th),
                               Real(rng.uniform(-0.25, 0.25)));
        }
        try {
            PolygonalCurve<Real> poly =
                PolygonalCurve<Real>::closed_curve(std::move(verts),
                                                   "random_polygon");
            if (check_embedded(poly)) return poly;
        } catch (const std::invalid_argument&) {
        }
    }
    throw std::runtime_error("make_random_polygon: no embedded sample found");
}

/// Atomless piecewise constant measure on (0, 1) with a few random pieces.
template <typename Real>
CurvatureMeasure<Real> make_random_density_measure(std::uint64_t seed,
                                                   int max_pieces = 6) {
    detail::Rng rng(seed * 0x2545f4914f6cdd1dULL + 1);
    const int pieces = 1 + rng.uniform_int(std::max(1, max_pieces));
    std::vector<Real> cuts{Real(0), Real(1)};
    for (int k = 1; k < pieces; ++k) cuts.push_back(Real(rng.uniform(0.02, 0.98)));
    std::sort(cuts.begin(), cuts.end());
    std::vector<DensityPiece<Real>> density;
    for (size_t k = 0; k + 1 < cuts.size(); ++k) {
        if (!(cuts[k + 1] > cuts[k])) continue;
        density.push_back({cuts[k], cuts[k + 1], Real(rng.uniform(0.0, 5.0))});
    }
    return CurvatureMeasure<Real>({}, std::move(density), Real(1), false);
}

}  // namespace distort
