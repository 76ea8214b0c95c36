#pragma once

// Constructors for the standard test curves: regular n-gons, the comet and
// Dragon's tooth shapes, torus knots, and the twist modification.

#include "distort/distortion.hpp"

namespace distort {

/// Planar regular n-gon of the given circumradius, closed.
template <typename Real>
PolygonalCurve<Real> make_ngon(int n, Real radius) {
    if (n < 3) throw std::invalid_argument("make_ngon: need n >= 3");
    if (!(radius > Real(0))) throw std::invalid_argument("make_ngon: radius");
    std::vector<Vec3<Real>> v;
    v.reserve(n);
    for (int k = 0; k < n; ++k) {
        const Real th = Real(2) * pi_v<Real> * Real(k) / Real(n);
        v.push_back(Vec3<Real>(radius * std::cos(th), radius * std::sin(th),
                               Real(0)));
    }
    return PolygonalCurve<Real>::closed_curve(std::move(v), "ngon");
}

// ---------------------------------------------------------------------------
// Comet
// ---------------------------------------------------------------------------

template <typename Real>
struct CometCurve {
    PolygonalCurve<Real> curve;
    Real corner_param;    // the phi corner (vertex 0)
    Real junction_plus;   // segment/arc junction after the corner
    Real junction_minus;  // segment/arc junction before the corner (wrapping)
    Real psi;             // junction turning angle of the underlying model
    Real arc_radius;
};

namespace detail {

template <typename Real>
CometCurve<Real> build_comet(Real phi, Real ell, Real psi, Real max_step) {
    const Real R = ell * std::cos(phi / 2) / std::sin(phi / 2 + psi);
    const Real cy = ell * std::sin(phi / 2) + R * std::cos(phi / 2 + psi);
    const Real th0 = phi / 2 + psi - pi_v<Real> / 2;  // angle of E+ from center
    const Real turn = Real(2) * pi_v<Real> - phi - Real(2) * psi;
    const int steps = std::max(8, static_cast<int>(std::ceil(turn / max_step)));
    std::vector<Vec3<Real>> v;
    v.reserve(static_cast<size_t>(steps) + 2);
    v.push_back(Vec3<Real>(Real(0), Real(0), Real(0)));
    v.push_back(Vec3<Real>(ell * std::cos(phi / 2), ell * std::sin(phi / 2),
                           Real(0)));
    for (int k = 1; k < steps; ++k) {
        const Real th = th0 + turn * Real(k) / Real(steps);
        v.push_back(Vec3<Real>(R * std::cos(th), cy + R * std::sin(th), Real(0)));
    }
    v.push_back(Vec3<Real>(-ell * std::cos(phi / 2), ell * std::sin(phi / 2),
                           Real(0)));
    PolygonalCurve<Real> curve =
        PolygonalCurve<Real>::closed_curve(std::move(v), "comet");
    const Real L = curve.length();
    return {std::move(curve), Real(0), ell, L - ell, psi, R};
}

}  // namespace detail

/// Comet curve: one corner of exterior angle exactly phi joining two straight
/// segments, closed by a discretized circular arc.
///
/// The paper's formula delta = sec(phi/2) pins down the corner but not the
/// closure; the junction angle psi is chosen by scanning candidates and
/// keeping the first closure whose distortion equals sec(phi/2) (checked with
/// the exact search). Passing arc_radius > 0 skips the scan and derives the
/// junction geometry from the radius; small-phi comets (sec(phi/2) <= pi/2)
/// are closure-dominated and built with tangent junctions.
template <typename Real>
CometCurve<Real> make_comet(Real phi, Real segment_len = Real(1),
                            Real arc_radius = Real(0),
                            Real max_step = Real(0.01)) {
    if (!(phi > Real(0)) || !(phi < pi_v<Real>))
        throw std::invalid_argument("make_comet: phi must be in (0, pi)");
    if (!(segment_len > Real(0)))
        throw std::invalid_argument("make_comet: segment_len must be positive");
    if (!(max_step > Real(0)) || max_step > Real(0.2))
        throw std::invalid_argument("make_comet: max_step out of range");
    const Real target = Real(1) / std::cos(phi / 2);

    if (arc_radius > Real(0)) {
        const Real chi = segment_len * std::cos(phi / 2) / arc_radius;
        if (chi > Real(1))
            throw std::invalid_argument(
                "make_comet: arc_radius too small to reach the segment ends");
        // two closures share this radius; prefer the one matching sec(phi/2)
        const Real a = std::asin(chi);
        for (Real cand : {a - phi / 2, pi_v<Real> - a - phi / 2}) {
            if (cand < Real(0) || cand >= pi_v<Real> - phi / 2) continue;
            auto comet = detail::build_comet(phi, segment_len, cand, max_step);
            if (std::abs(distortion_value(comet.curve) - target) <=
                Real(1e-9) * target)
                return comet;
        }
        const Real psi = std::clamp(a - phi / 2, Real(0),
                                    pi_v<Real> - phi / 2 - Real(1e-6));
        return detail::build_comet(phi, segment_len, psi, max_step);
    }

    if (target <= pi_v<Real> / 2 * Real(1.02)) {
        // closure-dominated regime: tangent junctions, delta set by the head
        return detail::build_comet(phi, segment_len, Real(0), max_step);
    }
    const Real psi_hi = pi_v<Real> - phi / 2 - Real(0.02);
    for (Real psi = Real(0); psi < psi_hi; psi += Real(0.05)) {
        auto comet = detail::build_comet(phi, segment_len, psi, max_step);
        if (!check_embedded(comet.curve)) continue;
        if (std::abs(distortion_value(comet.curve) - target) <=
            Real(1e-9) * target)
            return comet;
    }
    throw std::runtime_error(
        "make_comet: no closure with distortion sec(phi/2) found");
}

// ---------------------------------------------------------------------------
// Dragon's tooth
// ---------------------------------------------------------------------------

template <typename Real>
struct DragonsToothCurve {
    PolygonalCurve<Real> curve;
    Real cusp_param;       // the phi corner (vertex 0)
    Real junction_right;   // flank/cap junction after the cusp
    Real junction_left;    // flank/cap junction before the cusp (wrapping)
    Real flank_radius;     // R
    Real cap_radius;       // r
    Real flank_turn;       // turning angle along each flank arc
};

/// Dragon's tooth: two flank arcs of radius R meeting at a corner of exterior
/// angle phi, capped by a tangent arc of small radius r. The flanks bulge
/// away from the symmetry axis, so symmetric pairs approach sec(phi/2) from
/// below as they converge to the corner; on the polygonal approximant the
/// supremum sec(phi_poly/2) is attained on the first chords. Flank sampling
/// is graded toward the cusp so phi_poly tracks phi closely.
template <typename Real>
DragonsToothCurve<Real> make_dragons_tooth(Real phi, Real r, Real R,
                                           Real max_step = Real(0.01),
                                           Real cusp_step = Real(2e-5),
                                           Real grade = Real(1.3)) {
    if (!(phi > Real(0)) || !(phi < pi_v<Real>))
        throw std::invalid_argument("make_dragons_tooth: phi must be in (0, pi)");
    if (!(r > Real(0)) || !(R > r))
        throw std::invalid_argument("make_dragons_tooth: need 0 < r < R");
    if (!(max_step > Real(0)) || !(cusp_step > Real(0)) || !(grade > Real(1)))
        throw std::invalid_argument("make_dragons_tooth: bad sampling params");

    const Real thh = (pi_v<Real> - phi) / 2;
    const Real beta = std::acos(R * std::cos(thh) / (R + r)) - thh;
    if (!(beta > Real(0)))
        throw std::runtime_error(
            "make_dragons_tooth: arcs cannot close up for these radii");
    const Real crx = R * std::cos(thh), cry = -R * std::sin(thh);
    const Real csy = -R * std::sin(thh) + (R + r) * std::sin(thh + beta);
    const Real sigma = Real(2) * pi_v<Real> - phi + Real(2) * beta;

    // turn offsets along a flank, graded from the cusp
    std::vector<Real> flank;
    {
        Real step = cusp_step, acc = cusp_step;
        while (acc < beta) {
            flank.push_back(acc);
            step = std::min(step * grade, max_step);
            acc += step;
        }
    }
    auto flank_point = [&](Real b) {
        const Real a = pi_v<Real> - thh - b;
        return Vec3<Real>(crx + R * std::cos(a), cry + R * std::sin(a), Real(0));
    };

    std::vector<Vec3<Real>> v;
    v.push_back(Vec3<Real>(Real(0), Real(0), Real(0)));
    for (Real b : flank) v.push_back(flank_point(b));
    const Vec3<Real> pr = flank_point(beta);
    v.push_back(pr);
    const int cap_steps = std::max(8, static_cast<int>(std::ceil(sigma / max_step)));
    for (int k = 1; k < cap_steps; ++k) {
        const Real a = -(thh + beta) + sigma * Real(k) / Real(cap_steps);
        v.push_back(Vec3<Real>(r * std::cos(a), csy + r * std::sin(a), Real(0)));
    }
    v.push_back(Vec3<Real>(-pr.x(), pr.y(), Real(0)));
    for (auto it = flank.rbegin(); it != flank.rend(); ++it) {
        const Vec3<Real> p = flank_point(*it);
        v.push_back(Vec3<Real>(-p.x(), p.y(), Real(0)));
    }
    PolygonalCurve<Real> curve =
        PolygonalCurve<Real>::closed_curve(std::move(v), "dragons_tooth");

    DragonsToothCurve<Real> out{std::move(curve), Real(0), Real(0), Real(0),
                                R, r, beta};
    // junction arclengths: cusp to P_R along the sampled flank
    out.junction_right = out.curve.vertex_param(static_cast<int>(flank.size()) + 1);
    out.junction_left = out.curve.length() - out.junction_right;
    return out;
}

// ---------------------------------------------------------------------------
// Torus knots
// ---------------------------------------------------------------------------

/// Standard (p, q) torus knot polygon on the torus with radii (R, r),
/// sampled at uniform parameter steps.
template <typename Real>
PolygonalCurve<Real> make_torus_knot(int p, int q, int n_vertices,
                                     Real R = Real(2), Real r = Real(1)) {
    if (p <= 0 || q < 0)
        throw std::invalid_argument("make_torus_knot: need p >= 1, q >= 0");
    if (std::gcd(p, q) != 1)
        throw std::invalid_argument("make_torus_knot: p and q must be coprime");
    if (n_vertices < 3)
        throw std::invalid_argument("make_torus_knot: too few vertices");
    if (!(r > Real(0)) || !(R > r))
        throw std::invalid_argument("make_torus_knot: need 0 < r < R");
    std::vector<Vec3<Real>> v;
    v.reserve(n_vertices);
    for (int k = 0; k < n_vertices; ++k) {
        const Real th = Real(2) * pi_v<Real> * Real(k) / Real(n_vertices);
        const Real w = R + r * std::cos(q * th);
        v.push_back(Vec3<Real>(w * std::cos(p * th), w * std::sin(p * th),
                               r * std::sin(q * th)));
    }
    PolygonalCurve<Real> curve =
        PolygonalCurve<Real>::closed_curve(std::move(v), "torus_knot");
    if (!check_embedded(curve))
        throw std::runtime_error(
            "make_torus_knot: n_vertices too small for an embedded polygon");
    return curve;
}

// ---------------------------------------------------------------------------
// Twist
// ---------------------------------------------------------------------------

template <typename Real>
struct TwistResult {
    PolygonalCurve<Real> curve;
    Real s_near;    // base points of the spike: spatial distance eps_twist,
    Real t_near;    // arclength separation loop_len
    Real loop_len;
    Real eps_twist;
};

/// Adds a thin triangular spike in the middle of the chosen edge: two points
/// eps_twist apart in space but loop_len apart along the curve. The local
/// two-leg corner realizes dq = loop_len/eps_twist exactly, so the
/// distortion scales like 1/eps_twist. Knot type is preserved: the base
/// points subdivide the edge and the spike triangle must clear the rest of
/// the curve (checked; throws when no clear direction exists).
template <typename Real>
TwistResult<Real> apply_twist(const PolygonalCurve<Real>& curve, int edge,
                              Real eps_twist, Real loop_len = Real(0.52)) {
    if (edge < 0 || edge >= curve.edge_count())
        throw std::invalid_argument("apply_twist: edge index out of range");
    if (!(eps_twist > Real(0)))
        throw std::invalid_argument("apply_twist: eps_twist must be positive");
    const Real leg = loop_len / 2;
    if (!(leg > eps_twist))
        throw std::invalid_argument("apply_twist: loop_len must exceed eps_twist");
    const Real elen = curve.edge_length(edge);
    if (elen < Real(4) * eps_twist)
        throw std::invalid_argument("apply_twist: edge too short for the gap");
    if (loop_len + eps_twist > curve.length())
        throw std::invalid_argument("apply_twist: loop too long for this curve");

    const Vec3<Real> a = curve.vertex(edge);
    const Vec3<Real> d = curve.edge_dir(edge);
    const Vec3<Real> mid = a + (elen / 2) * d;
    const Vec3<Real> m1 = mid - (eps_twist / 2) * d;
    const Vec3<Real> m2 = mid + (eps_twist / 2) * d;
    const Real height = std::sqrt(leg * leg - eps_twist * eps_twist / 4);

    // orthonormal frame normal to the edge
    Vec3<Real> seed = std::abs(d.x()) < Real(0.9) ? Vec3<Real>(1, 0, 0)
                                                  : Vec3<Real>(0, 1, 0);
    const Vec3<Real> n1 = d.cross(seed).normalized();
    const Vec3<Real> n2 = d.cross(n1);

    const int m = curve.edge_count();
    const Real tol = Real(1e-9) * curve.length();
    for (int k = 0; k < 16; ++k) {
        const Real th = Real(2) * pi_v<Real> * Real(k) / Real(16);
        const Vec3<Real> apex = mid + height * (std::cos(th) * n1 +
                                                std::sin(th) * n2);
        bool clear = true;
        for (int e = 0; e < m && clear; ++e) {
            if (e == edge) continue;
            if (segment_triangle_distance(curve.vertex(e), curve.vertex(e + 1),
                                          m1, apex, m2) <= tol)
                clear = false;
        }
        if (!clear) continue;
        std::vector<Vec3<Real>> verts;
        verts.reserve(curve.vertex_count() + 3);
        for (int i = 0; i < curve.vertex_count(); ++i) {
            verts.push_back(curve.vertex(i));
            if (i == edge) {
                verts.push_back(m1);
                verts.push_back(apex);
                verts.push_back(m2);
            }
        }
        PolygonalCurve<Real> twisted(std::move(verts), curve.closed(),
                                     curve.name().empty() ? "twisted"
                                                          : curve.name() + "+twist");
        if (!check_embedded(twisted)) continue;
        const Real s_near = curve.vertex_param(edge) + elen / 2 - eps_twist / 2;
        return {std::move(twisted), s_near, s_near + Real(2) * leg, loop_len,
                eps_twist};
    }
    throw std::runtime_error(
        "apply_twist: cannot place the twist without self-intersection");
}

}  // namespace distort
