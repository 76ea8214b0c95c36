#pragma once

// Length-decreasing curve moves and the certificate that a move kept the
// distortion quotient under control: the executable content of the paper's
// two modification tools (inscribing a polygon in an arc, shortening one
// segment at a corner).

#include "distort/curvature.hpp"
#include "distort/distortion.hpp"

namespace distort {

/// A move that would change the knot type or break the embedding.
class MoveRejectedError : public std::runtime_error {
public:
    explicit MoveRejectedError(const std::string& what, int edge = -1)
        : std::runtime_error(what), offending_edge(edge) {}
    int offending_edge;
};

/// A move with nothing to do (straight interval, zero cut, ...).
class NoOpMoveError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// True when the triangle (a, b, c) stays clear of every curve edge except
/// the listed ones; edges that legitimately share a triangle corner are
/// trimmed at the shared end.
template <typename Real>
bool triangle_clear(const PolygonalCurve<Real>& curve, const Vec3<Real>& a,
                    const Vec3<Real>& b, const Vec3<Real>& c,
                    const std::vector<int>& skip_edges, int* offending) {
    const int m = curve.edge_count();
    const Real tol = Real(1e-12) * curve.length();
    const Real shrink = Real(1e-7) * curve.length();
    for (int e = 0; e < m; ++e) {
        if (std::find(skip_edges.begin(), skip_edges.end(), e) !=
            skip_edges.end())
            continue;
        const Real d =
            trimmed_edge_triangle_distance(curve, e, a, b, c, shrink);
        if (d <= tol) {
            if (offending) *offending = e;
            return false;
        }
    }
    return true;
}

/// Interior vertices of the curve strictly inside the (possibly wrapping)
/// open interval.
template <typename Real>
std::vector<int> vertices_inside(const PolygonalCurve<Real>& curve,
                                 const Interval<Real>& iv) {
    const Real L = curve.length();
    const Real lo = curve.closed() ? curve.wrap(iv.lo) : iv.lo;
    Real hi = curve.closed() ? curve.wrap(iv.hi) : iv.hi;
    if (curve.closed() && hi <= lo) hi += L;
    std::vector<int> out;
    const int n = curve.vertex_count();
    for (int k = 0; k < n; ++k) {
        if (!curve.closed() && (k == 0 || k == n - 1)) continue;
        Real p = curve.vertex_param(k);
        if (curve.closed() && p <= lo) p += L;
        if (p > lo && p < hi) out.push_back(k);
    }
    return out;
}

/// Pointwise deviation between two curves over corresponding sub-intervals,
/// matching parameters by relative arclength within the intervals.
template <typename Real>
Real interval_deviation(const PolygonalCurve<Real>& before,
                        const Interval<Real>& iv_before,
                        const PolygonalCurve<Real>& after,
                        const Interval<Real>& iv_after, int samples = 96) {
    Real worst = 0;
    const Real wb = iv_before.hi - iv_before.lo;
    const Real wa = iv_after.hi - iv_after.lo;
    for (int k = 0; k <= samples; ++k) {
        const Real f = Real(k) / Real(samples);
        const Real d = (before.point_at(iv_before.lo + f * wb) -
                        after.point_at(iv_after.lo + f * wa))
                           .norm();
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace detail

/// Replace the vertices inside the arc (iv) by an inscribed polyline within
/// pointwise deviation eps_dev: greedy vertex dropping while the deviation
/// budget and the triangle-move criterion allow it, falling back to cutting
/// the sharpest corner by a sliver scaled to the budget. Length strictly
/// decreases; Milnor curvature cannot increase (the result is inscribed).
template <typename Real>
PolygonalCurve<Real> inscribe_arc(const PolygonalCurve<Real>& curve,
                                  const Interval<Real>& iv, Real eps_dev) {
    if (!(eps_dev > Real(0)))
        throw std::invalid_argument("inscribe_arc: eps_dev must be positive");
    const auto inside = detail::vertices_inside(curve, iv);
    if (inside.empty())
        throw NoOpMoveError("inscribe_arc: interval is a single segment");
    bool curved = false;
    for (int k : inside)
        if (exterior_angle(curve, k) > Real(1e-12)) curved = true;
    if (!curved)
        throw NoOpMoveError("inscribe_arc: interval has zero curvature");

    const Real lo = curve.closed() ? curve.wrap(iv.lo) : iv.lo;
    Real hi = curve.closed() ? curve.wrap(iv.hi) : iv.hi;
    if (curve.closed() && hi <= lo) hi += curve.length();
    const Interval<Real> iv_b{lo, hi};

    PolygonalCurve<Real> cur = curve;
    // vertex identity is positional; track the current index set
    std::vector<int> alive = inside;
    bool changed = false;
    int blocked = 0;

    auto drop_result = [&](int pos_in_alive) -> std::pair<bool, PolygonalCurve<Real>> {
        const int k = alive[static_cast<size_t>(pos_in_alive)];
        const int n = cur.vertex_count();
        const Vec3<Real> prev = cur.vertex((k - 1 + n) % n);
        const Vec3<Real> at = cur.vertex(k);
        const Vec3<Real> next = cur.vertex((k + 1) % n);
        const int e_in = (k - 1 + n) % cur.edge_count();
        const int e_out = k % cur.edge_count();
        int off = -1;
        if (!detail::triangle_clear(cur, prev, at, next, {e_in, e_out}, &off))
            return {false, cur};
        std::vector<Vec3<Real>> verts = cur.vertices();
        verts.erase(verts.begin() + k);
        try {
            PolygonalCurve<Real> cand(std::move(verts), cur.closed(), cur.name());
            if (!check_embedded(cand)) return {false, cur};
            return {true, std::move(cand)};
        } catch (const std::invalid_argument&) {
            return {false, cur};
        }
    };

    for (;;) {
        int best_pos = -1;
        Real best_dev = eps_dev;
        PolygonalCurve<Real> best_curve = cur;
        for (int pos = 0; pos < static_cast<int>(alive.size()); ++pos) {
            auto [ok, cand] = drop_result(pos);
            if (!ok) {
                ++blocked;
                continue;
            }
            const Interval<Real> iv_a{lo, hi - (curve.length() - cand.length())};
            const Real dev = detail::interval_deviation(curve, iv_b, cand, iv_a);
            if (dev < best_dev) {
                best_dev = dev;
                best_pos = pos;
                best_curve = std::move(cand);
            }
        }
        if (best_pos < 0) break;
        cur = std::move(best_curve);
        const int dropped = alive[static_cast<size_t>(best_pos)];
        alive.erase(alive.begin() + best_pos);
        for (int& k : alive)
            if (k > dropped) --k;
        changed = true;
    }

    if (changed && cur.length() < curve.length()) return cur;

    // Deviation budget too tight for a full drop: cut the sharpest corner by
    // a sliver sized to the budget. Deviation of the cut is t*sin(phi/2).
    int sharpest = -1;
    Real sharpest_angle = Real(1e-12);
    for (int k : alive) {
        const Real a = exterior_angle(cur, k);
        if (a > sharpest_angle) {
            sharpest_angle = a;
            sharpest = k;
        }
    }
    if (sharpest < 0)
        throw NoOpMoveError("inscribe_arc: nothing left to straighten");
    const int n = cur.vertex_count();
    const int e_in = (sharpest - 1 + n) % cur.edge_count();
    const int e_out = sharpest % cur.edge_count();
    const Vec3<Real> at = cur.vertex(sharpest);
    const Vec3<Real> prev = cur.vertex((sharpest - 1 + n) % n);
    const Vec3<Real> next = cur.vertex((sharpest + 1) % n);
    Real t = std::min({Real(0.9) * eps_dev / std::sin(sharpest_angle / 2),
                       cur.edge_length(e_in) / 3, cur.edge_length(e_out) / 3});
    for (int attempt = 0; attempt < 8; ++attempt, t /= Real(2)) {
        const Vec3<Real> p_in = at + t * (prev - at).normalized();
        const Vec3<Real> p_out = at + t * (next - at).normalized();
        int off = -1;
        if (!detail::triangle_clear(cur, p_in, at, p_out, {e_in, e_out}, &off))
            throw MoveRejectedError("inscribe_arc: corner cut crosses the curve",
                                    off);
        std::vector<Vec3<Real>> verts = cur.vertices();
        verts[static_cast<size_t>(sharpest)] = p_out;
        verts.insert(verts.begin() + sharpest, p_in);
        PolygonalCurve<Real> cand(std::move(verts), cur.closed(), cur.name());
        if (!check_embedded(cand)) continue;
        const Interval<Real> iv_a{lo, hi - (curve.length() - cand.length())};
        if (detail::interval_deviation(curve, iv_b, cand, iv_a) >= eps_dev)
            continue;
        if (!(cand.length() < curve.length())) continue;
        return cand;
    }
    throw MoveRejectedError("inscribe_arc: no admissible inscription found");
}

/// Fig. 7 corner move: slide the corner vertex a fraction eps_cut along its
/// outgoing edge. Length strictly decreases by the triangle inequality and
/// the exterior angle strictly decreases, so the local two-edge dq maximum
/// sec(phi/2) drops.
template <typename Real>
PolygonalCurve<Real> shorten_corner(const PolygonalCurve<Real>& curve,
                                    int vertex, Real eps_cut) {
    const int n = curve.vertex_count();
    if (vertex < 0 || vertex >= n)
        throw std::invalid_argument("shorten_corner: vertex index out of range");
    if (!curve.closed() && (vertex == 0 || vertex == n - 1))
        throw std::invalid_argument("shorten_corner: endpoint has no corner");
    if (eps_cut < Real(0) || eps_cut >= Real(1))
        throw std::invalid_argument(
            "shorten_corner: eps_cut must lie in [0, 1)");
    const Real phi = exterior_angle(curve, vertex);
    if (phi <= Real(1e-12))
        throw NoOpMoveError("shorten_corner: corner is straight");
    if (eps_cut == Real(0)) return curve;

    const Vec3<Real> v = curve.vertex(vertex);
    const Vec3<Real> u = curve.vertex((vertex - 1 + n) % n);
    const Vec3<Real> w = curve.vertex((vertex + 1) % n);
    const Vec3<Real> moved = v + eps_cut * (w - v);
    if ((moved - w).norm() <= Real(1e-12) * curve.length() ||
        (moved - u).norm() <= Real(1e-12) * curve.length())
        throw std::invalid_argument("shorten_corner: cut degenerates an edge");

    const int e_in = (vertex - 1 + n) % curve.edge_count();
    const int e_out = vertex % curve.edge_count();
    int off = -1;
    if (!detail::triangle_clear(curve, u, v, moved, {e_in, e_out}, &off))
        throw MoveRejectedError("shorten_corner: sweep crosses the curve", off);
    std::vector<Vec3<Real>> verts = curve.vertices();
    verts[static_cast<size_t>(vertex)] = moved;
    PolygonalCurve<Real> out(std::move(verts), curve.closed(), curve.name());
    if (!check_embedded(out))
        throw MoveRejectedError("shorten_corner: result is not embedded");
    return out;
}

// ---------------------------------------------------------------------------
// Proposition certificate
// ---------------------------------------------------------------------------

template <typename Real>
struct CertificateReport {
    bool ok = false;
    bool length_decreased = false;
    bool outside_unchanged = false;
    Real max_increase_touching = Real(0);   // pairs meeting the interval
    Real max_increase_outside = Real(0);    // pairs avoiding the interval
    ChordPair<Real> worst_pair{Real(0), Real(0)};
    int pairs_checked = 0;
};

/// Verifies that `after` (which may differ from `before` only inside iv)
/// decreased length, raised dq by less than eps on pairs touching the
/// interval, and did not raise dq on pairs avoiding it. Parameters are
/// matched by identity outside the interval and by relative arclength inside.
template <typename Real>
CertificateReport<Real> prop1_certificate(const PolygonalCurve<Real>& before,
                                          const PolygonalCurve<Real>& after,
                                          const Interval<Real>& iv, Real eps,
                                          int density = 28) {
    CertificateReport<Real> rep;
    const Real Lb = before.length();
    const Real La = after.length();
    rep.length_decreased = La < Lb;

    const Real lo = before.closed() ? before.wrap(iv.lo) : iv.lo;
    Real hi = before.closed() ? before.wrap(iv.hi) : iv.hi;
    if (before.closed() && hi <= lo) hi += Lb;
    const Real win_b = hi - lo;
    const Real win_a = win_b - (Lb - La);
    if (!(win_a > Real(0)))
        throw std::invalid_argument("prop1_certificate: interval collapsed");

    // parameter correspondence: identity outside the interval (parameters
    // past it shift by the length drop), proportional inside
    auto map_param = [&](Real s, bool inside) {
        if (inside) return after.wrap(lo + (s - lo) / win_b * win_a);
        if (!before.closed()) return s <= lo ? s : s - (Lb - La);
        const Real rel = before.wrap(s - lo);  // in [win_b, Lb)
        return after.wrap(lo + win_a + (rel - win_b));
    };

    std::vector<std::pair<Real, bool>> samples;  // (param on before, inside?)
    for (int k = 0; k <= density; ++k)
        samples.emplace_back(lo + win_b * Real(k) / Real(density), true);
    const Real out_len = Lb - win_b;
    const int out_n = std::max(2 * density, 8);
    for (int k = 1; k < out_n; ++k) {
        const Real s = hi + out_len * Real(k) / Real(out_n);
        if (before.closed())
            samples.emplace_back(before.wrap(s), false);
        else if (s < Lb)
            samples.emplace_back(s, false);
    }
    if (!before.closed()) {
        // the part before the interval
        const int pre_n = std::max(density / 2, 2);
        for (int k = 0; k < pre_n; ++k)
            samples.emplace_back(lo * Real(k) / Real(pre_n), false);
    }

    // outside geometry must be unchanged
    rep.outside_unchanged = true;
    const Real geom_tol = Real(1e-9) * Lb;
    for (const auto& [s, ins] : samples) {
        if (ins) continue;
        Real sb = s;
        if (before.closed()) sb = before.wrap(sb);
        const Real sa = map_param(sb, false);
        if ((before.point_at(sb) - after.point_at(sa)).norm() > geom_tol)
            rep.outside_unchanged = false;
    }

    Real worst_touch = -std::numeric_limits<Real>::infinity();
    Real worst_out = -std::numeric_limits<Real>::infinity();
    const Real chord_floor = Real(1e-12) * Lb;
    for (size_t i = 0; i < samples.size(); ++i) {
        for (size_t j = i + 1; j < samples.size(); ++j) {
            const auto& [s, s_in] = samples[i];
            const auto& [t, t_in] = samples[j];
            const Real cb = before.chord_distance(s, t);
            if (cb <= chord_floor) continue;
            const Real sa = map_param(s, s_in);
            const Real ta = map_param(t, t_in);
            const Real ca = after.chord_distance(sa, ta);
            if (ca <= chord_floor) continue;
            const Real diff = after.arc_distance(sa, ta) / ca -
                              before.arc_distance(s, t) / cb;
            ++rep.pairs_checked;
            if (diff > std::max(worst_touch, worst_out)) rep.worst_pair = {s, t};
            if (s_in || t_in)
                worst_touch = std::max(worst_touch, diff);
            else
                worst_out = std::max(worst_out, diff);
        }
    }
    rep.max_increase_touching = worst_touch;
    rep.max_increase_outside = worst_out;
    rep.ok = rep.length_decreased && rep.outside_unchanged &&
             worst_touch < eps && worst_out <= Real(1e-9);
    return rep;
}

/// The deviation budget from the proof of the inscription case: with
/// eps' < eps / (2 C d_max) where C bounds 1/(chord * chord) away from the
/// interval and d_max bounds the arclength distances involved, the dq
/// increase stays under eps. Returns a conservative admissible eps'.
template <typename Real>
Real prop1_epsilon_prime(const PolygonalCurve<Real>& curve,
                         const Interval<Real>& iv, Real eps, int density = 48) {
    const Real L = curve.length();
    const Real lo = curve.closed() ? curve.wrap(iv.lo) : iv.lo;
    Real hi = curve.closed() ? curve.wrap(iv.hi) : iv.hi;
    if (curve.closed() && hi <= lo) hi += L;
    // smallest chord among pairs with one endpoint in the interval
    Real min_chord = std::numeric_limits<Real>::infinity();
    for (int a = 0; a <= density; ++a) {
        const Real s = lo + (hi - lo) * Real(a) / Real(density);
        for (int k = 0; k < 2 * density; ++k) {
            const Real t = curve.wrap(hi + (L - (hi - lo)) * Real(k) /
                                               Real(2 * density));
            const Real arc = curve.arc_distance(s, t);
            if (arc <= (hi - lo) / Real(density)) continue;
            min_chord = std::min(min_chord, curve.chord_distance(s, t));
        }
    }
    if (!std::isfinite(min_chord) || min_chord <= Real(0))
        throw std::domain_error("prop1_epsilon_prime: no separated pairs");
    const Real c_bound = Real(1) / (min_chord * min_chord);
    const Real d_max = curve.closed() ? L / Real(2) : L;
    return std::min(eps / (Real(4) * c_bound * d_max), min_chord / Real(4));
}

}  // namespace distort
