#pragma once

// Polygonal space curves with arclength parametrization, plus the low-level
// segment/triangle predicates everything else is built on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace distort {

template <typename Real>
using Vec3 = Eigen::Matrix<Real, 3, 1>;

/// A pair of arclength parameters (s, t) identifying a chord of a curve.
template <typename Real>
struct ChordPair {
    Real s;
    Real t;
};

template <typename Real>
constexpr Real pi_v = Real(3.14159265358979323846264338327950288L);

// ---------------------------------------------------------------------------
// Segment kernels
// ---------------------------------------------------------------------------

/// Parameter of the point on segment [a,b] closest to p, clamped to [0,1].
template <typename Real>
Real closest_param_on_segment(const Vec3<Real>& a, const Vec3<Real>& b,
                              const Vec3<Real>& p) {
    const Vec3<Real> d = b - a;
    const Real dd = d.squaredNorm();
    if (dd <= Real(0)) return Real(0);
    return std::clamp((p - a).dot(d) / dd, Real(0), Real(1));
}

template <typename Real>
Real point_segment_distance(const Vec3<Real>& p, const Vec3<Real>& a,
                            const Vec3<Real>& b) {
    const Real t = closest_param_on_segment(a, b, p);
    return (p - (a + t * (b - a))).norm();
}

template <typename Real>
struct SegmentClosest {
    Real distance;
    Real s;  // parameter on first segment, in [0,1]
    Real t;  // parameter on second segment, in [0,1]
};

/// Minimum distance between segments [p0,p1] and [q0,q1].
/// Clamped quadratic minimization; the parallel case falls back to endpoint
/// projections.
template <typename Real>
SegmentClosest<Real> segment_segment_closest(const Vec3<Real>& p0,
                                             const Vec3<Real>& p1,
                                             const Vec3<Real>& q0,
                                             const Vec3<Real>& q1) {
    const Vec3<Real> d1 = p1 - p0;
    const Vec3<Real> d2 = q1 - q0;
    const Vec3<Real> r = p0 - q0;
    const Real a = d1.squaredNorm();
    const Real e = d2.squaredNorm();
    const Real f = d2.dot(r);
    const Real eps = std::numeric_limits<Real>::epsilon() * (a + e + Real(1));

    Real s = 0, t = 0;
    if (a <= eps && e <= eps) {
        // both degenerate
    } else if (a <= eps) {
        t = std::clamp(f / e, Real(0), Real(1));
    } else {
        const Real c = d1.dot(r);
        if (e <= eps) {
            s = std::clamp(-c / a, Real(0), Real(1));
        } else {
            const Real b = d1.dot(d2);
            const Real denom = a * e - b * b;
            if (denom > eps * (a * e)) {
                s = std::clamp((b * f - c * e) / denom, Real(0), Real(1));
            }
            t = (b * s + f) / e;
            if (t < Real(0)) {
                t = 0;
                s = std::clamp(-c / a, Real(0), Real(1));
            } else if (t > Real(1)) {
                t = 1;
                s = std::clamp((b - c) / a, Real(0), Real(1));
            }
        }
    }
    const Real dist = ((p0 + s * d1) - (q0 + t * d2)).norm();
    return {dist, s, t};
}

template <typename Real>
Real point_triangle_distance(const Vec3<Real>& p, const Vec3<Real>& a,
                             const Vec3<Real>& b, const Vec3<Real>& c) {
    const Vec3<Real> ab = b - a, ac = c - a, ap = p - a;
    const Vec3<Real> n = ab.cross(ac);
    const Real nn = n.squaredNorm();
    if (nn > Real(0)) {
        // barycentric test of the plane projection
        const Real d00 = ab.dot(ab), d01 = ab.dot(ac), d11 = ac.dot(ac);
        const Real d20 = ap.dot(ab), d21 = ap.dot(ac);
        const Real denom = d00 * d11 - d01 * d01;
        if (denom > Real(0)) {
            const Real v = (d11 * d20 - d01 * d21) / denom;
            const Real w = (d00 * d21 - d01 * d20) / denom;
            if (v >= Real(0) && w >= Real(0) && v + w <= Real(1))
                return std::abs(ap.dot(n)) / std::sqrt(nn);
        }
    }
    return std::min({point_segment_distance(p, a, b),
                     point_segment_distance(p, b, c),
                     point_segment_distance(p, c, a)});
}

/// Minimum distance between a segment and a (possibly degenerate) triangle.
/// Zero iff they intersect.
template <typename Real>
Real segment_triangle_distance(const Vec3<Real>& p0, const Vec3<Real>& p1,
                               const Vec3<Real>& a, const Vec3<Real>& b,
                               const Vec3<Real>& c) {
    const Vec3<Real> n = (b - a).cross(c - a);
    const Real nn = n.squaredNorm();
    if (nn > Real(0)) {
        // proper plane crossing with the hit point inside the triangle
        const Real h0 = n.dot(p0 - a);
        const Real h1 = n.dot(p1 - a);
        if ((h0 <= Real(0) && h1 >= Real(0)) || (h0 >= Real(0) && h1 <= Real(0))) {
            const Real dh = h0 - h1;
            if (std::abs(dh) > Real(0)) {
                const Real u = h0 / dh;
                const Vec3<Real> x = p0 + u * (p1 - p0);
                // x lies on the plane; barycentric inside test
                const Vec3<Real> ab = b - a, ac = c - a, ax = x - a;
                const Real d00 = ab.dot(ab), d01 = ab.dot(ac), d11 = ac.dot(ac);
                const Real denom = d00 * d11 - d01 * d01;
                if (denom > Real(0)) {
                    const Real v = (d11 * ax.dot(ab) - d01 * ax.dot(ac)) / denom;
                    const Real w = (d00 * ax.dot(ac) - d01 * ax.dot(ab)) / denom;
                    if (v >= Real(0) && w >= Real(0) && v + w <= Real(1))
                        return Real(0);
                }
            }
        }
    }
    Real best = std::min(point_triangle_distance(p0, a, b, c),
                         point_triangle_distance(p1, a, b, c));
    best = std::min(best, segment_segment_closest(p0, p1, a, b).distance);
    best = std::min(best, segment_segment_closest(p0, p1, b, c).distance);
    best = std::min(best, segment_segment_closest(p0, p1, c, a).distance);
    return best;
}

// ---------------------------------------------------------------------------
// PolygonalCurve
// ---------------------------------------------------------------------------

/// Location of an arclength parameter: edge index plus offset along it.
template <typename Real>
struct EdgeLocation {
    int edge;
    Real offset;  // in [0, edge_length(edge)]
};

/// Immutable polygonal curve in R^3 with a precomputed arclength table.
///
/// Closed curves have an implicit wrap edge from the last vertex back to the
/// first; parameters are taken modulo the total length. Open curves use the
/// parameter range [0, L].
template <typename Real>
class PolygonalCurve {
public:
    using Vertex = Vec3<Real>;

    static PolygonalCurve closed_curve(std::vector<Vertex> vertices,
                                       std::string name = {}) {
        return PolygonalCurve(std::move(vertices), true, std::move(name));
    }
    static PolygonalCurve open_curve(std::vector<Vertex> vertices,
                                     std::string name = {}) {
        return PolygonalCurve(std::move(vertices), false, std::move(name));
    }

    PolygonalCurve(std::vector<Vertex> vertices, bool closed,
                   std::string name = {})
        : vertices_(std::move(vertices)), closed_(closed), name_(std::move(name)) {
        const int n = static_cast<int>(vertices_.size());
        if (closed_ ? n < 3 : n < 2)
            throw std::invalid_argument("PolygonalCurve: too few vertices");
        const int m = edge_count();
        cum_.resize(m + 1);
        cum_[0] = Real(0);
        for (int i = 0; i < m; ++i) {
            const Real len = (vertex(i + 1) - vertex(i)).norm();
            if (!(len > Real(0)))
                throw std::invalid_argument(
                    "PolygonalCurve: consecutive vertices coincide");
            cum_[i + 1] = cum_[i] + len;
        }
    }

    bool closed() const { return closed_; }
    const std::string& name() const { return name_; }
    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int edge_count() const {
        return closed_ ? vertex_count() : vertex_count() - 1;
    }
    Real length() const { return cum_.back(); }
    const std::vector<Vertex>& vertices() const { return vertices_; }

    /// Vertex by index; indices wrap for closed curves.
    const Vertex& vertex(int i) const {
        const int n = vertex_count();
        if (closed_) {
            i %= n;
            if (i < 0) i += n;
        }
        return vertices_[static_cast<size_t>(i)];
    }

    Real edge_length(int i) const { return cum_[i + 1] - cum_[i]; }
    /// Arclength of vertex i (start of edge i).
    Real vertex_param(int i) const { return cum_[i]; }
    Vec3<Real> edge_vector(int i) const { return vertex(i + 1) - vertex(i); }
    Vec3<Real> edge_dir(int i) const { return edge_vector(i) / edge_length(i); }

    /// Canonicalize a parameter: closed curves map to [0, L), open curves are
    /// checked against [0, L].
    Real wrap(Real s) const {
        const Real L = length();
        if (closed_) {
            s = std::fmod(s, L);
            if (s < Real(0)) s += L;
            return s;
        }
        const Real slack = L * std::numeric_limits<Real>::epsilon() * Real(64);
        if (s < -slack || s > L + slack)
            throw std::out_of_range("PolygonalCurve: parameter outside [0, L]");
        return std::clamp(s, Real(0), L);
    }

    EdgeLocation<Real> locate(Real s) const {
        s = wrap(s);
        if (!closed_ && s >= length())
            return {edge_count() - 1, edge_length(edge_count() - 1)};
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
        int e = static_cast<int>(it - cum_.begin()) - 1;
        e = std::clamp(e, 0, edge_count() - 1);
        return {e, s - cum_[e]};
    }

    Vec3<Real> point_at(Real s) const {
        const auto loc = locate(s);
        return vertex(loc.edge) + loc.offset * edge_dir(loc.edge);
    }

    /// Intrinsic distance along the curve between parameters s and t.
    Real arc_distance(Real s, Real t) const {
        if (closed_) {
            const Real d = std::abs(wrap(t) - wrap(s));
            return std::min(d, length() - d);
        }
        return std::abs(wrap(t) - wrap(s));
    }
    Real arc_distance(const ChordPair<Real>& p) const {
        return arc_distance(p.s, p.t);
    }

    Real chord_distance(Real s, Real t) const {
        return (point_at(s) - point_at(t)).norm();
    }
    Real chord_distance(const ChordPair<Real>& p) const {
        return chord_distance(p.s, p.t);
    }

    PolygonalCurve scaled(Real factor) const {
        if (!(factor > Real(0)))
            throw std::invalid_argument("scaled: factor must be positive");
        std::vector<Vertex> v = vertices_;
        for (auto& x : v) x *= factor;
        return PolygonalCurve(std::move(v), closed_, name_);
    }

    PolygonalCurve translated(const Vec3<Real>& offset) const {
        std::vector<Vertex> v = vertices_;
        for (auto& x : v) x += offset;
        return PolygonalCurve(std::move(v), closed_, name_);
    }

    /// Sub-curve over [lo, hi] extracted as an open curve. The interval may
    /// wrap on closed curves. Interval endpoints become (possibly collinear)
    /// end vertices.
    PolygonalCurve sub_curve(Real lo, Real hi) const {
        lo = wrap(lo);
        hi = wrap(hi);
        Real span = hi - lo;
        if (closed_ && span <= Real(0)) span += length();
        if (!(span > Real(0)))
            throw std::invalid_argument("sub_curve: empty interval");
        std::vector<Vertex> v;
        v.push_back(point_at(lo));
        const auto lo_loc = locate(lo);
        const Real tiny = length() * std::numeric_limits<Real>::epsilon() * Real(64);
        int e = lo_loc.edge;
        Real covered = edge_length(e) - lo_loc.offset;
        while (covered < span - tiny) {
            e = closed_ ? (e + 1) % edge_count() : e + 1;
            if (!closed_ && e >= edge_count()) break;
            v.push_back(vertex(e));
            covered += edge_length(e);
        }
        const Vertex last = point_at(hi);
        if ((last - v.back()).norm() > tiny) v.push_back(last);
        return open_curve(std::move(v), name_.empty() ? name_ : name_ + "[arc]");
    }

private:
    std::vector<Vertex> vertices_;
    bool closed_;
    std::string name_;
    std::vector<Real> cum_;
};

/// Default relative embedding tolerance (scaled by curve length on use).
template <typename Real>
constexpr Real default_embed_tolerance = Real(1e-9);

template <typename Real>
struct EmbeddingReport {
    bool embedded = true;
    int edge_a = -1;        // offending pair when not embedded
    int edge_b = -1;
    Real separation = std::numeric_limits<Real>::infinity();

    explicit operator bool() const { return embedded; }
};

/// Exhaustive segment-pair scan: every non-adjacent edge pair must keep
/// distance >= eps_embed, and adjacent edges may meet only at their shared
/// vertex. Pass eps_embed <= 0 to use the default relative tolerance.
template <typename Real>
EmbeddingReport<Real> check_embedded(const PolygonalCurve<Real>& curve,
                                     Real eps_embed = Real(-1)) {
    const int m = curve.edge_count();
    const Real L = curve.length();
    if (eps_embed <= Real(0)) eps_embed = default_embed_tolerance<Real> * L;
    EmbeddingReport<Real> rep;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const bool adjacent =
                (j == i + 1) || (curve.closed() && i == 0 && j == m - 1);
            if (adjacent) {
                // shared vertex is fine; doubling back (exterior angle pi) is not
                const Vec3<Real> da = curve.edge_dir(i);
                const Vec3<Real> db = curve.edge_dir(j);
                const Real cosang = (j == i + 1) ? da.dot(db) : db.dot(da);
                if (cosang < Real(-1) + Real(1e-12)) {
                    rep.embedded = false;
                    rep.edge_a = i;
                    rep.edge_b = j;
                    rep.separation = Real(0);
                    return rep;
                }
                continue;
            }
            const auto c = segment_segment_closest(
                curve.vertex(i), curve.vertex(i + 1), curve.vertex(j),
                curve.vertex(j + 1));
            if (c.distance < eps_embed) {
                rep.embedded = false;
                rep.edge_a = i;
                rep.edge_b = j;
                rep.separation = c.distance;
                return rep;
            }
            rep.separation = std::min(rep.separation, c.distance);
        }
    }
    return rep;
}

template <typename Real>
struct TriangleMoveCheck {
    bool valid = false;
    bool degenerate = false;
    int offending_edge = -1;
};

namespace detail {

/// Distance from curve edge e to triangle (a,b,c), trimming `shrink` off the
/// end of the edge that touches a triangle corner (so the legitimate shared
/// vertex cannot register as a hit).
template <typename Real>
Real trimmed_edge_triangle_distance(const PolygonalCurve<Real>& curve, int e,
                                    const Vec3<Real>& a, const Vec3<Real>& b,
                                    const Vec3<Real>& c, Real shrink) {
    Vec3<Real> p0 = curve.vertex(e);
    Vec3<Real> p1 = curve.vertex(e + 1);
    const Real len = curve.edge_length(e);
    const Vec3<Real> d = curve.edge_dir(e);
    const Real cut = std::min(shrink, len / Real(4));
    for (const Vec3<Real>* corner : {&a, &b, &c}) {
        if ((p0 - *corner).norm() < cut * Real(1e-3)) p0 += cut * d;
        if ((p1 - *corner).norm() < cut * Real(1e-3)) p1 -= cut * d;
    }
    return segment_triangle_distance(p0, p1, a, b, c);
}

}  // namespace detail

/// Elementary-move isotopy criterion: replacing edge i by the two edges
/// through v preserves knot type when the spanned triangle meets no other
/// edge of the curve. A collinear v gives a degenerate triangle; the move is
/// then valid only if the modified curve is still embedded.
template <typename Real>
TriangleMoveCheck<Real> triangle_move_valid(const PolygonalCurve<Real>& curve,
                                            int edge, const Vec3<Real>& v) {
    const Vec3<Real> a = curve.vertex(edge);
    const Vec3<Real> b = curve.vertex(edge + 1);
    const Real L = curve.length();
    TriangleMoveCheck<Real> res;

    const Real area2 = (b - a).cross(v - a).norm();
    if (area2 < Real(1e-12) * (b - a).norm() * ((v - a).norm() + L)) {
        res.degenerate = true;
        // valid only if inserting v keeps the curve embedded
        std::vector<Vec3<Real>> verts = curve.vertices();
        const Real off = (v - a).norm();
        if (off <= Real(0) || (v - b).norm() <= Real(0)) {
            res.valid = false;
            return res;
        }
        verts.insert(verts.begin() + edge + 1, v);
        try {
            PolygonalCurve<Real> moved(std::move(verts), curve.closed());
            res.valid = static_cast<bool>(check_embedded(moved));
        } catch (const std::invalid_argument&) {
            res.valid = false;
        }
        return res;
    }

    const int m = curve.edge_count();
    const Real tol = Real(1e-12) * L;
    const Real shrink = Real(1e-7) * L;
    for (int e = 0; e < m; ++e) {
        if (e == edge) continue;
        const bool touches =
            (e + 1) % m == edge || (edge + 1) % m == e ||
            (!curve.closed() && (e + 1 == edge || edge + 1 == e));
        const Real d =
            touches
                ? detail::trimmed_edge_triangle_distance(curve, e, a, b, v, shrink)
                : segment_triangle_distance(curve.vertex(e), curve.vertex(e + 1),
                                            a, b, v);
        if (d <= tol) {
            res.offending_edge = e;
            res.valid = false;
            return res;
        }
    }
    res.valid = true;
    return res;
}

/// Validity of moving vertex `vi` to `v`: both swept triangles
/// (prev, old, new) and (old, next, new) must avoid the rest of the curve,
/// and the moved curve must remain embedded.
template <typename Real>
bool vertex_move_valid(const PolygonalCurve<Real>& curve, int vi,
                       const Vec3<Real>& v) {
    const int n = curve.vertex_count();
    const int m = curve.edge_count();
    const Vec3<Real> old = curve.vertex(vi);
    const Vec3<Real> prev = curve.vertex(vi - 1 + n);
    const Vec3<Real> next = curve.vertex(vi + 1);
    if (!curve.closed() && (vi == 0 || vi == n - 1)) return false;

    const Real tol = Real(1e-12) * curve.length();
    const Real shrink = Real(1e-7) * curve.length();
    const int e_in = (vi - 1 + m) % m;   // prev -> old
    const int e_out = vi % m;            // old -> next
    for (int e = 0; e < m; ++e) {
        if (e == e_in || e == e_out) continue;
        const Real d1 = detail::trimmed_edge_triangle_distance(curve, e, prev,
                                                               old, v, shrink);
        const Real d2 = detail::trimmed_edge_triangle_distance(curve, e, old,
                                                               next, v, shrink);
        if (std::min(d1, d2) <= tol) return false;
    }
    std::vector<Vec3<Real>> verts = curve.vertices();
    verts[static_cast<size_t>(vi)] = v;
    try {
        PolygonalCurve<Real> moved(std::move(verts), curve.closed());
        return static_cast<bool>(check_embedded(moved));
    } catch (const std::invalid_argument&) {
        return false;
    }
}

}  // namespace distort
