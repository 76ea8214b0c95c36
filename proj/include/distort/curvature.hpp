#pragma once

// Milnor total curvature of polygons and the associated Radon measure:
// one atom per corner (the exterior angle) plus an optional piecewise
// constant density part used by the measure-level operations.

#include "distort/geometry.hpp"

#include <numeric>

namespace distort {

/// Open parameter interval (lo, hi). On wrapping domains hi may exceed the
/// domain length L to denote an interval crossing the seam; the canonical
/// form has lo in [0, L) and hi in (lo, lo + L].
template <typename Real>
struct Interval {
    Real lo;
    Real hi;

    Real width() const { return hi - lo; }
};

/// Exterior angle at vertex vi: the turning between the incoming and the
/// outgoing edge, in [0, pi]. Collinear vertices give 0.
template <typename Real>
Real exterior_angle(const PolygonalCurve<Real>& curve, int vi) {
    const int m = curve.edge_count();
    const int n = curve.vertex_count();
    int e_in, e_out;
    if (curve.closed()) {
        e_in = ((vi % n) + n - 1) % n;
        e_out = ((vi % n) + n) % n;
    } else {
        if (vi <= 0 || vi >= n - 1) return Real(0);  // open endpoints
        e_in = vi - 1;
        e_out = vi;
        (void)m;
    }
    const Vec3<Real> a = curve.edge_dir(e_in);
    const Vec3<Real> b = curve.edge_dir(e_out);
    return std::atan2(a.cross(b).norm(), a.dot(b));
}

/// Angles at every corner: all vertices of a closed curve, interior vertices
/// of an open one.
template <typename Real>
std::vector<std::pair<int, Real>> exterior_angles(
    const PolygonalCurve<Real>& curve) {
    std::vector<std::pair<int, Real>> out;
    const int n = curve.vertex_count();
    const int lo = curve.closed() ? 0 : 1;
    const int hi = curve.closed() ? n : n - 1;
    out.reserve(static_cast<size_t>(hi - lo));
    for (int i = lo; i < hi; ++i) out.emplace_back(i, exterior_angle(curve, i));
    return out;
}

/// Milnor total curvature: the sum of exterior angles.
template <typename Real>
Real total_curvature(const PolygonalCurve<Real>& curve) {
    Real sum = 0;
    for (const auto& [i, a] : exterior_angles(curve)) sum += a;
    return sum;
}

// ---------------------------------------------------------------------------
// CurvatureMeasure
// ---------------------------------------------------------------------------

template <typename Real>
struct MeasureAtom {
    Real position;
    Real mass;
};

template <typename Real>
struct DensityPiece {
    Real lo;
    Real hi;
    Real rate;  // radians per unit length
};

/// Radon measure on a parameter domain [0, L]: atoms plus a piecewise
/// constant density. For polygons the measure is purely atomic.
template <typename Real>
class CurvatureMeasure {
public:
    CurvatureMeasure(std::vector<MeasureAtom<Real>> atoms,
                     std::vector<DensityPiece<Real>> density, Real domain_length,
                     bool wraps)
        : atoms_(std::move(atoms)),
          density_(std::move(density)),
          domain_length_(domain_length),
          wraps_(wraps) {
        if (!(domain_length_ > Real(0)))
            throw std::invalid_argument("CurvatureMeasure: empty domain");
        Real prev = Real(-1);
        for (const auto& a : atoms_) {
            if (!(a.mass >= Real(0)) || !(a.mass < pi_v<Real>))
                throw std::invalid_argument(
                    "CurvatureMeasure: atom mass outside [0, pi)");
            if (!(a.position > prev))
                throw std::invalid_argument(
                    "CurvatureMeasure: atom positions must increase strictly");
            prev = a.position;
        }
        for (const auto& d : density_) {
            if (!(d.lo < d.hi) || !(d.rate >= Real(0)))
                throw std::invalid_argument("CurvatureMeasure: bad density piece");
        }
    }

    static CurvatureMeasure from_curve(const PolygonalCurve<Real>& curve) {
        std::vector<MeasureAtom<Real>> atoms;
        for (const auto& [i, a] : exterior_angles(curve))
            atoms.push_back({curve.vertex_param(i), a});
        return CurvatureMeasure(std::move(atoms), {}, curve.length(),
                                curve.closed());
    }

    const std::vector<MeasureAtom<Real>>& atoms() const { return atoms_; }
    const std::vector<DensityPiece<Real>>& density() const { return density_; }
    Real domain_length() const { return domain_length_; }
    bool wraps() const { return wraps_; }

    Real total_mass() const {
        Real t = 0;
        for (const auto& a : atoms_) t += a.mass;
        for (const auto& d : density_) t += d.rate * (d.hi - d.lo);
        return t;
    }

    bool has_atoms_inside(const Interval<Real>& iv) const {
        for (const auto& a : atoms_)
            if (position_inside(a.position, iv, /*open=*/true)) return true;
        return false;
    }

    /// Mass of the open interval (lo, hi): endpoint atoms excluded.
    Real mass_open(const Interval<Real>& iv) const { return mass(iv, true); }

    /// Mass of the closed interval [lo, hi]: endpoint atoms included (with a
    /// tiny slack so exactly-placed endpoints register reliably).
    Real mass_closed(const Interval<Real>& iv) const { return mass(iv, false); }

private:
    Real mass(Interval<Real> iv, bool open) const {
        iv = canonical(iv);
        const Real slack =
            open ? Real(0)
                 : domain_length_ * std::numeric_limits<Real>::epsilon() * Real(64);
        Real sum = 0;
        for (const auto& a : atoms_)
            if (position_inside(a.position, {iv.lo - slack, iv.hi + slack}, open))
                sum += a.mass;
        for (const auto& d : density_) {
            sum += density_overlap(d, iv.lo, iv.hi);
            if (wraps_)
                sum += density_overlap(d, iv.lo - domain_length_,
                                       iv.hi - domain_length_);
        }
        return sum;
    }

    static Real density_overlap(const DensityPiece<Real>& d, Real lo, Real hi) {
        const Real a = std::max(d.lo, lo);
        const Real b = std::min(d.hi, hi);
        return b > a ? d.rate * (b - a) : Real(0);
    }

    Interval<Real> canonical(Interval<Real> iv) const {
        if (!(iv.hi > iv.lo)) {
            if (wraps_)
                iv.hi += domain_length_;
            else
                throw std::invalid_argument("Interval: lo must precede hi");
        }
        if (wraps_) {
            while (iv.lo >= domain_length_) {
                iv.lo -= domain_length_;
                iv.hi -= domain_length_;
            }
            while (iv.lo < Real(0)) {
                iv.lo += domain_length_;
                iv.hi += domain_length_;
            }
            if (iv.hi - iv.lo > domain_length_) iv.hi = iv.lo + domain_length_;
        }
        return iv;
    }

    bool position_inside(Real pos, const Interval<Real>& iv, bool open) const {
        const int lo_rep = wraps_ ? -1 : 0;
        const int hi_rep = wraps_ ? 1 : 0;
        for (int rep = lo_rep; rep <= hi_rep; ++rep) {
            const Real p = pos + Real(rep) * domain_length_;
            if (open ? (p > iv.lo && p < iv.hi) : (p >= iv.lo && p <= iv.hi))
                return true;
        }
        return false;
    }

    std::vector<MeasureAtom<Real>> atoms_;
    std::vector<DensityPiece<Real>> density_;
    Real domain_length_;
    bool wraps_;
};

template <typename Real>
CurvatureMeasure<Real> curvature_measure(const PolygonalCurve<Real>& curve) {
    return CurvatureMeasure<Real>::from_curve(curve);
}

/// Total curvature of the open arc (lo, hi); atoms sitting exactly on the
/// endpoints do not count.
template <typename Real>
Real interval_curvature(const CurvatureMeasure<Real>& m,
                        const Interval<Real>& iv) {
    return m.mass_open(iv);
}

template <typename Real>
Real interval_curvature(const PolygonalCurve<Real>& curve,
                        const Interval<Real>& iv) {
    return curvature_measure(curve).mass_open(iv);
}

// ---------------------------------------------------------------------------
// Atomic decomposition
// ---------------------------------------------------------------------------

template <typename Real>
struct MeasureDecomposition {
    std::vector<MeasureAtom<Real>> majors;  // sorted by position
    CurvatureMeasure<Real> remainder;
};

/// Split out the `top` largest atoms (ties broken by ascending position).
/// Atom masses are moved, never recomputed, so mass is conserved exactly.
template <typename Real>
MeasureDecomposition<Real> decompose(const CurvatureMeasure<Real>& m, int top) {
    if (top < 0) throw std::invalid_argument("decompose: top must be >= 0");
    const auto& atoms = m.atoms();
    std::vector<int> order(atoms.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        if (atoms[i].mass != atoms[j].mass) return atoms[i].mass > atoms[j].mass;
        return atoms[i].position < atoms[j].position;
    });
    const size_t take = std::min<size_t>(static_cast<size_t>(top), atoms.size());
    std::vector<bool> is_major(atoms.size(), false);
    for (size_t k = 0; k < take; ++k) is_major[static_cast<size_t>(order[k])] = true;

    std::vector<MeasureAtom<Real>> majors, rest;
    for (size_t i = 0; i < atoms.size(); ++i)
        (is_major[i] ? majors : rest).push_back(atoms[i]);
    return {std::move(majors),
            CurvatureMeasure<Real>(std::move(rest), m.density(),
                                   m.domain_length(), m.wraps())};
}

// ---------------------------------------------------------------------------
// Subdivision scale (non-atomic measures)
// ---------------------------------------------------------------------------

namespace detail {

/// Largest window mass: max over x of mu((x, x + win)) for windows inside
/// (a, b). For piecewise constant densities the window mass is piecewise
/// linear in x, so scanning breakpoint-aligned positions is exact.
template <typename Real>
Real max_window_mass(const CurvatureMeasure<Real>& m, Real a, Real b, Real win) {
    if (win >= b - a) win = b - a;
    if (!(win > Real(0))) return Real(0);
    std::vector<Real> candidates{a, b - win};
    for (const auto& d : m.density()) {
        for (Real brk : {d.lo, d.hi}) {
            candidates.push_back(brk);
            candidates.push_back(brk - win);
        }
    }
    Real best = 0;
    for (Real x : candidates) {
        x = std::clamp(x, a, b - win);
        best = std::max(best, m.mass_open({x, x + win}));
    }
    return best;
}

}  // namespace detail

/// The appendix scale: the supremal L such that every subinterval of (a, b)
/// with length < L carries at most two thirds of the interval's mass. Found
/// by bisection (1e-9 relative) against the exact sliding-window maximum.
template <typename Real>
Real subdivision_scale(const CurvatureMeasure<Real>& m, const Interval<Real>& iv,
                       bool require_atomless = true) {
    if (require_atomless && m.has_atoms_inside(iv))
        throw std::invalid_argument(
            "subdivision_scale: measure has atoms inside the interval");
    const Real a = iv.lo, b = iv.hi;
    if (!(b > a)) throw std::invalid_argument("subdivision_scale: empty interval");
    const Real total = m.mass_open(iv);
    const Real budget = Real(2) * total / Real(3);
    if (!(total > Real(0))) return b - a;
    if (detail::max_window_mass(m, a, b, b - a) <= budget) return b - a;

    Real lo = 0, hi = b - a;  // predicate true at lo, false at hi
    for (int it = 0; it < 200; ++it) {
        const Real mid = (lo + hi) / Real(2);
        if (detail::max_window_mass(m, a, b, mid) <= budget)
            lo = mid;
        else
            hi = mid;
        if (hi - lo <= Real(1e-9) * (b - a)) break;
    }
    if (!(lo > Real(0)))
        throw std::domain_error(
            "subdivision_scale: no positive scale (atom-like concentration)");
    return lo;
}

}  // namespace distort
