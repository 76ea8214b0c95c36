#pragma once

// Gromov distortion machinery on polygonal curves: the distortion quotient,
// the supremum search over edge-pair cells, the pointwise maximum D(s), the
// upper-envelope shadow, distortion realizing chords, and b-distortion
// thickness.
//
// The search exploits the cell structure of a polygon: restricted to a fixed
// pair of edges, the arclength distance is piecewise affine in the two edge
// offsets and the chord distance is the square root of a convex quadratic.
// Per branch the stationarity condition is linear in each variable, so the
// one-dimensional maximizations are closed form. Cells are pruned with the
// Denne-Sullivan bound sec(kappa/2) and with the coarse bound
// max(arc)/min(chord), and surviving cells are refined by subdivision.

#include "distort/curvature.hpp"

#include <cstdlib>
#include <functional>
#include <queue>
#include <thread>
#include <tuple>

namespace distort {

/// Distortion quotient of one pair: arclength distance over chord distance.
template <typename Real>
Real dq(const PolygonalCurve<Real>& curve, const ChordPair<Real>& pair) {
    const Real chord = curve.chord_distance(pair);
    if (!(chord > Real(0)))
        throw std::invalid_argument("dq: pair is spatially coincident");
    return curve.arc_distance(pair) / chord;
}

template <typename Real>
Real dq(const PolygonalCurve<Real>& curve, Real s, Real t) {
    return dq(curve, ChordPair<Real>{s, t});
}

template <typename Real>
struct ShadowSample {
    Real s;
    Real value;
};

template <typename Real>
struct DrcEntry {
    Real s;
    Real t;
    Real value;  // upper-envelope distortion quotient at (s, t)
};

template <typename Real>
struct DistortionReport {
    Real delta = Real(1);
    std::vector<ChordPair<Real>> argmax_pairs;
    std::vector<ShadowSample<Real>> shadow;
    std::vector<DrcEntry<Real>> drcs;
    Real thickness = std::numeric_limits<Real>::infinity();
    Real sample_density = Real(0);
};

template <typename Real>
struct DistortionOptions {
    Real tol_rel = Real(1e-6);     // relative certification gap of the supremum
    Real tol_argmax = Real(1e-4);  // relative band for reported argmax pairs
    int max_argmax = 256;
    int max_depth = 60;
};

namespace detail {

template <typename Real>
Real sec_half(Real kappa) {
    const Real c = std::cos(kappa / Real(2));
    return c > Real(0) ? Real(1) / c : std::numeric_limits<Real>::infinity();
}

/// Precomputed per-curve tables for the cell engine.
template <typename Real>
struct PairContext {
    const PolygonalCurve<Real>* curve;
    int m;  // edge count
    Real L;
    bool closed;
    std::vector<Vec3<Real>> origin;
    std::vector<Vec3<Real>> dir;
    std::vector<Real> len;
    std::vector<Real> cum;
    std::vector<Real> angle_prefix;  // prefix sums over vertex angles
    Real angle_total;

    explicit PairContext(const PolygonalCurve<Real>& c)
        : curve(&c), m(c.edge_count()), L(c.length()), closed(c.closed()) {
        origin.reserve(m);
        dir.reserve(m);
        len.reserve(m);
        cum.reserve(m + 1);
        for (int i = 0; i < m; ++i) {
            origin.push_back(c.vertex(i));
            dir.push_back(c.edge_dir(i));
            len.push_back(c.edge_length(i));
            cum.push_back(c.vertex_param(i));
        }
        cum.push_back(L);
        const int n = c.vertex_count();
        angle_prefix.assign(n + 1, Real(0));
        for (int v = 0; v < n; ++v)
            angle_prefix[v + 1] = angle_prefix[v] + exterior_angle(c, v);
        angle_total = angle_prefix[n];
    }

    Vec3<Real> point(int e, Real off) const { return origin[e] + off * dir[e]; }

    /// Total curvature of the forward arc from inside edge i to inside edge j
    /// (the vertices i+1 .. j).
    Real forward_curvature(int i, int j) const {
        if (j > i) return angle_prefix[j + 1] - angle_prefix[i + 1];
        return angle_total - angle_prefix[i + 1] + angle_prefix[j + 1];
    }

    /// Arclength distance given the forward offset, without re-locating.
    Real arc_from_forward(Real fwd) const {
        if (!closed) return std::abs(fwd);
        Real f = std::fmod(fwd, L);
        if (f < Real(0)) f += L;
        return std::min(f, L - f);
    }

    /// dq at cell coordinates; negative when the points coincide.
    Real eval(int ei, Real u, int ej, Real v) const {
        const Real chord = (point(ei, u) - point(ej, v)).norm();
        if (chord <= Real(1e-14) * L) return Real(-1);
        const Real fwd = (cum[ej] + v) - (cum[ei] + u);
        return arc_from_forward(fwd) / chord;
    }
};

/// Closed-form 1-D maximization of (alpha + beta v) / sqrt(v^2 + c1 v + c0)
/// over [lo, hi]: the derivative vanishes on at most one point, which is the
/// root of a linear equation.
template <typename Real>
void stationary_1d(Real alpha, Real beta, Real c1, Real c0, Real lo, Real hi,
                   std::vector<Real>& out) {
    const Real den = beta * c1 - Real(2) * alpha;
    if (std::abs(den) > std::numeric_limits<Real>::min()) {
        const Real v = (alpha * c1 - Real(2) * beta * c0) / den;
        if (v > lo && v < hi) out.push_back(v);
    }
}

/// Best dq over {fixed point at param s on edge es, offset u} x {edge ej,
/// v in [v0, v1]}. Exact: per arc-branch the stationary point is closed form.
template <typename Real>
std::pair<Real, Real> max_against_edge(const PairContext<Real>& ctx, int es,
                                       Real u, int ej, Real v0, Real v1) {
    const Vec3<Real> P = ctx.point(es, u);
    const Real s = ctx.cum[es] + u;
    const Vec3<Real> w0 = P - ctx.origin[ej];
    const Real c1 = Real(-2) * ctx.dir[ej].dot(w0);
    const Real c0 = w0.squaredNorm();

    Real g = ctx.cum[ej] - s;  // fwd(v) = g + v
    std::vector<Real> splits{v0, v1};
    if (ctx.closed) {
        while (g < Real(0)) g += ctx.L;
        for (Real target : {ctx.L / Real(2), ctx.L, Real(3) * ctx.L / Real(2)}) {
            const Real v = target - g;
            if (v > v0 && v < v1) splits.push_back(v);
        }
        std::sort(splits.begin(), splits.end());
    }

    std::vector<Real> cand(splits);
    for (size_t k = 0; k + 1 < splits.size(); ++k) {
        const Real lo = splits[k], hi = splits[k + 1];
        if (!(hi > lo)) continue;
        Real alpha, beta;
        if (!ctx.closed) {
            if (g >= Real(0)) {
                alpha = g;
                beta = Real(1);
            } else {
                alpha = -g;
                beta = Real(-1);
            }
        } else {
            const Real fmid = g + (lo + hi) / Real(2);
            const Real k_wrap = std::floor(fmid / ctx.L);
            const Real frac = fmid - k_wrap * ctx.L;
            if (frac <= ctx.L / Real(2)) {
                alpha = g - k_wrap * ctx.L;
                beta = Real(1);
            } else {
                alpha = (k_wrap + Real(1)) * ctx.L - g;
                beta = Real(-1);
            }
        }
        stationary_1d(alpha, beta, c1, c0, lo, hi, cand);
    }

    Real best = Real(-1), best_v = v0;
    for (Real v : cand) {
        if (v < v0 || v > v1) continue;
        const Real val = ctx.eval(es, u, ej, v);
        if (val > best) {
            best = val;
            best_v = v;
        }
    }
    return {best, best_v};
}

template <typename Real>
struct CellBox {
    int ei, ej;
    Real u0, u1, v0, v1;
    Real bound;
    int depth;
};

/// One affine branch of the arclength distance on a cell:
/// arc = alpha + bu*u + bv*v with bu = -bv = +-1, valid on the half-plane
/// where that way around the curve is the shorter one. The half-plane is
/// fold_side * (v - u) <= fold_side * fold_c (no constraint when
/// fold_side == 0, the open-curve case).
template <typename Real>
struct ArcBranch {
    Real alpha;
    Real bu;
    Real bv;
    int fold_side;
    Real fold_c;
};

template <typename Real>
int cell_branches(const PairContext<Real>& ctx, int ei, int ej,
                  ArcBranch<Real> out[2]) {
    const Real base = ctx.cum[ej] - ctx.cum[ei];
    if (!ctx.closed) {
        out[0] = {base, Real(-1), Real(1), 0, Real(0)};
        return 1;
    }
    const Real c = ctx.L / Real(2) - base;  // fold: v - u == c
    out[0] = {base, Real(-1), Real(1), -1, c};
    out[1] = {ctx.L - base, Real(1), Real(-1), 1, c};
    return 2;
}

/// Exact maximum of (alpha + bu*u + bv*v)/sqrt(|w0 + u di - v dj|^2) over
/// the rectangle clipped to the branch's half-plane. Interior stationary
/// points lie on the line u + v = const, where stationarity degenerates to a
/// linear equation, so every candidate is closed form. Optionally emits the
/// candidate points for attained-value evaluation.
template <typename Real>
Real branch_rect_max(const PairContext<Real>& ctx, int ei, int ej, Real u0,
                     Real u1, Real v0, Real v1, const ArcBranch<Real>& br,
                     std::vector<std::pair<Real, Real>>* pts) {
    const Vec3<Real>& di = ctx.dir[ei];
    const Vec3<Real>& dj = ctx.dir[ej];
    const Vec3<Real> w0 = ctx.origin[ei] - ctx.origin[ej];
    const Real q_floor = Real(1e-28) * ctx.L * ctx.L;

    auto feasible = [&](Real u, Real v) {
        if (br.fold_side == 0) return true;
        const Real slack = Real(1e-15) * ctx.L;
        if (br.fold_side < 0) return v - u <= br.fold_c + slack;
        return v - u >= br.fold_c - slack;
    };
    // half-plane clip of a v-range at fixed u (and vice versa)
    auto clip_v = [&](Real u, Real& lo, Real& hi) {
        if (br.fold_side < 0) hi = std::min(hi, u + br.fold_c);
        if (br.fold_side > 0) lo = std::max(lo, u + br.fold_c);
    };
    auto clip_u = [&](Real v, Real& lo, Real& hi) {
        if (br.fold_side < 0) lo = std::max(lo, v - br.fold_c);
        if (br.fold_side > 0) hi = std::min(hi, v - br.fold_c);
    };

    Real best = Real(0);
    auto consider = [&](Real u, Real v) {
        u = std::clamp(u, u0, u1);
        v = std::clamp(v, v0, v1);
        if (!feasible(u, v)) return;
        if (pts) pts->emplace_back(u, v);
        const Real q = (w0 + u * di - v * dj).squaredNorm();
        if (q <= q_floor) return;  // shared-corner limit; the diagonal attains it
        const Real n = br.alpha + br.bu * u + br.bv * v;
        if (n <= Real(0)) return;
        best = std::max(best, n / std::sqrt(q));
    };

    consider(u0, v0);
    consider(u0, v1);
    consider(u1, v0);
    consider(u1, v1);

    std::vector<Real> st;
    for (Real u : {u0, u1}) {
        Real lo = v0, hi = v1;
        clip_v(u, lo, hi);
        if (!(hi >= lo)) continue;
        consider(u, lo);
        consider(u, hi);
        const Vec3<Real> wu = w0 + u * di;
        st.clear();
        stationary_1d(br.alpha + br.bu * u, br.bv, Real(-2) * dj.dot(wu),
                      wu.squaredNorm(), lo, hi, st);
        for (Real v : st) consider(u, v);
    }
    for (Real v : {v0, v1}) {
        Real lo = u0, hi = u1;
        clip_u(v, lo, hi);
        if (!(hi >= lo)) continue;
        consider(lo, v);
        consider(hi, v);
        const Vec3<Real> wv = w0 - v * dj;
        st.clear();
        stationary_1d(br.alpha + br.bv * v, br.bu, Real(2) * di.dot(wv),
                      wv.squaredNorm(), lo, hi, st);
        for (Real u : st) consider(u, v);
    }

    // Fold side: the arclength there equals L/2, so maximize by minimizing
    // the chord along v = u + fold_c.
    if (br.fold_side != 0) {
        const Real lo = std::max(u0, v0 - br.fold_c);
        const Real hi = std::min(u1, v1 - br.fold_c);
        if (hi >= lo) {
            const Vec3<Real> f0 = w0 - br.fold_c * dj;
            const Vec3<Real> fd = di - dj;
            const Real a2 = fd.squaredNorm();
            consider(lo, lo + br.fold_c);
            consider(hi, hi + br.fold_c);
            if (a2 > Real(0))
                consider(std::clamp(-f0.dot(fd) / a2, lo, hi),
                         std::clamp(-f0.dot(fd) / a2, lo, hi) + br.fold_c);
        }
    }

    // Interior stationary points: on u + v = S the condition is linear.
    const Real e = di.dot(dj);
    if (std::abs(Real(1) - e) > Real(1e-12)) {
        const Real S = -(di - dj).dot(w0) / (Real(1) - e);
        const Real lo = std::max(u0, S - v1);
        const Real hi = std::min(u1, S - v0);
        if (hi > lo) {
            const Vec3<Real> m0 = w0 - S * dj;
            const Real ns = br.alpha + br.bv * S;  // N = ns + 2 bu tau
            const Real B = Real(2) * br.bu * m0.dot(dj) - ns * (Real(1) + e);
            const Real C = br.bu * m0.squaredNorm() - ns * di.dot(m0);
            if (std::abs(B) > std::numeric_limits<Real>::min()) {
                const Real tau = -C / B;
                if (tau > lo && tau < hi) consider(tau, S - tau);
            } else {
                // the formula is constant along the line; sample inside
                // (v - u <= c on the line means tau >= (S - c)/2)
                Real mlo = lo, mhi = hi;
                if (br.fold_side < 0) mlo = std::max(mlo, (S - br.fold_c) / Real(2));
                if (br.fold_side > 0) mhi = std::min(mhi, (S - br.fold_c) / Real(2));
                if (mhi >= mlo) consider((mlo + mhi) / Real(2),
                                         S - (mlo + mhi) / Real(2));
            }
        }
    }
    return best;
}

/// Cheap upper bound: Denne-Sullivan along both arcs and max(arc)/min(chord).
template <typename Real>
Real box_bound_cheap(const PairContext<Real>& ctx, int ei, int ej, Real u0,
                     Real u1, Real v0, Real v1, Real ds_bound) {
    const auto c = segment_segment_closest(
        ctx.point(ei, u0), ctx.point(ei, u1), ctx.point(ej, v0),
        ctx.point(ej, v1));
    const Real base = ctx.cum[ej] - ctx.cum[ei];
    const Real f0 = base + v0 - u1;
    const Real f1 = base + v1 - u0;
    Real maxarc;
    if (!ctx.closed) {
        maxarc = std::max(std::abs(f0), std::abs(f1));
    } else if (f0 <= ctx.L / Real(2) && ctx.L / Real(2) <= f1) {
        maxarc = ctx.L / Real(2);
    } else {
        maxarc = std::max(ctx.arc_from_forward(f0), ctx.arc_from_forward(f1));
    }
    const Real geo = c.distance > Real(0)
                         ? maxarc / c.distance
                         : std::numeric_limits<Real>::infinity();
    return std::min(geo, ds_bound);
}

/// Tight upper bound: per-branch exact rectangle maxima (still capped by the
/// Denne-Sullivan bound, which is sharper at shared corners).
template <typename Real>
Real box_bound(const PairContext<Real>& ctx, int ei, int ej, Real u0, Real u1,
               Real v0, Real v1, Real ds_bound) {
    ArcBranch<Real> br[2];
    const int nb = cell_branches(ctx, ei, ej, br);
    Real bound = Real(0);
    std::vector<std::pair<Real, Real>>* no_pts = nullptr;
    for (int k = 0; k < nb; ++k)
        bound = std::max(bound, branch_rect_max(ctx, ei, ej, u0, u1, v0, v1,
                                                br[k], no_pts));
    return std::min(bound, ds_bound);
}

/// Best attained dq within a box: branch stationary candidates, the fold
/// segment (arc == L/2), and coordinate ascent from the best candidate.
/// Each ascent step is an exact 1-D maximization.
template <typename Real>
std::tuple<Real, Real, Real> box_max(const PairContext<Real>& ctx,
                                     const CellBox<Real>& b) {
    Real best = Real(-1), bu = b.u0, bv = b.v0;
    auto consider = [&](Real u, Real v) {
        const Real val = ctx.eval(b.ei, u, b.ej, v);
        if (val > best) {
            best = val;
            bu = u;
            bv = v;
        }
    };

    std::vector<std::pair<Real, Real>> pts;
    ArcBranch<Real> br[2];
    const int nb = cell_branches(ctx, b.ei, b.ej, br);
    for (int k = 0; k < nb; ++k)
        branch_rect_max(ctx, b.ei, b.ej, b.u0, b.u1, b.v0, b.v1, br[k], &pts);
    for (const auto& [u, v] : pts) consider(u, v);

    if (ctx.closed) {
        // fold v = u + (L/2 - base): arc is constant L/2, so minimize chord
        const Real base = ctx.cum[b.ej] - ctx.cum[b.ei];
        const Real c = ctx.L / Real(2) - base;
        const Real lo = std::max(b.u0, b.v0 - c);
        const Real hi = std::min(b.u1, b.v1 - c);
        if (hi > lo) {
            // chord^2 along the fold is quadratic; take its vertex too
            const Vec3<Real> w0 =
                ctx.origin[b.ei] - ctx.origin[b.ej] - c * ctx.dir[b.ej];
            const Vec3<Real> dw = ctx.dir[b.ei] - ctx.dir[b.ej];
            const Real a2 = dw.squaredNorm();
            for (Real u : {lo, hi,
                           a2 > Real(0) ? std::clamp(-w0.dot(dw) / a2, lo, hi)
                                        : lo}) {
                consider(u, u + c);
            }
        }
    }

    Real cur = best, cu = bu, cv = bv;
    for (int it = 0; it < 40; ++it) {
        const auto [val_v, nv] = max_against_edge(ctx, b.ei, cu, b.ej, b.v0, b.v1);
        if (val_v > cur) {
            cur = val_v;
            cv = nv;
        }
        const auto [val_u, nu] = max_against_edge(ctx, b.ej, cv, b.ei, b.u0, b.u1);
        const Real prev = cur;
        if (val_u > cur) {
            cur = val_u;
            cu = nu;
        }
        if (cur <= prev * (Real(1) + Real(1e-14))) break;
    }
    consider(cu, cv);
    return {best, bu, bv};
}

/// Near-maximal pair recorder with clustering.
template <typename Real>
class ArgmaxRecorder {
public:
    ArgmaxRecorder(Real L, Real tol_argmax, int cap)
        : L_(L), tol_(tol_argmax), cap_(cap) {}

    void record(Real s, Real t, Real val) {
        if (val <= Real(0)) return;
        best_ = std::max(best_, val);
        if (val < best_ * (Real(1) - Real(2) * tol_)) return;
        if (s > t) std::swap(s, t);
        entries_.emplace_back(val, s, t);
        if (entries_.size() > 4096) compact(512);
    }

    Real best() const { return best_; }

    std::vector<std::tuple<Real, Real, Real>> finish() {
        compact(static_cast<size_t>(cap_));
        std::vector<std::tuple<Real, Real, Real>> out;
        for (const auto& [val, s, t] : entries_)
            if (val >= best_ * (Real(1) - tol_)) out.emplace_back(s, t, val);
        return out;
    }

private:
    void compact(size_t keep) {
        std::sort(entries_.begin(), entries_.end(),
                  [](const auto& a, const auto& b) { return a > b; });
        std::vector<std::tuple<Real, Real, Real>> kept;
        const Real radius = L_ * Real(1e-3);
        for (const auto& e : entries_) {
            const auto& [val, s, t] = e;
            if (val < best_ * (Real(1) - Real(2) * tol_)) break;
            bool close = false;
            for (const auto& [kv, ks, kt] : kept) {
                if (std::abs(ks - s) < radius && std::abs(kt - t) < radius) {
                    close = true;
                    break;
                }
            }
            if (!close) kept.push_back(e);
            if (kept.size() >= keep) break;
        }
        entries_ = std::move(kept);
    }

    Real L_;
    Real tol_;
    int cap_;
    Real best_ = Real(1);
    std::vector<std::tuple<Real, Real, Real>> entries_;  // (val, s, t)
};

template <typename Real>
struct SearchResult {
    Real delta;
    std::vector<std::tuple<Real, Real, Real>> near_best;  // (s, t, value)
};

template <typename Real>
SearchResult<Real> distortion_search(const PolygonalCurve<Real>& curve,
                                     const DistortionOptions<Real>& opts) {
    const PairContext<Real> ctx(curve);
    const int m = ctx.m;
    ArgmaxRecorder<Real> rec(ctx.L, opts.tol_argmax, opts.max_argmax);

    auto eval_rec = [&](int ei, Real u, int ej, Real v) {
        const Real val = ctx.eval(ei, u, ej, v);
        if (val > Real(0)) rec.record(ctx.cum[ei] + u, ctx.cum[ej] + v, val);
        return val;
    };

    // Seed evaluations: vertex pairs, midpoint pairs, and the symmetric
    // corner pairs that realize sec(phi/2) on adjacent edges.
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            eval_rec(i, Real(0), j, Real(0));
            eval_rec(i, ctx.len[i] / Real(2), j, ctx.len[j] / Real(2));
        }
        if (!ctx.closed) eval_rec(i, Real(0), m - 1, ctx.len[m - 1]);
    }
    for (int e = 0; e < m; ++e) {
        const int enext = (e + 1) % m;
        if (!ctx.closed && e + 1 >= m) continue;
        const Real a =
            std::min({ctx.len[e], ctx.len[enext], ctx.L / Real(4)}) / Real(2);
        eval_rec(e, ctx.len[e] - a, enext, a);
    }

    // Cell bounds and branch-and-bound refinement.
    using Box = CellBox<Real>;
    auto cmp = [](const Box& a, const Box& b) { return a.bound < b.bound; };
    std::priority_queue<Box, std::vector<Box>, decltype(cmp)> heap(cmp);

    auto cell_ds_bound = [&](int i, int j) {
        const Real kf = ctx.forward_curvature(i, j);
        Real ds = kf <= pi_v<Real> ? sec_half(kf)
                                   : std::numeric_limits<Real>::infinity();
        if (ctx.closed) {
            const Real kb = ctx.forward_curvature(j, i);
            if (kb <= pi_v<Real>) ds = std::min(ds, sec_half(kb));
        }
        return ds;
    };

    std::vector<Real> ds_cache(static_cast<size_t>(m) * m, Real(-1));
    auto thresh = [&] { return rec.best() * (Real(1) + opts.tol_rel); };

    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            const Real ds = cell_ds_bound(i, j);
            ds_cache[static_cast<size_t>(i) * m + j] = ds;
            const Real cheap = box_bound_cheap(ctx, i, j, Real(0), ctx.len[i],
                                               Real(0), ctx.len[j], ds);
            if (cheap <= thresh()) continue;
            const Real bound = box_bound(ctx, i, j, Real(0), ctx.len[i], Real(0),
                                         ctx.len[j], ds);
            if (bound > thresh())
                heap.push({i, j, Real(0), ctx.len[i], Real(0), ctx.len[j], bound, 0});
        }
    }

    while (!heap.empty()) {
        Box box = heap.top();
        heap.pop();
        if (box.bound <= thresh()) break;
        const auto [val, u, v] = box_max(ctx, box);
        if (val > Real(0)) rec.record(ctx.cum[box.ei] + u, ctx.cum[box.ej] + v, val);
        if (box.bound <= thresh() || box.depth >= opts.max_depth) continue;
        const Real ds = ds_cache[static_cast<size_t>(box.ei) * m + box.ej];
        const Real um = (box.u0 + box.u1) / Real(2);
        const Real vm = (box.v0 + box.v1) / Real(2);
        const Real us[3] = {box.u0, um, box.u1};
        const Real vs[3] = {box.v0, vm, box.v1};
        for (int a = 0; a < 2; ++a) {
            for (int k = 0; k < 2; ++k) {
                const Real bound = box_bound(ctx, box.ei, box.ej, us[a], us[a + 1],
                                             vs[k], vs[k + 1], ds);
                if (bound > thresh())
                    heap.push({box.ei, box.ej, us[a], us[a + 1], vs[k], vs[k + 1],
                               bound, box.depth + 1});
            }
        }
    }

    SearchResult<Real> res;
    res.near_best = rec.finish();
    res.delta = rec.best();
    return res;
}

}  // namespace detail

/// The distortion supremum alone (no sampling), certified to
/// opts.tol_rel relative. The curve must be embedded.
template <typename Real>
Real distortion_value(const PolygonalCurve<Real>& curve,
                      const DistortionOptions<Real>& opts = {}) {
    const auto emb = check_embedded(curve);
    if (!emb)
        throw std::domain_error(
            "distortion: curve is not embedded (dq is unbounded near edge "
            "crossings)");
    return detail::distortion_search(curve, opts).delta;
}

/// D(s) = max_t dq(s, t), with the diagonal limit value 1. Also reports the
/// maximizing t. Exact per edge (closed-form stationary points).
template <typename Real>
std::pair<Real, Real> D_of_s_with_argmax(const PolygonalCurve<Real>& curve,
                                         Real s) {
    const detail::PairContext<Real> ctx(curve);
    s = curve.wrap(s);
    const auto loc = curve.locate(s);
    Real best = Real(1);  // diagonal limit (one-sided limits equal 1)
    Real best_t = curve.wrap(s + curve.length() / Real(2));
    for (int j = 0; j < ctx.m; ++j) {
        if (j == loc.edge) continue;  // same-edge pairs have dq == 1
        const auto [val, v] =
            detail::max_against_edge(ctx, loc.edge, loc.offset, j, Real(0),
                                     ctx.len[j]);
        if (val > best) {
            best = val;
            best_t = ctx.cum[j] + v;
        }
    }
    return {best, best_t};
}

template <typename Real>
Real D_of_s(const PolygonalCurve<Real>& curve, Real s) {
    return D_of_s_with_argmax(curve, s).first;
}

namespace detail {

template <typename Real>
struct ShadowData {
    std::vector<Real> s;
    std::vector<Real> d_values;
    std::vector<Real> d_argmax;
    std::vector<Real> envelope;
    Real density;
};

/// Uniform D samples plus the running local maximum over a +-3 sample
/// window; the window maximum makes the sampled envelope upper
/// semicontinuous by construction.
template <typename Real>
ShadowData<Real> shadow_data(const PolygonalCurve<Real>& curve, Real density) {
    const Real L = curve.length();
    if (density <= Real(0))
        density = std::max(Real(256), Real(4) * curve.vertex_count()) / L;
    int count = std::max(8, static_cast<int>(std::ceil(L * density)));
    ShadowData<Real> out;
    out.density = density;
    const bool closed = curve.closed();
    const Real spacing = closed ? L / count : L / (count - 1);
    for (int k = 0; k < count; ++k) {
        const Real s = std::min(Real(k) * spacing, L);
        const auto [val, t] = D_of_s_with_argmax(curve, s);
        out.s.push_back(s);
        out.d_values.push_back(val);
        out.d_argmax.push_back(t);
    }
    const int w = 3;
    out.envelope.resize(out.s.size());
    const int n = static_cast<int>(out.s.size());
    for (int k = 0; k < n; ++k) {
        Real m = Real(0);
        for (int off = -w; off <= w; ++off) {
            int idx = k + off;
            if (closed)
                idx = (idx % n + n) % n;
            else
                idx = std::clamp(idx, 0, n - 1);
            m = std::max(m, out.d_values[static_cast<size_t>(idx)]);
        }
        out.envelope[static_cast<size_t>(k)] = m;
    }
    return out;
}

}  // namespace detail

/// Sampled distortion shadow: s -> upper envelope of D.
template <typename Real>
std::vector<ShadowSample<Real>> shadow(const PolygonalCurve<Real>& curve,
                                       Real density = Real(0)) {
    const auto data = detail::shadow_data(curve, density);
    std::vector<ShadowSample<Real>> out;
    out.reserve(data.s.size());
    for (size_t k = 0; k < data.s.size(); ++k)
        out.push_back({data.s[k], data.envelope[k]});
    return out;
}

/// All sampled k-distortion realizing chords: pairs whose upper-envelope
/// distortion quotient reaches k - tol. One entry per qualifying sample, so
/// continua of chords show up as runs of samples.
template <typename Real>
std::vector<DrcEntry<Real>> find_drcs(const PolygonalCurve<Real>& curve, Real k,
                                      Real tol, Real density = Real(0)) {
    if (!(k > Real(1)))
        throw std::invalid_argument("find_drcs: k must exceed 1");
    const auto data = detail::shadow_data(curve, density);
    std::vector<DrcEntry<Real>> out;
    for (size_t i = 0; i < data.s.size(); ++i) {
        if (data.envelope[i] >= k - tol)
            out.push_back({data.s[i], data.d_argmax[i], data.envelope[i]});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Thickness
// ---------------------------------------------------------------------------

namespace detail {

template <typename Real>
struct TauBox {
    int ei, ej;
    Real u0, u1, v0, v1;
    Real minchord;
    Real dq_bound;
    int depth;
};

}  // namespace detail

template <typename Real>
struct ThicknessResult {
    Real tau = std::numeric_limits<Real>::infinity();
    ChordPair<Real> realizing{Real(0), Real(0)};
    bool finite = false;
};

/// b-distortion thickness: the infimal chord length among pairs with
/// dq >= b; +infinity when no pair qualifies. Branch-and-bound over cells in
/// order of increasing chord lower bound.
template <typename Real>
ThicknessResult<Real> thickness_detail(const PolygonalCurve<Real>& curve_in,
                                       Real b) {
    if (!(b > Real(1)))
        throw std::invalid_argument("thickness: threshold b must exceed 1");
    // Work at unit length so tolerances are scale free; map the realizing
    // pair back to the input curve at the end.
    const Real L_in = curve_in.length();
    const PolygonalCurve<Real> curve = curve_in.scaled(Real(1) / L_in);
    const detail::PairContext<Real> ctx(curve);
    const int m = ctx.m;

    ThicknessResult<Real> res;
    Real tau = std::numeric_limits<Real>::infinity();
    ChordPair<Real> arg{Real(0), Real(0)};

    auto offer = [&](int ei, Real u, int ej, Real v) {
        const Real val = ctx.eval(ei, u, ej, v);
        if (val >= b) {
            const Real chord = (ctx.point(ei, u) - ctx.point(ej, v)).norm();
            if (chord < tau) {
                tau = chord;
                arg = {ctx.cum[ei] + u, ctx.cum[ej] + v};
            }
        }
        return val;
    };

    using Box = detail::TauBox<Real>;
    auto cmp = [](const Box& a, const Box& k) { return a.minchord > k.minchord; };
    std::priority_queue<Box, std::vector<Box>, decltype(cmp)> heap(cmp);

    auto make_box = [&](int i, int j, Real u0, Real u1, Real v0, Real v1,
                        Real ds, int depth) {
        const auto c = segment_segment_closest(ctx.point(i, u0), ctx.point(i, u1),
                                               ctx.point(j, v0), ctx.point(j, v1));
        const Real bound = detail::box_bound(ctx, i, j, u0, u1, v0, v1, ds);
        return Box{i, j, u0, u1, v0, v1, c.distance, bound, depth};
    };

    auto cell_ds = [&](int i, int j) {
        const Real kf = ctx.forward_curvature(i, j);
        Real ds = kf <= pi_v<Real> ? detail::sec_half(kf)
                                   : std::numeric_limits<Real>::infinity();
        if (ctx.closed) {
            const Real kb = ctx.forward_curvature(j, i);
            if (kb <= pi_v<Real>) ds = std::min(ds, detail::sec_half(kb));
        }
        return ds;
    };

    std::vector<Real> ds_cache(static_cast<size_t>(m) * m, Real(0));
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            offer(i, Real(0), j, Real(0));
            const Real ds = cell_ds(i, j);
            ds_cache[static_cast<size_t>(i) * m + j] = ds;
            Box box = make_box(i, j, Real(0), ctx.len[i], Real(0), ctx.len[j], ds, 0);
            if (box.dq_bound >= b) heap.push(box);
        }
    }

    const Real term = Real(1) - Real(1e-13);
    const int max_depth = 56;
    while (!heap.empty()) {
        Box box = heap.top();
        heap.pop();
        if (box.minchord >= tau * term) break;
        if (box.dq_bound < b) continue;
        // Feasible-point hunt: take the dq maximizer, then slide toward the
        // chord minimizer while staying feasible.
        const auto [val, u, v] = detail::box_max(ctx, detail::CellBox<Real>{
                                                          box.ei, box.ej, box.u0,
                                                          box.u1, box.v0, box.v1,
                                                          box.dq_bound, box.depth});
        if (val >= b) {
            offer(box.ei, u, box.ej, v);
            const auto c = segment_segment_closest(
                ctx.point(box.ei, box.u0), ctx.point(box.ei, box.u1),
                ctx.point(box.ej, box.v0), ctx.point(box.ej, box.v1));
            const Real cu = box.u0 + c.s * (box.u1 - box.u0);
            const Real cv = box.v0 + c.t * (box.v1 - box.v0);
            Real wlo = Real(0), whi = Real(1);  // from (u,v) toward (cu,cv)
            for (int it = 0; it < 60; ++it) {
                const Real w = (wlo + whi) / Real(2);
                const Real uu = u + w * (cu - u), vv = v + w * (cv - v);
                if (ctx.eval(box.ei, uu, box.ej, vv) >= b)
                    wlo = w;
                else
                    whi = w;
            }
            offer(box.ei, u + wlo * (cu - u), box.ej, v + wlo * (cv - v));
        }
        if (box.depth >= max_depth) {
            // box is pointlike; accept its chord bound if still plausible
            if (box.dq_bound >= b && box.minchord < tau) {
                tau = box.minchord;
                arg = {ctx.cum[box.ei] + (box.u0 + box.u1) / Real(2),
                       ctx.cum[box.ej] + (box.v0 + box.v1) / Real(2)};
            }
            continue;
        }
        const Real ds = ds_cache[static_cast<size_t>(box.ei) * m + box.ej];
        const Real um = (box.u0 + box.u1) / Real(2);
        const Real vm = (box.v0 + box.v1) / Real(2);
        const Real us[3] = {box.u0, um, box.u1};
        const Real vs[3] = {box.v0, vm, box.v1};
        for (int a = 0; a < 2; ++a) {
            for (int k = 0; k < 2; ++k) {
                Box child = make_box(box.ei, box.ej, us[a], us[a + 1], vs[k],
                                     vs[k + 1], ds, box.depth + 1);
                if (child.dq_bound >= b && child.minchord < tau) heap.push(child);
            }
        }
    }

    if (std::isfinite(tau)) {
        res.finite = true;
        res.realizing = {curve_in.wrap(arg.s * L_in), curve_in.wrap(arg.t * L_in)};
        res.tau = curve_in.chord_distance(res.realizing);
    }
    return res;
}

template <typename Real>
Real thickness(const PolygonalCurve<Real>& curve, Real b) {
    return thickness_detail(curve, b).tau;
}

/// Rescale so that the b-distortion thickness equals tau_target (dq values
/// are scale invariant, so only the scale changes).
template <typename Real>
PolygonalCurve<Real> normalize_thickness(const PolygonalCurve<Real>& curve,
                                         Real b, Real tau_target = Real(1)) {
    const auto t = thickness_detail(curve, b);
    if (!t.finite || !(t.tau > Real(0)))
        throw std::domain_error(
            "normalize_thickness: thickness is infinite; nothing to pin");
    return curve.scaled(tau_target / t.tau);
}

// ---------------------------------------------------------------------------
// Denne-Sullivan bound check
// ---------------------------------------------------------------------------

template <typename Real>
struct DsBoundReport {
    bool applicable = true;  // false when the arc's curvature exceeds pi
    Real kappa = Real(0);
    Real bound = Real(1);
    Real max_dq = Real(1);
    bool ok = true;
};

/// Checks dq <= sec(kappa/2) on the arc (lo, hi). Closed-interval curvature
/// (endpoint atoms included) keeps the bound conservative; max_dq is the
/// distortion of the extracted arc.
template <typename Real>
DsBoundReport<Real> ds_bound_check(const PolygonalCurve<Real>& curve,
                                   const Interval<Real>& iv) {
    DsBoundReport<Real> rep;
    rep.kappa = curvature_measure(curve).mass_closed(iv);
    if (rep.kappa > pi_v<Real>) {
        rep.applicable = false;
        rep.ok = true;
        return rep;
    }
    rep.bound = detail::sec_half(rep.kappa);
    const auto sub = curve.sub_curve(iv.lo, iv.hi);
    rep.max_dq = distortion_value(sub);
    rep.ok = rep.max_dq <= rep.bound + Real(1e-9) * std::max(Real(1), rep.bound);
    return rep;
}

// ---------------------------------------------------------------------------
// Full report
// ---------------------------------------------------------------------------

/// The full distortion report: supremum, near-maximal pairs, shadow samples,
/// near-delta distortion realizing chords, and optionally tau_b.
template <typename Real>
DistortionReport<Real> distortion(const PolygonalCurve<Real>& curve,
                                  Real sample_density = Real(0),
                                  Real thickness_b = Real(0),
                                  const DistortionOptions<Real>& opts = {}) {
    const auto emb = check_embedded(curve);
    if (!emb)
        throw std::domain_error(
            "distortion: curve is not embedded (dq is unbounded near edge "
            "crossings)");
    DistortionReport<Real> rep;
    auto search = detail::distortion_search(curve, opts);
    rep.delta = search.delta;
    for (const auto& [s, t, val] : search.near_best)
        rep.argmax_pairs.push_back({s, t});

    const auto data = detail::shadow_data(curve, sample_density);
    rep.sample_density = data.density;
    for (size_t k = 0; k < data.s.size(); ++k)
        rep.shadow.push_back({data.s[k], data.envelope[k]});
    const Real k_drc = rep.delta * (Real(1) - opts.tol_argmax);
    if (k_drc > Real(1)) {
        for (size_t i = 0; i < data.s.size(); ++i)
            if (data.envelope[i] >= k_drc)
                rep.drcs.push_back({data.s[i], data.d_argmax[i], data.envelope[i]});
    }
    if (thickness_b > Real(1)) rep.thickness = thickness(curve, thickness_b);
    return rep;
}

}  // namespace distort
