#pragma once

// Constrained simulated annealing over the feasible set U_C: curves of the
// seed's knot type (procedurally, via triangle-valid moves only) with
// distortion below C and b-distortion thickness pinned to tau_min. Also the
// saturation diagnostic for the main structural prediction: on a length
// minimizer every non-straight window should contain a near-delta drc
// endpoint.

#include "distort/moves.hpp"

#include <cstdint>

namespace distort {

// ---------------------------------------------------------------------------
// Membership in U_C
// ---------------------------------------------------------------------------

template <typename Real>
struct UCReport {
    bool ok = false;
    bool closed = false;
    bool embedded = false;
    Real delta = std::numeric_limits<Real>::quiet_NaN();
    Real tau = std::numeric_limits<Real>::quiet_NaN();
    bool delta_ok = false;
    bool tau_ok = false;
};

/// Checks distortion < C and thickness(b) >= tau_min. Open curves are
/// excluded (knots are closed); knot-type membership itself is procedural:
/// feasibility of the moves that produced the curve, not a test here.
template <typename Real>
UCReport<Real> in_UC(const PolygonalCurve<Real>& curve, Real C, Real b,
                     Real tau_min = Real(1), Real tol = Real(0)) {
    if (!(C > Real(1)) || !(b > Real(1)))
        throw std::invalid_argument("in_UC: need C > 1 and b > 1");
    UCReport<Real> rep;
    rep.closed = curve.closed();
    rep.embedded = static_cast<bool>(check_embedded(curve));
    if (!rep.closed || !rep.embedded) return rep;
    rep.delta = distortion_value(curve);
    rep.delta_ok = rep.delta < C + tol;
    rep.tau = thickness(curve, b);
    rep.tau_ok = rep.tau >= tau_min - tol;
    rep.ok = rep.delta_ok && rep.tau_ok;
    return rep;
}

// ---------------------------------------------------------------------------
// Annealing
// ---------------------------------------------------------------------------

enum class AnnealObjective { length, distortion };
enum class MoveKind { inscribe = 0, corner = 1, perturb = 2 };

template <typename Real>
struct AnnealConfig {
    AnnealObjective objective = AnnealObjective::length;
    Real C = Real(2);                  // hard distortion cap
    Real b = Real(1.5697963267948965); // pi/2 - 1e-3
    Real tau_min = Real(1);
    std::uint64_t seed = 1;
    Real t_initial = Real(0.1);
    Real cooling = Real(0.999);
    int steps = 1000;
    Real w_inscribe = Real(1);
    Real w_corner = Real(1);
    Real w_perturb = Real(2);
    Real eps_prop = Real(0);           // 0: half the current cap margin
    Real tol_constraint = Real(1e-9);
    Real perturb_scale = Real(0.3);    // relative to mean edge length
    Real inscribe_window = Real(0.15); // interval width, fraction of L

    void validate() const {
        if (!(C > Real(1)) || !(b > Real(1)))
            throw std::invalid_argument("AnnealConfig: need C > 1 and b > 1");
        if (!(cooling > Real(0)) || !(cooling < Real(1)))
            throw std::invalid_argument("AnnealConfig: cooling must be in (0,1)");
        if (steps < 0) throw std::invalid_argument("AnnealConfig: steps < 0");
        if (w_inscribe < Real(0) || w_corner < Real(0) || w_perturb < Real(0) ||
            !(w_inscribe + w_corner + w_perturb > Real(0)))
            throw std::invalid_argument("AnnealConfig: bad move weights");
        if (!(t_initial > Real(0)))
            throw std::invalid_argument("AnnealConfig: t_initial must be > 0");
        if (!(tau_min > Real(0)))
            throw std::invalid_argument("AnnealConfig: tau_min must be > 0");
    }
};

template <typename Real>
struct AnnealStep {
    int step;
    Real temperature;
    Real length;
    Real delta;
    Real tau;
    MoveKind move;
    bool accepted;
    bool feasible;
};

template <typename Real>
struct AnnealTrace {
    std::vector<AnnealStep<Real>> steps;
    int accepted = 0;
};

template <typename Real>
struct AnnealResult {
    PolygonalCurve<Real> best;
    PolygonalCurve<Real> final;
    Real best_objective;
    AnnealTrace<Real> trace;
};

namespace detail {

/// Deterministic uniform draws from a seeded 64-bit stream; avoids the
/// library-defined distributions so traces reproduce across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next_u64() {
        // splitmix64
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform() {  // in [0, 1)
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int n) {  // in [0, n)
        return static_cast<int>(uniform() * n) % n;
    }

private:
    std::uint64_t state_;
};

}  // namespace detail

/// Metropolis annealing with hard constraints: proposals come from
/// {inscribe_arc, shorten_corner, vertex perturbation}, all knot-type
/// preserving; a proposal survives only if the result is embedded, has
/// distortion below C, and finite thickness; accepted states are rescaled to
/// thickness tau_min. Pure function of (seed curve, config).
template <typename Real>
AnnealResult<Real> anneal(const PolygonalCurve<Real>& seed_curve,
                          const AnnealConfig<Real>& cfg) {
    cfg.validate();
    if (!seed_curve.closed())
        throw std::invalid_argument("anneal: seed curve must be closed");
    PolygonalCurve<Real> cur = [&] {
        try {
            return normalize_thickness(seed_curve, cfg.b, cfg.tau_min);
        } catch (const std::domain_error&) {
            throw std::invalid_argument(
                "anneal: seed has infinite thickness at this b");
        }
    }();
    {
        const auto uc = in_UC(cur, cfg.C, cfg.b, cfg.tau_min, cfg.tol_constraint);
        if (!uc.ok)
            throw std::invalid_argument("anneal: seed curve is not in U_C");
    }

    detail::Rng rng(cfg.seed);
    Real cur_delta = distortion_value(cur);
    auto objective = [&](const PolygonalCurve<Real>& c, Real delta) {
        return cfg.objective == AnnealObjective::length ? c.length() : delta;
    };
    Real cur_obj = objective(cur, cur_delta);

    AnnealResult<Real> result{cur, cur, cur_obj, {}};
    result.trace.steps.reserve(static_cast<size_t>(cfg.steps));

    const Real w_total = cfg.w_inscribe + cfg.w_corner + cfg.w_perturb;
    for (int step = 0; step < cfg.steps; ++step) {
        const Real temp =
            cfg.t_initial * std::pow(cfg.cooling, static_cast<Real>(step));
        const Real pick = Real(rng.uniform()) * w_total;
        const MoveKind kind = pick < cfg.w_inscribe ? MoveKind::inscribe
                              : pick < cfg.w_inscribe + cfg.w_corner
                                  ? MoveKind::corner
                                  : MoveKind::perturb;

        AnnealStep<Real> row{step, temp, cur.length(), cur_delta, cfg.tau_min,
                             kind, false, false};
        const int n = cur.vertex_count();
        const Real L = cur.length();

        bool built = false;
        PolygonalCurve<Real> cand = cur;
        try {
            switch (kind) {
                case MoveKind::inscribe: {
                    const Real lo = Real(rng.uniform()) * L;
                    const Real width =
                        L * cfg.inscribe_window * Real(0.25 + 0.75 * rng.uniform());
                    const Real dev =
                        (L / Real(n)) * Real(0.05 + 0.45 * rng.uniform());
                    cand = inscribe_arc(cur, Interval<Real>{lo, lo + width}, dev);
                    built = true;
                    break;
                }
                case MoveKind::corner: {
                    const int vi = rng.uniform_int(n);
                    const Real cut = Real(0.02 + 0.38 * rng.uniform());
                    cand = shorten_corner(cur, vi, cut);
                    built = true;
                    break;
                }
                case MoveKind::perturb: {
                    const int vi = rng.uniform_int(n);
                    const Real scale = cfg.perturb_scale * (L / Real(n)) *
                                       Real(0.1 + 0.9 * rng.uniform());
                    const Vec3<Real> offset(Real(rng.uniform(-1, 1)),
                                            Real(rng.uniform(-1, 1)),
                                            Real(rng.uniform(-1, 1)));
                    const Vec3<Real> moved =
                        cur.vertex(vi) + scale * offset;
                    if (!vertex_move_valid(cur, vi, moved)) break;
                    std::vector<Vec3<Real>> verts = cur.vertices();
                    verts[static_cast<size_t>(vi)] = moved;
                    cand = PolygonalCurve<Real>(std::move(verts), true,
                                                cur.name());
                    built = true;
                    break;
                }
            }
        } catch (const MoveRejectedError&) {
        } catch (const NoOpMoveError&) {
        } catch (const std::invalid_argument&) {
        }

        if (built) {
            // hard feasibility: embedded, delta < C, finite thickness
            if (check_embedded(cand)) {
                const Real cand_delta = distortion_value(cand);
                if (cand_delta < cfg.C + cfg.tol_constraint) {
                    const Real cand_tau = thickness(cand, cfg.b);
                    if (std::isfinite(cand_tau) && cand_tau > Real(0)) {
                        PolygonalCurve<Real> normed =
                            cand.scaled(cfg.tau_min / cand_tau);
                        const Real cand_obj = objective(normed, cand_delta);
                        row.feasible = true;
                        row.length = normed.length();
                        row.delta = cand_delta;
                        row.tau = cfg.tau_min;
                        const Real diff = cand_obj - cur_obj;
                        if (diff <= Real(0) ||
                            rng.uniform() < std::exp(double(-diff / temp))) {
                            cur = std::move(normed);
                            cur_delta = cand_delta;
                            cur_obj = cand_obj;
                            row.accepted = true;
                            ++result.trace.accepted;
                            if (cur_obj < result.best_objective) {
                                result.best = cur;
                                result.best_objective = cur_obj;
                            }
                        }
                    }
                }
            }
        }
        result.trace.steps.push_back(row);
    }
    result.final = cur;
    return result;
}

// ---------------------------------------------------------------------------
// Saturation diagnostic
// ---------------------------------------------------------------------------

template <typename Real>
struct SaturationWindow {
    Real lo;
    Real hi;
    Real kappa;       // open-interval curvature of the window
    Real max_shadow;  // largest sampled envelope value in the window
    bool straight;    // kappa < kappa_min
    bool drc_hit;     // max_shadow >= delta - eta
    bool saturated;   // straight || drc_hit
};

template <typename Real>
struct SaturationReport {
    Real fraction = Real(0);
    Real delta = Real(1);
    std::vector<SaturationWindow<Real>> windows;
};

/// Partitions the parameter circle into windows; each is "saturated" when it
/// is straight (curvature below kappa_min) or contains a sampled point whose
/// shadow reaches delta - eta. On the known minimizer (the circle) every
/// window saturates; a shortfall localizes the arcs the main structural
/// statement would shorten.
template <typename Real>
SaturationReport<Real> saturation_report(const PolygonalCurve<Real>& curve,
                                         Real kappa_min = Real(1e-6),
                                         Real eta = Real(1e-2),
                                         Real window = Real(0)) {
    SaturationReport<Real> rep;
    rep.delta = distortion_value(curve);
    const Real L = curve.length();
    if (!(window > Real(0))) window = L / Real(64);
    const int count = std::max(1, static_cast<int>(std::ceil(L / window)));
    const Real density = Real(8) * Real(count) / L;  // >= 8 samples per window
    const auto data = detail::shadow_data(curve, density);
    const auto measure = curvature_measure(curve);

    int saturated = 0;
    for (int w = 0; w < count; ++w) {
        SaturationWindow<Real> win;
        win.lo = L * Real(w) / Real(count);
        win.hi = L * Real(w + 1) / Real(count);
        win.kappa = measure.mass_open({win.lo, win.hi});
        win.max_shadow = Real(0);
        for (size_t k = 0; k < data.s.size(); ++k)
            if (data.s[k] >= win.lo && data.s[k] < win.hi)
                win.max_shadow = std::max(win.max_shadow, data.envelope[k]);
        win.straight = win.kappa < kappa_min;
        win.drc_hit = win.max_shadow >= rep.delta - eta;
        win.saturated = win.straight || win.drc_hit;
        if (win.saturated) ++saturated;
        rep.windows.push_back(win);
    }
    rep.fraction = Real(saturated) / Real(count);
    return rep;
}

}  // namespace distort
