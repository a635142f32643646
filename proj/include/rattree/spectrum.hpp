#pragma once

// Bridge between the exact tree analysis and floating-point dynamics at a
// concrete parameter value: realization of tree points in the half-space,
// the equivalence residual against the barycentric extension, numeric
// multiplier spectra along a parameter ladder, and preimage radii of the
// basepoint under the extension.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "barycenter.hpp"
#include "tree_dynamics.hpp"

namespace rattree {

// Realize a tree point at a parameter value: the ball B(c(t), |t|^q) in the
// fiber becomes the point (c(t), |t|^q) of the upper half-space.
inline HPoint realize(const TypeIIPoint& x, Complex t0) {
    double at = std::abs(t0);
    if (!(at > 0.0) || !std::isfinite(at))
        throw numerical_error("realization needs 0 < |t| finite");
    Complex z = x.center.evaluate(t0);
    double h = std::pow(at, x.radius_val.to_double());
    if (!std::isfinite(h) || !(h > 0.0) || !std::isfinite(std::abs(z)))
        throw numerical_error("realized point overflows double precision");
    return {z, h};
}

// Specialize the family at a parameter value: every coefficient series is
// evaluated at t0, giving an honest rational map on the sphere.
inline SphereMap instantiate(const BerkMap& f, Complex t0) {
    if (!(std::abs(t0) > 0.0) || !std::isfinite(std::abs(t0)))
        throw numerical_error("instantiation needs 0 < |t| finite");
    auto eval_poly = [&](const PuiseuxPolynomial& p) {
        std::vector<Complex> c(static_cast<std::size_t>(std::max(p.degree() + 1, 0)));
        for (int i = 0; i <= p.degree(); ++i)
            c[static_cast<std::size_t>(i)] = p.coeff(i).evaluate(t0);
        return c;
    };
    return SphereMap(eval_poly(f.num()), eval_poly(f.den()));
}

// Distance between the numeric extension acting on the realized point and
// the realization of the exact image, in units of log(1/|t|).  Tends to
// zero along t -> 0 when the extension and the tree action agree.
inline double equivalence_residual(const BerkMap& f, const TypeIIPoint& x, Complex t0,
                                   int n_samples = default_sphere_samples,
                                   const Rat& order = prec::default_order) {
    double at = std::abs(t0);
    if (!(at > 0.0 && at < 1.0))
        throw numerical_error("equivalence residual needs 0 < |t| < 1");
    SphereMap ft = instantiate(f, t0);
    HPoint numeric = barycentric_extension_eval(ft, realize(x, t0), n_samples);
    HPoint exact = realize(apply_map(f, x, order), t0);
    return h3_distance(numeric, exact) / (-std::log(at));
}

// ---------------------------------------------------------------------------
// Numeric multiplier spectrum along a ladder of parameter values.

// One observed periodic point at one parameter value.  The multiplier is the
// derivative of the period-fold iterate at z0, i.e. the cycle multiplier.
struct MultiplierSample {
    int period = 1;
    Complex t{0.0, 0.0};
    Complex z0{0.0, 0.0};
    Complex multiplier{0.0, 0.0};
    std::optional<int> cycle; // index into MultiplierSpectrum::fits
};

// A cycle continued across the ladder: the growth rate of log|multiplier|
// in units of log(1/|t|) (which estimates the translation length of the
// matching exact cycle) and the matching exact record when one is found.
struct CycleFit {
    int cycle = 0;
    int period = 1;
    std::optional<int> record; // index into MultiplierSpectrum::algebraic.records
    double slope = 0.0;
    bool superattracting = false;
};

struct MultiplierSpectrum {
    std::vector<MultiplierSample> samples;
    std::vector<CycleFit> fits;
    PeriodicEndsReport algebraic;
    std::vector<std::string> notes;
};

namespace detail {

// Stand-in valuation for an exact zero (+) and for the point at infinity (-)
// when cycles are compared through their member valuation profiles.
inline constexpr double val_clamp = 1e9;

struct LevelRoot {
    Complex z{0.0, 0.0};
    int period = 1;
    Complex multiplier{0.0, 0.0};
    std::vector<ProjPoint> orbit; // the cycle through z, in orbit order
};

struct CycleObs {
    int period = 1;
    int inf_members = 0;          // orbit members at infinity (never finite roots)
    std::vector<int> members;     // root indices, sorted by (|z| desc, arg asc)
    std::vector<double> v_single; // log|z| / log|t| per member
    double loglam = 0.0;          // log of the cycle multiplier modulus
    bool zero_mult = false;       // the multiplier vanishes exactly
    int id = -1;                  // stable id across the ladder
};

struct SpectrumLevel {
    Complex t{0.0, 0.0};
    std::vector<LevelRoot> roots;
    std::vector<CycleObs> cycles;
    std::vector<int> cycle_of; // per root
};

inline cpoly::Poly times_z(const cpoly::Poly& p) {
    cpoly::Poly r;
    r.reserve(p.size() + 1);
    r.push_back(Complex(0.0, 0.0));
    r.insert(r.end(), p.begin(), p.end());
    return r;
}

inline cpoly::Poly poly_sub(const cpoly::Poly& a, const cpoly::Poly& b) {
    cpoly::Poly r(std::max(a.size(), b.size()), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] -= b[i];
    return r;
}

inline void poly_axpy(cpoly::Poly& acc, const cpoly::Poly& p, Complex c) {
    if (acc.size() < p.size()) acc.resize(p.size(), Complex(0.0, 0.0));
    for (std::size_t i = 0; i < p.size(); ++i) acc[i] += c * p[i];
}

inline cpoly::Poly reversed_poly(cpoly::Poly p, std::size_t size) {
    p.resize(size, Complex(0.0, 0.0));
    std::reverse(p.begin(), p.end());
    return p;
}

// Newton polish that stays numerically sane for huge roots: work in the
// w = 1/z chart when |z| > 1 so polynomial evaluation cannot overflow.
inline Complex polish_projective(const cpoly::Poly& p, Complex z) {
    if (std::abs(z) <= 1.0) return cpoly::polish_root(p, z);
    cpoly::Poly rev = reversed_poly(p, p.size());
    Complex w = cpoly::polish_root(rev, Complex(1.0, 0.0) / z);
    if (std::abs(w) == 0.0) return z;
    return Complex(1.0, 0.0) / w;
}

// Derivative of the rational pair N/D at a fixed point z of N/D, evaluated
// in the chart (z or 1/z) where the evaluation is well conditioned.  The
// multiplier of a fixed point is invariant under the change of chart, and
// conjugating by w = 1/z turns N/D into rev(D)/rev(N).
inline Complex pair_derivative(const cpoly::Poly& N, const cpoly::Poly& D, Complex z) {
    auto direct = [](const cpoly::Poly& n, const cpoly::Poly& d, Complex at) {
        Complex nv = cpoly::eval(n, at), dv = cpoly::eval(d, at);
        Complex dn = cpoly::eval(cpoly::derivative(n), at);
        Complex dd = cpoly::eval(cpoly::derivative(d), at);
        return (dn * dv - nv * dd) / (dv * dv);
    };
    if (std::abs(z) <= 1.0) return direct(N, D, z);
    std::size_t size = std::max(N.size(), D.size());
    return direct(reversed_poly(D, size), reversed_poly(N, size), Complex(1.0, 0.0) / z);
}

inline bool proj_is_infinity(const ProjPoint& p) {
    return std::abs(p.d) <= 1e-9 * std::abs(p.n);
}

// Scale-free separation of two finite points of the sphere: relative in the
// z chart near zero, relative in the 1/z chart near infinity (the formula
// |a-b| / min(|a|,|b|) covers both), plain distance at unit scale.  Exact
// zeros are a point of their own.
inline double point_separation(Complex a, Complex b) {
    double s = std::min(std::abs(a), std::abs(b));
    if (s == 0.0)
        return std::abs(a - b) == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(a - b) / s;
}

inline double proj_separation(const ProjPoint& p, Complex z0) {
    if (proj_is_infinity(p)) return std::numeric_limits<double>::infinity();
    return point_separation(p.n / p.d, z0);
}

inline double lsq_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) return 0.0;
    return sxy / sxx;
}

// All periodic points of f_t with least period up to q: composed iterate
// pairs, fixed-point polynomial roots per period, orbits, multipliers, and
// the grouping of the roots into cycles.
inline SpectrumLevel build_level(const SphereMap& ft, int q, Complex t,
                                 std::vector<std::string>& notes) {
    SpectrumLevel lev;
    lev.t = t;
    int d = ft.degree();
    std::string at_t = " at |t|=" + std::to_string(std::abs(t));

    // iterate pairs f^k = N_k / D_k, renormalized at every step
    std::vector<cpoly::Poly> Nk(static_cast<std::size_t>(q) + 1), Dk(Nk.size());
    Nk[1] = ft.num();
    Dk[1] = ft.den();
    for (int k = 2; k <= q; ++k) {
        std::vector<cpoly::Poly> npow(static_cast<std::size_t>(d) + 1), dpow(npow.size());
        npow[0] = {Complex(1.0, 0.0)};
        dpow[0] = npow[0];
        for (int i = 1; i <= d; ++i) {
            npow[i] = cpoly::multiply(npow[i - 1], Nk[k - 1]);
            dpow[i] = cpoly::multiply(dpow[i - 1], Dk[k - 1]);
        }
        cpoly::Poly N, D;
        for (int i = 0; i <= d; ++i) {
            cpoly::Poly basis = cpoly::multiply(npow[i], dpow[d - i]);
            poly_axpy(N, basis, ft.num()[static_cast<std::size_t>(i)]);
            poly_axpy(D, basis, ft.den()[static_cast<std::size_t>(i)]);
        }
        double scale = std::max(cpoly::max_abs(N), cpoly::max_abs(D));
        if (scale > 0.0) {
            for (auto& c : N) c /= scale;
            for (auto& c : D) c /= scale;
        }
        Nk[k] = std::move(N);
        Dk[k] = std::move(D);
    }

    int merged = 0;
    for (int qq = 1; qq <= q; ++qq) {
        cpoly::Poly R = poly_sub(Nk[qq], times_z(Dk[qq]));
        for (Complex z : cpoly::roots(R)) {
            z = polish_projective(R, z);
            if (!std::isfinite(std::abs(z))) continue;
            // least period via the orbit; roots of earlier rounds are skipped
            ProjPoint p{z, Complex(1.0, 0.0)};
            std::vector<ProjPoint> orbit{p};
            int least = 0;
            for (int k = 1; k <= qq; ++k) {
                p = ft.apply(p);
                if (proj_separation(p, z) < 1e-5) {
                    least = k;
                    break;
                }
                orbit.push_back(p);
            }
            if (least == 0) {
                notes.push_back("dropped an unresolved periodic orbit" + at_t);
                continue;
            }
            if (least != qq) continue; // found in its own round (or will be noted there)
            bool dup = false;
            for (const LevelRoot& r : lev.roots)
                if (point_separation(r.z, z) < 1e-7) {
                    dup = true;
                    break;
                }
            if (dup) {
                ++merged;
                continue;
            }
            LevelRoot lr;
            lr.z = z;
            lr.period = least;
            lr.orbit = std::move(orbit);
            lr.multiplier = pair_derivative(Nk[qq], Dk[qq], z);
            if (!std::isfinite(std::abs(lr.multiplier))) {
                notes.push_back("ill-conditioned multiplier" + at_t);
                lr.multiplier = Complex(std::numeric_limits<double>::infinity(), 0.0);
            }
            lev.roots.push_back(std::move(lr));
        }
    }
    if (merged > 0)
        notes.push_back("merged " + std::to_string(merged) +
                        " numerically coincident periodic points" + at_t);

    // group roots into cycles (union by orbit membership)
    std::size_t n = lev.roots.size();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            if (lev.roots[i].period != lev.roots[j].period) continue;
            bool same = false;
            for (const ProjPoint& m : lev.roots[i].orbit)
                if (proj_separation(m, lev.roots[j].z) < 1e-5) {
                    same = true;
                    break;
                }
            if (same) parent[find(static_cast<int>(i))] = find(static_cast<int>(j));
        }

    std::map<int, std::vector<int>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(static_cast<int>(i))].push_back(static_cast<int>(i));

    double logt = std::log(std::abs(t));
    for (auto& [rep, members] : groups) {
        CycleObs c;
        c.period = lev.roots[static_cast<std::size_t>(members.front())].period;
        std::sort(members.begin(), members.end(), [&](int a, int b) {
            double za = std::abs(lev.roots[a].z), zb = std::abs(lev.roots[b].z);
            if (za != zb) return za > zb;
            return std::arg(lev.roots[a].z) < std::arg(lev.roots[b].z);
        });
        c.members = members;
        for (int m : members) {
            double az = std::abs(lev.roots[m].z);
            double v = az == 0.0 ? val_clamp : std::log(az) / logt;
            c.v_single.push_back(std::clamp(v, -val_clamp, val_clamp));
        }
        for (const ProjPoint& m : lev.roots[static_cast<std::size_t>(members.front())].orbit)
            if (proj_is_infinity(m)) ++c.inf_members;
        double am = std::abs(lev.roots[static_cast<std::size_t>(members.front())].multiplier);
        if (am == 0.0)
            c.zero_mult = true;
        else
            c.loglam = std::log(am);
        lev.cycles.push_back(std::move(c));
    }
    std::sort(lev.cycles.begin(), lev.cycles.end(), [&](const CycleObs& a, const CycleObs& b) {
        if (a.period != b.period) return a.period < b.period;
        const LevelRoot& ra = lev.roots[static_cast<std::size_t>(a.members.front())];
        const LevelRoot& rb = lev.roots[static_cast<std::size_t>(b.members.front())];
        double za = std::abs(ra.z), zb = std::abs(rb.z);
        if (za != zb) return za > zb;
        return std::arg(ra.z) < std::arg(rb.z);
    });
    lev.cycle_of.assign(n, -1);
    for (std::size_t ci = 0; ci < lev.cycles.size(); ++ci)
        for (int m : lev.cycles[ci].members) lev.cycle_of[static_cast<std::size_t>(m)] = static_cast<int>(ci);
    return lev;
}

inline std::vector<double> record_profile(const PeriodicEndRecord& rec) {
    std::vector<double> p;
    for (const TypeIPoint& pt : rec.cycle) {
        if (pt.is_infinity()) {
            p.push_back(-val_clamp);
        } else {
            ExtRat v = pt.value->valuation();
            p.push_back(v.is_infinite() ? val_clamp
                                        : std::clamp(v.value().to_double(), -val_clamp, val_clamp));
        }
    }
    std::sort(p.begin(), p.end());
    return p;
}

} // namespace detail

// Periodic points of the instantiated maps along a ladder of parameter
// values, with least periods, cycle multipliers, per-cycle growth rates of
// log|multiplier| against log(1/|t|), and a matching of the numeric cycles
// to the exact periodic-end records.
inline MultiplierSpectrum numeric_multiplier_spectrum(const BerkMap& f, int q,
                                                      std::vector<Complex> t_values,
                                                      const Rat& order = prec::default_order) {
    if (q < 1) throw numerical_error("period bound must be positive");
    if (t_values.size() < 2)
        throw numerical_error("multiplier spectrum needs at least two parameter values");
    for (Complex t : t_values) {
        double at = std::abs(t);
        if (!(at > 0.0 && at < 1.0))
            throw numerical_error("multiplier spectrum needs 0 < |t| < 1");
    }
    std::sort(t_values.begin(), t_values.end(),
              [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
    for (std::size_t i = 1; i < t_values.size(); ++i)
        if (!(std::abs(t_values[i]) < std::abs(t_values[i - 1])))
            throw numerical_error("parameter values must have distinct moduli");
    long long degq = 1;
    for (int i = 0; i < q; ++i) {
        degq *= std::max(f.degree(), 1);
        if (degq + 1 > cpoly::companion_cap)
            throw size_error("iterate degree exceeds the root-solver cap; lower the period bound");
    }

    MultiplierSpectrum out;
    out.algebraic = periodic_ends(f, q, order);
    if (out.algebraic.q_effective < q)
        out.notes.push_back("exact analysis clamped the period bound to " +
                            std::to_string(out.algebraic.q_effective));

    std::vector<detail::SpectrumLevel> levels;
    for (Complex t : t_values) {
        SphereMap ft = instantiate(f, t);
        if (ft.degree() != f.degree())
            out.notes.push_back("map degree drops at |t|=" + std::to_string(std::abs(t)));
        levels.push_back(detail::build_level(ft, q, t, out.notes));
    }

    // continue cycles across the ladder: stable ids via greedy matching of
    // (period, member count, infinity count) plus close valuation profiles
    int next_id = 0;
    for (auto& c : levels.front().cycles) c.id = next_id++;
    for (std::size_t l = 1; l < levels.size(); ++l) {
        auto& prev = levels[l - 1];
        std::vector<char> used(prev.cycles.size(), 0);
        for (auto& c : levels[l].cycles) {
            std::vector<double> cv = c.v_single;
            std::sort(cv.begin(), cv.end());
            int best = -1;
            double best_cost = 0.5;
            for (std::size_t j = 0; j < prev.cycles.size(); ++j) {
                const auto& pc = prev.cycles[j];
                if (used[j] || pc.period != c.period || pc.members.size() != c.members.size() ||
                    pc.inf_members != c.inf_members)
                    continue;
                std::vector<double> pv = pc.v_single;
                std::sort(pv.begin(), pv.end());
                double cost = 0.0;
                for (std::size_t i = 0; i < cv.size(); ++i)
                    cost = std::max(cost, std::abs(cv[i] - pv[i]));
                if (cost < best_cost) {
                    best_cost = cost;
                    best = static_cast<int>(j);
                }
            }
            if (best >= 0) {
                c.id = prev.cycles[static_cast<std::size_t>(best)].id;
                used[static_cast<std::size_t>(best)] = 1;
            } else {
                c.id = next_id++;
                out.notes.push_back("a period-" + std::to_string(c.period) +
                                    " cycle was not continued across the ladder");
            }
        }
    }

    // fits are built for the cycles seen at the smallest |t|
    const detail::SpectrumLevel& ref = levels.back();
    std::vector<char> rec_used(out.algebraic.records.size(), 0);
    std::map<int, int> fit_of_id;
    for (const auto& c : ref.cycles) {
        CycleFit fit;
        fit.cycle = static_cast<int>(out.fits.size());
        fit.period = c.period;

        std::vector<const detail::CycleObs*> obs;
        std::vector<const detail::SpectrumLevel*> obs_level;
        for (const auto& lev : levels)
            for (const auto& lc : lev.cycles)
                if (lc.id == c.id) {
                    obs.push_back(&lc);
                    obs_level.push_back(&lev);
                }

        bool any_zero = false, all_zero = true;
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            if (obs[i]->zero_mult) {
                any_zero = true;
            } else {
                all_zero = false;
                xs.push_back(-std::log(std::abs(obs_level[i]->t)));
                ys.push_back(obs[i]->loglam);
            }
        }
        if (any_zero && all_zero) {
            fit.superattracting = true;
            fit.slope = std::numeric_limits<double>::infinity();
        } else {
            if (any_zero)
                out.notes.push_back("cycle " + std::to_string(fit.cycle) +
                                    " has a vanishing multiplier at some parameter values only");
            if (xs.size() < 2) {
                out.notes.push_back("cycle " + std::to_string(fit.cycle) +
                                    " was observed at fewer than two parameter values");
            } else {
                fit.slope = detail::lsq_slope(xs, ys);
            }
        }

        // member valuation profile from the last two observations
        std::vector<double> prof;
        if (obs.size() >= 2) {
            const auto& a = *obs[obs.size() - 2];
            const auto& b = *obs.back();
            double dl = std::log(std::abs(obs_level.back()->t)) -
                        std::log(std::abs(obs_level[obs.size() - 2]->t));
            std::size_t m = std::min(a.members.size(), b.members.size());
            for (std::size_t i = 0; i < m; ++i) {
                double za = std::abs(obs_level[obs.size() - 2]->roots[a.members[i]].z);
                double zb = std::abs(obs_level.back()->roots[b.members[i]].z);
                double v;
                if (za == 0.0 && zb == 0.0)
                    v = detail::val_clamp;
                else if (za == 0.0 || zb == 0.0)
                    v = detail::val_clamp;
                else
                    v = (std::log(zb) - std::log(za)) / dl;
                prof.push_back(std::clamp(v, -detail::val_clamp, detail::val_clamp));
            }
        } else {
            prof = c.v_single;
            out.notes.push_back("cycle " + std::to_string(fit.cycle) +
                                " valuations estimated from a single parameter value");
        }
        for (int i = 0; i < c.inf_members; ++i) prof.push_back(-detail::val_clamp);
        while (static_cast<int>(prof.size()) < c.period)
            prof.push_back(prof.empty() ? 0.0 : prof.back());
        if (static_cast<int>(prof.size()) > c.period) prof.resize(static_cast<std::size_t>(c.period));
        std::sort(prof.begin(), prof.end());

        int best = -1;
        double best_cost = 0.08;
        for (std::size_t j = 0; j < out.algebraic.records.size(); ++j) {
            const auto& rec = out.algebraic.records[j];
            if (rec_used[j] || rec.period != fit.period) continue;
            std::vector<double> rp = detail::record_profile(rec);
            if (rp.size() != prof.size()) continue;
            double cost = 0.0;
            for (std::size_t i = 0; i < rp.size(); ++i)
                cost = std::max(cost, std::abs(rp[i] - prof[i]));
            if (cost < best_cost) {
                best_cost = cost;
                best = static_cast<int>(j);
            }
        }
        if (best >= 0) {
            fit.record = best;
            rec_used[static_cast<std::size_t>(best)] = 1;
        } else {
            out.notes.push_back("no exact record matches numeric cycle " +
                                std::to_string(fit.cycle));
        }

        fit_of_id[c.id] = fit.cycle;
        out.fits.push_back(fit);
    }

    for (const auto& lev : levels)
        for (std::size_t i = 0; i < lev.roots.size(); ++i) {
            const auto& r = lev.roots[i];
            MultiplierSample s;
            s.period = r.period;
            s.t = lev.t;
            s.z0 = r.z;
            s.multiplier = r.multiplier;
            int cid = lev.cycles[static_cast<std::size_t>(lev.cycle_of[i])].id;
            auto it = fit_of_id.find(cid);
            if (it != fit_of_id.end()) s.cycle = it->second;
            out.samples.push_back(s);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Preimages of the basepoint under the barycentric extension.

struct PreimageRadius {
    double max_distance = 0.0;
    int solutions = 0;
    int seeds = 0;
    bool complete = false;
    std::vector<HPoint> points;
};

// Solve E f_t (y) = basepoint by damped Newton iteration in (Re z, Im z,
// log h), seeded at the realizations of the exact fiber of the map over the
// base tree point.  The largest distance from the basepoint to a solution
// is the observed preimage radius.
inline PreimageRadius numeric_preimage_radius(const BerkMap& f, Complex t0,
                                              int n_samples = default_sphere_samples,
                                              const Rat& order = prec::default_order) {
    double at = std::abs(t0);
    if (!(at > 0.0 && at < 1.0)) throw numerical_error("preimage radius needs 0 < |t| < 1");
    SphereMap ft = instantiate(f, t0);
    std::vector<FiberPoint> fiber = general_fiber(f, TypeIIPoint::gauss(), order);
    PreimageRadius out;
    out.seeds = static_cast<int>(fiber.size());

    auto residual = [&](const Eigen::Vector3d& y) {
        HPoint p{Complex(y[0], y[1]), std::exp(y[2])};
        HPoint w = barycentric_extension_eval(ft, p, n_samples);
        return Eigen::Vector3d(w.z.real(), w.z.imag(), std::log(w.h));
    };

    auto newton_from = [&](Eigen::Vector3d y, double& gn) {
        Eigen::Vector3d g = residual(y);
        gn = g.norm();
        for (int it = 0; it < 40 && gn > 1e-8; ++it) {
            Eigen::Matrix3d J;
            // finite differences scaled to the local geometry: a z step that
            // is a fixed (small) hyperbolic length, a fixed step in log h
            double fdz = std::max(1e-8, 1e-3 * std::exp(y[2]));
            for (int c = 0; c < 3; ++c) {
                double fd = c < 2 ? fdz : 1e-4;
                Eigen::Vector3d yp = y;
                yp[c] += fd;
                J.col(c) = (residual(yp) - g) / fd;
            }
            Eigen::Vector3d delta = J.colPivHouseholderQr().solve(-g);
            if (!delta.allFinite()) break;
            if (delta.norm() > 1.0) delta /= delta.norm();
            bool took = false;
            double lam = 1.0;
            for (int hl = 0; hl < 8 && !took; ++hl, lam *= 0.5) {
                Eigen::Vector3d yc = y + lam * delta;
                try {
                    Eigen::Vector3d gc = residual(yc);
                    if (gc.norm() < gn) {
                        y = yc;
                        g = gc;
                        gn = gc.norm();
                        took = true;
                    }
                } catch (const numerical_error&) {
                }
            }
            if (!took) break;
        }
        return y;
    };

    for (const FiberPoint& fp : fiber) {
        try {
            HPoint s = realize(fp.point, t0);
            Eigen::Vector3d seed(s.z.real(), s.z.imag(), std::log(s.h));
            double gn = std::numeric_limits<double>::infinity();
            Eigen::Vector3d y = newton_from(seed, gn);
            // when the map is locally monomial the extension's z derivative
            // vanishes on the axis through the seed and Newton stalls at
            // first order; restart slightly off-axis in a few directions
            for (int k = 0; k < 4 && gn >= 1e-5; ++k) {
                double a = 3.14159265358979 * (2 * k + 1) / 4.0;
                Eigen::Vector3d nudged = seed;
                nudged[0] += 0.03 * s.h * std::cos(a);
                nudged[1] += 0.03 * s.h * std::sin(a);
                double gn2 = std::numeric_limits<double>::infinity();
                Eigen::Vector3d y2 = newton_from(nudged, gn2);
                if (gn2 < gn) {
                    gn = gn2;
                    y = y2;
                }
            }
            if (gn < 1e-5) {
                HPoint sol{Complex(y[0], y[1]), std::exp(y[2])};
                bool dup = false;
                for (const HPoint& p : out.points)
                    if (h3_distance(p, sol) < 1e-3) {
                        dup = true;
                        break;
                    }
                if (!dup) out.points.push_back(sol);
            }
        } catch (const numerical_error&) {
            // a seed that cannot be realized or evaluated is simply lost;
            // the completeness flag reports it
        }
    }
    out.solutions = static_cast<int>(out.points.size());
    out.complete = out.solutions >= out.seeds;
    for (const HPoint& p : out.points)
        out.max_distance = std::max(out.max_distance, h3_distance(HPoint::basepoint(), p));
    return out;
}

} // namespace rattree
