#pragma once

#include <optional>
#include <string>
#include <vector>

#include "skeleton.hpp"

namespace rattree {

// ---------------------------------------------------------------------------
// Fixed points of the induced tree map on the skeleton.

struct FixedTreePoint {
    TypeIIPoint point;
    int chain;
    Rat height;
    int degree;
};

inline std::vector<FixedTreePoint> fixed_points_with_degree(
    const BerkMap& f, const Skeleton& sk, const Rat& order = prec::default_order) {
    std::vector<FixedTreePoint> out;
    for (const auto& edge : sk.edges()) {
        auto h = [&](const Rat& s) -> Rat {
            TypeIIPoint x = sk.point(edge.chain, s);
            return tree_distance(apply_map(f, x, order), x);
        };
        PLFunction fit = pl_fit(h, edge.lo, edge.hi);
        auto zeros = fit.solve(Rat(0));
        if (!zeros.intervals.empty())
            throw classification_error("a whole segment of the skeleton is fixed");
        for (const Rat& s : zeros.points) {
            TypeIIPoint x = sk.point(edge.chain, s);
            bool seen = false;
            for (const auto& known : out)
                if (points_equal(known.point, x)) seen = true;
            if (seen) continue;
            MapAction act = apply_map_full(f, x, order);
            if (!points_equal(act.image, x)) continue; // fit artefact; be strict
            out.push_back({x, sk.owner(edge.chain, s), s, act.local_degree});
        }
    }
    std::sort(out.begin(), out.end(), [](const FixedTreePoint& a, const FixedTreePoint& b) {
        return a.height < b.height || (a.height == b.height && a.chain < b.chain);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Periodic ends (Type I periodic points) and their cycle multipliers.

struct PeriodicEndRecord {
    std::vector<TypeIPoint> cycle; // in orbit order
    int period = 1;
    ExtRat multiplier_valuation;       // +infinity marks a superattracting cycle
    Rat translation_length = Rat(0);   // max(0, -valuation)
    enum class Type { repelling, indifferent, attracting } type = Type::indifferent;
};

struct PeriodicEndsReport {
    std::vector<PeriodicEndRecord> records;
    int q_requested = 1;
    int q_effective = 1;
    int degree_cap = 0;
};

namespace detail {

// Valuation of the local derivative factor for the step x -> y of a cycle,
// in the affine chart near finite points and the 1/z chart at infinity.
inline ExtRat multiplier_step_valuation(const BerkMap& f, const PuiseuxPolynomial& W,
                                        const TypeIPoint& x, const TypeIPoint& y) {
    auto val_of = [](const PuiseuxSeries& s) -> ExtRat {
        if (!s.is_zero()) return s.valuation();
        if (s.truncation().is_infinite()) return ExtRat::infinity();
        throw precision_error("derivative valuation undecided at this truncation");
    };
    if (!x.is_infinity()) {
        const PuiseuxSeries& z = *x.value;
        ExtRat top = val_of(W.evaluate(z));
        const PuiseuxPolynomial& bottom = y.is_infinity() ? f.num() : f.den();
        ExtRat bot = val_of(bottom.evaluate(z));
        if (bot.is_infinite()) throw precision_error("cycle step lands on an undecided pole");
        return top - bot.value() - bot.value();
    }
    // chart w = 1/z at the source: f(1/w) = Pn / Pd with reversed coefficients
    int m = std::max(f.num().degree(), f.den().degree());
    PuiseuxPolynomial Pn = f.num().reversed(m);
    PuiseuxPolynomial Pd = f.den().reversed(m);
    PuiseuxPolynomial Wrev = Pn.derivative() * Pd - Pn * Pd.derivative();
    ExtRat top = val_of(Wrev.coeff(0));
    const PuiseuxPolynomial& bottom = y.is_infinity() ? Pn : Pd;
    ExtRat bot = val_of(bottom.coeff(0));
    if (bot.is_infinite()) throw precision_error("cycle step lands on an undecided pole");
    return top - bot.value() - bot.value();
}

// Exact image of a Type I point, using charted evaluation at infinity.
inline TypeIPoint step_end(const BerkMap& f, const TypeIPoint& x, const Rat& order) {
    int dn = f.num().degree(), dd = f.den().degree();
    if (x.is_infinity()) {
        if (dn > dd) return TypeIPoint::infinity();
        if (dn < dd) return TypeIPoint::at(PuiseuxSeries::zero());
        PuiseuxSeries lead = f.num().coeff(dn);
        PuiseuxSeries denl = f.den().coeff(dd);
        return TypeIPoint::at((lead * denl.inverse(order)).truncated(ExtRat(order)));
    }
    PuiseuxSeries dv = f.den().evaluate(*x.value);
    if (dv.is_zero()) {
        if (dv.truncation().is_infinite() || dv.truncation() > ExtRat(order - Rat(1)))
            return TypeIPoint::infinity();
        throw precision_error("orbit step hits an undecided pole");
    }
    PuiseuxSeries nv = f.num().evaluate(*x.value);
    return TypeIPoint::at((nv * dv.inverse(order)).truncated(ExtRat(order)));
}

} // namespace detail

inline PeriodicEndsReport periodic_ends(const BerkMap& f, int q_max,
                                        const Rat& order = prec::default_order,
                                        int degree_cap = 126) {
    PeriodicEndsReport rep;
    rep.q_requested = q_max;
    rep.degree_cap = degree_cap;
    int d = f.degree();
    int qeff = 1;
    if (d >= 2) {
        long long power = d;
        while (qeff < q_max && power * d + 1 <= degree_cap) {
            power *= d;
            ++qeff;
        }
    } else {
        qeff = q_max;
    }
    rep.q_effective = qeff;

    BerkMap Fq = f;
    for (int k = 1; k < qeff; ++k) Fq = f.composed_into(Fq, degree_cap);

    PuiseuxPolynomial phi = Fq.fixed_point_polynomial();
    if (phi.is_zero()) throw classification_error("every end is periodic at this order");
    // guard precision: orbit matching compares evaluated images, which lose
    // accuracy through composition, so expand the ends slightly beyond the
    // report order (a full doubling would be wasted: deep compositions hit
    // the double-precision wall long before it)
    std::vector<NewtonPuiseuxRoot> roots = newton_puiseux_roots(phi, order + Rat(2));
    // Deep compositions exhaust double precision before the boosted order is
    // reached, so roots may come back with an honestly reduced truncation;
    // they stay usable as long as the ends are pairwise separated.  A root of
    // exact multiplicity > 1 is a single end hit with multiplicity, while an
    // inexact one is an unseparated cluster.
    for (const auto& r : roots)
        if (r.multiplicity > 1 && !r.series.truncation().is_infinite())
            throw precision_error("periodic ends are not separated at this order");
    for (std::size_t i = 0; i < roots.size(); ++i)
        for (std::size_t j = i + 1; j < roots.size(); ++j)
            if ((roots[i].series - roots[j].series).is_zero())
                throw precision_error("periodic ends are not separated at this order");

    // the end at infinity belongs to a cycle iff its forward orbit returns
    std::vector<TypeIPoint> inf_cycle;
    {
        TypeIPoint p = TypeIPoint::infinity();
        std::vector<TypeIPoint> orbit{p};
        for (int k = 0; k < qeff; ++k) {
            p = detail::step_end(f, p, order);
            if (p.is_infinity()) break;
            orbit.push_back(p);
        }
        if (p.is_infinity() && static_cast<int>(orbit.size()) <= qeff) inf_cycle = orbit;
    }

    // agreement valuation between two ends; higher means closer
    auto agreement = [](const TypeIPoint& a, const TypeIPoint& b) -> ExtRat {
        if (a.is_infinity() || b.is_infinity())
            return a.is_infinity() == b.is_infinity() ? ExtRat::infinity()
                                                      : ExtRat(Rat(-1000000));
        PuiseuxSeries diff = *a.value - *b.value;
        if (diff.is_zero()) return diff.truncation();
        return diff.valuation();
    };

    PuiseuxPolynomial W = f.derivative_numerator();
    std::vector<bool> used(roots.size(), false);

    auto classify = [&](std::vector<TypeIPoint> cycle) {
        PeriodicEndRecord rec;
        rec.period = static_cast<int>(cycle.size());
        ExtRat total(Rat(0));
        for (std::size_t i = 0; i < cycle.size(); ++i) {
            const TypeIPoint& x = cycle[i];
            const TypeIPoint& y = cycle[(i + 1) % cycle.size()];
            ExtRat step = detail::multiplier_step_valuation(f, W, x, y);
            total = step.is_infinite() || total.is_infinite() ? ExtRat::infinity()
                                                              : total + step;
        }
        rec.cycle = std::move(cycle);
        rec.multiplier_valuation = total;
        if (total.is_infinite() || total.value().sign() > 0) {
            rec.type = PeriodicEndRecord::Type::attracting;
        } else if (total.value().sign() == 0) {
            rec.type = PeriodicEndRecord::Type::indifferent;
        } else {
            rec.type = PeriodicEndRecord::Type::repelling;
            rec.translation_length = -total.value();
        }
        rep.records.push_back(std::move(rec));
    };

    if (!inf_cycle.empty()) {
        for (const auto& member : inf_cycle) {
            if (member.is_infinity()) continue;
            int best_j = -1;
            ExtRat best(Rat(-1000000));
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (used[j]) continue;
                ExtRat v = agreement(member, TypeIPoint::at(roots[j].series));
                if (best_j < 0 || v > best) {
                    best = v;
                    best_j = static_cast<int>(j);
                }
            }
            if (best_j >= 0 && best > ExtRat(Rat(0))) used[best_j] = true;
        }
        classify(inf_cycle);
    }

    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        std::vector<TypeIPoint> orbit;
        TypeIPoint p = TypeIPoint::at(roots[i].series);
        used[i] = true;
        orbit.push_back(p);
        for (int guard = 0; guard <= qeff + 1; ++guard) {
            TypeIPoint next = detail::step_end(f, p, order);
            if (next.is_infinity())
                throw numerical_error("periodic orbit escaped outside the computed ends");
            // match against the orbit start and all unused ends; take the
            // closest, requiring a strict winner
            ExtRat best = agreement(next, orbit.front());
            int best_j = -1; // -1 encodes the orbit start (closure)
            bool tie = false;
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (used[j]) continue;
                ExtRat v = agreement(next, TypeIPoint::at(roots[j].series));
                if (v > best) {
                    best = v;
                    best_j = static_cast<int>(j);
                    tie = false;
                } else if (v == best && v.is_finite()) {
                    tie = true;
                }
            }
            if (tie || best <= ExtRat(Rat(-1000000)))
                throw numerical_error("periodic orbit matching is ambiguous");
            if (best_j < 0) break; // closed back on its start
            used[best_j] = true;
            orbit.push_back(TypeIPoint::at(roots[best_j].series));
            p = orbit.back();
            if (static_cast<int>(orbit.size()) > qeff)
                throw numerical_error("periodic orbit exceeded the requested period");
        }
        classify(orbit);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Abstract piecewise-linear interval model (the combinatorics of the
// skeleton dynamics on an invariant interval).

class PLIntervalModel {
  public:
    struct Piece {
        Rat lo, hi;
        int degree;   // |slope|
        int sign;     // +1 rising, -1 falling
    };

    struct Gap {
        Rat lo, hi;
        Rat exit; // common image of the flanking piece endpoints (a or b)
    };

    PLIntervalModel(Rat a, Rat b, std::vector<Piece> pieces)
        : a_(std::move(a)), b_(std::move(b)), pieces_(std::move(pieces)) {
        validate();
    }

    // Evenly spaced model: piece i has length (b-a)/d_i, equal interior gaps,
    // slopes alternating +d_0, -d_1, +d_2, ...
    static PLIntervalModel standard(const std::vector<int>& degrees, const Rat& a, const Rat& b) {
        if (degrees.empty()) throw classification_error("interval model needs pieces");
        if (!(a < b)) throw numerical_error("interval model needs a nonempty interval");
        Rat len = b - a;
        Rat total_pieces(0);
        for (int d : degrees) {
            if (d < 2) throw classification_error("interval model pieces must expand");
            total_pieces += len / Rat(d);
        }
        if (!(total_pieces < len) && degrees.size() > 1)
            throw classification_error("interval model pieces overlap");
        int k = static_cast<int>(degrees.size());
        Rat gap = k > 1 ? (len - total_pieces) / Rat(k - 1) : Rat(0);
        std::vector<Piece> pieces;
        Rat cursor = a;
        for (int i = 0; i < k; ++i) {
            Rat plen = len / Rat(degrees[i]);
            pieces.push_back({cursor, cursor + plen, degrees[i], i % 2 == 0 ? 1 : -1});
            cursor = cursor + plen + gap;
        }
        pieces.back().hi = b; // close exactly against rounding of the cursor walk
        if (pieces.back().hi - pieces.back().lo != len / Rat(degrees.back()))
            pieces.back().hi = pieces.back().lo + len / Rat(degrees.back());
        return PLIntervalModel(a, b, std::move(pieces));
    }

    const Rat& a() const { return a_; }
    const Rat& b() const { return b_; }
    const std::vector<Piece>& pieces() const { return pieces_; }

    std::vector<int> degrees() const {
        std::vector<int> out;
        for (const auto& p : pieces_) out.push_back(p.degree);
        return out;
    }

    Rat reciprocal_degree_sum() const {
        Rat s(0);
        for (const auto& p : pieces_) s += Rat(1, p.degree);
        return s;
    }

    std::vector<Gap> gaps() const {
        std::vector<Gap> out;
        for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) {
            if (pieces_[i].hi == pieces_[i + 1].lo) continue;
            out.push_back({pieces_[i].hi, pieces_[i + 1].lo, piece_value(i, pieces_[i].hi)});
        }
        return out;
    }

    // Piece index containing x, or -1 when x lies in a gap.
    int piece_of(const Rat& x) const {
        for (std::size_t i = 0; i < pieces_.size(); ++i)
            if (!(x < pieces_[i].lo) && !(pieces_[i].hi < x)) return static_cast<int>(i);
        return -1;
    }

    Rat map(const Rat& x) const {
        int i = piece_of(x);
        if (i < 0) throw numerical_error("interval model map evaluated in a gap");
        return piece_value(i, x);
    }

  private:
    Rat piece_value(std::size_t i, const Rat& x) const {
        const Piece& p = pieces_[i];
        if (p.sign > 0) return a_ + Rat(p.degree) * (x - p.lo);
        return b_ - Rat(p.degree) * (x - p.lo);
    }

    void validate() const {
        if (pieces_.empty()) throw classification_error("interval model needs pieces");
        Rat cursor = a_;
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            const Piece& p = pieces_[i];
            if (p.lo < cursor) throw classification_error("interval model pieces overlap");
            if (!(p.lo < p.hi)) throw classification_error("interval model piece is empty");
            if (p.degree < 1) throw classification_error("interval model degree must be positive");
            // each piece maps onto [a, b] exactly
            if (Rat(p.degree) * (p.hi - p.lo) != b_ - a_)
                throw classification_error("interval model piece is not onto");
            if (i > 0 && pieces_[i - 1].sign == p.sign)
                throw classification_error("interval model slopes must alternate");
            cursor = p.hi;
        }
        if (b_ < cursor) throw classification_error("interval model exceeds the interval");
        if (pieces_.front().lo != a_ || pieces_.back().hi != b_)
            throw classification_error("interval model must start and end at the endpoints");
    }

    Rat a_, b_;
    std::vector<Piece> pieces_;
};

struct IterationStep {
    Rat x;
    bool escaped = false;
    Rat exit_endpoint; // meaningful when escaped
};

// Iterate the model map n times; if the orbit enters a gap it escapes through
// that gap's exit endpoint and the iteration stops.
inline std::vector<IterationStep> pl_iterate(const PLIntervalModel& m, const Rat& x0, int n) {
    std::vector<IterationStep> out;
    Rat x = x0;
    out.push_back({x, false, Rat(0)});
    for (int k = 0; k < n; ++k) {
        int i = m.piece_of(x);
        if (i < 0) {
            Rat exit(0);
            for (const auto& g : m.gaps())
                if (!(x < g.lo) && !(g.hi < x)) exit = g.exit;
            out.back().escaped = true;
            out.back().exit_endpoint = exit;
            break;
        }
        x = m.map(x);
        out.push_back({x, false, Rat(0)});
    }
    return out;
}

// Depth-n preimages of the whole interval: k^n closed intervals whose nested
// intersection is the invariant Cantor set of the model.
inline std::vector<std::pair<Rat, Rat>> pl_cantor_intervals(const PLIntervalModel& m, int depth) {
    std::vector<std::pair<Rat, Rat>> cur{{m.a(), m.b()}};
    for (int level = 0; level < depth; ++level) {
        std::vector<std::pair<Rat, Rat>> next;
        for (const auto& piece : m.pieces()) {
            for (const auto& iv : cur) {
                // pull [iv] back through the affine piece map
                Rat u, v;
                if (piece.sign > 0) {
                    u = piece.lo + (iv.first - m.a()) / Rat(piece.degree);
                    v = piece.lo + (iv.second - m.a()) / Rat(piece.degree);
                } else {
                    u = piece.lo + (m.b() - iv.second) / Rat(piece.degree);
                    v = piece.lo + (m.b() - iv.first) / Rat(piece.degree);
                }
                next.push_back({u, v});
            }
        }
        std::sort(next.begin(), next.end(),
                  [](const auto& p, const auto& q) { return p.first < q.first; });
        cur = std::move(next);
    }
    return cur;
}

// Predicted conformal modulus of the parameter annulus separating two tree
// points at distance d when |t| = r: modulus = d * log(1/r) / (2 pi).
inline double predicted_modulus_growth(const Rat& tree_dist, double abs_t) {
    return tree_dist.to_double() * std::log(1.0 / abs_t) / (2.0 * 3.14159265358979323846);
}

// ---------------------------------------------------------------------------
// Extraction of the interval model from the actual skeleton dynamics.

struct IntervalModelResult {
    std::optional<PLIntervalModel> model;
    int chain = -1;
    std::string absent_reason; // set when model is absent
    PLFunction axis_map;       // fitted image-height map on [a, b] (when present)
};

namespace detail {

// Height of the image of the chain point at height s, required to stay on
// the same chain (classification honesty: the model is one-dimensional).
inline Rat image_height_on_chain(const BerkMap& f, const Skeleton& sk, int chain, const Rat& s,
                                 const Rat& order) {
    TypeIIPoint img = apply_map(f, sk.point(chain, s), order);
    Skeleton::Location loc = sk.locate(img);
    if (!loc.on_tree) throw precision_error("image leaves the skeleton");
    if (loc.chain != chain && loc.height > sk.meet(loc.chain, chain))
        throw precision_error("image leaves the model chain");
    return loc.height;
}

} // namespace detail

inline IntervalModelResult extract_interval_model(const BerkMap& f, const Skeleton& sk,
                                                  const std::vector<FixedTreePoint>& fixed,
                                                  const PeriodicEndsReport& ends,
                                                  const Rat& order = prec::default_order) {
    for (const auto& rec : ends.records)
        if (rec.type == PeriodicEndRecord::Type::repelling)
            throw classification_error(
                "repelling periodic ends: no bounded interval model exists");

    IntervalModelResult res;
    if (fixed.empty()) {
        res.absent_reason = "no fixed point on the skeleton";
        return res;
    }

    int d = f.degree();
    std::string last_reason = "interval degenerates at every fixed point";
    for (const auto& fp : fixed) {
        int chain = fp.chain;
        Rat a = fp.height;
        Rat cap = sk.cap(chain);
        if (!(a < cap)) continue;
        auto h = [&](const Rat& s) {
            return detail::image_height_on_chain(f, sk, chain, s, order);
        };
        PLFunction phi = pl_fit(h, a, cap);
        auto hits_a = phi.solve(a);
        if (!hits_a.intervals.empty())
            throw classification_error("interval endpoint has a flat preimage segment");
        Rat b = a;
        for (const Rat& s : hits_a.points) b = rat_max(b, s);
        if (!(a < b)) {
            last_reason = "the fixed point is totally invariant on its chain";
            continue;
        }
        PLFunction core = phi.restricted(a, b);
        auto hits_b = core.solve(b);
        if (!hits_b.intervals.empty())
            throw classification_error("interval endpoint has a flat preimage segment");
        std::vector<Rat> cuts{a, b};
        for (const Rat& s : core.solve(a).points) cuts.push_back(s);
        for (const Rat& s : hits_b.points) cuts.push_back(s);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

        std::vector<PLIntervalModel::Piece> pieces;
        bool valid = true;
        for (std::size_t i = 0; i + 1 < cuts.size() && valid; ++i) {
            Rat mid = (cuts[i] + cuts[i + 1]) / Rat(2);
            Rat v = core.eval(mid);
            bool inside = !(v < a) && !(b < v);
            Rat va = core.eval(cuts[i]);
            Rat vb = core.eval(cuts[i + 1]);
            if (inside) {
                // must sweep [a, b] linearly with an integer expansion factor
                PLFunction seg = core.restricted(cuts[i], cuts[i + 1]);
                if (seg.segments() != 1) {
                    valid = false;
                    break;
                }
                Rat slope = seg.slope_at(0);
                if (!slope.is_integer() || slope.abs() < Rat(2))
                    throw classification_error("interval model piece with non-expanding or "
                                               "fractional slope " + slope.str());
                bool rising = slope.sign() > 0;
                if ((rising && !(va == a && vb == b)) || (!rising && !(va == b && vb == a))) {
                    valid = false;
                    break;
                }
                pieces.push_back({cuts[i], cuts[i + 1],
                                  static_cast<int>(rising ? slope.num() : -slope.num()),
                                  rising ? 1 : -1});
            } else {
                // a gap: both endpoints must exit through the same bound
                if (!(va == vb && (va == a || va == b))) {
                    valid = false;
                    break;
                }
            }
        }
        if (!valid || pieces.size() < 2) {
            last_reason = "no branched interval structure over this fixed point";
            continue;
        }
        int degree_total = 0;
        for (const auto& p : pieces) degree_total += p.degree;
        if (degree_total != d)
            throw classification_error("interval model pieces carry degree " +
                                       std::to_string(degree_total) + " of " + std::to_string(d));

        // certify with a fiber: all preimages of an interior point stay on the
        // chain inside the interval
        Rat probe = a + (b - a) * Rat(3, 7);
        for (const auto& fpnt : general_fiber(f, sk.point(chain, probe), order)) {
            Skeleton::Location loc = sk.locate(fpnt.point);
            if (!loc.on_tree)
                throw precision_error("a preimage leaves the skeleton");
            if (loc.height < a || b < loc.height)
                throw precision_error("a preimage leaves the interval");
        }

        res.model = PLIntervalModel(a, b, std::move(pieces));
        res.chain = chain;
        res.axis_map = core;
        return res;
    }
    res.absent_reason = last_reason;
    return res;
}

// ---------------------------------------------------------------------------
// Verdict on the limiting geometry.

enum class NestednessVerdict { nested, lattes_boundary, unbounded_spectrum };

inline const char* verdict_name(NestednessVerdict v) {
    switch (v) {
        case NestednessVerdict::nested: return "NESTED";
        case NestednessVerdict::lattes_boundary: return "LATTES-LIKE BOUNDARY";
        case NestednessVerdict::unbounded_spectrum: return "UNBOUNDED-SPECTRUM";
    }
    return "";
}

inline NestednessVerdict nestedness_verdict(const IntervalModelResult& model,
                                            const PeriodicEndsReport& ends) {
    for (const auto& rec : ends.records)
        if (rec.type == PeriodicEndRecord::Type::repelling)
            return NestednessVerdict::unbounded_spectrum;
    if (!model.model.has_value())
        throw classification_error("no interval model: " + model.absent_reason);
    Rat s = model.model->reciprocal_degree_sum();
    if (s < Rat(1)) return NestednessVerdict::nested;
    if (s == Rat(1)) return NestednessVerdict::lattes_boundary;
    throw classification_error("interval model reciprocal degree sum exceeds one");
}

// ---------------------------------------------------------------------------
// Normalization radius: the smallest r such that some tree point has its
// whole fiber within distance r (min over skeleton points of the max fiber
// distance), with the minimizing point.

struct NormalizationRadius {
    Rat value;
    TypeIIPoint argmin;
    int chain;
    Rat height;
};

inline NormalizationRadius normalization_radius(const BerkMap& f, const Skeleton& sk,
                                                const Rat& order = prec::default_order) {
    bool have = false;
    NormalizationRadius best{Rat(0), TypeIIPoint::gauss(), 0, Rat(0)};
    for (const auto& edge : sk.edges()) {
        auto h = [&](const Rat& s) -> Rat {
            TypeIIPoint x = sk.point(edge.chain, s);
            Rat worst(0);
            for (const auto& fp : general_fiber(f, x, order))
                worst = rat_max(worst, tree_distance(fp.point, x));
            return worst;
        };
        PLFunction fit = pl_fit(h, edge.lo, edge.hi);
        PLPoint m = fit.minimum();
        if (!have || m.y < best.value) {
            best = {m.y, sk.point(edge.chain, m.x), sk.owner(edge.chain, m.x), m.x};
            have = true;
        }
    }
    if (!have) throw numerical_error("empty skeleton");
    return best;
}

} // namespace rattree
