#pragma once

#include <algorithm>
#include <functional>
#include <vector>

#include "rational.hpp"

namespace rattree {

struct PLPoint {
    Rat x;
    Rat y;
};

// Piecewise linear function on a closed interval, stored as breakpoints with
// exact rational coordinates; linear interpolation between consecutive ones.
class PLFunction {
  public:
    PLFunction() = default;
    explicit PLFunction(std::vector<PLPoint> pts) : pts_(std::move(pts)) {
        if (pts_.size() < 2) throw numerical_error("piecewise function needs two points");
        for (std::size_t i = 1; i < pts_.size(); ++i)
            if (!(pts_[i - 1].x < pts_[i].x))
                throw numerical_error("piecewise breakpoints must increase");
        simplify();
    }

    const std::vector<PLPoint>& points() const { return pts_; }
    Rat lo() const { return pts_.front().x; }
    Rat hi() const { return pts_.back().x; }
    Rat lo_value() const { return pts_.front().y; }
    Rat hi_value() const { return pts_.back().y; }

    bool contains(const Rat& x) const { return !(x < lo()) && !(hi() < x); }

    Rat eval(const Rat& x) const {
        if (!contains(x)) throw numerical_error("evaluation outside the domain");
        std::size_t i = segment_index(x);
        const PLPoint &a = pts_[i], &b = pts_[i + 1];
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x);
    }

    Rat slope_at(std::size_t segment) const {
        const PLPoint &a = pts_[segment], &b = pts_[segment + 1];
        return (b.y - a.y) / (b.x - a.x);
    }

    std::size_t segments() const { return pts_.size() - 1; }

    PLPoint minimum() const {
        PLPoint best = pts_[0];
        for (const auto& p : pts_)
            if (p.y < best.y) best = p;
        return best;
    }

    PLPoint maximum() const {
        PLPoint best = pts_[0];
        for (const auto& p : pts_)
            if (best.y < p.y) best = p;
        return best;
    }

    // Solutions of f(x) = target: isolated points plus whole flat segments.
    struct LevelSet {
        std::vector<Rat> points;
        std::vector<std::pair<Rat, Rat>> intervals;
    };

    LevelSet solve(const Rat& target) const {
        LevelSet out;
        auto push_point = [&](const Rat& x) {
            if (out.points.empty() || out.points.back() != x) out.points.push_back(x);
        };
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const PLPoint &a = pts_[i], &b = pts_[i + 1];
            if (a.y == target && b.y == target) {
                out.intervals.push_back({a.x, b.x});
                continue;
            }
            Rat da = a.y - target, db = b.y - target;
            if (da.sign() == 0) push_point(a.x);
            if (db.sign() == 0) {
                push_point(b.x);
                continue;
            }
            if (da.sign() * db.sign() < 0) {
                Rat x = a.x + (target - a.y) * (b.x - a.x) / (b.y - a.y);
                push_point(x);
            }
        }
        drop_covered(out);
        return out;
    }

    // Solutions of f(x) = x (the identity level set), same structure.
    LevelSet solve_identity() const {
        LevelSet out;
        auto push_point = [&](const Rat& x) {
            if (out.points.empty() || out.points.back() != x) out.points.push_back(x);
        };
        for (std::size_t i = 0; i + 1 < pts_.size(); ++i) {
            const PLPoint &a = pts_[i], &b = pts_[i + 1];
            Rat da = a.y - a.x, db = b.y - b.x;
            if (da.sign() == 0 && db.sign() == 0) {
                out.intervals.push_back({a.x, b.x});
                continue;
            }
            if (da.sign() == 0) push_point(a.x);
            if (db.sign() == 0) {
                push_point(b.x);
                continue;
            }
            if (da.sign() * db.sign() < 0) {
                // a.y + m (x - a.x) = x with m the segment slope
                Rat m = (b.y - a.y) / (b.x - a.x);
                Rat x = (a.y - m * a.x) / (Rat(1) - m);
                push_point(x);
            }
        }
        drop_covered(out);
        return out;
    }

    // Isolated solutions that merely touch a flat solution segment belong to
    // the segment, not the point list.
    static void drop_covered(LevelSet& out) {
        if (out.intervals.empty()) return;
        std::vector<Rat> kept;
        for (const auto& x : out.points) {
            bool covered = false;
            for (const auto& iv : out.intervals)
                if (!(x < iv.first) && !(iv.second < x)) covered = true;
            if (!covered) kept.push_back(x);
        }
        out.points = std::move(kept);
    }

    // Restriction to [a, b] (must lie inside the domain).
    PLFunction restricted(const Rat& a, const Rat& b) const {
        if (!(a < b)) throw numerical_error("empty restriction");
        std::vector<PLPoint> pts;
        pts.push_back({a, eval(a)});
        for (const auto& p : pts_)
            if (a < p.x && p.x < b) pts.push_back(p);
        pts.push_back({b, eval(b)});
        return PLFunction(std::move(pts));
    }

  private:
    std::size_t segment_index(const Rat& x) const {
        std::size_t lo = 0, hi = pts_.size() - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            if (pts_[mid].x < x || pts_[mid].x == x)
                lo = mid;
            else
                hi = mid;
        }
        return lo;
    }

    void simplify() {
        std::vector<PLPoint> keep;
        keep.push_back(pts_.front());
        for (std::size_t i = 1; i + 1 < pts_.size(); ++i) {
            const PLPoint& prev = keep.back();
            const PLPoint &cur = pts_[i], &next = pts_[i + 1];
            // drop collinear interior points
            if ((cur.y - prev.y) * (next.x - cur.x) == (next.y - cur.y) * (cur.x - prev.x))
                continue;
            keep.push_back(cur);
        }
        keep.push_back(pts_.back());
        pts_ = std::move(keep);
    }

    std::vector<PLPoint> pts_;
};

namespace detail {

template <typename Fn>
void pl_fit_rec(const Fn& h, const Rat& lo, const Rat& hi, const Rat& hlo, const Rat& hhi,
                int depth, std::vector<PLPoint>& out) {
    if (depth > 42) throw precision_error("piecewise-linear fit did not resolve");
    Rat mid = (lo + hi) / Rat(2);
    Rat hm = h(mid);
    Rat q1 = (lo + mid) / Rat(2);
    Rat h1 = h(q1);
    Rat q2 = (mid + hi) / Rat(2);
    Rat h2 = h(q2);
    auto collinear = [](const Rat& x1, const Rat& y1, const Rat& x2, const Rat& y2, const Rat& x,
                        const Rat& y) { return (y2 - y1) * (x - x1) == (y - y1) * (x2 - x1); };

    // Two interior probes per half, the second at a non-dyadic offset, so a
    // kinked function cannot certify as linear on a midpoint coincidence.
    Rat r1 = lo + (mid - lo) * Rat(5, 13);
    Rat r2 = mid + (hi - mid) * Rat(5, 13);
    bool left_line = collinear(lo, hlo, mid, hm, q1, h1) && collinear(lo, hlo, mid, hm, r1, h(r1));
    bool right_line = collinear(mid, hm, hi, hhi, q2, h2) && collinear(mid, hm, hi, hhi, r2, h(r2));
    if (left_line && right_line) {
        if (collinear(lo, hlo, mid, hm, hi, hhi)) {
            out.push_back({hi, hhi}); // single line: close the segment
            return;
        }
        out.push_back({mid, hm}); // two pieces kinked exactly at the midpoint
        out.push_back({hi, hhi});
        return;
    }
    // single interior kink at the intersection of the outer secants
    Rat sl_l = h1 - hlo, run_l = q1 - lo;
    Rat sl_r = hhi - h2, run_r = hi - q2;
    if (sl_l * run_r != sl_r * run_l) {
        Rat ml = sl_l / run_l, mr = sl_r / run_r;
        Rat ux = (hhi - mr * hi - hlo + ml * lo) / (ml - mr);
        if (lo < ux && ux < hi) {
            Rat yx = hlo + ml * (ux - lo);
            auto left_val = [&](const Rat& x) { return hlo + ml * (x - lo); };
            auto right_val = [&](const Rat& x) { return hhi + mr * (x - hi); };
            auto fits = [&](const Rat& x, const Rat& y) {
                return y == (x <= ux ? left_val(x) : right_val(x));
            };
            // fresh non-dyadic probes: when ux falls on the midpoint the
            // dyadic half-points would coincide with samples already used
            Rat pa = lo + (ux - lo) * Rat(5, 13), pb = ux + (hi - ux) * Rat(5, 13);
            if (fits(q1, h1) && fits(mid, hm) && fits(q2, h2) && h(ux) == yx &&
                h(pa) == left_val(pa) && h(pb) == right_val(pb)) {
                out.push_back({ux, yx});
                out.push_back({hi, hhi});
                return;
            }
        }
    }
    pl_fit_rec(h, lo, mid, hlo, hm, depth + 1, out);
    pl_fit_rec(h, mid, hi, hm, hhi, depth + 1, out);
}

} // namespace detail

// Fit the exact piecewise-linear structure of h on [lo, hi].  h must evaluate
// exactly at rational arguments.  After assembly the fit is re-verified at a
// spread of fresh sample points; disagreement raises precision_error.
template <typename Fn>
PLFunction pl_fit(const Fn& h, const Rat& lo, const Rat& hi) {
    if (!(lo < hi)) throw numerical_error("piecewise fit needs a nonempty interval");
    std::vector<PLPoint> pts;
    Rat hlo = h(lo), hhi = h(hi);
    pts.push_back({lo, hlo});
    try {
        detail::pl_fit_rec(h, lo, hi, hlo, hhi, 0, pts);
    } catch (const numerical_error& e) {
        // subdivision so deep that exact arithmetic gave out: not certifiable
        throw precision_error(std::string("piecewise-linear fit failed: ") + e.what());
    }
    PLFunction fit{std::move(pts)};
    const int checks = 9;
    for (int k = 1; k <= checks; ++k) {
        // sample at irregular (prime-ish) fractions to avoid the fit's own grid
        Rat x = lo + (hi - lo) * Rat(2 * k - 1, 2 * checks + 3);
        if (h(x) != fit.eval(x))
            throw precision_error("piecewise-linear fit failed verification");
    }
    return fit;
}

} // namespace rattree
