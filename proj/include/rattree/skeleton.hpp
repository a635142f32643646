#pragma once

#include <vector>

#include "berkovich.hpp"
#include "piecewise.hpp"

namespace rattree {

// Finite model of the subtree spanned by the critical ends (and the end at
// infinity).  Chain i is the ray of balls around the series end e_i; chains
// i and j coincide at heights <= meet(i, j).  Rays are clipped to
// [-top, cap_i] for exploration; the underlying tree itself is unbounded.
class Skeleton {
  public:
    struct Edge {
        int chain;
        Rat lo;
        Rat hi;
    };

    struct Location {
        int chain = 0;
        Rat height;
        Rat excess;  // distance from the tree (0 when the point lies on it)
        bool on_tree = false;
    };

    static Skeleton build(const BerkMap& f, const Rat& order = prec::default_order) {
        Skeleton sk;
        sk.order_ = order;
        // guard precision: images of height-h balls need end series decided to
        // roughly 2h, so expand the ends well beyond the exploration order
        for (const auto& ce : critical_ends(f, order * Rat(2) + Rat(2))) {
            if (ce.point.is_infinity()) continue;
            if (!sk.try_add_end(*ce.point.value))
                throw precision_error("two critical ends agree to working precision");
        }
        if (sk.ends_.empty()) sk.ends_.push_back(PuiseuxSeries::zero());
        sk.finish(f);
        return sk;
    }

    // Hull of an explicit list of end series (used by focused analyses).
    static Skeleton of_ends(std::vector<PuiseuxSeries> ends, const BerkMap& f,
                            const Rat& order = prec::default_order) {
        Skeleton sk;
        sk.order_ = order;
        for (const auto& e : ends)
            if (!sk.try_add_end(e))
                throw precision_error("two chain ends agree to working precision");
        if (sk.ends_.empty()) sk.ends_.push_back(PuiseuxSeries::zero());
        sk.finish(f);
        return sk;
    }

    int chain_count() const { return static_cast<int>(ends_.size()); }
    const std::vector<PuiseuxSeries>& ends() const { return ends_; }
    const Rat& meet(int i, int j) const { return meets_[i][j]; }
    const Rat& top() const { return top_; }
    const Rat& cap(int i) const { return caps_[i]; }

    TypeIIPoint point(int chain, const Rat& height) const {
        return TypeIIPoint::make(ends_[chain], height);
    }

    // Minimal index of a chain passing through (chain, height).
    int owner(int chain, const Rat& height) const {
        for (int j = 0; j < chain; ++j)
            if (!(meets_[chain][j] < height)) return owner(j, height);
        return chain;
    }

    // Canonical edge decomposition: each shared segment listed once.
    const std::vector<Edge>& edges() const { return edges_; }

    // Branch points and ray cut heights along each owning chain.
    std::vector<std::pair<int, Rat>> vertices() const {
        std::vector<std::pair<int, Rat>> out;
        for (const auto& e : edges_) {
            out.push_back({e.chain, e.lo});
            out.push_back({e.chain, e.hi});
        }
        std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
            return a.first < b.first || (a.first == b.first && a.second < b.second);
        });
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    Location locate(const TypeIIPoint& y) const {
        Location best;
        bool have = false, best_undecided = false;
        for (int i = 0; i < chain_count(); ++i) {
            Rat a;
            bool undecided = false;
            PuiseuxSeries d = y.center - ends_[i];
            if (d.is_zero()) {
                if (d.truncation() >= ExtRat(y.radius_val)) {
                    a = y.radius_val;
                } else {
                    a = d.truncation().value(); // only a lower bound
                    undecided = true;
                }
            } else {
                a = rat_min(y.radius_val, d.valuation().value());
            }
            if (!have || best.height < a) {
                best = Location{i, a, y.radius_val - a, a == y.radius_val};
                best_undecided = undecided;
                have = true;
            }
        }
        if (best_undecided)
            throw precision_error("cannot locate the point at this truncation");
        return best;
    }

    // Tree distance between located positions (excesses included).
    Rat distance(const Location& a, const Location& b) const {
        Rat m = a.chain == b.chain ? rat_min(a.height, b.height)
                                   : rat_min(rat_min(a.height, b.height),
                                             meets_[a.chain][b.chain]);
        return a.height + b.height - Rat(2) * m + a.excess + b.excess;
    }

  private:
    bool try_add_end(const PuiseuxSeries& e) {
        for (const auto& known : ends_) {
            PuiseuxSeries d = known - e;
            if (d.is_zero()) {
                if (d.truncation().is_infinite()) return true; // identical end, fold it
                return false;                                  // indistinguishable: give up
            }
        }
        ends_.push_back(e);
        return true;
    }

    void finish(const BerkMap& f) {
        int n = chain_count();
        meets_.assign(n, std::vector<Rat>(n, Rat(0)));
        Rat extent(1);
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                PuiseuxSeries d = ends_[i] - ends_[j];
                Rat m = d.valuation().value();
                meets_[i][j] = meets_[j][i] = m;
                extent = rat_max(extent, m.abs());
            }
        for (const auto& e : ends_)
            if (!e.is_zero()) extent = rat_max(extent, e.valuation().value().abs());
        auto widen = [&extent](const PuiseuxPolynomial& p) {
            for (const auto& c : p.coeffs())
                for (const auto& term : c.terms()) extent = rat_max(extent, term.exponent.abs());
        };
        widen(f.num());
        widen(f.den());
        top_ = extent * Rat(2) + Rat(2);

        caps_.assign(n, order_ - Rat(1));
        for (int i = 0; i < n; ++i) {
            // applying the map at height h consumes about 2h of the end's
            // precision, so exploration must stop well short of the truncation
            ExtRat tr = ends_[i].truncation();
            if (tr.is_finite())
                caps_[i] = rat_min(caps_[i], (tr.value() - Rat(2)) / Rat(2));
            Rat deepest_meet = -top_;
            for (int j = 0; j < n; ++j)
                if (j != i) deepest_meet = rat_max(deepest_meet, meets_[i][j]);
            if (!(deepest_meet < caps_[i]))
                throw precision_error("chain end not separated from its neighbours "
                                      "at this truncation");
        }

        edges_.clear();
        for (int i = 0; i < n; ++i) {
            std::vector<Rat> heights{-top_, caps_[i]};
            for (int j = 0; j < n; ++j)
                if (j != i && meets_[i][j] > -top_) heights.push_back(meets_[i][j]);
            std::sort(heights.begin(), heights.end());
            heights.erase(std::unique(heights.begin(), heights.end()), heights.end());
            for (std::size_t k = 0; k + 1 < heights.size(); ++k) {
                const Rat &a = heights[k], &b = heights[k + 1];
                // the segment (a, b] lies on every chain j with meet(i,j) >= b
                bool owned = true;
                for (int j = 0; j < i && owned; ++j)
                    if (!(meets_[i][j] < b)) owned = false;
                if (owned) edges_.push_back({i, a, b});
            }
        }
    }

    Rat order_;
    std::vector<PuiseuxSeries> ends_;
    std::vector<std::vector<Rat>> meets_;
    std::vector<Rat> caps_;
    Rat top_;
    std::vector<Edge> edges_;
};

} // namespace rattree
