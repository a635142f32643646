#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "errors.hpp"

namespace rattree::cpoly {

using Complex = std::complex<double>;
// Dense complex polynomial, coefficient of z^i at index i.
using Poly = std::vector<Complex>;

// Companion-matrix dimension guard.
inline constexpr int companion_cap = 700;

inline double max_abs(const Poly& p) {
    double m = 0.0;
    for (const auto& c : p) m = std::max(m, std::abs(c));
    return m;
}

// Drop negligible leading coefficients (relative to the largest one).
inline Poly trimmed(Poly p, double rel_tol = 1e-13) {
    double scale = max_abs(p);
    while (!p.empty() && std::abs(p.back()) <= rel_tol * scale) p.pop_back();
    return p;
}

inline int degree(const Poly& p) { return static_cast<int>(p.size()) - 1; }

inline bool is_zero(const Poly& p) { return trimmed(p).empty(); }

inline Complex eval(const Poly& p, Complex z) {
    Complex v(0.0, 0.0);
    for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * z + *it;
    return v;
}

inline Poly derivative(const Poly& p) {
    Poly d;
    for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<double>(i));
    return d;
}

inline Poly multiply(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

inline Poly from_roots(Complex lead, const std::vector<Complex>& roots) {
    Poly p{lead};
    for (const auto& r : roots) p = multiply(p, Poly{-r, Complex(1.0, 0.0)});
    return p;
}

// All complex roots via the companion matrix (monic reduction + Eigen Schur).
inline std::vector<Complex> roots(const Poly& poly) {
    Poly p = trimmed(poly);
    if (p.size() <= 1) return {};
    int n = degree(p);
    if (n > companion_cap) throw size_error("polynomial degree exceeds companion matrix cap");
    // Strip exact zero roots first for stability.
    std::vector<Complex> rs;
    std::size_t shift = 0;
    double scale = max_abs(p);
    while (shift < p.size() - 1 && std::abs(p[shift]) <= 1e-300 * scale) ++shift;
    for (std::size_t i = 0; i < shift; ++i) rs.push_back(Complex(0.0, 0.0));
    if (shift > 0) p.erase(p.begin(), p.begin() + shift);
    n = degree(p);
    if (n == 0) return rs;
    if (n == 1) {
        rs.push_back(-p[0] / p[1]);
        return rs;
    }
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) C(i, n - 1) = -p[i] / p[n];
    for (int i = 1; i < n; ++i) C(i, i - 1) = Complex(1.0, 0.0);
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success) throw numerical_error("companion eigenvalue solve failed");
    for (int i = 0; i < n; ++i) rs.push_back(es.eigenvalues()(i));
    return rs;
}

// A single Newton polish pass (handy after clustering perturbs a root).
inline Complex polish_root(const Poly& p, Complex z, int iters = 12) {
    Poly d = derivative(p);
    for (int i = 0; i < iters; ++i) {
        Complex f = eval(p, z), g = eval(d, z);
        if (std::abs(g) == 0.0) break;
        Complex step = f / g;
        z -= step;
        if (std::abs(step) <= 1e-15 * (1.0 + std::abs(z))) break;
    }
    return z;
}

struct RootCluster {
    Complex center;
    int multiplicity;
};

// Group numerically coincident roots.  A k-fold root computed through the
// companion matrix smears into a cluster of radius ~ backward_tol^(1/k), so
// the merge threshold must grow with the candidate multiplicity: two groups
// of sizes k1, k2 merge when their means are within backward_tol^(1/(k1+k2)).
// For a pair of simple roots this is backward_tol^(1/2) (1e-6 by default),
// while a five-fold root merges at ~4e-3.  Cluster centers are means, refined
// on a derivative of matching order so multiple roots stay well-conditioned.
inline std::vector<RootCluster> clustered_roots(const Poly& poly, double backward_tol = 1e-12) {
    std::vector<Complex> rs = roots(poly);
    double scale = 1.0;
    for (const auto& r : rs) scale = std::max(scale, std::abs(r));
    struct Group {
        Complex sum;
        int count;
        Complex mean() const { return sum / static_cast<double>(count); }
    };
    std::vector<Group> groups;
    for (const auto& r : rs) groups.push_back({r, 1});
    bool merged = true;
    while (merged) {
        merged = false;
        for (std::size_t i = 0; i < groups.size() && !merged; ++i)
            for (std::size_t j = i + 1; j < groups.size() && !merged; ++j) {
                double thr =
                    scale * std::pow(backward_tol, 1.0 / double(groups[i].count + groups[j].count));
                if (std::abs(groups[i].mean() - groups[j].mean()) <= thr) {
                    groups[i].sum += groups[j].sum;
                    groups[i].count += groups[j].count;
                    groups.erase(groups.begin() + j);
                    merged = true;
                }
            }
    }
    std::vector<RootCluster> out;
    for (const auto& g : groups) {
        Complex center = g.mean();
        if (g.count > 1) {
            // One deflation step: a k-fold root is a simple root of the
            // (k-1)-st derivative, so polish it there.
            Poly d = poly;
            for (int k = 1; k < g.count; ++k) d = derivative(d);
            center = polish_root(d, center);
        } else {
            center = polish_root(poly, center);
        }
        out.push_back({center, g.count});
    }
    return out;
}

} // namespace rattree::cpoly
