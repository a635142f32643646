#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "cpoly.hpp"
#include "errors.hpp"

namespace rattree {

using cpoly::Complex;
using Vec3 = Eigen::Vector3d;

// Point (z, h) of the upper-half-space model of hyperbolic 3-space, h > 0.
struct HPoint {
    Complex z{0.0, 0.0};
    double h = 1.0;

    static HPoint basepoint() { return {Complex(0.0, 0.0), 1.0}; }
};

// d((z1,h1),(z2,h2)) =
//   2 log[ (sqrt(|z1-z2|^2+(h1-h2)^2) + sqrt(|z1-z2|^2+(h1+h2)^2)) / (2 sqrt(h1 h2)) ]
inline double h3_distance(const HPoint& p, const HPoint& q) {
    if (!(p.h > 0.0) || !(q.h > 0.0)) throw numerical_error("half-space point needs h > 0");
    double dz2 = std::norm(p.z - q.z);
    double a = std::sqrt(dz2 + (p.h - q.h) * (p.h - q.h));
    double b = std::sqrt(dz2 + (p.h + q.h) * (p.h + q.h));
    return 2.0 * std::log((a + b) / (2.0 * std::sqrt(p.h * q.h)));
}

// The affine map z -> Az + B extended to the isometry (z,h) -> (Az+B, |A|h).
inline HPoint moebius_extend(Complex A, Complex B, const HPoint& p) {
    if (A == Complex(0.0, 0.0)) throw numerical_error("affine extension needs A != 0");
    return {A * p.z + B, std::abs(A) * p.h};
}

// Point of the ball model, |b| < 1.
struct BallPoint {
    Vec3 b = Vec3::Zero();
};

// Poincare extension of the Mobius map [a b; c d] to upper half space:
// with q = z + h j as a quaternion, M(q) = (aq + b)(cq + d)^{-1}. The
// formula is invariant under scaling the matrix.
inline HPoint moebius_uhs(const Eigen::Matrix2cd& M, const HPoint& p) {
    Complex a = M(0, 0), b = M(0, 1), c = M(1, 0), d = M(1, 1);
    Complex czd = c * p.z + d;
    double den = std::norm(czd) + std::norm(c) * p.h * p.h;
    if (den == 0.0) throw numerical_error("Mobius extension evaluated at its pole");
    Complex zp = ((a * p.z + b) * std::conj(czd) + a * std::conj(c) * p.h * p.h) / den;
    double hp = std::abs(a * d - b * c) * p.h / den;
    if (!(hp > 0.0)) throw numerical_error("Mobius matrix is singular");
    return {zp, hp};
}

// Ball -> upper half space: inversion through the sphere of radius sqrt(2)
// centered at (0,0,-1). It is an involution, so the same formula converts
// back; the boundary restriction is stereographic projection from the
// south pole, z = (x + iy)/(1 + u). The height is computed by the
// cancellation-free closed form h = (1 - |b|^2)/|b + e3|^2.
namespace detail {
inline HPoint ball_to_h_raw(const Vec3& b) {
    Vec3 q = b + Vec3(0, 0, 1);
    double qq = q.squaredNorm();
    double h = (1.0 - b.squaredNorm()) / qq;
    return {Complex(2.0 * q.x() / qq, 2.0 * q.y() / qq), h};
}
} // namespace detail

inline HPoint ball_to_h(const BallPoint& p) {
    if (p.b.norm() >= 1.0 - 1e-12)
        throw numerical_error("ball point too close to the boundary to convert");
    return detail::ball_to_h_raw(p.b);
}

inline BallPoint h_to_ball(const HPoint& p) {
    if (!(p.h > 0.0)) throw numerical_error("half-space point needs h > 0");
    Vec3 q(p.z.real(), p.z.imag(), p.h + 1.0);
    Vec3 w = Vec3(0, 0, -1) + (2.0 / q.squaredNorm()) * q;
    return {w};
}

// Mobius transformation of the unit ball taking a to the origin (and 0 to
// -a); the inverse is the translation by -a. The same formula acts on the
// boundary sphere.
inline Vec3 ball_translate(const Vec3& a, const Vec3& x) {
    double aa = a.squaredNorm();
    Vec3 xa = x - a;
    double denom = 1.0 - 2.0 * x.dot(a) + x.squaredNorm() * aa;
    return ((1.0 - aa) * xa - xa.squaredNorm() * a) / denom;
}

// Evenly distributed unit vectors on the sphere (golden-angle spiral).
inline std::vector<Vec3> fibonacci_sphere(int n) {
    if (n <= 0) throw numerical_error("sphere lattice needs a positive sample count");
    std::vector<Vec3> pts;
    pts.reserve(n);
    const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        double u = 1.0 - (2.0 * i + 1.0) / n;
        double r = std::sqrt(std::max(0.0, 1.0 - u * u));
        double th = golden_angle * i;
        pts.emplace_back(r * std::cos(th), r * std::sin(th), u);
    }
    return pts;
}

// Riemann-sphere point in projective coordinates, z = n/d; (0:0) is never
// produced by the conversions below, and d = 0 encodes infinity.
struct ProjPoint {
    Complex n{0.0, 0.0};
    Complex d{1.0, 0.0};
};

// Boundary chart of ball_to_h: stereographic projection from the south
// pole. The two algebraically equal representations swap roles at the
// equator so neither denominator degenerates.
inline ProjPoint sphere_to_plane(const Vec3& s) {
    if (s.z() >= 0.0) return {Complex(s.x(), s.y()), Complex(1.0 + s.z(), 0.0)};
    return {Complex(1.0 - s.z(), 0.0), Complex(s.x(), -s.y())};
}

// Chordal distance on the Riemann sphere (diameter 2), exact in
// projective coordinates: 2 |n1 d2 - n2 d1| / (|(n1,d1)| |(n2,d2)|).
// Pairs are rescaled first so huge coordinates cannot overflow.
inline double chordal(const ProjPoint& p, const ProjPoint& q) {
    double sp = std::max(std::abs(p.n), std::abs(p.d));
    double sq = std::max(std::abs(q.n), std::abs(q.d));
    if (sp == 0.0 || sq == 0.0) throw numerical_error("projective point (0:0)");
    Complex pn = p.n / sp, pd = p.d / sp, qn = q.n / sq, qd = q.d / sq;
    double np = std::sqrt(std::norm(pn) + std::norm(pd));
    double nq = std::sqrt(std::norm(qn) + std::norm(qd));
    return 2.0 * std::abs(pn * qd - qn * pd) / (np * nq);
}

inline double chordal(Complex a, Complex b) {
    return chordal(ProjPoint{a, Complex(1.0, 0.0)}, ProjPoint{b, Complex(1.0, 0.0)});
}

inline Vec3 plane_to_sphere(const ProjPoint& p) {
    double nn = std::norm(p.n), dd = std::norm(p.d);
    if (nn + dd == 0.0) throw numerical_error("projective point (0:0)");
    Complex nd = p.n * std::conj(p.d);
    double s = 1.0 / (nn + dd);
    return Vec3(2.0 * nd.real() * s, 2.0 * nd.imag() * s, (dd - nn) * s);
}

// Complex rational map P/Q acting on the Riemann sphere, evaluated
// homogeneously in projective coordinates so poles and infinity need no
// special cases.
class SphereMap {
  public:
    SphereMap(cpoly::Poly num, cpoly::Poly den)
        : num_(cpoly::trimmed(std::move(num))), den_(cpoly::trimmed(std::move(den))) {
        if (num_.empty() && den_.empty()) throw numerical_error("map 0/0");
        deg_ = std::max(cpoly::degree(num_), cpoly::degree(den_));
        num_.resize(deg_ + 1, Complex(0.0, 0.0));
        den_.resize(deg_ + 1, Complex(0.0, 0.0));
    }

    int degree() const { return deg_; }
    const cpoly::Poly& num() const { return num_; }
    const cpoly::Poly& den() const { return den_; }

    ProjPoint apply(const ProjPoint& p) const {
        double scale = std::max(std::abs(p.n), std::abs(p.d));
        if (scale == 0.0) throw numerical_error("projective point (0:0)");
        Complex n = p.n / scale, d = p.d / scale;
        // Horner in n with the d-powers folded in: sum coeff[i] n^i d^(deg-i).
        Complex N(0.0, 0.0), D(0.0, 0.0);
        for (int i = deg_; i >= 0; --i) {
            N = N * n + num_[i] * dpow(d, deg_ - i);
            D = D * n + den_[i] * dpow(d, deg_ - i);
        }
        double out = std::max(std::abs(N), std::abs(D));
        if (out == 0.0) {
            // exactly on a common root of the two polynomials: nudge off it
            ProjPoint shifted{p.n + Complex(1e-13, 1e-13) * scale, p.d};
            return apply(shifted);
        }
        return {N / out, D / out};
    }

    // Finite-plane value P(z)/Q(z); may return infinity.
    Complex value(Complex z) const {
        Complex n = cpoly::eval(num_, z), d = cpoly::eval(den_, z);
        return n / d;
    }

    // Derivative (P'Q - PQ')/Q^2 at a finite point.
    Complex derivative(Complex z) const {
        Complex n = cpoly::eval(num_, z), d = cpoly::eval(den_, z);
        Complex np = cpoly::eval(cpoly::derivative(num_), z);
        Complex dp = cpoly::eval(cpoly::derivative(den_), z);
        return (np * d - n * dp) / (d * d);
    }

  private:
    static Complex dpow(Complex d, int k) {
        Complex r(1.0, 0.0);
        for (int i = 0; i < k; ++i) r *= d;
        return r;
    }

    cpoly::Poly num_, den_;
    int deg_ = 0;
};

} // namespace rattree
