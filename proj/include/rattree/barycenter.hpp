#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "halfspace.hpp"

namespace rattree {

inline constexpr int default_sphere_samples = 20000;

namespace detail {

// Weighted Euclidean mean of the samples pulled to the frame centered at b.
inline Vec3 frame_mean(const Vec3& b, const std::vector<Vec3>& dirs,
                       const std::vector<double>& weights) {
    Vec3 m = Vec3::Zero();
    if (weights.empty()) {
        for (const auto& x : dirs) m += ball_translate(b, x);
        return m / static_cast<double>(dirs.size());
    }
    for (size_t i = 0; i < dirs.size(); ++i) m += weights[i] * ball_translate(b, dirs[i]);
    return m;
}

struct BarycenterSolve {
    Vec3 b = Vec3::Zero();
    double residual = 0.0;
    bool converged = false;
};

// Damped fixed-point iteration for the balance point: step toward the
// frame mean, halving the step until the residual decreases. A stall
// (no step length helps) is reported, not thrown: near the boundary it
// signals that the caller should renormalize the frame and retry.
inline BarycenterSolve barycenter_solve(const std::vector<Vec3>& dirs,
                                        const std::vector<double>& weights,
                                        double tol, int max_iter) {
    Vec3 b = Vec3::Zero();
    Vec3 m = frame_mean(b, dirs, weights);
    double res = m.norm();
    for (int it = 0; it < max_iter; ++it) {
        if (res < tol) return {b, res, true};
        double lam = 0.5;
        bool moved = false;
        for (int cut = 0; cut < 30; ++cut) {
            Vec3 cand = ball_translate(-b, Vec3(lam * m));
            if (cand.norm() >= 1.0 - 1e-15) {
                lam *= 0.5;
                continue;
            }
            Vec3 mc = frame_mean(cand, dirs, weights);
            if (mc.norm() < res) {
                b = cand;
                m = mc;
                res = mc.norm();
                moved = true;
                break;
            }
            lam *= 0.5;
        }
        if (!moved) return {b, res, false};
    }
    return {b, res, res < tol};
}

} // namespace detail

// Barycenter of a probability measure on the sphere given by unit vectors
// with weights (uniform when omitted): the point b for which the measure
// pulled to the frame centered at b has Euclidean mean zero. Requires no
// atom of mass >= 1/2.
inline BallPoint conformal_barycenter(const std::vector<Vec3>& dirs,
                                      const std::vector<double>& weights = {},
                                      double tol = 1e-10, int max_iter = 500) {
    if (dirs.empty()) throw numerical_error("barycenter of an empty sample set");
    if (!weights.empty() && weights.size() != dirs.size())
        throw numerical_error("barycenter weights do not match the sample count");
    auto s = detail::barycenter_solve(dirs, weights, tol, max_iter);
    if (!s.converged)
        throw numerical_error("barycenter did not converge; last residual " +
                              std::to_string(s.residual));
    return {s.b};
}

namespace detail {

// Median of a coordinate extracted from the frame readings.
inline double median_of(std::vector<double> v) {
    size_t k = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + k, v.end());
    return v[k];
}

} // namespace detail

// Barycentric extension of a rational map, evaluated at one point: push the
// round measure (sphere-lattice quadrature) through the frame map of x and
// then through f, and take the conformal barycenter of the image measure.
//
// The image samples are kept in projective coordinates and re-read through
// a Mobius frame that chases the current estimate: for a strongly
// degenerating map the barycenter can sit tens of units deep, where a
// fixed frame has no double-precision resolution left. Two frame moves are
// used: composing the partial walk of a stalled solve, and, when the
// measure looks like a single atom from the current frame (residual pinned
// at 1), recentring directly on the cluster by its median position and
// median spread, inverting first when the cluster sits past the unit
// circle. Frame coordinates stay accurate because the cancellation
// (w - c)/s happens on the exact projective pairs.
inline HPoint barycentric_extension_eval(const SphereMap& f, const HPoint& x,
                                         int n_samples = default_sphere_samples) {
    std::vector<ProjPoint> images;
    images.reserve(n_samples);
    for (const auto& s : fibonacci_sphere(n_samples)) {
        ProjPoint w = sphere_to_plane(s);
        // boundary action of the frame map of x: w -> x.h w + x.z
        images.push_back(f.apply({x.h * w.n + x.z * w.d, w.d}));
    }
    Eigen::Matrix2cd ginv = Eigen::Matrix2cd::Identity(); // reading frame
    std::vector<ProjPoint> read(images.size());
    std::vector<Vec3> dirs(images.size());
    for (int round = 0; round < 60; ++round) {
        for (size_t i = 0; i < images.size(); ++i) {
            read[i] = {ginv(0, 0) * images[i].n + ginv(0, 1) * images[i].d,
                       ginv(1, 0) * images[i].n + ginv(1, 1) * images[i].d};
            dirs[i] = plane_to_sphere(read[i]);
        }
        auto s = detail::barycenter_solve(dirs, {}, 1e-10, 500);
        double depth = s.b.norm();
        if (s.converged && depth <= 0.9) {
            // answer = accumulated frame applied to the local solution
            Eigen::Matrix2cd g;
            g << ginv(1, 1), -ginv(0, 1), -ginv(1, 0), ginv(0, 0);
            return moebius_uhs(g, detail::ball_to_h_raw(s.b));
        }
        Eigen::Matrix2cd step; // local frame move, composed as ginv <- step^-1 ginv
        if (depth > 1e-9) {
            HPoint y = detail::ball_to_h_raw(s.b);
            step << Complex(1.0 / y.h, 0.0), -y.z / y.h, Complex(0.0, 0.0), Complex(1.0, 0.0);
        } else {
            // effective atom: every reading is numerically one direction, so
            // locate the cluster on the exact pairs and recentre the frame
            bool invert = 2 * std::count_if(read.begin(), read.end(), [](const ProjPoint& p) {
                              return std::abs(p.n) > std::abs(p.d);
                          }) > static_cast<long>(read.size());
            std::vector<double> re, im;
            re.reserve(read.size());
            im.reserve(read.size());
            std::vector<Complex> u(read.size());
            for (size_t i = 0; i < read.size(); ++i) {
                Complex num = invert ? read[i].d : read[i].n;
                Complex den = invert ? read[i].n : read[i].d;
                u[i] = std::abs(den) > 0.0 ? num / den : Complex(1e300, 0.0);
                if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag()))
                    u[i] = Complex(1e300, 0.0);
                re.push_back(u[i].real());
                im.push_back(u[i].imag());
            }
            Complex c(detail::median_of(re), detail::median_of(im));
            std::vector<double> spread;
            spread.reserve(u.size());
            for (const auto& v : u) spread.push_back(std::abs(v - c));
            double sc = detail::median_of(spread);
            if (!(sc > 0.0) || !std::isfinite(sc))
                throw numerical_error("measure concentrates at a single point; "
                                      "no barycenter");
            step << Complex(1.0 / sc, 0.0), -c / sc, Complex(0.0, 0.0), Complex(1.0, 0.0);
            if (invert) {
                Eigen::Matrix2cd flip;
                flip << Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0);
                step = step * flip;
            }
        }
        ginv = step * ginv;
        ginv /= ginv.cwiseAbs().maxCoeff();
    }
    throw numerical_error("extension quadrature did not settle in 60 frame moves");
}

// Largest finite-difference expansion ratio of the extension over a spread
// of base points and coordinate directions: an experimental stand-in for
// the hyperbolic operator norm of its derivative.
inline double lipschitz_probe(const SphereMap& f, int sample_count,
                              int n_samples = 4000, unsigned seed = 20260814) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> coord(-3.0, 3.0);
    const double eps = 0.05;
    double best = 0.0;
    for (int k = 0; k < sample_count; ++k) {
        HPoint x{Complex(coord(rng), coord(rng)), std::exp(coord(rng))};
        HPoint fx = barycentric_extension_eval(f, x, n_samples);
        HPoint steps[3] = {
            {x.z + Complex(eps * x.h, 0.0), x.h},
            {x.z + Complex(0.0, eps * x.h), x.h},
            {x.z, x.h * std::exp(eps)},
        };
        for (const auto& y : steps) {
            double num = h3_distance(barycentric_extension_eval(f, y, n_samples), fx);
            best = std::max(best, num / h3_distance(y, x));
        }
    }
    return best;
}

} // namespace rattree
