// Natural dynamics of the circular restricted three-body problem in the
// rotating frame: acceleration field, analytic Jacobians, and the
// rotating-frame specific energy.
//
// Units are the usual normalized set: primary-secondary distance 1 DU,
// their period 2 pi TU, total system mass 1. The primary sits at
// (-mu, 0, 0), the secondary at (1-mu, 0, 0).

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace ltgs {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

struct CartesianState {
    Vec3 r;
    Vec3 v;

    Vec6 as_vec6() const {
        Vec6 s;
        s << r, v;
        return s;
    }
    static CartesianState from_vec6(const Vec6& s) {
        return {s.head<3>(), s.tail<3>()};
    }
};

class SingularityError : public std::runtime_error {
public:
    explicit SingularityError(double rho)
        : std::runtime_error("state inside collision radius of a primary"), rho(rho) {}
    double rho;
};

// Default guard radius below which the field is treated as singular.
inline constexpr double kCollisionRadius = 1e-6;

inline void primary_distances(const Vec3& r, double mu, double& rho1, double& rho2) {
    const double x1 = r[0] + mu;
    const double x2 = r[0] - 1.0 + mu;
    const double yz = r[1] * r[1] + r[2] * r[2];
    rho1 = std::sqrt(x1 * x1 + yz);
    rho2 = std::sqrt(x2 * x2 + yz);
}

// g(r, v): Coriolis + centrifugal + the two gravity terms.
inline Vec3 accel(const CartesianState& s, double mu,
                  double collision_radius = kCollisionRadius) {
    double rho1, rho2;
    primary_distances(s.r, mu, rho1, rho2);
    if (rho1 < collision_radius || rho2 < collision_radius)
        throw SingularityError(std::min(rho1, rho2));
    const double inv13 = 1.0 / (rho1 * rho1 * rho1);
    const double inv23 = 1.0 / (rho2 * rho2 * rho2);
    const double omu = 1.0 - mu;
    Vec3 g;
    g[0] = 2.0 * s.v[1] + s.r[0] - omu * (s.r[0] + mu) * inv13 - mu * (s.r[0] - 1.0 + mu) * inv23;
    g[1] = -2.0 * s.v[0] + s.r[1] - omu * s.r[1] * inv13 - mu * s.r[1] * inv23;
    g[2] = -omu * s.r[2] * inv13 - mu * s.r[2] * inv23;
    return g;
}

// G = dg/dr (symmetric part of the gravity gradient plus the centrifugal
// identity block) and Hv = dg/dv (constant Coriolis part).
inline void jacobians(const CartesianState& s, double mu, Mat3& G, Mat3& Hv,
                      double collision_radius = kCollisionRadius) {
    double rho1, rho2;
    primary_distances(s.r, mu, rho1, rho2);
    if (rho1 < collision_radius || rho2 < collision_radius)
        throw SingularityError(std::min(rho1, rho2));

    const double omu = 1.0 - mu;
    const double inv13 = 1.0 / (rho1 * rho1 * rho1);
    const double inv23 = 1.0 / (rho2 * rho2 * rho2);
    const double inv15 = inv13 / (rho1 * rho1);
    const double inv25 = inv23 / (rho2 * rho2);
    const Vec3 d1(s.r[0] + mu, s.r[1], s.r[2]);
    const Vec3 d2(s.r[0] - 1.0 + mu, s.r[1], s.r[2]);

    G = 3.0 * omu * inv15 * (d1 * d1.transpose()) + 3.0 * mu * inv25 * (d2 * d2.transpose());
    const double diag = -omu * inv13 - mu * inv23;
    G(0, 0) += diag + 1.0;
    G(1, 1) += diag + 1.0;
    G(2, 2) += diag;

    Hv.setZero();
    Hv(0, 1) = 2.0;
    Hv(1, 0) = -2.0;
}

// Rotating-frame specific energy; constant along ballistic arcs.
inline double jacobi_energy(const CartesianState& s, double mu,
                            double collision_radius = kCollisionRadius) {
    double rho1, rho2;
    primary_distances(s.r, mu, rho1, rho2);
    if (rho1 < collision_radius || rho2 < collision_radius)
        throw SingularityError(std::min(rho1, rho2));
    return 0.5 * s.v.squaredNorm() - 0.5 * (s.r[0] * s.r[0] + s.r[1] * s.r[1]) -
           (1.0 - mu) / rho1 - mu / rho2;
}

}  // namespace ltgs
