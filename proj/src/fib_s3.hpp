#ifndef G2FIB_FIB_S3_HPP
#define G2FIB_FIB_S3_HPP

// The trivial coassociative fibration of the spinor bundle of S^3: the fibres
// are the R^4 fibres of the bundle itself. Induced fibre geometry, the
// SU(2) multi-moment map and the hyperkaehler triple.

#include "models.hpp"

namespace g2fib::s3 {

// Conformal factor of the induced fibre metric: g|_N = f(r) g_{R4}.
double fibre_conformal_factor(double c, double r);

// Cone-coordinate presentation: R = 3 r^(2/3), metric
// (1 + 27 c / R^3)^(-1/3) (dR^2 + (4/9) R^2 g_{S3}).
struct FibreMetricR {
  double coeff_dR2 = 0.0;      // coefficient of dR^2
  double coeff_sphere = 0.0;   // coefficient of g_{S3}
};
FibreMetricR fibre_metric_R(double c, double R);

// Deviation samples (R, dev) from the cone dR^2 + (4/9) R^2 g_{S3}, deviation
// measured against the cone coefficients (angular channel scaled by R^2).
std::vector<std::pair<double, double>> cone_deviation_samples(double c, double R_min,
                                                              double R_max, int n);

// Multi-moment map for the SU(2) action on the 4-form.
double multimoment(double c, double r);

// Generators of the left SU(2) action on the fibre, in (a0..a3) components.
std::array<TangentVector, 3> su2_generators(const Point& p);

// Hypersymplectic output: the triple coefficients against the flat fibre
// forms and Q with respect to the euclidean fibre volume (orientation chosen
// so that Q is positive definite).
struct Hyper {
  double scale = 0.0;   // triple = scale * (omega_1, omega_2, omega_3)
  Eigen::Matrix3d q;    // = (scale^2) * Id for the hyperkaehler triple
};
Hyper hypersymplectic(double c, const G2Package& pkg, const Point& p);

}  // namespace g2fib::s3

#endif  // G2FIB_FIB_S3_HPP
