#include "fib_s3.hpp"

#include <cmath>

namespace g2fib::s3 {

double fibre_conformal_factor(double c, double r) {
  if (c == 0.0 && r <= 0.0) throw DomainError("s3 fibre: cone vertex");
  return 4.0 * std::pow(c + r * r, -1.0 / 3.0);
}

FibreMetricR fibre_metric_R(double c, double R) {
  if (R <= 0.0) throw DomainError("s3 fibre: R must be positive");
  double f = std::pow(1.0 + 27.0 * c / (R * R * R), -1.0 / 3.0);
  return {f, f * (4.0 / 9.0) * R * R};
}

std::vector<std::pair<double, double>> cone_deviation_samples(double c, double R_min,
                                                              double R_max, int n) {
  std::vector<std::pair<double, double>> out;
  for (int i = 0; i < n; ++i) {
    double R = R_min * std::pow(R_max / R_min, static_cast<double>(i) / (n - 1));
    FibreMetricR m = fibre_metric_R(c, R);
    double dev_r = std::abs(m.coeff_dR2 - 1.0);
    double dev_s = std::abs(m.coeff_sphere - (4.0 / 9.0) * R * R) / (R * R);
    out.emplace_back(R, std::max(dev_r, dev_s));
  }
  return out;
}

double multimoment(double c, double r) {
  return 6.0 * (3.0 * c - r * r) * std::cbrt(c + r * r) -
         18.0 * std::pow(c, 4.0 / 3.0);
}

std::array<TangentVector, 3> su2_generators(const Point& p) {
  const double a0 = p[0], a1 = p[1], a2 = p[2], a3 = p[3];
  // X1 = i a, X2 = j a, X3 = k a in (a0,a1,a2,a3) components
  TangentVector x1, x2, x3;
  x1[0] = -a1;
  x1[1] = a0;
  x1[2] = -a3;
  x1[3] = a2;
  x2[0] = -a2;
  x2[1] = a3;
  x2[2] = a0;
  x2[3] = -a1;
  x3[0] = -a3;
  x3[1] = -a2;
  x3[2] = a1;
  x3[3] = a0;
  return {x1, x2, x3};
}

Hyper hypersymplectic(double c, const G2Package& pkg, const Point& p) {
  AltForm phi = pkg.phi(p);
  // Fibre tangent frame: the coordinate a-directions.
  std::array<TangentVector, 4> frame{};
  for (int i = 0; i < 4; ++i) frame[static_cast<size_t>(i)][i] = 1.0;
  // Normals dual to b_1, b_2, b_3 in the frame sense b_i(n_j) = delta_ij;
  // the metric is block diagonal in the (b, zeta) frame, so they are the
  // rescaled metric duals.
  MetricAt m = pkg.metric_at(p);
  std::array<TangentVector, 3> normals{};
  for (int k = 0; k < 3; ++k) {
    AltForm bk = pkg.named.at("b" + std::to_string(k + 1))(p);
    TangentVector nk = sharp(m, bk);
    double scale = 1.0 / inner(m, bk, bk);
    for (int i = 0; i < kDim; ++i) nk[i] *= scale;
    normals[static_cast<size_t>(k)] = nk;
  }
  // Q against the euclidean fibre volume; the coassociative orientation makes
  // the triple anti-self-dual, so take the reversed a-volume to get Q > 0.
  AltForm vol4 = AltForm::basis({0, 1, 2, 3}, -1.0);
  HypersymplecticAt h = hypersymplectic_at(phi, frame, normals, vol4);
  if (!h.q_positive_definite) throw DomainError("s3 hypersymplectic: Q not positive");
  Hyper out;
  out.q = h.q;
  out.scale = std::sqrt(h.q(0, 0));
  (void)c;
  return out;
}

}  // namespace g2fib::s3
