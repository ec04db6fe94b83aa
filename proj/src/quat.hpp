#ifndef G2FIB_QUAT_HPP
#define G2FIB_QUAT_HPP

#include <array>
#include <cmath>

#include <Eigen/Dense>

namespace g2fib {

struct Quat {
  double w = 0, x = 0, y = 0, z = 0;

  friend Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  friend Quat operator+(const Quat& a, const Quat& b) {
    return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend Quat operator*(double s, const Quat& a) {
    return {s * a.w, s * a.x, s * a.y, s * a.z};
  }
  Quat conj() const { return {w, -x, -y, -z}; }
  double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
};

// exp(v1 i + v2 j + v3 k)
inline Quat qexp_im(double v1, double v2, double v3) {
  double r = std::sqrt(v1 * v1 + v2 * v2 + v3 * v3);
  double s = (r < 1e-8) ? 1.0 - r * r / 6.0 : std::sin(r) / r;
  return {std::cos(r), s * v1, s * v2, s * v3};
}

// d/dt exp(t e_m) * exp(v) pattern is not needed; we differentiate
// q(y) = exp(c (y1 i + y2 j + y3 k)) directly:
// returns q and the three partial derivatives dq/dy_m.
inline void qexp_im_with_partials(double c, const double y[3], Quat* q,
                                  std::array<Quat, 3>* dq) {
  double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
  double r = std::sqrt(r2);
  double cr = c * r;
  double cosr = std::cos(cr);
  double sinc, dsinc_over_r;  // sin(cr)/r and d/dr[sin(cr)/r] / r
  if (r < 1e-6) {
    sinc = c * (1.0 - cr * cr / 6.0);
    dsinc_over_r = -c * c * c / 3.0 + c * c * c * cr * cr / 30.0;
  } else {
    sinc = std::sin(cr) / r;
    dsinc_over_r = (c * cosr / r - std::sin(cr) / r2) / r;
  }
  *q = Quat{cosr, sinc * y[0], sinc * y[1], sinc * y[2]};
  for (int m = 0; m < 3; ++m) {
    Quat d{};
    // d(cos(cr))/dy_m = -c sin(cr) y_m / r = -c y_m sinc
    d.w = -c * y[m] * sinc;
    double coeff = dsinc_over_r * y[m];
    d.x = coeff * y[0];
    d.y = coeff * y[1];
    d.z = coeff * y[2];
    if (m == 0) d.x += sinc;
    if (m == 1) d.y += sinc;
    if (m == 2) d.z += sinc;
    (*dq)[static_cast<size_t>(m)] = d;
  }
}

// matrix of a -> a * h on coordinates (a0, a1, a2, a3)
inline Eigen::Matrix4d right_mult_matrix(const Quat& h) {
  Eigen::Matrix4d m;
  // columns: image of basis quaternions 1, i, j, k
  Quat cols[4] = {Quat{1, 0, 0, 0} * h, Quat{0, 1, 0, 0} * h, Quat{0, 0, 1, 0} * h,
                  Quat{0, 0, 0, 1} * h};
  for (int c = 0; c < 4; ++c) {
    m(0, c) = cols[c].w;
    m(1, c) = cols[c].x;
    m(2, c) = cols[c].y;
    m(3, c) = cols[c].z;
  }
  return m;
}

inline Eigen::Matrix4d left_mult_matrix(const Quat& h) {
  Eigen::Matrix4d m;
  Quat cols[4] = {h * Quat{1, 0, 0, 0}, h * Quat{0, 1, 0, 0}, h * Quat{0, 0, 1, 0},
                  h * Quat{0, 0, 0, 1}};
  for (int c = 0; c < 4; ++c) {
    m(0, c) = cols[c].w;
    m(1, c) = cols[c].x;
    m(2, c) = cols[c].y;
    m(3, c) = cols[c].z;
  }
  return m;
}

}  // namespace g2fib

#endif  // G2FIB_QUAT_HPP
