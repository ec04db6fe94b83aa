#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "forms.hpp"

using namespace g2fib;

namespace {

std::mt19937_64 rng(12345);

AltForm random_form(int degree, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  AltForm a(degree);
  for (int i = 0; i < a.size(); ++i) a[i] = u(rng);
  return a;
}

MetricAt random_spd_metric(int dim = 7) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd A(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) A(i, j) = u(rng);
  Eigen::MatrixXd g = A.transpose() * A + 0.5 * Eigen::MatrixXd::Identity(dim, dim);
  AltForm vol(dim);
  vol[0] = std::sqrt(g.determinant());
  return MetricAt::from_matrix(g, vol);
}

TangentVector random_vector() {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  TangentVector x;
  for (int i = 0; i < 7; ++i) x[i] = u(rng);
  return x;
}

double max_diff(const AltForm& a, const AltForm& b) {
  AltForm d = a - b;
  return d.max_abs();
}

}  // namespace

TEST_CASE("wedge basis cases") {
  AltForm d12 = wedge(AltForm::basis({0}), AltForm::basis({1}));
  const int idx[2] = {0, 1};
  CHECK(d12.coeff(std::span<const int>(idx, 2)) == doctest::Approx(1.0));

  AltForm zero = wedge(AltForm::basis({0}), AltForm::basis({0}));
  CHECK(zero.max_abs() == 0.0);

  AltForm a = wedge(AltForm::basis({0, 1}), AltForm::basis({2, 3}));
  AltForm b = wedge(AltForm::basis({2, 3}), AltForm::basis({0, 1}));
  CHECK(max_diff(a, b) == 0.0);
}

TEST_CASE("wedge graded anticommutativity and associativity") {
  for (int ka = 0; ka <= 3; ++ka) {
    for (int kb = 0; ka + kb <= 5; ++kb) {
      AltForm a = random_form(ka);
      AltForm b = random_form(kb);
      AltForm ab = wedge(a, b);
      AltForm ba = wedge(b, a);
      double sign = ((ka * kb) % 2 == 0) ? 1.0 : -1.0;
      CHECK(max_diff(ab, sign * ba) == 0.0);  // exact, bit for bit
      AltForm c = random_form(std::min(2, 7 - ka - kb));
      CHECK(max_diff(wedge(ab, c), wedge(a, wedge(b, c))) < 1e-14);
    }
  }
}

TEST_CASE("interior product basics and derivation rule") {
  TangentVector e1, e3;
  e1[0] = 1.0;
  e3[2] = 1.0;
  AltForm d12 = AltForm::basis({0, 1});
  CHECK(max_diff(interior(e1, d12), AltForm::basis({1})) == 0.0);
  CHECK(interior(e3, d12).max_abs() == 0.0);
  CHECK_THROWS_AS(interior(e1, AltForm(0)), DomainError);

  // X . (a ^ b) = (X . a) ^ b + (-1)^k a ^ (X . b)
  for (int trial = 0; trial < 20; ++trial) {
    int ka = 1 + static_cast<int>(rng() % 3);
    int kb = 1 + static_cast<int>(rng() % 3);
    AltForm a = random_form(ka);
    AltForm b = random_form(kb);
    TangentVector x = random_vector();
    AltForm lhs = interior(x, wedge(a, b));
    AltForm rhs = wedge(interior(x, a), b);
    double sign = (ka % 2 == 0) ? 1.0 : -1.0;
    rhs += sign * wedge(a, interior(x, b));
    CHECK(max_diff(lhs, rhs) < 1e-14);
  }
}

TEST_CASE("interior of e1 into phi_r7 matches termwise expansion") {
  TangentVector e1;
  e1[0] = 1.0;
  // e1 . phi = dx2^dx3 + w1
  AltForm expect = AltForm::basis({1, 2}) + AltForm::basis({3, 4}) - AltForm::basis({5, 6});
  CHECK(max_diff(interior(e1, phi_r7()), expect) == 0.0);
}

TEST_CASE("hodge star: euclidean and double star") {
  MetricAt eu = MetricAt::euclidean(7);
  AltForm one(0);
  one[0] = 1.0;
  AltForm top = hodge(eu, one);
  AltForm expect(7);
  expect[0] = 1.0;
  CHECK(max_diff(top, expect) == 0.0);

  // star phi_r7 equals the listed 4-form
  CHECK(max_diff(hodge(eu, phi_r7()), starphi_r7()) < 1e-14);

  // star star = identity on all degrees, random metric
  for (int trial = 0; trial < 50; ++trial) {
    MetricAt m = random_spd_metric();
    int k = static_cast<int>(rng() % 8);
    AltForm a = random_form(k);
    CHECK(max_diff(hodge(m, hodge(m, a)), a) < 1e-12 * std::max(1.0, a.max_abs()));
  }
}

TEST_CASE("hodge star respects vol orientation and a^*b symmetry") {
  for (int trial = 0; trial < 20; ++trial) {
    MetricAt m = random_spd_metric();
    int k = static_cast<int>(rng() % 8);
    AltForm a = random_form(k);
    AltForm b = random_form(k);
    // a ^ *b = <a,b> vol
    AltForm w = wedge(a, hodge(m, b));
    double volc = m.vol[0];
    CHECK(w[0] / volc == doctest::Approx(inner(m, a, b)).epsilon(1e-10));
    AltForm w2 = wedge(b, hodge(m, a));
    CHECK(max_diff(w, w2) < 1e-12 * std::max(1.0, w.max_abs()));
  }
  // reversed orientation flips the star
  MetricAt m = random_spd_metric();
  AltForm vneg = m.vol * -1.0;
  MetricAt mneg = MetricAt::from_matrix(m.g, vneg);
  AltForm a = random_form(3);
  CHECK(max_diff(hodge(mneg, a), -1.0 * hodge(m, a)) == 0.0);
}

TEST_CASE("metric from three-form: flat model") {
  MetricAt m = metric_from_three_form(phi_r7());
  CHECK((m.g - Eigen::MatrixXd::Identity(7, 7)).norm() < 1e-13);
  CHECK(m.vol[0] == doctest::Approx(1.0));

  // scaling: (lambda^3 phi) gives lambda^2 g and lambda^7 vol
  MetricAt m8 = metric_from_three_form(8.0 * phi_r7());
  CHECK((m8.g - 4.0 * Eigen::MatrixXd::Identity(7, 7)).norm() < 1e-12);
  CHECK(m8.vol[0] == doctest::Approx(128.0));

  CHECK_THROWS_AS(metric_from_three_form(AltForm(3)), DomainError);
}

TEST_CASE("metric from three-form: generic frame pullback") {
  // phi built from a random coframe stays definite; induced metric must be
  // A^T A for the frame change, volume det(A).
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Identity();
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) A(i, j) += u(rng);
  AltForm phi = pullback(A, phi_r7());
  MetricAt m = metric_from_three_form(phi);
  Eigen::MatrixXd expect = A.transpose() * A;
  CHECK((m.g - expect).norm() < 1e-10 * expect.norm());
  CHECK(m.vol[0] == doctest::Approx(A.determinant()).epsilon(1e-10));
}

TEST_CASE("cross product") {
  MetricAt m = metric_from_three_form(phi_r7());
  TangentVector e1, e2;
  e1[0] = 1.0;
  e2[1] = 1.0;
  TangentVector z = cross(m, phi_r7(), e1, e1);
  for (int i = 0; i < 7; ++i) CHECK(z[i] == doctest::Approx(0.0));
  TangentVector e12 = cross(m, phi_r7(), e1, e2);
  CHECK(e12[2] == doctest::Approx(1.0));  // dx1 x dx2 = dx3 direction
  for (int i = 0; i < 7; ++i)
    if (i != 2) CHECK(std::abs(e12[i]) < 1e-14);

  // |Xi x Xj|-type identity over random triples
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Identity();
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) A(i, j) += u(rng);
  AltForm phi = pullback(A, phi_r7());
  MetricAt mg = metric_from_three_form(phi);
  auto ip = [&](const TangentVector& a, const TangentVector& b) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) s += mg.g(i, j) * a[i] * b[j];
    return s;
  };
  for (int trial = 0; trial < 100; ++trial) {
    TangentVector xi = random_vector(), xj = random_vector(), xk = random_vector();
    TangentVector cij = cross(mg, phi, xi, xj);
    TangentVector cik = cross(mg, phi, xi, xk);
    double lhs = ip(cij, cik);
    double rhs = ip(xi, xi) * ip(xj, xk) - ip(xi, xj) * ip(xi, xk);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("adapted coframe reconstructs the flat package") {
  AltForm phi = phi_r7();
  AdaptedCoframe cf = adapted_coframe(phi, AltForm::basis({1}), AltForm::basis({2}),
                                      AltForm::basis({3}));
  // h1 = dx1, wk = dy_k
  CHECK(max_diff(cf.forms[0], AltForm::basis({0})) < 1e-12);
  CHECK(max_diff(cf.forms[4], AltForm::basis({4})) < 1e-12);
  CHECK(max_diff(cf.forms[5], AltForm::basis({5})) < 1e-12);
  CHECK(max_diff(cf.forms[6], AltForm::basis({6})) < 1e-12);
  CHECK(max_diff(canonical_phi(cf.forms), phi) < 1e-10);
  CHECK(max_diff(canonical_starphi(cf.forms), starphi_r7()) < 1e-10);

  // Gram matrix of the output coframe is the identity
  MetricAt m = metric_from_three_form(phi);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      CHECK(inner(m, cf.forms[static_cast<size_t>(i)], cf.forms[static_cast<size_t>(j)]) ==
            doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-10));

  // violated precondition is rejected
  CHECK_THROWS_AS(adapted_coframe(phi, AltForm::basis({1}),
                                  AltForm::basis({1}) + AltForm::basis({2}),
                                  AltForm::basis({3})),
                  DomainError);
}

TEST_CASE("adapted coframe on a rotated definite form") {
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  Eigen::Matrix<double, 7, 7> A = Eigen::Matrix<double, 7, 7>::Identity();
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) A(i, j) += u(rng);
  AltForm phi = pullback(A, phi_r7());
  AltForm starphi;
  {
    MetricAt m = metric_from_three_form(phi);
    starphi = hodge(m, phi);
  }
  // pull back the flat inputs through A as well
  AltForm h2 = pullback(A, AltForm::basis({1}));
  AltForm h3 = pullback(A, AltForm::basis({2}));
  AltForm w0 = pullback(A, AltForm::basis({3}));
  AdaptedCoframe cf = adapted_coframe(phi, h2, h3, w0);
  CHECK(max_diff(canonical_phi(cf.forms), phi) < 1e-10 * std::max(1.0, phi.max_abs()));
  CHECK(max_diff(canonical_starphi(cf.forms), starphi) <
        1e-10 * std::max(1.0, starphi.max_abs()));
}

TEST_CASE("orbit coframe: independence and orthogonality") {
  AltForm phi = phi_r7();
  AltForm starphi = starphi_r7();
  MetricAt m = metric_from_three_form(phi);
  // vertical = span(dy) directions: indices 3..6
  TangentVector x1, x2, x3;
  x1[3] = 1.0;
  x2[4] = 1.0;
  x3[5] = 1.0;
  OrbitCoframe oc = orbit_coframe(phi, starphi, x1, x2, x3);
  CHECK(oc.w0.max_abs() > 0.5);
  for (const AltForm* h : {&oc.h1, &oc.h2, &oc.h3})
    CHECK(std::abs(inner(m, *h, oc.w0)) < 1e-12);
  // orthogonal verticals give orthogonal horizontals
  CHECK(std::abs(inner(m, oc.h1, oc.h2)) < 1e-12);
  CHECK(std::abs(inner(m, oc.h2, oc.h3)) < 1e-12);

  CHECK_THROWS_AS(orbit_coframe(phi, starphi, x1, x1, x3), DomainError);
}

TEST_CASE("hypersymplectic at a flat point") {
  AltForm phi = phi_r7();
  std::array<TangentVector, 4> frame{};
  for (int i = 0; i < 4; ++i) frame[static_cast<size_t>(i)][3 + i] = 1.0;
  std::array<TangentVector, 3> normals{};
  for (int k = 0; k < 3; ++k) normals[static_cast<size_t>(k)][k] = 1.0;
  AltForm vol4(4);
  // orientation with Q positive: reversed y-volume
  vol4[0] = -1.0;
  HypersymplecticAt h = hypersymplectic_at(phi, frame, normals, vol4);
  CHECK(h.q_positive_definite);
  CHECK((h.q - Eigen::Matrix3d::Identity()).norm() < 1e-12);
}

TEST_CASE("pullback is functorial") {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::Matrix<double, 7, 7> A, B;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      A(i, j) = u(rng);
      B(i, j) = u(rng);
    }
  AltForm a = random_form(3);
  AltForm lhs = pullback(B, pullback(A, a));   // (A o B)^* = B^* o A^*
  AltForm rhs = pullback(A * B, a);
  CHECK(max_diff(lhs, rhs) < 1e-12 * std::max(1.0, rhs.max_abs()));
}
