#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fib_cp2.hpp"

using namespace g2fib;
using namespace g2fib::cp2;

namespace {

std::mt19937_64 rng(314);

// sigma-dual SU(2) generators on the polar chart (r,gamma,beta,alpha,theta,phi,psi)
std::array<TangentVector, 3> su2_generators(const Point& q) {
  double th = q[4], ps = q[6];
  Eigen::Matrix3d M;  // sigma_i = M(i, .) d(theta, phi, psi)
  M << 0, std::cos(th), 1,
      std::cos(ps), std::sin(ps) * std::sin(th), 0,
      std::sin(ps), -std::cos(ps) * std::sin(th), 0;
  Eigen::Matrix3d Minv = M.inverse();
  std::array<TangentVector, 3> X{};
  const int coords[3] = {4, 5, 6};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      X[static_cast<size_t>(i)][coords[j]] = Minv(j, i);
  return X;
}

// velocity tangent to the generic-case conserved set at c = 0 (beta, v, u const)
void generic_cone_velocity(const State& st, double* dr, double* dg, double* da) {
  // differentiate v and u; solve the 2x2 system for (dgamma, dalpha) with dr = 1
  double h = 1e-7;
  auto vfun = [](const State& s) {
    return 2.0 * std::pow(s.r * s.r, 0.25) * std::cos(s.alpha) / std::tan(s.gamma);
  };
  auto ufun = [](const State& s) {
    double sa2 = std::pow(std::sin(s.alpha), 2), ca2 = 1 - sa2;
    double sg2 = std::pow(std::sin(s.gamma), 2);
    return (2 * ca2 - sa2 * sg2) / (ca2 * std::cos(s.gamma));
  };
  auto pd = [&](auto f, int which) {
    State p = st, m = st;
    (which == 0 ? p.r : which == 1 ? p.gamma : p.alpha) += h;
    (which == 0 ? m.r : which == 1 ? m.gamma : m.alpha) -= h;
    return (f(p) - f(m)) / (2 * h);
  };
  Eigen::Matrix2d A;
  A << pd(vfun, 1), pd(vfun, 2), pd(ufun, 1), pd(ufun, 2);
  Eigen::Vector2d b(-pd(vfun, 0), -pd(ufun, 0));
  Eigen::Vector2d x = A.fullPivLu().solve(b);
  *dr = 1.0;
  *dg = x(0);
  *da = x(1);
}

}  // namespace

TEST_CASE("case dispatch and conserved quantities") {
  CHECK(classify_case({0.0, 0.3, 0.4, 0}) == CaseTag::ZeroSection);
  CHECK(classify_case({1.0, 0.0, 0.4, 0}) == CaseTag::SinGammaZero);
  CHECK(classify_case({1.0, M_PI / 2, 0.4, 0}) == CaseTag::CosGammaZero);
  CHECK(classify_case({1.0, 0.3, M_PI / 2, 0}) == CaseTag::AlphaPiHalf);
  CHECK(classify_case({1.0, 0.3, 0.4, 0}) == CaseTag::Generic);

  // u at (alpha, gamma) = (pi/4, pi/4), c = 0: 3/sqrt(2)
  Conserved cq = conserved(0.0, {1.0, M_PI / 4, M_PI / 4, 0});
  REQUIRE(cq.u.has_value());
  CHECK(*cq.u == doctest::Approx(3.0 / std::sqrt(2.0)).epsilon(1e-12));

  // c=0, sin gamma = 0: w = r cos(2 alpha)
  Conserved cw = conserved(0.0, {1.7, 0.0, 0.6, 0});
  CHECK(*cw.w == doctest::Approx(1.7 * std::cos(1.2)).epsilon(1e-12));

  // alpha = pi/2: w = r cos(gamma), independent of c
  for (double c : {0.0, 1.0})
    CHECK(*conserved(c, {1.3, 0.8, M_PI / 2, 0}).w ==
          doctest::Approx(1.3 * std::cos(0.8)).epsilon(1e-12));
}

TEST_CASE("sin-gamma conserved quantity is constant along its flow (c > 0)") {
  // integrate the case ODE and audit the quadrature-defined w
  double c = 1.0;
  double r0 = 0.8, a0 = 0.5;
  Conserved cq0 = conserved(c, {r0, 0.0, a0, 0});
  double w0 = *cq0.w;
  // march r and track alpha via d alpha / d r
  OdeSystem sys{1, [c](double r, std::span<const double> y, std::span<double> dy) {
                  double a = y[0], sa = std::sin(a), ca = std::cos(a);
                  dy[0] = (r * r * ca * ca - (c + r * r) * sa * sa) /
                          (4.0 * r * (c + r * r) * sa * ca);
                }};
  std::vector<AuditSpec> audits;
  audits.push_back({"w", [c](std::span<const double>) { return 0.0; }});
  std::array<double, 1> y0{a0};
  FlowLine fl = integrate_flow(sys, y0, r0, 30.0, {}, {}, {});
  REQUIRE(fl.status == FlowStatus::ReachedEnd);
  double drift = 0.0;
  for (size_t i = 0; i < fl.samples.size(); i += 3) {
    Conserved cq = conserved(c, {fl.samples[i].t, 0.0, fl.samples[i].y[0], 0});
    drift = std::max(drift, std::abs(*cq.w - w0));
  }
  CHECK(drift < 1e-8);
}

TEST_CASE("coassociativity residuals") {
  double c = 0.0;
  State st{1.2, 0.7, 0.5, 0.3};
  double dr, dg, da;
  generic_cone_velocity(st, &dr, &dg, &da);
  Residuals res = coass_residual(c, st, dr, dg, da, 0.0);
  CHECK(std::abs(res.r0) < 1e-12);
  CHECK(std::abs(res.r1) < 1e-6);  // FD-differentiated tangent
  CHECK(std::abs(res.r2) < 1e-6);
  // beta motion activates the p1 ^ p2 term
  Residuals res_b = coass_residual(c, st, 0, 0, 0, 1.0);
  CHECK(std::abs(res_b.r0) > 1e-2);
  // radial-only motion violates the other two
  Residuals res_r = coass_residual(1.0, st, 1.0, 0, 0, 0);
  CHECK(std::abs(res_r.r1) + std::abs(res_r.r2) > 1e-3);
}

TEST_CASE("flow field: invariant lines, conserved directions, boundary signs") {
  double c = 0.0, v = 1.0;
  // gamma = 0 and gamma = pi/2 are invariant (B vanishes)
  CHECK(flow_field(c, v, 0.7, 0.0).b_coef == 0.0);
  CHECK(flow_field(c, v, 0.7, M_PI / 2).b_coef == 0.0);

  // at c = 0 the field is tangent to level sets of u
  for (int trial = 0; trial < 10; ++trial) {
    std::uniform_real_distribution<double> ur(0.3, 1.2);
    State st{1.0, ur(rng), ur(rng), 0.0};
    Conserved cq = conserved(0.0, st);
    if (!cq.u || !cq.v) continue;
    FlowField f = flow_field(0.0, *cq.v, st.alpha, st.gamma);
    // directional derivative of u along (dalpha, dgamma) = (A, B)
    double h = 1e-7;
    auto ufun = [&](double a, double g) {
      double sa2 = std::pow(std::sin(a), 2), ca2 = 1 - sa2;
      return (2 * ca2 - sa2 * std::pow(std::sin(g), 2)) / (ca2 * std::cos(g));
    };
    double du_da = (ufun(st.alpha + h, st.gamma) - ufun(st.alpha - h, st.gamma)) / (2 * h);
    double du_dg = (ufun(st.alpha, st.gamma + h) - ufun(st.alpha, st.gamma - h)) / (2 * h);
    double dir_norm = std::hypot(f.a_coef, f.b_coef);
    CHECK(std::abs(du_da * f.a_coef + du_dg * f.b_coef) / dir_norm < 1e-6);
  }

  // slope signs: positive left of the boundary curve, negative right of it
  double alpha_on = 0.9;  // between pi/4 and arctan(sqrt 2)
  auto gam = boundary_curve_gamma(0.0, v, alpha_on);
  REQUIRE(gam.has_value());
  CHECK(flow_slope(0.0, v, alpha_on - 0.05, *gam) > 0.0);
  CHECK(flow_slope(0.0, v, alpha_on + 0.05, *gam) < 0.0);
}

TEST_CASE("boundary curve endpoints and vertical crossings") {
  // c = 0: 2 cos^2 a - 2 sin^2 a + sin^2 a sin^2 g = 0
  // at alpha -> pi/4+ the root approaches gamma = 0
  auto g1 = boundary_curve_gamma(0.0, 1.0, M_PI / 4 + 1e-5);
  REQUIRE(g1.has_value());
  CHECK(*g1 < 0.02);
  // at alpha = arctan(sqrt 2) the root hits gamma = pi/2
  auto g2 = boundary_curve_gamma(0.0, 1.0, std::atan(std::sqrt(2.0)) - 1e-7);
  REQUIRE(g2.has_value());
  CHECK(*g2 > M_PI / 2 - 0.01);
  // no root left of the first asymptote
  CHECK(!boundary_curve_gamma(0.0, 1.0, 0.5).has_value());

  // flow lines cross the curve vertically: |dalpha/dgamma| tiny on it
  double c = 1.0, v = 4.0;
  auto gc = boundary_curve_gamma(c, v, 0.8);
  REQUIRE(gc.has_value());
  FlowField f = flow_field(c, v, 0.8, *gc);
  CHECK(std::abs(f.a_coef) / std::abs(f.b_coef) < 1e-6);
}

TEST_CASE("fixed points match the printed lists") {
  {
    auto fps = fixed_points(1.0, 4.0);
    REQUIRE(fps.size() == 4);
    // (0, arctan(2 c^(1/4)/v)) = (0, arctan(1/2))
    CHECK(fps[0].alpha == doctest::Approx(0.0));
    CHECK(fps[0].gamma == doctest::Approx(std::atan(0.5)).epsilon(1e-10));
    CHECK(fps[1].alpha == doctest::Approx(M_PI / 2));
    CHECK(fps[1].gamma == doctest::Approx(0.0));
    CHECK(fps[2].alpha == doctest::Approx(std::atan(std::sqrt(2.0))).epsilon(1e-10));
    CHECK(fps[2].gamma == doctest::Approx(M_PI / 2));
    CHECK(fps[3].alpha == doctest::Approx(M_PI / 2));
    for (const auto& fp : fps) CHECK(fp.residual < 1e-12);
    CHECK(std::atan(std::sqrt(2.0)) == doctest::Approx(0.95531662).epsilon(1e-7));
  }
  {
    auto fps = fixed_points(0.0, 1.0);
    REQUIRE(fps.size() == 5);
    CHECK(fps[0].alpha == doctest::Approx(0.0));
    CHECK(fps[0].gamma == doctest::Approx(0.0));
    CHECK(fps[1].alpha == doctest::Approx(M_PI / 4).epsilon(1e-10));
    CHECK(fps[2].alpha == doctest::Approx(M_PI / 2));
    for (const auto& fp : fps) CHECK(fp.residual < 1e-12);
  }
  // grid sweep finds no other roots
  CHECK(fixed_point_gap(1.0, 4.0) > 1e-4);
  CHECK(fixed_point_gap(0.0, 1.0) > 1e-4);
}

TEST_CASE("classification reproduces the fibration tables") {
  ClassifyOptions opt;
  opt.r_max = 1e6;

  // cone rows
  CHECK(classify_fibre(0.0, {1.0, 0.0, 0.3, 0}, opt).topology == Topology::LineBundle);
  CHECK(classify_fibre(0.0, {1.0, 0.0, M_PI / 4, 0}, opt).topology ==
        Topology::ConeOverS3);  // w = 0
  CHECK(classify_fibre(0.0, {1.0, 0.0, 1.2, 0}, opt).topology == Topology::LineBundle);
  CHECK(classify_fibre(0.0, {1.0, M_PI / 2, 0.3, 0}, opt).topology ==
        Topology::LineBundle);  // cos gamma = 0, w > 0
  double a_w0 = 0.5 * std::acos(-1.0 / 3.0);
  CHECK(classify_fibre(0.0, {1.0, M_PI / 2, a_w0, 0}, opt).topology ==
        Topology::ConeOverS3);  // w = 0
  CHECK(classify_fibre(0.0, {1.0, M_PI / 2, 1.4, 0}, opt).topology ==
        Topology::ConeOverS3);  // w < 0
  CHECK(classify_fibre(0.0, {1.0, 0.4, M_PI / 2, 0}, opt).topology ==
        Topology::LineBundle);  // alpha = pi/2, w != 0
  CHECK(classify_fibre(0.0, {1.0, M_PI / 2, M_PI / 2, 0}, opt).topology ==
        Topology::ConeOverS3);  // alpha = pi/2, w = 0

  // cone generic rows via u
  auto start_at = [](double u, double v) {
    // pick gamma, solve alpha from u at c=0 by bisection on alpha
    double g = 0.9;
    auto ufun = [g](double a) {
      double sa2 = std::pow(std::sin(a), 2), ca2 = 1 - sa2;
      return (2 * ca2 - sa2 * std::pow(std::sin(g), 2)) / (ca2 * std::cos(g));
    };
    double lo = 1e-3, hi = M_PI / 2 - 1e-3;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      ((ufun(mid) > u) ? lo : hi) = mid;
    }
    double a = 0.5 * (lo + hi);
    double r = std::pow(v / (2.0 * std::cos(a) / std::tan(g)), 2);
    return State{r, g, a, 0.0};
  };
  {
    State st = start_at(3.0, 1.0);  // u > 2
    FibreClass fc = classify_fibre(0.0, st, opt);
    CHECK(fc.topology == Topology::LineBundle);
  }
  {
    State st = start_at(2.0, 1.0);  // u = 2
    FibreClass fc = classify_fibre(0.0, st, opt);
    CHECK(fc.topology == Topology::ConeOverS3);
    // the flow stays between pi/4 and arctan(sqrt 2)
    CHECK(st.alpha > M_PI / 4);
    CHECK(st.alpha < std::atan(std::sqrt(2.0)));
  }
  {
    State st = start_at(1.0, 1.0);  // u < 2
    FibreClass fc = classify_fibre(0.0, st, opt);
    CHECK(fc.topology == Topology::LineBundle);
  }

  // smooth rows
  CHECK(classify_fibre(1.0, {0.0, 0.0, 0.3, 0}, opt).topology == Topology::ZeroSection);
  CHECK(classify_fibre(1.0, {0.8, 0.0, 0.3, 0}, opt).topology ==
        Topology::LineBundle);  // sin gamma = 0, w > 0 家族
  CHECK(classify_fibre(1.0, {0.8, 0.0, 1.3, 0}, opt).topology ==
        Topology::LineBundle);  // w < 0 family
  CHECK(classify_fibre(1.0, {0.8, M_PI / 2, 0.4, 0}, opt).topology ==
        Topology::LineBundle);  // cos gamma = 0, w > 0
  CHECK(classify_fibre(1.0, {0.8, M_PI / 2, 1.35, 0}, opt).topology ==
        Topology::LineBundle);  // cos gamma = 0, w < 0 (r -> 0 at pi/2)
  CHECK(classify_fibre(1.0, {1.0, 1.2, M_PI / 2, 0}, opt).topology ==
        Topology::LineBundle);  // alpha = pi/2, w != 0
  CHECK(classify_fibre(1.0, {1.0, M_PI / 2, M_PI / 2, 0}, opt).topology ==
        Topology::LineBundle);  // alpha = pi/2, w = 0 (bolt at the zero section)
  // generic c = 1 rows: region right of the boundary curve flows into (pi/2, 0)
  {
    FibreClass fc = classify_fibre(1.0, {2.0, 1.3, 1.2, 0}, opt);
    CHECK(fc.tag == CaseTag::Generic);
    CHECK(fc.topology == Topology::LineBundle);
  }
  // region left of the curve: flows out of (0, gamma_0): bolt at alpha = 0
  {
    FibreClass fc = classify_fibre(1.0, {2.0, 0.9, 0.35, 0}, opt);
    CHECK(fc.tag == CaseTag::Generic);
    CHECK(fc.topology == Topology::LineBundle);
  }
}

TEST_CASE("multimoment map: values, range, differential identity") {
  // rho = 0 on the c=0 bolts (r = 0 or sin alpha = 0)
  CHECK(multimoment(0.0, {1.3, 0.7, 0.0, 0}) == doctest::Approx(0.0));
  // c=1, alpha = pi/2, sin gamma = 0: rho = 0
  CHECK(multimoment(1.0, {1.3, 0.0, M_PI / 2, 0}) ==
        doctest::Approx(0.25 * 1.3 * 1.3 * 0.0).epsilon(1e-12));
  // nonnegative on a sweep
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double maxv = 0.0;
  for (int i = 0; i < 500; ++i) {
    State st{3.0 * u01(rng), M_PI * u01(rng), M_PI / 2 * u01(rng), 0};
    double v = multimoment(1.0, st);
    CHECK(v >= -1e-14);
    maxv = std::max(maxv, v);
  }
  CHECK(maxv > 1.0);

  // star phi(X1, X2, X3, .) = d rho on the polar chart
  G2Package pkg = make_package(Model::CP2, 1.0);
  ChartMap cm = cp2_polar_to_native();
  auto polar = cp2_polar_chart(1.0);
  ScalarField rho{polar.get(), [](const Point& q) {
                    return multimoment(1.0, {q[0], q[1], q[3], q[2]});
                  }};
  for (int trial = 0; trial < 20; ++trial) {
    Point q{0.3 + u01(rng), 0.3 + u01(rng) * 2.0, u01(rng), 0.3 + u01(rng),
            0.5 + u01(rng), u01(rng), u01(rng)};
    if (!polar->contains(q)) continue;
    AltForm psi = pullback_at(cm, pkg.starphi, q);
    auto X = su2_generators(q);
    AltForm lhs = contract3(psi, X[0], X[1], X[2]);
    AltForm rhs = d_fd(rho, *polar, q, {1e-6, true});
    CHECK((lhs - rhs).max_abs() < 1e-6 * std::max(1.0, rhs.max_abs()));
  }
}

TEST_CASE("printed non-closed 1-forms at c = 0") {
  G2Package pkg = make_package(Model::CP2, 0.0);
  ChartMap cm = cp2_polar_to_native();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 15; ++trial) {
    Point q{0.4 + u01(rng), 0.4 + u01(rng), u01(rng), 0.3 + u01(rng),
            0.6 + u01(rng), u01(rng), u01(rng)};
    double r = q[0], g = q[1], b = q[2], a = q[3];
    AltForm phi = pullback_at(cm, pkg.phi, q);
    auto X = su2_generators(q);
    // rotated frame Y
    TangentVector Y1 = X[0], Y2{}, Y3{};
    for (int i = 0; i < 7; ++i) {
      Y2[i] = std::cos(b) * X[1][i] + std::sin(b) * X[2][i];
      Y3[i] = -std::sin(b) * X[1][i] + std::cos(b) * X[2][i];
    }
    double sa = std::sin(a), ca = std::cos(a), sg = std::sin(g), cg = std::cos(g);
    // du, dv, dbeta in polar coordinates (r, gamma, beta, alpha, ...)
    auto dOf = [&](auto f) {
      AltForm d(1);
      double h = 1e-7;
      {
        State sp{r + h, g, a, b}, sm{r - h, g, a, b};
        d[0] = (f(sp) - f(sm)) / (2 * h);
      }
      {
        State sp{r, g + h, a, b}, sm{r, g - h, a, b};
        d[1] = (f(sp) - f(sm)) / (2 * h);
      }
      {
        State sp{r, g, a + h, b}, sm{r, g, a - h, b};
        d[3] = (f(sp) - f(sm)) / (2 * h);
      }
      return d;
    };
    AltForm du = dOf([](const State& s) {
      double sa2 = std::pow(std::sin(s.alpha), 2), ca2 = 1 - sa2;
      return (2 * ca2 - sa2 * std::pow(std::sin(s.gamma), 2)) /
             (ca2 * std::cos(s.gamma));
    });
    AltForm dv = dOf([](const State& s) {
      return 2.0 * std::sqrt(s.r) * std::cos(s.alpha) / std::tan(s.gamma);
    });
    AltForm dbeta(1);
    dbeta[2] = 1.0;

    AltForm f23 = contract2(phi, Y2, Y3);
    AltForm e23 = (std::pow(r, 1.5) * ca * ca * cg * cg / (sg * sg)) * du -
                  (r * (1 - 2 * ca * ca) * sg / ca) * dv;
    CHECK((f23 - e23).max_abs() < 1e-6 * std::max(1.0, e23.max_abs()));

    AltForm f31 = contract2(phi, Y3, Y1);
    AltForm e31 = (std::pow(r, 1.5) * ca * ca * ca * cg / sg) * du -
                  (r * (1 - 3 * ca * ca) * sg * sg / (2 * cg)) * dv;
    CHECK((f31 - e31).max_abs() < 1e-6 * std::max(1.0, e31.max_abs()));

    AltForm f12 = contract2(phi, Y1, Y2);
    AltForm e12 = (-std::pow(r, 1.5) * sa * sa * ca * sg) * dbeta;
    CHECK((f12 - e12).max_abs() < 1e-9 * std::max(1.0, e12.max_abs()));
  }
}

TEST_CASE("fibre metric matches the ambient pullback") {
  G2Package pkg0 = make_package(Model::CP2, 0.0);
  G2Package pkg1 = make_package(Model::CP2, 1.0);
  ChartMap cm = cp2_polar_to_native();
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 12; ++trial) {
    double c = (trial % 2 == 0) ? 0.0 : 1.0;
    const G2Package& pkg = (c == 0.0) ? pkg0 : pkg1;
    Point q{0.5 + u01(rng), 0.4 + u01(rng) * 1.6, u01(rng), 0.3 + 0.9 * u01(rng),
            0.6 + u01(rng), u01(rng), u01(rng)};
    double r = q[0], g = q[1], b = q[2], a = q[3];
    State st{r, g, a, b};
    CaseTag tag = classify_case(st);
    if (tag != CaseTag::Generic) continue;
    Conserved cq = conserved(c, st);
    double v = *cq.v;
    if (v <= 0.02) continue;

    // tangent frame of the fibre at q in polar-chart coordinates: the three
    // orbit directions and the flow direction (dr, dgamma, dalpha)
    FlowField ff = flow_field(c, v, a, g);
    // d r along the flow from the v-constraint
    double tg = std::tan(g), ca = std::cos(a), sa = std::sin(a);
    double r2v = std::pow(v, 4) * std::pow(tg, 4) / (16.0 * std::pow(ca, 4)) - c;
    if (r2v <= 0.01) continue;
    double dr_dg = std::pow(v, 4) * 4.0 * std::pow(tg, 3) /
                   (std::cos(g) * std::cos(g) * 16.0 * std::pow(ca, 4)) / (2.0 * r);
    double dr_da = std::pow(v, 4) * std::pow(tg, 4) * 4.0 * sa /
                   (16.0 * std::pow(ca, 5)) / (2.0 * r);
    TangentVector flow{};
    flow[0] = dr_dg * ff.b_coef + dr_da * ff.a_coef;  // dr
    flow[1] = ff.b_coef;                              // dgamma
    flow[3] = ff.a_coef;                              // dalpha
    auto X = su2_generators(q);
    // rotated frame to match the p-coframe
    TangentVector Y1 = X[0], Y2{}, Y3{};
    for (int i = 0; i < 7; ++i) {
      Y2[i] = std::cos(b) * X[1][i] + std::sin(b) * X[2][i];
      Y3[i] = -std::sin(b) * X[1][i] + std::cos(b) * X[2][i];
    }

    // ambient metric pulled back to the polar chart
    Eigen::Matrix<double, 7, 7> J = cm.jacobian(q);
    Eigen::MatrixXd g7 = pkg.metric(cm.map(q));
    Eigen::MatrixXd gp = J.transpose() * g7 * J;
    auto ip = [&](const TangentVector& x, const TangentVector& y) {
      double sum = 0;
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) sum += gp(i, j) * x[i] * y[j];
      return sum;
    };

    // closed-form coefficients against rho as the vertical coordinate
    FibreMetric fm = fibre_metric(c, st);
    auto grad = multimoment_grad(c, st);
    double drho = grad[0] * flow[0] + grad[1] * flow[1] + grad[2] * flow[3];

    // p-frame pairings: g(Yi, Yj) should match g_ij
    CHECK(ip(Y1, Y1) == doctest::Approx(fm.g_11).epsilon(1e-8));
    CHECK(ip(Y2, Y2) == doctest::Approx(fm.g_22).epsilon(1e-8));
    CHECK(ip(Y3, Y3) == doctest::Approx(fm.g_33).epsilon(1e-8));
    CHECK(ip(Y1, Y2) == doctest::Approx(fm.g_12).epsilon(1e-6).scale(std::abs(fm.g_11)));
    CHECK(ip(Y2, Y3) == doctest::Approx(0.0).scale(std::abs(fm.g_22)));
    CHECK(ip(Y3, Y1) == doctest::Approx(0.0).scale(std::abs(fm.g_33)));
    // flow direction: g(flow, flow) = g_rr drho^2, g(flow, Y3) = g_r3 drho
    CHECK(ip(flow, flow) == doctest::Approx(fm.g_rr * drho * drho).epsilon(1e-7));
    CHECK(ip(flow, Y3) == doctest::Approx(fm.g_r3 * drho)
                              .epsilon(1e-6)
                              .scale(std::sqrt(std::abs(ip(flow, flow) * fm.g_33))));
    CHECK(ip(flow, Y1) == doctest::Approx(0.0).scale(
                              std::sqrt(std::abs(ip(flow, flow) * fm.g_11))));
    CHECK(ip(flow, Y2) == doctest::Approx(0.0).scale(
                              std::sqrt(std::abs(ip(flow, flow) * fm.g_22))));
  }
}

TEST_CASE("exact-cone fibres and asymptotic rates at c = 0") {
  // sin gamma = 0, w = 0: exactly g_B
  {
    FibreCurve curve = [](double) {
      OnFibre f;
      f.alpha = M_PI / 4;
      f.gamma = 0.0;
      return f;
    };
    auto samples = cone_deviation_samples(0.0, curve, ConeRef::B, 1.0, 100.0, 12);
    CHECK(fit_rate(samples).exact_cone);
  }
  // cos gamma = 0, w = 0 (cos 2 alpha = -1/3): exactly g_A
  {
    double a0 = 0.5 * std::acos(-1.0 / 3.0);
    FibreCurve curve = [a0](double) {
      OnFibre f;
      f.alpha = a0;
      f.gamma = M_PI / 2;
      return f;
    };
    auto samples = cone_deviation_samples(0.0, curve, ConeRef::A, 1.0, 100.0, 12);
    CHECK(fit_rate(samples).exact_cone);
  }
  // alpha = pi/2, w = 0: exactly g_B
  {
    FibreCurve curve = [](double) {
      OnFibre f;
      f.alpha = M_PI / 2;
      f.gamma = M_PI / 2;
      return f;
    };
    auto samples = cone_deviation_samples(0.0, curve, ConeRef::B, 1.0, 100.0, 12);
    CHECK(fit_rate(samples).exact_cone);
  }

  // sin gamma = 0, w = 1: g_B at rate -4
  {
    auto samples =
        cone_deviation_samples(0.0, curve_singamma0_cone(1.0), ConeRef::B, 20.0, 600.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.05));
  }
  // alpha = pi/2, w = 1: g_B at rate -4
  {
    auto samples =
        cone_deviation_samples(0.0, curve_alphapi2(0.0, 1.0), ConeRef::B, 20.0, 600.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.05));
  }
  // cos gamma = 0, w = 1: g_A at rate -1
  {
    auto samples =
        cone_deviation_samples(0.0, curve_cosgamma0_cone(1.0), ConeRef::A, 40.0, 4000.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(0.05));
  }
  // generic with u = 3, v = 1: g_A at rate -1
  {
    auto samples = cone_deviation_samples(0.0, curve_generic_cone(3.0, 1.0), ConeRef::A,
                                          40.0, 4000.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(0.05));
  }
  // cos gamma = 0, w = -1: conically singular to g_B as R -> 0
  {
    auto samples =
        cone_deviation_samples(0.0, curve_cosgamma0_cone(-1.0), ConeRef::B, 1e-4, 1e-2, 16);
    RateFit f = fit_rate(samples);
    CHECK(f.slope > 0.5);  // deviations vanish toward the vertex
    CHECK(samples.front().second < 0.05);
  }
}

TEST_CASE("asymptotic rates at c = 1") {
  // sin gamma = 0: g_B at rate -4
  {
    auto samples = cone_deviation_samples(1.0, curve_singamma0_smooth(1.0, 1.0, 0.4),
                                          ConeRef::B, 20.0, 600.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.05));
  }
  // alpha = pi/2, w != 0: g_B at rate -4
  {
    auto samples =
        cone_deviation_samples(1.0, curve_alphapi2(1.0, 1.0), ConeRef::B, 20.0, 600.0, 20);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-4.0).epsilon(0.05));
  }
  // cos gamma = 0: g_A at rate -1 (ODE-backed)
  {
    auto samples = cone_samples_cosgamma0_smooth(1.0, 1.0, 0.7, 40.0, 4000.0);
    REQUIRE(samples.size() > 8);
    RateFit f = fit_rate(samples);
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(0.1));
  }
  // generic: cone g_A, slope reported (no assertion on the value)
  {
    auto samples = cone_samples_generic_smooth(1.0, 1.0, 0.5, 0.8, 40.0, 4000.0);
    REQUIRE(samples.size() > 8);
    RateFit f = fit_rate(samples);
    // deviations decay: some negative slope
    CHECK(f.slope < -0.2);
    MESSAGE("generic c=1 fitted AC slope: ", f.slope);
  }
}

TEST_CASE("harvey-lawson flat limit") {
  std::array<double, 3> eps{0.0, 0.0, 1.0};
  // tau = 0: flat C^2 branch and the Lawson-Osserman cone
  HlReport r0 = harvey_lawson_check(eps, 0.0, 40, 7);
  CHECK(r0.worst_constraint < 1e-12);
  CHECK(r0.worst_phi < 1e-12);
  // tau = 1: both components
  std::array<double, 3> eps2{1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0),
                             1.0 / std::sqrt(3.0)};
  HlReport r1 = harvey_lawson_check(eps2, 1.0, 40, 11);
  CHECK(r1.worst_constraint < 1e-12);
  CHECK(r1.worst_phi < 1e-12);
  CHECK_THROWS_AS(harvey_lawson_check({2, 0, 0}, 1.0, 4, 1), DomainError);
}
