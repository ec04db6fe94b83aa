#include "models.hpp"

#include <cmath>

#include "quat.hpp"

namespace g2fib {

std::string model_name(Model m) {
  switch (m) {
    case Model::S3: return "s3";
    case Model::S4: return "s4";
    case Model::CP2: return "cp2";
  }
  return "?";
}

Model model_from_name(const std::string& name) {
  if (name == "s3") return Model::S3;
  if (name == "s4") return Model::S4;
  if (name == "cp2") return Model::CP2;
  throw DomainError("unknown model '" + name + "'");
}

FormField G2Package::named_field(const std::string& name, int degree) const {
  auto it = named.find(name);
  if (it == named.end()) throw DomainError("no named form '" + name + "'");
  return {chart.get(), degree, it->second};
}

namespace {

AltForm one_form(std::initializer_list<std::pair<int, double>> comps) {
  AltForm a(1);
  for (auto& [i, v] : comps) a[i] = v;
  return a;
}

// metric contribution w * (a tensor a)
void add_square(Eigen::MatrixXd& g, double w, const AltForm& a) {
  for (int i = 0; i < kDim; ++i) {
    if (a[i] == 0.0) continue;
    for (int j = 0; j < kDim; ++j) g(i, j) += w * a[i] * a[j];
  }
}

// ---------------------------------------------------------------------------
// Spinor bundle of S^3. Chart (a0,a1,a2,a3,y1,y2,y3); the base point is the
// unit quaternion exp(-(y1 i + y2 j + y3 k)), so the left-invariant coframe
// satisfies d sigma_1 = sigma_2 ^ sigma_3 (cyclically), checked by tests.

struct S3Frame {
  std::array<AltForm, 3> sigma{AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> rho{AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> b{AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 4> zeta{AltForm(1), AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> Omega{AltForm(2), AltForm(2), AltForm(2)};
  double r2 = 0.0;
};

S3Frame s3_frame(const Point& p, double kappa, double base_scale) {
  S3Frame f;
  const double a0 = p[0], a1 = p[1], a2 = p[2], a3 = p[3];
  f.r2 = a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3;
  double y[3] = {p[4], p[5], p[6]};
  Quat q;
  std::array<Quat, 3> dq;
  qexp_im_with_partials(-base_scale, y, &q, &dq);
  // sigma_j = -2 Im_j(conj(q) dq); components on dy_m live at indices 4+m
  for (int m = 0; m < 3; ++m) {
    Quat u = q.conj() * dq[static_cast<size_t>(m)];
    f.sigma[0][4 + m] = -2.0 * u.x;
    f.sigma[1][4 + m] = -2.0 * u.y;
    f.sigma[2][4 + m] = -2.0 * u.z;
  }
  for (int j = 0; j < 3; ++j) {
    f.rho[static_cast<size_t>(j)] = -0.25 * f.sigma[static_cast<size_t>(j)];
    f.b[static_cast<size_t>(j)] = (0.5 / std::sqrt(kappa)) * f.sigma[static_cast<size_t>(j)];
  }
  const AltForm da0 = AltForm::basis({0}), da1 = AltForm::basis({1}),
                da2 = AltForm::basis({2}), da3 = AltForm::basis({3});
  const AltForm &r1 = f.rho[0], &r2 = f.rho[1], &r3 = f.rho[2];
  f.zeta[0] = da0 + a1 * r1 + a2 * r2 + a3 * r3;
  f.zeta[1] = da1 - a0 * r1 + a3 * r2 - a2 * r3;
  f.zeta[2] = da2 - a3 * r1 - a0 * r2 + a1 * r3;
  f.zeta[3] = da3 + a2 * r1 - a1 * r2 - a0 * r3;
  f.Omega[0] = wedge(f.zeta[0], f.zeta[1]) - wedge(f.zeta[2], f.zeta[3]);
  f.Omega[1] = wedge(f.zeta[0], f.zeta[2]) - wedge(f.zeta[3], f.zeta[1]);
  f.Omega[2] = wedge(f.zeta[0], f.zeta[3]) - wedge(f.zeta[1], f.zeta[2]);
  return f;
}

// ---------------------------------------------------------------------------
// ASD bundles over S^4 and CP^2. Base coframes rescale with the curvature:
// b(kappa) = b(1)/sqrt(kappa); the connection forms are kappa-independent.

struct NFrame {
  std::array<AltForm, 4> b{AltForm(1), AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> rho{AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> zeta{AltForm(1), AltForm(1), AltForm(1)};
  std::array<AltForm, 3> Omega{AltForm(2), AltForm(2), AltForm(2)};
  double r2 = 0.0;
};

void finish_n_frame(NFrame& f, const Point& p, int a_base) {
  const double a1 = p[static_cast<size_t>(a_base)], a2 = p[static_cast<size_t>(a_base + 1)],
               a3 = p[static_cast<size_t>(a_base + 2)];
  f.r2 = a1 * a1 + a2 * a2 + a3 * a3;
  f.Omega[0] = wedge(f.b[0], f.b[1]) - wedge(f.b[2], f.b[3]);
  f.Omega[1] = wedge(f.b[0], f.b[2]) - wedge(f.b[3], f.b[1]);
  f.Omega[2] = wedge(f.b[0], f.b[3]) - wedge(f.b[1], f.b[2]);
  const AltForm da1 = AltForm::basis({a_base}), da2 = AltForm::basis({a_base + 1}),
                da3 = AltForm::basis({a_base + 2});
  const AltForm &r1 = f.rho[0], &r2f = f.rho[1], &r3 = f.rho[2];
  f.zeta[0] = da1 - 2.0 * a2 * r3 + 2.0 * a3 * r2f;
  f.zeta[1] = da2 - 2.0 * a3 * r1 + 2.0 * a1 * r3;
  f.zeta[2] = da3 - 2.0 * a1 * r2f + 2.0 * a2 * r1;
}

// chart (alpha,beta,theta,phi,a1,a2,a3)
NFrame s4_frame(const Point& p, double kappa) {
  NFrame f;
  const double al = p[0], th = p[2];
  const double sa = std::sin(al), ca = std::cos(al), st = std::sin(th),
               ct = std::cos(th);
  const double bs = 1.0 / std::sqrt(kappa);
  f.b[0] = one_form({{0, bs}});
  f.b[1] = one_form({{1, bs * sa}});
  f.b[2] = one_form({{2, bs * ca}});
  f.b[3] = one_form({{3, bs * ca * st}});
  f.rho[0] = one_form({{1, -0.5 * ca}, {3, 0.5 * ct}});
  f.rho[1] = one_form({{2, 0.5 * sa}});
  f.rho[2] = one_form({{3, 0.5 * sa * st}});
  finish_n_frame(f, p, 4);
  return f;
}

// chart (alpha,theta,phi,psi,a1,a2,a3)
NFrame cp2_frame(const Point& p, double kappa) {
  NFrame f;
  const double al = p[0], th = p[1], ps = p[3];
  const double sa = std::sin(al), ca = std::cos(al), st = std::sin(th),
               ct = std::cos(th), sp = std::sin(ps), cp = std::cos(ps);
  AltForm s1 = one_form({{3, 1.0}, {2, ct}});
  AltForm s2 = one_form({{1, cp}, {2, sp * st}});
  AltForm s3 = one_form({{1, sp}, {2, -cp * st}});
  const double bs = 1.0 / std::sqrt(kappa);
  const double iv2 = 1.0 / std::sqrt(2.0);
  f.b[0] = one_form({{0, bs * std::sqrt(2.0)}});
  f.b[1] = (bs * iv2 * sa * ca) * s1;
  f.b[2] = (bs * iv2 * sa) * s2;
  f.b[3] = (bs * iv2 * sa) * s3;
  f.rho[0] = (-0.25 * (1.0 + ca * ca)) * s1;
  f.rho[1] = (-0.5 * ca) * s2;
  f.rho[2] = (-0.5 * ca) * s3;
  finish_n_frame(f, p, 4);
  return f;
}

template <typename Frame>
AltForm n_phi(const Frame& f, double c0, double c1, double kappa) {
  const double u = c0 + c1 * f.r2;
  const double w1 = std::pow(c1 * c1 / (2.0 * kappa), 0.75) * std::pow(u, -0.75);
  const double w2 = std::pow(2.0 * kappa * c1 * c1, 0.25) * std::pow(u, 0.25);
  AltForm phi = w1 * wedge(wedge(f.zeta[0], f.zeta[1]), f.zeta[2]);
  for (int i = 0; i < 3; ++i)
    phi += w2 * wedge(f.zeta[static_cast<size_t>(i)], f.Omega[static_cast<size_t>(i)]);
  return phi;
}

template <typename Frame>
AltForm n_starphi(const Frame& f, double c0, double c1, double kappa) {
  const double u = c0 + c1 * f.r2;
  AltForm volN = wedge(wedge(f.b[0], f.b[1]), wedge(f.b[2], f.b[3]));
  AltForm psi = (2.0 * kappa * u) * volN;
  psi -= c1 * wedge(wedge(f.zeta[1], f.zeta[2]), f.Omega[0]);
  psi -= c1 * wedge(wedge(f.zeta[2], f.zeta[0]), f.Omega[1]);
  psi -= c1 * wedge(wedge(f.zeta[0], f.zeta[1]), f.Omega[2]);
  return psi;
}

template <typename Frame>
Eigen::MatrixXd n_metric(const Frame& f, double c0, double c1, double kappa) {
  const double u = c0 + c1 * f.r2;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(kDim, kDim);
  const double wz = std::sqrt(c1 * c1 / (2.0 * kappa)) / std::sqrt(u);
  const double wb = std::sqrt(2.0 * kappa) * std::sqrt(u);
  for (int i = 0; i < 3; ++i) add_square(g, wz, f.zeta[static_cast<size_t>(i)]);
  for (int i = 0; i < 4; ++i) add_square(g, wb, f.b[static_cast<size_t>(i)]);
  return g;
}

template <typename Frame>
AltForm n_vol(const Frame& f, double c0, double c1, double kappa) {
  const double u = c0 + c1 * f.r2;
  const double w = std::pow(2.0 * kappa * std::pow(c1, 6), 0.25) * std::pow(u, 0.25);
  AltForm volN = wedge(wedge(f.b[0], f.b[1]), wedge(f.b[2], f.b[3]));
  return w * wedge(wedge(wedge(f.zeta[0], f.zeta[1]), f.zeta[2]), volN);
}

constexpr double kAngleMargin = 0.05;

}  // namespace

G2Package s3_package(double c0, double c1, double kappa) {
  if (c0 < 0 || c1 <= 0 || kappa <= 0) throw DomainError("s3_package: need c0 >= 0, c1, kappa > 0");
  G2Package pkg;
  pkg.model = Model::S3;
  pkg.c0 = c0;
  pkg.c1 = c1;
  pkg.kappa = kappa;
  const bool cone = (c0 == 0.0);
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  chart->names = {"a0", "a1", "a2", "a3", "y1", "y2", "y3"};
  chart->valid = [cone](const Point& p) {
    double yn = std::sqrt(p[4] * p[4] + p[5] * p[5] + p[6] * p[6]);
    if (yn > 0.9 * M_PI) return false;
    if (cone) {
      double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
      if (r2 < 1e-4) return false;
    }
    return true;
  };
  pkg.chart = chart;
  pkg.phi = [c0, c1, kappa](const Point& p) {
    S3Frame f = s3_frame(p, kappa, 1.0);
    AltForm phi = (3.0 * kappa * (c0 + c1 * f.r2)) *
                  wedge(wedge(f.b[0], f.b[1]), f.b[2]);
    for (int j = 0; j < 3; ++j)
      phi += 4.0 * c1 * wedge(f.b[static_cast<size_t>(j)], f.Omega[static_cast<size_t>(j)]);
    return phi;
  };
  pkg.starphi = [c0, c1, kappa](const Point& p) {
    S3Frame f = s3_frame(p, kappa, 1.0);
    const double u = c0 + c1 * f.r2;
    AltForm z4 = wedge(wedge(f.zeta[0], f.zeta[1]), wedge(f.zeta[2], f.zeta[3]));
    AltForm psi = 16.0 * std::pow(c1 * c1 * c1 / (3.0 * kappa), 2.0 / 3.0) *
                  std::pow(u, -2.0 / 3.0) * z4;
    const double w = 4.0 * std::cbrt(3.0 * kappa * c1 * c1 * c1) * std::cbrt(u);
    psi -= w * wedge(wedge(f.b[1], f.b[2]), f.Omega[0]);
    psi -= w * wedge(wedge(f.b[2], f.b[0]), f.Omega[1]);
    psi -= w * wedge(wedge(f.b[0], f.b[1]), f.Omega[2]);
    return psi;
  };
  pkg.metric = [c0, c1, kappa](const Point& p) {
    S3Frame f = s3_frame(p, kappa, 1.0);
    const double u = c0 + c1 * f.r2;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(kDim, kDim);
    const double wb = std::pow(3.0 * kappa, 2.0 / 3.0) * std::pow(u, 2.0 / 3.0);
    const double wz = 4.0 * std::cbrt(c1 * c1 * c1 / (3.0 * kappa)) * std::pow(u, -1.0 / 3.0);
    for (int j = 0; j < 3; ++j) add_square(g, wb, f.b[static_cast<size_t>(j)]);
    for (int k = 0; k < 4; ++k) add_square(g, wz, f.zeta[static_cast<size_t>(k)]);
    return g;
  };
  pkg.vol7 = [c0, c1, kappa](const Point& p) {
    S3Frame f = s3_frame(p, kappa, 1.0);
    const double u = c0 + c1 * f.r2;
    const double w = 16.0 * std::cbrt(3.0 * kappa * std::pow(c1, 6)) * std::cbrt(u);
    AltForm z4 = wedge(wedge(f.zeta[0], f.zeta[1]), wedge(f.zeta[2], f.zeta[3]));
    return w * wedge(wedge(wedge(f.b[0], f.b[1]), f.b[2]), z4);
  };
  for (int j = 0; j < 3; ++j) {
    pkg.named["sigma" + std::to_string(j + 1)] = [j, kappa](const Point& p) {
      return s3_frame(p, kappa, 1.0).sigma[static_cast<size_t>(j)];
    };
    pkg.named["b" + std::to_string(j + 1)] = [j, kappa](const Point& p) {
      return s3_frame(p, kappa, 1.0).b[static_cast<size_t>(j)];
    };
    pkg.named["rho" + std::to_string(j + 1)] = [j, kappa](const Point& p) {
      return s3_frame(p, kappa, 1.0).rho[static_cast<size_t>(j)];
    };
    pkg.named["Omega" + std::to_string(j + 1)] = [j, kappa](const Point& p) {
      return s3_frame(p, kappa, 1.0).Omega[static_cast<size_t>(j)];
    };
  }
  for (int k = 0; k < 4; ++k)
    pkg.named["zeta" + std::to_string(k)] = [k, kappa](const Point& p) {
      return s3_frame(p, kappa, 1.0).zeta[static_cast<size_t>(k)];
    };
  pkg.sample = [cone](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ua(-1.5, 1.5), uy(-0.5, 0.5);
    Point p{};
    for (;;) {
      for (int i = 0; i < 4; ++i) p[static_cast<size_t>(i)] = ua(rng);
      double r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3];
      if (!cone || r2 > 0.1) break;
    }
    for (int i = 4; i < 7; ++i) p[static_cast<size_t>(i)] = uy(rng);
    return p;
  };
  return pkg;
}

namespace {

G2Package n_package(Model model, double c0, double c1, double kappa) {
  if (c0 < 0 || c1 <= 0 || kappa <= 0) throw DomainError("package: need c0 >= 0, c1, kappa > 0");
  G2Package pkg;
  pkg.model = model;
  pkg.c0 = c0;
  pkg.c1 = c1;
  pkg.kappa = kappa;
  const bool cone = (c0 == 0.0);
  auto frame_of = [model, kappa](const Point& p) {
    return model == Model::S4 ? s4_frame(p, kappa) : cp2_frame(p, kappa);
  };
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  if (model == Model::S4) {
    chart->names = {"alpha", "beta", "theta", "phi", "a1", "a2", "a3"};
  } else {
    chart->names = {"alpha", "theta", "phi", "psi", "a1", "a2", "a3"};
  }
  const int theta_idx = (model == Model::S4) ? 2 : 1;
  chart->valid = [cone, theta_idx](const Point& p) {
    if (p[0] < kAngleMargin || p[0] > M_PI / 2 - kAngleMargin) return false;
    if (p[static_cast<size_t>(theta_idx)] < kAngleMargin ||
        p[static_cast<size_t>(theta_idx)] > M_PI - kAngleMargin)
      return false;
    if (cone) {
      double r2 = p[4] * p[4] + p[5] * p[5] + p[6] * p[6];
      if (r2 < 1e-4) return false;
    }
    return true;
  };
  pkg.chart = chart;
  pkg.phi = [frame_of, c0, c1, kappa](const Point& p) {
    return n_phi(frame_of(p), c0, c1, kappa);
  };
  pkg.starphi = [frame_of, c0, c1, kappa](const Point& p) {
    return n_starphi(frame_of(p), c0, c1, kappa);
  };
  pkg.metric = [frame_of, c0, c1, kappa](const Point& p) {
    return n_metric(frame_of(p), c0, c1, kappa);
  };
  pkg.vol7 = [frame_of, c0, c1, kappa](const Point& p) {
    return n_vol(frame_of(p), c0, c1, kappa);
  };
  for (int j = 0; j < 3; ++j) {
    pkg.named["rho" + std::to_string(j + 1)] = [frame_of, j](const Point& p) {
      return frame_of(p).rho[static_cast<size_t>(j)];
    };
    pkg.named["Omega" + std::to_string(j + 1)] = [frame_of, j](const Point& p) {
      return frame_of(p).Omega[static_cast<size_t>(j)];
    };
    pkg.named["zeta" + std::to_string(j + 1)] = [frame_of, j](const Point& p) {
      return frame_of(p).zeta[static_cast<size_t>(j)];
    };
  }
  for (int i = 0; i < 4; ++i)
    pkg.named["b" + std::to_string(i)] = [frame_of, i](const Point& p) {
      return frame_of(p).b[static_cast<size_t>(i)];
    };
  pkg.named["zO"] = [frame_of](const Point& p) {
    auto f = frame_of(p);
    AltForm s = wedge(f.zeta[0], f.Omega[0]);
    s += wedge(f.zeta[1], f.Omega[1]);
    s += wedge(f.zeta[2], f.Omega[2]);
    return s;
  };
  pkg.sample = [cone](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ual(kAngleMargin * 2, M_PI / 2 - 2 * kAngleMargin);
    std::uniform_real_distribution<double> uth(kAngleMargin * 2, M_PI - 2 * kAngleMargin);
    std::uniform_real_distribution<double> uang(0.0, 2 * M_PI);
    std::uniform_real_distribution<double> ua(-1.5, 1.5);
    Point p{};
    p[0] = ual(rng);
    p[1] = uth(rng);  // overwritten below for S4 ordering; harmless
    for (;;) {
      double a1 = ua(rng), a2 = ua(rng), a3 = ua(rng);
      if (!cone || a1 * a1 + a2 * a2 + a3 * a3 > 0.1) {
        p[4] = a1;
        p[5] = a2;
        p[6] = a3;
        break;
      }
    }
    return p;
  };
  // model-specific sampler fixes the angle layout
  if (model == Model::S4) {
    auto base = pkg.sample;
    pkg.sample = [base](std::mt19937_64& rng) {
      Point p = base(rng);
      std::uniform_real_distribution<double> uth(2 * kAngleMargin, M_PI - 2 * kAngleMargin);
      std::uniform_real_distribution<double> uang(0.0, 2 * M_PI);
      p[2] = uth(rng);
      p[1] = uang(rng);
      p[3] = uang(rng);
      return p;
    };
  } else {
    auto base = pkg.sample;
    pkg.sample = [base](std::mt19937_64& rng) {
      Point p = base(rng);
      std::uniform_real_distribution<double> uth(2 * kAngleMargin, M_PI - 2 * kAngleMargin);
      std::uniform_real_distribution<double> uang(0.0, 2 * M_PI);
      p[1] = uth(rng);
      p[2] = uang(rng);
      p[3] = uang(rng);
      return p;
    };
  }
  return pkg;
}

}  // namespace

G2Package s4_package(double c0, double c1, double kappa) {
  return n_package(Model::S4, c0, c1, kappa);
}

G2Package cp2_package(double c0, double c1, double kappa) {
  return n_package(Model::CP2, c0, c1, kappa);
}

G2Package make_package(Model m, double c) {
  if (c < 0) throw DomainError("make_package: c must be >= 0");
  G2Package pkg;
  switch (m) {
    case Model::S3:
      pkg = s3_package(std::sqrt(3.0) * c, std::sqrt(3.0), 1.0);
      break;
    case Model::S4:
    case Model::CP2:
      pkg = n_package(m, 2.0 * c, 2.0, 1.0);
      break;
  }
  pkg.c = c;
  return pkg;
}

// ---------------------------------------------------------------------------
// Flat limits. S3: chart (y1,y2,y3,a0..a3); N-models: chart (a1,a2,a3,x0..x3)
// matching the index layout of phi_r7().

namespace {

// ordered product of exponentials with analytic partials
struct GaugeRot4 {
  // R(y) = right multiplication by h(y) = exp(m0 y0 e0-ish)... built from
  // per-coordinate factors exp(coef * y_m * e_m).
  double coef = 0.0;
  Eigen::Matrix4d value(const double y[3]) const {
    Quat h = qexp_im(coef * y[0], 0, 0) * qexp_im(0, coef * y[1], 0) *
             qexp_im(0, 0, coef * y[2]);
    return right_mult_matrix(h);
  }
  Eigen::Matrix4d partial(const double y[3], int m) const {
    Quat f1 = qexp_im(coef * y[0], 0, 0);
    Quat f2 = qexp_im(0, coef * y[1], 0);
    Quat f3 = qexp_im(0, 0, coef * y[2]);
    Quat e[3] = {{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
    Quat d;
    if (m == 0) d = (coef * (e[0] * f1)) * f2 * f3;
    if (m == 1) d = f1 * (coef * (e[1] * f2)) * f3;
    if (m == 2) d = f1 * f2 * (coef * (e[2] * f3));
    return right_mult_matrix(d);
  }
};

G2Package s3_flat(double kappa) {
  const double c0 = 1.0 / (3.0 * kappa), c1 = 0.25;
  G2Package base = s3_package(c0, c1, kappa);
  G2Package pkg;
  pkg.model = Model::S3;
  pkg.c0 = c0;
  pkg.c1 = c1;
  pkg.kappa = kappa;
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  chart->names = {"y1", "y2", "y3", "a0", "a1", "a2", "a3"};
  const double sk = std::sqrt(kappa);
  chart->valid = [sk](const Point& p) {
    double yn = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    return sk * yn < 0.9 * M_PI;
  };
  pkg.chart = chart;
  // map into the base chart: base point exp(-sqrt(kappa) Y); fibre gauge
  // a = a' * hbar(y), hbar = prod exp(-(sqrt(kappa)/2) y_m e_m).
  GaugeRot4 gauge{-0.5 * sk};
  auto mapfn = [sk, gauge](const Point& p) {
    Point q{};
    double y[3] = {p[0], p[1], p[2]};
    Eigen::Vector4d a(p[3], p[4], p[5], p[6]);
    Eigen::Vector4d ar = gauge.value(y) * a;
    for (int i = 0; i < 4; ++i) q[static_cast<size_t>(i)] = ar(i);
    // base coordinates in the main chart are y scaled so that the main-chart
    // exponential exp(-Y') equals exp(-sqrt(kappa) Y): Y' = sqrt(kappa) Y.
    for (int m = 0; m < 3; ++m) q[static_cast<size_t>(4 + m)] = sk * p[static_cast<size_t>(m)];
    return q;
  };
  auto jacfn = [sk, gauge](const Point& p) {
    Eigen::Matrix<double, 7, 7> J = Eigen::Matrix<double, 7, 7>::Zero();
    double y[3] = {p[0], p[1], p[2]};
    Eigen::Vector4d a(p[3], p[4], p[5], p[6]);
    Eigen::Matrix4d R = gauge.value(y);
    // d a_out / d a_in
    J.block<4, 4>(0, 3) = R;
    // d a_out / d y_m
    for (int m = 0; m < 3; ++m) {
      Eigen::Vector4d da = gauge.partial(y, m) * a;
      for (int i = 0; i < 4; ++i) J(i, m) = da(i);
    }
    for (int m = 0; m < 3; ++m) J(4 + m, m) = sk;
    return J;
  };
  ChartMap cm{mapfn, jacfn};
  pkg.phi = [base, cm](const Point& p) { return pullback_at(cm, base.phi, p); };
  pkg.starphi = [base, cm](const Point& p) { return pullback_at(cm, base.starphi, p); };
  pkg.vol7 = [base, cm](const Point& p) { return pullback_at(cm, base.vol7, p); };
  pkg.metric = [base, cm](const Point& p) {
    Eigen::Matrix<double, 7, 7> J = cm.jacobian(p);
    Eigen::MatrixXd g = base.metric(cm.map(p));
    return Eigen::MatrixXd(J.transpose() * g * J);
  };
  pkg.named["zeta0"] = [base, cm](const Point& p) {
    return pullback_at(cm, base.named.at("zeta0"), p);
  };
  pkg.named["zeta1"] = [base, cm](const Point& p) {
    return pullback_at(cm, base.named.at("zeta1"), p);
  };
  pkg.sample = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point p{};
    for (int i = 0; i < 7; ++i) p[static_cast<size_t>(i)] = u(rng);
    return p;
  };
  return pkg;
}

// Rodrigues formula for skew 3x3 matrices
Eigen::Matrix3d so3_exp(const Eigen::Matrix3d& skew) {
  Eigen::Vector3d w(skew(2, 1), skew(0, 2), skew(1, 0));
  double th = w.norm();
  if (th < 1e-12) return Eigen::Matrix3d::Identity() + skew;
  Eigen::Matrix3d k = skew / th;
  return Eigen::Matrix3d::Identity() + std::sin(th) * k +
         (1.0 - std::cos(th)) * k * k;
}

// so(3) rotation gauges for the N-models
struct GaugeRot3 {
  std::array<Eigen::Matrix3d, 4> gen{};  // generator per base coordinate
  Eigen::Matrix3d value(const double x[4]) const {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    for (int m = 0; m < 4; ++m) R = R * so3_exp(x[m] * gen[static_cast<size_t>(m)]);
    return R;
  }
  Eigen::Matrix3d partial(const double x[4], int m) const {
    Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
    for (int k = 0; k < 4; ++k) {
      Eigen::Matrix3d f = so3_exp(x[k] * gen[static_cast<size_t>(k)]);
      if (k == m) f = gen[static_cast<size_t>(k)] * f;
      R = R * f;
    }
    return R;
  }
};

Eigen::Matrix3d so3_generator(int l) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  int j = (l + 1) % 3, k = (l + 2) % 3;
  m(k, j) = 1.0;
  m(j, k) = -1.0;  // (e_l x) v
  return m;
}

G2Package n_flat(Model model, double kappa) {
  const double c0 = 1.0 / (2.0 * kappa), c1 = 1.0;
  G2Package base = n_package(model, c0, c1, kappa);
  G2Package pkg;
  pkg.model = model;
  pkg.c0 = c0;
  pkg.c1 = c1;
  pkg.kappa = kappa;
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  chart->names = {"a1", "a2", "a3", "x0", "x1", "x2", "x3"};
  pkg.chart = chart;
  const double sk = std::sqrt(kappa);

  // centre of the chart and the affine angle map: angles = centre + sk * S x
  // with S chosen so that b_i(centre) = dx_i.
  Point centre{};
  Eigen::Matrix4d S = Eigen::Matrix4d::Zero();
  // native angle ordering: S4 (alpha,beta,theta,phi), CP2 (alpha,theta,phi,psi)
  if (model == Model::S4) {
    const double al = M_PI / 4, th = M_PI / 2;
    centre = {al, 0.3, th, 0.7, 0, 0, 0};
    // b0 = dalpha/sk, b1 = sin(al) dbeta/sk, b2 = cos(al) dtheta/sk,
    // b3 = cos(al) sin(th) dphi/sk  (the 1/sk is folded into the x-scaling)
    S(0, 0) = 1.0;
    S(1, 1) = 1.0 / std::sin(al);
    S(2, 2) = 1.0 / std::cos(al);
    S(3, 3) = 1.0 / (std::cos(al) * std::sin(th));
  } else {
    const double al = M_PI / 4, th = M_PI / 2, ps = 0.0;
    centre = {al, th, 0.4, ps, 0, 0, 0};
    // b0 = sqrt2 dalpha/sk, b1 = (sa ca/sqrt2) sigma1/sk, b2 = (sa/sqrt2) sigma2/sk,
    // b3 = (sa/sqrt2) sigma3/sk; at the centre sigma1 = dpsi (theta = pi/2,
    // so cos(theta) = 0), sigma2 = dtheta (psi = 0), sigma3 = -dphi.
    const double sa = std::sin(al), ca = std::cos(al);
    S(0, 0) = 1.0 / std::sqrt(2.0);
    S(3, 1) = std::sqrt(2.0) / (sa * ca);   // x1 drives psi
    S(1, 2) = std::sqrt(2.0) / sa;          // x2 drives theta
    S(2, 3) = -std::sqrt(2.0) / sa;         // x3 drives phi
  }
  // connection at the centre, expressed in dx: P(l, m) with
  // rho_l(centre) = sum_m P(l,m) dx_m (after the angle map).
  Eigen::Matrix<double, 3, 4> P = Eigen::Matrix<double, 3, 4>::Zero();
  {
    NFrame f = (model == Model::S4) ? s4_frame(centre, kappa) : cp2_frame(centre, kappa);
    for (int l = 0; l < 3; ++l) {
      for (int m = 0; m < 4; ++m) {
        // d(angle_j)/d(x_m) = sk * S(j, m)
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += f.rho[static_cast<size_t>(l)][j] * sk * S(j, m);
        P(l, m) = s;
      }
    }
  }
  GaugeRot3 gauge;
  for (int m = 0; m < 4; ++m) {
    Eigen::Matrix3d g = Eigen::Matrix3d::Zero();
    for (int l = 0; l < 3; ++l) g += -2.0 * P(l, m) * so3_generator(l);
    gauge.gen[static_cast<size_t>(m)] = g;
  }
  auto mapfn = [centre, S, sk, gauge](const Point& p) {
    Point q{};
    double x[4] = {p[3], p[4], p[5], p[6]};
    for (int j = 0; j < 4; ++j) {
      double ang = centre[static_cast<size_t>(j)];
      for (int m = 0; m < 4; ++m) ang += sk * S(j, m) * x[m];
      q[static_cast<size_t>(j)] = ang;
    }
    Eigen::Vector3d a(p[0], p[1], p[2]);
    Eigen::Vector3d ar = gauge.value(x) * a;
    for (int i = 0; i < 3; ++i) q[static_cast<size_t>(4 + i)] = ar(i);
    return q;
  };
  auto jacfn = [S, sk, gauge](const Point& p) {
    Eigen::Matrix<double, 7, 7> J = Eigen::Matrix<double, 7, 7>::Zero();
    double x[4] = {p[3], p[4], p[5], p[6]};
    Eigen::Vector3d a(p[0], p[1], p[2]);
    for (int j = 0; j < 4; ++j)
      for (int m = 0; m < 4; ++m) J(j, 3 + m) = sk * S(j, m);
    Eigen::Matrix3d R = gauge.value(x);
    J.block<3, 3>(4, 0) = R;
    for (int m = 0; m < 4; ++m) {
      Eigen::Vector3d da = gauge.partial(x, m) * a;
      for (int i = 0; i < 3; ++i) J(4 + i, 3 + m) = da(i);
    }
    return J;
  };
  ChartMap cm{mapfn, jacfn};
  pkg.phi = [base, cm](const Point& p) { return pullback_at(cm, base.phi, p); };
  pkg.starphi = [base, cm](const Point& p) { return pullback_at(cm, base.starphi, p); };
  pkg.vol7 = [base, cm](const Point& p) { return pullback_at(cm, base.vol7, p); };
  pkg.metric = [base, cm](const Point& p) {
    Eigen::Matrix<double, 7, 7> J = cm.jacobian(p);
    Eigen::MatrixXd g = base.metric(cm.map(p));
    return Eigen::MatrixXd(J.transpose() * g * J);
  };
  for (int i = 0; i < 3; ++i) {
    std::string nm = "Omega" + std::to_string(i + 1);
    pkg.named[nm] = [base, cm, nm](const Point& p) {
      return pullback_at(cm, base.named.at(nm), p);
    };
    std::string nz = "zeta" + std::to_string(i + 1);
    pkg.named[nz] = [base, cm, nz](const Point& p) {
      return pullback_at(cm, base.named.at(nz), p);
    };
  }
  pkg.sample = [](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Point p{};
    for (int i = 0; i < 7; ++i) p[static_cast<size_t>(i)] = u(rng);
    return p;
  };
  return pkg;
}

}  // namespace

G2Package flat_limit(Model m, double kappa) {
  if (kappa <= 0) throw DomainError("flat_limit: kappa must be positive");
  return m == Model::S3 ? s3_flat(kappa) : n_flat(m, kappa);
}

// ---------------------------------------------------------------------------
// SO(3)-adapted S4 route: chart (t, s, gamma, alpha, beta, theta, phi).

namespace {

struct S4AdaptedFrame {
  AltForm s1{1}, s2{1}, s3{1};           // sigma coframe on (gamma,theta,phi)
  AltForm zt{1}, zs{1}, zperp{1};        // dt + s sa s3, ds - t sa s3, s(s1 - ca dbeta) - t sa s2
  AltForm O1{2}, Ocs{2}, Omsc{2};        // Omega1, cos g O2 + sin g O3, -sin g O2 + cos g O3
};

S4AdaptedFrame s4_adapted_frame(const Point& p) {
  // coordinates: t=0, s=1, gamma=2, alpha=3, beta=4, theta=5, phi=6
  const double t = p[0], s = p[1], g = p[2], al = p[3], th = p[5];
  const double sa = std::sin(al), ca = std::cos(al), st = std::sin(th),
               ct = std::cos(th), sg = std::sin(g), cg = std::cos(g);
  S4AdaptedFrame f;
  f.s1 = one_form({{2, 1.0}, {6, ct}});
  f.s2 = one_form({{5, cg}, {6, sg * st}});
  f.s3 = one_form({{5, sg}, {6, -cg * st}});
  const AltForm dt = AltForm::basis({0}), ds = AltForm::basis({1}),
                dal = AltForm::basis({3}), dbe = AltForm::basis({4});
  f.zt = dt + (s * sa) * f.s3;
  f.zs = ds - (t * sa) * f.s3;
  f.zperp = s * (f.s1 - ca * dbe) - (t * sa) * f.s2;
  f.O1 = wedge((sa)*dal, dbe) + (ca * ca) * wedge(f.s2, f.s3);
  f.Ocs = ca * (wedge(dal, f.s2) - sa * wedge(dbe, f.s3));
  f.Omsc = ca * (-1.0 * wedge(dal, f.s3) - sa * wedge(dbe, f.s2));
  return f;
}

}  // namespace

std::shared_ptr<const Chart> s4_adapted_chart(double c) {
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  chart->names = {"t", "s", "gamma", "alpha", "beta", "theta", "phi"};
  const bool cone = (c == 0.0);
  chart->valid = [cone](const Point& p) {
    if (p[1] <= 1e-6) return false;  // s > 0 for the polar fibre coordinates
    if (p[3] < kAngleMargin || p[3] > M_PI / 2 - kAngleMargin) return false;
    if (p[5] < kAngleMargin || p[5] > M_PI - kAngleMargin) return false;
    if (cone && p[0] * p[0] + p[1] * p[1] < 1e-4) return false;
    return true;
  };
  return chart;
}

AdaptedS4 s4_adapted(double c) {
  AdaptedS4 out;
  out.c = c;
  out.chart = s4_adapted_chart(c);
  out.phi = [c](const Point& p) {
    S4AdaptedFrame f = s4_adapted_frame(p);
    const double t = p[0], s = p[1];
    const double u = c + s * s + t * t;
    AltForm phi = std::pow(u, -0.75) * wedge(wedge(f.zt, f.zs), f.zperp);
    phi += 2.0 * std::pow(u, 0.25) * wedge(f.zt, f.O1);
    phi += 2.0 * std::pow(u, 0.25) * wedge(f.zs, f.Ocs);
    phi += 2.0 * std::pow(u, 0.25) * wedge(f.zperp, f.Omsc);
    return phi;
  };
  out.starphi = [c](const Point& p) {
    S4AdaptedFrame f = s4_adapted_frame(p);
    const double t = p[0], s = p[1], al = p[3];
    const double sa = std::sin(al), ca = std::cos(al);
    const double u = c + s * s + t * t;
    const AltForm dal = AltForm::basis({3}), dbe = AltForm::basis({4});
    AltForm psi = (-4.0 * u * sa * ca * ca) * wedge(wedge(dal, dbe), wedge(f.s2, f.s3));
    psi -= 2.0 * wedge(wedge(f.zs, f.zperp), f.O1);
    psi -= 2.0 * wedge(wedge(f.zt, f.zs), f.Omsc);
    psi += 2.0 * wedge(wedge(f.zt, f.zperp), f.Ocs);
    return psi;
  };
  for (int j = 0; j < 3; ++j)
    out.named["sigma" + std::to_string(j + 1)] = [j](const Point& p) {
      S4AdaptedFrame f = s4_adapted_frame(p);
      return j == 0 ? f.s1 : (j == 1 ? f.s2 : f.s3);
    };
  return out;
}

ChartMap s4_adapted_to_native() {
  ChartMap cm;
  cm.map = [](const Point& p) {
    // (t,s,gamma,alpha,beta,theta,phi) -> (alpha,beta,theta,phi,a1,a2,a3)
    const double t = p[0], s = p[1], g = p[2];
    return Point{p[3], p[4], p[5], p[6], t, s * std::cos(g), s * std::sin(g)};
  };
  cm.jacobian = [](const Point& p) {
    const double s = p[1], g = p[2];
    Eigen::Matrix<double, 7, 7> J = Eigen::Matrix<double, 7, 7>::Zero();
    J(0, 3) = 1;  // alpha
    J(1, 4) = 1;  // beta
    J(2, 5) = 1;  // theta
    J(3, 6) = 1;  // phi
    J(4, 0) = 1;  // a1 = t
    J(5, 1) = std::cos(g);   // a2 = s cos g
    J(5, 2) = -s * std::sin(g);
    J(6, 1) = std::sin(g);   // a3 = s sin g
    J(6, 2) = s * std::cos(g);
    return J;
  };
  return cm;
}

ChartMap cp2_polar_to_native() {
  ChartMap cm;
  cm.map = [](const Point& p) {
    // (r,gamma,beta,alpha,theta,phi,psi) -> (alpha,theta,phi,psi,a1,a2,a3)
    const double r = p[0], g = p[1], b = p[2];
    return Point{p[3], p[4], p[5], p[6], r * std::cos(g),
                 r * std::sin(g) * std::cos(b), r * std::sin(g) * std::sin(b)};
  };
  cm.jacobian = [](const Point& p) {
    const double r = p[0], g = p[1], b = p[2];
    const double sg = std::sin(g), cg = std::cos(g), sb = std::sin(b), cb = std::cos(b);
    Eigen::Matrix<double, 7, 7> J = Eigen::Matrix<double, 7, 7>::Zero();
    J(0, 3) = 1;
    J(1, 4) = 1;
    J(2, 5) = 1;
    J(3, 6) = 1;
    J(4, 0) = cg;
    J(4, 1) = -r * sg;
    J(5, 0) = sg * cb;
    J(5, 1) = r * cg * cb;
    J(5, 2) = -r * sg * sb;
    J(6, 0) = sg * sb;
    J(6, 1) = r * cg * sb;
    J(6, 2) = r * sg * cb;
    return J;
  };
  return cm;
}

std::shared_ptr<const Chart> cp2_polar_chart(double c) {
  auto chart = std::make_shared<Chart>();
  chart->dim = 7;
  chart->names = {"r", "gamma", "beta", "alpha", "theta", "phi", "psi"};
  const bool cone = (c == 0.0);
  chart->valid = [cone](const Point& p) {
    if (p[0] < (cone ? 1e-2 : 0.0)) return false;
    if (p[1] < 1e-6 || p[1] > M_PI - 1e-6) return false;  // sin gamma > 0
    if (p[3] < kAngleMargin || p[3] > M_PI / 2 - kAngleMargin) return false;
    if (p[4] < kAngleMargin || p[4] > M_PI - kAngleMargin) return false;
    return true;
  };
  return chart;
}

AltForm pullback_at(const ChartMap& f, const std::function<AltForm(const Point&)>& w,
                    const Point& p) {
  return pullback(f.jacobian(p), w(f.map(p)));
}

}  // namespace g2fib
