#ifndef G2FIB_FORMS_HPP
#define G2FIB_FORMS_HPP

// Pointwise exterior algebra in dimension 7, plus the constructions specific
// to definite 3-forms: the induced metric and volume, the cross product,
// adapted coframes and hypersymplectic data on 4-dimensional subspaces.
//
// An AltForm stores the coefficients of a degree-k alternating form with
// respect to the coordinate differentials dx^0,...,dx^6 of whatever chart is
// in play, indexed by strictly increasing multi-indices in lexicographic
// order. Charts of dimension n < 7 simply never populate coefficients that
// touch the trailing coordinates.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace g2fib {

inline constexpr int kDim = 7;

// Binomial coefficients C(7,k) for k = 0..7.
inline constexpr std::array<int, 8> kCount = {1, 7, 21, 35, 35, 21, 7, 1};

// Thrown when an input leaves the mathematical domain of an operation
// (degenerate chart point, non-definite 3-form, dependent frame, ...).
class DomainError : public std::runtime_error {
 public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

namespace multi_index {
// Combinatorial numbering of strictly increasing multi-indices over {0..6}.
int rank(int degree, std::span<const int> idx);
std::span<const std::array<int, 7>> list(int degree);  // entries padded with -1
// Sign of sorting the concatenation of two disjoint increasing index sets,
// or 0 if they intersect. `merged` receives the sorted union when non-null.
int merge_sign(std::span<const int> a, std::span<const int> b, int* merged_rank,
               int degree_sum);
}  // namespace multi_index

class AltForm {
 public:
  AltForm() : degree_(0) { c_.fill(0.0); }
  explicit AltForm(int degree) : degree_(degree) {
    if (degree < 0 || degree > kDim) throw DomainError("AltForm: bad degree");
    c_.fill(0.0);
  }

  // dx^{i1} ^ ... ^ dx^{ik} for arbitrary (possibly unsorted) indices.
  static AltForm basis(std::initializer_list<int> idx, double scale = 1.0);

  int degree() const { return degree_; }
  int size() const { return kCount[degree_]; }

  double& operator[](int pos) { return c_[static_cast<size_t>(pos)]; }
  double operator[](int pos) const { return c_[static_cast<size_t>(pos)]; }

  // Coefficient on an arbitrary index tuple, with the alternating sign.
  double coeff(std::span<const int> idx) const;
  void add_term(std::span<const int> idx, double value);

  AltForm& operator+=(const AltForm& o);
  AltForm& operator-=(const AltForm& o);
  AltForm& operator*=(double s);
  friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
  friend AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
  friend AltForm operator*(AltForm a, double s) { return a *= s; }
  friend AltForm operator*(double s, AltForm a) { return a *= s; }
  friend AltForm operator-(AltForm a) { return a *= -1.0; }

  // Max-abs coefficient; cheap scale estimate independent of any metric.
  double max_abs() const;

 private:
  int degree_;
  std::array<double, 35> c_;  // C(7,k) <= 35 for all k
};

struct TangentVector {
  std::array<double, kDim> v{};
  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

// Metric data at a point of an n-dimensional chart (n <= 7): the symmetric
// matrix of the metric in coordinates and the volume form. `vol` is allowed
// to be negatively oriented with respect to the coordinate order; the Hodge
// star respects whatever orientation `vol` encodes.
struct MetricAt {
  int dim = kDim;
  Eigen::MatrixXd g;     // dim x dim, symmetric positive definite
  Eigen::MatrixXd ginv;  // cached inverse
  AltForm vol;           // degree == dim

  static MetricAt from_matrix(const Eigen::MatrixXd& g, const AltForm& vol);
  static MetricAt euclidean(int dim);
};

AltForm wedge(const AltForm& a, const AltForm& b);
AltForm interior(const TangentVector& x, const AltForm& a);

// phi(x, y, z) for a 3-form.
double eval3(const AltForm& phi, const TangentVector& x,
             const TangentVector& y, const TangentVector& z);
// 1-form phi(x, y, .).
AltForm contract2(const AltForm& phi, const TangentVector& x,
                  const TangentVector& y);
// 1-form psi(x, y, z, .) for a 4-form.
AltForm contract3(const AltForm& psi, const TangentVector& x,
                  const TangentVector& y, const TangentVector& z);

// Pointwise inner product of same-degree forms induced by m.
double inner(const MetricAt& m, const AltForm& a, const AltForm& b);
double form_norm(const MetricAt& m, const AltForm& a);

// Hodge star with respect to m.g and the orientation of m.vol.
AltForm hodge(const MetricAt& m, const AltForm& a);

// Metric and volume induced by a definite 3-form, from the relation
//   -6 g(X,Y) vol = (X . phi) ^ (Y . phi) ^ phi,
// normalised against the chart volume dx^0...dx^6. The real ninth root keeps
// the sign of the chart orientation. Throws DomainError when the candidate
// matrix fails to be definite.
MetricAt metric_from_three_form(const AltForm& phi);

// Cross product: g(cross(x,y), z) = phi(x,y,z).
TangentVector cross(const MetricAt& m, const AltForm& phi,
                    const TangentVector& x, const TangentVector& y);

// Raise a 1-form / lower a vector with m.
TangentVector sharp(const MetricAt& m, const AltForm& one_form);
AltForm flat(const MetricAt& m, const TangentVector& x);

// Oriented orthonormal coframe adapted to a coassociative structure: given a
// definite 3-form and orthogonal 1-forms h2, h3, w0 with h2, h3 horizontal
// and phi(h2#, h3#, w0#) = 0, returns {h1^, h2^, h3^, w0^, w1^, w2^, w3^}
// with h1^ = h3^# . (h2^# . phi) and wk^ = w0^# . (hk^# . phi). The
// reconstruction of phi and *phi in this coframe is the caller's check.
struct AdaptedCoframe {
  std::array<AltForm, 7> forms;  // h1,h2,h3,w0,w1,w2,w3 (unit length)
};
AdaptedCoframe adapted_coframe(const AltForm& phi, const AltForm& h2,
                               const AltForm& h3, const AltForm& w0,
                               double tol = 1e-8);

// Horizontal 1-forms and the vertical direction generated by three
// independent vertical vectors: ht_i = phi(x_j, x_k, .) cyclically and
// w0t = (*phi)(x1, x2, x3, .).
struct OrbitCoframe {
  AltForm h1, h2, h3, w0;
};
OrbitCoframe orbit_coframe(const AltForm& phi, const AltForm& starphi,
                           const TangentVector& x1, const TangentVector& x2,
                           const TangentVector& x3);

// Canonical G2 package in an orthonormal coframe e[0..6] listed as
// (h1,h2,h3,w0,w1,w2,w3): the standard 3-form, 4-form and volume.
AltForm canonical_phi(const std::array<AltForm, 7>& e);
AltForm canonical_starphi(const std::array<AltForm, 7>& e);

// phi_R7 on the chart ordering (x1,x2,x3,y0,y1,y2,y3).
AltForm phi_r7();
AltForm starphi_r7();

// Pullback of a k-form along the linear map with Jacobian J (dF at a point):
// (F^* w)(v_1..v_k) = w(J v_1, ..., J v_k).
AltForm pullback(const Eigen::Matrix<double, 7, 7>& jac, const AltForm& a);

// Hypersymplectic data on a 4-dimensional subspace: given phi at a point, an
// ordered tangent frame t[0..3] of the subspace, normal vectors n[0..2] and
// the volume form of the subspace expressed in the dual frame coordinates
// (a degree-4 AltForm on indices {0,1,2,3}), returns the three 2-forms
// omega_k = (n_k . phi) restricted to the frame, and Q with
// omega_i ^ omega_j = 2 Q_ij vol.
struct HypersymplecticAt {
  std::array<AltForm, 3> omega;  // degree-2 forms on indices {0..3}
  Eigen::Matrix3d q;
  bool q_positive_definite = false;
};
HypersymplecticAt hypersymplectic_at(const AltForm& phi,
                                     const std::array<TangentVector, 4>& frame,
                                     const std::array<TangentVector, 3>& normals,
                                     const AltForm& vol4);

}  // namespace g2fib

#endif  // G2FIB_FORMS_HPP
