#pragma once
// Dense reference for small open or periodic chains, written in the basis
// where the coupled spin is diagonal (the a-priori flip process acts as the
// off-diagonal field). Independent of SpectralModel, which works in the
// field-diagonal basis.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "tfim/geometry.hpp"

namespace oracle {

struct Chain {
  int L = 2;
  bool periodic = false;
  bool wired = false;  // +1 exterior sites beyond both ends
  double lambda = 1, delta = 1;

  int spin(int state, int x) const { return (state >> x) & 1 ? -1 : 1; }

  Eigen::MatrixXd H() const {
    const int D = 1 << L;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(D, D);
    for (int s = 0; s < D; ++s) {
      double diag = 0;
      for (int x = 0; x + 1 < L; ++x) diag -= lambda * spin(s, x) * spin(s, x + 1);
      if (periodic && L > 2) diag -= lambda * spin(s, L - 1) * spin(s, 0);
      if (wired) diag -= lambda * (spin(s, 0) + spin(s, L - 1));
      h(s, s) = diag;
      for (int x = 0; x < L; ++x) h(s ^ (1 << x), s) -= delta;
    }
    return h;
  }
};

class Propagator {
 public:
  explicit Propagator(const Eigen::MatrixXd& h) : es_(h) {}
  Eigen::MatrixXd operator()(double t) const {
    const Eigen::VectorXd e = (-t * (es_.eigenvalues().array() - es_.eigenvalues().minCoeff())).exp();
    return es_.eigenvectors() * e.asDiagonal() * es_.eigenvectors().transpose();
  }

 private:
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_;
};

// ⟨Π σ(x_i, t_i)⟩ on the chain over [-r/2, r/2] with time bc f, w or p
inline double correlation(const Chain& c, std::vector<std::pair<int, double>> A, double r, tfim::BC time) {
  const int D = 1 << c.L;
  Propagator P(c.H());
  std::sort(A.begin(), A.end(), [](auto& a, auto& b) { return a.second < b.second; });
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(D, D);
  double prev = -0.5 * r;
  for (auto& [x, t] : A) {
    M = P(t - prev) * M;
    Eigen::VectorXd s(D);
    for (int k = 0; k < D; ++k) s(k) = c.spin(k, x);
    M = s.asDiagonal() * M;
    prev = t;
  }
  M = P(0.5 * r - prev) * M;
  const Eigen::MatrixXd Z = P(r);
  if (time == tfim::BC::p) return M.trace() / Z.trace();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(D);
  if (time == tfim::BC::f) v.setOnes();
  else v(0) = 1.0;  // all +1
  return v.dot(M * v) / v.dot(Z * v);
}

}  // namespace oracle
