#pragma once

#include <Eigen/Dense>
#include <memory>
#include <utility>

#include "depbayes/errors.hpp"

namespace depbayes {

/// An object of the Gauss instance: a euclidean space of fixed dimension.
/// Dimension 0 is the monoidal unit. Tensoring records the factorisation.
struct GaussObject {
  int dim = 0;
  std::shared_ptr<const std::pair<GaussObject, GaussObject>> factors{};

  static const GaussObject& unit();

  bool operator==(const GaussObject& o) const { return dim == o.dim; }
  bool operator!=(const GaussObject& o) const { return !(*this == o); }
};

GaussObject make_gauss_object(int dim);

/// An affine map with additive gaussian noise: x |-> Ax + b + xi with
/// xi ~ N(0, Sigma). States are maps out of dimension 0, so mean = b.
class GaussMap {
 public:
  using Obj = GaussObject;

  GaussMap(GaussObject dom, GaussObject cod, Eigen::MatrixXd A, Eigen::VectorXd b,
           Eigen::MatrixXd Sigma);

  const GaussObject& dom() const { return dom_; }
  const GaussObject& cod() const { return cod_; }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::MatrixXd& Sigma() const { return Sigma_; }

 private:
  GaussObject dom_;
  GaussObject cod_;
  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::MatrixXd Sigma_;
};

GaussMap identity(const GaussObject& x);
GaussMap compose(const GaussMap& f, const GaussMap& g);

GaussObject tensor(const GaussObject& x, const GaussObject& y);
GaussMap tensor(const GaussMap& f, const GaussMap& g);

GaussMap copy_map(const GaussObject& x);
GaussMap discard(const GaussObject& x);
GaussMap swap_map(const GaussObject& x, const GaussObject& y);

GaussMap gauss_state(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
GaussMap gauss_state(const GaussObject& x, const Eigen::VectorXd& mean,
                     const Eigen::MatrixXd& cov);

bool is_state(const GaussMap& f);

std::pair<GaussMap, GaussMap> marginals(const GaussMap& pi);
std::pair<GaussMap, GaussMap> marginals(const GaussMap& pi, const GaussObject& left,
                                        const GaussObject& right);

struct GaussInvertOptions {
  // Singular values below cutoff * (largest singular value) count as zero.
  double cutoff = 1e-10;
  // Symmetrise the posterior covariance after the update. Exposed so the law
  // harness can run its documented mutation self-test.
  bool symmetrize = true;
};

// Gaussian conditioning: the Bayesian inverse of f at the prior pi.
GaussMap bayes_invert(const GaussMap& f, const GaussMap& pi,
                      const GaussInvertOptions& opts = {});

// Almost-sure equality, defined operationally via the support section:
// i_pi ; f and i_pi ; g compared componentwise.
double as_residual(const GaussMap& f, const GaussMap& g, const GaussMap& pi);
bool as_equal(const GaussMap& f, const GaussMap& g, const GaussMap& pi, double tol);

// Checks Sigma symmetry and eigenvalues >= -1e-10.
void validate_gauss(const GaussMap& f);

double max_abs_diff(const GaussMap& f, const GaussMap& g);

// Moore-Penrose pseudoinverse. Singular values below
// max(cutoff * largest, cutoff) count as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double cutoff = 1e-10);

}  // namespace depbayes
