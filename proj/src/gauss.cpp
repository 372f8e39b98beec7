#include "depbayes/gauss.hpp"

#include <sstream>

#include "depbayes/support.hpp"

namespace depbayes {

const GaussObject& GaussObject::unit() {
  static const GaussObject u{};
  return u;
}

GaussObject make_gauss_object(int dim) {
  if (dim < 0) throw ValidationError("gaussian dimension must be >= 0");
  GaussObject o;
  o.dim = dim;
  return o;
}

GaussMap::GaussMap(GaussObject dom, GaussObject cod, Eigen::MatrixXd A,
                   Eigen::VectorXd b, Eigen::MatrixXd Sigma)
    : dom_(std::move(dom)),
      cod_(std::move(cod)),
      A_(std::move(A)),
      b_(std::move(b)),
      Sigma_(std::move(Sigma)) {
  const Eigen::Index m = dom_.dim;
  const Eigen::Index n = cod_.dim;
  if (A_.rows() != n || A_.cols() != m || b_.size() != n || Sigma_.rows() != n ||
      Sigma_.cols() != n) {
    std::ostringstream os;
    os << "gaussian map shapes inconsistent with dims (" << m << ", " << n << ")";
    throw ValidationError(os.str());
  }
  if (n > 0 && (Sigma_ - Sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("noise covariance is not symmetric within 1e-12");
  }
}

GaussMap identity(const GaussObject& x) {
  return GaussMap(x, x, Eigen::MatrixXd::Identity(x.dim, x.dim),
                  Eigen::VectorXd::Zero(x.dim), Eigen::MatrixXd::Zero(x.dim, x.dim));
}

GaussMap compose(const GaussMap& f, const GaussMap& g) {
  if (f.cod() != g.dom()) {
    throw DomainMismatch("compose: cod(f) dim " + std::to_string(f.cod().dim) +
                         " != dom(g) dim " + std::to_string(g.dom().dim));
  }
  Eigen::MatrixXd A = g.A() * f.A();
  Eigen::VectorXd b = g.A() * f.b() + g.b();
  Eigen::MatrixXd Sigma = g.A() * f.Sigma() * g.A().transpose() + g.Sigma();
  Sigma = (0.5 * (Sigma + Sigma.transpose())).eval();
  return GaussMap(f.dom(), g.cod(), std::move(A), std::move(b), std::move(Sigma));
}

GaussObject tensor(const GaussObject& x, const GaussObject& y) {
  if (x.dim == 0) return y;
  if (y.dim == 0) return x;
  GaussObject o;
  o.dim = x.dim + y.dim;
  o.factors = std::make_shared<const std::pair<GaussObject, GaussObject>>(x, y);
  return o;
}

GaussMap tensor(const GaussMap& f, const GaussMap& g) {
  const GaussObject dom = tensor(f.dom(), g.dom());
  const GaussObject cod = tensor(f.cod(), g.cod());
  const Eigen::Index nf = f.cod().dim, ng = g.cod().dim;
  const Eigen::Index mf = f.dom().dim, mg = g.dom().dim;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf + ng, mf + mg);
  A.topLeftCorner(nf, mf) = f.A();
  A.bottomRightCorner(ng, mg) = g.A();
  Eigen::VectorXd b(nf + ng);
  b << f.b(), g.b();
  Eigen::MatrixXd Sigma = Eigen::MatrixXd::Zero(nf + ng, nf + ng);
  Sigma.topLeftCorner(nf, nf) = f.Sigma();
  Sigma.bottomRightCorner(ng, ng) = g.Sigma();
  return GaussMap(dom, cod, std::move(A), std::move(b), std::move(Sigma));
}

GaussMap copy_map(const GaussObject& x) {
  const Eigen::Index n = x.dim;
  Eigen::MatrixXd A(2 * n, n);
  A << Eigen::MatrixXd::Identity(n, n), Eigen::MatrixXd::Identity(n, n);
  return GaussMap(x, tensor(x, x), std::move(A), Eigen::VectorXd::Zero(2 * n),
                  Eigen::MatrixXd::Zero(2 * n, 2 * n));
}

GaussMap discard(const GaussObject& x) {
  return GaussMap(x, GaussObject::unit(), Eigen::MatrixXd::Zero(0, x.dim),
                  Eigen::VectorXd::Zero(0), Eigen::MatrixXd::Zero(0, 0));
}

GaussMap swap_map(const GaussObject& x, const GaussObject& y) {
  const Eigen::Index nx = x.dim, ny = y.dim;
  // (x, y) |-> (y, x)
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nx + ny, nx + ny);
  A.block(0, nx, ny, ny).setIdentity();
  A.block(ny, 0, nx, nx).setIdentity();
  return GaussMap(tensor(x, y), tensor(y, x), std::move(A),
                  Eigen::VectorXd::Zero(nx + ny),
                  Eigen::MatrixXd::Zero(nx + ny, nx + ny));
}

GaussMap gauss_state(const GaussObject& x, const Eigen::VectorXd& mean,
                     const Eigen::MatrixXd& cov) {
  return GaussMap(GaussObject::unit(), x, Eigen::MatrixXd::Zero(x.dim, 0), mean, cov);
}

GaussMap gauss_state(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  return gauss_state(make_gauss_object(static_cast<int>(mean.size())), mean, cov);
}

bool is_state(const GaussMap& f) { return f.dom().dim == 0; }

std::pair<GaussMap, GaussMap> marginals(const GaussMap& pi, const GaussObject& left,
                                        const GaussObject& right) {
  if (left.dim + right.dim != pi.cod().dim) {
    throw NotAProduct("marginals: split dims do not add to the target dim");
  }
  const GaussMap keep_left = tensor(identity(left), discard(right));
  const GaussMap keep_right = tensor(discard(left), identity(right));
  return {compose(pi, keep_left), compose(pi, keep_right)};
}

std::pair<GaussMap, GaussMap> marginals(const GaussMap& pi) {
  if (!pi.cod().factors) {
    throw NotAProduct("marginals: target object carries no factorisation");
  }
  return marginals(pi, pi.cod().factors->first, pi.cod().factors->second);
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double cutoff) {
  if (m.rows() == 0 || m.cols() == 0) {
    return Eigen::MatrixXd::Zero(m.cols(), m.rows());
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  // relative cutoff plus an absolute floor, mirroring supportOf: a matrix that
  // is zero up to float dust must invert to zero, not amplify the dust
  const double threshold = std::max(cutoff * sv(0), cutoff);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > threshold && sv(i) > 0.0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

GaussMap bayes_invert(const GaussMap& f, const GaussMap& pi,
                      const GaussInvertOptions& opts) {
  if (!is_state(pi) || pi.cod() != f.dom()) {
    throw DomainMismatch("bayes_invert: pi is not a state on dom(f)");
  }
  const Eigen::MatrixXd& Sigma0 = pi.Sigma();
  const Eigen::VectorXd& mu0 = pi.b();
  const Eigen::MatrixXd M = f.A() * Sigma0 * f.A().transpose() + f.Sigma();
  const Eigen::MatrixXd Adag = Sigma0 * f.A().transpose() * pseudo_inverse(M, opts.cutoff);
  Eigen::VectorXd bdag = mu0 - Adag * (f.A() * mu0 + f.b());
  Eigen::MatrixXd Sdag = Sigma0 - Adag * f.A() * Sigma0;
  if (opts.symmetrize) {
    Sdag = (0.5 * (Sdag + Sdag.transpose())).eval();
  }
  return GaussMap(f.cod(), f.dom(), Adag, std::move(bdag), std::move(Sdag));
}

SupportObject<GaussMap> supportOf(const GaussMap& pi, double tol) {
  if (!is_state(pi)) {
    throw SignatureMismatch("supportOf: expected a state (dom = I)");
  }
  const Eigen::Index n = pi.cod().dim;
  const Eigen::MatrixXd sym = 0.5 * (pi.Sigma() + pi.Sigma().transpose());
  Eigen::Index k = 0;
  Eigen::MatrixXd E(n, n);
  if (n > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
    const double lmax = ev(n - 1);
    // relative cutoff against lmax, plus an absolute floor of tol so that a
    // covariance which is zero up to float dust has rank 0, not dust rank
    const double threshold = std::max(lmax > 0.0 ? tol * lmax : 0.0, tol);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (ev(i) > threshold) {
        Eigen::VectorXd v = es.eigenvectors().col(i);
        // canonical sign: largest-magnitude component positive, so the basis
        // is a stable function of the state and not of float dust
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v(imax) < 0.0) v = -v;
        E.col(k++) = v;
      }
    }
  }
  const GaussObject carrier = make_gauss_object(static_cast<int>(k));
  const Eigen::MatrixXd Ek = E.leftCols(k);
  GaussMap section(carrier, pi.cod(), Ek, pi.b(), Eigen::MatrixXd::Zero(n, n));
  GaussMap retraction(pi.cod(), carrier, Ek.transpose(), -Ek.transpose() * pi.b(),
                      Eigen::MatrixXd::Zero(k, k));
  return SupportObject<GaussMap>{pi.cod(), pi, carrier, std::move(section),
                                 std::move(retraction)};
}

double as_residual(const GaussMap& f, const GaussMap& g, const GaussMap& pi) {
  if (f.dom() != g.dom() || f.cod() != g.cod()) {
    throw SignatureMismatch("as_equal: f and g have different signatures");
  }
  if (pi.cod() != f.dom()) {
    throw SignatureMismatch("as_equal: target of pi is not dom(f)");
  }
  const auto sup = supportOf(pi);
  return max_abs_diff(compose(sup.section, f), compose(sup.section, g));
}

bool as_equal(const GaussMap& f, const GaussMap& g, const GaussMap& pi, double tol) {
  return as_residual(f, g, pi) <= tol;
}

void validate_gauss(const GaussMap& f) {
  const Eigen::Index n = f.cod().dim;
  if (n == 0) return;
  if ((f.Sigma() - f.Sigma().transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ValidationError("noise covariance is not symmetric within 1e-12");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (f.Sigma() + f.Sigma().transpose()));
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw ValidationError("noise covariance has an eigenvalue below -1e-10");
  }
}

double max_abs_diff(const GaussMap& f, const GaussMap& g) {
  if (f.dom() != g.dom() || f.cod() != g.cod()) {
    throw SignatureMismatch("max_abs_diff: signatures differ");
  }
  double r = 0.0;
  if (f.A().size() > 0) r = std::max(r, (f.A() - g.A()).cwiseAbs().maxCoeff());
  if (f.b().size() > 0) r = std::max(r, (f.b() - g.b()).cwiseAbs().maxCoeff());
  if (f.Sigma().size() > 0) {
    r = std::max(r, (f.Sigma() - g.Sigma()).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace depbayes
