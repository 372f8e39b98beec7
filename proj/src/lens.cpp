#include "depbayes/lens.hpp"

#include <sstream>

namespace depbayes {

namespace {

void append_quantized(std::ostringstream& os, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << static_cast<long long>(std::llround(m(i, j) * 1e12)) << ";";
    }
  }
}

}  // namespace

std::string fingerprint(const StochMap& state) {
  std::ostringstream os;
  os << "f:" << state.entries().rows() << "x" << state.entries().cols() << ":";
  append_quantized(os, state.entries());
  return os.str();
}

std::string fingerprint(const GaussMap& state) {
  std::ostringstream os;
  os << "g:" << state.dom().dim << "->" << state.cod().dim << ":";
  append_quantized(os, state.A());
  os << "|";
  append_quantized(os, state.b());
  os << "|";
  append_quantized(os, state.Sigma());
  return os.str();
}

FilterResult<StochMap> filter_step(const StochMap& belief, const StochMap& dynamics,
                                   const StochMap& observe, Eigen::Index obs,
                                   double tol) {
  const StochMap predicted = compose(belief, dynamics);
  const StochMap predictive = compose(predicted, observe);
  if (obs < 0 || obs >= predictive.cod().size()) {
    throw IndexOutOfRange("observation index " + std::to_string(obs));
  }
  const double mass = predictive.entries()(0, obs);
  if (mass <= tol) {
    throw UnsupportedObservation(
        "observation '" + predictive.cod().labels[static_cast<std::size_t>(obs)] +
        "' has predictive probability <= tol");
  }
  // Convention rows of the ordinary inverse are unreachable past the guard.
  const StochMap inverse = bayes_invert(observe, predicted, tol);
  return {fin_state(predicted.cod(), inverse.entries().row(obs)), std::log(mass)};
}

FilterResult<GaussMap> filter_step(const GaussMap& belief, const GaussMap& dynamics,
                                   const GaussMap& observe, const Eigen::VectorXd& obs,
                                   double tol) {
  const GaussMap predicted = compose(belief, dynamics);
  const GaussMap predictive = compose(predicted, observe);
  if (obs.size() != predictive.cod().dim) {
    throw SignatureMismatch("observation vector has the wrong dimension");
  }
  const GaussMap posterior = bayes_invert(observe, predicted, {tol, true});
  GaussMap next = gauss_state(predicted.cod(), posterior.A() * obs + posterior.b(),
                              posterior.Sigma());

  // log density of the predictive at the observation, on the support of its
  // covariance (pseudo-determinant for rank-deficient cases)
  const Eigen::MatrixXd cov =
      0.5 * (predictive.Sigma() + predictive.Sigma().transpose());
  const Eigen::VectorXd resid = obs - predictive.b();
  double log_density = 0.0;
  if (cov.rows() > 0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = ev.size() > 0 ? ev(ev.size() - 1) : 0.0;
    const double threshold = lmax > 0.0 ? tol * lmax : 0.0;
    double log_det = 0.0;
    double quad = 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      const double proj = es.eigenvectors().col(i).dot(resid);
      if (ev(i) > threshold && ev(i) > 0.0) {
        log_det += std::log(ev(i));
        quad += proj * proj / ev(i);
        ++rank;
      }
    }
    log_density = -0.5 * (quad + log_det +
                          static_cast<double>(rank) * std::log(2.0 * M_PI));
  }
  return {std::move(next), log_density};
}

}  // namespace depbayes
