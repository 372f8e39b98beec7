#include "depbayes/support.hpp"

#include <vector>

namespace depbayes {

SupportObject<StochMap> supportOf(const StochMap& pi, double tol) {
  if (!is_state(pi)) {
    throw SignatureMismatch("supportOf: expected a state (dom = I)");
  }
  const Eigen::RowVectorXd& p = pi.entries().row(0);
  std::vector<Eigen::Index> supported;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) > tol) supported.push_back(i);
  }
  if (supported.empty()) {
    throw EmptySupport("state has no entry above the support threshold");
  }

  FinObject carrier = pi.cod();  // full support keeps the base (and unit flag)
  if (static_cast<Eigen::Index>(supported.size()) < p.size()) {
    std::vector<std::string> labels;
    labels.reserve(supported.size());
    for (const Eigen::Index i : supported) {
      labels.push_back(pi.cod().labels[static_cast<std::size_t>(i)]);
    }
    carrier = make_fin_object(std::move(labels));
  }

  StochMap section = deterministic(carrier, pi.cod(), [&supported](Eigen::Index k) {
    return supported[static_cast<std::size_t>(k)];
  });
  // Inverse of the inclusion on the support; everything else lands on the
  // lowest-index supported label.
  std::vector<Eigen::Index> position(static_cast<std::size_t>(p.size()), 0);
  for (std::size_t k = 0; k < supported.size(); ++k) {
    position[static_cast<std::size_t>(supported[k])] = static_cast<Eigen::Index>(k);
  }
  StochMap retraction = deterministic(pi.cod(), carrier, [&position](Eigen::Index i) {
    return position[static_cast<std::size_t>(i)];
  });
  return SupportObject<StochMap>{pi.cod(), pi, carrier, std::move(section),
                                 std::move(retraction)};
}

StochMap bayes_invert(const StochMap& f, const StochMap& pi, double tol) {
  if (!is_state(pi) || pi.cod() != f.dom()) {
    throw DomainMismatch("bayes_invert: pi is not a state on dom(f)");
  }
  const Eigen::RowVectorXd& p = pi.entries().row(0);
  const Eigen::Index m = f.dom().size();
  const Eigen::Index n = f.cod().size();

  Eigen::Index lowest_supported = -1;
  for (Eigen::Index x = 0; x < m; ++x) {
    if (p(x) > tol) {
      lowest_supported = x;
      break;
    }
  }
  if (lowest_supported < 0) {
    throw EmptySupport("prior has no entry above the support threshold");
  }

  const Eigen::RowVectorXd q = (pi.entries() * f.entries()).row(0);
  Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(n, m);
  for (Eigen::Index y = 0; y < n; ++y) {
    if (q(y) > tol) {
      for (Eigen::Index x = 0; x < m; ++x) {
        inv(y, x) = p(x) * f.entries()(x, y) / q(y);
      }
    } else {
      inv(y, lowest_supported) = 1.0;
    }
  }
  return StochMap(f.cod(), f.dom(), std::move(inv));
}

}  // namespace depbayes
