#include "depbayes/finstoch.hpp"

#include <set>
#include <sstream>

namespace depbayes {

const FinObject& FinObject::unit() {
  static const FinObject u = [] {
    FinObject o;
    o.labels = {"I"};
    o.is_unit = true;
    return o;
  }();
  return u;
}

Eigen::Index FinObject::index_of(const std::string& label) const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (labels[static_cast<std::size_t>(i)] == label) return i;
  }
  return -1;
}

FinObject make_fin_object(std::vector<std::string> labels) {
  if (labels.empty()) {
    throw ValidationError("finite object must have at least one label");
  }
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) {
      throw ValidationError("duplicate label '" + l + "' in finite object");
    }
  }
  FinObject o;
  o.labels = std::move(labels);
  return o;
}

StochMap::StochMap(FinObject dom, FinObject cod, Eigen::MatrixXd entries)
    : dom_(std::move(dom)), cod_(std::move(cod)), m_(std::move(entries)) {
  if (m_.rows() != dom_.size() || m_.cols() != cod_.size()) {
    std::ostringstream os;
    os << "stochastic matrix shape " << m_.rows() << "x" << m_.cols()
       << " does not match objects " << dom_.size() << "x" << cod_.size();
    throw ValidationError(os.str());
  }
  if ((m_.array() < 0.0).any()) {
    throw ValidationError("stochastic matrix has a negative entry");
  }
}

StochMap identity(const FinObject& x) {
  return StochMap(x, x, Eigen::MatrixXd::Identity(x.size(), x.size()));
}

StochMap deterministic(const FinObject& dom, const FinObject& cod,
                       const std::function<Eigen::Index(Eigen::Index)>& mapping) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dom.size(), cod.size());
  for (Eigen::Index i = 0; i < dom.size(); ++i) {
    const Eigen::Index j = mapping(i);
    if (j < 0 || j >= cod.size()) {
      throw IndexOutOfRange("deterministic mapping leaves codomain at index " +
                            std::to_string(i));
    }
    m(i, j) = 1.0;
  }
  return StochMap(dom, cod, std::move(m));
}

StochMap compose(const StochMap& f, const StochMap& g) {
  if (f.cod() != g.dom()) {
    throw DomainMismatch("compose: cod(f) has " + std::to_string(f.cod().size()) +
                         " labels, dom(g) has " + std::to_string(g.dom().size()));
  }
  return StochMap(f.dom(), g.cod(), f.entries() * g.entries());
}

FinObject tensor(const FinObject& x, const FinObject& y) {
  if (x.is_unit) return y;
  if (y.is_unit) return x;
  FinObject o;
  o.labels.reserve(static_cast<std::size_t>(x.size() * y.size()));
  for (const auto& a : x.labels) {
    for (const auto& b : y.labels) {
      o.labels.push_back(a + "," + b);
    }
  }
  o.factors = std::make_shared<const std::pair<FinObject, FinObject>>(x, y);
  return o;
}

StochMap tensor(const StochMap& f, const StochMap& g) {
  const FinObject dom = tensor(f.dom(), g.dom());
  const FinObject cod = tensor(f.cod(), g.cod());
  Eigen::MatrixXd m(f.entries().rows() * g.entries().rows(),
                    f.entries().cols() * g.entries().cols());
  for (Eigen::Index i = 0; i < f.entries().rows(); ++i) {
    for (Eigen::Index j = 0; j < f.entries().cols(); ++j) {
      m.block(i * g.entries().rows(), j * g.entries().cols(), g.entries().rows(),
              g.entries().cols()) = f.entries()(i, j) * g.entries();
    }
  }
  return StochMap(dom, cod, std::move(m));
}

StochMap copy_map(const FinObject& x) {
  const FinObject xx = tensor(x, x);
  const Eigen::Index n = x.size();
  return deterministic(x, xx, [n](Eigen::Index i) { return i * n + i; });
}

StochMap discard(const FinObject& x) {
  return StochMap(x, FinObject::unit(), Eigen::MatrixXd::Ones(x.size(), 1));
}

StochMap swap_map(const FinObject& x, const FinObject& y) {
  const Eigen::Index nx = x.size();
  const Eigen::Index ny = y.size();
  return deterministic(tensor(x, y), tensor(y, x), [nx, ny](Eigen::Index i) {
    const Eigen::Index a = i / ny;
    const Eigen::Index b = i % ny;
    return b * nx + a;
  });
}

StochMap fin_state(const FinObject& x, const Eigen::RowVectorXd& probs) {
  return StochMap(FinObject::unit(), x, probs);
}

StochMap point_state(const FinObject& x, Eigen::Index point) {
  if (point < 0 || point >= x.size()) {
    throw IndexOutOfRange("point state index " + std::to_string(point));
  }
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(x.size());
  p(point) = 1.0;
  return fin_state(x, p);
}

bool is_state(const StochMap& f) { return f.dom().is_unit; }

std::pair<StochMap, StochMap> marginals(const StochMap& pi, const FinObject& left,
                                        const FinObject& right) {
  if (left.size() * right.size() != pi.cod().size()) {
    throw NotAProduct("marginals: split sizes do not multiply to the target size");
  }
  const StochMap keep_left = tensor(identity(left), discard(right));
  const StochMap keep_right = tensor(discard(left), identity(right));
  // Reinterpret pi's target so composition against the split typechecks.
  const StochMap pi_split(pi.dom(), keep_left.dom(), pi.entries());
  return {compose(pi_split, keep_left), compose(pi_split, keep_right)};
}

std::pair<StochMap, StochMap> marginals(const StochMap& pi) {
  if (!pi.cod().factors) {
    throw NotAProduct("marginals: target object carries no factorisation");
  }
  return marginals(pi, pi.cod().factors->first, pi.cod().factors->second);
}

double as_residual(const StochMap& f, const StochMap& g, const StochMap& pi) {
  if (f.dom() != g.dom() || f.cod() != g.cod()) {
    throw SignatureMismatch("as_equal: f and g have different signatures");
  }
  if (pi.cod() != f.dom()) {
    throw SignatureMismatch("as_equal: target of pi is not dom(f)");
  }
  const Eigen::MatrixXd diff = (f.entries() - g.entries()).cwiseAbs();
  return (pi.entries().transpose().asDiagonal() * diff).maxCoeff();
}

bool as_equal(const StochMap& f, const StochMap& g, const StochMap& pi, double tol) {
  return as_residual(f, g, pi) <= tol;
}

void validate_stochastic(const StochMap& f, double tol) {
  const Eigen::VectorXd sums = f.entries().rowwise().sum();
  for (Eigen::Index i = 0; i < sums.size(); ++i) {
    if (std::abs(sums(i) - 1.0) > tol) {
      std::ostringstream os;
      os << "row " << i << " (label '" << f.dom().labels[static_cast<std::size_t>(i)]
         << "') sums to " << sums(i);
      throw ValidationError(os.str());
    }
  }
}

double max_abs_diff(const StochMap& f, const StochMap& g) {
  if (f.entries().rows() != g.entries().rows() ||
      f.entries().cols() != g.entries().cols()) {
    throw SignatureMismatch("max_abs_diff: shapes differ");
  }
  if (f.entries().size() == 0) return 0.0;
  return (f.entries() - g.entries()).cwiseAbs().maxCoeff();
}

}  // namespace depbayes
