#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "depbayes/errors.hpp"

namespace depbayes {

/// A finite labelled object of the FinStoch instance.
///
/// The monoidal unit I is a distinguished 1-point object. Objects built by
/// tensor() remember their factorisation so states on them can be
/// marginalised; equality ignores the factorisation and compares labels only.
struct FinObject {
  std::vector<std::string> labels;
  std::shared_ptr<const std::pair<FinObject, FinObject>> factors{};
  bool is_unit = false;

  static const FinObject& unit();

  Eigen::Index size() const { return static_cast<Eigen::Index>(labels.size()); }

  // -1 when absent
  Eigen::Index index_of(const std::string& label) const;

  bool operator==(const FinObject& o) const { return labels == o.labels; }
  bool operator!=(const FinObject& o) const { return !(*this == o); }
};

// Validates: at least one label, labels pairwise distinct.
FinObject make_fin_object(std::vector<std::string> labels);

/// A row-stochastic matrix between finite labelled objects. States are
/// morphisms out of the unit, i.e. 1xn probability rows.
///
/// The constructor checks shapes and non-negativity only; stochasticity is
/// validated separately by validate_stochastic so that drift after long
/// composite chains stays observable.
class StochMap {
 public:
  using Obj = FinObject;

  StochMap(FinObject dom, FinObject cod, Eigen::MatrixXd entries);

  const FinObject& dom() const { return dom_; }
  const FinObject& cod() const { return cod_; }
  const Eigen::MatrixXd& entries() const { return m_; }

 private:
  FinObject dom_;
  FinObject cod_;
  Eigen::MatrixXd m_;
};

StochMap identity(const FinObject& x);

// entry (x, y) = 1 iff y = mapping(x). Throws IndexOutOfRange when mapping
// leaves the codomain index range.
StochMap deterministic(const FinObject& dom, const FinObject& cod,
                       const std::function<Eigen::Index(Eigen::Index)>& mapping);

StochMap compose(const StochMap& f, const StochMap& g);

// Strict tensor: the unit is absorbed, pair labels are joined row-major as
// "a,b" so nested tensors associate on the nose.
FinObject tensor(const FinObject& x, const FinObject& y);
StochMap tensor(const StochMap& f, const StochMap& g);

StochMap copy_map(const FinObject& x);    // X -> X (x) X
StochMap discard(const FinObject& x);     // X -> I
StochMap swap_map(const FinObject& x, const FinObject& y);

StochMap fin_state(const FinObject& x, const Eigen::RowVectorXd& probs);
StochMap point_state(const FinObject& x, Eigen::Index point);

bool is_state(const StochMap& f);

// pi_L = pi ; (id (x) discard), pi_R = pi ; (discard (x) id). The first form
// uses the factorisation recorded on the target (NotAProduct when absent);
// the second takes the split explicitly.
std::pair<StochMap, StochMap> marginals(const StochMap& pi);
std::pair<StochMap, StochMap> marginals(const StochMap& pi, const FinObject& left,
                                        const FinObject& right);

// max over x, y of |pi(x) * (f(x,y) - g(x,y))|
double as_residual(const StochMap& f, const StochMap& g, const StochMap& pi);
bool as_equal(const StochMap& f, const StochMap& g, const StochMap& pi, double tol);

// Throws ValidationError when a row sum strays from 1 by more than tol.
void validate_stochastic(const StochMap& f, double tol = 1e-9);

// Entrywise comparison helper; throws SignatureMismatch on shape mismatch.
double max_abs_diff(const StochMap& f, const StochMap& g);

}  // namespace depbayes
