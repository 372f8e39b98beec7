#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include "depbayes/support.hpp"

namespace depbayes {

// State fingerprints quantise entries at 1e-12 so that states equal up to
// float dust index the same family slot.
std::string fingerprint(const StochMap& state);
std::string fingerprint(const GaussMap& state);

/// A family of objects indexed by states on a base object, evaluated on
/// demand. Results are cached by state fingerprint; the cache tolerates
/// concurrent read/insert with last-write-wins on identical keys.
template <class M>
class IndexedFamily {
 public:
  using Obj = typename M::Obj;

  IndexedFamily(Obj base, std::function<Obj(const M&)> assign)
      : base_(std::move(base)),
        assign_(std::move(assign)),
        cache_(std::make_shared<Cache>()) {}

  const Obj& base() const { return base_; }

  Obj at(const M& state) const {
    if (!(state.cod() == base_)) {
      throw SignatureMismatch("family evaluated at a state on the wrong object");
    }
    const std::string key = fingerprint(state);
    {
      std::lock_guard<std::mutex> lock(cache_->mutex);
      auto it = cache_->entries.find(key);
      if (it != cache_->entries.end()) return it->second;
    }
    Obj value = assign_(state);
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->entries.insert_or_assign(key, std::move(value)).first->second;
  }

  std::size_t cache_size() const {
    std::lock_guard<std::mutex> lock(cache_->mutex);
    return cache_->entries.size();
  }

 private:
  struct Cache {
    mutable std::mutex mutex;
    std::unordered_map<std::string, Obj> entries;
  };
  Obj base_;
  std::function<Obj(const M&)> assign_;
  std::shared_ptr<Cache> cache_;
};

template <class M>
IndexedFamily<M> constant_family(typename M::Obj base, typename M::Obj value) {
  return IndexedFamily<M>(std::move(base),
                          [value](const M&) { return value; });
}

// pi |-> carrier of the support of pi.
template <class M>
IndexedFamily<M> support_family(typename M::Obj base) {
  return IndexedFamily<M>(std::move(base),
                          [](const M& pi) { return supportOf(pi).carrier; });
}

/// Chart: forward base morphism with covariant fibre maps
/// A(pi) -> B(pi ; f) for every prior pi.
template <class M>
struct Chart {
  M fwd;
  IndexedFamily<M> dom_family;
  IndexedFamily<M> cod_family;
  std::function<M(const M&)> fibre_fwd;
};

/// Lens: same base data but contravariant fibres, B(pi ; f) -> A(pi).
template <class M>
struct Lens {
  M fwd;
  IndexedFamily<M> dom_family;
  IndexedFamily<M> cod_family;
  std::function<M(const M&)> bwd;
};

// T on a morphism: fibres are the restrictions between supports.
template <class M>
Chart<M> sectionT(const M& f) {
  return Chart<M>{f, support_family<M>(f.dom()), support_family<M>(f.cod()),
                  [f](const M& pi) { return restrict_map(f, pi); }};
}

// S on a morphism: fibres are the Bayesian inverses with support.
template <class M>
Lens<M> sectionS(const M& f) {
  return Lens<M>{f, support_family<M>(f.dom()), support_family<M>(f.cod()),
                 [f](const M& pi) { return bayes_invert_supported(f, pi); }};
}

template <class M>
Chart<M> identity_chart(const typename M::Obj& x) {
  return sectionT(identity(x));
}

template <class M>
Lens<M> identity_lens(const typename M::Obj& x) {
  return sectionS(identity(x));
}

template <class M>
Chart<M> compose_chart(const Chart<M>& c1, const Chart<M>& c2) {
  if (!(c1.fwd.cod() == c2.fwd.dom())) {
    throw SignatureMismatch("compose_chart: middle objects differ");
  }
  const M f = c1.fwd;
  auto fib1 = c1.fibre_fwd;
  auto fib2 = c2.fibre_fwd;
  return Chart<M>{compose(c1.fwd, c2.fwd), c1.dom_family, c2.cod_family,
                  [f, fib1, fib2](const M& pi) {
                    return compose(fib1(pi), fib2(compose(pi, f)));
                  }};
}

template <class M>
Lens<M> compose_lens(const Lens<M>& l1, const Lens<M>& l2) {
  if (!(l1.fwd.cod() == l2.fwd.dom())) {
    throw SignatureMismatch("compose_lens: middle objects differ");
  }
  const M f = l1.fwd;
  auto mid_out = l1.cod_family;
  auto mid_in = l2.dom_family;
  auto bwd1 = l1.bwd;
  auto bwd2 = l2.bwd;
  return Lens<M>{compose(l1.fwd, l2.fwd), l1.dom_family, l2.cod_family,
                 [f, mid_out, mid_in, bwd1, bwd2](const M& pi) {
                   const M pushed = compose(pi, f);
                   if (!(mid_out.at(pushed) == mid_in.at(pushed))) {
                     throw SignatureMismatch(
                         "compose_lens: middle families disagree at this prior");
                   }
                   return compose(bwd2(pushed), bwd1(pi));
                 }};
}

template <class M>
IndexedFamily<M> tensor_family(const IndexedFamily<M>& a, const IndexedFamily<M>& b) {
  const auto base = tensor(a.base(), b.base());
  return IndexedFamily<M>(base, [a, b](const M& pi) {
    const auto [pl, pr] = marginals(pi, a.base(), b.base());
    return tensor(a.at(pl), b.at(pr));
  });
}

template <class M>
Chart<M> tensor_chart(const Chart<M>& c1, const Chart<M>& c2) {
  const auto doml = c1.fwd.dom();
  const auto domr = c2.fwd.dom();
  auto fib1 = c1.fibre_fwd;
  auto fib2 = c2.fibre_fwd;
  return Chart<M>{tensor(c1.fwd, c2.fwd),
                  tensor_family(c1.dom_family, c2.dom_family),
                  tensor_family(c1.cod_family, c2.cod_family),
                  [doml, domr, fib1, fib2](const M& pi) {
                    const auto [pl, pr] = marginals(pi, doml, domr);
                    return tensor(fib1(pl), fib2(pr));
                  }};
}

template <class M>
Lens<M> tensor_lens(const Lens<M>& l1, const Lens<M>& l2) {
  const auto doml = l1.fwd.dom();
  const auto domr = l2.fwd.dom();
  auto bwd1 = l1.bwd;
  auto bwd2 = l2.bwd;
  return Lens<M>{tensor(l1.fwd, l2.fwd),
                 tensor_family(l1.dom_family, l2.dom_family),
                 tensor_family(l1.cod_family, l2.cod_family),
                 [doml, domr, bwd1, bwd2](const M& pi) {
                   const auto [pl, pr] = marginals(pi, doml, domr);
                   return tensor(bwd1(pl), bwd2(pr));
                 }};
}

// The product oplaxator of T: (X (x) Y)_pi -> X_{pi_L} (x) Y_{pi_R},
// given by i_pi ; (r_{pi_L} (x) r_{pi_R}).
template <class M>
M oplax_gamma(const M& pi) {
  const auto [pl, pr] = marginals(pi);
  return compose(supportOf(pi).section,
                 tensor(supportOf(pl).retraction, supportOf(pr).retraction));
}

template <class M>
M oplax_gamma(const M& pi, const typename M::Obj& left, const typename M::Obj& right) {
  const auto [pl, pr] = marginals(pi, left, right);
  return compose(supportOf(pi).section,
                 tensor(supportOf(pl).retraction, supportOf(pr).retraction));
}

// A Stat-style lens: constant families, so the backward object ignores the
// prior entirely.
template <class M>
Lens<M> stat_lens(const M& f, const typename M::Obj& dom_value,
                  const typename M::Obj& cod_value, std::function<M(const M&)> bwd) {
  return Lens<M>{f, constant_family<M>(f.dom(), dom_value),
                 constant_family<M>(f.cod(), cod_value), std::move(bwd)};
}

/// The two halves of the isomorphism (X (x) X)_{pi ; copy} ~ X_pi: the
/// supported inverses of copy at pi and of the left marginalisation at
/// pi ; copy. Their composites are identities both ways round.
template <class M>
std::pair<M, M> copy_inverse_iso(const M& pi) {
  const auto x = pi.cod();
  const M c = copy_map(x);
  const M l = tensor(identity(x), discard(x));  // X (x) X -> X
  const M pi_c = compose(pi, c);
  M c_sharp = bayes_invert_supported(c, pi);
  M l_sharp = bayes_invert_supported(l, pi_c);
  return {std::move(c_sharp), std::move(l_sharp)};
}

template <class M>
struct FilterResult {
  M belief;
  double log_likelihood;
};

// One step of lens-based filtering: push the belief through the dynamics,
// then condition the observation channel on the observed label.
FilterResult<StochMap> filter_step(const StochMap& belief, const StochMap& dynamics,
                                   const StochMap& observe, Eigen::Index obs,
                                   double tol = 1e-12);

// Gaussian variant: the observed vector is substituted into the affine
// posterior map of the observation channel.
FilterResult<GaussMap> filter_step(const GaussMap& belief, const GaussMap& dynamics,
                                   const GaussMap& observe, const Eigen::VectorXd& obs,
                                   double tol = 1e-10);

}  // namespace depbayes
