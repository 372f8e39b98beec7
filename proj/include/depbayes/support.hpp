#pragma once

#include "depbayes/finstoch.hpp"
#include "depbayes/gauss.hpp"

namespace depbayes {

/// A state's support: the carrier object together with the section i
/// (inclusion into the base) and retraction r (restriction onto the carrier).
/// i ; r is the identity on the carrier; r ; i is pi-almost-surely the
/// identity on the base.
template <class M>
struct SupportObject {
  typename M::Obj base;
  M state;
  typename M::Obj carrier;
  M section;     // carrier -> base
  M retraction;  // base -> carrier
};

// FinStoch: carrier labels are those with pi(x) > tol, in domain order; the
// retraction sends every off-support label to the lowest-index supported one.
// Throws EmptySupport when nothing clears the threshold.
SupportObject<StochMap> supportOf(const StochMap& pi, double tol = 1e-12);

// Gauss: carrier dimension is the rank of the covariance at the relative
// cutoff tol; the section embeds via an orthonormal eigenbasis of its range.
SupportObject<GaussMap> supportOf(const GaussMap& pi, double tol = 1e-10);

// Ordinary Bayesian inverse in FinStoch via the joint table. Rows of the
// result at observations with pushforward mass <= tol are filled with the
// Dirac row at the lowest-index supported label of pi.
StochMap bayes_invert(const StochMap& f, const StochMap& pi, double tol = 1e-12);

// f restricted between supports: i_pi ; f ; r_{pi;f}.
template <class M>
M restrict_map(const M& f, const M& pi) {
  if (!(pi.cod() == f.dom())) {
    throw DomainMismatch("restrict_map: dom(f) is not the target of pi");
  }
  const auto sup_dom = supportOf(pi);
  const auto sup_cod = supportOf(compose(pi, f));
  return compose(compose(sup_dom.section, f), sup_cod.retraction);
}

/// Everything needed to move between ordinary inverses and inverses with
/// support for a fixed (f, pi) pair.
template <class M>
struct InversionContext {
  M pi;
  M f;
  SupportObject<M> sup_dom;  // X_pi
  SupportObject<M> sup_cod;  // Y_{pi;f}

  static InversionContext make(const M& f, const M& pi) {
    if (!(pi.cod() == f.dom())) {
      throw DomainMismatch("inversion context: dom(f) is not the target of pi");
    }
    return InversionContext{pi, f, supportOf(pi), supportOf(compose(pi, f))};
  }
};

// Psi-tilde: i_{pi;f} ; h ; r_pi, squeezing an ordinary inverse between the
// supports.
template <class M>
M to_supported(const M& ordinary, const InversionContext<M>& ctx) {
  if (!(ordinary.dom() == ctx.f.cod() && ordinary.cod() == ctx.f.dom())) {
    throw SignatureMismatch("to_supported: not an inverse-shaped morphism");
  }
  return compose(compose(ctx.sup_cod.section, ordinary), ctx.sup_dom.retraction);
}

// Psi: r_{pi;f} ; g ; i_pi, an ordinary Bayesian inverse again.
template <class M>
M to_ordinary(const M& supported, const InversionContext<M>& ctx) {
  if (!(supported.dom() == ctx.sup_cod.carrier &&
        supported.cod() == ctx.sup_dom.carrier)) {
    throw SignatureMismatch("to_ordinary: not typed between the supports");
  }
  return compose(compose(ctx.sup_cod.retraction, supported), ctx.sup_dom.section);
}

// The unique Bayesian inverse with support, Y_{pi;f} -> X_pi.
template <class M>
M bayes_invert_supported(const M& f, const M& pi) {
  const auto ctx = InversionContext<M>::make(f, pi);
  return to_supported(bayes_invert(f, pi), ctx);
}

}  // namespace depbayes
