#include "depbayes/laws.hpp"

#include <algorithm>
#include <future>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "depbayes/lens.hpp"

namespace depbayes::laws {
namespace {

// ---------------------------------------------------------------------------
// deterministic seeding

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t idx) {
  return splitmix64(splitmix64(seed) ^ splitmix64(idx * 0x9E3779B97F4A7C15ULL + 1));
}

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t s) : eng(s) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng); }
  int range(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng); }
};

struct Ctx {
  int max_dim = 6;
  double sparsity = 0.3;
  int priors = 50;
  Mutation mutation = Mutation::None;

  GaussInvertOptions gopts() const {
    return GaussInvertOptions{1e-10, mutation != Mutation::SkipGaussSymmetrize};
  }
};

// ---------------------------------------------------------------------------
// finite generators

FinObject rand_fin_object(Rng& rng, const Ctx& ctx, const std::string& prefix) {
  const int n = rng.range(2, std::max(2, ctx.max_dim));
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) labels.push_back(prefix + std::to_string(i));
  return make_fin_object(std::move(labels));
}

// Flat Dirichlet, entries zeroed with the given probability (keeping at least
// one), then renormalised.
Eigen::RowVectorXd rand_prob_row(Rng& rng, Eigen::Index n, double sparsity) {
  Eigen::RowVectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    row(i) = -std::log(1.0 - rng.uniform());
    if (rng.uniform() < sparsity) row(i) = 0.0;
  }
  if (row.sum() <= 0.0) row(rng.range(0, static_cast<int>(n) - 1)) = 1.0;
  return row / row.sum();
}

StochMap rand_stoch(Rng& rng, const FinObject& x, const FinObject& y, double sparsity) {
  Eigen::MatrixXd m(x.size(), y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    m.row(i) = rand_prob_row(rng, y.size(), sparsity);
  }
  return StochMap(x, y, std::move(m));
}

StochMap rand_fin_state(Rng& rng, const FinObject& x, double sparsity) {
  return fin_state(x, rand_prob_row(rng, x.size(), sparsity));
}

// ---------------------------------------------------------------------------
// gaussian generators

Eigen::MatrixXd rand_orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  }
  return Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
}

// Q diag(d) Q^T with d either exactly 0 (probability sparsity) or in
// [0.5, 2], so spectra stay far from the rank cutoff.
Eigen::MatrixXd rand_psd(Rng& rng, Eigen::Index n, double sparsity) {
  if (n == 0) return Eigen::MatrixXd::Zero(0, 0);
  const Eigen::MatrixXd q = rand_orthogonal(rng, n);
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = rng.uniform() < sparsity ? 0.0 : 0.5 + 1.5 * rng.uniform();
  }
  Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
  m = (0.5 * (m + m.transpose())).eval();
  return m;
}

// Well-conditioned on its row/column space: singular values in [0.5, 2] with
// exact zeros injected for rank deficiency.
Eigen::MatrixXd rand_operator(Rng& rng, Eigen::Index rows, Eigen::Index cols,
                              double sparsity) {
  const Eigen::Index k = std::min(rows, cols);
  const Eigen::MatrixXd u = rand_orthogonal(rng, rows);
  const Eigen::MatrixXd v = rand_orthogonal(rng, cols);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index i = 0; i < k; ++i) {
    d(i, i) = rng.uniform() < sparsity ? 0.0 : 0.5 + 1.5 * rng.uniform();
  }
  return u * d * v.transpose();
}

GaussObject rand_gauss_object(Rng& rng, const Ctx& ctx) {
  return make_gauss_object(rng.range(1, std::max(1, ctx.max_dim)));
}

GaussMap rand_gauss(Rng& rng, const GaussObject& x, const GaussObject& y,
                    double sparsity) {
  Eigen::VectorXd b(y.dim);
  for (Eigen::Index i = 0; i < y.dim; ++i) b(i) = rng.normal();
  return GaussMap(x, y, rand_operator(rng, y.dim, x.dim, sparsity), std::move(b),
                  rand_psd(rng, y.dim, sparsity));
}

GaussMap rand_gauss_state(Rng& rng, const GaussObject& x, double sparsity) {
  Eigen::VectorXd mu(x.dim);
  for (Eigen::Index i = 0; i < x.dim; ++i) mu(i) = rng.normal();
  return gauss_state(x, mu, rand_psd(rng, x.dim, sparsity));
}

// A gaussian object together with a fixed orthogonal frame. Morphisms built
// between framed objects keep every covariance diagonal in the frame of its
// codomain, so rank deficiency stays exact and composite chains never drift
// into near-singular conditioning.
struct Framed {
  GaussObject obj;
  Eigen::MatrixXd Q;
};

Framed rand_framed(Rng& rng, const Ctx& ctx) {
  const GaussObject obj = rand_gauss_object(rng, ctx);
  return Framed{obj, rand_orthogonal(rng, obj.dim)};
}

Eigen::VectorXd rand_spectrum(Rng& rng, Eigen::Index n, double sparsity) {
  Eigen::VectorXd d(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i) = rng.uniform() < sparsity ? 0.0 : 0.5 + 1.5 * rng.uniform();
  }
  return d;
}

GaussMap rand_gauss_aligned(Rng& rng, const Framed& x, const Framed& y,
                            double sparsity) {
  const Eigen::Index k = std::min(x.obj.dim, y.obj.dim);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(y.obj.dim, x.obj.dim);
  d.diagonal().head(k) = rand_spectrum(rng, k, sparsity);
  Eigen::VectorXd b(y.obj.dim);
  for (Eigen::Index i = 0; i < y.obj.dim; ++i) b(i) = rng.normal();
  Eigen::MatrixXd sigma =
      y.Q * rand_spectrum(rng, y.obj.dim, sparsity).asDiagonal() * y.Q.transpose();
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  return GaussMap(x.obj, y.obj, y.Q * d * x.Q.transpose(), std::move(b),
                  std::move(sigma));
}

GaussMap rand_gauss_state_aligned(Rng& rng, const Framed& x, double sparsity) {
  Eigen::VectorXd mu(x.obj.dim);
  for (Eigen::Index i = 0; i < x.obj.dim; ++i) mu(i) = rng.normal();
  Eigen::MatrixXd sigma =
      x.Q * rand_spectrum(rng, x.obj.dim, sparsity).asDiagonal() * x.Q.transpose();
  sigma = (0.5 * (sigma + sigma.transpose())).eval();
  return gauss_state(x.obj, mu, std::move(sigma));
}

// ---------------------------------------------------------------------------
// law cases: each returns the residual for one random instance

double fin_comonoid(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const StochMap id = identity(x);
  const StochMap c = copy_map(x);
  double r = 0.0;
  r = std::max(r, max_abs_diff(compose(c, tensor(c, id)), compose(c, tensor(id, c))));
  r = std::max(r, max_abs_diff(compose(c, tensor(discard(x), id)), id));
  r = std::max(r, max_abs_diff(compose(c, tensor(id, discard(x))), id));
  r = std::max(r, max_abs_diff(compose(c, swap_map(x, x)), c));
  r = std::max(r, max_abs_diff(compose(swap_map(x, y), swap_map(y, x)),
                               identity(tensor(x, y))));
  return r;
}

double gauss_comonoid(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const GaussObject y = rand_gauss_object(rng, ctx);
  const GaussMap id = identity(x);
  const GaussMap c = copy_map(x);
  double r = 0.0;
  r = std::max(r, max_abs_diff(compose(c, tensor(c, id)), compose(c, tensor(id, c))));
  r = std::max(r, max_abs_diff(compose(c, tensor(discard(x), id)), id));
  r = std::max(r, max_abs_diff(compose(c, tensor(id, discard(x))), id));
  r = std::max(r, max_abs_diff(compose(c, swap_map(x, x)), c));
  r = std::max(r, max_abs_diff(compose(swap_map(x, y), swap_map(y, x)),
                               identity(tensor(x, y))));
  return r;
}

double fin_bayes_joint(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap fd = bayes_invert(f, pi);
  const StochMap lhs = compose(compose(pi, copy_map(x)), tensor(identity(x), f));
  const StochMap rhs =
      compose(compose(compose(pi, f), copy_map(y)), tensor(fd, identity(y)));
  return max_abs_diff(lhs, rhs);
}

double gauss_bayes_joint(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const GaussMap pi = rand_gauss_state_aligned(rng, x, ctx.sparsity);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap fd = bayes_invert(f, pi, ctx.gopts());
  const GaussMap lhs =
      compose(compose(pi, copy_map(x.obj)), tensor(identity(x.obj), f));
  const GaussMap rhs = compose(compose(compose(pi, f), copy_map(y.obj)),
                               tensor(fd, identity(y.obj)));
  double r = max_abs_diff(lhs, rhs);
  // The posterior covariance contract is exact: (S + S^T)/2 is bitwise
  // symmetric, so any defect is a structural violation, not rounding, and is
  // scored as a full failure. (The joint diagram alone cannot see a skipped
  // symmetrization: Sigma-dagger is symmetric in exact arithmetic, so the
  // float defect sits far below the diagram tolerance.)
  const double asym =
      (fd.Sigma() - fd.Sigma().transpose()).cwiseAbs().maxCoeff();
  if (asym > 0.0) r = std::max(r, std::max(asym, 1.0));
  return r;
}

// Replace every convention-filled row of the ordinary inverse; the supported
// inverse must not notice.
double fin_inverse_uniqueness(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap h = bayes_invert(f, pi);
  const Eigen::RowVectorXd q = (pi.entries() * f.entries()).row(0);
  Eigen::MatrixXd perturbed = h.entries();
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q(j) <= 1e-12) perturbed.row(j) = rand_prob_row(rng, x.size(), 0.0);
  }
  const auto ctx_inv = InversionContext<StochMap>::make(f, pi);
  return max_abs_diff(to_supported(h, ctx_inv),
                      to_supported(StochMap(y, x, perturbed), ctx_inv));
}

GaussMap perturb_off_support(Rng& rng, const GaussMap& h, const GaussMap& q) {
  const auto sup = supportOf(q);
  const Eigen::MatrixXd e = sup.section.A();
  const Eigen::MatrixXd off = Eigen::MatrixXd::Identity(e.rows(), e.rows()) -
                              e * e.transpose();
  Eigen::MatrixXd r(h.A().rows(), h.A().cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) r(i, j) = rng.normal();
  }
  const Eigen::MatrixXd delta = r * off;
  return GaussMap(h.dom(), h.cod(), h.A() + delta, h.b() - delta * q.b(), h.Sigma());
}

double gauss_inverse_uniqueness(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const GaussMap pi = rand_gauss_state_aligned(rng, x, ctx.sparsity);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap h = bayes_invert(f, pi, ctx.gopts());
  const GaussMap h2 = perturb_off_support(rng, h, compose(pi, f));
  const auto ctx_inv = InversionContext<GaussMap>::make(f, pi);
  return max_abs_diff(to_supported(h, ctx_inv), to_supported(h2, ctx_inv));
}

double fin_bijection_psi(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap q = compose(pi, f);
  const auto ctx_inv = InversionContext<StochMap>::make(f, pi);
  const StochMap g = to_supported(bayes_invert(f, pi), ctx_inv);
  // Psi-tilde o Psi is the identity on supported inverses, exactly.
  double r = max_abs_diff(to_supported(to_ordinary(g, ctx_inv), ctx_inv), g);
  // Psi o Psi-tilde only returns the ordinary inverse up to (pi;f)-a.s. equality.
  StochMap h = bayes_invert(f, pi);
  Eigen::MatrixXd perturbed = h.entries();
  for (Eigen::Index j = 0; j < q.entries().cols(); ++j) {
    if (q.entries()(0, j) <= 1e-12) perturbed.row(j) = rand_prob_row(rng, x.size(), 0.0);
  }
  const StochMap h2(y, x, perturbed);
  r = std::max(r, as_residual(to_ordinary(to_supported(h2, ctx_inv), ctx_inv), h2, q));
  return r;
}

double gauss_bijection_psi(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const GaussMap pi = rand_gauss_state_aligned(rng, x, ctx.sparsity);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap q = compose(pi, f);
  const auto ctx_inv = InversionContext<GaussMap>::make(f, pi);
  const GaussMap g = to_supported(bayes_invert(f, pi, ctx.gopts()), ctx_inv);
  double r = max_abs_diff(to_supported(to_ordinary(g, ctx_inv), ctx_inv), g);
  const GaussMap h2 = perturb_off_support(rng, bayes_invert(f, pi, ctx.gopts()), q);
  r = std::max(r, as_residual(to_ordinary(to_supported(h2, ctx_inv), ctx_inv), h2, q));
  return r;
}

double fin_support_representability(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  const auto sup = supportOf(pi);
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);

  const bool want_agree = rng.uniform() < 0.5;
  Eigen::MatrixXd gm = f.entries();
  if (want_agree) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (pi.entries()(0, i) <= 1e-12) gm.row(i) = rand_prob_row(rng, y.size(), 0.0);
    }
  } else {
    Eigen::Index x0 = 0;
    while (pi.entries()(0, x0) <= 1e-12) ++x0;
    Eigen::Index jmin = 0;
    f.entries().row(x0).minCoeff(&jmin);
    gm.row(x0).setZero();
    gm(x0, jmin) = 1.0;  // differs from f's row by at least 1/2
  }
  const StochMap g(x, y, gm);

  // independent oracle: supported rows compared directly
  bool agree_oracle = true;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (pi.entries()(0, i) > 1e-12 &&
        (f.entries().row(i) - g.entries().row(i)).cwiseAbs().maxCoeff() > 0.0) {
      agree_oracle = false;
    }
  }
  const bool ae = as_equal(f, g, pi, 1e-9);
  const bool rep =
      max_abs_diff(compose(sup.section, f), compose(sup.section, g)) <= 1e-9;
  return (ae == agree_oracle && rep == agree_oracle) ? 0.0 : 1.0;
}

double gauss_support_representability(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const GaussObject y = rand_gauss_object(rng, ctx);
  const GaussMap pi = rand_gauss_state(rng, x, ctx.sparsity);
  const GaussMap f = rand_gauss(rng, x, y, ctx.sparsity);

  const bool want_agree = rng.uniform() < 0.5;
  GaussMap g = f;
  if (want_agree) {
    g = perturb_off_support(rng, f, pi);
  } else {
    Eigen::VectorXd d(y.dim);
    for (Eigen::Index i = 0; i < y.dim; ++i) d(i) = rng.normal();
    d = d * ((0.5 + rng.uniform()) / std::max(d.norm(), 1e-12));
    g = GaussMap(x, y, f.A(), f.b() + d, f.Sigma());
  }

  // independent oracle: the almost-equality diagram through copy
  const GaussMap lhs = compose(compose(pi, copy_map(x)), tensor(identity(x), f));
  const GaussMap rhs = compose(compose(pi, copy_map(x)), tensor(identity(x), g));
  const bool diagram_agree = max_abs_diff(lhs, rhs) <= 1e-8;
  const bool ae = as_equal(f, g, pi, 1e-8);
  return (ae == diagram_agree && diagram_agree == want_agree) ? 0.0 : 1.0;
}

template <class M>
double section_retraction_residual(const M& pi) {
  const auto sup = supportOf(pi);
  double r = max_abs_diff(compose(sup.section, sup.retraction), identity(sup.carrier));
  r = std::max(r, as_residual(compose(sup.retraction, sup.section),
                              identity(pi.cod()), pi));
  return r;
}

double fin_section_retraction(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  return section_retraction_residual(rand_fin_state(rng, x, ctx.sparsity));
}

double gauss_section_retraction(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  return section_retraction_residual(rand_gauss_state(rng, x, ctx.sparsity));
}

template <class M>
double restrict_functorial_residual(const M& f, const M& g, const M& pi) {
  const M lhs = compose(restrict_map(f, pi), restrict_map(g, compose(pi, f)));
  const M rhs = restrict_map(compose(f, g), pi);
  return max_abs_diff(lhs, rhs);
}

double fin_restrict_functorial(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  return restrict_functorial_residual(rand_stoch(rng, x, y, ctx.sparsity),
                                      rand_stoch(rng, y, z, ctx.sparsity),
                                      rand_fin_state(rng, x, ctx.sparsity));
}

double gauss_restrict_functorial(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const Framed z = rand_framed(rng, ctx);
  return restrict_functorial_residual(
      rand_gauss_aligned(rng, x, y, ctx.sparsity),
      rand_gauss_aligned(rng, y, z, ctx.sparsity),
      rand_gauss_state_aligned(rng, x, ctx.sparsity));
}

template <class M, class StateGen>
double section_s_residual(const M& f, const M& g, StateGen&& next_state, int priors) {
  const auto composite = compose_lens(sectionS(f), sectionS(g));
  const auto direct = sectionS(compose(f, g));
  double r = max_abs_diff(composite.fwd, direct.fwd);
  for (int i = 0; i < priors; ++i) {
    const M pi = next_state();
    r = std::max(r, max_abs_diff(composite.bwd(pi), direct.bwd(pi)));
  }
  return r;
}

double fin_s_functorial(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap g = rand_stoch(rng, y, z, ctx.sparsity);
  return section_s_residual(
      f, g, [&] { return rand_fin_state(rng, x, ctx.sparsity); }, ctx.priors);
}

double gauss_s_functorial(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const Framed z = rand_framed(rng, ctx);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap g = rand_gauss_aligned(rng, y, z, ctx.sparsity);
  return section_s_residual(
      f, g, [&] { return rand_gauss_state_aligned(rng, x, ctx.sparsity); },
      ctx.priors);
}

template <class M, class StateGen>
double section_t_residual(const M& f, const M& g, StateGen&& next_state, int priors) {
  const auto composite = compose_chart(sectionT(f), sectionT(g));
  const auto direct = sectionT(compose(f, g));
  double r = max_abs_diff(composite.fwd, direct.fwd);
  for (int i = 0; i < priors; ++i) {
    const M pi = next_state();
    r = std::max(r, max_abs_diff(composite.fibre_fwd(pi), direct.fibre_fwd(pi)));
  }
  return r;
}

double fin_t_functorial(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap g = rand_stoch(rng, y, z, ctx.sparsity);
  return section_t_residual(
      f, g, [&] { return rand_fin_state(rng, x, ctx.sparsity); }, ctx.priors);
}

double gauss_t_functorial(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const Framed z = rand_framed(rng, ctx);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap g = rand_gauss_aligned(rng, y, z, ctx.sparsity);
  return section_t_residual(
      f, g, [&] { return rand_gauss_state_aligned(rng, x, ctx.sparsity); },
      ctx.priors);
}

template <class M>
double gamma_natural_residual(const M& f, const M& g, const M& pi) {
  const auto [pl, pr] = marginals(pi);
  const M lhs = compose(oplax_gamma(pi),
                        tensor(restrict_map(f, pl), restrict_map(g, pr)));
  const M pushed = compose(pi, tensor(f, g));
  const M rhs = compose(restrict_map(tensor(f, g), pi), oplax_gamma(pushed));
  return max_abs_diff(lhs, rhs);
}

double fin_gamma_natural(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject x2 = rand_fin_object(rng, ctx, "c");
  const FinObject y2 = rand_fin_object(rng, ctx, "d");
  return gamma_natural_residual(rand_stoch(rng, x, x2, ctx.sparsity),
                                rand_stoch(rng, y, y2, ctx.sparsity),
                                rand_fin_state(rng, tensor(x, y), ctx.sparsity));
}

double gauss_gamma_natural(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const GaussObject y = rand_gauss_object(rng, ctx);
  const GaussObject x2 = rand_gauss_object(rng, ctx);
  const GaussObject y2 = rand_gauss_object(rng, ctx);
  return gamma_natural_residual(rand_gauss(rng, x, x2, ctx.sparsity),
                                rand_gauss(rng, y, y2, ctx.sparsity),
                                rand_gauss_state(rng, tensor(x, y), ctx.sparsity));
}

template <class M, class Obj>
double gamma_assoc_residual(const Obj& x, const Obj& y, const Obj& z, const M& pi,
                            const M& pi_reassoc) {
  const auto yz = tensor(y, z);
  const auto xy = tensor(x, y);
  const auto [pl, pr] = marginals(pi, xy, z);
  const M path1 = compose(oplax_gamma(pi, xy, z),
                          tensor(oplax_gamma(pl, x, y),
                                 identity(supportOf(pr).carrier)));
  const auto [pl2, pr2] = marginals(pi_reassoc, x, yz);
  // the associator leg: with a strict tensor this is i ; r between the two
  // presentations of the same support
  const M alpha_edge = compose(supportOf(pi).section, supportOf(pi_reassoc).retraction);
  const M path2 = compose(compose(alpha_edge, oplax_gamma(pi_reassoc, x, yz)),
                          tensor(identity(supportOf(pl2).carrier),
                                 oplax_gamma(pr2, y, z)));
  return max_abs_diff(path1, path2);
}

double fin_gamma_assoc(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  const StochMap pi = rand_fin_state(rng, tensor(tensor(x, y), z), ctx.sparsity);
  const StochMap pi_reassoc =
      fin_state(tensor(x, tensor(y, z)), pi.entries().row(0));
  return gamma_assoc_residual(x, y, z, pi, pi_reassoc);
}

double gauss_gamma_assoc(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const GaussObject y = rand_gauss_object(rng, ctx);
  const GaussObject z = rand_gauss_object(rng, ctx);
  const GaussMap pi = rand_gauss_state(rng, tensor(tensor(x, y), z), ctx.sparsity);
  const GaussMap pi_reassoc =
      gauss_state(tensor(x, tensor(y, z)), pi.b(), pi.Sigma());
  return gamma_assoc_residual(x, y, z, pi, pi_reassoc);
}

template <class M, class Obj>
double gamma_unitor_residual(const Obj& x, const M& pi) {
  const auto sup = supportOf(pi);
  const auto unit = Obj::unit();
  // left unitor: gamma_{I,X} against i ; lambda ; r with lambda strict
  const M gamma_left = oplax_gamma(pi, unit, x);
  double r = max_abs_diff(gamma_left, compose(sup.section, sup.retraction));
  r = std::max(r, max_abs_diff(gamma_left, identity(sup.carrier)));
  // right unitor
  const M gamma_right = oplax_gamma(pi, x, unit);
  r = std::max(r, max_abs_diff(gamma_right, identity(sup.carrier)));
  return r;
}

double fin_gamma_unitor(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  return gamma_unitor_residual(x, rand_fin_state(rng, x, ctx.sparsity));
}

double gauss_gamma_unitor(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  return gamma_unitor_residual(x, rand_gauss_state(rng, x, ctx.sparsity));
}

template <class M>
double copy_inverse_residual(const M& pi) {
  const auto x = pi.cod();
  const M c = copy_map(x);
  const M l = tensor(identity(x), discard(x));
  const M pi_c = compose(pi, c);
  const auto [c_sharp, l_sharp] = copy_inverse_iso(pi);
  double r = max_abs_diff(compose(l_sharp, c_sharp), identity(supportOf(pi).carrier));
  r = std::max(r, max_abs_diff(compose(c_sharp, l_sharp),
                               identity(supportOf(pi_c).carrier)));
  // lemma used inside the proof: L ; C is (pi;C)-a.s. the identity
  r = std::max(r, as_residual(compose(l, c), identity(pi_c.cod()), pi_c));
  return r;
}

double fin_copy_inverse(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const int kind = rng.range(0, 2);
  StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  if (kind == 1) {
    pi = fin_state(x, Eigen::RowVectorXd::Constant(x.size(), 1.0 / double(x.size())));
  } else if (kind == 2) {
    pi = point_state(x, rng.range(0, static_cast<int>(x.size()) - 1));
  }
  return copy_inverse_residual(pi);
}

double gauss_copy_inverse(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const int kind = rng.range(0, 2);
  GaussMap pi = rand_gauss_state(rng, x, kind == 1 ? 0.0 : ctx.sparsity);
  if (kind == 2) {
    Eigen::VectorXd mu(x.dim);
    for (Eigen::Index i = 0; i < x.dim; ++i) mu(i) = rng.normal();
    pi = gauss_state(x, mu, Eigen::MatrixXd::Zero(x.dim, x.dim));  // Dirac
  }
  return copy_inverse_residual(pi);
}

template <class M>
double marginal_natural_residual(const M& f, const M& g, const M& pi) {
  const auto [pl, pr] = marginals(pi);
  const M pushed = compose(pi, tensor(f, g));
  const auto [ql, qr] = marginals(pushed);
  return std::max(max_abs_diff(ql, compose(pl, f)), max_abs_diff(qr, compose(pr, g)));
}

double fin_marginal_natural(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject x2 = rand_fin_object(rng, ctx, "c");
  const FinObject y2 = rand_fin_object(rng, ctx, "d");
  return marginal_natural_residual(rand_stoch(rng, x, x2, ctx.sparsity),
                                   rand_stoch(rng, y, y2, ctx.sparsity),
                                   rand_fin_state(rng, tensor(x, y), ctx.sparsity));
}

double gauss_marginal_natural(Rng& rng, const Ctx& ctx) {
  const GaussObject x = rand_gauss_object(rng, ctx);
  const GaussObject y = rand_gauss_object(rng, ctx);
  const GaussObject x2 = rand_gauss_object(rng, ctx);
  const GaussObject y2 = rand_gauss_object(rng, ctx);
  return marginal_natural_residual(rand_gauss(rng, x, x2, ctx.sparsity),
                                   rand_gauss(rng, y, y2, ctx.sparsity),
                                   rand_gauss_state(rng, tensor(x, y), ctx.sparsity));
}

template <class M, class StateGen>
double lens_assoc_residual(const M& f, const M& g, const M& h, StateGen&& next_state,
                           int priors) {
  const auto l1 = sectionS(f);
  const auto l2 = sectionS(g);
  const auto l3 = sectionS(h);
  const auto left = compose_lens(compose_lens(l1, l2), l3);
  const auto right = compose_lens(l1, compose_lens(l2, l3));
  double r = max_abs_diff(left.fwd, right.fwd);
  for (int i = 0; i < priors; ++i) {
    const M pi = next_state();
    r = std::max(r, max_abs_diff(left.bwd(pi), right.bwd(pi)));
  }
  return r;
}

double fin_lens_assoc(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  const FinObject w = rand_fin_object(rng, ctx, "d");
  return lens_assoc_residual(
      rand_stoch(rng, x, y, ctx.sparsity), rand_stoch(rng, y, z, ctx.sparsity),
      rand_stoch(rng, z, w, ctx.sparsity),
      [&] { return rand_fin_state(rng, x, ctx.sparsity); }, std::min(ctx.priors, 10));
}

double gauss_lens_assoc(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const Framed z = rand_framed(rng, ctx);
  const Framed w = rand_framed(rng, ctx);
  return lens_assoc_residual(
      rand_gauss_aligned(rng, x, y, ctx.sparsity),
      rand_gauss_aligned(rng, y, z, ctx.sparsity),
      rand_gauss_aligned(rng, z, w, ctx.sparsity),
      [&] { return rand_gauss_state_aligned(rng, x, ctx.sparsity); },
      std::min(ctx.priors, 10));
}

// forward direction only: u =_{pi;f} v implies f;u =_pi f;v
double fin_base_change(Rng& rng, const Ctx& ctx) {
  const FinObject x = rand_fin_object(rng, ctx, "a");
  const FinObject y = rand_fin_object(rng, ctx, "b");
  const FinObject z = rand_fin_object(rng, ctx, "c");
  const StochMap pi = rand_fin_state(rng, x, ctx.sparsity);
  const StochMap f = rand_stoch(rng, x, y, ctx.sparsity);
  const StochMap q = compose(pi, f);
  const StochMap u = rand_stoch(rng, y, z, ctx.sparsity);
  Eigen::MatrixXd vm = u.entries();
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    if (q.entries()(0, j) <= 1e-12) vm.row(j) = rand_prob_row(rng, z.size(), 0.0);
  }
  const StochMap v(y, z, vm);
  double r = as_residual(u, v, q);  // premise, ~0 by construction
  r = std::max(r, as_residual(compose(f, u), compose(f, v), pi));
  return r;
}

double gauss_base_change(Rng& rng, const Ctx& ctx) {
  const Framed x = rand_framed(rng, ctx);
  const Framed y = rand_framed(rng, ctx);
  const Framed z = rand_framed(rng, ctx);
  const GaussMap pi = rand_gauss_state_aligned(rng, x, ctx.sparsity);
  const GaussMap f = rand_gauss_aligned(rng, x, y, ctx.sparsity);
  const GaussMap q = compose(pi, f);
  const GaussMap u = rand_gauss_aligned(rng, y, z, ctx.sparsity);
  const GaussMap v = perturb_off_support(rng, u, q);
  double r = as_residual(u, v, q);
  r = std::max(r, as_residual(compose(f, u), compose(f, v), pi));
  return r;
}

// ---------------------------------------------------------------------------
// registry and runner

using CaseFn = double (*)(Rng&, const Ctx&);

struct LawDef {
  CaseFn fin;
  CaseFn gauss;
  double fin_tol;
  double gauss_tol;
};

const std::map<std::string, LawDef>& registry() {
  static const std::map<std::string, LawDef> reg = {
      {"comonoid", {fin_comonoid, gauss_comonoid, 0.0, 0.0}},
      {"bayes-joint", {fin_bayes_joint, gauss_bayes_joint, 1e-9, 1e-8}},
      {"inverse-uniqueness",
       {fin_inverse_uniqueness, gauss_inverse_uniqueness, 1e-9, 1e-8}},
      {"bijection-psi", {fin_bijection_psi, gauss_bijection_psi, 1e-9, 1e-8}},
      {"support-representability",
       {fin_support_representability, gauss_support_representability, 1e-9, 1e-8}},
      {"section-retraction",
       {fin_section_retraction, gauss_section_retraction, 1e-9, 1e-8}},
      {"restrict-functorial",
       {fin_restrict_functorial, gauss_restrict_functorial, 1e-9, 1e-8}},
      {"S-functorial", {fin_s_functorial, gauss_s_functorial, 1e-9, 1e-8}},
      {"T-functorial", {fin_t_functorial, gauss_t_functorial, 1e-9, 1e-8}},
      {"gamma-natural", {fin_gamma_natural, gauss_gamma_natural, 1e-9, 1e-8}},
      {"gamma-assoc", {fin_gamma_assoc, gauss_gamma_assoc, 1e-9, 1e-8}},
      {"gamma-unitor", {fin_gamma_unitor, gauss_gamma_unitor, 1e-9, 1e-8}},
      {"copy-inverse", {fin_copy_inverse, gauss_copy_inverse, 1e-9, 1e-8}},
      {"marginal-natural",
       {fin_marginal_natural, gauss_marginal_natural, 1e-9, 1e-8}},
      {"lens-assoc", {fin_lens_assoc, gauss_lens_assoc, 1e-9, 1e-8}},
      {"as-equal-base-change-forward",
       {fin_base_change, gauss_base_change, 1e-9, 1e-8}},
  };
  return reg;
}

LawReport run_instance(const std::string& name, CaseFn fn, bool gaussian,
                       const CaseGen& gen, double tol, Mutation mutation) {
  LawReport report;
  report.law = name;
  report.instance = gaussian ? "gaussian" : "finite";
  report.cases_run = gen.cases;
  report.tolerance = tol;

  const Ctx ctx{gen.max_dim, gen.sparsity, gen.priors_per_case, mutation};
  std::vector<double> residuals(static_cast<std::size_t>(gen.cases), 0.0);

  const unsigned workers =
      std::max(1u, std::min(std::thread::hardware_concurrency(),
                            static_cast<unsigned>(gen.cases)));
  std::vector<std::future<void>> futures;
  for (unsigned w = 0; w < workers; ++w) {
    futures.push_back(std::async(std::launch::async, [&, w] {
      for (int i = static_cast<int>(w); i < gen.cases; i += static_cast<int>(workers)) {
        Rng rng(mix(gen.seed, static_cast<std::uint64_t>(i) * 2 + (gaussian ? 1 : 0)));
        try {
          residuals[static_cast<std::size_t>(i)] = fn(rng, ctx);
        } catch (const Error&) {
          // an operation rejected its own output: count as a failing case
          residuals[static_cast<std::size_t>(i)] =
              std::numeric_limits<double>::infinity();
        }
      }
    }));
  }
  for (auto& f : futures) f.get();

  for (int i = 0; i < gen.cases; ++i) {
    const double r = residuals[static_cast<std::size_t>(i)];
    report.max_residual = std::max(report.max_residual, r);
    if (r > tol) report.failures.push_back({i, r});
  }

  // shrink: look for the smallest failing dimension, up to 100 extra runs
  if (!report.failures.empty()) {
    int attempts = 0;
    for (int dim = 2; dim <= gen.max_dim && attempts < 100; ++dim) {
      Ctx small = ctx;
      small.max_dim = dim;
      bool found = false;
      for (int a = 0; a < 25 && attempts < 100; ++a, ++attempts) {
        const std::uint64_t s = mix(gen.seed, 0xABCD0000ULL + dim * 1000 + a);
        Rng rng(s);
        double r = 0.0;
        try {
          r = fn(rng, small);
        } catch (const Error&) {
          r = std::numeric_limits<double>::infinity();
        }
        if (r > tol) {
          report.shrunk = ShrunkCase{dim, s, r};
          found = true;
          break;
        }
      }
      if (found) break;
    }
  }
  return report;
}

}  // namespace

const std::vector<std::string>& law_catalogue() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, def] : registry()) v.push_back(name);
    return v;
  }();
  return names;
}

std::vector<LawReport> run_law(const std::string& name, const CaseGen& gen,
                               std::optional<double> tol_override,
                               Mutation mutation) {
  const auto it = registry().find(name);
  if (it == registry().end()) {
    throw UnknownLaw("no law named '" + name + "' in the catalogue");
  }
  const LawDef& def = it->second;
  std::vector<LawReport> reports;
  if (gen.instances != Instance::Gaussian) {
    reports.push_back(run_instance(name, def.fin, false, gen,
                                   tol_override.value_or(def.fin_tol), mutation));
  }
  if (gen.instances != Instance::Finite) {
    reports.push_back(run_instance(name, def.gauss, true, gen,
                                   tol_override.value_or(def.gauss_tol), mutation));
  }
  return reports;
}

std::vector<LawReport> run_all(const CaseGen& gen, Mutation mutation) {
  std::vector<LawReport> all;
  for (const auto& name : law_catalogue()) {
    auto reports = run_law(name, gen, {}, mutation);
    all.insert(all.end(), reports.begin(), reports.end());
  }
  return all;
}

bool all_passed(const std::vector<LawReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const LawReport& r) { return r.passed(); });
}

nlohmann::json report_to_json(const LawReport& report) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"case_index", f.case_index}, {"residual", f.residual}});
  }
  nlohmann::json j = {
      {"law", report.law},           {"instance", report.instance},
      {"cases_run", report.cases_run}, {"tolerance", report.tolerance},
      {"max_residual", report.max_residual}, {"passed", report.passed()},
      {"failures", failures},
  };
  if (report.shrunk) {
    j["shrunk"] = {{"max_dim", report.shrunk->max_dim},
                   {"seed", report.shrunk->seed},
                   {"residual", report.shrunk->residual}};
  }
  return j;
}

}  // namespace depbayes::laws
