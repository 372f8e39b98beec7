#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "depbayes/lens.hpp"

using namespace depbayes;

namespace {

FinObject obj(std::initializer_list<const char*> labels) {
  std::vector<std::string> v;
  for (const char* l : labels) v.emplace_back(l);
  return make_fin_object(std::move(v));
}

Eigen::MatrixXd m1(double v) {
  Eigen::MatrixXd m(1, 1);
  m << v;
  return m;
}

Eigen::VectorXd v1(double v) {
  Eigen::VectorXd x(1);
  x << v;
  return x;
}

}  // namespace

TEST_CASE("T and S of the identity have identity fibres") {
  const FinObject x = obj({"a", "b", "c"});
  Eigen::RowVectorXd p(3);
  p << 0.0, 0.4, 0.6;
  const StochMap pi = fin_state(x, p);
  const auto carrier = supportOf(pi).carrier;
  CHECK(max_abs_diff(sectionT(identity(x)).fibre_fwd(pi), identity(carrier)) ==
        0.0);
  CHECK(max_abs_diff(sectionS(identity(x)).bwd(pi), identity(carrier)) == 0.0);
}

TEST_CASE("lens composition with identity lenses is neutral") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  Eigen::MatrixXd mf(2, 3);
  mf << 0.5, 0.3, 0.2, 0.1, 0.1, 0.8;
  const StochMap f(x, y, mf);
  Eigen::RowVectorXd p(2);
  p << 0.7, 0.3;
  const StochMap pi = fin_state(x, p);

  const auto left = compose_lens(identity_lens<StochMap>(x), sectionS(f));
  const auto right = compose_lens(sectionS(f), identity_lens<StochMap>(y));
  CHECK(max_abs_diff(left.fwd, f) == 0.0);
  CHECK(max_abs_diff(right.fwd, f) == 0.0);
  CHECK(max_abs_diff(left.bwd(pi), sectionS(f).bwd(pi)) <= 1e-14);
  CHECK(max_abs_diff(right.bwd(pi), sectionS(f).bwd(pi)) <= 1e-14);
}

TEST_CASE("the backward map of S(discard) is the supported prior") {
  const FinObject x = obj({"a", "b", "c"});
  Eigen::RowVectorXd p(3);
  p << 0.5, 0.0, 0.5;
  const StochMap pi = fin_state(x, p);
  const StochMap back = sectionS(discard(x)).bwd(pi);
  // a state on the carrier {a, c} with the prior's masses
  CHECK(back.dom().is_unit);
  REQUIRE(back.cod().size() == 2);
  CHECK(back.entries()(0, 0) == doctest::Approx(0.5));
  CHECK(back.entries()(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("tensored lenses act factorwise on product priors") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v"});
  Eigen::MatrixXd mf(2, 2), mg(2, 2);
  mf << 0.6, 0.4, 0.2, 0.8;
  mg << 0.9, 0.1, 0.3, 0.7;
  const StochMap f(x, x, mf);
  const StochMap g(y, y, mg);
  Eigen::RowVectorXd px(2), py(2);
  px << 0.3, 0.7;
  py << 0.8, 0.2;
  const StochMap pi = tensor(fin_state(x, px), fin_state(y, py));

  const auto t = tensor_lens(sectionS(f), sectionS(g));
  const StochMap expected =
      tensor(sectionS(f).bwd(fin_state(x, px)), sectionS(g).bwd(fin_state(y, py)));
  CHECK(max_abs_diff(t.bwd(pi), expected) <= 1e-14);
}

TEST_CASE("tensoring S does not commute with S of the tensor on correlated priors") {
  // the joint support of a correlated state is strictly smaller than the
  // product of the marginal supports, so the two lenses type differently
  const FinObject x = obj({"a", "b"});
  const FinObject xx = tensor(x, x);
  Eigen::RowVectorXd diag(4);
  diag << 0.5, 0.0, 0.0, 0.5;  // only (a,a) and (b,b)
  const StochMap pi = fin_state(xx, diag);

  const auto tensored = tensor_lens(sectionS(identity(x)), sectionS(identity(x)));
  const auto direct = sectionS(identity(xx));
  CHECK(tensored.dom_family.at(pi).size() == 4);  // product of full supports
  CHECK(direct.dom_family.at(pi).size() == 2);    // the diagonal itself
}

TEST_CASE("a stat lens ignores the prior in its families") {
  const FinObject x = obj({"a", "b"});
  const StochMap f = identity(x);
  const auto lens = stat_lens<StochMap>(
      f, x, x, [f](const StochMap& pi) { return bayes_invert(f, pi); });
  Eigen::RowVectorXd p1(2), p2(2);
  p1 << 1.0, 0.0;
  p2 << 0.5, 0.5;
  CHECK(lens.dom_family.at(fin_state(x, p1)) == lens.dom_family.at(fin_state(x, p2)));
  // whereas the dependent S family genuinely moves with the prior
  const auto dep = sectionS(f);
  CHECK(dep.dom_family.at(fin_state(x, p1)).size() == 1);
  CHECK(dep.dom_family.at(fin_state(x, p2)).size() == 2);
}

TEST_CASE("the oplaxator of a product state with full support is the identity") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v"});
  Eigen::RowVectorXd px(2), py(2);
  px << 0.4, 0.6;
  py << 0.5, 0.5;
  const StochMap pi = tensor(fin_state(x, px), fin_state(y, py));
  CHECK(max_abs_diff(oplax_gamma(pi), identity(tensor(x, y))) <= 1e-15);
}

TEST_CASE("the oplaxator of the diagonal state embeds the diagonal") {
  const FinObject x = obj({"a", "b"});
  const FinObject xx = tensor(x, x);
  Eigen::RowVectorXd diag(4);
  diag << 0.5, 0.0, 0.0, 0.5;
  const StochMap gamma = oplax_gamma(fin_state(xx, diag), x, x);
  // carrier {(a,a), (b,b)} -> {a,b} (x) {a,b}: deterministic corners
  REQUIRE(gamma.dom().size() == 2);
  REQUIRE(gamma.cod().size() == 4);
  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 4);
  expect(0, 0) = 1.0;  // (a,a)
  expect(1, 3) = 1.0;  // (b,b)
  CHECK(max_abs_diff(gamma, StochMap(gamma.dom(), gamma.cod(), expect)) == 0.0);
}

TEST_CASE("the oplaxator collapses against the unit factor") {
  const FinObject x = obj({"a", "b", "c"});
  Eigen::RowVectorXd p(3);
  p << 0.2, 0.0, 0.8;
  const StochMap pi = fin_state(x, p);
  const StochMap gamma = oplax_gamma(pi, x, FinObject::unit());
  // X_(pi) -> X_(pi) (x) I_(unit state) is just r restricted to the carrier
  const auto sup = supportOf(pi);
  CHECK(max_abs_diff(gamma, identity(sup.carrier)) == 0.0);
}

TEST_CASE("copy inverse isomorphism on a uniform two-point state") {
  const FinObject x = obj({"a", "b"});
  Eigen::RowVectorXd p(2);
  p << 0.5, 0.5;
  const StochMap pi = fin_state(x, p);
  const auto [c_sharp, l_sharp] = copy_inverse_iso(pi);
  // carriers: the diagonal of the copied state and the full base
  REQUIRE(c_sharp.dom().size() == 2);
  REQUIRE(c_sharp.cod().size() == 2);
  CHECK(max_abs_diff(compose(c_sharp, l_sharp), identity(c_sharp.dom())) <= 1e-12);
  CHECK(max_abs_diff(compose(l_sharp, c_sharp), identity(l_sharp.dom())) <= 1e-12);
  // both directions are the evident relabelling (a,a) <-> a, (b,b) <-> b
  CHECK(c_sharp.entries()(0, 0) == doctest::Approx(1.0));
  CHECK(c_sharp.entries()(1, 1) == doctest::Approx(1.0));
}

TEST_CASE("copy inverse isomorphism on Dirac and sparse states") {
  const FinObject x = obj({"a", "b", "c"});
  {
    const auto [c_sharp, l_sharp] = copy_inverse_iso(point_state(x, 2));
    CHECK(c_sharp.dom().size() == 1);
    CHECK(max_abs_diff(compose(c_sharp, l_sharp), identity(c_sharp.dom())) <=
          1e-12);
  }
  {
    Eigen::RowVectorXd p(3);
    p << 0.9, 0.0, 0.1;
    const auto [c_sharp, l_sharp] = copy_inverse_iso(fin_state(x, p));
    CHECK(c_sharp.dom().size() == 2);
    CHECK(max_abs_diff(compose(c_sharp, l_sharp), identity(c_sharp.dom())) <=
          1e-12);
    CHECK(max_abs_diff(compose(l_sharp, c_sharp), identity(l_sharp.dom())) <=
          1e-12);
  }
}

TEST_CASE("gaussian copy inverse lives on the diagonal line") {
  const GaussObject x = make_gauss_object(1);
  const GaussMap pi = gauss_state(x, v1(0.0), m1(1.0));
  // the copied state N(0, [[1,1],[1,1]]) is supported on the diagonal,
  // embedded by the unit vector (1, 1) / sqrt(2)
  const auto sup = supportOf(compose(pi, copy_map(x)));
  REQUIRE(sup.carrier.dim == 1);
  const double s = 1.0 / std::sqrt(2.0);
  CHECK(sup.section.A()(0, 0) == doctest::Approx(s).epsilon(1e-9));
  CHECK(sup.section.A()(1, 0) == doctest::Approx(s).epsilon(1e-9));

  const auto [c_sharp, l_sharp] = copy_inverse_iso(pi);
  // analytic scalars: c_sharp scales by 1/sqrt(2), l_sharp by sqrt(2)
  CHECK(c_sharp.A()(0, 0) == doctest::Approx(s).epsilon(1e-9));
  CHECK(l_sharp.A()(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-9));
  CHECK(max_abs_diff(compose(c_sharp, l_sharp), identity(c_sharp.dom())) <= 1e-9);
  CHECK(max_abs_diff(compose(l_sharp, c_sharp), identity(l_sharp.dom())) <= 1e-9);
}

TEST_CASE("one filtering step with a perfect observation is a Dirac update") {
  const FinObject x = obj({"a", "b"});
  Eigen::RowVectorXd p(2);
  p << 0.5, 0.5;
  const auto [belief, ll] =
      filter_step(fin_state(x, p), identity(x), identity(x), 1);
  CHECK(belief.entries()(0, 0) == doctest::Approx(0.0));
  CHECK(belief.entries()(0, 1) == doctest::Approx(1.0));
  CHECK(ll == doctest::Approx(std::log(0.5)));
}

TEST_CASE("one noisy filtering step matches the hand posterior") {
  const FinObject x = obj({"a", "b"});
  Eigen::RowVectorXd p(2);
  p << 0.5, 0.5;
  Eigen::MatrixXd mo(2, 2);
  mo << 0.9, 0.1, 0.2, 0.8;
  // observe "u": posterior = (0.45, 0.1) / 0.55 = (0.9, 0.2) / 1.1
  const auto [belief, ll] =
      filter_step(fin_state(x, p), identity(x), StochMap(x, x, mo), 0);
  CHECK(belief.entries()(0, 0) == doctest::Approx(0.9 / 1.1));
  CHECK(belief.entries()(0, 1) == doctest::Approx(0.2 / 1.1));
  CHECK(ll == doctest::Approx(std::log(0.55)));
}

TEST_CASE("filtering matches the forward algorithm on random HMMs") {
  std::mt19937_64 eng(41);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  const FinObject x = obj({"s0", "s1", "s2", "s3"});
  const FinObject y = obj({"o0", "o1", "o2"});
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::MatrixXd T(4, 4), O(4, 3);
    Eigen::RowVectorXd p0(4);
    for (Eigen::Index i = 0; i < 4; ++i) {
      p0(i) = u(eng);
      for (Eigen::Index j = 0; j < 4; ++j) T(i, j) = u(eng);
      T.row(i) /= T.row(i).sum();
      for (Eigen::Index j = 0; j < 3; ++j) O(i, j) = u(eng);
      O.row(i) /= O.row(i).sum();
    }
    p0 /= p0.sum();
    std::vector<Eigen::Index> observations;
    std::uniform_int_distribution<int> pick(0, 2);
    for (int t = 0; t < 10; ++t) observations.push_back(pick(eng));

    // oracle: the classic normalised forward recursion
    Eigen::RowVectorXd alpha = p0;
    double ll_oracle = 0.0;
    StochMap belief = fin_state(x, p0);
    double ll = 0.0;
    const StochMap dyn(x, x, T);
    const StochMap obs(x, y, O);
    for (const Eigen::Index o : observations) {
      Eigen::RowVectorXd predicted = alpha * T;
      for (Eigen::Index i = 0; i < 4; ++i) predicted(i) *= O(i, o);
      const double mass = predicted.sum();
      ll_oracle += std::log(mass);
      alpha = predicted / mass;

      auto [next, step_ll] = filter_step(belief, dyn, obs, o);
      belief = std::move(next);
      ll += step_ll;
      CHECK((belief.entries().row(0) - alpha).cwiseAbs().maxCoeff() <= 1e-9);
    }
    CHECK(std::abs(ll - ll_oracle) <= 1e-9);
  }
}

TEST_CASE("gaussian filtering matches the scalar Kalman recursion") {
  std::mt19937_64 eng(43);
  std::normal_distribution<double> n(0.0, 1.0);
  const GaussObject x = make_gauss_object(1);
  const double q = 0.3, r = 0.5;
  const GaussMap dyn(x, x, m1(1.0), v1(0.0), m1(q));
  const GaussMap obs(x, x, m1(1.0), v1(0.0), m1(r));

  double m = 0.2, P = 1.0;
  GaussMap belief = gauss_state(x, v1(m), m1(P));
  double ll = 0.0, ll_oracle = 0.0;
  for (int t = 0; t < 10; ++t) {
    const double y = n(eng);
    // oracle: local-level Kalman update by hand
    const double Pp = P + q;
    const double S = Pp + r;
    const double K = Pp / S;
    ll_oracle += -0.5 * ((y - m) * (y - m) / S + std::log(S) +
                         std::log(2.0 * M_PI));
    m = m + K * (y - m);
    P = (1.0 - K) * Pp;

    auto [next, step_ll] = filter_step(belief, dyn, obs, v1(y));
    belief = std::move(next);
    ll += step_ll;
    CHECK(std::abs(belief.b()(0) - m) <= 1e-9);
    CHECK(std::abs(belief.Sigma()(0, 0) - P) <= 1e-9);
  }
  CHECK(std::abs(ll - ll_oracle) <= 1e-9);
}

TEST_CASE("an impossible observation raises UnsupportedObservation") {
  const FinObject x = obj({"a", "b"});
  Eigen::MatrixXd mo(2, 2);
  mo << 1.0, 0.0, 1.0, 0.0;  // "v" can never be seen
  Eigen::RowVectorXd p(2);
  p << 0.5, 0.5;
  CHECK_THROWS_AS(
      filter_step(fin_state(x, p), identity(x), StochMap(x, x, mo), 1),
      UnsupportedObservation);
  CHECK_THROWS_AS(
      filter_step(fin_state(x, p), identity(x), StochMap(x, x, mo), 5),
      IndexOutOfRange);
}

TEST_CASE("indexed families cache by fingerprint and tolerate dust") {
  const FinObject x = obj({"a", "b"});
  const auto family = support_family<StochMap>(x);
  Eigen::RowVectorXd p(2), p_dust(2);
  p << 0.5, 0.5;
  p_dust << 0.5 + 1e-15, 0.5 - 1e-15;
  CHECK(family.at(fin_state(x, p)).size() == 2);
  CHECK(family.at(fin_state(x, p_dust)).size() == 2);
  CHECK(family.cache_size() == 1);  // dust-level difference shares a slot
  Eigen::RowVectorXd p2(2);
  p2 << 1.0, 0.0;
  CHECK(family.at(fin_state(x, p2)).size() == 1);
  CHECK(family.cache_size() == 2);
  CHECK_THROWS_AS(family.at(fin_state(obj({"u", "v"}), p)), SignatureMismatch);
}
