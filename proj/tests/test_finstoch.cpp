#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "depbayes/finstoch.hpp"

using namespace depbayes;

namespace {

FinObject obj(std::initializer_list<const char*> labels) {
  std::vector<std::string> v;
  for (const char* l : labels) v.emplace_back(l);
  return make_fin_object(std::move(v));
}

// Independent oracle: (pi ; f)(y) = sum_x pi(x) f(x, y) by explicit loops.
Eigen::RowVectorXd push_oracle(const Eigen::RowVectorXd& pi,
                               const Eigen::MatrixXd& f) {
  Eigen::RowVectorXd out = Eigen::RowVectorXd::Zero(f.cols());
  for (Eigen::Index y = 0; y < f.cols(); ++y) {
    for (Eigen::Index x = 0; x < pi.size(); ++x) out(y) += pi(x) * f(x, y);
  }
  return out;
}

StochMap random_stoch(std::mt19937_64& eng, const FinObject& x,
                      const FinObject& y) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::MatrixXd m(x.size(), y.size());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = u(eng);
    m.row(i) /= m.row(i).sum();
  }
  return StochMap(x, y, std::move(m));
}

}  // namespace

TEST_CASE("pushforward matches hand summation") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v"});
  Eigen::RowVectorXd p(2);
  p << 0.25, 0.75;
  Eigen::MatrixXd m(2, 2);
  m << 0.8, 0.2, 0.4, 0.6;
  const StochMap pushed = compose(fin_state(x, p), StochMap(x, y, m));
  // 0.25 * 0.8 + 0.75 * 0.4 = 0.5 and 0.25 * 0.2 + 0.75 * 0.6 = 0.5
  CHECK(pushed.entries()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pushed.entries()(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK((pushed.entries().row(0) - push_oracle(p, m)).cwiseAbs().maxCoeff() <=
        1e-15);
}

TEST_CASE("identity and permutation compose as expected") {
  const FinObject x = obj({"a", "b", "c"});
  const StochMap id = identity(x);
  const StochMap cycle = deterministic(x, x, [](Eigen::Index i) {
    return (i + 1) % 3;
  });
  CHECK(max_abs_diff(compose(id, cycle), cycle) == 0.0);
  CHECK(max_abs_diff(compose(cycle, id), cycle) == 0.0);
  const StochMap thrice = compose(compose(cycle, cycle), cycle);
  CHECK(max_abs_diff(thrice, id) == 0.0);
}

TEST_CASE("random composition matches the summation oracle") {
  std::mt19937_64 eng(7);
  const FinObject x = obj({"a", "b", "c"});
  const FinObject y = obj({"u", "v"});
  const FinObject z = obj({"p", "q", "r", "s"});
  for (int rep = 0; rep < 20; ++rep) {
    const StochMap f = random_stoch(eng, x, y);
    const StochMap g = random_stoch(eng, y, z);
    const StochMap fg = compose(f, g);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const Eigen::RowVectorXd expect =
          push_oracle(f.entries().row(i), g.entries());
      CHECK((fg.entries().row(i) - expect).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("tensor of identities is the identity on the product") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  const StochMap t = tensor(identity(x), identity(y));
  CHECK(t.dom().size() == 6);
  CHECK(max_abs_diff(t, identity(tensor(x, y))) == 0.0);
  CHECK(tensor(x, y).labels[0] == "a,u");
  CHECK(tensor(x, y).labels[5] == "b,w");
}

TEST_CASE("tensor is strict: the unit is absorbed") {
  const FinObject x = obj({"a", "b"});
  CHECK(tensor(x, FinObject::unit()) == x);
  CHECK(tensor(FinObject::unit(), x) == x);
  const FinObject y = obj({"u"});
  const FinObject z = obj({"p", "q"});
  CHECK(tensor(tensor(x, y), z) == tensor(x, tensor(y, z)));
}

TEST_CASE("tensor of point states is the point state of the pair") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  const StochMap p = tensor(point_state(x, 1), point_state(y, 2));
  // row-major pairing: (b, w) sits at index 1 * 3 + 2 = 5
  CHECK(max_abs_diff(p, point_state(tensor(x, y), 5)) == 0.0);
}

TEST_CASE("marginals recover the factors of a product state") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  Eigen::RowVectorXd px(2), py(3);
  px << 0.3, 0.7;
  py << 0.2, 0.5, 0.3;
  const StochMap joint = tensor(fin_state(x, px), fin_state(y, py));
  const auto [ml, mr] = marginals(joint);
  CHECK(max_abs_diff(ml, fin_state(x, px)) <= 1e-15);
  CHECK(max_abs_diff(mr, fin_state(y, py)) <= 1e-15);
  // explicit split works too
  const auto [el, er] = marginals(joint, x, y);
  CHECK(max_abs_diff(el, ml) == 0.0);
  CHECK(max_abs_diff(er, mr) == 0.0);
}

TEST_CASE("comonoid structure behaves on states") {
  const FinObject x = obj({"a", "b", "c"});
  Eigen::RowVectorXd p(3);
  p << 0.5, 0.2, 0.3;
  const StochMap pi = fin_state(x, p);
  // copy then discard either leg gives the state back
  const StochMap left =
      compose(compose(pi, copy_map(x)), tensor(identity(x), discard(x)));
  const StochMap right =
      compose(compose(pi, copy_map(x)), tensor(discard(x), identity(x)));
  CHECK(max_abs_diff(left, pi) == 0.0);
  CHECK(max_abs_diff(right, pi) == 0.0);
  // the copy of a state puts all mass on the diagonal
  const StochMap copied = compose(pi, copy_map(x));
  for (Eigen::Index i = 0; i < 3; ++i) {
    CHECK(copied.entries()(0, i * 3 + i) == doctest::Approx(p(i)));
  }
}

TEST_CASE("swap braids tensors of states") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  Eigen::RowVectorXd px(2), py(3);
  px << 0.4, 0.6;
  py << 0.1, 0.2, 0.7;
  const StochMap pair = tensor(fin_state(x, px), fin_state(y, py));
  const StochMap swapped = compose(pair, swap_map(x, y));
  CHECK(max_abs_diff(swapped, tensor(fin_state(y, py), fin_state(x, px))) <=
        1e-15);
}

TEST_CASE("long composite chains stay stochastic") {
  std::mt19937_64 eng(11);
  const FinObject x = obj({"a", "b", "c", "d"});
  StochMap chain = identity(x);
  for (int i = 0; i < 20; ++i) chain = compose(chain, random_stoch(eng, x, x));
  CHECK_NOTHROW(validate_stochastic(chain, 1e-8));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    CHECK(std::abs(chain.entries().row(i).sum() - 1.0) <= 1e-8);
  }
}

TEST_CASE("almost-sure equality matches the brute-force row oracle") {
  const FinObject x = obj({"a", "b", "c"});
  const FinObject y = obj({"u", "v"});
  Eigen::RowVectorXd p(3);
  p << 0.5, 0.0, 0.5;  // b carries no mass
  const StochMap pi = fin_state(x, p);
  Eigen::MatrixXd mf(3, 2), mg(3, 2);
  mf << 0.3, 0.7, 0.9, 0.1, 0.6, 0.4;
  mg = mf;
  mg.row(1) << 0.2, 0.8;  // differ only on the null row
  const StochMap f(x, y, mf);
  const StochMap g(x, y, mg);

  // oracle: compare rows at supported labels only
  double oracle = 0.0;
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (p(i) > 0.0) {
      oracle = std::max(oracle, (mf.row(i) - mg.row(i)).cwiseAbs().maxCoeff());
    }
  }
  CHECK(oracle == 0.0);
  CHECK(as_equal(f, g, pi, 1e-12));
  CHECK(as_residual(f, g, pi) == 0.0);

  // a disagreement on a supported row is seen by both
  mg.row(0) << 0.2, 0.8;
  const StochMap h(x, y, mg);
  CHECK_FALSE(as_equal(f, h, pi, 1e-3));
  CHECK(as_residual(f, h, pi) == doctest::Approx(0.5 * 0.1));
}

TEST_CASE("construction rejects malformed data") {
  CHECK_THROWS_AS(make_fin_object({}), ValidationError);
  CHECK_THROWS_AS(make_fin_object({"a", "a"}), ValidationError);
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  Eigen::MatrixXd neg(2, 3);
  neg << 0.5, 0.5, 0.0, -0.1, 0.6, 0.5;
  CHECK_THROWS_AS(StochMap(x, y, neg), ValidationError);
  Eigen::MatrixXd wrong(3, 3);
  wrong.setZero();
  CHECK_THROWS_AS(StochMap(x, y, wrong), ValidationError);
  Eigen::MatrixXd drift(2, 3);
  drift << 0.5, 0.5, 0.1, 0.3, 0.3, 0.4;
  CHECK_THROWS_AS(validate_stochastic(StochMap(x, y, drift)), ValidationError);
}

TEST_CASE("structural errors carry the right types") {
  const FinObject x = obj({"a", "b"});
  const FinObject y = obj({"u", "v", "w"});
  std::mt19937_64 eng(3);
  const StochMap f = random_stoch(eng, x, y);
  CHECK_THROWS_AS(compose(f, f), DomainMismatch);
  CHECK_THROWS_AS(deterministic(x, y, [](Eigen::Index) { return Eigen::Index(7); }),
                  IndexOutOfRange);
  // a state on an object with no recorded factorisation cannot marginalise
  Eigen::RowVectorXd p(3);
  p << 0.2, 0.3, 0.5;
  CHECK_THROWS_AS(marginals(fin_state(y, p)), NotAProduct);
  CHECK_THROWS_AS(max_abs_diff(f, identity(x)), SignatureMismatch);
}

TEST_CASE("index_of finds labels and flags absences") {
  const FinObject x = obj({"a", "b", "c"});
  CHECK(x.index_of("b") == 1);
  CHECK(x.index_of("z") == -1);
}
