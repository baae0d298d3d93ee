#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "dearest/dataset.hpp"
#include "dearest/error.hpp"
#include "dearest/objective.hpp"

using namespace dearest;

namespace {

Vector gaussian(int d, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Vector v(d);
  for (int k = 0; k < d; ++k) v[k] = nd(rng);
  return v;
}

LogisticNCObjective small_logistic(double lambda = 0.1) {
  auto samples = make_synthetic_binary(60, 7, 3);
  return build_logistic(samples, partition(samples, 3, 4), lambda);
}

double fd_rel_error(const Vector &analytic, const std::function<double(const Vector &)> &f,
                    const Vector &x) {
  const double h = 1e-6;
  Vector fd(x.size());
  for (int k = 0; k < x.size(); ++k) {
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    fd[k] = (f(xp) - f(xm)) / (2 * h);
  }
  return (fd - analytic).norm() / std::max(1.0, analytic.norm());
}

}  // namespace

TEST_CASE("logistic component gradient matches finite differences") {
  const auto obj = small_logistic();
  std::mt19937_64 rng(1);
  for (int probe = 0; probe < 30; ++probe) {
    const int i = probe % 3, j = probe % obj.samples();
    const Vector x = gaussian(obj.dim(), rng);
    const double err = fd_rel_error(obj.component_grad(i, j, x),
                                    [&](const Vector &z) { return obj.component_value(i, j, z); }, x);
    CHECK(err <= 1e-5);
  }
}

TEST_CASE("logistic local and global gradients match finite differences") {
  const auto obj = small_logistic();
  std::mt19937_64 rng(2);
  for (int probe = 0; probe < 10; ++probe) {
    const Vector x = gaussian(obj.dim(), rng);
    CHECK(fd_rel_error(obj.local_grad(1, x), [&](const Vector &z) { return obj.local_value(1, z); },
                       x) <= 1e-5);
    CHECK(fd_rel_error(obj.global_grad(x), [&](const Vector &z) { return obj.global_value(z); },
                       x) <= 1e-5);
  }
}

TEST_CASE("fast local paths agree with the component sums") {
  const auto obj = small_logistic();
  std::mt19937_64 rng(3);
  const Vector x = gaussian(obj.dim(), rng);
  for (int i = 0; i < obj.agents(); ++i) {
    Vector g = Vector::Zero(obj.dim());
    double v = 0.0;
    for (int j = 0; j < obj.samples(); ++j) {
      obj.add_component_grad(i, j, x, 1.0 / obj.samples(), g);
      v += obj.component_value(i, j, x) / obj.samples();
    }
    CHECK((obj.local_grad(i, x) - g).norm() < 1e-13);
    CHECK(obj.local_value(i, x) == doctest::Approx(v).epsilon(1e-13));
  }
}

TEST_CASE("batch difference agrees with the generic definition") {
  const auto obj = small_logistic();
  std::mt19937_64 rng(4);
  const Vector a = gaussian(obj.dim(), rng), b = gaussian(obj.dim(), rng);
  const std::vector<int> batch{0, 3, 3, 7, 19};
  Vector fast = Vector::Zero(obj.dim());
  obj.add_batch_difference(2, batch, a, b, fast);
  Vector slow = Vector::Zero(obj.dim());
  for (int j : batch) slow += (obj.component_grad(2, j, a) - obj.component_grad(2, j, b)) / 5.0;
  CHECK((fast - slow).norm() < 1e-13);

  Vector same = Vector::Zero(obj.dim());
  obj.add_batch_difference(2, batch, a, a, same);
  CHECK(same.norm() == 0.0);
}

TEST_CASE("logistic loss is stable for large margins") {
  LogisticNCObjective::SparseRows a(1, 1);
  a.insert(0, 0) = 1.0;
  Vector y(1);
  y << 1.0;
  const LogisticNCObjective obj({a}, {y}, 0.0);
  Vector x(1);
  x << 800.0;
  CHECK(std::isfinite(obj.component_value(0, 0, x)));
  CHECK(obj.component_value(0, 0, x) >= 0.0);
  x << -800.0;
  CHECK(obj.component_value(0, 0, x) == doctest::Approx(800.0));
  CHECK(obj.component_grad(0, 0, x)[0] == doctest::Approx(-1.0));
}

TEST_CASE("regularizer values") {
  const auto obj = small_logistic(0.5);
  Vector x = Vector::Zero(obj.dim());
  x[0] = 1.0;
  CHECK(obj.regularizer(x) == doctest::Approx(0.25));
  CHECK(obj.regularizer_grad(x)[0] == doctest::Approx(0.25));
}

TEST_CASE("logistic smoothness constant") {
  // Unit-norm features: every l_ij = 1/4 + 2 lambda.
  const auto obj = small_logistic(0.1);
  CHECK(obj.smoothness() == doctest::Approx(0.25 + 0.2).epsilon(1e-12));
  CHECK(obj.lower_bound() == 0.0);
}

TEST_CASE("average smoothness holds on random pairs") {
  const auto obj = small_logistic(0.1);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector x = gaussian(obj.dim(), rng), z = gaussian(obj.dim(), rng);
    for (int i = 0; i < obj.agents(); ++i) {
      double lhs = 0.0;
      for (int j = 0; j < obj.samples(); ++j)
        lhs += (obj.component_grad(i, j, x) - obj.component_grad(i, j, z)).squaredNorm();
      lhs /= obj.samples();
      CHECK(lhs <= obj.smoothness() * obj.smoothness() * (x - z).squaredNorm() * (1 + 1e-12));
    }
  }
}

TEST_CASE("logistic validation") {
  LogisticNCObjective::SparseRows a(2, 3);
  Vector y(2);
  y << 1.0, 0.5;
  CHECK_THROWS_AS(LogisticNCObjective({a}, {y}, 0.1), ValidationError);
  y << 1.0, -1.0;
  CHECK_THROWS_AS(LogisticNCObjective({a}, {y}, -1.0), ValidationError);
  LogisticNCObjective::SparseRows other(3, 3);
  Vector y3 = Vector::Ones(3);
  CHECK_THROWS_AS(LogisticNCObjective({a, other}, {y, y3}, 0.1), ValidationError);
  const auto obj = small_logistic();
  CHECK_THROWS_AS(obj.component_value(5, 0, Vector::Zero(obj.dim())), ValidationError);
}

TEST_CASE("quadratic gradients match finite differences") {
  const auto obj = make_quadratic(3, 5, 4, 9);
  std::mt19937_64 rng(6);
  for (int probe = 0; probe < 30; ++probe) {
    const int i = probe % 3, j = probe % 5;
    const Vector x = gaussian(4, rng);
    CHECK(fd_rel_error(obj.component_grad(i, j, x),
                       [&](const Vector &z) { return obj.component_value(i, j, z); }, x) <= 1e-5);
    CHECK(fd_rel_error(obj.local_grad(i, x), [&](const Vector &z) { return obj.local_value(i, z); },
                       x) <= 1e-5);
  }
}

TEST_CASE("quadratic minimizer is stationary") {
  const auto obj = make_quadratic(4, 50, 10, 1);
  CHECK(obj.global_grad(obj.minimizer()).norm() < 1e-12);
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = obj.minimizer() + gaussian(10, rng, 0.1);
    CHECK(obj.global_value(x) >= obj.lower_bound());
  }
}

TEST_CASE("quadratic smoothness is the root mean square of the largest block curvatures") {
  std::vector<Matrix> blocks(1, Matrix(2, 1));
  blocks[0] << 1.0, 3.0;  // two 1x1 blocks with curvatures 1 and 9
  std::vector<Vector> targets(1, Vector::Zero(2));
  const QuadraticObjective obj(blocks, targets, 1);
  CHECK(obj.smoothness() == doctest::Approx(std::sqrt((1.0 + 81.0) / 2.0)));
  CHECK_THROWS_AS(QuadraticObjective(blocks, targets, 3), ValidationError);
}

TEST_CASE("make_quadratic is reproducible") {
  const auto a = make_quadratic(2, 3, 4, 5), b = make_quadratic(2, 3, 4, 5);
  CHECK(a.minimizer() == b.minimizer());
  CHECK_THROWS_AS(make_quadratic(0, 3, 4, 5), ValidationError);
}
