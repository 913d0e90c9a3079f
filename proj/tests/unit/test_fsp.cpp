#include <doctest.h>

#include <cmath>
#include <random>

#include "mominv/errors.hpp"
#include "mominv/fsp.hpp"
#include "mominv/moments.hpp"
#include "support.hpp"

using namespace mominv;
using namespace mominv::fsp;
using namespace mominv::testing;

namespace {

const MultiIndex X1({1});
const MultiIndex X2({2});

// Mean and second moment of a Poisson(lambda) law conditioned on {0..b}.
std::pair<double, double> truncated_poisson(double lambda, int b) {
  double w = 1.0;
  double z = 0.0;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int x = 0; x <= b; ++x) {
    if (x > 0) w *= lambda / x;
    z += w;
    m1 += x * w;
    m2 += double(x) * x * w;
  }
  return {m1 / z, m2 / z};
}

}  // namespace

TEST_CASE("state box indexing") {
  const StateBox box{{2, 3}};
  CHECK(box.state_count() == 12);
  const std::vector<int> x{1, 2};
  CHECK(box.index(x) == 6);
  std::vector<int> y(2);
  box.decode(11, y);
  CHECK(y == std::vector<int>{2, 3});
  CHECK(box.contains(x));
  CHECK_FALSE(box.contains(std::vector<int>{3, 0}));
  CHECK_FALSE(box.contains(std::vector<int>{0, -1}));
  CHECK_THROWS_AS((StateBox{{0, 3}}.state_count()), OracleError);
  CHECK_THROWS_AS((StateBox{{100, 100, 100}, 1000}.state_count()), OracleError);
}

TEST_CASE("birth-death generator is tridiagonal") {
  const std::vector<double> theta{3.0, 2.0};
  const Eigen::SparseMatrix<double> q = build_generator(birth_death(), StateBox{{4}}, theta);
  REQUIRE(q.rows() == 5);
  Eigen::MatrixXd d = Eigen::MatrixXd(q);
  for (int from = 0; from <= 4; ++from) {
    const double up = from < 4 ? 3.0 : 0.0;
    const double down = 2.0 * from;
    CHECK(d(from, from) == doctest::Approx(-(up + down)));
    if (from < 4) CHECK(d(from + 1, from) == doctest::Approx(up));
    if (from > 0) CHECK(d(from - 1, from) == doctest::Approx(down));
    for (int to = 0; to <= 4; ++to) {
      if (std::abs(to - from) > 1) CHECK(d(to, from) == 0.0);
    }
  }
}

TEST_CASE("generator columns sum to zero") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const ReactionNetwork net = random_network(rng, {1, 3, 2, 6});
    std::vector<double> theta(net.parameter_count());
    for (auto& v : theta) v = 0.5 + (rng() % 100) / 50.0;
    const StateBox box{std::vector<int>(net.species_count(), 4)};
    const Eigen::SparseMatrix<double> q = build_generator(net, box, theta);
    Eigen::MatrixXd d = Eigen::MatrixXd(q);
    for (int c = 0; c < d.cols(); ++c) {
      CHECK(d.col(c).sum() == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
      for (int r = 0; r < d.rows(); ++r) {
        if (r != c) CHECK(d(r, c) >= 0.0);
      }
    }
  }
}

TEST_CASE("birth-death stationary moments") {
  const std::vector<double> theta{10.0, 1.0};
  const std::vector<MultiIndex> idx{X1, X2};
  const StationaryEstimate e = stationary_moments(birth_death(), StateBox{{200}}, theta, idx);
  const double mean = e.moments.at(X1);
  CHECK(std::abs(mean - 10.0) <= 1e-6 * 10.0);
  CHECK(std::abs(e.moments.at(X2) - mean * mean - mean) <= 1e-5 * mean);
  CHECK(e.states == 201);
  CHECK(e.recurrent_states == 201);
  CHECK(e.leaked_mass < 1e-12);
  CHECK_FALSE(e.truncation_suspect());
}

TEST_CASE("birth-death matches the truncated Poisson law") {
  const std::vector<double> theta{10.0, 1.0};
  const std::vector<MultiIndex> idx{X1, X2};
  double previous = INFINITY;
  for (int b : {12, 16, 20, 30}) {
    const StationaryEstimate e = stationary_moments(birth_death(), StateBox{{b}}, theta, idx);
    const auto [m1, m2] = truncated_poisson(10.0, b);
    CHECK(e.moments.at(X1) == doctest::Approx(m1).epsilon(1e-10));
    CHECK(e.moments.at(X2) == doctest::Approx(m2).epsilon(1e-10));
    const double residual = std::abs(e.moments.at(X1) - 10.0);
    CHECK(residual < previous);
    previous = residual;
  }
  const StationaryEstimate small = stationary_moments(birth_death(), StateBox{{12}}, theta, idx);
  CHECK(small.leaked_mass > 0.01);
  CHECK(small.truncation_suspect());
}

TEST_CASE("mass piled against the upper face") {
  // The empty state carries almost no mass here, so the solver must pin elsewhere.
  const std::vector<MultiIndex> idx{X1, X2};
  for (double lambda : {60.0, 500.0}) {
    const std::vector<double> theta{lambda, 1.0};
    const StationaryEstimate e = stationary_moments(birth_death(), StateBox{{20}}, theta, idx);
    const auto [m1, m2] = truncated_poisson(lambda, 20);
    CHECK(e.moments.at(X1) == doctest::Approx(m1).epsilon(1e-9));
    CHECK(e.moments.at(X2) == doctest::Approx(m2).epsilon(1e-9));
  }
}

TEST_CASE("moment-equation residuals shrink with the box") {
  const ReactionNetwork net = birth_death();
  const MomentSystem sys = build_moment_system(net, 2);
  const std::vector<Rational> exact{60, 1};
  const std::vector<double> theta{60.0, 1.0};
  const NumericSystem num = assemble_numeric(sys, exact);
  double previous = INFINITY;
  for (int b : {50, 100, 200}) {
    const StationaryEstimate e = stationary_moments(net, StateBox{{b}}, theta, sys.basis);
    double residual = 0.0;
    for (std::size_t r = 0; r < sys.rows(); ++r) {
      double acc = num.constant[r].get_d();
      for (const auto& [c, v] : num.matrix.row(r)) acc += v.get_d() * e.moments.at(sys.basis[c]);
      residual = std::max(residual, std::abs(acc));
    }
    CAPTURE(b);
    // Only births out of the top state are lost: at most theta1 (2b+1) P(b).
    CHECK(residual <= 60.0 * (2 * b + 1) * e.leaked_mass + 1e-9 * 3600.0);
    CHECK(residual < previous);
    previous = residual;
  }
  CHECK(previous < 1e-6);
}

TEST_CASE("pairwise loss cannot fire on a unit box") {
  const ReactionNetwork net = make_network(1, {{"in", {1}, propensity::Zeroth{}},
                                               {"out", {-1}, propensity::Mono{0}},
                                               {"pair", {-2}, propensity::BiHomo{0}}});
  const std::vector<double> theta{2.0, 3.0, 100.0};
  const Eigen::SparseMatrix<double> q = build_generator(net, StateBox{{1}}, theta);
  Eigen::MatrixXd d = Eigen::MatrixXd(q);
  CHECK(d(1, 0) == doctest::Approx(2.0));
  CHECK(d(0, 1) == doctest::Approx(3.0));
  const std::vector<MultiIndex> idx{X1};
  const StationaryEstimate e = stationary_moments(net, StateBox{{1}}, theta, idx);
  CHECK(e.moments.at(X1) == doctest::Approx(2.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("transient states are excluded") {
  const ReactionNetwork pure_birth = make_network(1, {{"in", {1}, propensity::Zeroth{}}});
  const std::vector<double> theta{1.0};
  const std::vector<MultiIndex> idx{X1};
  const StationaryEstimate e = stationary_moments(pure_birth, StateBox{{5}}, theta, idx);
  CHECK(e.recurrent_states == 1);
  CHECK(e.states == 6);
  CHECK(e.moments.at(X1) == doctest::Approx(5.0));
  CHECK(e.truncation_suspect());
}

TEST_CASE("finite differences are insensitive to the step") {
  const std::vector<double> theta{10.0, 2.0};
  const std::vector<MultiIndex> idx{X1, X2};
  for (double h : {1e-2, 1e-3, 1e-4}) {
    CAPTURE(h);
    const SensitivityEstimate s1 = sensitivity_fd(birth_death(), StateBox{{200}}, theta, 0, h, idx);
    CHECK(s1.derivative.at(X1) == doctest::Approx(0.5).epsilon(1e-6));
    // E[x^2] = l + l^2 with l = theta1/theta2.
    CHECK(s1.derivative.at(X2) == doctest::Approx(0.5 + 2 * 5.0 * 0.5).epsilon(1e-6));
    const SensitivityEstimate s2 = sensitivity_fd(birth_death(), StateBox{{200}}, theta, 1, h, idx);
    // Central differences of 1/theta2 carry a relative error of h^2/(1-h^2).
    CHECK(s2.derivative.at(X1) == doctest::Approx(-10.0 / 4.0 / (1 - h * h)).epsilon(1e-6));
    CHECK(s2.step == h);
    CHECK(s2.base.moments.at(X1) == doctest::Approx(5.0).epsilon(1e-9));
  }
}

TEST_CASE("zero classification") {
  CHECK(classifies_zero(1e-7, 0.5));
  CHECK_FALSE(classifies_zero(1e-5, 0.5));
  CHECK(classifies_zero(1e-4, 200.0));
  CHECK_FALSE(classifies_zero(1e-3, 200.0));
}

TEST_CASE("antithetic example on a moderate box") {
  const std::vector<double> theta{1, 1, 1, 1, 1};
  const MultiIndex x13({1, 0, 1});
  const MultiIndex x2({0, 1, 0});
  const std::vector<MultiIndex> idx{x13, x2};
  const StateBox box{{20, 20, 20}};
  const SensitivityEstimate s3 = sensitivity_fd(antithetic(), box, theta, 2, default_fd_step, idx);
  CHECK(s3.base.moments.at(x13) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(classifies_zero(s3.derivative.at(x13), s3.base.moments.at(x13)));
  CHECK(s3.derivative.at(x2) == doctest::Approx(-1.0).epsilon(0.05));
}

TEST_CASE("parameter count is checked") {
  const std::vector<double> theta{1.0};
  const std::vector<MultiIndex> idx{X1};
  CHECK_THROWS(stationary_moments(birth_death(), StateBox{{10}}, theta, idx));
}
