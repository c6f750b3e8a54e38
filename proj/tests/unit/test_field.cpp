#include <doctest.h>

#include <random>

#include "logwave/error.hpp"
#include "logwave/field.hpp"
#include "logwave/log.hpp"
#include "oracles.hpp"

using namespace logwave;

namespace {

DomainGrid grid_with(int modes, double L = oracle::pi) {
  GridOptions go;
  go.n_modes = modes;
  go.length = L;
  return DomainGrid(go);
}

Vector random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

}  // namespace

TEST_CASE("gauss_legendre integrates polynomials of degree 2n-1 exactly") {
  for (int n : {1, 2, 5, 8, 12}) {
    const auto [x, w] = gauss_legendre(n);
    REQUIRE(x.size() == static_cast<std::size_t>(n));
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += w[i] * std::pow(x[i], deg);
      const double exact = deg % 2 == 1 ? 0.0 : 2.0 / (deg + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13));
    }
  }
}

TEST_CASE("quadrature weights are positive and sum to L") {
  for (double L : {1.0, oracle::pi, 7.5}) {
    const DomainGrid g = grid_with(6, L);
    CHECK(g.weights().minCoeff() > 0.0);
    CHECK(g.weights().sum() == doctest::Approx(L).epsilon(1e-14));
    CHECK(g.nodes().minCoeff() > 0.0);
    CHECK(g.nodes().maxCoeff() < L);
  }
}

TEST_CASE("Gram deviation below 1e-10 on the default layout") {
  for (int k : {1, 4, 16, 64}) CHECK(grid_with(k).gram_deviation() < 1e-10);
  GridOptions go;
  go.n_modes = 10;
  go.n_cells = 15;
  go.nodes_per_cell = 4;  // 6 nodes per mode
  CHECK(DomainGrid(go).gram_deviation() < 1e-10);
  go.n_cells = 3;
  go.nodes_per_cell = 16;  // 4.8 nodes per mode in wide cells
  CHECK(DomainGrid(go).gram_deviation() < 1e-10);
}

TEST_CASE("four nodes per mode is not enough with 8-point cells") {
  // 5 cells x 8 nodes for 10 modes: each cell spans 2pi of sin(20x), beyond
  // what an 8-point rule resolves to 1e-10.
  GridOptions go;
  go.n_modes = 10;
  go.n_cells = 5;
  const double dev = DomainGrid(go).gram_deviation();
  CHECK(dev > 1e-10);
  CHECK(dev < 1e-4);
}

TEST_CASE("invalid grid options name the offending key") {
  GridOptions go;
  go.n_modes = 0;
  CHECK_THROWS_AS(DomainGrid{go}, ConfigError);
  go = GridOptions{};
  go.length = -1.0;
  try {
    DomainGrid g(go);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "problem.length");
  }
}

TEST_CASE("stiffness for A = 1 on (0, pi) is diag(j^2)") {
  const DomainGrid g = grid_with(4);
  const Matrix S = assemble_stiffness(g, Diffusivity::constant(1.0));
  Matrix expected = Matrix::Zero(4, 4);
  for (int j = 0; j < 4; ++j) expected(j, j) = (j + 1.0) * (j + 1.0);
  CHECK((S - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("constant A scales the eigenvalue diagonal") {
  const double L = 2.3, a0 = 0.7;
  const DomainGrid g = grid_with(5, L);
  const Matrix S = assemble_stiffness(g, Diffusivity::constant(a0));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const double expected = i == j ? a0 * std::pow((i + 1) * oracle::pi / L, 2) : 0.0;
      CHECK(S(i, j) == doctest::Approx(expected).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("variable-coefficient stiffness matches a 1e6-point trapezoid") {
  const DomainGrid g = grid_with(2);
  const Diffusivity A = Diffusivity::linear(1.0, 1.0);  // A(x) = 1 + x
  const Matrix S = assemble_stiffness(g, A);
  const double L = oracle::pi;
  for (int i = 1; i <= 2; ++i)
    for (int j = 1; j <= 2; ++j) {
      const double ref = oracle::trapezoid(
          [&](double x) { return (1.0 + x) * oracle::mode_dx(i, x, L) * oracle::mode_dx(j, x, L); }, 0.0, L,
          1000000);
      CHECK(std::abs(S(i - 1, j - 1) - ref) < 1e-10 * std::max(1.0, std::abs(ref)));
    }
}

TEST_CASE("stiffness is symmetric with eigenvalues above a0 (pi/L)^2") {
  const double L = 3.0;
  const DomainGrid g = grid_with(12, L);
  const Diffusivity A = Diffusivity::linear(0.5, 0.4);
  const Matrix S = assemble_stiffness(g, A);
  CHECK((S - S.transpose()).cwiseAbs().maxCoeff() == 0.0);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  CHECK(eig.eigenvalues().minCoeff() >= A.min_on(L) * std::pow(oracle::pi / L, 2) * (1.0 - 1e-12));
}

TEST_CASE("stiffness is monotone in A") {
  const DomainGrid g = grid_with(8);
  const Matrix S1 = assemble_stiffness(g, Diffusivity::constant(1.0));
  const Matrix S2 = assemble_stiffness(g, Diffusivity::linear(1.0, 0.3));
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = random_vector(8, rng);
    CHECK(bilinear_a(u, S1) <= bilinear_a(u, S2));
  }
}

TEST_CASE("bilinear_a values") {
  const DomainGrid g = grid_with(4);
  const Matrix S = assemble_stiffness(g, Diffusivity::constant(1.0));
  CHECK(bilinear_a(Vector::Zero(4), S) == 0.0);
  CHECK(bilinear_a(Vector::Unit(4, 0), S) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bilinear_a(2.0 * Vector::Unit(4, 1), S) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("Poincare chain a(u,u) >= a0 |u'|^2 >= (a0 / B7) |u|^2") {
  const double L = oracle::pi;
  const DomainGrid g = grid_with(10, L);
  const Diffusivity A = Diffusivity::linear(0.8, 0.2);
  const Matrix S = assemble_stiffness(g, A);
  const Matrix S1 = assemble_stiffness(g, Diffusivity::constant(1.0));
  const double a0 = A.min_on(L);
  const double B7 = 1.0;  // 1 / (pi / L)^2 on (0, pi)
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector u = random_vector(10, rng);
    const double grad = bilinear_a(u, S1);
    CHECK(bilinear_a(u, S) >= a0 * grad * (1.0 - 1e-12));
    CHECK(a0 * grad >= a0 / B7 * u.squaredNorm() * (1.0 - 1e-12));
  }
}

TEST_CASE("evaluate_at_nodes samples the sine basis") {
  const DomainGrid g = grid_with(3);
  CHECK(g.evaluate_at_nodes(Vector::Zero(3)).cwiseAbs().maxCoeff() == 0.0);
  const Vector vals = g.evaluate_at_nodes(Vector::Unit(3, 0));
  for (int i = 0; i < g.n_nodes(); ++i)
    CHECK(vals[i] == doctest::Approx(oracle::mode(1, g.nodes()[i], oracle::pi)).epsilon(1e-14));
}

TEST_CASE("project inverts evaluate on the span") {
  const DomainGrid g = grid_with(16);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector u = random_vector(16, rng);
    CHECK((g.project(g.evaluate_at_nodes(u)) - u).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(g.project(Vector::Zero(g.n_nodes())).cwiseAbs().maxCoeff() == 0.0);
  const Vector e2 = g.project(g.evaluate_at_nodes(Vector::Unit(16, 1)));
  CHECK((e2 - Vector::Unit(16, 1)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("project is the quadrature adjoint of evaluate") {
  const DomainGrid g = grid_with(6);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector f = random_vector(g.n_nodes(), rng);
    const Vector c = random_vector(6, rng);
    const Vector gvals = g.evaluate_at_nodes(c);
    const double quad = (g.weights().array() * f.array() * gvals.array()).sum();
    CHECK(g.project(f).dot(c) == doctest::Approx(quad).epsilon(1e-12));
  }
}

TEST_CASE("coefficient field validation") {
  const DomainGrid g = grid_with(4);
  CHECK_THROWS_AS(CoefficientField(g, Diffusivity::constant(0.0), TimeCoefficient::constant(1.0)), ConfigError);
  CHECK_THROWS_AS(CoefficientField(g, Diffusivity::linear(1.0, -1.0), TimeCoefficient::constant(1.0)), ConfigError);
  CHECK_THROWS_AS(CoefficientField(g, Diffusivity::constant(1.0), TimeCoefficient::constant(-1.0)), ConfigError);
  // increasing mu violates mu' <= 0
  CHECK_THROWS_AS(CoefficientField(g, Diffusivity::constant(1.0), TimeCoefficient::exp_decay(1.0, 2.0, 1.0)),
                  ConfigError);

  const CoefficientField c(g, Diffusivity::linear(2.0, 0.5), TimeCoefficient::exp_decay(2.0, 1.0, 1.0));
  CHECK(c.a0() == doctest::Approx(2.0));
  CHECK(c.mu0() == doctest::Approx(1.0));
  CHECK(c.mu(0.0) == doctest::Approx(2.0));
  CHECK(c.mu_prime(0.0) == doctest::Approx(-1.0));
  for (double t : {0.0, 0.5, 3.0, 50.0}) {
    CHECK(c.mu(t) >= c.mu0());
    const double h = 1e-6;
    CHECK(c.mu_prime(t) == doctest::Approx((c.mu(t + h) - c.mu(t - h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("constant mu is accepted with a warning") {
  std::string captured;
  auto previous = set_warning_sink([&](std::string_view m) { captured = m; });
  const DomainGrid g = grid_with(2);
  CoefficientField c(g, Diffusivity::constant(1.0), TimeCoefficient::constant(1.5));
  set_warning_sink(previous);
  CHECK(c.mu0() == 1.5);
  CHECK(captured.find("constant mu") != std::string::npos);
}
