#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gstream/datagen.hpp"
#include "gstream/grouse.hpp"
#include "gstream/metrics.hpp"
#include "gstream/theory.hpp"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace gstream;
using namespace gstream::theory;
using gstream::testing::gaussian_vector;
using gstream::testing::random_basis;
using gstream::testing::test_rng;

// Reference values below were produced by an independent 30-digit evaluation of
// the closed forms.

TEST_CASE("exact full-data ratio") {
  CHECK(exact_full_ratio(1, 0) == 1.0);
  CHECK(exact_full_ratio(1, 1) == 2.0);
  CHECK(exact_full_ratio(2, 1) == 1.25);
  CHECK_THROWS_AS(exact_full_ratio(0, 1), ZeroProjection);
}

TEST_CASE("full-data expected rate and key quantity") {
  CHECK(expected_rate_full(1.0, 7) == 1.0);
  CHECK(expected_rate_full(0.0, 1) == 2.0);
  CHECK(expected_rate_full(0.5, 10) == doctest::Approx(1.05).epsilon(1e-15));
  CHECK(key_quantity_bound(1.0, 3) == 0.0);
  CHECK(key_quantity_bound(0.0, 4) == 0.25);
  CHECK(key_quantity_bound(0.5, 10) == doctest::Approx(0.05).epsilon(1e-15));
  CHECK_THROWS_AS(expected_rate_full(1.5, 2), InvalidParameter);
}

TEST_CASE("global convergence iteration bound") {
  const auto k = iteration_bound_full(5000, 10, 0.1, 1.0 - 1e-4);
  CHECK(k.components.at("K2") == doctest::Approx(20.0 * std::log(5e4)).epsilon(1e-9));
  CHECK(k.components.at("K2") == doctest::Approx(216.39556568820566).epsilon(1e-9));
  CHECK(k.components.at("tau0") == doctest::Approx(0.8464618104763978).epsilon(1e-12));
  CHECK(k.components.at("K1") == doctest::Approx(14426.167016735859).epsilon(1e-12));
  CHECK(k.value == doctest::Approx(14426.167016735859 + 216.39556568820566).epsilon(1e-12));
  CHECK(k.components.at("C") == 1.0);

  const auto halved = iteration_bound_full(5000, 10, 0.05, 1.0 - 1e-4);
  CHECK(halved.components.at("K2") ==
        doctest::Approx(k.components.at("K2") + 20.0 * std::log(2.0)).epsilon(1e-12));
  // Looser targets never need more iterations.
  CHECK(iteration_bound_full(5000, 10, 0.1, 1.0 - 1e-3).value < k.value);
  CHECK(iteration_bound_full(5000, 10, 0.2, 1.0 - 1e-4).value < k.value);

  CHECK_THROWS_AS(iteration_bound_full(5000, 10, 0.0, 0.5), InvalidParameter);
  CHECK_THROWS_AS(iteration_bound_full(5000, 10, 0.1, 1.0), InvalidParameter);
  CHECK_THROWS_AS(iteration_bound_full(5000, 10, 0.1, 0.5, 0.0), InvalidParameter);
}

TEST_CASE("heuristic iteration counts") {
  CHECK(simplified_iteration_bound(5000, 10, 1.0 - 1e-4) ==
        doctest::Approx(943.822722861385570).epsilon(1e-12));
  CHECK(heuristic_iterations(5000, 5000, 10, 1.0 - 1e-4) ==
        doctest::Approx(simplified_iteration_bound(5000, 10, 1.0 - 1e-4)));
  CHECK(heuristic_iterations(10000, 1000, 50, 1.0 - 1e-3) ==
        doctest::Approx(233712.38693889563).epsilon(1e-12));
  CHECK(heuristic_iterations(10000, 2000, 50, 1.0 - 1e-3) ==
        doctest::Approx(233712.38693889563 / 2).epsilon(1e-12));
  CHECK_THROWS_AS(heuristic_iterations(100, 101, 5, 0.9), InvalidParameter);
}

TEST_CASE("Delta vanishes for full data and for vectors in the span") {
  Rng rng = test_rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const Matrix u = random_basis(25, 3, rng);
    const Matrix ubar = random_basis(25, 3, rng);
    const Vector v = ubar * gaussian_vector(3, rng);
    CHECK(std::abs(delta_term(u, ubar, SamplingOperator::make_full(25), v)) <= 1e-10 * v.squaredNorm());
    const Vector in_span = u * gaussian_vector(3, rng);
    const auto op = SamplingOperator::make_entrywise(12, 25, rng);
    try {
      CHECK(std::abs(delta_term(u, ubar, op, in_span)) <= 1e-10 * in_span.squaredNorm());
    } catch (const RankDeficient&) {
    }
  }
  const Matrix e12 = Matrix::Identity(4, 2);
  Matrix e34 = Matrix::Zero(4, 2);
  e34(2, 0) = e34(3, 1) = 1.0;
  CHECK_THROWS_AS(delta_term(e12, e34, SamplingOperator::make_full(4), Vector::Ones(4)), SingularOverlap);
}

TEST_CASE("Delta reproduces the Schur determinant identity on missing data") {
  Rng rng = test_rng(2);
  int checked = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const Matrix u = random_basis(50, 3, rng);
    const Matrix ubar = random_basis(50, 3, rng);
    const Vector v = ubar * gaussian_vector(3, rng);
    const auto op = SamplingOperator::make_entrywise(20, 50, rng);
    GrouseState state{OrthonormalBasis(u)};
    double delta = 0.0;
    try {
      delta = delta_term(u, ubar, op, v);
    } catch (const RankDeficient&) {
      continue;
    }
    const StepReport r = state.step(op, op.apply(v));
    if (r.status != StepStatus::Updated) continue;
    const Matrix before = ubar.transpose() * u;
    const Matrix after = ubar.transpose() * state.basis();
    const double measured = before.partialPivLu().solve(after).determinant();
    const double predicted = determinant_ratio(r.norm_p, r.norm_r_tilde, r.norm_r, delta);
    CHECK(std::abs(measured - predicted) <= 1e-9 * std::max(1.0, std::abs(predicted)));
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("undersampled per-step lower bound") {
  CHECK(step_lower_bound_undersampled(1, 0, 0, 0) == 1.0);
  CHECK(step_lower_bound_undersampled(1, 1, 1, 0) == 2.0);
  // Missing data with ||r~|| = ||r||, Delta = 0: 1 + ||r||^2/||p||^2.
  CHECK(step_lower_bound_undersampled(2, 3, 3, 0) == doctest::Approx(1.0 + 9.0 / 4.0));
  // Full-data inputs reproduce the exact ratio.
  CHECK(step_lower_bound_undersampled(0.8, 0.6, 0.6, 0.0) == doctest::Approx(exact_full_ratio(0.8, 0.6)));
  CHECK_THROWS_AS(step_lower_bound_undersampled(0, 1, 1, 0), ZeroProjection);
  CHECK_THROWS_AS(determinant_ratio(0, 1, 1, 0), ZeroProjection);
}

TEST_CASE("compressive expected rate") {
  const auto r = expected_rate_cs(0.5, 10, 500, 5000, 0.1, 0.1);
  CHECK(r.params.at("gamma1") == doctest::Approx(0.630509700406489577).epsilon(1e-12));
  CHECK(r.params.at("gamma2") == doctest::Approx(11.8281539068392467).epsilon(1e-12));
  CHECK(r.rate == doctest::Approx(1.00240677192441614).epsilon(1e-14));
  CHECK(r.params.at("probability_raw") < 0.0);
  CHECK(r.probability == 0.0);
  CHECK(r.vacuous);
  CHECK(r.params.count("gamma2_proof") == 1);

  // delta -> 0 limit at phi_d = 0.
  const auto small = expected_rate_cs(0.3, 10, 500, 5000, 1e-6, 0.0);
  const double g1 = 1.0 / std::pow(1.0 + std::sqrt(10.0 / 500.0), 2);
  CHECK(small.params.at("gamma1") == doctest::Approx(g1).epsilon(1e-5));
  CHECK(small.params.at("gamma2") == doctest::Approx(1.0).epsilon(1e-4));

  CHECK(expected_rate_cs(1.0, 10, 500, 5000, 0.3, 0.7).rate == 1.0);
  CHECK_THROWS_AS(expected_rate_cs(0.5, 10, 500, 5000, 0.0, 0.1), InvalidParameter);
  CHECK_THROWS_AS(expected_rate_cs(0.5, 10, 500, 5000, 1.0, 0.1), InvalidParameter);
  CHECK_THROWS_AS(expected_rate_cs(0.5, 10, 500, 5000, 0.1, std::numbers::pi / 2), InvalidParameter);
  // 1 - 2 delta sqrt(m/n) must stay positive.
  CHECK_THROWS_AS(expected_rate_cs(0.5, 10, 5000, 5000, 0.6, 0.1), InvalidParameter);
}

TEST_CASE("compressive probability is increasing in delta") {
  double last = -INFINITY;
  for (double delta = 0.05; delta < 1.0; delta += 0.05) {
    const double p = cs_probability_raw(40, 20000, delta);
    CHECK(p >= last);
    last = p;
  }
  const auto found = find_delta_cs(40, 20000, 0.9);
  REQUIRE(found.has_value());
  CHECK(cs_probability_raw(40, 20000, *found) >= 0.9);
  CHECK(cs_probability_raw(40, 20000, *found * 0.999) < 0.9);
  // exp(-d delta^2 / 8) alone keeps the probability below 0.9 when d = 10.
  CHECK_FALSE(find_delta_cs(10, 500, 0.9).has_value());
  CHECK_FALSE(find_delta_cs(10, 1000000, 0.9).has_value());
  CHECK(best_delta_cs(10, 1000).first < 0.9);
}

TEST_CASE("compressive sample complexity") {
  const auto b = sample_complexity_cs(10, 0.25, 0.0, 5000);
  CHECK(b.components.at("beta") == doctest::Approx(71.11111111111111).epsilon(1e-12));
  CHECK(b.components.at("term2") == doctest::Approx(5333.333333333333).epsilon(1e-12));
  CHECK(b.components.at("term1") == doctest::Approx(32091.068568325551).epsilon(1e-10));
  CHECK(b.value == doctest::Approx(32091.068568325551).epsilon(1e-10));
  // At phi_d = 0 the statement and the derivation agree.
  CHECK(b.components.at("term2_proof") == doctest::Approx(b.components.at("term2")));

  const auto tiny = sample_complexity_cs(10, 0.01, 0.0, 5000);
  CHECK(tiny.components.at("term1") > tiny.components.at("term2"));
  double last = 0.0;
  for (double phi = 0.0; phi < 1.5; phi += 0.1) {
    const double v = sample_complexity_cs(10, 0.2, phi, 5000).components.at("term2");
    CHECK(v >= last);
    last = v;
  }
  CHECK_THROWS_AS(sample_complexity_cs(10, 0.5, 0.0, 5000), InvalidParameter);
  CHECK_THROWS_AS(sample_complexity_cs(10, 0.0, 0.0, 5000), InvalidParameter);
}

TEST_CASE("missing-data expected rate") {
  CHECK(expected_rate_missing(1.0, 10, 500, 5000).rate == 1.0);
  CHECK(expected_rate_missing(0.0, 1, 100, 100).rate == 1.25);
  const auto r = expected_rate_missing(0.5, 10, 500, 5000);
  CHECK(r.rate == doctest::Approx(1.00125).epsilon(1e-15));
  CHECK(r.probability == doctest::Approx(1.0 - 1.2e-7).epsilon(1e-15));
  for (double z = 0.0; z <= 1.0; z += 0.1) {
    CHECK(expected_rate_missing(z, 10, 3000, 5000).rate <= expected_rate_full(z, 10));
  }
}

TEST_CASE("missing-data sample complexity") {
  const auto b = sample_complexity_missing(10, 1.0, 1.0, 5000);
  CHECK(b.components.at("term1") == doctest::Approx(4273.09198002911271).epsilon(1e-12));
  CHECK(b.components.at("term2") == doctest::Approx(545.100364250639195).epsilon(1e-12));
  CHECK(b.components.at("term3") == doctest::Approx(24306.0818151604295).epsilon(1e-12));
  CHECK(b.value == doctest::Approx(24306.0818151604295).epsilon(1e-12));
  CHECK(sample_complexity_missing(10, 2.0, 1.0, 5000).value > b.value);
  CHECK(sample_complexity_missing(20, 1.0, 1.0, 5000).components.at("term2") == b.components.at("term2"));
  CHECK_THROWS_AS(sample_complexity_missing(10, 0.5, 1.0, 5000), InvalidParameter);
}

TEST_CASE("discrepancy decay") {
  CHECK(discrepancy_decay_missing(0.0, 10, 500, 5000, 1.0) == 0.0);
  CHECK(discrepancy_decay_factor(10, 500, 5000, 1.0) == doctest::Approx(0.9975003125).epsilon(1e-15));
  CHECK(discrepancy_decay_factor(10, 500, 5000, 500.0) ==
        doctest::Approx(1.0 - 0.25 * (15.0 / 16.0) * 500.0 / 50000.0));
  CHECK(discrepancy_decay_missing(0.4, 10, 500, 5000, 1.0) ==
        doctest::Approx(0.4 * 0.9975003125));
}

TEST_CASE("expected initial similarity") {
  CHECK(expected_zeta0(10, 1) == doctest::Approx(0.0367879441171442321).epsilon(1e-14));
  CHECK(expected_zeta0(40, 2) == doctest::Approx(expected_zeta0(20, 2) / 4).epsilon(1e-14));
  CHECK(expected_zeta0(20, 2, 3.0) == doctest::Approx(3.0 * expected_zeta0(20, 2)).epsilon(1e-14));
  CHECK(log_expected_zeta0(5000, 10) == doctest::Approx(10.0 * std::log(10.0 / (5000.0 * std::numbers::e))));
  CHECK_THROWS_AS(expected_zeta0(3, 3), InvalidParameter);
}

TEST_CASE("every rate is exactly 1 at zeta = 1") {
  CHECK(expected_rate_full(1.0, 3) == 1.0);
  CHECK(expected_rate_missing(1.0, 3, 10, 50).rate == 1.0);
  CHECK(expected_rate_cs(1.0, 3, 10, 50, 0.2, 0.3).rate == 1.0);
}
