#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "nitm/loss.hpp"
#include "nitm/qcalc.hpp"
#include "nitm/rng.hpp"
#include "support/oracles.hpp"

using nitm::loss::loss_derivative;
using nitm::loss::loss_derivative_point;
using nitm::loss::loss_value;
using nitm::loss::zero_one_loss;

TEST_CASE("closed-form points from the loss table") {
  CHECK(loss_value(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(loss_value(0.5, 1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(loss_value(1.0, 0.0) == 1.0);
}

TEST_CASE("family members match their closed forms on a grid") {
  for (int i = -500; i <= 500; ++i) {
    const double z = static_cast<double>(i) * 0.01;
    const double hinge = std::max(0.0, 1.0 - z);
    const double sq = std::max(0.0, 1.0 - z / 2.0);
    CHECK(std::abs(loss_value(0.0, z) - hinge) <= 1e-12);
    CHECK(std::abs(loss_value(0.5, z) - sq * sq) <= 1e-12);
    CHECK(std::abs(loss_value(1.0, z) - std::exp(-z)) <= 1e-12 * std::exp(-z));
  }
}

TEST_CASE("index outside [0,1] is rejected") {
  CHECK_THROWS_AS(loss_value(-0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss_value(1.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss_derivative(2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(loss_value(0.5, std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("loss approaches the misclassification indicator for very negative index") {
  // evaluated through the raw generalized exponential, which admits q' < 0
  double prev_worst = std::numeric_limits<double>::infinity();
  for (const double qp : {-10.0, -100.0, -1000.0}) {
    double worst = 0.0;
    for (int i = -50; i <= -1; ++i) {
      const double z = static_cast<double>(i) * 0.1;
      const double v = nitm::qcalc::q_exp(qp, -z);
      worst = std::max(worst, std::abs(v - 1.0));
    }
    CHECK(worst < prev_worst);
    prev_worst = worst;
  }
  CHECK(prev_worst < 0.01);
  // monotone in the index at each such margin: the values sit above 1 and
  // shrink toward it as the index drops
  for (int i = -50; i <= -1; ++i) {
    const double z = static_cast<double>(i) * 0.1;
    const double a = nitm::qcalc::q_exp(-10.0, -z);
    const double b = nitm::qcalc::q_exp(-100.0, -z);
    const double c = nitm::qcalc::q_exp(-1000.0, -z);
    CHECK(a >= b);
    CHECK(b >= c);
    CHECK(c >= 1.0);
  }
}

TEST_CASE("midpoint convexity on random triples") {
  nitm::Rng rng(201);
  for (int t = 0; t < 1000; ++t) {
    const double qp = rng.uniform(0.0, 1.0);
    const double a = rng.uniform(-4.0, 4.0);
    const double b = rng.uniform(-4.0, 4.0);
    const double mid = loss_value(qp, 0.5 * (a + b));
    const double chord = 0.5 * (loss_value(qp, a) + loss_value(qp, b));
    CHECK(mid <= chord + 1e-12);
  }
}

TEST_CASE("loss is nonincreasing in the margin") {
  nitm::Rng rng(202);
  for (const double qp : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    for (int t = 0; t < 100; ++t) {
      const double z = rng.uniform(-4.0, 4.0);
      const double step = rng.uniform(0.001, 1.0);
      CHECK(loss_value(qp, z + step) <= loss_value(qp, z) + 1e-15);
    }
  }
}

TEST_CASE("derivative closed-form points") {
  auto d10 = loss_derivative(1.0, 0.0);
  CHECK(d10.lower == doctest::Approx(-1.0));
  CHECK(d10.upper == doctest::Approx(-1.0));
  auto d02 = loss_derivative(0.0, 2.0);
  CHECK(d02.lower == 0.0);
  CHECK(d02.upper == 0.0);
  auto dh = loss_derivative(0.5, 1.0);
  CHECK(dh.lower == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(dh.upper == doctest::Approx(-0.5).epsilon(1e-14));
}

TEST_CASE("hinge kink exposes the full subdifferential") {
  auto k = loss_derivative(0.0, 1.0);
  CHECK(k.lower == -1.0);
  CHECK(k.upper == 0.0);
  CHECK(k.chosen() == 0.0);
  CHECK(loss_derivative_point(0.0, 1.0 - 1e-9) == -1.0);
  CHECK(loss_derivative_point(0.0, 1.0 + 1e-9) == 0.0);
}

TEST_CASE("derivative matches central differences at smooth points") {
  nitm::Rng rng(203);
  for (const double qp : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0}) {
    for (int t = 0; t < 100; ++t) {
      double z = rng.uniform(-4.0, 4.0);
      // stay away from the cutoff boundary where the second derivative jumps
      if (qp < 1.0) {
        const double edge = 1.0 / (1.0 - qp);
        if (std::abs(z - edge) < 0.05) z = edge - 0.1;
      }
      const double h = 1e-6;
      const double fd = (loss_value(qp, z + h) - loss_value(qp, z - h)) / (2.0 * h);
      CHECK(loss_derivative_point(qp, z) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("zero_one_loss indicator semantics") {
  CHECK(zero_one_loss(-0.1) == 1.0);
  CHECK(zero_one_loss(0.1) == 0.0);
  CHECK(zero_one_loss(0.0) == 0.0);
  CHECK(zero_one_loss(-1e-300) == 1.0);
  CHECK_THROWS_AS(zero_one_loss(std::nan("")), std::domain_error);
}
