#include "oracles.hpp"

#include "glru/convex.hpp"
#include "glru/error.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace glru;

namespace {

std::vector<loss> all_losses() {
  return {loss(loss_kind::squared), loss(loss_kind::huber, 0.7), loss(loss_kind::squared_hinge),
          loss(loss_kind::smoothed_hinge, 1.0), loss(loss_kind::smoothed_hinge, 0.5),
          loss(loss_kind::logistic)};
}

std::vector<double> labels_for(const loss &l) {
  if (l.for_classification()) return {1.0, -1.0};
  return {1.0, -0.4, 2.0};
}

}  // namespace

TEST_SUITE("convex") {
  TEST_CASE("loss values") {
    CHECK(loss(loss_kind::logistic).value(1, 0) == doctest::Approx(std::log(2.0)));
    CHECK(loss(loss_kind::squared).value(1, 1) == 0.0);
    CHECK(loss(loss_kind::squared_hinge).value(-1, -2) == 0.0);
  }

  TEST_CASE("loss subgradients") {
    CHECK(loss(loss_kind::logistic).subgrad(1, 0) == interval::point(-0.5));
    const interval s = loss(loss_kind::smoothed_hinge, 1.0).subgrad(1, 1);
    CHECK(s.lo == 0.0);
    CHECK(s.hi == 0.0);
    CHECK(loss(loss_kind::squared).subgrad(2, 5) == interval::point(3.0));
  }

  TEST_CASE("loss conjugates") {
    const loss lg(loss_kind::logistic);
    CHECK(lg.conj(1, 0.0) == 0.0);
    CHECK(lg.conj(1, -0.5) == doctest::Approx(-std::log(2.0)).epsilon(1e-12));
    const double numeric = oracle::golden_max([&](double t) { return -0.5 * t - lg.value(1, t); }, -50, 50);
    CHECK(numeric == doctest::Approx(-std::log(2.0)).epsilon(1e-8));
    CHECK(loss(loss_kind::squared_hinge).conj(1, 0.5) == kInf);
  }

  TEST_CASE("smoothness constants and conjugate domains") {
    CHECK(loss(loss_kind::squared).smoothness() == 1.0);
    CHECK(loss(loss_kind::huber, 2.0).smoothness() == 1.0);
    CHECK(loss(loss_kind::squared_hinge).smoothness() == 2.0);
    CHECK(loss(loss_kind::smoothed_hinge, 1.0).smoothness() == 1.0);
    CHECK(loss(loss_kind::logistic).smoothness() == 0.25);
    CHECK(loss(loss_kind::logistic).conj_domain(1) == interval{-1.0, 0.0});
    CHECK(loss(loss_kind::logistic).conj_domain(-1) == interval{0.0, 1.0});
  }

  TEST_CASE("regularizer values") {
    CHECK(regularizer::l2(2).coord(0).value(3) == 9.0);
    CHECK(regularizer::elastic_net(2, 1).coord(0).value(-1) == 2.0);
    const regularizer with_b(reg_kind::l2, 1.0, 0.0, index_t{4});
    CHECK(with_b.coord(4).value(123.0) == 0.0);
  }

  TEST_CASE("regularizer conjugates") {
    CHECK(regularizer::l2(1).coord(0).conj(2) == 2.0);
    const regularizer l1(reg_kind::l1, 0.5, 0.0, index_t{3});
    CHECK(l1.coord(0).conj(0.4) == 0.0);
    CHECK(l1.coord(3).conj(0.1) == kInf);
    CHECK(l1.coord(0).conj(0.6) == kInf);
  }

  TEST_CASE("regularizer conjugate subgradients") {
    CHECK(regularizer::l2(4).coord(0).conj_subgrad(2) == interval::point(0.5));
    const regularizer l1(reg_kind::l1, 1.0, 0.0, index_t{2});
    CHECK(l1.coord(0).conj_subgrad(1.0) == interval{0.0, kInf});
    CHECK(l1.coord(0).conj_subgrad(-1.0) == interval{-kInf, 0.0});
    CHECK(l1.coord(0).conj_subgrad(0.3) == interval::point(0.0));
    CHECK(l1.coord(2).conj_subgrad(0.0) == interval::whole());
    // Strongly convex coordinates always have finite conjugate subgradients.
    for (double s : {-5.0, -0.01, 0.0, 0.2, 7.0}) {
      CHECK(regularizer::elastic_net(0.5, 0.3).coord(0).conj_subgrad(s).bounded());
      CHECK(regularizer::l2(0.5).coord(0).conj_subgrad(s).bounded());
    }
  }

  TEST_CASE("Fenchel-Young holds with equality at subgradient pairs") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-3, 3);
    for (const loss &l : all_losses())
      for (double y : labels_for(l))
        for (int k = 0; k < 50; ++k) {
          const double t = u(rng);
          const double s = l.derivative(y, t);
          CHECK(l.value(y, t) + l.conj(y, s) == doctest::Approx(t * s).epsilon(1e-10).scale(1.0));
          const double other = u(rng);
          CHECK(l.value(y, t) + l.conj(y, other) >= t * other - 1e-12);
        }
  }

  TEST_CASE("closed-form conjugates match the Legendre transform") {
    std::mt19937_64 rng(5);
    for (const loss &l : all_losses()) {
      const oracle::loss_def def{l.kind(), l.gamma()};
      for (double y : labels_for(l)) {
        const interval dom = l.conj_domain(y);
        std::uniform_real_distribution<double> u(std::max(dom.lo, -4.0), std::min(dom.hi, 4.0));
        for (int k = 0; k < 20; ++k) {
          const double s = u(rng);
          CHECK(l.conj(y, s) == doctest::Approx(oracle::loss_conj(def, y, s)).epsilon(1e-9).scale(1.0));
        }
      }
    }
  }

  TEST_CASE("central differences agree with derivatives") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-3, 3);
    for (const loss &l : all_losses())
      for (double y : labels_for(l))
        for (int k = 0; k < 30; ++k) {
          const double t = u(rng), h = 1e-6;
          const double fd = (l.value(y, t + h) - l.value(y, t - h)) / (2 * h);
          CHECK(fd == doctest::Approx(l.derivative(y, t)).epsilon(1e-5).scale(1.0));
        }
  }

  TEST_CASE("min-abs selection") {
    CHECK(select_min_abs({-1.0, 2.0}) == 0.0);
    CHECK(select_min_abs({0.5, 2.0}) == 0.5);
    CHECK(select_min_abs({-3.0, -0.25}) == -0.25);
    CHECK(select_min_abs({0.0, kInf}) == 0.0);
  }

  TEST_CASE("minlin and maxlin") {
    const std::vector<double> a{0, 0}, b{1, 1}, c{-2, 3};
    CHECK(minlin(a, b, c) == -2.0);
    CHECK(maxlin(a, b, c) == 3.0);
    const std::vector<double> inf_lo{-kInf, -kInf}, inf_hi{kInf, kInf}, zero{0, 0};
    CHECK(minlin(inf_lo, inf_hi, zero) == 0.0);
    CHECK(maxlin(inf_lo, inf_hi, zero) == 0.0);
    const std::vector<double> v{0.3, -2.0}, w{1.5, 4.0};
    CHECK(minlin(v, v, w) == doctest::Approx(0.3 * 1.5 - 8.0));
    CHECK(maxlin(v, v, w) == doctest::Approx(0.3 * 1.5 - 8.0));

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 200; ++k) {
      const std::size_t d = 1 + rng() % 6;
      std::vector<double> lo(d), hi(d), cc(d);
      for (std::size_t j = 0; j < d; ++j) {
        const double p = u(rng), q = u(rng);
        lo[j] = std::min(p, q);
        hi[j] = std::max(p, q);
        cc[j] = rng() % 5 == 0 ? 0.0 : u(rng);
        if (rng() % 7 == 0 && cc[j] == 0.0) lo[j] = -kInf;
      }
      const auto [mn, mx] = oracle::box_corner_range(lo, hi, cc);
      CHECK(minlin(lo, hi, cc) == doctest::Approx(mn).epsilon(1e-12).scale(1.0));
      CHECK(maxlin(lo, hi, cc) == doctest::Approx(mx).epsilon(1e-12).scale(1.0));
    }
  }

  TEST_CASE("bad hyperparameters are rejected") {
    CHECK_THROWS_AS(loss(loss_kind::huber, 0.0), validation_error);
    CHECK_THROWS_AS(regularizer::l2(0.0), validation_error);
    CHECK_THROWS_AS(regularizer::elastic_net(1.0, -1.0), validation_error);
    CHECK_THROWS_AS(loss::parse("hinge"), validation_error);
  }
}
