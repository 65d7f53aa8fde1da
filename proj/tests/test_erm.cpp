#include "fixtures.hpp"

#include "glru/erm.hpp"
#include "glru/error.hpp"
#include "glru/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace glru;

namespace {

dataset one_point(double x, double y, task kind = task::regression) {
  Eigen::MatrixXd m(1, 1);
  m << x;
  Eigen::VectorXd v(1);
  v << y;
  return dataset::from_dense(m, v, kind);
}

}  // namespace

TEST_SUITE("erm") {
  TEST_CASE("primal objective") {
    const dataset ds = synth_dataset(1, 20, 4);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(1)};
    CHECK(primal_objective(ds, lg, vector_t::Zero(4)) == doctest::Approx(std::log(2.0)));
    const objective sq{loss(loss_kind::squared), regularizer::l2(1)};
    CHECK(primal_objective(one_point(1, 1), sq, vector_t::Ones(1)) == doctest::Approx(0.5));
  }

  TEST_CASE("dual objective") {
    const dataset ds = synth_dataset(1, 20, 4);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(1)};
    CHECK(dual_objective(ds, lg, vector_t::Zero(20)) == 0.0);
    vector_t a = vector_t::Constant(20, 0.5);
    a[0] = ds.y()[0] > 0 ? 2.0 : -2.0;
    CHECK(dual_objective(ds, lg, a) == -kInf);
    CHECK(duality_gap(ds, lg, vector_t::Zero(4), vector_t::Zero(20)) == doctest::Approx(std::log(2.0)));
  }

  TEST_CASE("weak duality and agreement with the dense reference") {
    std::mt19937_64 rng(11);
    for (const auto &p : fixture::catalog()) {
      const auto inst = fixture::random_instance(rng, p, 15, 4);
      std::normal_distribution<double> g;
      for (int k = 0; k < 3; ++k) {
        vector_t w(inst.ds.d());
        for (auto &v : w) v = g(rng);
        const vector_t a = make_dual_feasible(inst.ds, inst.obj, dual_from_primal(inst.ds, inst.obj.loss_fn, w));
        const double pr = primal_objective(inst.ds, inst.obj, w);
        const double du = dual_objective(inst.ds, inst.obj, a);
        CAPTURE(p.name());
        CHECK(pr == doctest::Approx(oracle::primal(inst.ref, w)).epsilon(1e-12));
        CHECK(du == doctest::Approx(oracle::dual(inst.ref, a)).epsilon(1e-9));
        CHECK(pr >= du - 1e-10 * std::max(1.0, std::abs(pr)));
      }
    }
  }

  TEST_CASE("KKT map") {
    const loss lg(loss_kind::logistic);
    vector_t y(2), m(2);
    y << 1, -1;
    m << 0, 0;
    CHECK(dual_from_margins(y, lg, m)[0] == doctest::Approx(0.5));
    const loss sq(loss_kind::squared);
    vector_t yr(1), mr(1);
    yr << 0.7;
    mr << 0.7;
    CHECK(dual_from_margins(yr, sq, mr)[0] == 0.0);
  }

  TEST_CASE("one-point squared problem has the closed-form optimum") {
    const objective sq{loss(loss_kind::squared), regularizer::l2(1)};
    const trained_model m = train(one_point(1, 1), sq, fixture::tight(1e-12));
    CHECK(m.w[0] == doctest::Approx(0.5).epsilon(1e-6));
  }

  TEST_CASE("separable two-point logistic problem") {
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    const dataset ds = dataset::from_dense(x, Eigen::Vector2d(1, -1), task::classification);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(1)};
    const trained_model m = train(ds, lg);
    CHECK(m.relative_gap <= 1e-6);
    CHECK(m.w[0] > 0.0);
    double best = kInf, arg = 0.0;
    for (int k = -4000; k <= 4000; ++k) {
      const double w = k * 1e-3;
      const double p = primal_objective(ds, lg, vector_t::Constant(1, w));
      if (p < best) best = p, arg = w;
    }
    CHECK(m.w[0] == doctest::Approx(arg).epsilon(2e-3));
    CHECK(m.cache.primal() <= best + 1e-6);
  }

  TEST_CASE("solver reaches tight gaps on every catalog pair") {
    std::mt19937_64 rng(12);
    for (const auto &p : fixture::catalog()) {
      CAPTURE(p.name());
      const auto inst = fixture::random_instance(rng, p, 40, 6);
      const trained_model m = train(inst.ds, inst.obj, fixture::tight(1e-11));
      CHECK(m.relative_gap <= 1e-11);
      // Cache coherence.
      const precompute_cache c = build_cache(inst.ds, inst.obj, m.w, m.alpha);
      CHECK(m.cache.loss_sum == doctest::Approx(c.loss_sum).epsilon(1e-10));
      CHECK(m.cache.reg_sum == doctest::Approx(c.reg_sum).epsilon(1e-10));
      CHECK(m.cache.loss_conj_sum == doctest::Approx(c.loss_conj_sum).epsilon(1e-10).scale(1.0));
      CHECK(m.cache.reg_conj_sum == doctest::Approx(c.reg_conj_sum).epsilon(1e-10).scale(1.0));
      CHECK((m.cache.xw - inst.x * m.w).norm() <= 1e-10 * (1.0 + m.cache.xw.norm()));
      CHECK((m.cache.xt_alpha - inst.x.transpose() * m.alpha).norm() <=
            1e-10 * (1.0 + m.cache.xt_alpha.norm()));
      // The dual iterate is feasible under the dense reference.
      CHECK(oracle::dual(inst.ref, m.alpha) > -oracle::inf);
      // KKT consistency: w_j in the conjugate subgradient at (1/n) X_j' alpha.
      const double n = static_cast<double>(inst.ds.n());
      for (index_t j = 0; j < inst.ds.d(); ++j) {
        const double v = m.cache.xt_alpha[j] / n;
        if (p.reg.kind == reg_kind::l1 && !(inst.ref.reg.free && *inst.ref.reg.free == j)) {
          // A nonzero l1 weight sits where |v| reaches lambda, with matching sign.
          if (std::abs(m.w[j]) > 1e-6) {
            CHECK(std::abs(v) == doctest::Approx(p.reg.lambda).epsilon(1e-4));
            CHECK(m.w[j] * v > 0.0);
          }
          continue;
        }
        const interval s = inst.obj.reg.coord(j).conj_subgrad(v);
        const double slack = 1e-4 * (1.0 + std::abs(m.w[j]));
        CHECK(m.w[j] >= s.lo - slack);
        CHECK(m.w[j] <= s.hi + slack);
      }
    }
  }

  TEST_CASE("warm start from the optimum needs at most one iteration") {
    const dataset ds = synth_dataset(2, 60, 5);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(0.1)};
    const trained_model m = train(ds, lg, fixture::tight(1e-9));
    train_config c;
    c.warm_start = m.w;
    CHECK(train(ds, lg, c).iterations <= 1);
  }

  TEST_CASE("stop predicates") {
    const dataset ds = synth_dataset(3, 60, 5);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(0.1)};
    const trained_model always = train_with_stop_predicate(ds, lg, {}, [](const iterate_view &) { return true; });
    CHECK(always.iterations == 0);
    CHECK(always.reason == stop_reason::predicate);
    const trained_model never = train_with_stop_predicate(ds, lg, {}, [](const iterate_view &) { return false; });
    const trained_model plain = train(ds, lg);
    CHECK(never.reason == stop_reason::relative_gap);
    CHECK(never.iterations == plain.iterations);
    CHECK((never.w - plain.w).norm() == 0.0);
    const vector_t x = ds.row(0);
    const double xn2 = x.squaredNorm();
    const trained_model predicate_model = train_with_stop_predicate(ds, lg, {}, [&](const iterate_view &it) {
      const double m = x.dot(it.w);
      return it.gap < 0.1 * m * m / (2.0 * xn2);
    });
    CHECK(predicate_model.iterations <= plain.iterations);
  }

  TEST_CASE("intercept keeps the dual balanced") {
    const dataset ds = synth_dataset(4, 50, 4).with_intercept_column();
    const objective lg{loss(loss_kind::logistic), regularizer(reg_kind::l2, 0.1, 0.0, index_t{4})};
    const trained_model m = train(ds, lg, fixture::tight(1e-10));
    CHECK(std::abs(m.alpha.sum()) <= 1e-10);
    CHECK(m.relative_gap <= 1e-10);
  }

  TEST_CASE("iteration limit raises a convergence error") {
    const dataset ds = synth_dataset(5, 60, 5);
    const objective lg{loss(loss_kind::logistic), regularizer::l2(1e-3)};
    train_config c;
    c.rel_gap_tol = 1e-14;
    c.max_iter = 1;
    try {
      train(ds, lg, c);
      FAIL("expected a convergence error");
    } catch (const convergence_error &e) {
      CHECK(e.best_relative_gap() > 0.0);
    }
  }
}
