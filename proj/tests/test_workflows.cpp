#include "oracles.hpp"

#include "glru/error.hpp"
#include "glru/synth.hpp"
#include "glru/workflows.hpp"

#include <doctest.h>

#include <sstream>

using namespace glru;

namespace {

objective logistic_l2(double lambda) { return {loss(loss_kind::logistic), regularizer::l2(lambda)}; }

loocv_config tight_loocv(bound_kind b = bound_kind::primal_scb) {
  loocv_config c;
  c.train.rel_gap_tol = 1e-9;
  c.bound = b;
  return c;
}

std::vector<double> predictions(const loocv_report &r) {
  std::vector<double> out;
  for (const auto &f : r.folds) out.push_back(f.predicted);
  return out;
}

}  // namespace

TEST_SUITE("workflows") {
  TEST_CASE("two separated points") {
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    const dataset ds = dataset::from_dense(x, Eigen::Vector2d(1, -1), task::classification);
    const objective o = logistic_l2(0.01);
    // Each fold trains on the other point alone, whose optimum has w > 0.
    Eigen::MatrixXd x1(1, 1);
    x1 << -1;
    const trained_model fold = train(dataset::from_dense(x1, Eigen::VectorXd::Constant(1, -1), task::classification), o);
    CHECK(fold.w[0] > 0.0);
    CHECK(loocv_naive(ds, o, tight_loocv()).error_count == 0);
    CHECK(loocv_glru(ds, o, tight_loocv()).error_count == 0);
  }

  TEST_CASE("a single-instance class is predicted from the other class alone") {
    const dataset base = synth_dataset(3, 20, 3, 0.0, 4.0);
    Eigen::MatrixXd x = base.dense();
    Eigen::VectorXd y = Eigen::VectorXd::Ones(20);
    y[7] = -1;
    const dataset ds = dataset::from_dense(x, y, task::classification);
    const objective o = logistic_l2(0.1);
    const loocv_report r = loocv_naive(ds, o, tight_loocv());
    const index_t rm[] = {7};
    const trained_model m = train(ds.without_instances(rm), o, tight_loocv().train);
    CHECK(r.folds[7].predicted == predicted_label(ds.row_dot(7, m.w)));
  }

  TEST_CASE("error count does not depend on instance order") {
    const dataset ds = synth_dataset(4, 40, 4, 0.0, 1.0);
    std::vector<index_t> perm(40);
    std::iota(perm.begin(), perm.end(), index_t{0});
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(1));
    const objective o = logistic_l2(0.05);
    CHECK(loocv_naive(ds, o, tight_loocv()).error_count ==
          loocv_naive(ds.select_instances(perm), o, tight_loocv()).error_count);
  }

  TEST_CASE("screening is safe and skips work at large lambda") {
    const dataset ds = synth_dataset(5, 60, 5, 0.0, 3.0);
    for (double lambda : {10.0, 1.0, 0.01}) {
      const objective o = logistic_l2(lambda);
      const loocv_report naive = loocv_naive(ds, o, tight_loocv());
      for (bound_kind b : {bound_kind::primal_scb, bound_kind::dual_scb}) {
        const loocv_report g = loocv_glru(ds, o, tight_loocv(b));
        CAPTURE(lambda);
        CHECK(g.error_count == naive.error_count);
        int trained = 0;
        for (std::size_t i = 0; i < g.folds.size(); ++i) {
          if (g.folds[i].status == fold_status::trained) ++trained;
          else CHECK(g.folds[i].predicted == naive.folds[i].predicted);
        }
        CHECK(trained == g.trainings_performed);
      }
    }
    CHECK(loocv_glru(ds, logistic_l2(100.0), tight_loocv()).trainings_performed == 0);
  }

  TEST_CASE("screening becomes vacuous as lambda shrinks on overlapping classes") {
    const dataset ds = synth_dataset(5, 60, 5, 0.0, 1.0);
    int previous = -1;
    for (double lambda : {1.0, 1e-2, 1e-4}) {
      const int t = loocv_glru(ds, logistic_l2(lambda), tight_loocv()).trainings_performed;
      CHECK(t >= previous);
      previous = t;
    }
    CHECK(previous == 60);
  }

  TEST_CASE("warm start does not change the error count") {
    const dataset ds = synth_dataset(6, 50, 4, 0.0, 1.0);
    loocv_config cold = tight_loocv();
    cold.warm_start = false;
    CHECK(loocv_naive(ds, logistic_l2(0.1), tight_loocv()).error_count ==
          loocv_naive(ds, logistic_l2(0.1), cold).error_count);
  }

  TEST_CASE("results do not depend on the thread count") {
    const dataset ds = synth_dataset(7, 50, 4, 0.0, 1.0);
    loocv_config many = tight_loocv(bound_kind::dual_scb);
    many.threads = 3;
    const auto a = loocv_glru(ds, logistic_l2(0.2), tight_loocv(bound_kind::dual_scb));
    const auto b = loocv_glru(ds, logistic_l2(0.2), many);
    CHECK(a.error_count == b.error_count);
    CHECK(predictions(a) == predictions(b));
    CHECK(a.trainings_performed == b.trainings_performed);
  }

  TEST_CASE("bound assumptions are checked up front") {
    const dataset ds = synth_dataset(8, 20, 3);
    const objective l1{loss(loss_kind::logistic), regularizer(reg_kind::l1, 0.1, 0.0, {})};
    CHECK_THROWS_AS(loocv_glru(ds, l1, tight_loocv(bound_kind::primal_scb)), assumption_error);
    CHECK_NOTHROW(loocv_glru(ds, l1, tight_loocv(bound_kind::dual_scb)));
    const dataset reg = dataset::from_dense(ds.dense(), ds.y(), task::regression);
    CHECK_THROWS_AS(loocv_naive(reg, logistic_l2(1), tight_loocv()), validation_error);
  }

  TEST_CASE("early stopping agrees with full training") {
    const dataset ds = synth_dataset(9, 60, 5, 0.0, 1.5);
    for (bound_kind b : {bound_kind::primal_scb, bound_kind::dual_scb}) {
      loocv_config c = tight_loocv(b);
      c.early_stop = true;
      const auto naive = loocv_naive(ds, logistic_l2(0.05), tight_loocv());
      const auto fast = loocv_glru(ds, logistic_l2(0.05), c);
      CHECK(fast.error_count == naive.error_count);
      for (std::size_t i = 0; i < fast.folds.size(); ++i)
        if (fast.folds[i].early_stopped) CHECK(fast.folds[i].predicted == naive.folds[i].predicted);
    }
  }

  TEST_CASE("Sherman-Morrison downdate matches a direct inverse") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> g;
    for (int k = 0; k < 20; ++k) {
      const index_t d = 2 + static_cast<index_t>(rng() % 19);
      Eigen::MatrixXd a(d, d);
      for (auto &v : a.reshaped()) v = g(rng);
      const Eigen::MatrixXd h = a * a.transpose() + Eigen::MatrixXd::Identity(d, d) * d;
      vector_t x(d);
      for (auto &v : x) v = g(rng);
      const double s = 0.5 / x.squaredNorm();
      const Eigen::MatrixXd sm = sherman_morrison_downdate(h.inverse(), x, s);
      const Eigen::MatrixXd direct = oracle::direct_downdate_inverse(h, x, s);
      CHECK((sm - direct).norm() <= 1e-6 * direct.norm());
    }
  }

  TEST_CASE("one Newton step is exact for squared loss") {
    const dataset ds = synth_dataset(11, 40, 5, 0.0, 1.0);
    const objective o{loss(loss_kind::squared), regularizer::l2(0.1)};
    const auto naive = loocv_naive(ds, o, tight_loocv());
    const auto approx = loocv_approx(ds, o, tight_loocv());
    CHECK(approx.error_count == naive.error_count);
    CHECK(predictions(approx) == predictions(naive));
    CHECK(approx.trainings_performed == 0);
    const objective en{loss(loss_kind::logistic), regularizer::elastic_net(0.1, 0.1)};
    CHECK_THROWS_AS(loocv_approx(ds, en, tight_loocv()), assumption_error);
  }

  TEST_CASE("stepwise removes the spurious feature first") {
    const noisy_split sp = synth_dominant_noise(3, 200, 200, 8);
    stepwise_config c;
    c.train.rel_gap_tol = 1e-9;
    const objective o = logistic_l2(0.05);
    const auto naive = stepwise_naive(sp.train, sp.valid, o, c);
    REQUIRE(!naive.removed_order.empty());
    CHECK(naive.removed_order.front() == 0);
    const auto g = stepwise_glru(sp.train, sp.valid, o, c);
    CHECK(g.final_set == naive.final_set);
    CHECK(g.removed_order == naive.removed_order);
    CHECK(g.steps.front().candidates_trained < 8);
    for (const auto &st : g.steps) {
      CHECK(st.candidates_trained + st.candidates_screened == static_cast<int>(st.candidates.size()));
      for (const auto &cand : st.candidates)
        if (cand.trained) CHECK(cand.incorrect <= cand.error);
    }
  }

  TEST_CASE("stepwise with one feature") {
    const dataset tr = synth_dataset(12, 30, 1);
    const dataset va = synth_dataset(13, 30, 1);
    const auto r = stepwise_naive(tr, va, logistic_l2(0.1), {});
    CHECK(r.steps.size() <= 2);
    const auto g = stepwise_glru(tr, va, logistic_l2(0.1), {});
    CHECK(g.final_set == r.final_set);
  }

  TEST_CASE("stepwise ties go to the lowest feature index") {
    // Two identical useless columns: removing either gives the same error.
    const dataset base = synth_dataset(14, 80, 3, 0.0, 3.0);
    Eigen::MatrixXd x(80, 5);
    x << base.dense(), Eigen::MatrixXd::Zero(80, 2);
    const dataset tr = dataset::from_dense(x, base.y(), task::classification);
    const dataset vbase = synth_dataset(15, 80, 3, 0.0, 3.0);
    Eigen::MatrixXd xv(80, 5);
    xv << vbase.dense(), Eigen::MatrixXd::Zero(80, 2);
    const dataset va = dataset::from_dense(xv, vbase.y(), task::classification);
    stepwise_config c;
    c.max_steps = 1;
    const auto r = stepwise_naive(tr, va, logistic_l2(0.1), c);
    const auto g = stepwise_glru(tr, va, logistic_l2(0.1), c);
    CHECK(r.removed_order == g.removed_order);
    for (const auto &cand : r.steps.front().candidates)
      if (cand.error < r.steps.front().e_null) {
        CHECK(r.steps.front().removed.value() == cand.feature);
        break;
      }
  }

  TEST_CASE("stepwise never removes the intercept") {
    const noisy_split sp = synth_dominant_noise(4, 100, 100, 4);
    const dataset tr = sp.train.with_intercept_column();
    const dataset va = sp.valid.with_intercept_column();
    const objective o{loss(loss_kind::logistic), regularizer(reg_kind::l2, 0.05, 0.0, index_t{4})};
    stepwise_config c;
    c.bound = bound_kind::dual_scb;
    const auto r = stepwise_naive(tr, va, o, c);
    const auto g = stepwise_glru(tr, va, o, c);
    CHECK(g.final_set == r.final_set);
    CHECK(std::find(r.final_set.begin(), r.final_set.end(), index_t{4}) != r.final_set.end());
    for (const auto &st : r.steps)
      for (const auto &cand : st.candidates) CHECK(cand.feature != 4);
  }

  TEST_CASE("tightness study") {
    const dataset ds = synth_dataset(16, 300, 30);
    tightness_config c;
    c.max_mods = 5;
    c.lambdas = {1.0, 0.1};
    c.train.rel_gap_tol = 1e-10;
    const auto r = tightness_study(ds, logistic_l2(1.0), c);
    CHECK(r.n_test == 30);
    CHECK(r.d_train == 25);
    CHECK(r.rows.size() == 2u * 4u * 6u * 2u);
    for (const auto &row : r.rows) {
      CHECK(row.rate >= 0.0);
      CHECK(row.rate <= 1.0);
      if (row.count == 0) CHECK(row.rate >= 0.9);
    }
    std::ostringstream csv;
    write_tightness_csv(csv, r);
    CHECK(csv.str().rfind("lambda,kind,count,bound,rate\n", 0) == 0);
    const objective l1{loss(loss_kind::logistic), regularizer(reg_kind::l1, 0.05, 0.0, {})};
    tightness_config one = c;
    one.lambdas = {0.05};
    for (const auto &row : tightness_study(ds, l1, one).rows) CHECK(row.bound == bound_kind::dual_scb);
  }
}
