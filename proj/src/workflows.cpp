#include "glru/workflows.hpp"

#include "glru/error.hpp"
#include "glru/gapfast.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

namespace glru {

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

// Runs fn(0..count-1) on up to `threads` workers. Each call writes only its
// own slot of caller-owned storage, so results do not depend on scheduling.
// The exception of the lowest failing index is rethrown.
template <class F>
void parallel_for(index_t count, unsigned threads, F &&fn) {
  const index_t workers = std::max<index_t>(1, std::min<index_t>(threads, count));
  if (workers <= 1) {
    for (index_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<index_t> next{0};
  std::mutex mu;
  index_t failed_at = count;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (index_t t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (index_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(mu);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  for (auto &th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

[[noreturn]] void rethrow_with_context(const std::string &where) {
  try {
    throw;
  } catch (const error &e) {
    throw error(e.code(), where + ": " + e.what());
  }
}

void require_classification(const dataset &ds, const std::string &what) {
  if (ds.kind() != task::classification)
    throw validation_error(what + " needs a classification dataset");
}

void require_bound(const objective &obj, index_t d, bound_kind kind) {
  if (kind == bound_kind::primal_scb && !(obj.reg.strong_convexity(d) > 0.0))
    throw assumption_error("primal-scb needs a strongly convex regularizer on every coordinate");
  if (kind == bound_kind::dual_scb && !(obj.loss_fn.smoothness() > 0.0))
    throw assumption_error("dual-scb needs a smooth loss");
}

double label_value(label l) { return l == label::positive ? 1.0 : -1.0; }

int finish_loocv(const dataset &ds, loocv_report &r) {
  int errors = 0;
  int trained = 0;
  for (index_t i = 0; i < ds.n(); ++i) {
    const auto &f = r.folds[static_cast<std::size_t>(i)];
    if (f.predicted != ds.y()[i]) ++errors;
    if (f.status == fold_status::trained) ++trained;
  }
  r.error_count = errors;
  r.trainings_performed = trained;
  return errors;
}

// Sum over i of a per-instance interval term against a column, split into a
// finite part and a count of infinite terms, so that one instance can be
// taken out in O(1).
struct range_sum {
  double lo_finite = 0.0;
  double hi_finite = 0.0;
  index_t lo_inf = 0;
  index_t hi_inf = 0;

  void add(const interval &box, double c, int sign) {
    const double lo = minlin_term(box, c);
    const double hi = maxlin_term(box, c);
    if (std::isinf(lo)) lo_inf += sign;
    else lo_finite += sign * lo;
    if (std::isinf(hi)) hi_inf += sign;
    else hi_finite += sign * hi;
  }
  interval value() const { return {lo_inf > 0 ? -kInf : lo_finite, hi_inf > 0 ? kInf : hi_finite}; }
};

interval loss_box(const loss &f, double y) {
  const interval dom = f.conj_domain(y);
  return {-dom.hi, -dom.lo};
}

}  // namespace

int count_errors(const dataset &ds, const vector_t &w) {
  const vector_t m = ds.rows() * w;
  int e = 0;
  for (index_t i = 0; i < ds.n(); ++i)
    if (predicted_label(m[i]) != ds.y()[i]) ++e;
  return e;
}

std::string to_string(fold_status s) {
  switch (s) {
    case fold_status::determined_correct: return "determined-correct";
    case fold_status::determined_error: return "determined-error";
    case fold_status::trained: return "trained";
    case fold_status::approximated: return "approximated";
  }
  return "trained";
}

// ---------------------------------------------------------------------------
// LOOCV

loocv_report loocv_naive(const dataset &ds, const objective &obj, const loocv_config &cfg) {
  require_classification(ds, "LOOCV");
  return loocv_naive(ds, obj, cfg, train(ds, obj, cfg.train));
}

loocv_report loocv_naive(const dataset &ds, const objective &obj, const loocv_config &cfg,
                         const trained_model &full) {
  require_classification(ds, "LOOCV");
  if (ds.n() < 2) throw validation_error("LOOCV needs at least two instances");
  const auto t0 = clock_type::now();
  loocv_report r;
  r.method = "naive";
  r.folds.resize(static_cast<std::size_t>(ds.n()));
  parallel_for(ds.n(), cfg.threads, [&](index_t i) {
    try {
      const index_t rm[] = {i};
      const dataset di = ds.without_instances(rm);
      train_config tc = cfg.train;
      if (cfg.warm_start) tc.warm_start = full.w;
      const auto t1 = clock_type::now();
      const trained_model m = train(di, obj, tc);
      auto &f = r.folds[static_cast<std::size_t>(i)];
      f.train_seconds = seconds_since(t1);
      f.iterations = m.iterations;
      f.status = fold_status::trained;
      f.predicted = predicted_label(ds.row_dot(i, m.w));
    } catch (...) {
      rethrow_with_context("fold " + std::to_string(i));
    }
  });
  finish_loocv(ds, r);
  r.total_seconds = seconds_since(t0);
  return r;
}

loocv_report loocv_glru(const dataset &ds, const objective &obj, const loocv_config &cfg) {
  require_classification(ds, "LOOCV");
  require_bound(obj, ds.d(), cfg.bound);
  return loocv_glru(ds, obj, cfg, train(ds, obj, cfg.train));
}

loocv_report loocv_glru(const dataset &ds, const objective &obj, const loocv_config &cfg,
                        const trained_model &full) {
  require_classification(ds, "LOOCV");
  require_bound(obj, ds.d(), cfg.bound);
  if (ds.n() < 2) throw validation_error("LOOCV needs at least two instances");
  const auto t0 = clock_type::now();
  const index_t n = ds.n();
  const index_t d = ds.d();
  const double n_new = static_cast<double>(n - 1);
  const bool l2_fast = obj.reg.is_plain_l2();
  const double lambda = obj.reg.strong_convexity(d);
  const bool dual = cfg.bound == bound_kind::dual_scb;

  std::vector<reg_coord> coords;
  for (index_t j = 0; j < d; ++j) coords.push_back(obj.reg.coord(j));

  std::vector<range_sum> ranges;
  if (dual && cfg.tighten) {
    ranges.resize(static_cast<std::size_t>(d));
    for (index_t i = 0; i < n; ++i) {
      const interval box = loss_box(obj.loss_fn, ds.y()[i]);
      for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it)
        ranges[static_cast<std::size_t>(it.col())].add(box, it.value(), +1);
    }
  }

  // Dual-SCB for instance i, given X^{(-i)}'alpha on the support of x_i.
  auto dual_bound = [&](index_t i, auto &&xt_alpha_at, auto &&col_norm_at,
                        auto &&loss_range_at, double r_d) {
    double lo = 0.0, hi = 0.0;
    for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it) {
      const index_t j = it.col();
      const reg_coord &c = coords[static_cast<std::size_t>(j)];
      const interval f =
          f_bounds_core(xt_alpha_at(j, it.value()), col_norm_at(j, it.value()), r_d, n_new, c,
                        loss_range_at(j, it.value()));
      const interval box = primal_box_entry(c, f, n_new);
      lo += minlin_term(box, it.value());
      hi += maxlin_term(box, it.value());
    }
    if (std::isnan(lo)) lo = -kInf;
    if (std::isnan(hi)) hi = kInf;
    return interval{lo, hi};
  };

  loocv_report r;
  r.method = "glru";
  r.folds.resize(static_cast<std::size_t>(n));
  std::vector<double> gap_seconds(static_cast<std::size_t>(n), 0.0);

  parallel_for(n, cfg.threads, [&](index_t i) {
    try {
      auto &f = r.folds[static_cast<std::size_t>(i)];
      const double y = ds.y()[i];
      const double a = full.alpha[i];
      const interval own_box = loss_box(obj.loss_fn, y);

      const auto tg = clock_type::now();
      const index_t rm[] = {i};
      const gap_certificate cert =
          l2_fast ? gap_loocv_l2(full, ds, obj, i)
                  : gap_instance_removal(full, ds, obj, rm, nullptr, false).cert;
      interval bound;
      if (!dual) {
        bound = predict_bounds_primal_scb(full.cache.xw[i], ds.row_norm(i), radius_primal(cert));
      } else {
        auto xa = [&](index_t j, double x) { return full.cache.xt_alpha[j] - a * x; };
        auto cn = [&](index_t j, double x) {
          const double c2 = ds.col_norm(j) * ds.col_norm(j);
          return std::sqrt(std::max(0.0, c2 - x * x));
        };
        auto lr = [&](index_t j, double x) -> std::optional<interval> {
          if (!cfg.tighten) return std::nullopt;
          range_sum s = ranges[static_cast<std::size_t>(j)];
          s.add(own_box, x, -1);
          return s.value();
        };
        bound = dual_bound(i, xa, cn, lr, radius_dual(cert));
      }
      gap_seconds[static_cast<std::size_t>(i)] = seconds_since(tg);
      f.bound = bound;

      const label lab = label_determination(bound);
      if (lab != label::undetermined) {
        f.predicted = label_value(lab);
        f.status = f.predicted == y ? fold_status::determined_correct
                                    : fold_status::determined_error;
        return;
      }

      const dataset di = ds.without_instances(rm);
      train_config tc = cfg.train;
      if (cfg.warm_start) tc.warm_start = full.w;
      const auto t1 = clock_type::now();
      trained_model m;
      label stopped_label = label::undetermined;
      if (cfg.early_stop) {
        stop_predicate stop;
        if (!dual) {
          stop = [&](const iterate_view &v) {
            const double g = std::max(v.gap, 0.0);
            const interval b = predict_bounds_primal_scb(ds.row_dot(i, v.w), ds.row_norm(i),
                                                         std::sqrt(2.0 * g / lambda));
            stopped_label = label_determination(b);
            return stopped_label != label::undetermined;
          };
        } else {
          std::vector<std::optional<interval>> ranges_i;
          if (cfg.tighten)
            for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it)
              ranges_i.push_back(column_loss_range(di, obj.loss_fn, it.col()));
          stop = [&, ranges_i](const iterate_view &v) {
            const double r_d = std::sqrt(2.0 * n_new * obj.loss_fn.smoothness() *
                                         std::max(v.gap, 0.0));
            std::size_t k = 0;
            auto xa = [&](index_t j, double) { return di.cols().col(j).dot(v.alpha); };
            auto cn = [&](index_t j, double) { return di.col_norm(j); };
            auto lr = [&](index_t, double) -> std::optional<interval> {
              return cfg.tighten ? ranges_i[k++] : std::nullopt;
            };
            stopped_label = label_determination(dual_bound(i, xa, cn, lr, r_d));
            return stopped_label != label::undetermined;
          };
        }
        m = train_with_stop_predicate(di, obj, tc, stop);
      } else {
        m = train(di, obj, tc);
      }
      f.train_seconds = seconds_since(t1);
      f.iterations = m.iterations;
      f.status = fold_status::trained;
      f.early_stopped = m.reason == stop_reason::predicate;
      f.predicted = f.early_stopped ? label_value(stopped_label)
                                    : predicted_label(ds.row_dot(i, m.w));
    } catch (...) {
      rethrow_with_context("fold " + std::to_string(i));
    }
  });
  finish_loocv(ds, r);
  r.gap_seconds_total = std::accumulate(gap_seconds.begin(), gap_seconds.end(), 0.0);
  r.total_seconds = seconds_since(t0);
  return r;
}

Eigen::MatrixXd sherman_morrison_downdate(const Eigen::MatrixXd &h_inv, const vector_t &x,
                                          double s) {
  const vector_t u = h_inv * x;
  const vector_t v = h_inv.transpose() * x;
  const double denom = 1.0 - s * x.dot(u);
  return h_inv + (s / denom) * u * v.transpose();
}

loocv_report loocv_approx(const dataset &ds, const objective &obj, const loocv_config &cfg) {
  require_classification(ds, "LOOCV");
  return loocv_approx(ds, obj, cfg, train(ds, obj, cfg.train));
}

loocv_report loocv_approx(const dataset &ds, const objective &obj, const loocv_config &cfg,
                          const trained_model &full) {
  require_classification(ds, "LOOCV");
  if (obj.reg.kind() != reg_kind::l2)
    throw assumption_error("approximate LOOCV needs an L2 regularizer");
  if (ds.n() < 2) throw validation_error("LOOCV needs at least two instances");
  const auto t0 = clock_type::now();
  const index_t n = ds.n();
  const index_t d = ds.d();
  const double nn = static_cast<double>(n);
  const vector_t &w = full.w;

  vector_t lam(d);
  for (index_t j = 0; j < d; ++j) lam[j] = obj.reg.coord(j).strong_convexity();

  vector_t dl(n), d2(n);
  for (index_t i = 0; i < n; ++i) {
    dl[i] = obj.loss_fn.derivative(ds.y()[i], full.cache.xw[i]);
    d2[i] = obj.loss_fn.second_derivative(ds.y()[i], full.cache.xw[i]);
  }
  // Gradient and Hessian of P at the full-data optimum.
  const vector_t grad = (ds.cols().transpose() * dl) / nn + lam.cwiseProduct(w);
  const col_matrix dx = d2.asDiagonal() * ds.cols();
  Eigen::MatrixXd hess = Eigen::MatrixXd(ds.cols().transpose() * dx) / nn;
  hess.diagonal() += lam;

  // H~ = n/(n-1) H - diag(lambda_j)/(n-1)
  Eigen::MatrixXd h_tilde = hess * (nn / (nn - 1.0));
  h_tilde.diagonal() -= lam / (nn - 1.0);
  const Eigen::MatrixXd h_inv = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(h_tilde).pseudoInverse();

  loocv_report r;
  r.method = "approx";
  r.folds.resize(static_cast<std::size_t>(n));
  parallel_for(n, cfg.threads, [&](index_t i) {
    const vector_t x = ds.row(i);
    const vector_t g = grad * (nn / (nn - 1.0)) - (dl[i] * x + lam.cwiseProduct(w)) / (nn - 1.0);
    const double s = d2[i] / (nn - 1.0);
    const vector_t u = h_inv * x;
    const double denom = 1.0 - s * x.dot(u);
    vector_t step;
    if (std::abs(denom) > 1e-12) {
      step = h_inv * g + (s * u.dot(g) / denom) * u;
    } else {
      Eigen::MatrixXd h_fold = h_tilde - s * x * x.transpose();
      step = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(h_fold).solve(g);
    }
    const vector_t w_fold = w - step;
    auto &f = r.folds[static_cast<std::size_t>(i)];
    f.status = fold_status::approximated;
    f.predicted = predicted_label(x.dot(w_fold));
  });
  finish_loocv(ds, r);
  r.total_seconds = seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Stepwise

namespace {

struct stepwise_state {
  std::vector<index_t> features;  // original indices of S, ascending
  dataset train;
  dataset valid;
  objective obj;
  trained_model model;
  int e_null = 0;

  std::vector<index_t> candidates() const {
    std::vector<index_t> out;
    const auto free = obj.reg.free_coordinate();
    for (index_t p = 0; p < static_cast<index_t>(features.size()); ++p)
      if (!free || *free != p) out.push_back(p);
    return out;
  }
};

stepwise_state initial_state(const dataset &train_ds, const dataset &valid_ds,
                             const objective &obj, const train_config &tc) {
  require_classification(train_ds, "stepwise elimination");
  require_classification(valid_ds, "stepwise elimination");
  if (train_ds.d() != valid_ds.d())
    throw validation_error("training and validation data differ in dimension");
  stepwise_state s;
  s.features.resize(static_cast<std::size_t>(train_ds.d()));
  std::iota(s.features.begin(), s.features.end(), index_t{0});
  s.train = train_ds;
  s.valid = valid_ds;
  s.obj = obj;
  s.model = train(s.train, s.obj, tc);
  s.e_null = count_errors(s.valid, s.model.w);
  return s;
}

struct candidate_fit {
  trained_model model;
  int error = 0;
};

candidate_fit fit_candidate(const stepwise_state &s, index_t p, const train_config &base) {
  const index_t rm[] = {p};
  const dataset tr = s.train.without_features(rm);
  const dataset va = s.valid.without_features(rm);
  const objective o{s.obj.loss_fn, s.obj.reg.without_coordinates(rm, s.train.d())};
  train_config tc = base;
  vector_t warm(s.model.w.size() - 1);
  for (index_t j = 0, k = 0; j < s.model.w.size(); ++j)
    if (j != p) warm[k++] = s.model.w[j];
  tc.warm_start = warm;
  candidate_fit out;
  out.model = train(tr, o, tc);
  out.error = count_errors(va, out.model.w);
  return out;
}

void advance(stepwise_state &s, index_t p, trained_model model, int error) {
  const index_t rm[] = {p};
  s.obj.reg = s.obj.reg.without_coordinates(rm, s.train.d());
  s.train = s.train.without_features(rm);
  s.valid = s.valid.without_features(rm);
  s.features.erase(s.features.begin() + p);
  s.model = std::move(model);
  s.e_null = error;
}

std::vector<index_t> final_set(const stepwise_state &s) { return s.features; }

}  // namespace

stepwise_report stepwise_naive(const dataset &train_ds, const dataset &valid_ds,
                               const objective &obj, const stepwise_config &cfg) {
  const auto t0 = clock_type::now();
  stepwise_state s = initial_state(train_ds, valid_ds, obj, cfg.train);
  stepwise_report r;
  r.method = "naive";
  r.trainings_performed = 1;
  for (int step = 0; cfg.max_steps < 0 || step < cfg.max_steps; ++step) {
    const std::vector<index_t> cand = s.candidates();
    if (cand.empty()) break;
    std::vector<candidate_fit> fits(cand.size());
    parallel_for(static_cast<index_t>(cand.size()), cfg.threads, [&](index_t k) {
      try {
        fits[static_cast<std::size_t>(k)] = fit_candidate(s, cand[static_cast<std::size_t>(k)], cfg.train);
      } catch (...) {
        rethrow_with_context("feature " +
                             std::to_string(s.features[static_cast<std::size_t>(cand[static_cast<std::size_t>(k)])]));
      }
    });
    stepwise_step st;
    st.e_null = s.e_null;
    std::optional<std::size_t> best;
    int e_best = s.e_null;
    for (std::size_t k = 0; k < cand.size(); ++k) {
      stepwise_candidate c;
      c.feature = s.features[static_cast<std::size_t>(cand[k])];
      c.error = fits[k].error;
      c.trained = true;
      st.candidates.push_back(c);
      if (fits[k].error < e_best) {
        e_best = fits[k].error;
        best = k;
      }
    }
    st.candidates_trained = static_cast<int>(cand.size());
    r.trainings_performed += st.candidates_trained;
    st.e_best = e_best;
    if (best) st.removed = s.features[static_cast<std::size_t>(cand[*best])];
    r.steps.push_back(st);
    if (!best) break;
    r.removed_order.push_back(*st.removed);
    advance(s, cand[*best], std::move(fits[*best].model), e_best);
  }
  r.final_set = final_set(s);
  r.total_seconds = seconds_since(t0);
  return r;
}

stepwise_report stepwise_glru(const dataset &train_ds, const dataset &valid_ds,
                              const objective &obj, const stepwise_config &cfg) {
  require_bound(obj, train_ds.d(), cfg.bound);
  const auto t0 = clock_type::now();
  stepwise_state s = initial_state(train_ds, valid_ds, obj, cfg.train);
  stepwise_report r;
  r.method = "glru";
  r.trainings_performed = 1;
  const bool dual = cfg.bound == bound_kind::dual_scb;

  for (int step = 0; cfg.max_steps < 0 || step < cfg.max_steps; ++step) {
    const std::vector<index_t> cand = s.candidates();
    if (cand.empty()) break;
    const index_t d = s.train.d();
    const index_t m = s.valid.n();
    const double n = static_cast<double>(s.train.n());
    const bool l2_fast = s.obj.reg.is_plain_l2();

    // Shared per-step quantities.
    const vector_t vm = s.valid.rows() * s.model.w;
    std::vector<std::optional<interval>> ranges(static_cast<std::size_t>(d));
    if (dual && cfg.tighten)
      for (index_t j = 0; j < d; ++j)
        ranges[static_cast<std::size_t>(j)] = column_loss_range(s.train, s.obj.loss_fn, j);

    stepwise_step st;
    st.e_null = s.e_null;
    st.candidates.resize(cand.size());
    parallel_for(static_cast<index_t>(cand.size()), cfg.threads, [&](index_t k) {
      const index_t p = cand[static_cast<std::size_t>(k)];
      auto &c = st.candidates[static_cast<std::size_t>(k)];
      c.feature = s.features[static_cast<std::size_t>(p)];
      c.correct = c.incorrect = c.undetermined = 0;
      if (d == 1) {
        // Nothing to bound against: the candidate is always trained.
        c.undetermined = static_cast<int>(m);
        return;
      }
      const index_t rm[] = {p};
      const gap_certificate cert =
          l2_fast ? gap_feature_removal_l2(s.model, s.train, s.obj, p)
                  : gap_feature_removal(s.model, s.train, s.obj, rm, nullptr, false).cert;
      vector_t xp = vector_t::Zero(m);
      for (col_matrix::InnerIterator it(s.valid.cols(), p); it; ++it) xp[it.row()] = it.value();

      std::vector<interval> box;
      double r_p = 0.0;
      if (dual) {
        const double r_d = radius_dual(cert);
        box.resize(static_cast<std::size_t>(d));
        for (index_t j = 0; j < d; ++j) {
          if (j == p) {
            box[static_cast<std::size_t>(j)] = interval::point(0.0);
            continue;
          }
          const reg_coord rc = s.obj.reg.coord(j);
          box[static_cast<std::size_t>(j)] = primal_box_entry(
              rc,
              f_bounds_core(s.model.cache.xt_alpha[j], s.train.col_norm(j), r_d, n, rc,
                            ranges[static_cast<std::size_t>(j)]),
              n);
        }
      } else {
        r_p = radius_primal(cert);
      }
      const double wp = s.model.w[p];
      for (index_t i = 0; i < m; ++i) {
        interval b;
        if (dual) {
          b = predict_bounds_dual_scb(s.valid, i, box);
        } else {
          const double rn = s.valid.row_norm(i);
          const double norm = std::sqrt(std::max(0.0, rn * rn - xp[i] * xp[i]));
          b = predict_bounds_primal_scb(vm[i] - xp[i] * wp, norm, r_p);
        }
        const label lab = label_determination(b);
        if (lab == label::undetermined) ++c.undetermined;
        else if (label_value(lab) == s.valid.y()[i]) ++c.correct;
        else ++c.incorrect;
      }
    });

    // Visit candidates by (I, index); train while a candidate can still win.
    std::vector<std::size_t> order(cand.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return st.candidates[a].incorrect < st.candidates[b].incorrect;
    });
    std::optional<std::size_t> best;
    int e_best = s.e_null;
    std::vector<std::optional<candidate_fit>> fits(cand.size());
    for (std::size_t k : order) {
      auto &c = st.candidates[k];
      const bool can_tie_win = best && cand[k] < cand[*best];
      if (c.incorrect > e_best || (c.incorrect == e_best && !can_tie_win)) break;
      try {
        fits[k] = fit_candidate(s, cand[k], cfg.train);
      } catch (...) {
        rethrow_with_context("feature " + std::to_string(c.feature));
      }
      c.error = fits[k]->error;
      c.trained = true;
      ++st.candidates_trained;
      if (c.error < e_best || (c.error == e_best && can_tie_win)) {
        e_best = c.error;
        best = k;
      }
    }
    st.candidates_screened = static_cast<int>(cand.size()) - st.candidates_trained;
    r.trainings_performed += st.candidates_trained;
    st.e_best = e_best;
    if (best) st.removed = s.features[static_cast<std::size_t>(cand[*best])];
    r.steps.push_back(st);
    if (!best) break;
    r.removed_order.push_back(*st.removed);
    advance(s, cand[*best], std::move(fits[*best]->model), e_best);
  }
  r.final_set = final_set(s);
  r.total_seconds = seconds_since(t0);
  return r;
}

// ---------------------------------------------------------------------------
// Tightness study

namespace {

std::optional<index_t> position_of(const std::vector<index_t> &cols, std::optional<index_t> f) {
  if (!f) return std::nullopt;
  const auto it = std::find(cols.begin(), cols.end(), *f);
  if (it == cols.end()) return std::nullopt;
  return static_cast<index_t>(it - cols.begin());
}

double determination_rate(const dataset &test, const std::vector<interval> &bounds) {
  int determined = 0;
  for (const auto &b : bounds)
    if (label_determination(b) != label::undetermined) ++determined;
  return test.n() > 0 ? static_cast<double>(determined) / static_cast<double>(test.n()) : 0.0;
}

}  // namespace

tightness_report tightness_study(const dataset &ds, const objective &obj,
                                 const tightness_config &cfg) {
  require_classification(ds, "the tightness study");
  if (cfg.max_mods < 0) throw validation_error("max_mods must be nonnegative");
  if (!(cfg.test_fraction > 0.0 && cfg.test_fraction < 1.0))
    throw validation_error("test_fraction must lie in (0, 1)");
  const index_t K = cfg.max_mods;
  const index_t n = ds.n();
  const index_t n_test = std::max<index_t>(1, static_cast<index_t>(std::llround(cfg.test_fraction * static_cast<double>(n))));
  if (n - n_test - K < K + 1) throw validation_error("too few instances for the requested split");

  const auto free = obj.reg.free_coordinate();
  std::vector<index_t> regular;
  for (index_t j = 0; j < ds.d(); ++j)
    if (!free || *free != j) regular.push_back(j);
  const bool feature_kinds = std::any_of(cfg.kinds.begin(), cfg.kinds.end(), [](auto k) {
    return k == modification::kind_t::remove_features || k == modification::kind_t::add_features;
  });
  if (feature_kinds && static_cast<index_t>(regular.size()) < 2 * K + 1)
    throw validation_error("too few features for the requested feature modifications");

  std::mt19937_64 rng(cfg.seed);
  std::vector<index_t> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), index_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::vector<index_t> test_idx(perm.begin(), perm.begin() + n_test);
  const std::vector<index_t> pool_idx(perm.begin() + n_test, perm.begin() + n_test + K);
  std::vector<index_t> train_idx(perm.begin() + n_test + K, perm.end());
  std::sort(train_idx.begin(), train_idx.end());

  std::vector<index_t> held, base;
  if (feature_kinds) held.assign(regular.end() - K, regular.end());
  for (index_t j = 0; j < ds.d(); ++j)
    if (std::find(held.begin(), held.end(), j) == held.end()) base.push_back(j);

  const dataset train_full = ds.select_instances(train_idx);
  const dataset test_full = ds.select_instances(test_idx);
  const dataset train = train_full.select_features(base);
  const dataset test = test_full.select_features(base);
  const dataset pool = ds.select_instances(pool_idx).select_features(base);
  const col_matrix train_add = train_full.select_features(held).cols();
  const col_matrix test_add = test_full.select_features(held).cols();
  const std::optional<index_t> free_pos = position_of(base, free);

  std::vector<index_t> inst_order(static_cast<std::size_t>(train.n()));
  std::iota(inst_order.begin(), inst_order.end(), index_t{0});
  std::shuffle(inst_order.begin(), inst_order.end(), rng);
  std::vector<index_t> feat_order;
  for (index_t p = 0; p < train.d(); ++p)
    if (!free_pos || *free_pos != p) feat_order.push_back(p);
  std::shuffle(feat_order.begin(), feat_order.end(), rng);

  tightness_report rep;
  rep.n_train = train.n();
  rep.n_test = test.n();
  rep.d_train = train.d();

  for (double lam : cfg.lambdas) {
    const objective o{obj.loss_fn, regularizer(obj.reg.kind(), lam, obj.reg.kappa(), free_pos)};
    const trained_model model = glru::train(train, o, cfg.train);
    const bool primal_ok = o.reg.strong_convexity(train.d()) > 0.0;

    for (const auto kind : cfg.kinds) {
      for (index_t k = 0; k <= K; ++k) {
        dataset ds_new = train;
        dataset test_new = test;
        objective o_new = o;
        vector_t w_hat = model.w;
        vector_t alpha_hat = model.alpha;
        gap_certificate cert = gap_certificate::make(model.cache.gap(), train.n(), o, train.d(), "none");
        if (k > 0) {
          switch (kind) {
            case modification::kind_t::remove_instances: {
              const std::vector<index_t> rm(inst_order.begin(), inst_order.begin() + k);
              const instance_gap g = gap_instance_removal(model, train, o, rm);
              cert = g.cert;
              alpha_hat = g.alpha_hat;
              ds_new = train.without_instances(rm);
              break;
            }
            case modification::kind_t::add_instances: {
              std::vector<index_t> first(static_cast<std::size_t>(k));
              std::iota(first.begin(), first.end(), index_t{0});
              const dataset extra = pool.select_instances(first);
              const instance_gap g = gap_instance_addition(model, train, o, extra.rows(), extra.y());
              cert = g.cert;
              alpha_hat = g.alpha_hat;
              ds_new = train.with_instances(extra.rows(), extra.y());
              break;
            }
            case modification::kind_t::remove_features: {
              const std::vector<index_t> rm(feat_order.begin(), feat_order.begin() + k);
              const feature_gap g = gap_feature_removal(model, train, o, rm);
              cert = g.cert;
              w_hat = g.w_hat;
              o_new.reg = g.reg_new;
              ds_new = train.without_features(rm);
              test_new = test.without_features(rm);
              break;
            }
            case modification::kind_t::add_features: {
              const col_matrix cols = train_add.leftCols(k);
              const feature_gap g = gap_feature_addition(model, train, o, cols);
              cert = g.cert;
              w_hat = g.w_hat;
              ds_new = train.with_features(cols);
              test_new = test.with_features(test_add.leftCols(k));
              break;
            }
          }
        }

        for (const bound_kind bk : {bound_kind::primal_scb, bound_kind::dual_scb}) {
          if (bk == bound_kind::primal_scb && !(primal_ok && cert.lambda > 0.0)) continue;
          std::vector<interval> bounds(static_cast<std::size_t>(test_new.n()));
          if (bk == bound_kind::primal_scb) {
            const double r_p = radius_primal(cert);
            const vector_t m = test_new.rows() * w_hat;
            for (index_t i = 0; i < test_new.n(); ++i)
              bounds[static_cast<std::size_t>(i)] =
                  predict_bounds_primal_scb(m[i], test_new.row_norm(i), r_p);
          } else {
            const std::vector<interval> box =
                primal_box_from_dual_ball(ds_new, o_new, alpha_hat, radius_dual(cert), cfg.tighten);
            for (index_t i = 0; i < test_new.n(); ++i)
              bounds[static_cast<std::size_t>(i)] = predict_bounds_dual_scb(test_new, i, box);
          }
          tightness_row row;
          row.lambda = lam;
          row.kind = kind;
          row.count = static_cast<int>(k);
          row.bound = bk;
          row.rate = determination_rate(test_new, bounds);
          row.gap = cert.gap;
          rep.rows.push_back(row);
        }
      }
    }
  }
  return rep;
}

void write_tightness_csv(std::ostream &out, const tightness_report &report) {
  out << "lambda,kind,count,bound,rate\n";
  const auto old_prec = out.precision(17);
  for (const auto &r : report.rows)
    out << r.lambda << ',' << to_string(r.kind) << ',' << r.count << ',' << to_string(r.bound)
        << ',' << r.rate << '\n';
  out.precision(old_prec);
}

}  // namespace glru
