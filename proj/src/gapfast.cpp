#include "glru/gapfast.hpp"

#include "glru/error.hpp"

#include <algorithm>
#include <cmath>

namespace glru {

namespace {

void count_entries(touch_counter *c, std::uint64_t k) {
  if (c) c->matrix_entries_touched += k;
}
void count_ops(touch_counter *c, std::uint64_t k) {
  if (c) c->vector_ops += k;
}

void check_model(const trained_model &model, const dataset &ds) {
  if (model.w.size() != ds.d() || model.alpha.size() != ds.n() ||
      model.cache.xw.size() != ds.n() || model.cache.xt_alpha.size() != ds.d())
    throw validation_error("model does not match the dataset dimensions");
}

void check_instance_removal(const dataset &ds, std::span<const index_t> removed) {
  if (removed.empty()) throw validation_error("no instances to remove");
  validate_index_set(removed, ds.n(), "instance");
  if (static_cast<index_t>(removed.size()) >= ds.n())
    throw domain_error("cannot remove every instance");
}

void check_feature_removal(const dataset &ds, std::span<const index_t> removed) {
  if (removed.empty()) throw validation_error("no features to remove");
  validate_index_set(removed, ds.d(), "feature");
  if (static_cast<index_t>(removed.size()) >= ds.d())
    throw domain_error("cannot remove every feature");
}

// l(X_i w) + l*(-alpha_i) for one instance.
double instance_terms(const dataset &ds, const loss &f, index_t i, double alpha_i, double xw_i) {
  const double y = ds.y()[i];
  return f.value(y, xw_i) + f.conj(y, -alpha_i);
}

vector_t alpha_without(const vector_t &alpha, std::span<const index_t> removed) {
  std::vector<index_t> sorted(removed.begin(), removed.end());
  std::sort(sorted.begin(), sorted.end());
  vector_t out(alpha.size() - static_cast<index_t>(sorted.size()));
  index_t k = 0;
  std::size_t r = 0;
  for (index_t i = 0; i < alpha.size(); ++i) {
    if (r < sorted.size() && sorted[r] == i) {
      ++r;
      continue;
    }
    out[k++] = alpha[i];
  }
  return out;
}

vector_t w_without(const vector_t &w, std::span<const index_t> removed) { return alpha_without(w, removed); }

}  // namespace

instance_gap gap_instance_removal(const trained_model &model, const dataset &ds_old,
                                  const objective &obj, std::span<const index_t> removed,
                                  touch_counter *counter, bool materialize) {
  if (counter) counter->reset();
  check_model(model, ds_old);
  check_instance_removal(ds_old, removed);
  const auto &c = model.cache;
  const index_t n_old = ds_old.n();
  const index_t n_new = n_old - static_cast<index_t>(removed.size());

  double removed_terms = 0.0;
  vector_t v = c.xt_alpha;
  count_ops(counter, static_cast<std::uint64_t>(ds_old.d()));
  for (index_t i : removed) {
    const double a = model.alpha[i];
    removed_terms += instance_terms(ds_old, obj.loss_fn, i, a, c.xw[i]);
    for (row_matrix::InnerIterator it(ds_old.rows(), i); it; ++it) {
      v[it.col()] -= a * it.value();
      count_entries(counter, 1);
    }
  }
  const double ratio = static_cast<double>(n_old) / static_cast<double>(n_new);
  v /= static_cast<double>(n_new);
  const double reg_conj = obj.reg.conj(v);
  count_ops(counter, 2 * static_cast<std::uint64_t>(ds_old.d()));

  const double gap = ratio * (c.loss_sum + c.loss_conj_sum) -
                     removed_terms / static_cast<double>(n_new) + c.reg_sum + reg_conj;

  instance_gap out;
  out.cert = gap_certificate::make(gap, n_new, obj, ds_old.d(), "remove-instances");
  if (materialize) {
    out.alpha_hat = alpha_without(model.alpha, removed);
    count_ops(counter, static_cast<std::uint64_t>(n_old));
  }
  return out;
}

instance_gap gap_instance_addition(const trained_model &model, const dataset &ds_old,
                                   const objective &obj, const row_matrix &new_rows,
                                   const vector_t &new_labels, touch_counter *counter,
                                   bool materialize) {
  if (counter) counter->reset();
  check_model(model, ds_old);
  if (new_rows.rows() == 0) throw validation_error("no instances to add");
  if (new_rows.cols() != ds_old.d())
    throw validation_error("added rows have width " + std::to_string(new_rows.cols()) +
                           ", expected " + std::to_string(ds_old.d()));
  if (new_labels.size() != new_rows.rows())
    throw validation_error("added rows and labels differ in count");
  if (obj.loss_fn.for_classification())
    for (index_t k = 0; k < new_labels.size(); ++k)
      if (new_labels[k] != 1.0 && new_labels[k] != -1.0)
        throw validation_error("added classification label is not +1/-1");

  const auto &c = model.cache;
  const index_t n_old = ds_old.n();
  const index_t n_new = n_old + new_rows.rows();

  double added_terms = 0.0;
  vector_t v = c.xt_alpha;
  vector_t added_alpha(new_rows.rows());
  count_ops(counter, static_cast<std::uint64_t>(ds_old.d()));
  for (index_t k = 0; k < new_rows.rows(); ++k) {
    double m = 0.0;
    for (row_matrix::InnerIterator it(new_rows, k); it; ++it) m += it.value() * model.w[it.col()];
    const double y = new_labels[k];
    const double a = -select_min_abs(obj.loss_fn.subgrad(y, m));
    added_alpha[k] = a;
    added_terms += obj.loss_fn.value(y, m) + obj.loss_fn.conj(y, -a);
    for (row_matrix::InnerIterator it(new_rows, k); it; ++it) v[it.col()] += a * it.value();
    count_entries(counter, 2 * static_cast<std::uint64_t>(new_rows.row(k).nonZeros()));
  }
  const double ratio = static_cast<double>(n_old) / static_cast<double>(n_new);
  v /= static_cast<double>(n_new);
  const double reg_conj = obj.reg.conj(v);
  count_ops(counter, 2 * static_cast<std::uint64_t>(ds_old.d()));

  const double gap = ratio * (c.loss_sum + c.loss_conj_sum) +
                     added_terms / static_cast<double>(n_new) + c.reg_sum + reg_conj;

  instance_gap out;
  out.cert = gap_certificate::make(gap, n_new, obj, ds_old.d(), "add-instances");
  if (materialize) {
    out.alpha_hat.resize(n_new);
    out.alpha_hat << model.alpha, added_alpha;
    count_ops(counter, static_cast<std::uint64_t>(n_new));
  }
  return out;
}

feature_gap gap_feature_removal(const trained_model &model, const dataset &ds_old,
                                const objective &obj, std::span<const index_t> removed,
                                touch_counter *counter, bool materialize) {
  if (counter) counter->reset();
  check_model(model, ds_old);
  check_feature_removal(ds_old, removed);
  const auto &c = model.cache;
  const index_t n = ds_old.n();
  const double inv_n = 1.0 / static_cast<double>(n);

  vector_t xw = c.xw;
  count_ops(counter, static_cast<std::uint64_t>(n));
  double removed_terms = 0.0;
  for (index_t j : removed) {
    const reg_coord rc = obj.reg.coord(j);
    const double wj = model.w[j];
    removed_terms += rc.value(wj) + rc.conj(c.xt_alpha[j] * inv_n);
    if (wj != 0.0)
      for (col_matrix::InnerIterator it(ds_old.cols(), j); it; ++it) {
        xw[it.row()] -= wj * it.value();
        count_entries(counter, 1);
      }
  }
  double loss_sum = 0.0;
  for (index_t i = 0; i < n; ++i) loss_sum += obj.loss_fn.value(ds_old.y()[i], xw[i]);
  loss_sum *= inv_n;
  count_ops(counter, static_cast<std::uint64_t>(n));

  const double gap = loss_sum + c.reg_sum - removed_terms - c.dual();

  feature_gap out;
  out.reg_new = obj.reg.without_coordinates(removed, ds_old.d());
  const objective obj_new{obj.loss_fn, out.reg_new};
  const index_t d_new = ds_old.d() - static_cast<index_t>(removed.size());
  out.cert = gap_certificate::make(gap, n, obj_new, d_new, "remove-features");
  if (materialize) {
    out.w_hat = w_without(model.w, removed);
    count_ops(counter, static_cast<std::uint64_t>(ds_old.d()));
  }
  return out;
}

feature_gap gap_feature_addition(const trained_model &model, const dataset &ds_old,
                                 const objective &obj, const col_matrix &new_cols,
                                 touch_counter *counter, bool materialize) {
  if (counter) counter->reset();
  check_model(model, ds_old);
  if (new_cols.cols() == 0) throw validation_error("no features to add");
  if (new_cols.rows() != ds_old.n())
    throw validation_error("added columns have height " + std::to_string(new_cols.rows()) +
                           ", expected " + std::to_string(ds_old.n()));
  const auto &c = model.cache;
  const index_t n = ds_old.n();
  const index_t d_old = ds_old.d();
  const double inv_n = 1.0 / static_cast<double>(n);

  vector_t xw = c.xw;
  count_ops(counter, static_cast<std::uint64_t>(n));
  vector_t added_w(new_cols.cols());
  double added_terms = 0.0;
  for (index_t k = 0; k < new_cols.cols(); ++k) {
    const reg_coord rc = obj.reg.coord(d_old + k);
    double xa = 0.0;
    for (col_matrix::InnerIterator it(new_cols, k); it; ++it) xa += it.value() * model.alpha[it.row()];
    const double s = xa * inv_n;
    const interval sub = rc.conj_subgrad(s);
    // Outside dom rho* no finite choice exists and the gap is +inf anyway.
    const double wk = select_min_abs(sub);
    added_w[k] = std::isfinite(wk) ? wk : 0.0;
    added_terms += rc.value(added_w[k]) + rc.conj(s);
    if (added_w[k] != 0.0)
      for (col_matrix::InnerIterator it(new_cols, k); it; ++it) xw[it.row()] += added_w[k] * it.value();
    count_entries(counter, 2 * static_cast<std::uint64_t>(new_cols.col(k).nonZeros()));
  }
  double loss_sum = 0.0;
  for (index_t i = 0; i < n; ++i) loss_sum += obj.loss_fn.value(ds_old.y()[i], xw[i]);
  loss_sum *= inv_n;
  count_ops(counter, static_cast<std::uint64_t>(n));

  const double gap = loss_sum + c.reg_sum + added_terms - c.dual();

  feature_gap out;
  out.reg_new = obj.reg;
  out.cert = gap_certificate::make(gap, n, obj, d_old + new_cols.cols(), "add-features");
  if (materialize) {
    out.w_hat.resize(d_old + new_cols.cols());
    out.w_hat << model.w, added_w;
    count_ops(counter, static_cast<std::uint64_t>(d_old + new_cols.cols()));
  }
  return out;
}

gap_certificate gap_loocv_l2(const trained_model &model, const dataset &ds, const objective &obj,
                             index_t i, touch_counter *counter) {
  if (counter) counter->reset();
  if (!obj.reg.is_plain_l2()) throw assumption_error("the LOOCV fast path needs a plain L2 regularizer");
  check_model(model, ds);
  const index_t one[] = {i};
  check_instance_removal(ds, one);
  const auto &c = model.cache;
  const index_t n_old = ds.n();
  const index_t n_new = n_old - 1;
  const double a = model.alpha[i];

  // ||v - a x_i||^2 = ||v||^2 - 2 a x_i'v + a^2 ||x_i||^2
  double xv = 0.0;
  for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it) {
    xv += it.value() * c.xt_alpha[it.col()];
    count_entries(counter, 1);
  }
  const double rn = ds.row_norm(i);
  const double sq = std::max(0.0, c.xt_alpha_sqnorm - 2.0 * a * xv + a * a * rn * rn);
  const double m = static_cast<double>(n_new);
  const double reg_conj = sq / (2.0 * obj.reg.lambda() * m * m);

  const double ratio = static_cast<double>(n_old) / m;
  const double gap = ratio * (c.loss_sum + c.loss_conj_sum) -
                     instance_terms(ds, obj.loss_fn, i, a, c.xw[i]) / m + c.reg_sum + reg_conj;
  return gap_certificate::make(gap, n_new, obj, ds.d(), "remove-instances");
}

gap_certificate gap_feature_removal_l2(const trained_model &model, const dataset &ds,
                                       const objective &obj, index_t j, touch_counter *counter) {
  if (counter) counter->reset();
  if (!obj.reg.is_plain_l2())
    throw assumption_error("the feature-removal fast path needs a plain L2 regularizer");
  check_model(model, ds);
  const index_t one[] = {j};
  check_feature_removal(ds, one);
  const auto &c = model.cache;
  const index_t n = ds.n();
  const double lambda = obj.reg.lambda();
  const double wj = model.w[j];
  const double xa = c.xt_alpha[j];
  const double nn = static_cast<double>(n);

  double loss_sum = 0.0;
  if (wj == 0.0) {
    loss_sum = c.loss_sum;
  } else {
    vector_t xw = c.xw;
    for (col_matrix::InnerIterator it(ds.cols(), j); it; ++it) {
      xw[it.row()] -= wj * it.value();
      count_entries(counter, 1);
    }
    for (index_t i = 0; i < n; ++i) loss_sum += obj.loss_fn.value(ds.y()[i], xw[i]);
    loss_sum /= nn;
    count_ops(counter, 2 * static_cast<std::uint64_t>(n));
  }
  const double correction = 0.5 * lambda * wj * wj + xa * xa / (2.0 * nn * nn * lambda);
  const double gap = loss_sum + c.reg_sum - correction - c.dual();
  return gap_certificate::make(gap, n, obj, ds.d() - 1, "remove-features");
}

gap_certificate modification_gap(const trained_model &model, const dataset &ds_old,
                                 const objective &obj, const modification &mod) {
  switch (mod.kind) {
    case modification::kind_t::remove_instances:
      return gap_instance_removal(model, ds_old, obj, mod.indices, nullptr, false).cert;
    case modification::kind_t::add_instances:
      return gap_instance_addition(model, ds_old, obj, mod.new_rows, mod.new_labels, nullptr, false)
          .cert;
    case modification::kind_t::remove_features:
      return gap_feature_removal(model, ds_old, obj, mod.indices, nullptr, false).cert;
    case modification::kind_t::add_features:
      return gap_feature_addition(model, ds_old, obj, mod.new_cols, nullptr, false).cert;
  }
  throw validation_error("unknown modification kind");
}

}  // namespace glru
