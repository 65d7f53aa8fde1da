#include "glru/bounds.hpp"

#include "glru/error.hpp"

#include <cmath>

namespace glru {

gap_certificate gap_certificate::make(double gap, index_t n_new, const objective &obj,
                                      index_t d_new, std::string source) {
  gap_certificate c;
  c.gap = gap;
  c.n_new = n_new;
  c.lambda = obj.reg.strong_convexity(d_new);
  c.mu = obj.loss_fn.smoothness();
  c.source = std::move(source);
  return c;
}

namespace {

// Rounding can push a gap a hair below zero.
double clamped_gap(double g) { return g > 0.0 ? g : 0.0; }

double shift(double r, double norm) { return norm == 0.0 ? 0.0 : r * norm; }

}  // namespace

double radius_primal(const gap_certificate &cert) {
  if (!(cert.lambda > 0.0))
    throw assumption_error("primal ball needs a strongly convex regularizer (lambda > 0)");
  return std::sqrt(2.0 * clamped_gap(cert.gap) / cert.lambda);
}

double radius_dual(const gap_certificate &cert) {
  if (!(cert.mu > 0.0)) throw assumption_error("dual ball needs a smooth loss (mu > 0)");
  return std::sqrt(2.0 * static_cast<double>(cert.n_new) * cert.mu * clamped_gap(cert.gap));
}

interval dual_box_entry(const loss &loss_fn, double y, double margin, double row_norm,
                        double r_p) {
  const double s = shift(r_p, row_norm);
  return {-loss_fn.subgrad(y, margin + s).hi, -loss_fn.subgrad(y, margin - s).lo};
}

std::vector<interval> dual_box_from_primal_ball(const dataset &ds_new, const loss &loss_fn,
                                                const vector_t &w_hat, double r_p) {
  const vector_t xw = ds_new.rows() * w_hat;
  std::vector<interval> box(static_cast<std::size_t>(ds_new.n()));
  for (index_t i = 0; i < ds_new.n(); ++i)
    box[static_cast<std::size_t>(i)] =
        dual_box_entry(loss_fn, ds_new.y()[i], xw[i], ds_new.row_norm(i), r_p);
  return box;
}

interval column_loss_range(const dataset &ds, const loss &loss_fn, index_t j) {
  double lo = 0.0, hi = 0.0;
  for (col_matrix::InnerIterator it(ds.cols(), j); it; ++it) {
    const interval dom = loss_fn.conj_domain(ds.y()[it.row()]);
    const interval box{-dom.hi, -dom.lo};
    lo += minlin_term(box, it.value());
    hi += maxlin_term(box, it.value());
  }
  return {lo, hi};
}

interval f_bounds_core(double xt_alpha, double col_norm, double r_d, double n_new,
                       const reg_coord &coord, const std::optional<interval> &loss_range) {
  const double s = shift(r_d, col_norm);
  const interval plain{xt_alpha - s, xt_alpha + s};
  if (!loss_range) return plain;
  const interval range = coord.subgrad_range();
  interval t = plain.intersect(*loss_range).intersect({n_new * range.lo, n_new * range.hi});
  if (t.lo > t.hi) return plain;
  return t;
}

interval f_bounds(const dataset &ds_new, const objective &obj, const vector_t &alpha_hat,
                  double r_d, index_t j, bool tighten) {
  const double xa = ds_new.cols().col(j).dot(alpha_hat);
  std::optional<interval> lr;
  if (tighten) lr = column_loss_range(ds_new, obj.loss_fn, j);
  return f_bounds_core(xa, ds_new.col_norm(j), r_d, static_cast<double>(ds_new.n()),
                       obj.reg.coord(j), lr);
}

interval primal_box_entry(const reg_coord &coord, const interval &f, double n_new) {
  return {coord.conj_subgrad(f.lo / n_new).lo, coord.conj_subgrad(f.hi / n_new).hi};
}

std::vector<interval> primal_box_from_dual_ball(const dataset &ds_new, const objective &obj,
                                                const vector_t &alpha_hat, double r_d,
                                                bool tighten) {
  const vector_t xa = ds_new.cols().transpose() * alpha_hat;
  const double n = static_cast<double>(ds_new.n());
  std::vector<interval> box(static_cast<std::size_t>(ds_new.d()));
  for (index_t j = 0; j < ds_new.d(); ++j) {
    std::optional<interval> lr;
    if (tighten) lr = column_loss_range(ds_new, obj.loss_fn, j);
    const reg_coord c = obj.reg.coord(j);
    box[static_cast<std::size_t>(j)] =
        primal_box_entry(c, f_bounds_core(xa[j], ds_new.col_norm(j), r_d, n, c, lr), n);
  }
  return box;
}

interval predict_bounds_primal_scb(double margin, double x_norm, double r_p) {
  const double s = shift(r_p, x_norm);
  return {margin - s, margin + s};
}

interval predict_bounds_primal_scb(const vector_t &x, const vector_t &w_hat, double r_p) {
  return predict_bounds_primal_scb(x.dot(w_hat), x.norm(), r_p);
}

namespace {

interval finish_dual_scb(double lo, double hi) {
  // +inf and -inf terms together leave the sum undefined; the bound is then
  // vacuous on that side.
  if (std::isnan(lo)) lo = -kInf;
  if (std::isnan(hi)) hi = kInf;
  return {lo, hi};
}

}  // namespace

interval predict_bounds_dual_scb(const vector_t &x, std::span<const interval> w_box) {
  if (static_cast<std::size_t>(x.size()) != w_box.size())
    throw validation_error("test vector and parameter box differ in length");
  double lo = 0.0, hi = 0.0;
  for (index_t j = 0; j < x.size(); ++j) {
    lo += minlin_term(w_box[static_cast<std::size_t>(j)], x[j]);
    hi += maxlin_term(w_box[static_cast<std::size_t>(j)], x[j]);
  }
  return finish_dual_scb(lo, hi);
}

interval predict_bounds_dual_scb(const dataset &ds, index_t i, std::span<const interval> w_box) {
  if (static_cast<std::size_t>(ds.d()) != w_box.size())
    throw validation_error("dataset and parameter box differ in dimension");
  double lo = 0.0, hi = 0.0;
  for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it) {
    lo += minlin_term(w_box[static_cast<std::size_t>(it.col())], it.value());
    hi += maxlin_term(w_box[static_cast<std::size_t>(it.col())], it.value());
  }
  return finish_dual_scb(lo, hi);
}

label label_determination(const interval &bound) {
  if (bound.lo > 0.0) return label::positive;
  if (bound.hi < 0.0) return label::negative;
  return label::undetermined;
}

std::string to_string(label l) {
  switch (l) {
    case label::positive: return "positive";
    case label::negative: return "negative";
    case label::undetermined: return "undetermined";
  }
  return "undetermined";
}

bound_kind parse_bound_kind(const std::string &name) {
  if (name == "primal-scb") return bound_kind::primal_scb;
  if (name == "dual-scb") return bound_kind::dual_scb;
  throw validation_error("unknown bound '" + name + "' (expected primal-scb or dual-scb)");
}

std::string to_string(bound_kind k) {
  return k == bound_kind::primal_scb ? "primal-scb" : "dual-scb";
}

}  // namespace glru
