#include "glru/erm.hpp"

#include "glru/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace glru {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

double mean_loss(const vector_t &y, const loss &f, const vector_t &xw) {
  double s = 0.0;
  for (index_t i = 0; i < xw.size(); ++i) s += f.value(y[i], xw[i]);
  return xw.size() > 0 ? s / static_cast<double>(xw.size()) : 0.0;
}

double mean_loss_conj(const vector_t &y, const loss &f, const vector_t &alpha) {
  double s = 0.0;
  for (index_t i = 0; i < alpha.size(); ++i) s += f.conj(y[i], -alpha[i]);
  return alpha.size() > 0 ? s / static_cast<double>(alpha.size()) : 0.0;
}

void check_dims(const dataset &ds, const vector_t &w) {
  if (w.size() != ds.d())
    throw validation_error("parameter vector has length " + std::to_string(w.size()) +
                           ", expected d = " + std::to_string(ds.d()));
}

// Changes of P this small are indistinguishable from rounding; near the
// optimum a full (prox-)Newton step is accepted on its model decrease alone.
double roundoff(double p) { return 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(p)); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// argmin_z  (h/2)(z - u)^2 + rho(z)
double prox(const reg_coord &c, double u, double h) {
  switch (c.kind) {
    case reg_coord::shape::elastic:
      return soft_threshold(h * u, c.kappa) / (h + c.lambda);
    case reg_coord::shape::l1:
      return soft_threshold(u, c.lambda / h);
    case reg_coord::shape::free:
      return u;
  }
  return u;
}

}  // namespace

double primal_objective(const dataset &ds, const objective &obj, const vector_t &w) {
  check_dims(ds, w);
  const vector_t xw = ds.rows() * w;
  return mean_loss(ds.y(), obj.loss_fn, xw) + obj.reg.value(w);
}

double dual_objective(const dataset &ds, const objective &obj, const vector_t &alpha) {
  if (alpha.size() != ds.n())
    throw validation_error("dual vector has length " + std::to_string(alpha.size()) +
                           ", expected n = " + std::to_string(ds.n()));
  const double lc = mean_loss_conj(ds.y(), obj.loss_fn, alpha);
  if (lc == kInf) return -kInf;
  const vector_t v = (ds.cols().transpose() * alpha) / static_cast<double>(ds.n());
  const double rc = obj.reg.conj(v);
  if (rc == kInf) return -kInf;
  return -lc - rc;
}

double duality_gap(const dataset &ds, const objective &obj, const vector_t &w,
                   const vector_t &alpha) {
  const double d = dual_objective(ds, obj, alpha);
  if (d == -kInf) return kInf;
  return primal_objective(ds, obj, w) - d;
}

vector_t dual_from_margins(const vector_t &y, const loss &loss_fn, const vector_t &xw) {
  vector_t alpha(xw.size());
  for (index_t i = 0; i < xw.size(); ++i)
    alpha[i] = -select_min_abs(loss_fn.subgrad(y[i], xw[i]));
  return alpha;
}

vector_t dual_from_primal(const dataset &ds, const loss &loss_fn, const vector_t &w) {
  check_dims(ds, w);
  const vector_t xw = ds.rows() * w;
  return dual_from_margins(ds.y(), loss_fn, xw);
}

vector_t make_dual_feasible(const dataset &ds, const objective &obj, vector_t alpha) {
  const index_t n = ds.n();
  const vector_t &y = ds.y();

  std::vector<interval> box(static_cast<std::size_t>(n));
  for (index_t i = 0; i < n; ++i) {
    const interval dom = obj.loss_fn.conj_domain(y[i]);
    box[static_cast<std::size_t>(i)] = {-dom.hi, -dom.lo};
    alpha[i] = std::clamp(alpha[i], -dom.hi, -dom.lo);
  }

  const auto free = obj.reg.free_coordinate();
  if (free && *free < ds.d()) {
    // Distribute the residual X_f' alpha over instances that can absorb it.
    for (int round = 0; round < 8; ++round) {
      double c = 0.0;
      for (col_matrix::InnerIterator it(ds.cols(), *free); it; ++it)
        c += it.value() * alpha[it.row()];
      if (c == 0.0) break;
      double denom = 0.0;
      for (col_matrix::InnerIterator it(ds.cols(), *free); it; ++it) {
        const auto &b = box[static_cast<std::size_t>(it.row())];
        const double dir = -c * it.value();  // sign of the move on alpha_i
        const double a = alpha[it.row()];
        if ((dir > 0.0 && a < b.hi) || (dir < 0.0 && a > b.lo)) denom += it.value() * it.value();
      }
      if (denom == 0.0) break;
      const double t = c / denom;
      for (col_matrix::InnerIterator it(ds.cols(), *free); it; ++it) {
        const auto &b = box[static_cast<std::size_t>(it.row())];
        const double dir = -c * it.value();
        double &a = alpha[it.row()];
        if ((dir > 0.0 && a < b.hi) || (dir < 0.0 && a > b.lo))
          a = std::clamp(a - t * it.value(), b.lo, b.hi);
      }
    }
  }

  if (obj.reg.kind() == reg_kind::l1 && n > 0) {
    const vector_t v = (ds.cols().transpose() * alpha) / static_cast<double>(n);
    double worst = 0.0;
    for (index_t j = 0; j < ds.d(); ++j) {
      const reg_coord c = obj.reg.coord(j);
      if (c.kind == reg_coord::shape::l1) worst = std::max(worst, std::abs(v[j]) / c.lambda);
    }
    if (worst > 1.0) alpha /= worst;
  }
  return alpha;
}

precompute_cache build_cache(const dataset &ds, const objective &obj, const vector_t &w,
                             const vector_t &alpha) {
  check_dims(ds, w);
  precompute_cache c;
  const double n = static_cast<double>(ds.n());
  c.xw = ds.rows() * w;
  c.xt_alpha = ds.cols().transpose() * alpha;
  c.loss_sum = mean_loss(ds.y(), obj.loss_fn, c.xw);
  c.reg_sum = obj.reg.value(w);
  c.loss_conj_sum = mean_loss_conj(ds.y(), obj.loss_fn, alpha);
  c.reg_conj_sum = obj.reg.conj(c.xt_alpha / n);
  c.xt_alpha_sqnorm = c.xt_alpha.squaredNorm();
  return c;
}

double relative_gap(double primal, double gap) {
  return primal > 0.0 ? gap / primal : gap;
}

// ---------------------------------------------------------------------------
// Solver

namespace {

class solver {
 public:
  solver(const dataset &ds, const objective &obj, const train_config &cfg)
      : ds_(ds), obj_(obj), cfg_(cfg), inv_n_(1.0 / static_cast<double>(ds.n())) {
    if (ds.n() < 1) throw validation_error("cannot train on an empty dataset");
    if (!(cfg.rel_gap_tol > 0.0)) throw validation_error("rel_gap_tol must be positive");
    if (cfg.stop_period < 1) throw validation_error("stop_period must be at least 1");
    if (cfg.warm_start) {
      check_dims(ds, *cfg.warm_start);
      w_ = *cfg.warm_start;
    } else {
      w_ = vector_t::Zero(ds.d());
    }
    coords_.reserve(static_cast<std::size_t>(ds.d()));
    for (index_t j = 0; j < ds.d(); ++j) coords_.push_back(obj.reg.coord(j));
    if (obj.loss_fn.for_classification() && ds.kind() != task::classification)
      throw validation_error("classification loss '" + obj.loss_fn.name() +
                             "' needs +1/-1 labels");
  }

  trained_model run(const stop_predicate *stop) {
    double best_rel = kInf;
    int stalled = 0;
    for (int it = 0;; ++it) {
      evaluate();
      const double rel = relative_gap(primal_, gap_);
      best_rel = std::min(best_rel, rel);
      if (rel <= cfg_.rel_gap_tol) return finish(it, stop_reason::relative_gap);
      if (stop && it % cfg_.stop_period == 0 &&
          (*stop)(iterate_view{w_, alpha_, xw_, primal_, dual_, gap_, it}))
        return finish(it, stop_reason::predicate);
      if (it >= cfg_.max_iter)
        throw convergence_error(best_rel, "no convergence within " +
                                              std::to_string(cfg_.max_iter) +
                                              " iterations (best relative gap " +
                                              fmt(best_rel) + ")");
      bool moved = false;
      if (obj_.reg.smooth()) {
        moved = newton_step();
      } else {
        moved = prox_newton_step();
        if (moved && ds_.d() <= cfg_.dense_newton_limit) orthant_newton_step();
      }
      if (!moved) moved = prox_gradient_step();
      stalled = moved ? 0 : stalled + 1;
      if (stalled >= 3)
        throw convergence_error(best_rel, "optimizer stalled at relative gap " +
                                              fmt(best_rel));
    }
  }

 private:
  void evaluate() {
    xw_ = ds_.rows() * w_;
    primal_ = primal_objective_at(xw_, w_);
    alpha_ = make_dual_feasible(ds_, obj_, dual_from_margins(ds_.y(), obj_.loss_fn, xw_));
    dual_ = dual_objective(ds_, obj_, alpha_);
    gap_ = dual_ == -kInf ? kInf : primal_ - dual_;
  }

  double primal_objective_at(const vector_t &xw, const vector_t &w) const {
    return mean_loss(ds_.y(), obj_.loss_fn, xw) + obj_.reg.value(w);
  }

  trained_model finish(int it, stop_reason reason) {
    trained_model m;
    m.w = w_;
    m.alpha = alpha_;
    m.cache = build_cache(ds_, obj_, w_, alpha_);
    m.relative_gap = relative_gap(primal_, gap_);
    m.iterations = it;
    m.reason = reason;
    return m;
  }

  vector_t loss_derivatives() const {
    vector_t g(ds_.n());
    for (index_t i = 0; i < ds_.n(); ++i) g[i] = obj_.loss_fn.derivative(ds_.y()[i], xw_[i]);
    return g;
  }

  vector_t loss_curvatures() const {
    vector_t h(ds_.n());
    for (index_t i = 0; i < ds_.n(); ++i)
      h[i] = obj_.loss_fn.second_derivative(ds_.y()[i], xw_[i]);
    return h;
  }

  double quad_weight(index_t j) const {
    const reg_coord &c = coords_[static_cast<std::size_t>(j)];
    return c.kind == reg_coord::shape::elastic ? c.lambda : 0.0;
  }

  // Backtracking along w + t s with X s = xs. `slope` is the directional
  // decrease used in the Armijo test.
  bool line_search(const vector_t &s, const vector_t &xs, double slope) {
    if (!(slope < 0.0)) return false;
    const double p0 = primal_;
    double t = 1.0;
    for (int k = 0; k < cfg_.max_backtracks; ++k, t *= cfg_.backtrack) {
      const vector_t w1 = w_ + t * s;
      const vector_t xw1 = xw_ + t * xs;
      const double p1 = primal_objective_at(xw1, w1);
      if (p1 <= p0 + cfg_.armijo * t * slope || (t == 1.0 && p1 <= p0 + roundoff(p0))) {
        w_ = w1;
        xw_ = xw1;
        primal_ = p1;
        return true;
      }
    }
    return false;
  }

  bool newton_step() {
    const index_t d = ds_.d();
    if (d == 0) return false;
    const vector_t dl = loss_derivatives();
    const vector_t h = loss_curvatures();
    vector_t g = inv_n_ * (ds_.cols().transpose() * dl);
    for (index_t j = 0; j < d; ++j) g[j] += quad_weight(j) * w_[j];

    vector_t s;
    if (d <= cfg_.dense_newton_limit) {
      const col_matrix dx = h.asDiagonal() * ds_.cols();
      Eigen::MatrixXd H = inv_n_ * Eigen::MatrixXd(ds_.cols().transpose() * dx);
      for (index_t j = 0; j < d; ++j) H(j, j) += quad_weight(j);
      const double damping = 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
      H.diagonal().array() += damping;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
      if (ldlt.info() == Eigen::Success) s = -ldlt.solve(g);
      if (s.size() != d || !s.allFinite()) s = -g;
    } else {
      s = conjugate_gradient(h, g);
    }
    if (g.dot(s) >= 0.0) s = -g;
    const vector_t xs = ds_.rows() * s;
    return line_search(s, xs, g.dot(s));
  }

  // Truncated CG on (H + damping I) s = -g with Hessian-vector products.
  vector_t conjugate_gradient(const vector_t &h, const vector_t &g) const {
    const index_t d = ds_.d();
    const double gnorm = g.norm();
    const double tol = std::min(0.1, std::sqrt(gnorm)) * gnorm;
    const double damping = 1e-12;
    auto hess_vec = [&](const vector_t &v) {
      const vector_t xv = ds_.rows() * v;
      vector_t out = inv_n_ * (ds_.cols().transpose() * h.cwiseProduct(xv));
      for (index_t j = 0; j < d; ++j) out[j] += (quad_weight(j) + damping) * v[j];
      return out;
    };
    vector_t s = vector_t::Zero(d);
    vector_t r = -g;
    vector_t p = r;
    double rr = r.squaredNorm();
    for (index_t k = 0; k < std::min<index_t>(d, 500); ++k) {
      if (std::sqrt(rr) <= tol) break;
      const vector_t hp = hess_vec(p);
      const double php = p.dot(hp);
      if (!(php > 0.0)) break;
      const double a = rr / php;
      s += a * p;
      r -= a * hp;
      const double rr1 = r.squaredNorm();
      p = r + (rr1 / rr) * p;
      rr = rr1;
    }
    if (s.isZero(0.0)) s = -g;
    return s;
  }

  bool prox_newton_step() {
    const index_t d = ds_.d();
    const index_t n = ds_.n();
    if (d == 0) return false;
    const vector_t dl = loss_derivatives();
    const vector_t h = loss_curvatures();
    const vector_t g = inv_n_ * (ds_.cols().transpose() * dl);
    const double mu = obj_.loss_fn.smoothness();

    vector_t hj(d);
    for (index_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (col_matrix::InnerIterator it(ds_.cols(), j); it; ++it)
        s += h[it.row()] * it.value() * it.value();
      // Damping relative to the curvature bound keeps steps finite on
      // pieces of the loss with zero curvature.
      const double bound = mu * ds_.col_norm(j) * ds_.col_norm(j) * inv_n_;
      hj[j] = std::max(s * inv_n_ + damping_ * bound, 1e-10 * (1.0 + bound));
    }

    vector_t delta = vector_t::Zero(d);
    vector_t q = vector_t::Zero(n);  // X delta
    double first_change = -1.0;
    for (int pass = 0; pass < 100; ++pass) {
      double max_change = 0.0;
      for (index_t j = 0; j < d; ++j) {
        double a = g[j];
        for (col_matrix::InnerIterator it(ds_.cols(), j); it; ++it)
          a += inv_n_ * h[it.row()] * it.value() * q[it.row()];
        const double z = w_[j] + delta[j];
        const double z1 = prox(coords_[static_cast<std::size_t>(j)], z - a / hj[j], hj[j]);
        const double step = z1 - z;
        if (step != 0.0) {
          delta[j] += step;
          for (col_matrix::InnerIterator it(ds_.cols(), j); it; ++it)
            q[it.row()] += step * it.value();
          max_change = std::max(max_change, std::abs(step) * std::sqrt(hj[j]));
        }
      }
      if (first_change < 0.0) first_change = max_change;
      if (max_change <= 1e-4 * first_change) break;
    }

    const vector_t w1 = w_ + delta;
    // The linear model change may cancel to zero in floating point near the
    // optimum; a nonzero step then relies on the roundoff acceptance below.
    const double model_decrease =
        std::min(0.0, g.dot(delta) + obj_.reg.value(w1) - obj_.reg.value(w_));
    if (delta.isZero(0.0)) {
      damping_ = std::max(damping_ * 0.25, 1e-12);
      return false;
    }
    const double p0 = primal_;
    double t = 1.0;
    for (int k = 0; k < cfg_.max_backtracks; ++k, t *= cfg_.backtrack) {
      const vector_t wt = w_ + t * delta;
      const vector_t xwt = xw_ + t * q;
      const double pt = primal_objective_at(xwt, wt);
      if (pt <= p0 + cfg_.armijo * t * model_decrease ||
          (t == 1.0 && pt <= p0 + roundoff(p0))) {
        w_ = wt;
        xw_ = xwt;
        primal_ = pt;
        damping_ = t == 1.0 ? std::max(damping_ * 0.25, 1e-12) : std::min(damping_ * 4.0, 1e6);
        return true;
      }
    }
    damping_ = std::min(damping_ * 16.0, 1e6);
    return false;
  }

  double l1_weight(index_t j) const {
    const reg_coord &c = coords_[static_cast<std::size_t>(j)];
    if (c.kind == reg_coord::shape::l1) return c.lambda;
    if (c.kind == reg_coord::shape::elastic) return c.kappa;
    return 0.0;
  }

  // Newton step restricted to the orthant of the current iterate: zero l1
  // coordinates stay at zero unless the pseudo-gradient moves them, the
  // reduced system is solved densely and the trial point is projected back
  // onto the orthant. Coordinate descent alone converges slowly along
  // directions of near-zero curvature; this step does not.
  bool orthant_newton_step() {
    const index_t d = ds_.d();
    const vector_t dl = loss_derivatives();
    const vector_t h = loss_curvatures();
    const vector_t g = inv_n_ * (ds_.cols().transpose() * dl);

    vector_t sigma = vector_t::Zero(d);
    vector_t pg = vector_t::Zero(d);  // pseudo-gradient
    std::vector<index_t> active;
    for (index_t j = 0; j < d; ++j) {
      const double k = l1_weight(j);
      const double smooth_g = g[j] + quad_weight(j) * w_[j];
      if (w_[j] != 0.0 || k == 0.0) {
        sigma[j] = w_[j] > 0.0 ? 1.0 : w_[j] < 0.0 ? -1.0 : 0.0;
        pg[j] = smooth_g + k * sigma[j];
        active.push_back(j);
      } else if (smooth_g + k < 0.0) {
        sigma[j] = 1.0;
        pg[j] = smooth_g + k;
        active.push_back(j);
      } else if (smooth_g - k > 0.0) {
        sigma[j] = -1.0;
        pg[j] = smooth_g - k;
        active.push_back(j);
      }
    }
    const index_t m = static_cast<index_t>(active.size());
    if (m == 0) return false;

    const col_matrix dx = h.asDiagonal() * ds_.cols();
    const Eigen::MatrixXd full = inv_n_ * Eigen::MatrixXd(ds_.cols().transpose() * dx);
    Eigen::MatrixXd H(m, m);
    vector_t rhs(m);
    for (index_t a = 0; a < m; ++a) {
      for (index_t b = 0; b < m; ++b) H(a, b) = full(active[a], active[b]);
      H(a, a) += quad_weight(active[a]);
      rhs[a] = -pg[active[a]];
    }
    H.diagonal().array() += 1e-12 * (1.0 + H.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success) return false;
    const vector_t step = ldlt.solve(rhs);
    if (!step.allFinite()) return false;

    vector_t s = vector_t::Zero(d);
    for (index_t a = 0; a < m; ++a) s[active[a]] = step[a];
    const double slope = pg.dot(s);
    if (!(slope < 0.0)) return false;

    const double p0 = primal_;
    double t = 1.0;
    for (int k = 0; k < cfg_.max_backtracks; ++k, t *= cfg_.backtrack) {
      vector_t w1 = w_ + t * s;
      for (index_t j = 0; j < d; ++j)
        if (l1_weight(j) > 0.0 && w1[j] * sigma[j] < 0.0) w1[j] = 0.0;
      const vector_t xw1 = ds_.rows() * w1;
      const double p1 = primal_objective_at(xw1, w1);
      if (p1 <= p0 + cfg_.armijo * pg.dot(w1 - w_) && p1 < p0) {
        w_ = w1;
        xw_ = xw1;
        primal_ = p1;
        return true;
      }
    }
    return false;
  }

  // Majorization step with the global curvature bound mu ||X||_F^2 / n;
  // never increases P.
  bool prox_gradient_step() {
    const index_t d = ds_.d();
    if (d == 0) return false;
    const vector_t dl = loss_derivatives();
    const vector_t g = inv_n_ * (ds_.cols().transpose() * dl);
    const double L = obj_.loss_fn.smoothness() * ds_.col_norms().squaredNorm() * inv_n_;
    if (!(L > 0.0)) return false;
    vector_t w1(d);
    for (index_t j = 0; j < d; ++j)
      w1[j] = prox(coords_[static_cast<std::size_t>(j)], w_[j] - g[j] / L, L);
    const vector_t xw1 = ds_.rows() * w1;
    const double p1 = primal_objective_at(xw1, w1);
    if (!(p1 < primal_)) return false;
    w_ = w1;
    xw_ = xw1;
    primal_ = p1;
    return true;
  }

  const dataset &ds_;
  const objective &obj_;
  const train_config &cfg_;
  double inv_n_;
  std::vector<reg_coord> coords_;
  vector_t w_, xw_, alpha_;
  double primal_ = 0.0, dual_ = 0.0, gap_ = 0.0;
  double damping_ = 1e-6;
};

}  // namespace

trained_model train(const dataset &ds, const objective &obj, const train_config &cfg) {
  solver s(ds, obj, cfg);
  return s.run(nullptr);
}

trained_model train_with_stop_predicate(const dataset &ds, const objective &obj,
                                        const train_config &cfg, const stop_predicate &stop) {
  solver s(ds, obj, cfg);
  return s.run(stop ? &stop : nullptr);
}

}  // namespace glru
