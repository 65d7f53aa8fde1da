#ifndef GLRU_ERM_HPP
#define GLRU_ERM_HPP

#include "glru/convex.hpp"
#include "glru/data.hpp"

#include <functional>
#include <optional>

namespace glru {

// Regularized ERM with linear predictions:
//   P(w) = (1/n) sum_i l_{y_i}(X_i w) + sum_j rho_j(w_j)
//   D(a) = -(1/n) sum_i l*_{y_i}(-a_i) - sum_j rho*_j((1/n) X_j' a)
struct objective {
  loss loss_fn;
  regularizer reg;
};

double primal_objective(const dataset &ds, const objective &obj, const vector_t &w);
// -inf when alpha lies outside dom D.
double dual_objective(const dataset &ds, const objective &obj, const vector_t &alpha);
// +inf when alpha lies outside dom D.
double duality_gap(const dataset &ds, const objective &obj, const vector_t &w,
                   const vector_t &alpha);

// KKT map alpha_i = -l'_{y_i}(X_i w).
vector_t dual_from_primal(const dataset &ds, const loss &loss_fn, const vector_t &w);
vector_t dual_from_margins(const vector_t &y, const loss &loss_fn, const vector_t &xw);

// Moves a KKT-derived alpha into dom D: clips to the loss boxes, enforces
// X_f' alpha = 0 for the free coordinate f, and shrinks alpha toward zero
// until every l1 coordinate satisfies |(1/n) X_j' alpha| <= lambda.
vector_t make_dual_feasible(const dataset &ds, const objective &obj, vector_t alpha);

// Values retained alongside (w*, alpha*) so that modified-problem gaps can
// be evaluated in time proportional to the modification.
struct precompute_cache {
  vector_t xw;              // X w
  vector_t xt_alpha;        // X' alpha
  double loss_sum = 0.0;       // (1/n) sum_i l(X_i w)
  double reg_sum = 0.0;        // sum_j rho_j(w_j)
  double loss_conj_sum = 0.0;  // (1/n) sum_i l*(-alpha_i)
  double reg_conj_sum = 0.0;   // sum_j rho*_j((1/n) X_j' alpha)
  double xt_alpha_sqnorm = 0.0;

  double primal() const { return loss_sum + reg_sum; }
  double dual() const { return -loss_conj_sum - reg_conj_sum; }
  double gap() const { return primal() - dual(); }
};

precompute_cache build_cache(const dataset &ds, const objective &obj, const vector_t &w,
                             const vector_t &alpha);

double relative_gap(double primal, double gap);

enum class stop_reason { relative_gap, predicate };

struct trained_model {
  vector_t w;
  vector_t alpha;
  precompute_cache cache;
  double relative_gap = 0.0;
  int iterations = 0;
  stop_reason reason = stop_reason::relative_gap;
};

struct train_config {
  double rel_gap_tol = 1e-6;
  int max_iter = 300;
  std::optional<vector_t> warm_start;
  // Evaluate the stop predicate every `stop_period` outer iterations.
  int stop_period = 1;
  // Armijo sufficient-decrease constant and backtracking factor.
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
  // Problems with at most this many features use a dense Newton system;
  // larger ones use conjugate gradients on Hessian-vector products.
  index_t dense_newton_limit = 256;
};

// The iterate handed to a stop predicate.
struct iterate_view {
  const vector_t &w;
  const vector_t &alpha;
  const vector_t &xw;
  double primal;
  double dual;
  double gap;
  int iteration;
};

using stop_predicate = std::function<bool(const iterate_view &)>;

// Minimizes P until [P(w) - D(alpha)] / P(w) <= rel_gap_tol (absolute gap
// when P(w) = 0). Smooth regularizers use damped Newton; regularizers with
// an l1 part use proximal Newton with an inner coordinate descent.
// Throws convergence_error after max_iter outer iterations.
trained_model train(const dataset &ds, const objective &obj, const train_config &cfg = {});

// As train, but also returns the first iterate (checked every stop_period
// iterations) on which `stop` holds.
trained_model train_with_stop_predicate(const dataset &ds, const objective &obj,
                                        const train_config &cfg, const stop_predicate &stop);

}  // namespace glru

#endif  // GLRU_ERM_HPP
