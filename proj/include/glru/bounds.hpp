#ifndef GLRU_BOUNDS_HPP
#define GLRU_BOUNDS_HPP

#include "glru/convex.hpp"
#include "glru/data.hpp"
#include "glru/erm.hpp"
#include "glru/interval.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace glru {

// Duality gap of a modified problem at a candidate pair (w_hat, alpha_hat),
// with the constants the radii need.
struct gap_certificate {
  double gap = 0.0;
  index_t n_new = 0;
  double lambda = 0.0;  // strong convexity of the regularizer (0 if none)
  double mu = 0.0;      // smoothness of the loss
  std::string source;   // which modification produced it

  static gap_certificate make(double gap, index_t n_new, const objective &obj, index_t d_new,
                              std::string source = {});
};

// sqrt(2 G / lambda): ||w*new - w_hat|| <= r_P.
double radius_primal(const gap_certificate &cert);
// sqrt(2 n_new mu G): ||alpha*new - alpha_hat|| <= r_D.
double radius_dual(const gap_certificate &cert);

// [-sup dl(m + r||x||), -inf dl(m - r||x||)] for one instance with margin m.
interval dual_box_entry(const loss &loss_fn, double y, double margin, double row_norm,
                        double r_p);
std::vector<interval> dual_box_from_primal_ball(const dataset &ds_new, const loss &loss_fn,
                                                const vector_t &w_hat, double r_p);

// [min, max] of X_j' alpha over the per-instance loss boxes of dom D.
interval column_loss_range(const dataset &ds, const loss &loss_fn, index_t j);

// F_j = X_j' alpha_hat -/+ r_D ||X_j||. With `loss_range` the interval is
// intersected with the dom D constraints (loss boxes and the range of
// rho_j' scaled by n_new). An empty intersection, which only arises from
// rounding, falls back to the plain interval.
interval f_bounds_core(double xt_alpha, double col_norm, double r_d, double n_new,
                       const reg_coord &coord, const std::optional<interval> &loss_range);
interval f_bounds(const dataset &ds_new, const objective &obj, const vector_t &alpha_hat,
                  double r_d, index_t j, bool tighten);

// [lower drho*(F_lo / n_new), upper drho*(F_hi / n_new)].
interval primal_box_entry(const reg_coord &coord, const interval &f, double n_new);
std::vector<interval> primal_box_from_dual_ball(const dataset &ds_new, const objective &obj,
                                                const vector_t &alpha_hat, double r_d,
                                                bool tighten);

// Primal-SCB: x'w_hat -/+ r_P ||x||.
interval predict_bounds_primal_scb(double margin, double x_norm, double r_p);
interval predict_bounds_primal_scb(const vector_t &x, const vector_t &w_hat, double r_p);

// Dual-SCB: [minlin, maxlin] of x over the w-box.
interval predict_bounds_dual_scb(const vector_t &x, std::span<const interval> w_box);
// Same for row i of a dataset, touching only its nonzeros.
interval predict_bounds_dual_scb(const dataset &ds, index_t i, std::span<const interval> w_box);

enum class label { positive, negative, undetermined };

label label_determination(const interval &bound);
std::string to_string(label l);

enum class bound_kind { primal_scb, dual_scb };

bound_kind parse_bound_kind(const std::string &name);
std::string to_string(bound_kind k);

}  // namespace glru

#endif  // GLRU_BOUNDS_HPP
