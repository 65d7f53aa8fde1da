#ifndef GLRU_CONVEX_HPP
#define GLRU_CONVEX_HPP

#include "glru/data.hpp"
#include "glru/interval.hpp"

#include <optional>
#include <span>
#include <string>

namespace glru {

enum class loss_kind { squared, huber, squared_hinge, smoothed_hinge, logistic };

// Univariate loss l_y(t) of a linear prediction t against outcome y, with
// its subgradient, convex conjugate and smoothness constant. All catalog
// losses are finite, convex and smooth on R.
class loss {
 public:
  explicit loss(loss_kind kind = loss_kind::logistic, double gamma = 1.0);

  static loss parse(const std::string &name, double gamma = 1.0);

  loss_kind kind() const { return kind_; }
  double gamma() const { return gamma_; }
  std::string name() const;
  bool for_classification() const;

  double value(double y, double t) const;
  interval subgrad(double y, double t) const;
  // Derivative at t (all catalog losses are differentiable).
  double derivative(double y, double t) const;
  // Second derivative where it exists; the right-hand value at kinks of l'.
  double second_derivative(double y, double t) const;

  // l_y^*(s); +inf outside conj_domain(y).
  double conj(double y, double s) const;
  // dom l_y^* = [inf over R of l', sup over R of l'].
  interval conj_domain(double y) const;

  // mu such that l_y is mu-smooth.
  double smoothness() const;

 private:
  loss_kind kind_;
  double gamma_;
};

// One coordinate of a separable regularizer. Three shapes cover the
// catalog: elastic(l2 weight, l1 weight) with strong convexity lambda,
// pure l1, and the unregularized (free) intercept coordinate.
struct reg_coord {
  enum class shape { elastic, l1, free };

  shape kind = shape::elastic;
  double lambda = 0.0;  // quadratic weight (elastic) or l1 weight (l1)
  double kappa = 0.0;   // l1 weight for elastic

  double value(double t) const;
  interval subgrad(double t) const;
  double conj(double s) const;
  interval conj_subgrad(double s) const;
  // [inf over R of rho', sup over R of rho'] (= dom rho^*).
  interval subgrad_range() const;
  double strong_convexity() const;
  bool smooth() const { return kind != shape::l1 && !(kind == shape::elastic && kappa > 0.0); }
};

enum class reg_kind { l2, elastic_net, l1 };

// Separable regularizer sum_j rho_j(w_j). Every coordinate shares one
// shape except the optional free (intercept) coordinate.
class regularizer {
 public:
  regularizer() = default;
  regularizer(reg_kind kind, double lambda, double kappa = 0.0,
              std::optional<index_t> free_coordinate = std::nullopt);

  static regularizer l2(double lambda) { return {reg_kind::l2, lambda}; }
  static regularizer elastic_net(double lambda, double kappa) {
    return {reg_kind::elastic_net, lambda, kappa};
  }
  static regularizer parse(const std::string &name, double lambda, double kappa,
                           std::optional<index_t> free_coordinate);

  reg_kind kind() const { return kind_; }
  double lambda() const { return lambda_; }
  double kappa() const { return kappa_; }
  std::optional<index_t> free_coordinate() const { return free_; }
  std::string name() const;

  reg_coord coord(index_t j) const;

  // Strong convexity constant shared by all of coordinates [0, d): zero
  // when any coordinate is not strongly convex.
  double strong_convexity(index_t d) const;
  bool smooth() const;
  bool is_plain_l2() const { return kind_ == reg_kind::l2 && !free_; }

  double value(const vector_t &w) const;
  double conj(const vector_t &v) const;

  // The regularizer after removing coordinates `removed` (sorted or not)
  // from a d-dimensional problem; the free coordinate index is remapped,
  // or dropped if it is removed.
  regularizer without_coordinates(std::span<const index_t> removed, index_t d) const;
  regularizer with_kind(reg_kind kind) const;

 private:
  reg_kind kind_ = reg_kind::l2;
  double lambda_ = 1.0;
  double kappa_ = 0.0;
  std::optional<index_t> free_;
};

// Element of a subgradient interval with the smallest absolute value.
double select_min_abs(const interval &iv);

// min / max of c'v over the box a <= v <= b. A coordinate with c_j = 0
// contributes nothing even when its box is unbounded.
double minlin(std::span<const double> a, std::span<const double> b,
              std::span<const double> c);
double maxlin(std::span<const double> a, std::span<const double> b,
              std::span<const double> c);
double minlin(std::span<const interval> box, std::span<const double> c);
double maxlin(std::span<const interval> box, std::span<const double> c);

// Scalar term of minlin/maxlin for one coordinate.
inline double minlin_term(const interval &box, double c) {
  if (c > 0.0) return c * box.lo;
  if (c < 0.0) return c * box.hi;
  return 0.0;
}
inline double maxlin_term(const interval &box, double c) {
  if (c > 0.0) return c * box.hi;
  if (c < 0.0) return c * box.lo;
  return 0.0;
}

}  // namespace glru

#endif  // GLRU_CONVEX_HPP
