#include "glru/convex.hpp"

#include "glru/error.hpp"

#include <cmath>

namespace glru {

namespace {

// Relative band around +-lambda in which an l1 conjugate argument counts as
// on the boundary of dom rho^*.
constexpr double kL1BoundaryTol = 1e-12;
// Absolute band around 0 in which a free-coordinate conjugate argument
// counts as 0 (dom rho^* = {0}).
constexpr double kFreeTol = 1e-10;

double sign(double v) { return (v > 0.0) - (v < 0.0); }

double pos(double v) { return v > 0.0 ? v : 0.0; }

// log(1 + exp(-u)) without overflow.
double log1pexp_neg(double u) {
  if (u > 0.0) return std::log1p(std::exp(-u));
  return -u + std::log1p(std::exp(u));
}

// 1 / (1 + exp(-z))
double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

// ---------------------------------------------------------------------------
// Losses

loss::loss(loss_kind kind, double gamma) : kind_(kind), gamma_(gamma) {
  if ((kind == loss_kind::huber || kind == loss_kind::smoothed_hinge) && !(gamma > 0.0))
    throw validation_error("loss hyperparameter gamma must be positive");
}

loss loss::parse(const std::string &name, double gamma) {
  if (name == "squared") return loss(loss_kind::squared, gamma);
  if (name == "huber") return loss(loss_kind::huber, gamma);
  if (name == "squared-hinge") return loss(loss_kind::squared_hinge, gamma);
  if (name == "smoothed-hinge") return loss(loss_kind::smoothed_hinge, gamma);
  if (name == "logistic") return loss(loss_kind::logistic, gamma);
  throw validation_error("unknown loss '" + name + "'");
}

std::string loss::name() const {
  switch (kind_) {
    case loss_kind::squared: return "squared";
    case loss_kind::huber: return "huber";
    case loss_kind::squared_hinge: return "squared-hinge";
    case loss_kind::smoothed_hinge: return "smoothed-hinge";
    case loss_kind::logistic: return "logistic";
  }
  return "unknown";
}

bool loss::for_classification() const {
  return kind_ == loss_kind::squared_hinge || kind_ == loss_kind::smoothed_hinge ||
         kind_ == loss_kind::logistic;
}

double loss::value(double y, double t) const {
  switch (kind_) {
    case loss_kind::squared:
      return 0.5 * (t - y) * (t - y);
    case loss_kind::huber: {
      const double r = std::abs(t - y);
      return r <= gamma_ ? 0.5 * r * r : gamma_ * r - 0.5 * gamma_ * gamma_;
    }
    case loss_kind::squared_hinge: {
      const double m = pos(1.0 - y * t);
      return m * m;
    }
    case loss_kind::smoothed_hinge: {
      const double u = y * t;
      if (u >= 1.0) return 0.0;
      if (u >= 1.0 - gamma_) return (1.0 - u) * (1.0 - u) / (2.0 * gamma_);
      return 1.0 - u - 0.5 * gamma_;
    }
    case loss_kind::logistic:
      return log1pexp_neg(y * t);
  }
  return 0.0;
}

double loss::derivative(double y, double t) const {
  switch (kind_) {
    case loss_kind::squared:
      return t - y;
    case loss_kind::huber: {
      const double r = t - y;
      return sign(r) * std::min(gamma_, std::abs(r));
    }
    case loss_kind::squared_hinge:
      return -2.0 * y * pos(1.0 - y * t);
    case loss_kind::smoothed_hinge: {
      const double u = y * t;
      if (u >= 1.0) return 0.0;
      if (u >= 1.0 - gamma_) return -y * (1.0 - u) / gamma_;
      return -y;
    }
    case loss_kind::logistic:
      return -y * sigmoid(-y * t);
  }
  return 0.0;
}

interval loss::subgrad(double y, double t) const {
  return interval::point(derivative(y, t));
}

double loss::second_derivative(double y, double t) const {
  switch (kind_) {
    case loss_kind::squared:
      return 1.0;
    case loss_kind::huber:
      return std::abs(t - y) < gamma_ ? 1.0 : 0.0;
    case loss_kind::squared_hinge:
      return y * t < 1.0 ? 2.0 : 0.0;
    case loss_kind::smoothed_hinge: {
      const double u = y * t;
      return (u < 1.0 && u > 1.0 - gamma_) ? 1.0 / gamma_ : 0.0;
    }
    case loss_kind::logistic: {
      const double p = sigmoid(y * t);
      return p * (1.0 - p);
    }
  }
  return 0.0;
}

double loss::conj(double y, double s) const {
  switch (kind_) {
    case loss_kind::squared:
      return 0.5 * s * (s + 2.0 * y);
    case loss_kind::huber:
      return std::abs(s) <= gamma_ ? 0.5 * s * (s + 2.0 * y) : kInf;
    case loss_kind::squared_hinge:
      return y * s <= 0.0 ? (s * s + 4.0 * y * s) / 4.0 : kInf;
    case loss_kind::smoothed_hinge: {
      const double v = y * s;
      if (v < -1.0 || v > 0.0) return kInf;
      return v + 0.5 * gamma_ * v * v;
    }
    case loss_kind::logistic: {
      const double v = y * s;
      if (v < -1.0 || v > 0.0) return kInf;
      if (v == -1.0 || v == 0.0) return 0.0;
      return (1.0 + v) * std::log1p(v) - v * std::log(-v);
    }
  }
  return kInf;
}

interval loss::conj_domain(double y) const {
  switch (kind_) {
    case loss_kind::squared:
      return interval::whole();
    case loss_kind::huber:
      return {-gamma_, gamma_};
    case loss_kind::squared_hinge:
      return y > 0 ? interval{-kInf, 0.0} : interval{0.0, kInf};
    case loss_kind::smoothed_hinge:
    case loss_kind::logistic:
      return y > 0 ? interval{-1.0, 0.0} : interval{0.0, 1.0};
  }
  return interval::whole();
}

double loss::smoothness() const {
  switch (kind_) {
    case loss_kind::squared: return 1.0;
    case loss_kind::huber: return 1.0;
    case loss_kind::squared_hinge: return 2.0;
    case loss_kind::smoothed_hinge: return 1.0 / gamma_;
    case loss_kind::logistic: return 0.25;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Regularizer coordinates

double reg_coord::value(double t) const {
  switch (kind) {
    case shape::elastic: return 0.5 * lambda * t * t + kappa * std::abs(t);
    case shape::l1: return lambda * std::abs(t);
    case shape::free: return 0.0;
  }
  return 0.0;
}

interval reg_coord::subgrad(double t) const {
  switch (kind) {
    case shape::elastic:
      if (t == 0.0) return {-kappa, kappa};
      return interval::point(lambda * t + kappa * sign(t));
    case shape::l1:
      if (t == 0.0) return {-lambda, lambda};
      return interval::point(lambda * sign(t));
    case shape::free:
      return interval::point(0.0);
  }
  return interval::point(0.0);
}

double reg_coord::conj(double s) const {
  switch (kind) {
    case shape::elastic: {
      const double m = pos(std::abs(s) - kappa);
      return m * m / (2.0 * lambda);
    }
    case shape::l1:
      return std::abs(s) <= lambda * (1.0 + kL1BoundaryTol) ? 0.0 : kInf;
    case shape::free:
      return std::abs(s) <= kFreeTol ? 0.0 : kInf;
  }
  return kInf;
}

interval reg_coord::conj_subgrad(double s) const {
  switch (kind) {
    case shape::elastic:
      return interval::point(sign(s) * pos(std::abs(s) - kappa) / lambda);
    case shape::l1: {
      const double band = lambda * kL1BoundaryTol;
      if (s < -lambda - band) return {-kInf, -kInf};
      if (s <= -lambda + band) return {-kInf, 0.0};
      if (s < lambda - band) return interval::point(0.0);
      if (s <= lambda + band) return {0.0, kInf};
      return {kInf, kInf};
    }
    case shape::free:
      if (s < -kFreeTol) return {-kInf, -kInf};
      if (s <= kFreeTol) return interval::whole();
      return {kInf, kInf};
  }
  return interval::whole();
}

interval reg_coord::subgrad_range() const {
  switch (kind) {
    case shape::elastic: return interval::whole();
    case shape::l1: return {-lambda, lambda};
    case shape::free: return interval::point(0.0);
  }
  return interval::whole();
}

double reg_coord::strong_convexity() const {
  return kind == shape::elastic ? lambda : 0.0;
}

// ---------------------------------------------------------------------------
// Regularizer

regularizer::regularizer(reg_kind kind, double lambda, double kappa,
                         std::optional<index_t> free_coordinate)
    : kind_(kind), lambda_(lambda), kappa_(kappa), free_(free_coordinate) {
  if (!(lambda > 0.0)) throw validation_error("regularization lambda must be positive");
  if (kind == reg_kind::elastic_net && !(kappa >= 0.0))
    throw validation_error("elastic-net kappa must be nonnegative");
  if (kind != reg_kind::elastic_net) kappa_ = 0.0;
  if (free_ && *free_ < 0) throw validation_error("negative intercept coordinate");
}

regularizer regularizer::parse(const std::string &name, double lambda, double kappa,
                               std::optional<index_t> free_coordinate) {
  if (name == "l2") return {reg_kind::l2, lambda, 0.0, free_coordinate};
  if (name == "elastic-net" || name == "enet")
    return {reg_kind::elastic_net, lambda, kappa, free_coordinate};
  if (name == "l1") return {reg_kind::l1, lambda, 0.0, free_coordinate};
  throw validation_error("unknown regularizer '" + name + "'");
}

std::string regularizer::name() const {
  switch (kind_) {
    case reg_kind::l2: return "l2";
    case reg_kind::elastic_net: return "elastic-net";
    case reg_kind::l1: return "l1";
  }
  return "unknown";
}

reg_coord regularizer::coord(index_t j) const {
  if (free_ && *free_ == j) return {reg_coord::shape::free, 0.0, 0.0};
  switch (kind_) {
    case reg_kind::l2: return {reg_coord::shape::elastic, lambda_, 0.0};
    case reg_kind::elastic_net: return {reg_coord::shape::elastic, lambda_, kappa_};
    case reg_kind::l1: return {reg_coord::shape::l1, lambda_, 0.0};
  }
  return {};
}

double regularizer::strong_convexity(index_t d) const {
  if (kind_ == reg_kind::l1) return 0.0;
  if (free_ && *free_ < d) return 0.0;
  return lambda_;
}

bool regularizer::smooth() const {
  return kind_ == reg_kind::l2 || (kind_ == reg_kind::elastic_net && kappa_ == 0.0);
}

double regularizer::value(const vector_t &w) const {
  double s = 0.0;
  for (index_t j = 0; j < w.size(); ++j) s += coord(j).value(w[j]);
  return s;
}

double regularizer::conj(const vector_t &v) const {
  double s = 0.0;
  for (index_t j = 0; j < v.size(); ++j) s += coord(j).conj(v[j]);
  return s;
}

regularizer regularizer::without_coordinates(std::span<const index_t> removed,
                                             index_t d) const {
  regularizer out = *this;
  if (!free_ || *free_ >= d) return out;
  index_t shift = 0;
  for (index_t j : removed) {
    if (j == *free_) {
      out.free_.reset();
      return out;
    }
    if (j < *free_) ++shift;
  }
  out.free_ = *free_ - shift;
  return out;
}

regularizer regularizer::with_kind(reg_kind kind) const {
  regularizer out = *this;
  out.kind_ = kind;
  return out;
}

// ---------------------------------------------------------------------------

double select_min_abs(const interval &iv) {
  if (iv.contains(0.0)) return 0.0;
  return iv.lo > 0.0 ? iv.lo : iv.hi;
}

double minlin(std::span<const double> a, std::span<const double> b,
              std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw validation_error("minlin: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += minlin_term({a[j], b[j]}, c[j]);
  return s;
}

double maxlin(std::span<const double> a, std::span<const double> b,
              std::span<const double> c) {
  if (a.size() != b.size() || a.size() != c.size())
    throw validation_error("maxlin: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += maxlin_term({a[j], b[j]}, c[j]);
  return s;
}

double minlin(std::span<const interval> box, std::span<const double> c) {
  if (box.size() != c.size()) throw validation_error("minlin: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += minlin_term(box[j], c[j]);
  return s;
}

double maxlin(std::span<const interval> box, std::span<const double> c) {
  if (box.size() != c.size()) throw validation_error("maxlin: length mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) s += maxlin_term(box[j], c[j]);
  return s;
}

}  // namespace glru
