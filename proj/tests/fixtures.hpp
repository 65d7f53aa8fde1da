#ifndef GLRU_TESTS_FIXTURES_HPP
#define GLRU_TESTS_FIXTURES_HPP

#include "oracles.hpp"

#include "glru/erm.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixture {

struct pairing {
  oracle::loss_def loss;
  oracle::reg_def reg;  // `free` is filled in per dataset width
  bool intercept = false;

  std::string name() const {
    return glru::loss(loss.kind, loss.gamma).name() + "/" + reg.build().name() +
           (intercept ? "+intercept" : "");
  }
  bool classification() const { return glru::loss(loss.kind, loss.gamma).for_classification(); }
};

// Every loss crossed with l2, elastic net, and (with an intercept) l2,
// elastic net and l1.
inline std::vector<pairing> catalog() {
  using glru::loss_kind;
  using glru::reg_kind;
  const std::vector<oracle::loss_def> losses{{loss_kind::squared, 1.0},
                                             {loss_kind::huber, 0.7},
                                             {loss_kind::squared_hinge, 1.0},
                                             {loss_kind::smoothed_hinge, 1.0},
                                             {loss_kind::smoothed_hinge, 0.5},
                                             {loss_kind::logistic, 1.0}};
  std::vector<pairing> out;
  for (const auto &l : losses) {
    out.push_back({l, {reg_kind::l2, 0.3, 0.0, {}}, false});
    out.push_back({l, {reg_kind::elastic_net, 0.2, 0.05, {}}, false});
    out.push_back({l, {reg_kind::l2, 0.3, 0.0, {}}, true});
    out.push_back({l, {reg_kind::elastic_net, 0.2, 0.05, {}}, true});
    out.push_back({l, {reg_kind::l1, 0.05, 0.0, {}}, true});
  }
  return out;
}

struct instance {
  Eigen::MatrixXd x;  // includes the intercept column when enabled
  Eigen::VectorXd y;
  glru::dataset ds;
  glru::objective obj;
  oracle::problem ref;
};

inline Eigen::MatrixXd random_matrix(std::mt19937_64 &rng, Eigen::Index n, Eigen::Index d,
                                     double sparsity) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = u(rng) < sparsity ? 0.0 : g(rng);
  return x;
}

inline Eigen::VectorXd random_labels(std::mt19937_64 &rng, const Eigen::MatrixXd &x,
                                     bool classification) {
  std::normal_distribution<double> g;
  Eigen::VectorXd beta(x.cols());
  for (Eigen::Index j = 0; j < beta.size(); ++j) beta[j] = g(rng);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double s = x.row(i).dot(beta) + 0.8 * g(rng);
    y[i] = classification ? (s >= 0.0 ? 1.0 : -1.0) : s;
  }
  return y;
}

// Builds the library objects and the dense reference for one design matrix.
inline instance make_instance(const pairing &p, Eigen::MatrixXd x, Eigen::VectorXd y) {
  instance out;
  if (p.intercept) {
    x.conservativeResize(Eigen::NoChange, x.cols() + 1);
    x.col(x.cols() - 1).setOnes();
  }
  out.x = x;
  out.y = y;
  const auto kind = p.classification() ? glru::task::classification : glru::task::regression;
  out.ds = glru::dataset::from_dense(x, y, kind);
  oracle::reg_def r = p.reg;
  if (p.intercept) r.free = x.cols() - 1;
  out.obj = glru::objective{glru::loss(p.loss.kind, p.loss.gamma), r.build()};
  out.ref = oracle::problem{x, y, p.loss, r};
  return out;
}

inline instance random_instance(std::mt19937_64 &rng, const pairing &p, Eigen::Index n,
                                Eigen::Index d, double sparsity = 0.2) {
  Eigen::MatrixXd x = random_matrix(rng, n, d, sparsity);
  Eigen::VectorXd y = random_labels(rng, x, p.classification());
  // A single class with an unregularized intercept has no minimizer.
  if (p.classification() && std::abs(y.sum()) == static_cast<double>(n)) y[0] = -y[0];
  return make_instance(p, std::move(x), std::move(y));
}

inline glru::train_config tight(double tol = 1e-10) {
  glru::train_config c;
  c.rel_gap_tol = tol;
  c.max_iter = 2000;
  return c;
}

}  // namespace fixture

#endif  // GLRU_TESTS_FIXTURES_HPP
