#ifndef GLRU_WORKFLOWS_HPP
#define GLRU_WORKFLOWS_HPP

#include "glru/bounds.hpp"
#include "glru/erm.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace glru {

// sign(0) = +1.
inline double predicted_label(double margin) { return margin >= 0.0 ? 1.0 : -1.0; }

// Validation errors |{i : y_i != sign(X_i w)}|.
int count_errors(const dataset &ds, const vector_t &w);

// ---------------------------------------------------------------------------
// LOOCV

enum class fold_status { determined_correct, determined_error, trained, approximated };

std::string to_string(fold_status s);

struct fold_record {
  fold_status status = fold_status::trained;
  interval bound = interval::whole();  // screening bound (whole if none)
  double predicted = 1.0;              // label assigned to the held-out instance
  double train_seconds = 0.0;
  int iterations = 0;
  bool early_stopped = false;
};

struct loocv_report {
  std::string method;
  int error_count = 0;
  int trainings_performed = 0;
  double gap_seconds_total = 0.0;
  double total_seconds = 0.0;
  std::vector<fold_record> folds;
};

struct loocv_config {
  train_config train;
  bound_kind bound = bound_kind::primal_scb;
  bool early_stop = false;
  bool tighten = true;
  bool warm_start = true;
  unsigned threads = 1;
};

// Each fold trains on all instances but i (warm-started from the full-data
// model unless disabled) and predicts instance i.
loocv_report loocv_naive(const dataset &ds, const objective &obj, const loocv_config &cfg);
loocv_report loocv_naive(const dataset &ds, const objective &obj, const loocv_config &cfg,
                         const trained_model &full);

// Screens each fold with the selected prediction bound and trains only the
// undetermined ones. Throws assumption_error up front if the bound's
// precondition fails.
loocv_report loocv_glru(const dataset &ds, const objective &obj, const loocv_config &cfg);
loocv_report loocv_glru(const dataset &ds, const objective &obj, const loocv_config &cfg,
                        const trained_model &full);

// One Newton step from the full-data optimum per fold, with the fold Hessian
// inverse obtained by a rank-one update of a shared pseudo-inverse.
// Needs an L2 regularizer (an unregularized intercept is allowed).
loocv_report loocv_approx(const dataset &ds, const objective &obj, const loocv_config &cfg);
loocv_report loocv_approx(const dataset &ds, const objective &obj, const loocv_config &cfg,
                          const trained_model &full);

// (H - s x x')^{-1} from H^{-1}.
Eigen::MatrixXd sherman_morrison_downdate(const Eigen::MatrixXd &h_inv, const vector_t &x,
                                          double s);

// ---------------------------------------------------------------------------
// Stepwise feature elimination

struct stepwise_candidate {
  index_t feature = 0;  // original column index
  // Validation instances certified correct / incorrect / undetermined
  // (GLRU only; -1 when not computed).
  int correct = -1;
  int incorrect = -1;
  int undetermined = -1;
  int error = -1;  // validation errors after retraining; -1 if not trained
  bool trained = false;
};

struct stepwise_step {
  std::vector<stepwise_candidate> candidates;
  int candidates_screened = 0;
  int candidates_trained = 0;
  int e_null = 0;
  int e_best = 0;
  std::optional<index_t> removed;
};

struct stepwise_report {
  std::string method;
  std::vector<index_t> removed_order;
  std::vector<index_t> final_set;
  std::vector<stepwise_step> steps;
  int trainings_performed = 0;
  double total_seconds = 0.0;
};

struct stepwise_config {
  train_config train;
  bound_kind bound = bound_kind::primal_scb;
  bool tighten = true;
  unsigned threads = 1;
  int max_steps = -1;  // negative: run until no removal improves
};

// Backward elimination on validation error. Ties go to the lowest feature
// index and the current set wins ties against every removal. The
// regularizer's free coordinate, if any, is never a candidate.
stepwise_report stepwise_naive(const dataset &train, const dataset &valid, const objective &obj,
                               const stepwise_config &cfg);
stepwise_report stepwise_glru(const dataset &train, const dataset &valid, const objective &obj,
                              const stepwise_config &cfg);

// ---------------------------------------------------------------------------
// Bound tightness

struct tightness_config {
  std::vector<double> lambdas{1.0, 0.125, 0.015625};
  int max_mods = 10;
  double test_fraction = 0.1;
  std::uint64_t seed = 0;
  bool tighten = true;
  train_config train;
  std::vector<modification::kind_t> kinds{
      modification::kind_t::remove_instances, modification::kind_t::add_instances,
      modification::kind_t::remove_features, modification::kind_t::add_features};
};

struct tightness_row {
  double lambda = 0.0;
  modification::kind_t kind = modification::kind_t::remove_instances;
  int count = 0;
  bound_kind bound = bound_kind::primal_scb;
  double rate = 0.0;
  double gap = 0.0;
};

struct tightness_report {
  index_t n_train = 0;
  index_t n_test = 0;
  index_t d_train = 0;
  std::vector<tightness_row> rows;
};

// Splits `ds` (seeded) into test points, a pool of instances to add and a
// training part; the last max_mods features are held out as the pool of
// features to add. For every lambda, kind, modification count 0..max_mods
// and bound, reports the fraction of test points whose bound excludes 0.
// The regularizer's lambda is replaced by each grid value.
tightness_report tightness_study(const dataset &ds, const objective &obj,
                                 const tightness_config &cfg);

void write_tightness_csv(std::ostream &out, const tightness_report &report);

}  // namespace glru

#endif  // GLRU_WORKFLOWS_HPP
