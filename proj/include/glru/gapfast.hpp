#ifndef GLRU_GAPFAST_HPP
#define GLRU_GAPFAST_HPP

#include "glru/bounds.hpp"
#include "glru/erm.hpp"

#include <cstdint>
#include <span>

namespace glru {

// Work done by one gap evaluation: stored matrix entries read, and dense
// coordinate passes (one unit per coordinate of a length-d or length-n
// vector visited).
struct touch_counter {
  std::uint64_t matrix_entries_touched = 0;
  std::uint64_t vector_ops = 0;

  void reset() { *this = {}; }
};

struct instance_gap {
  gap_certificate cert;
  // Dual candidate for the modified problem; empty unless materialized.
  vector_t alpha_hat;
};

struct feature_gap {
  gap_certificate cert;
  // Primal candidate for the modified problem; empty unless materialized.
  vector_t w_hat;
  regularizer reg_new;
};

// Gap of the problem without instances `removed` at (w*, alpha* restricted).
instance_gap gap_instance_removal(const trained_model &model, const dataset &ds_old,
                                  const objective &obj, std::span<const index_t> removed,
                                  touch_counter *counter = nullptr, bool materialize = true);

// Gap after appending rows at (w*, alpha* extended by the KKT map).
instance_gap gap_instance_addition(const trained_model &model, const dataset &ds_old,
                                   const objective &obj, const row_matrix &new_rows,
                                   const vector_t &new_labels, touch_counter *counter = nullptr,
                                   bool materialize = true);

// Gap of the problem without features `removed` at (w* restricted, alpha*).
feature_gap gap_feature_removal(const trained_model &model, const dataset &ds_old,
                                const objective &obj, std::span<const index_t> removed,
                                touch_counter *counter = nullptr, bool materialize = true);

// Gap after appending columns at (w* extended by the conjugate KKT map,
// alpha*). New columns take the regularizer's regular coordinate shape.
feature_gap gap_feature_addition(const trained_model &model, const dataset &ds_old,
                                 const objective &obj, const col_matrix &new_cols,
                                 touch_counter *counter = nullptr, bool materialize = true);

// Plain-L2 fast paths: single-instance removal using the cached ||X'alpha||^2,
// and single-feature removal. Throw assumption_error for other regularizers.
gap_certificate gap_loocv_l2(const trained_model &model, const dataset &ds,
                             const objective &obj, index_t i, touch_counter *counter = nullptr);
gap_certificate gap_feature_removal_l2(const trained_model &model, const dataset &ds,
                                       const objective &obj, index_t j,
                                       touch_counter *counter = nullptr);

// The gap for any modification, dispatching on its kind.
gap_certificate modification_gap(const trained_model &model, const dataset &ds_old,
                                 const objective &obj, const modification &mod);

}  // namespace glru

#endif  // GLRU_GAPFAST_HPP
