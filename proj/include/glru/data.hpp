#ifndef GLRU_DATA_HPP
#define GLRU_DATA_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace glru {

using index_t = Eigen::Index;
using vector_t = Eigen::VectorXd;
using row_matrix = Eigen::SparseMatrix<double, Eigen::RowMajor, index_t>;
using col_matrix = Eigen::SparseMatrix<double, Eigen::ColMajor, index_t>;

enum class task { classification, regression };

// Design matrix X (n x d) and outcomes y. Both a row-major and a
// column-major copy of X are built once at construction: instance
// modifications walk rows, feature modifications walk columns.
// Immutable after construction.
class dataset {
 public:
  dataset() = default;
  dataset(row_matrix x, vector_t y, task kind);

  static dataset from_dense(const Eigen::MatrixXd &x, const vector_t &y,
                            task kind);

  index_t n() const { return rows_.rows(); }
  index_t d() const { return rows_.cols(); }
  task kind() const { return kind_; }

  const row_matrix &rows() const { return rows_; }
  const col_matrix &cols() const { return cols_; }
  const vector_t &y() const { return y_; }

  double row_norm(index_t i) const { return row_norms_[i]; }
  double col_norm(index_t j) const { return col_norms_[j]; }
  const vector_t &row_norms() const { return row_norms_; }
  const vector_t &col_norms() const { return col_norms_; }

  // Dense copy of row i (length d).
  vector_t row(index_t i) const;
  double row_dot(index_t i, const vector_t &w) const;

  Eigen::MatrixXd dense() const;

  // Derived datasets. Index lists are validated (distinct, in range).
  dataset without_instances(std::span<const index_t> removed) const;
  dataset with_instances(const row_matrix &extra, const vector_t &labels) const;
  dataset without_features(std::span<const index_t> removed) const;
  dataset with_features(const col_matrix &extra) const;
  dataset select_instances(std::span<const index_t> keep) const;
  dataset select_features(std::span<const index_t> keep) const;
  // Appends a column of ones (the unregularized intercept coordinate).
  dataset with_intercept_column() const;

 private:
  row_matrix rows_;
  col_matrix cols_;
  vector_t y_;
  vector_t row_norms_;
  vector_t col_norms_;
  task kind_ = task::classification;
};

// Checks that `indices` are distinct and within [0, bound). Throws
// validation_error naming `what` otherwise.
void validate_index_set(std::span<const index_t> indices, index_t bound,
                        const std::string &what);

// LIBSVM text format: `label idx:val ...` with 1-based strictly increasing
// indices. Index k in the file maps to column k-1.
dataset parse_libsvm(std::istream &in, task kind);
dataset load_libsvm(const std::string &path, task kind);
void write_libsvm(std::ostream &out, const dataset &ds);
std::string to_libsvm_string(const dataset &ds);

enum class normalization { none, dense, sparse };

normalization parse_normalization(const std::string &name);

// dense: every column mean 0, variance 1 (divisor n); densifies X.
// sparse: every column scaled so that its L2 norm is sqrt(n).
dataset normalize(const dataset &ds, normalization strategy);

struct constant_drop_result {
  dataset data;
  std::vector<index_t> dropped;
  std::vector<index_t> kept;
};

// Removes columns that take a single value over all instances.
constant_drop_result drop_constant_features(const dataset &ds);

// A dataset modification. Removals carry indices; additions carry the
// payload (rows with labels, or columns).
struct modification {
  enum class kind_t { remove_instances, add_instances, remove_features, add_features };

  kind_t kind = kind_t::remove_instances;
  std::vector<index_t> indices;
  row_matrix new_rows;
  vector_t new_labels;
  col_matrix new_cols;

  static modification remove_instances(std::vector<index_t> idx);
  static modification add_instances(row_matrix rows, vector_t labels);
  static modification remove_features(std::vector<index_t> idx);
  static modification add_features(col_matrix cols);

  // Throws validation_error if the modification does not fit `ds`.
  void validate(const dataset &ds) const;
  dataset apply(const dataset &ds) const;
  index_t size() const;
};

std::string to_string(modification::kind_t k);

}  // namespace glru

#endif  // GLRU_DATA_HPP
