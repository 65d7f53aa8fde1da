#include "glru/data.hpp"

#include "glru/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace glru {

namespace {

using triplet = Eigen::Triplet<double, index_t>;

vector_t compute_row_norms(const row_matrix &x) {
  vector_t out(x.rows());
  for (index_t i = 0; i < x.rows(); ++i) out[i] = x.row(i).norm();
  return out;
}

vector_t compute_col_norms(const col_matrix &x) {
  vector_t out(x.cols());
  for (index_t j = 0; j < x.cols(); ++j) out[j] = x.col(j).norm();
  return out;
}

std::vector<char> membership(std::span<const index_t> idx, index_t bound) {
  std::vector<char> mark(static_cast<std::size_t>(bound), 0);
  for (index_t i : idx) mark[static_cast<std::size_t>(i)] = 1;
  return mark;
}

bool is_pm_one(double v) { return v == 1.0 || v == -1.0; }

}  // namespace

dataset::dataset(row_matrix x, vector_t y, task kind)
    : rows_(std::move(x)), y_(std::move(y)), kind_(kind) {
  if (rows_.rows() != y_.size())
    throw validation_error("x has " + std::to_string(rows_.rows()) +
                           " rows but y has length " +
                           std::to_string(y_.size()));
  if (kind_ == task::classification) {
    for (index_t i = 0; i < y_.size(); ++i)
      if (!is_pm_one(y_[i]))
        throw validation_error("classification label of instance " +
                               std::to_string(i) + " is not +1/-1");
  }
  rows_.prune(0.0);
  rows_.makeCompressed();
  cols_ = col_matrix(rows_);
  cols_.makeCompressed();
  row_norms_ = compute_row_norms(rows_);
  col_norms_ = compute_col_norms(cols_);
}

dataset dataset::from_dense(const Eigen::MatrixXd &x, const vector_t &y,
                            task kind) {
  row_matrix sx = x.sparseView(0.0, 0.0);
  return dataset(std::move(sx), y, kind);
}

vector_t dataset::row(index_t i) const {
  vector_t out = vector_t::Zero(d());
  for (row_matrix::InnerIterator it(rows_, i); it; ++it) out[it.col()] = it.value();
  return out;
}

double dataset::row_dot(index_t i, const vector_t &w) const {
  double s = 0.0;
  for (row_matrix::InnerIterator it(rows_, i); it; ++it) s += it.value() * w[it.col()];
  return s;
}

Eigen::MatrixXd dataset::dense() const { return Eigen::MatrixXd(rows_); }

void validate_index_set(std::span<const index_t> indices, index_t bound,
                        const std::string &what) {
  for (index_t i : indices)
    if (i < 0 || i >= bound)
      throw validation_error(what + " index " + std::to_string(i) +
                             " out of range [0, " + std::to_string(bound) + ")");
  std::vector<index_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  if (dup != sorted.end())
    throw validation_error(what + " index " + std::to_string(*dup) + " listed twice");
}

dataset dataset::select_instances(std::span<const index_t> keep) const {
  std::vector<triplet> trip;
  vector_t y(static_cast<index_t>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const index_t i = keep[r];
    y[static_cast<index_t>(r)] = y_[i];
    for (row_matrix::InnerIterator it(rows_, i); it; ++it)
      trip.emplace_back(static_cast<index_t>(r), it.col(), it.value());
  }
  row_matrix x(static_cast<index_t>(keep.size()), d());
  x.setFromTriplets(trip.begin(), trip.end());
  return dataset(std::move(x), std::move(y), kind_);
}

dataset dataset::select_features(std::span<const index_t> keep) const {
  std::vector<triplet> trip;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    for (col_matrix::InnerIterator it(cols_, keep[c]); it; ++it)
      trip.emplace_back(it.row(), static_cast<index_t>(c), it.value());
  }
  row_matrix x(n(), static_cast<index_t>(keep.size()));
  x.setFromTriplets(trip.begin(), trip.end());
  return dataset(std::move(x), y_, kind_);
}

dataset dataset::without_instances(std::span<const index_t> removed) const {
  validate_index_set(removed, n(), "instance");
  const auto mark = membership(removed, n());
  std::vector<index_t> keep;
  keep.reserve(static_cast<std::size_t>(n()));
  for (index_t i = 0; i < n(); ++i)
    if (!mark[static_cast<std::size_t>(i)]) keep.push_back(i);
  return select_instances(keep);
}

dataset dataset::without_features(std::span<const index_t> removed) const {
  validate_index_set(removed, d(), "feature");
  const auto mark = membership(removed, d());
  std::vector<index_t> keep;
  for (index_t j = 0; j < d(); ++j)
    if (!mark[static_cast<std::size_t>(j)]) keep.push_back(j);
  return select_features(keep);
}

dataset dataset::with_instances(const row_matrix &extra,
                                const vector_t &labels) const {
  if (extra.cols() != d())
    throw validation_error("added rows have width " +
                           std::to_string(extra.cols()) + ", expected " +
                           std::to_string(d()));
  if (extra.rows() != labels.size())
    throw validation_error("added rows and labels differ in count");
  std::vector<triplet> trip;
  trip.reserve(static_cast<std::size_t>(rows_.nonZeros() + extra.nonZeros()));
  for (index_t i = 0; i < n(); ++i)
    for (row_matrix::InnerIterator it(rows_, i); it; ++it)
      trip.emplace_back(i, it.col(), it.value());
  for (index_t i = 0; i < extra.rows(); ++i)
    for (row_matrix::InnerIterator it(extra, i); it; ++it)
      trip.emplace_back(n() + i, it.col(), it.value());
  row_matrix x(n() + extra.rows(), d());
  x.setFromTriplets(trip.begin(), trip.end());
  vector_t y(n() + labels.size());
  y << y_, labels;
  return dataset(std::move(x), std::move(y), kind_);
}

dataset dataset::with_features(const col_matrix &extra) const {
  if (extra.rows() != n())
    throw validation_error("added columns have height " +
                           std::to_string(extra.rows()) + ", expected " +
                           std::to_string(n()));
  std::vector<triplet> trip;
  trip.reserve(static_cast<std::size_t>(rows_.nonZeros() + extra.nonZeros()));
  for (index_t i = 0; i < n(); ++i)
    for (row_matrix::InnerIterator it(rows_, i); it; ++it)
      trip.emplace_back(i, it.col(), it.value());
  for (index_t j = 0; j < extra.cols(); ++j)
    for (col_matrix::InnerIterator it(extra, j); it; ++it)
      trip.emplace_back(it.row(), d() + j, it.value());
  row_matrix x(n(), d() + extra.cols());
  x.setFromTriplets(trip.begin(), trip.end());
  return dataset(std::move(x), y_, kind_);
}

dataset dataset::with_intercept_column() const {
  col_matrix ones(n(), 1);
  std::vector<triplet> trip;
  for (index_t i = 0; i < n(); ++i) trip.emplace_back(i, 0, 1.0);
  ones.setFromTriplets(trip.begin(), trip.end());
  return with_features(ones);
}

// ---------------------------------------------------------------------------
// LIBSVM format

namespace {

bool parse_double(std::string_view tok, double &out) {
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const char *first = tok.data();
  const char *last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_index(std::string_view tok, long long &out) {
  if (tok.empty()) return false;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

dataset parse_libsvm(std::istream &in, task kind) {
  std::vector<triplet> trip;
  std::vector<double> labels;
  long long max_index = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line

    double label = 0.0;
    if (!parse_double(tok, label))
      throw parse_error(line_no, "malformed label '" + tok + "'");
    if (kind == task::classification && !is_pm_one(label))
      throw validation_error("line " + std::to_string(line_no) +
                             ": classification label '" + tok +
                             "' is not +1/-1");
    const auto row = static_cast<index_t>(labels.size());
    labels.push_back(label);

    long long prev = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos)
        throw parse_error(line_no, "expected idx:val, got '" + tok + "'");
      long long idx = 0;
      double val = 0.0;
      std::string_view sv(tok);
      if (!parse_index(sv.substr(0, colon), idx) || idx < 1)
        throw parse_error(line_no, "malformed feature index in '" + tok + "'");
      if (!parse_double(sv.substr(colon + 1), val))
        throw parse_error(line_no, "malformed feature value in '" + tok + "'");
      if (idx <= prev)
        throw parse_error(line_no, "feature indices not strictly increasing");
      prev = idx;
      max_index = std::max(max_index, idx);
      if (val != 0.0) trip.emplace_back(row, static_cast<index_t>(idx - 1), val);
    }
  }
  if (labels.empty()) throw validation_error("dataset must be nonempty (n = 0)");

  row_matrix x(static_cast<index_t>(labels.size()), static_cast<index_t>(max_index));
  x.setFromTriplets(trip.begin(), trip.end());
  vector_t y = Eigen::Map<const vector_t>(labels.data(), static_cast<index_t>(labels.size()));
  return dataset(std::move(x), std::move(y), kind);
}

dataset load_libsvm(const std::string &path, task kind) {
  std::ifstream in(path);
  if (!in) throw error(error_code::io, "cannot open '" + path + "'");
  return parse_libsvm(in, kind);
}

void write_libsvm(std::ostream &out, const dataset &ds) {
  const auto old_prec = out.precision(17);
  for (index_t i = 0; i < ds.n(); ++i) {
    const double yi = ds.y()[i];
    if (ds.kind() == task::classification)
      out << (yi > 0 ? "+1" : "-1");
    else
      out << yi;
    for (row_matrix::InnerIterator it(ds.rows(), i); it; ++it)
      out << ' ' << (it.col() + 1) << ':' << it.value();
    out << '\n';
  }
  out.precision(old_prec);
}

std::string to_libsvm_string(const dataset &ds) {
  std::ostringstream ss;
  write_libsvm(ss, ds);
  return ss.str();
}

// ---------------------------------------------------------------------------
// Normalization

normalization parse_normalization(const std::string &name) {
  if (name == "none") return normalization::none;
  if (name == "dense") return normalization::dense;
  if (name == "sparse") return normalization::sparse;
  throw validation_error("unknown normalization '" + name + "'");
}

dataset normalize(const dataset &ds, normalization strategy) {
  if (ds.n() < 1) throw validation_error("cannot normalize an empty dataset");
  const double n = static_cast<double>(ds.n());

  switch (strategy) {
    case normalization::none:
      return ds;

    case normalization::sparse: {
      col_matrix x = ds.cols();
      for (index_t j = 0; j < x.cols(); ++j) {
        const double norm = ds.col_norm(j);
        if (norm == 0.0) throw normalization_error(j, "all-zero column cannot be scaled");
        x.col(j) *= std::sqrt(n) / norm;
      }
      return dataset(row_matrix(x), ds.y(), ds.kind());
    }

    case normalization::dense: {
      Eigen::MatrixXd x = ds.dense();
      for (index_t j = 0; j < x.cols(); ++j) {
        auto col = x.col(j);
        if ((col.array() == col[0]).all())
          throw normalization_error(j, "zero-variance column");
        const double mean = col.mean();
        col.array() -= mean;
        const double var = col.squaredNorm() / n;
        col /= std::sqrt(var);
      }
      return dataset::from_dense(x, ds.y(), ds.kind());
    }
  }
  return ds;
}

constant_drop_result drop_constant_features(const dataset &ds) {
  constant_drop_result out;
  for (index_t j = 0; j < ds.d(); ++j) {
    const index_t nnz = ds.cols().col(j).nonZeros();
    bool constant = (nnz == 0);
    if (nnz == ds.n() && nnz > 0) {
      col_matrix::InnerIterator it(ds.cols(), j);
      const double first = it.value();
      constant = true;
      for (; it; ++it)
        if (it.value() != first) { constant = false; break; }
    }
    (constant ? out.dropped : out.kept).push_back(j);
  }
  out.data = ds.select_features(out.kept);
  return out;
}

// ---------------------------------------------------------------------------
// Modifications

modification modification::remove_instances(std::vector<index_t> idx) {
  modification m;
  m.kind = kind_t::remove_instances;
  m.indices = std::move(idx);
  return m;
}

modification modification::add_instances(row_matrix rows, vector_t labels) {
  modification m;
  m.kind = kind_t::add_instances;
  m.new_rows = std::move(rows);
  m.new_labels = std::move(labels);
  return m;
}

modification modification::remove_features(std::vector<index_t> idx) {
  modification m;
  m.kind = kind_t::remove_features;
  m.indices = std::move(idx);
  return m;
}

modification modification::add_features(col_matrix cols) {
  modification m;
  m.kind = kind_t::add_features;
  m.new_cols = std::move(cols);
  return m;
}

index_t modification::size() const {
  switch (kind) {
    case kind_t::remove_instances:
    case kind_t::remove_features:
      return static_cast<index_t>(indices.size());
    case kind_t::add_instances:
      return new_rows.rows();
    case kind_t::add_features:
      return new_cols.cols();
  }
  return 0;
}

void modification::validate(const dataset &ds) const {
  switch (kind) {
    case kind_t::remove_instances:
      if (indices.empty()) throw validation_error("no instances to remove");
      validate_index_set(indices, ds.n(), "instance");
      if (static_cast<index_t>(indices.size()) >= ds.n())
        throw domain_error("cannot remove every instance");
      break;
    case kind_t::remove_features:
      if (indices.empty()) throw validation_error("no features to remove");
      validate_index_set(indices, ds.d(), "feature");
      if (static_cast<index_t>(indices.size()) >= ds.d())
        throw domain_error("cannot remove every feature");
      break;
    case kind_t::add_instances:
      if (new_rows.rows() == 0) throw validation_error("no instances to add");
      if (new_rows.cols() != ds.d())
        throw validation_error("added rows have width " + std::to_string(new_rows.cols()) +
                               ", expected " + std::to_string(ds.d()));
      if (new_labels.size() != new_rows.rows())
        throw validation_error("added rows and labels differ in count");
      if (ds.kind() == task::classification)
        for (index_t i = 0; i < new_labels.size(); ++i)
          if (!is_pm_one(new_labels[i]))
            throw validation_error("added classification label is not +1/-1");
      break;
    case kind_t::add_features:
      if (new_cols.cols() == 0) throw validation_error("no features to add");
      if (new_cols.rows() != ds.n())
        throw validation_error("added columns have height " + std::to_string(new_cols.rows()) +
                               ", expected " + std::to_string(ds.n()));
      break;
  }
}

dataset modification::apply(const dataset &ds) const {
  validate(ds);
  switch (kind) {
    case kind_t::remove_instances: return ds.without_instances(indices);
    case kind_t::add_instances: return ds.with_instances(new_rows, new_labels);
    case kind_t::remove_features: return ds.without_features(indices);
    case kind_t::add_features: return ds.with_features(new_cols);
  }
  return ds;
}

std::string to_string(modification::kind_t k) {
  switch (k) {
    case modification::kind_t::remove_instances: return "remove-instances";
    case modification::kind_t::add_instances: return "add-instances";
    case modification::kind_t::remove_features: return "remove-features";
    case modification::kind_t::add_features: return "add-features";
  }
  return "unknown";
}

}  // namespace glru
