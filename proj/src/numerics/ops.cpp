#include "flgnn/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "flgnn/error.hpp"

namespace flgnn::numerics {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul shape mismatch: " + a.shape() + " * " + b.shape());
  }
  Matrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    const auto a_row = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a_row[k];
      if (aik == 0.0) continue;
      const double* b_row = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) {
    throw DimensionError("matmul_at_b shape mismatch: transpose" + a.shape() + " * " +
                         b.shape());
  }
  Matrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const auto a_row = a.row(r);
    const double* b_row = b.row(r).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double ari = a_row[i];
      if (ari == 0.0) continue;
      double* out_row = out.row(i).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += ari * b_row[j];
    }
  }
  return out;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_a_bt shape mismatch: " + a.shape() + " * transpose" +
                         b.shape());
  }
  Matrix bt(b.cols(), b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r) {
    for (std::size_t c = 0; c < b.cols(); ++c) bt(c, r) = b(r, c);
  }
  Matrix out(a.rows(), b.rows());
  const std::size_t n = b.rows();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.row(i).data();
    const auto a_row = a.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a_row[k];
      const double* bt_row = bt.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out_row[j] += aik * bt_row[j];
    }
  }
  return out;
}

Matrix leaky_relu(const Matrix& x, double slope) {
  Matrix out = x;
  for (double& v : out.values()) v = leaky_relu(v, slope);
  return out;
}

Matrix elu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.values()) v = v > 0.0 ? v : std::expm1(v);
  return out;
}

void softmax_inplace(std::span<double> values) {
  if (values.empty()) return;
  const double max = *std::max_element(values.begin(), values.end());
  double sum = 0.0;
  for (double& v : values) {
    v = std::exp(v - max);
    sum += v;
  }
  for (double& v : values) v /= sum;
}

Matrix row_softmax(const Matrix& logits) {
  Matrix out = logits;
  for (std::size_t r = 0; r < out.rows(); ++r) softmax_inplace(out.row(r));
  return out;
}

Matrix masked_softmax(const Matrix& logits, const BoolRows& mask) {
  if (mask.size() != logits.rows()) {
    throw DimensionError("mask has " + std::to_string(mask.size()) + " rows, logits " +
                         logits.shape());
  }
  Matrix out(logits.rows(), logits.cols());
  std::vector<double> scratch;
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    if (mask[r].size() != logits.cols()) {
      throw DimensionError("mask row " + std::to_string(r) + " has wrong width");
    }
    scratch.clear();
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      if (mask[r][c]) scratch.push_back(logits(r, c));
    }
    if (scratch.empty()) {
      throw DegenerateNeighborhoodError("softmax row " + std::to_string(r) +
                                        " has no admissible entry");
    }
    softmax_inplace(scratch);
    std::size_t next = 0;
    for (std::size_t c = 0; c < logits.cols(); ++c) {
      if (mask[r][c]) out(r, c) = scratch[next++];
    }
  }
  return out;
}

double cross_entropy(const Matrix& probabilities, std::span<const int> labels,
                     std::span<const std::size_t> mask) {
  if (mask.empty()) throw EmptyMaskError("cross_entropy over an empty training set");
  double total = 0.0;
  for (std::size_t node : mask) {
    const int label = labels[node];
    if (label < 0 || static_cast<std::size_t>(label) >= probabilities.cols()) {
      throw DimensionError("label " + std::to_string(label) + " out of range for " +
                           probabilities.shape());
    }
    const double p = probabilities(node, static_cast<std::size_t>(label));
    total -= std::log(std::max(p, std::numeric_limits<double>::min()));
  }
  return total / static_cast<double>(mask.size());
}

}  // namespace flgnn::numerics
