#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "flgnn/numerics/matrix.hpp"

namespace flgnn::numerics {

inline constexpr double kDefaultLeakySlope = 0.2;

// Row-wise admissibility mask for masked_softmax; mask[r][c] selects logit (r, c).
using BoolRows = std::vector<std::vector<bool>>;

// a * b. Zero entries of `a` are skipped, which makes products against
// bag-of-words feature matrices cheap.
Matrix matmul(const Matrix& a, const Matrix& b);
// transpose(a) * b without materialising the transpose; zeros of `a` skipped.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// a * transpose(b).
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

inline double leaky_relu(double x, double slope) { return x > 0.0 ? x : slope * x; }
inline double leaky_relu_derivative(double x, double slope) { return x > 0.0 ? 1.0 : slope; }
Matrix leaky_relu(const Matrix& x, double slope = kDefaultLeakySlope);

Matrix elu(const Matrix& x);

// Numerically stable softmax of `values` in place (max subtracted first).
void softmax_inplace(std::span<double> values);

Matrix row_softmax(const Matrix& logits);

// Softmax over the admissible entries of each row; inadmissible entries are
// exactly zero. Throws DegenerateNeighborhoodError for a row with no
// admissible entry.
Matrix masked_softmax(const Matrix& logits, const BoolRows& mask);

// Mean negative log-probability of the true class over the masked rows.
// Throws EmptyMaskError when `mask` is empty.
double cross_entropy(const Matrix& probabilities, std::span<const int> labels,
                     std::span<const std::size_t> mask);

}  // namespace flgnn::numerics
