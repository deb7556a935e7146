#pragma once

#include <cstdint>
#include <span>

#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

// All kernels sum in a fixed order (row-serial), so results are bitwise
// reproducible. Implemented for float and double.

/// a * b. Throws std::invalid_argument on dimension mismatch.
template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b);

/// out (+)= a * b; out must already have shape (a.rows, b.cols).
template <typename T>
void matmul_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate);

/// out (+)= a^T * b.
template <typename T>
void matmul_tn_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate);

/// out (+)= a * b^T.
template <typename T>
void matmul_nt_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate);

/// Row-wise softmax with max subtraction.
template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits);

/// Backpropagates dL/dprobs through a row-wise softmax: dz = p * (dp - <dp, p>).
template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& probs, const Matrix<T>& dprobs);

template <typename T>
struct LossGrad {
  T loss{0};
  Matrix<T> grad;
};

/// Mean over masked-in rows of -log softmax(logits)[label]; dlogits = (softmax - onehot) / n_masked.
/// Rows with mask 0 contribute nothing. An empty mask gives loss 0 and a zero gradient.
template <typename T>
LossGrad<T> softmax_ce(const Matrix<T>& logits, std::span<const int> labels, std::span<const std::uint8_t> mask);

/// Mean absolute error and its subgradient sign(pred - target) / count, sign(0) = 0.
template <typename T>
LossGrad<T> l1_loss(const Matrix<T>& pred, const Matrix<T>& target);

/// Number of worker threads used by the matmul kernels (PERSPECTRA_THREADS, default 1).
int kernel_threads();

}  // namespace perspectra
