#include "perspectra/numkit/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace perspectra {
namespace {

// Splits [0, n) into contiguous row blocks. Each output row is owned by one
// worker, so the per-row summation order does not depend on the thread count.
template <typename Fn>
void for_rows(std::size_t n, std::size_t work_per_row, Fn&& fn) {
  const int threads = kernel_threads();
  if (threads <= 1 || n < 64 || n * work_per_row < (1u << 16)) {
    fn(std::size_t{0}, n);
    return;
  }
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
  const std::size_t block = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) {
    const auto lo = w * block;
    const auto hi = std::min(n, lo + block);
    if (lo < hi) pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  fn(0, std::min(n, block));
  for (auto& t : pool) t.join();
}

template <typename T>
void check_shape(const Matrix<T>& out, std::size_t rows, std::size_t cols, const char* what) {
  if (out.rows() != rows || out.cols() != cols) {
    throw std::invalid_argument(std::string(what) + ": output shape mismatch");
  }
}

}  // namespace

int kernel_threads() {
  static const int threads = [] {
    if (const char* env = std::getenv("PERSPECTRA_THREADS")) {
      const int n = std::atoi(env);
      if (n > 0) return n;
    }
    return 1;
  }();
  return threads;
}

template <typename T>
void matmul_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
  check_shape(out, a.rows(), b.cols(), "matmul");
  const std::size_t inner = a.cols();
  const std::size_t n = b.cols();
  for_rows(a.rows(), inner * n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      T* __restrict crow = out.data() + i * n;
      if (!accumulate) std::fill(crow, crow + n, T{0});
      const T* arow = a.data() + i * inner;
      for (std::size_t k = 0; k < inner; ++k) {
        const T aik = arow[k];
        if (aik == T{0}) continue;
        const T* __restrict brow = b.data() + k * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
      }
    }
  });
}

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: dimension mismatch " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()));
  }
  Matrix<T> out(a.rows(), b.cols());
  matmul_into(a, b, out, true);
  return out;
}

template <typename T>
void matmul_tn_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: dimension mismatch");
  check_shape(out, a.cols(), b.cols(), "matmul_tn");
  if (!accumulate) out.fill(T{0});
  const std::size_t m = a.cols();
  const std::size_t n = b.cols();
  // out row i accumulates over k in increasing order regardless of threading.
  for_rows(m, a.rows() * n, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = 0; k < a.rows(); ++k) {
      const T* arow = a.data() + k * m;
      const T* __restrict brow = b.data() + k * n;
      for (std::size_t i = lo; i < hi; ++i) {
        const T aki = arow[i];
        if (aki == T{0}) continue;
        T* __restrict crow = out.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) crow[j] += aki * brow[j];
      }
    }
  });
}

template <typename T>
void matmul_nt_into(const Matrix<T>& a, const Matrix<T>& b, Matrix<T>& out, bool accumulate) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: dimension mismatch");
  check_shape(out, a.rows(), b.rows(), "matmul_nt");
  const std::size_t inner = a.cols();
  for_rows(a.rows(), inner * b.rows(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const T* arow = a.data() + i * inner;
      T* crow = out.data() + i * b.rows();
      for (std::size_t j = 0; j < b.rows(); ++j) {
        const T* brow = b.data() + j * inner;
        T acc{0};
        for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
        crow[j] = accumulate ? crow[j] + acc : acc;
      }
    }
  });
}

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> out(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto z = logits.row(i);
    auto p = out.row(i);
    const T mx = *std::max_element(z.begin(), z.end());
    T sum{0};
    for (std::size_t j = 0; j < z.size(); ++j) {
      p[j] = std::exp(z[j] - mx);
      sum += p[j];
    }
    for (auto& v : p) v /= sum;
  }
  return out;
}

template <typename T>
Matrix<T> softmax_backward(const Matrix<T>& probs, const Matrix<T>& dprobs) {
  Matrix<T> dz(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    const auto p = probs.row(i);
    const auto dp = dprobs.row(i);
    T dot{0};
    for (std::size_t j = 0; j < p.size(); ++j) dot += dp[j] * p[j];
    auto out = dz.row(i);
    for (std::size_t j = 0; j < p.size(); ++j) out[j] = p[j] * (dp[j] - dot);
  }
  return dz;
}

template <typename T>
LossGrad<T> softmax_ce(const Matrix<T>& logits, std::span<const int> labels, std::span<const std::uint8_t> mask) {
  if (labels.size() != logits.rows() || mask.size() != logits.rows()) {
    throw std::invalid_argument("softmax_ce: labels/mask length must equal logits rows");
  }
  LossGrad<T> out{T{0}, Matrix<T>(logits.rows(), logits.cols())};
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) n += mask[i] ? 1 : 0;
  if (n == 0) return out;

  const int k = static_cast<int>(logits.cols());
  const T inv_n = T{1} / static_cast<T>(n);
  T total{0};
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const int y = labels[i];
    if (y < 0 || y >= k) throw std::out_of_range("softmax_ce: label out of range");
    const auto z = logits.row(i);
    const T mx = *std::max_element(z.begin(), z.end());
    T sum{0};
    for (const T v : z) sum += std::exp(v - mx);
    const T log_sum = std::log(sum);
    total += -(z[static_cast<std::size_t>(y)] - mx - log_sum);
    auto g = out.grad.row(i);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const T p = std::exp(z[j] - mx - log_sum);
      g[j] = (p - (static_cast<int>(j) == y ? T{1} : T{0})) * inv_n;
    }
  }
  out.loss = total * inv_n;
  return out;
}

template <typename T>
LossGrad<T> l1_loss(const Matrix<T>& pred, const Matrix<T>& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("l1_loss: shape mismatch");
  }
  LossGrad<T> out{T{0}, Matrix<T>(pred.rows(), pred.cols())};
  if (pred.size() == 0) return out;
  const T inv = T{1} / static_cast<T>(pred.size());
  T total{0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const T diff = pred.data()[i] - target.data()[i];
    total += std::abs(diff);
    out.grad.data()[i] = diff > T{0} ? inv : (diff < T{0} ? -inv : T{0});
  }
  out.loss = total * inv;
  return out;
}

#define PERSPECTRA_INSTANTIATE(T)                                                                       \
  template Matrix<T> matmul(const Matrix<T>&, const Matrix<T>&);                                        \
  template void matmul_into(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool);                      \
  template void matmul_tn_into(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool);                   \
  template void matmul_nt_into(const Matrix<T>&, const Matrix<T>&, Matrix<T>&, bool);                   \
  template Matrix<T> softmax_rows(const Matrix<T>&);                                                    \
  template Matrix<T> softmax_backward(const Matrix<T>&, const Matrix<T>&);                              \
  template LossGrad<T> softmax_ce(const Matrix<T>&, std::span<const int>, std::span<const std::uint8_t>); \
  template LossGrad<T> l1_loss(const Matrix<T>&, const Matrix<T>&);

PERSPECTRA_INSTANTIATE(float)
PERSPECTRA_INSTANTIATE(double)

#undef PERSPECTRA_INSTANTIATE

}  // namespace perspectra
