#pragma once

#include <cstdint>
#include <vector>

#include "perspectra/numkit/matrix.hpp"

namespace perspectra {

struct AdamWConfig {
  double lr = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// Moment buffers for a fixed, ordered list of parameter tensors.
template <typename T>
struct AdamWState {
  AdamWConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;

  /// Zeroed moments shaped like `params`.
  void init(const std::vector<Matrix<T>*>& params);
};

/// One AdamW update over `params` and matching `grads`:
///   p <- p - lr * wd * p
///   m <- b1 m + (1 - b1) g;  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * (m / (1 - b1^t)) / (sqrt(v / (1 - b2^t)) + eps)
/// Lazily initializes moments on the first call. Throws std::invalid_argument on shape mismatch.
template <typename T>
void adamw_step(const std::vector<Matrix<T>*>& params, const std::vector<const Matrix<T>*>& grads,
                AdamWState<T>& state);

}  // namespace perspectra
