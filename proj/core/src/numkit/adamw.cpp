#include "perspectra/numkit/adamw.hpp"

#include <cmath>
#include <stdexcept>

namespace perspectra {

template <typename T>
void AdamWState<T>::init(const std::vector<Matrix<T>*>& params) {
  step = 0;
  m.clear();
  v.clear();
  for (const auto* p : params) {
    m.emplace_back(p->rows(), p->cols());
    v.emplace_back(p->rows(), p->cols());
  }
}

template <typename T>
void adamw_step(const std::vector<Matrix<T>*>& params, const std::vector<const Matrix<T>*>& grads,
                AdamWState<T>& state) {
  if (params.size() != grads.size()) throw std::invalid_argument("adamw_step: params/grads count mismatch");
  if (state.m.size() != params.size()) state.init(params);

  const auto& cfg = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T lr = static_cast<T>(cfg.lr);
  const T decay = static_cast<T>(cfg.lr * cfg.weight_decay);
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T eps = static_cast<T>(cfg.eps);
  const T bias1 = static_cast<T>(1.0 - std::pow(cfg.beta1, t));
  const T bias2 = static_cast<T>(1.0 - std::pow(cfg.beta2, t));

  for (std::size_t k = 0; k < params.size(); ++k) {
    Matrix<T>& p = *params[k];
    const Matrix<T>& g = *grads[k];
    if (p.rows() != g.rows() || p.cols() != g.cols() || state.m[k].size() != p.size()) {
      throw std::invalid_argument("adamw_step: shape mismatch at tensor " + std::to_string(k));
    }
    T* pd = p.data();
    const T* gd = g.data();
    T* md = state.m[k].data();
    T* vd = state.v[k].data();
    for (std::size_t i = 0; i < p.size(); ++i) {
      pd[i] -= decay * pd[i];
      md[i] = b1 * md[i] + (T{1} - b1) * gd[i];
      vd[i] = b2 * vd[i] + (T{1} - b2) * gd[i] * gd[i];
      const T mhat = md[i] / bias1;
      const T vhat = vd[i] / bias2;
      pd[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

template struct AdamWState<float>;
template struct AdamWState<double>;
template void adamw_step(const std::vector<Matrix<float>*>&, const std::vector<const Matrix<float>*>&,
                         AdamWState<float>&);
template void adamw_step(const std::vector<Matrix<double>*>&, const std::vector<const Matrix<double>*>&,
                         AdamWState<double>&);

}  // namespace perspectra
