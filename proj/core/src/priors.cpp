#include "perspectra/priors.hpp"

#include <algorithm>

#include "perspectra/error.hpp"
#include "perspectra/lexicon.hpp"
#include "perspectra/numkit/kernels.hpp"
#include "perspectra/rng.hpp"

namespace perspectra {
namespace {

Matrix<float> gather_rows(const Matrix<float>& m, std::span<const std::size_t> rows) {
  Matrix<float> out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

// One pass of mini-batch updates on both classifiers over `rows` in the given order.
void run_epoch(PriorWeights& w, AdamWState<float>& opt, const Matrix<float>& features, std::span<const int> sentiment,
               std::span<const int> role, const std::vector<std::size_t>& rows, std::size_t batch_size) {
  Matrix<float> grad_sent(w.sentiment.rows(), w.sentiment.cols());
  Matrix<float> grad_role(w.role.rows(), w.role.cols());
  for (std::size_t start = 0; start < rows.size(); start += batch_size) {
    const std::span<const std::size_t> batch(rows.data() + start, std::min(batch_size, rows.size() - start));
    const auto x = gather_rows(features, batch);
    std::vector<int> ys(batch.size()), yr(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      ys[i] = sentiment[batch[i]];
      yr[i] = role[batch[i]];
    }
    const std::vector<std::uint8_t> all(batch.size(), 1);
    const auto ce_s = softmax_ce(matmul(x, w.sentiment), std::span<const int>(ys), all);
    const auto ce_r = softmax_ce(matmul(x, w.role), std::span<const int>(yr), all);
    matmul_tn_into(x, ce_s.grad, grad_sent, false);
    matmul_tn_into(x, ce_r.grad, grad_role, false);
    adamw_step<float>({&w.sentiment, &w.role}, {&grad_sent, &grad_role}, opt);
  }
}

}  // namespace

double prior_accuracy(const Matrix<float>& w, const Matrix<float>& features, std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  const auto logits = matmul(features, w);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto row = logits.row(i);
    const int pred = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    correct += pred == labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

PriorFit pretrain_priors(const Matrix<float>& features, std::span<const int> sentiment, std::span<const int> role,
                         const PriorTrainConfig& cfg) {
  const std::size_t n = features.rows();
  if (n == 0) throw DataError("prior pretraining set is empty");
  if (sentiment.size() != n || role.size() != n) throw DataError("prior pretraining labels do not match features");

  Rng rng(derive_seed(cfg.seed, 0x9419ULL));
  auto order = rng.sample_indices(n, n);
  const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(n) * cfg.validation_fraction));
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n_val, n)));
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(std::min(n_val, n)), order.end());
  if (train.empty()) train = val;

  const auto val_x = gather_rows(features, val);
  std::vector<int> val_s, val_r;
  for (const auto i : val) {
    val_s.push_back(sentiment[i]);
    val_r.push_back(role[i]);
  }

  PriorFit fit;
  PriorWeights w{Matrix<float>(features.cols(), 2), Matrix<float>(features.cols(), 2)};
  AdamWState<float> opt;
  opt.config.lr = cfg.lr;
  opt.config.weight_decay = cfg.weight_decay;

  double best = -1.0;
  std::size_t since_best = 0;
  fit.weights = w;
  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(train);
    run_epoch(w, opt, features, sentiment, role, train, cfg.batch_size);
    const double acc_s = prior_accuracy(w.sentiment, val_x, val_s);
    const double acc_r = prior_accuracy(w.role, val_x, val_r);
    fit.epochs = epoch;
    if ((acc_s + acc_r) / 2 > best) {
      best = (acc_s + acc_r) / 2;
      since_best = 0;
      fit.weights = w;
      fit.best_epoch = epoch;
      fit.sentiment_accuracy = acc_s;
      fit.role_accuracy = acc_r;
    } else if (++since_best >= cfg.patience) {
      break;
    }
  }
  return fit;
}

void prior_pass(PriorWeights& weights, AdamWState<float>& opt, const Matrix<float>& features,
                std::span<const int> sentiment, std::span<const int> role, std::span<const std::uint8_t> mask,
                std::size_t batch_size, std::uint64_t seed) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) rows.push_back(i);
  }
  if (rows.empty()) return;
  Rng rng(seed);
  rng.shuffle(rows);
  run_epoch(weights, opt, features, sentiment, role, rows, batch_size);
}

std::vector<std::uint8_t> prior_frames(const PriorWeights& weights, const Matrix<float>& features) {
  const auto s = matmul(features, weights.sentiment);
  const auto r = matmul(features, weights.role);
  std::vector<std::uint8_t> frames(features.rows());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto sent = s(i, 1) > s(i, 0) ? Sentiment::Negative : Sentiment::Positive;
    const auto role = r(i, 1) > r(i, 0) ? Role::Target : Role::Actor;
    frames[i] = static_cast<std::uint8_t>(frame_index(sent, role));
  }
  return frames;
}

}  // namespace perspectra
