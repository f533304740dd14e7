/*
 * Copyright 2026 The EAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "eat/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "eat/metrics.hpp"
#include "eat/parallel.hpp"
#include "forward_cache.hpp"

namespace eat {

using nlohmann::ordered_json;

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd";
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "adam") return OptimizerKind::kAdam;
  if (text == "sgd" || text == "gd") return OptimizerKind::kGradientDescent;
  throw ConfigError("unknown optimizer '" + text + "' (adam|sgd)");
}

void TrainConfig::validate() const {
  model.validate();
  if (epochs < 1) throw ConfigError("TrainConfig: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("TrainConfig: batch_size must be >= 1");
  // Zero is accepted so a run can be checked to leave the weights untouched.
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("TrainConfig: learning_rate must be a finite non-negative real");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0) ||
      !(adam_epsilon > 0.0)) {
    throw ConfigError("TrainConfig: adam betas must lie in [0, 1) and epsilon must be positive");
  }
  if (!(init_stddev > 0.0)) throw ConfigError("TrainConfig: init_stddev must be positive");
  if (threads < 1) throw ConfigError("TrainConfig: threads must be >= 1");
}

TrainConfig TrainConfig::from_json(const ordered_json& j) {
  TrainConfig c;
  try {
    if (j.contains("model")) {
      const auto& m = j.at("model");
      c.model.num_layers = m.value("num_layers", c.model.num_layers);
      c.model.num_heads = m.value("num_heads", c.model.num_heads);
      c.model.model_dim = m.value("model_dim", c.model.model_dim);
      c.model.head_dim = m.value("head_dim", c.model.head_dim);
      c.model.max_len = m.value("max_len", c.model.max_len);
      c.model.vocab_size = m.value("vocab_size", c.model.vocab_size);
    }
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.optimizer = parse_optimizer(j.value("optimizer", to_string(c.optimizer)));
    c.seed = j.value("seed", c.seed);
    if (j.contains("adam")) {
      const auto& a = j.at("adam");
      c.adam_beta1 = a.value("beta1", c.adam_beta1);
      c.adam_beta2 = a.value("beta2", c.adam_beta2);
      c.adam_epsilon = a.value("epsilon", c.adam_epsilon);
    }
    c.init_stddev = j.value("init_stddev", c.init_stddev);
    c.threads = j.value("threads", c.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("TrainConfig: ") + e.what());
  }
  return c;
}

ordered_json TrainConfig::to_json() const {
  ordered_json j;
  j["model"] = {{"num_layers", model.num_layers}, {"num_heads", model.num_heads},
                {"model_dim", model.model_dim},   {"head_dim", model.head_dim},
                {"max_len", model.max_len},       {"vocab_size", model.vocab_size}};
  j["epochs"] = epochs;
  j["batch_size"] = batch_size;
  j["learning_rate"] = learning_rate;
  j["optimizer"] = to_string(optimizer);
  j["seed"] = seed;
  j["adam"] = {{"beta1", adam_beta1}, {"beta2", adam_beta2}, {"epsilon", adam_epsilon}};
  j["init_stddev"] = init_stddev;
  return j;
}

double cross_entropy(const VectorXd& probs, int gold, LossStats* stats) {
  if (gold < 0 || gold >= probs.size()) {
    throw DomainError("cross_entropy: gold label " + std::to_string(gold) + " out of range");
  }
  double p = probs(gold);
  if (!(p >= kMinGoldProbability)) {
    p = kMinGoldProbability;
    if (stats) ++stats->clamped;
  }
  return -std::log(p);
}

namespace {

MatrixXd column_sums(const MatrixXd& m) {
  MatrixXd s = MatrixXd::Zero(1, m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += m.row(i);
  return s;
}

}  // namespace

BackwardResult backward(std::span<const TokenId> tokens, int gold, const ModelWeights& weights) {
  const ModelConfig& config = weights.config;
  internal::ForwardCache cache;
  const Temperature temperature(1.0);
  internal::run_forward(tokens, weights, temperature, cache);

  BackwardResult result;
  result.probs = cache.probs;
  result.loss = cross_entropy(cache.probs, gold);
  Gradients& g = result.gradients;
  g = ModelWeights::zeros(config);

  const auto T = static_cast<Eigen::Index>(config.max_len);
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto dk = static_cast<Eigen::Index>(config.head_dim);
  const double scale = temperature.beta() / std::sqrt(static_cast<double>(dk));

  // Softmax cross-entropy: dL/dlogits = probs - onehot(gold).
  MatrixXd dlogits = cache.probs.transpose();
  dlogits(0, gold) -= 1.0;
  g.classifier = matmul(cache.final_norm.topRows(1).transpose(), dlogits);
  g.classifier_bias = dlogits;

  MatrixXd dnorm = MatrixXd::Zero(T, d);
  dnorm.topRows(1) = matmul(dlogits, weights.classifier.transpose());
  MatrixXd dstream = internal::layer_norm_backward(cache.final_norm, cache.final_rstd, dnorm);

  for (std::size_t li = config.num_layers; li-- > 0;) {
    const LayerWeights& w = weights.layers[li];
    const internal::LayerCache& lc = cache.layers[li];
    LayerWeights& gl = g.layers[li];

    // stream = mid + relu(norm2 W1 + b1) W2 + b2
    gl.ffn_out = matmul(lc.ffn_act.transpose(), dstream);
    gl.ffn_out_bias = column_sums(dstream);
    MatrixXd dpre = matmul(dstream, w.ffn_out.transpose());
    for (Eigen::Index i = 0; i < dpre.size(); ++i) {
      if (lc.ffn_pre.data()[i] <= 0.0) dpre.data()[i] = 0.0;
    }
    gl.ffn_in = matmul(lc.norm2.transpose(), dpre);
    gl.ffn_in_bias = column_sums(dpre);
    MatrixXd dmid = dstream + internal::layer_norm_backward(lc.norm2, lc.norm2_rstd,
                                                            matmul(dpre, w.ffn_in.transpose()));

    // mid = input + concat Wo
    gl.output = matmul(lc.concat.transpose(), dmid);
    const MatrixXd dconcat = matmul(dmid, w.output.transpose());
    MatrixXd dq = MatrixXd::Zero(T, d);
    MatrixXd dk_all = MatrixXd::Zero(T, d);
    MatrixXd dv = MatrixXd::Zero(T, d);
    for (std::size_t h = 0; h < config.num_heads; ++h) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dk;
      const MatrixXd& a = lc.attention[h];
      const auto d_out = dconcat.middleCols(c0, dk);
      dv.middleCols(c0, dk) = matmul(a.transpose(), d_out);
      const MatrixXd da = matmul(d_out, lc.v.middleCols(c0, dk).transpose());
      MatrixXd ds(T, T);
      for (Eigen::Index i = 0; i < T; ++i) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j < T; ++j) dot += da(i, j) * a(i, j);
        for (Eigen::Index j = 0; j < T; ++j) ds(i, j) = a(i, j) * (da(i, j) - dot) * scale;
      }
      dq.middleCols(c0, dk) = matmul(ds, lc.k.middleCols(c0, dk));
      dk_all.middleCols(c0, dk) = matmul(ds.transpose(), lc.q.middleCols(c0, dk));
    }
    gl.query = matmul(lc.norm1.transpose(), dq);
    gl.key = matmul(lc.norm1.transpose(), dk_all);
    gl.value = matmul(lc.norm1.transpose(), dv);
    MatrixXd dnorm1 = matmul(dq, w.query.transpose());
    dnorm1 += matmul(dk_all, w.key.transpose());
    dnorm1 += matmul(dv, w.value.transpose());
    dstream = dmid + internal::layer_norm_backward(lc.norm1, lc.norm1_rstd, dnorm1);
  }

  for (Eigen::Index t = 0; t < T; ++t) {
    g.token_embedding.row(cache.padded[t]) += dstream.row(t);
    g.position_embedding.row(t) += dstream.row(t);
  }
  return result;
}

GradCheckReport grad_check(const ModelWeights& weights, const Example& sample, const GradCheckOptions& options) {
  const BackwardResult analytic = backward(sample.tokens, sample.label, weights);

  struct Slot {
    std::string tensor;
    Eigen::Index index;
    double* value;
    double analytic;
  };
  ModelWeights probe = weights;
  std::vector<Slot> slots;
  std::vector<const MatrixXd*> grads;
  analytic.gradients.for_each_tensor([&](const std::string&, const MatrixXd& t) { grads.push_back(&t); });
  std::size_t tensor_index = 0;
  probe.for_each_tensor([&](const std::string& name, MatrixXd& t) {
    const MatrixXd& gt = *grads[tensor_index++];
    for (Eigen::Index i = 0; i < t.size(); ++i) slots.push_back({name, i, t.data() + i, gt.data()[i]});
  });
  if (options.max_parameters > 0 && options.max_parameters < slots.size()) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(slots.begin(), slots.end(), rng);
    slots.resize(options.max_parameters);
  }

  auto loss_at = [&]() { return cross_entropy(forward(sample.tokens, probe).probs, sample.label); };
  GradCheckReport report;
  std::vector<GradCheckEntry> entries;
  for (const Slot& slot : slots) {
    const double original = *slot.value;
    *slot.value = original + options.step;
    const double plus = loss_at();
    *slot.value = original - options.step;
    const double minus = loss_at();
    *slot.value = original;
    const double numeric = (plus - minus) / (2.0 * options.step);
    const double denom = std::max({std::abs(slot.analytic), std::abs(numeric), options.absolute_floor});
    const double rel = std::abs(slot.analytic - numeric) / denom;
    report.max_relative_error = std::max(report.max_relative_error, rel);
    ++report.checked;
    if (rel > options.tolerance) entries.push_back({slot.tensor, slot.index, slot.analytic, numeric, rel});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.relative_error > b.relative_error; });
  report.offenders = std::move(entries);
  return report;
}

ordered_json to_json(const EpochRecord& record) {
  ordered_json j;
  j["epoch"] = record.epoch;
  j["mean_loss"] = record.mean_loss;
  if (std::isfinite(record.train_auc)) {
    j["train_auc"] = record.train_auc;
  } else {
    j["train_auc"] = nullptr;
  }
  return j;
}

namespace {

class Optimizer {
 public:
  Optimizer(const TrainConfig& config, const ModelConfig& model)
      : config_(config), first_(ModelWeights::zeros(model)), second_(ModelWeights::zeros(model)) {}

  void step(ModelWeights& weights, const Gradients& grads) {
    ++steps_;
    const double lr = config_.learning_rate;
    std::vector<const MatrixXd*> g;
    grads.for_each_tensor([&](const std::string&, const MatrixXd& t) { g.push_back(&t); });
    std::vector<MatrixXd*> m, v;
    first_.for_each_tensor([&](const std::string&, MatrixXd& t) { m.push_back(&t); });
    second_.for_each_tensor([&](const std::string&, MatrixXd& t) { v.push_back(&t); });
    std::size_t k = 0;
    if (config_.optimizer == OptimizerKind::kGradientDescent) {
      weights.for_each_tensor([&](const std::string&, MatrixXd& w) { w -= lr * *g[k++]; });
      return;
    }
    const double b1 = config_.adam_beta1;
    const double b2 = config_.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
    weights.for_each_tensor([&](const std::string&, MatrixXd& w) {
      const MatrixXd& gt = *g[k];
      MatrixXd& mt = *m[k];
      MatrixXd& vt = *v[k];
      ++k;
      for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double gi = gt.data()[i];
        mt.data()[i] = b1 * mt.data()[i] + (1.0 - b1) * gi;
        vt.data()[i] = b2 * vt.data()[i] + (1.0 - b2) * gi * gi;
        const double m_hat = mt.data()[i] / c1;
        const double v_hat = vt.data()[i] / c2;
        w.data()[i] -= lr * m_hat / (std::sqrt(v_hat) + config_.adam_epsilon);
      }
    });
  }

 private:
  const TrainConfig& config_;
  ModelWeights first_;
  ModelWeights second_;
  std::uint64_t steps_ = 0;
};

void accumulate(Gradients& total, const Gradients& g) {
  std::vector<const MatrixXd*> parts;
  g.for_each_tensor([&](const std::string&, const MatrixXd& t) { parts.push_back(&t); });
  std::size_t k = 0;
  total.for_each_tensor([&](const std::string&, MatrixXd& t) { t += *parts[k++]; });
}

}  // namespace

FitResult fit(std::span<const Example> corpus, const TrainConfig& config, std::uint64_t init_seed,
              const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (corpus.empty()) throw DomainError("fit: empty corpus");
  // Input problems surface here so that a later DomainError can only come from overflow.
  for (const Example& e : corpus) {
    if (e.tokens.empty() || e.tokens.size() > config.model.max_len) {
      throw DomainError("fit: example " + std::to_string(e.id) + " has length " + std::to_string(e.tokens.size()) +
                        ", expected 1.." + std::to_string(config.model.max_len));
    }
    for (TokenId t : e.tokens) {
      if (t >= config.model.vocab_size) {
        throw DomainError("fit: example " + std::to_string(e.id) + " has token id " + std::to_string(t) +
                          " outside the vocabulary");
      }
    }
    if (e.label != 0 && e.label != 1) throw DomainError("fit: example " + std::to_string(e.id) + " label must be 0 or 1");
  }

  FitResult result;
  result.weights = ModelWeights::gaussian(config.model, init_seed, config.init_stddev);
  Optimizer optimizer(config, config.model);
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const ModelWeights checkpoint = result.weights;
    std::vector<PredictionRecord> seen;
    seen.reserve(corpus.size());
    double loss_sum = 0.0;
    bool diverged = false;

    for (std::size_t start = 0; start < order.size() && !diverged; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      std::vector<BackwardResult> parts(count);
      try {
        parallel_for(count, config.threads, [&](std::size_t i) {
          const Example& e = corpus[order[start + i]];
          parts[i] = backward(e.tokens, e.label, result.weights);
        });
      } catch (const DomainError&) {
        diverged = true;  // activations overflowed
        break;
      }
      Gradients total = ModelWeights::zeros(config.model);
      for (std::size_t i = 0; i < count; ++i) {
        const Example& e = corpus[order[start + i]];
        LossStats stats;
        const double loss = cross_entropy(parts[i].probs, e.label, &stats);
        result.clamped_losses += stats.clamped;
        if (!std::isfinite(loss) || !std::isfinite(parts[i].probs(1))) {
          diverged = true;
          break;
        }
        loss_sum += loss;
        seen.push_back({parts[i].probs(1), 0, e.label, 0, e.pair_id, {}});
        accumulate(total, parts[i].gradients);
      }
      if (diverged) break;
      total.for_each_tensor([&](const std::string&, MatrixXd& t) { t /= static_cast<double>(count); });
      optimizer.step(result.weights, total);
      bool finite = true;
      result.weights.for_each_tensor([&](const std::string&, const MatrixXd& t) { finite = finite && t.allFinite(); });
      if (!finite) diverged = true;
    }
    if (diverged) {
      result.weights = checkpoint;
      result.diverged = true;
      return result;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.mean_loss = loss_sum / static_cast<double>(corpus.size());
    try {
      record.train_auc = auc(seen);
    } catch (const DomainError&) {
      record.train_auc = std::numeric_limits<double>::quiet_NaN();
    }
    result.log.push_back(record);
    if (on_epoch) on_epoch(record);
  }
  return result;
}

}  // namespace eat
