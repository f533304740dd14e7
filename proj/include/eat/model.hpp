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

// Toy transformer encoder classifier with temperature-scalable attention.
//
// Architecture: token + learned position embeddings, `num_layers` pre-norm
// residual blocks (multi-head self-attention, then a ReLU feed-forward of
// width 4d), a final normalization, and a linear two-class head reading the
// hidden state at position 0. Normalizations carry no learned parameters.
// Sequences are right-padded with kPadToken up to max_len; pad columns are
// masked out of every attention row.

#ifndef EAT_MODEL_HPP_
#define EAT_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eat/error.hpp"
#include "eat/numerics.hpp"

namespace eat {

using TokenId = std::uint32_t;

inline constexpr TokenId kPadToken = 0;
inline constexpr TokenId kBosToken = 1;

struct ModelConfig {
  std::size_t num_layers = 2;
  std::size_t num_heads = 2;
  std::size_t model_dim = 16;
  std::size_t head_dim = 8;
  std::size_t max_len = 12;
  std::size_t vocab_size = 64;
  std::size_t num_classes = 2;

  // Throws ConfigError unless heads * head_dim == model_dim, max_len >= 2,
  // vocab_size >= 4 and num_classes == 2.
  void validate() const;
  std::size_t ffn_dim() const { return 4 * model_dim; }

  bool operator==(const ModelConfig&) const = default;
};

std::string to_string(const ModelConfig& config);

// Attention temperature. 1 leaves the model unmodulated, values below 1
// flatten attention rows and values above 1 sharpen them.
class Temperature {
 public:
  explicit Temperature(double beta = 1.0) : beta_(beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
      throw DomainError("Temperature: beta must be a finite non-negative real, got " +
                        std::to_string(beta));
    }
  }
  double beta() const { return beta_; }
  bool unmodulated() const { return beta_ == 1.0; }

 private:
  double beta_;
};

struct LayerWeights {
  MatrixXd query;     // d x d, head h owns columns [h*dk, (h+1)*dk)
  MatrixXd key;       // d x d
  MatrixXd value;     // d x d
  MatrixXd output;    // d x d
  MatrixXd ffn_in;    // d x 4d
  MatrixXd ffn_in_bias;   // 1 x 4d
  MatrixXd ffn_out;   // 4d x d
  MatrixXd ffn_out_bias;  // 1 x d
};

struct ModelWeights {
  ModelConfig config;
  MatrixXd token_embedding;     // vocab x d
  MatrixXd position_embedding;  // max_len x d
  std::vector<LayerWeights> layers;
  MatrixXd classifier;          // d x num_classes
  MatrixXd classifier_bias;     // 1 x num_classes

  static ModelWeights zeros(const ModelConfig& config);
  // Gaussian weights with the given standard deviation; biases zero.
  static ModelWeights gaussian(const ModelConfig& config, std::uint64_t seed, double stddev = 0.02);

  // Visits every tensor in a fixed canonical order with a stable name.
  template <typename F>
  void for_each_tensor(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each_tensor(F&& f) const {
    visit(*this, f);
  }

  std::size_t parameter_count() const;
  // Throws ShapeError / DomainError if shapes disagree with `config` or an
  // entry is not finite.
  void validate() const;

  // Bitwise equality of config and every entry.
  friend bool operator==(const ModelWeights& a, const ModelWeights& b);

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    f("token_embedding", self.token_embedding);
    f("position_embedding", self.position_embedding);
    for (std::size_t l = 0; l < self.layers.size(); ++l) {
      auto& layer = self.layers[l];
      const std::string p = "layers." + std::to_string(l) + ".";
      f(p + "query", layer.query);
      f(p + "key", layer.key);
      f(p + "value", layer.value);
      f(p + "output", layer.output);
      f(p + "ffn_in", layer.ffn_in);
      f(p + "ffn_in_bias", layer.ffn_in_bias);
      f(p + "ffn_out", layer.ffn_out);
      f(p + "ffn_out_bias", layer.ffn_out_bias);
    }
    f("classifier", self.classifier);
    f("classifier_bias", self.classifier_bias);
  }
};

// Gradients share the layout of the weights they differentiate.
using Gradients = ModelWeights;

template <typename Scalar>
struct AttentionResult {
  Matrix<Scalar> output;   // rows x value dim
  Matrix<Scalar> weights;  // rows x keys, rows are distributions over unmasked keys
};

// softmax(beta * Q K^T / sqrt(d_k)) V with key positions where `mask` is
// false excluded from every row. beta == 0 yields exactly uniform rows.
template <typename DerivedQ, typename DerivedK, typename DerivedV>
AttentionResult<typename DerivedQ::Scalar> scaled_attention(const Eigen::MatrixBase<DerivedQ>& q,
                                                            const Eigen::MatrixBase<DerivedK>& k,
                                                            const Eigen::MatrixBase<DerivedV>& v,
                                                            const std::vector<bool>& mask,
                                                            Temperature temperature) {
  using Scalar = typename DerivedQ::Scalar;
  if (q.cols() != k.cols() || k.rows() != v.rows() ||
      static_cast<std::size_t>(k.rows()) != mask.size()) {
    throw ShapeError("scaled_attention: Q " + shape_string(q) + ", K " + shape_string(k) +
                     ", V " + shape_string(v) + ", mask " + std::to_string(mask.size()));
  }
  const Eigen::Index rows = q.rows();
  const Eigen::Index keys = k.rows();
  Matrix<Scalar> weights(rows, keys);
  const Scalar beta = static_cast<Scalar>(temperature.beta());
  if (beta == Scalar(0)) {
    Eigen::Index live = 0;
    for (bool m : mask) live += m ? 1 : 0;
    if (live == 0) throw DomainError("scaled_attention: every key position is masked");
    const Scalar uniform = Scalar(1) / static_cast<Scalar>(live);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < keys; ++j) weights(i, j) = mask[j] ? uniform : Scalar(0);
    }
  } else {
    // (beta * s) / sqrt(d_k): beta == 1 reproduces the unscaled logits bit for bit.
    Matrix<Scalar> scores = matmul(q, k.transpose());
    const Scalar root_dk = std::sqrt(static_cast<Scalar>(q.cols()));
    std::vector<Scalar> row(keys);
    for (Eigen::Index i = 0; i < rows; ++i) {
      for (Eigen::Index j = 0; j < keys; ++j) {
        row[j] = mask[j] ? beta * scores(i, j) / root_dk : -std::numeric_limits<Scalar>::infinity();
      }
      detail::masked_softmax(std::span<const Scalar>(row), mask,
                             std::span<Scalar>(weights.row(i).data(), keys));
    }
  }
  AttentionResult<Scalar> result;
  result.output = matmul(weights, v);
  result.weights = std::move(weights);
  return result;
}

// Attention maps and pooled state captured during a forward pass.
struct ForwardTrace {
  std::size_t true_len = 0;
  // attention[layer][head] is max_len x max_len. Pad columns are exactly 0;
  // pad rows still attend over the true positions and are never read.
  std::vector<std::vector<MatrixXd>> attention;
  VectorXd pooled;
  VectorXd logits;
};

struct ForwardResult {
  VectorXd probs;  // class probabilities, size num_classes
  std::optional<ForwardTrace> trace;

  double positive_probability() const { return probs(1); }
};

// Runs the classifier on `tokens` (true length 1..max_len, ids < vocab).
// The temperature scales every attention layer; the trace is filled iff
// `capture` is set.
ForwardResult forward(std::span<const TokenId> tokens, const ModelWeights& weights,
                      Temperature temperature = Temperature(1.0), bool capture = false);

// Hard label: 1 iff prob_positive >= threshold.
int predict(double prob_positive, double threshold = 0.5);

// Versioned little-endian binary weights file with CRC-32 checksum.
void save_weights(const ModelWeights& weights, const std::filesystem::path& path);
ModelWeights load_weights(const std::filesystem::path& path,
                          const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace eat

#endif  // EAT_MODEL_HPP_
