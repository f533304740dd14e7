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

// Activations kept from a forward pass so that train.cpp can run the
// matching reverse pass. Not part of the public interface.

#ifndef EAT_SRC_FORWARD_CACHE_HPP_
#define EAT_SRC_FORWARD_CACHE_HPP_

#include <span>
#include <vector>

#include "eat/model.hpp"

namespace eat::internal {

inline constexpr double kLayerNormEpsilon = 1e-5;

struct LayerCache {
  MatrixXd input;        // residual stream entering the block
  MatrixXd norm1;        // normalized input
  VectorXd norm1_rstd;
  MatrixXd q, k, v;      // T x d, head h in columns [h*dk, (h+1)*dk)
  std::vector<MatrixXd> attention;  // per head, T x T
  MatrixXd concat;       // T x d
  MatrixXd mid;          // residual stream after attention
  MatrixXd norm2;
  VectorXd norm2_rstd;
  MatrixXd ffn_pre;      // T x 4d, before ReLU
  MatrixXd ffn_act;      // T x 4d
};

struct ForwardCache {
  std::vector<TokenId> padded;  // length max_len
  std::vector<bool> mask;       // true at real token positions
  std::size_t true_len = 0;
  std::vector<LayerCache> layers;
  MatrixXd final_stream;
  MatrixXd final_norm;
  VectorXd final_rstd;
  VectorXd logits;
  VectorXd probs;
};

// Row-wise normalization to zero mean and unit variance.
void layer_norm(const MatrixXd& x, MatrixXd& y, VectorXd& rstd);

// Gradient of the loss w.r.t. the layer_norm input given dL/dy.
MatrixXd layer_norm_backward(const MatrixXd& y, const VectorXd& rstd, const MatrixXd& dy);

// Validates tokens and runs the full forward pass keeping every activation.
void run_forward(std::span<const TokenId> tokens, const ModelWeights& weights,
                 Temperature temperature, ForwardCache& cache);

}  // namespace eat::internal

#endif  // EAT_SRC_FORWARD_CACHE_HPP_
