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

#include "eat/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

#include <zlib.h>

#include "forward_cache.hpp"

namespace eat {

void ModelConfig::validate() const {
  std::ostringstream problems;
  if (num_layers < 1) problems << " num_layers must be >= 1;";
  if (num_heads < 1 || head_dim < 1) problems << " num_heads and head_dim must be >= 1;";
  if (num_heads * head_dim != model_dim) problems << " num_heads * head_dim must equal model_dim;";
  if (max_len < 2) problems << " max_len must be >= 2;";
  if (vocab_size < 4) problems << " vocab_size must be >= 4;";
  if (num_classes != 2) problems << " num_classes must be 2;";
  const std::string text = problems.str();
  if (!text.empty()) throw ConfigError("ModelConfig " + to_string(*this) + ":" + text);
}

std::string to_string(const ModelConfig& c) {
  std::ostringstream out;
  out << "{L=" << c.num_layers << ", h=" << c.num_heads << ", d=" << c.model_dim
      << ", d_k=" << c.head_dim << ", T=" << c.max_len << ", vocab=" << c.vocab_size
      << ", classes=" << c.num_classes << "}";
  return out.str();
}

ModelWeights ModelWeights::zeros(const ModelConfig& config) {
  config.validate();
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto f = static_cast<Eigen::Index>(config.ffn_dim());
  const auto c = static_cast<Eigen::Index>(config.num_classes);
  ModelWeights w;
  w.config = config;
  w.token_embedding = MatrixXd::Zero(static_cast<Eigen::Index>(config.vocab_size), d);
  w.position_embedding = MatrixXd::Zero(static_cast<Eigen::Index>(config.max_len), d);
  w.layers.resize(config.num_layers);
  for (auto& layer : w.layers) {
    layer.query = MatrixXd::Zero(d, d);
    layer.key = MatrixXd::Zero(d, d);
    layer.value = MatrixXd::Zero(d, d);
    layer.output = MatrixXd::Zero(d, d);
    layer.ffn_in = MatrixXd::Zero(d, f);
    layer.ffn_in_bias = MatrixXd::Zero(1, f);
    layer.ffn_out = MatrixXd::Zero(f, d);
    layer.ffn_out_bias = MatrixXd::Zero(1, d);
  }
  w.classifier = MatrixXd::Zero(d, c);
  w.classifier_bias = MatrixXd::Zero(1, c);
  return w;
}

ModelWeights ModelWeights::gaussian(const ModelConfig& config, std::uint64_t seed, double stddev) {
  ModelWeights w = zeros(config);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, stddev);
  w.for_each_tensor([&](const std::string& name, MatrixXd& t) {
    if (name.ends_with("_bias")) return;
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = normal(rng);
  });
  return w;
}

std::size_t ModelWeights::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](const std::string&, const MatrixXd& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

void ModelWeights::validate() const {
  config.validate();
  if (layers.size() != config.num_layers) {
    throw ShapeError("ModelWeights: " + std::to_string(layers.size()) + " layers, config expects " +
                     std::to_string(config.num_layers));
  }
  const ModelWeights reference = zeros(config);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> shapes;
  reference.for_each_tensor(
      [&](const std::string&, const MatrixXd& t) { shapes.emplace_back(t.rows(), t.cols()); });
  std::size_t index = 0;
  for_each_tensor([&](const std::string& name, const MatrixXd& t) {
    const auto [rows, cols] = shapes[index++];
    if (t.rows() != rows || t.cols() != cols) {
      throw ShapeError("ModelWeights: tensor " + name + " is " + shape_string(t) + ", expected " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
    require_finite(t, "ModelWeights " + name);
  });
}

bool operator==(const ModelWeights& a, const ModelWeights& b) {
  if (!(a.config == b.config) || a.layers.size() != b.layers.size()) return false;
  std::vector<const MatrixXd*> left;
  a.for_each_tensor([&](const std::string&, const MatrixXd& t) { left.push_back(&t); });
  std::size_t index = 0;
  bool equal = true;
  b.for_each_tensor([&](const std::string&, const MatrixXd& t) {
    const MatrixXd& other = *left[index++];
    if (!equal) return;
    if (other.rows() != t.rows() || other.cols() != t.cols() ||
        std::memcmp(other.data(), t.data(), sizeof(double) * static_cast<std::size_t>(t.size())) != 0) {
      equal = false;
    }
  });
  return equal;
}

namespace internal {

void layer_norm(const MatrixXd& x, MatrixXd& y, VectorXd& rstd) {
  const Eigen::Index n = x.cols();
  y.resize(x.rows(), n);
  rstd.resize(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double mean = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) mean += x(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double c = x(i, j) - mean;
      var += c * c;
    }
    var /= static_cast<double>(n);
    const double r = 1.0 / std::sqrt(var + kLayerNormEpsilon);
    rstd(i) = r;
    for (Eigen::Index j = 0; j < n; ++j) y(i, j) = (x(i, j) - mean) * r;
  }
}

MatrixXd layer_norm_backward(const MatrixXd& y, const VectorXd& rstd, const MatrixXd& dy) {
  const Eigen::Index n = y.cols();
  MatrixXd dx(y.rows(), n);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    double mean_dy = 0.0;
    double mean_dy_y = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      mean_dy += dy(i, j);
      mean_dy_y += dy(i, j) * y(i, j);
    }
    mean_dy /= static_cast<double>(n);
    mean_dy_y /= static_cast<double>(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      dx(i, j) = rstd(i) * (dy(i, j) - mean_dy - y(i, j) * mean_dy_y);
    }
  }
  return dx;
}

void run_forward(std::span<const TokenId> tokens, const ModelWeights& weights,
                 Temperature temperature, ForwardCache& cache) {
  const ModelConfig& config = weights.config;
  if (tokens.empty()) throw DomainError("forward: empty token sequence");
  if (tokens.size() > config.max_len) {
    throw DomainError("forward: sequence length " + std::to_string(tokens.size()) +
                      " exceeds max_len " + std::to_string(config.max_len));
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] >= config.vocab_size) {
      throw DomainError("forward: token id " + std::to_string(tokens[i]) + " at position " +
                        std::to_string(i) + " is outside the vocabulary of size " +
                        std::to_string(config.vocab_size));
    }
  }
  const auto T = static_cast<Eigen::Index>(config.max_len);
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto dk = static_cast<Eigen::Index>(config.head_dim);

  cache.true_len = tokens.size();
  cache.padded.assign(config.max_len, kPadToken);
  std::copy(tokens.begin(), tokens.end(), cache.padded.begin());
  cache.mask.assign(config.max_len, false);
  std::fill_n(cache.mask.begin(), tokens.size(), true);

  MatrixXd stream(T, d);
  for (Eigen::Index t = 0; t < T; ++t) {
    stream.row(t) = weights.token_embedding.row(cache.padded[t]) + weights.position_embedding.row(t);
  }

  cache.layers.resize(config.num_layers);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const LayerWeights& w = weights.layers[l];
    LayerCache& lc = cache.layers[l];
    lc.input = stream;
    layer_norm(lc.input, lc.norm1, lc.norm1_rstd);
    lc.q = matmul(lc.norm1, w.query);
    lc.k = matmul(lc.norm1, w.key);
    lc.v = matmul(lc.norm1, w.value);
    lc.concat.resize(T, d);
    lc.attention.resize(config.num_heads);
    for (std::size_t h = 0; h < config.num_heads; ++h) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(h) * dk;
      auto head = scaled_attention(lc.q.middleCols(c0, dk), lc.k.middleCols(c0, dk),
                                   lc.v.middleCols(c0, dk), cache.mask, temperature);
      lc.concat.middleCols(c0, dk) = head.output;
      lc.attention[h] = std::move(head.weights);
    }
    lc.mid = lc.input + matmul(lc.concat, w.output);
    layer_norm(lc.mid, lc.norm2, lc.norm2_rstd);
    lc.ffn_pre = matmul(lc.norm2, w.ffn_in);
    lc.ffn_pre.rowwise() += w.ffn_in_bias.row(0);
    lc.ffn_act = lc.ffn_pre.cwiseMax(0.0);
    MatrixXd ffn_out = matmul(lc.ffn_act, w.ffn_out);
    ffn_out.rowwise() += w.ffn_out_bias.row(0);
    stream = lc.mid + ffn_out;
  }
  cache.final_stream = stream;
  layer_norm(cache.final_stream, cache.final_norm, cache.final_rstd);
  MatrixXd logits = matmul(cache.final_norm.topRows(1), weights.classifier);
  logits += weights.classifier_bias;
  cache.logits = logits.row(0).transpose();
  std::vector<double> raw(cache.logits.data(), cache.logits.data() + cache.logits.size());
  std::vector<double> probs(raw.size());
  detail::masked_softmax(std::span<const double>(raw), std::vector<bool>(raw.size(), true),
                         std::span<double>(probs));
  cache.probs = Eigen::Map<const VectorXd>(probs.data(), static_cast<Eigen::Index>(probs.size()));
}

}  // namespace internal

ForwardResult forward(std::span<const TokenId> tokens, const ModelWeights& weights,
                      Temperature temperature, bool capture) {
  internal::ForwardCache cache;
  internal::run_forward(tokens, weights, temperature, cache);
  ForwardResult result;
  result.probs = cache.probs;
  if (capture) {
    ForwardTrace trace;
    trace.true_len = cache.true_len;
    trace.attention.reserve(cache.layers.size());
    for (auto& layer : cache.layers) trace.attention.push_back(std::move(layer.attention));
    trace.pooled = cache.final_norm.row(0).transpose();
    trace.logits = cache.logits;
    result.trace = std::move(trace);
  }
  return result;
}

int predict(double prob_positive, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw DomainError("predict: threshold " + std::to_string(threshold) + " outside [0, 1]");
  }
  if (!(prob_positive >= 0.0 && prob_positive <= 1.0)) {
    throw DomainError("predict: probability " + std::to_string(prob_positive) + " outside [0, 1]");
  }
  return prob_positive >= threshold ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Weights file.
//
//   magic "EATW" | u32 version | 7 x u64 config | u64 parameter count |
//   f64 parameters in for_each_tensor order, row-major | u32 CRC-32 of all
//   preceding bytes. Integers and reals are little-endian.

namespace {

constexpr std::array<char, 4> kMagic = {'E', 'A', 'T', 'W'};
constexpr std::uint32_t kFormatVersion = 1;
// magic, version, config, parameter count, checksum
constexpr std::size_t kChecksumOffset = 4 + 4 + 7 * 8 + 8;
constexpr std::size_t kHeaderBytes = kChecksumOffset + 4;

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::string& in, std::size_t& offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  offset += sizeof(U);
  return std::bit_cast<T>(bits);
}

// Covers every byte except the checksum field itself.
std::uint32_t crc_of(const std::string& bytes) {
  const auto* data = reinterpret_cast<const Bytef*>(bytes.data());
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, data, static_cast<uInt>(kChecksumOffset));
  crc = crc32(crc, data + kHeaderBytes, static_cast<uInt>(bytes.size() - kHeaderBytes));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

void save_weights(const ModelWeights& weights, const std::filesystem::path& path) {
  weights.validate();
  const ModelConfig& c = weights.config;
  std::string bytes(kMagic.begin(), kMagic.end());
  put_le<std::uint32_t>(bytes, kFormatVersion);
  for (std::uint64_t v : {c.num_layers, c.num_heads, c.model_dim, c.head_dim, c.max_len, c.vocab_size,
                          c.num_classes}) {
    put_le<std::uint64_t>(bytes, v);
  }
  put_le<std::uint64_t>(bytes, weights.parameter_count());
  put_le<std::uint32_t>(bytes, 0);
  weights.for_each_tensor([&](const std::string&, const MatrixXd& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) put_le<double>(bytes, t.data()[i]);
  });
  std::string crc;
  put_le<std::uint32_t>(crc, crc_of(bytes));
  bytes.replace(kChecksumOffset, 4, crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("save_weights: cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("save_weights: write to " + path.string() + " failed");
}

ModelWeights load_weights(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("load_weights: cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kHeaderBytes) {
    throw ChecksumError("load_weights: " + path.string() + " is truncated (" +
                        std::to_string(bytes.size()) + " bytes)");
  }
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FormatError("load_weights: " + path.string() + " is not an EAT weights file");
  }
  std::size_t offset = 4;
  const auto version = get_le<std::uint32_t>(bytes, offset);
  if (version != kFormatVersion) {
    throw FormatError("load_weights: format version " + std::to_string(version) + ", expected " +
                      std::to_string(kFormatVersion));
  }
  ModelConfig config;
  for (std::size_t* field : {&config.num_layers, &config.num_heads, &config.model_dim, &config.head_dim,
                             &config.max_len, &config.vocab_size, &config.num_classes}) {
    *field = static_cast<std::size_t>(get_le<std::uint64_t>(bytes, offset));
  }
  const auto count = get_le<std::uint64_t>(bytes, offset);
  if (bytes.size() != kHeaderBytes + count * 8) {
    throw ChecksumError("load_weights: " + path.string() + " has " + std::to_string(bytes.size()) +
                        " bytes, header announces " + std::to_string(kHeaderBytes + count * 8));
  }
  if (get_le<std::uint32_t>(bytes, offset) != crc_of(bytes)) {
    throw ChecksumError("load_weights: checksum mismatch in " + path.string());
  }

  try {
    config.validate();
  } catch (const ConfigError& e) {
    throw ShapeError(std::string("load_weights: ") + e.what());
  }
  if (expected && !(*expected == config)) {
    throw ShapeError("load_weights: file holds " + to_string(config) + ", caller expects " +
                     to_string(*expected));
  }
  ModelWeights weights = ModelWeights::zeros(config);
  if (weights.parameter_count() != count) {
    throw ShapeError("load_weights: parameter count " + std::to_string(count) + " does not match " +
                     to_string(config));
  }
  weights.for_each_tensor([&](const std::string&, MatrixXd& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = get_le<double>(bytes, offset);
  });
  weights.validate();
  return weights;
}

}  // namespace eat
