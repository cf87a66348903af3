#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>

#include "proxyclust/encoder.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/rng.hpp"

namespace proxyclust {

inline constexpr Index kDefaultMaxLength = 77;

// Weights of the reference text tower:
//   e_s = token_s + pos_s;  p = mean_s e_s;  h = tanh(W1 p + b1);  o = W2 h + b2;  out = o / |o|.
template <typename Scalar>
struct BasicBuiltinWeights {
  MatrixX<Scalar> w1, w2;
  VectorX<Scalar> b1, b2;
  MatrixX<Scalar> positional;  // d x max_length

  Index dim() const noexcept { return w1.rows(); }
  Index max_length() const noexcept { return positional.cols(); }
};

using BuiltinWeights = BasicBuiltinWeights<double>;

// Interleaved sinusoids, base 10000: pos(s, 2i) = sin(s / 10000^(2i/d)), pos(s, 2i+1) = cos(...).
template <typename Scalar>
MatrixX<Scalar> sinusoidal_positions(Index dim, Index max_length) {
  MatrixX<Scalar> pos(dim, max_length);
  for (Index s = 0; s < max_length; ++s) {
    for (Index j = 0; j < dim; ++j) {
      const double rate = std::pow(10000.0, static_cast<double>(2 * (j / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(s) / rate;
      pos(j, s) = static_cast<Scalar>(j % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  }
  return pos;
}

// W1, W2, b1, b2 uniform in [-1/sqrt(d), 1/sqrt(d)], drawn in that order
// (row-major within each matrix) and rounded to float precision.
template <typename Scalar>
BasicBuiltinWeights<Scalar> generate_builtin_weights(Index dim, std::uint64_t seed,
                                                     Index max_length = kDefaultMaxLength) {
  if (dim <= 0 || max_length <= 0) throw ConfigError("builtin encoder: dimension and max length must be positive");
  Rng rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
  auto draw = [&] { return static_cast<Scalar>(static_cast<float>(rng.uniform(-bound, bound))); };
  BasicBuiltinWeights<Scalar> w;
  w.w1.resize(dim, dim);
  w.w2.resize(dim, dim);
  w.b1.resize(dim);
  w.b2.resize(dim);
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) w.w1(r, c) = draw();
  for (Index r = 0; r < dim; ++r)
    for (Index c = 0; c < dim; ++c) w.w2(r, c) = draw();
  for (Index r = 0; r < dim; ++r) w.b1[r] = draw();
  for (Index r = 0; r < dim; ++r) w.b2[r] = draw();
  w.positional = sinusoidal_positions<Scalar>(dim, max_length);
  return w;
}

template <typename Scalar>
struct BuiltinActivations {
  VectorX<Scalar> pooled;
  VectorX<Scalar> hidden;
  VectorX<Scalar> output;  // pre-normalization
  Scalar output_norm;
};

// tokens: d x S, S <= max_length.
template <typename Scalar>
BuiltinActivations<Scalar> builtin_forward(const BasicBuiltinWeights<Scalar>& w, const MatrixX<Scalar>& tokens) {
  BuiltinActivations<Scalar> a;
  const Index len = tokens.cols();
  a.pooled = (tokens + w.positional.leftCols(len)).rowwise().mean();
  a.hidden = (w.w1 * a.pooled + w.b1).array().tanh().matrix();
  a.output = w.w2 * a.hidden + w.b2;
  a.output_norm = a.output.norm();
  return a;
}

// Gradient of -<image, o/|o|> with respect to one token column:
//   -(1/S) W1^T diag(1 - h^2) W2^T (I - o^ o^T)/|o| image.
template <typename Scalar>
VectorX<Scalar> builtin_similarity_gradient(const BasicBuiltinWeights<Scalar>& w, const BuiltinActivations<Scalar>& a,
                                            const VectorX<Scalar>& image, Index sequence_length) {
  const VectorX<Scalar> unit = a.output / a.output_norm;
  const VectorX<Scalar> d_output = -(image - unit * unit.dot(image)) / a.output_norm;
  const VectorX<Scalar> d_hidden = w.w2.transpose() * d_output;
  const VectorX<Scalar> d_pre = (Scalar(1) - a.hidden.array().square()).matrix().cwiseProduct(d_hidden);
  return (w.w1.transpose() * d_pre) / static_cast<Scalar>(sequence_length);
}

void save_builtin_weights(const BuiltinWeights& w, const std::filesystem::path& dir);
BuiltinWeights load_builtin_weights(const std::filesystem::path& dir, Index max_length = kDefaultMaxLength);

class BuiltinEncoder final : public TextEncoder {
 public:
  explicit BuiltinEncoder(BuiltinWeights weights, std::string label = "builtin");
  static BuiltinEncoder from_seed(Index dim, std::uint64_t seed, Index max_length = kDefaultMaxLength);

  Index dim() const override { return weights_.dim(); }
  Index max_length() const override { return weights_.max_length(); }
  UnitVector encode(const TokenSequence& seq) const override;
  std::string describe() const override { return label_; }
  bool provides_gradient() const override { return true; }
  Vector similarity_gradient(const TokenSequence& seq, const Vector& proxy, const UnitVector& image) const override;

  const BuiltinWeights& weights() const noexcept { return weights_; }

 private:
  BuiltinWeights weights_;
  std::string label_;
};

}  // namespace proxyclust
