#include "proxyclust/builtin_encoder.hpp"

#include "proxyclust/matrix_io.hpp"

namespace proxyclust {

namespace {

RowMatrix as_column(const Vector& v) { return RowMatrix(v); }

}  // namespace

void save_builtin_weights(const BuiltinWeights& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_embedding_matrix(dir / "w1.mmap", RowMatrix(w.w1));
  write_embedding_matrix(dir / "b1.mmap", as_column(w.b1));
  write_embedding_matrix(dir / "w2.mmap", RowMatrix(w.w2));
  write_embedding_matrix(dir / "b2.mmap", as_column(w.b2));
}

BuiltinWeights load_builtin_weights(const std::filesystem::path& dir, Index max_length) {
  BuiltinWeights w;
  w.w1 = read_embedding_matrix(dir / "w1.mmap");
  w.w2 = read_embedding_matrix(dir / "w2.mmap");
  const RowMatrix b1 = read_embedding_matrix(dir / "b1.mmap");
  const RowMatrix b2 = read_embedding_matrix(dir / "b2.mmap");
  const Index d = w.w1.rows();
  if (w.w1.cols() != d || w.w2.rows() != d || w.w2.cols() != d || b1.rows() != d || b1.cols() != 1 ||
      b2.rows() != d || b2.cols() != 1) {
    throw DimensionError("builtin weights in '" + dir.string() + "' have inconsistent shapes");
  }
  w.b1 = b1.col(0);
  w.b2 = b2.col(0);
  w.positional = sinusoidal_positions<double>(d, max_length);
  return w;
}

BuiltinEncoder::BuiltinEncoder(BuiltinWeights weights, std::string label)
    : weights_(std::move(weights)), label_(std::move(label)) {
  const Index d = weights_.dim();
  if (d <= 0 || weights_.w1.cols() != d || weights_.w2.rows() != d || weights_.w2.cols() != d ||
      weights_.b1.size() != d || weights_.b2.size() != d || weights_.positional.rows() != d) {
    throw DimensionError("builtin encoder weights have inconsistent shapes");
  }
}

BuiltinEncoder BuiltinEncoder::from_seed(Index dim, std::uint64_t seed, Index max_length) {
  return BuiltinEncoder(generate_builtin_weights<double>(dim, seed, max_length),
                        "builtin(d=" + std::to_string(dim) + ", seed=" + std::to_string(seed) + ")");
}

UnitVector BuiltinEncoder::encode(const TokenSequence& seq) const {
  check_sequence(seq);
  const auto act = builtin_forward(weights_, seq.embeddings);
  return normalize(act.output);
}

Vector BuiltinEncoder::similarity_gradient(const TokenSequence& seq, const Vector& proxy,
                                           const UnitVector& image) const {
  const TokenSequence filled = seq.with_proxy(proxy);
  check_sequence(filled);
  if (image.size() != dim()) throw DimensionError("image dimension does not match encoder dimension");
  const auto act = builtin_forward(weights_, filled.embeddings);
  if (!(act.output_norm > 0.0)) throw NormalizationError("encoder output has zero norm");
  return builtin_similarity_gradient(weights_, act, image.values(), filled.length());
}

}  // namespace proxyclust
