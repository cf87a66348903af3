#include "proxyclust/encoder.hpp"

#include <cmath>

#include "proxyclust/errors.hpp"

namespace proxyclust {

Vector TextEncoder::similarity_gradient(const TokenSequence&, const Vector&, const UnitVector&) const {
  throw ConfigError(describe() + " does not provide gradients");
}

void TextEncoder::check_sequence(const TokenSequence& seq) const {
  if (seq.dim() != dim()) {
    throw DimensionError("sequence dimension " + std::to_string(seq.dim()) + " does not match encoder dimension " +
                         std::to_string(dim()));
  }
  if (seq.length() == 0) throw ConfigError("cannot encode an empty token sequence");
  if (seq.length() > max_length()) {
    throw ConfigError("sequence length " + std::to_string(seq.length()) + " exceeds encoder maximum " +
                      std::to_string(max_length()));
  }
}

double similarity_loss(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                       const UnitVector& image) {
  return -dot(image, encoder.encode(seq.with_proxy(proxy)));
}

Vector loss_grad_wrt_proxy(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                           const UnitVector& image) {
  if (encoder.provides_gradient()) return encoder.similarity_gradient(seq, proxy, image);
  return finite_diff_grad(encoder, seq, proxy, image, kDefaultFiniteDifferenceStep);
}

Vector finite_diff_grad(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                        const UnitVector& image, double step) {
  if (!(step > 0.0)) throw ConfigError("finite difference step must be positive");
  Vector grad(proxy.size());
  Vector probe = proxy;
  for (Index j = 0; j < proxy.size(); ++j) {
    probe[j] = proxy[j] + step;
    const double up = similarity_loss(encoder, seq, probe, image);
    probe[j] = proxy[j] - step;
    const double down = similarity_loss(encoder, seq, probe, image);
    probe[j] = proxy[j];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericalError("non-finite loss while differencing coordinate " + std::to_string(j));
    }
    grad[j] = (up - down) / (2.0 * step);
  }
  return grad;
}

FiniteDifferenceEncoder::FiniteDifferenceEncoder(EncoderPtr inner, double step)
    : inner_(std::move(inner)), step_(step) {
  if (!inner_) throw ConfigError("finite difference wrapper needs a backend");
  if (!(step_ > 0.0)) throw ConfigError("finite difference step must be positive");
}

std::string FiniteDifferenceEncoder::describe() const {
  return "finite-difference(" + inner_->describe() + ", step=" + std::to_string(step_) + ")";
}

Vector FiniteDifferenceEncoder::similarity_gradient(const TokenSequence& seq, const Vector& proxy,
                                                    const UnitVector& image) const {
  return finite_diff_grad(*inner_, seq, proxy, image, step_);
}

}  // namespace proxyclust
