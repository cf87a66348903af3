#pragma once

#include <memory>
#include <string>

#include "proxyclust/prompt.hpp"
#include "proxyclust/types.hpp"
#include "proxyclust/unit_vector.hpp"

namespace proxyclust {

inline constexpr double kDefaultFiniteDifferenceStep = 1e-4;

// A frozen text encoder h(.). Implementations are immutable after
// construction and safe for concurrent encode() calls.
class TextEncoder {
 public:
  virtual ~TextEncoder() = default;

  virtual Index dim() const = 0;
  virtual Index max_length() const = 0;
  virtual UnitVector encode(const TokenSequence& seq) const = 0;
  virtual std::string describe() const = 0;

  virtual bool provides_gradient() const { return false; }

  // d/d(proxy) of -<image, encode(seq.with_proxy(proxy))>. Only valid when
  // provides_gradient(); the default throws ConfigError.
  virtual Vector similarity_gradient(const TokenSequence& seq, const Vector& proxy, const UnitVector& image) const;

 protected:
  void check_sequence(const TokenSequence& seq) const;
};

using EncoderPtr = std::shared_ptr<const TextEncoder>;

// -<image, h(seq with slot = proxy)>, in [-1, 1].
double similarity_loss(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                       const UnitVector& image);

// Exact gradient when the backend provides one, otherwise central differences
// at the default step.
Vector loss_grad_wrt_proxy(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                           const UnitVector& image);

// Central differences of similarity_loss, one coordinate at a time (2d encodes).
Vector finite_diff_grad(const TextEncoder& encoder, const TokenSequence& seq, const Vector& proxy,
                        const UnitVector& image, double step = kDefaultFiniteDifferenceStep);

// Supplies gradients for a forward-only backend through finite_diff_grad.
class FiniteDifferenceEncoder final : public TextEncoder {
 public:
  explicit FiniteDifferenceEncoder(EncoderPtr inner, double step = kDefaultFiniteDifferenceStep);

  Index dim() const override { return inner_->dim(); }
  Index max_length() const override { return inner_->max_length(); }
  UnitVector encode(const TokenSequence& seq) const override { return inner_->encode(seq); }
  std::string describe() const override;
  bool provides_gradient() const override { return true; }
  Vector similarity_gradient(const TokenSequence& seq, const Vector& proxy, const UnitVector& image) const override;

  double step() const noexcept { return step_; }

 private:
  EncoderPtr inner_;
  double step_;
};

}  // namespace proxyclust
