#pragma once

#include <string>

#include "proxyclust/concept_spec.hpp"
#include "proxyclust/encoder.hpp"
#include "proxyclust/reference_selection.hpp"

namespace proxyclust {

struct HyperParams {
  double alpha = 0.4;           // reference-constraint weight
  double beta = 0.3;            // contrastive (or concept-anchor) weight
  double lambda = 1.0;          // constraint radius; only recorded, the penalty form is optimized
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  double momentum = 0.9;        // Adam beta1
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int iterations = 1000;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

// Ablation variants of the objective.
//   proxy:             -sim                                    (init at phi(u))
//   concept:           -sim + alpha |w - phi(u)|^2             (init at phi(u))
//   reference:         -sim + alpha |w - z_i|^2                (init at z_i)
//   concept_reference: -sim + alpha |w - z_i|^2 + beta |w - phi(u)|^2
//   full:              -sim + alpha |w - z_i|^2 + beta R(w)
enum class Variant { proxy, concept_level, reference, concept_reference, full };

Variant parse_variant(const std::string& name);  // throws ConfigError
std::string to_string(Variant v);
inline bool uses_reference(Variant v) { return v == Variant::reference || v == Variant::concept_reference || v == Variant::full; }

// Everything entering one image's loss. Weight fields are the effective ones
// after the variant has been applied.
struct ObjectiveContext {
  UnitVector image;
  TokenSequence prompt;            // rendered template; slot holds the proxy
  Vector anchor;                   // z_i, or phi(u) for the concept variant
  double anchor_weight = 0.0;      // alpha
  Matrix concept_embeddings;       // d x J, columns phi(u_j); may be empty
  Index target_index = 0;          // column of u_w
  double contrastive_weight = 0.0; // beta
  Vector concept_anchor;           // phi(u), concept_reference variant only
  double concept_anchor_weight = 0.0;
  double weight_decay = 0.0;
  const TextEncoder* encoder = nullptr;

  void validate() const;
};

struct ObjectiveTerms {
  double similarity = 0.0;     // -<x, h(t*)>
  double reference = 0.0;      // alpha |w - anchor|^2
  double contrastive = 0.0;    // beta R(w)
  double concept_anchor = 0.0;
  double weight_decay = 0.0;   // wd |w|^2
  double total() const { return similarity + reference + contrastive + concept_anchor + weight_decay; }
};

// R(w) = -log softmax(U^T w)[target], evaluated with log-sum-exp.
template <typename Scalar>
Scalar contrastive_regularizer(const VectorX<Scalar>& w, const MatrixX<Scalar>& concepts, Index target) {
  if (concepts.cols() < 1 || target < 0 || target >= concepts.cols()) {
    throw ConfigError("contrastive regularizer: target index out of range");
  }
  if (concepts.rows() != w.size()) throw DimensionError("contrastive regularizer: dimension mismatch");
  const VectorX<Scalar> logits = concepts.transpose() * w;
  if (!logits.allFinite()) throw NumericalError("contrastive regularizer: non-finite logits");
  const Scalar top = logits.maxCoeff();
  const Scalar lse = top + std::log((logits.array() - top).exp().sum());
  return std::max(Scalar(0), lse - logits[target]);
}

// sum_j softmax_j u_j - u_target
template <typename Scalar>
VectorX<Scalar> contrastive_regularizer_grad(const VectorX<Scalar>& w, const MatrixX<Scalar>& concepts, Index target) {
  const VectorX<Scalar> logits = concepts.transpose() * w;
  if (!logits.allFinite()) throw NumericalError("contrastive regularizer: non-finite logits");
  VectorX<Scalar> p = (logits.array() - logits.maxCoeff()).exp().matrix();
  p /= p.sum();
  return concepts * p - concepts.col(target);
}

ObjectiveTerms objective_terms(const Vector& w, const ObjectiveContext& ctx);
double objective(const Vector& w, const ObjectiveContext& ctx);
Vector objective_grad(const Vector& w, const ObjectiveContext& ctx);

// Builds the context for one image from its selected reference.
ObjectiveContext make_objective_context(const UnitVector& image, const ConceptSpec& spec,
                                        const SelectedReference* reference, const HyperParams& hyper, Variant variant,
                                        const TextEncoder& encoder, const TokenTable& table);

}  // namespace proxyclust
