#include "proxyclust/objective.hpp"

#include <cmath>

#include "proxyclust/errors.hpp"

namespace proxyclust {

void HyperParams::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!finite_nonneg(alpha)) throw ConfigError("alpha must be a finite non-negative number");
  if (!finite_nonneg(beta)) throw ConfigError("beta must be a finite non-negative number");
  if (!finite_nonneg(weight_decay)) throw ConfigError("weight_decay must be a finite non-negative number");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (iterations < 0) throw ConfigError("iterations must be non-negative");
}

Variant parse_variant(const std::string& name) {
  if (name == "proxy") return Variant::proxy;
  if (name == "concept") return Variant::concept_level;
  if (name == "reference") return Variant::reference;
  if (name == "concept_reference") return Variant::concept_reference;
  if (name == "full") return Variant::full;
  throw ConfigError("unknown variant '" + name + "' (expected proxy, concept, reference, concept_reference, full)");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::proxy: return "proxy";
    case Variant::concept_level: return "concept";
    case Variant::reference: return "reference";
    case Variant::concept_reference: return "concept_reference";
    case Variant::full: return "full";
  }
  return "full";
}

void ObjectiveContext::validate() const {
  if (!encoder) throw ConfigError("objective context has no encoder");
  const Index d = encoder->dim();
  if (image.size() != d) throw DimensionError("image dimension does not match encoder");
  if (!prompt.slot_index) throw ConfigError("objective prompt has no proxy slot");
  if (prompt.dim() != d) throw DimensionError("prompt dimension does not match encoder");
  if (anchor.size() != d) throw DimensionError("anchor dimension does not match encoder");
  if (contrastive_weight != 0.0) {
    if (concept_embeddings.rows() != d) throw DimensionError("concept embeddings dimension does not match encoder");
    if (target_index < 0 || target_index >= concept_embeddings.cols()) {
      throw ConfigError("contrastive target index out of range");
    }
  }
  if (concept_anchor_weight != 0.0 && concept_anchor.size() != d) {
    throw DimensionError("concept anchor dimension does not match encoder");
  }
}

ObjectiveTerms objective_terms(const Vector& w, const ObjectiveContext& ctx) {
  ObjectiveTerms t;
  t.similarity = similarity_loss(*ctx.encoder, ctx.prompt, w, ctx.image);
  if (ctx.anchor_weight != 0.0) t.reference = ctx.anchor_weight * (w - ctx.anchor).squaredNorm();
  if (ctx.contrastive_weight != 0.0) {
    t.contrastive = ctx.contrastive_weight * contrastive_regularizer(w, ctx.concept_embeddings, ctx.target_index);
  }
  if (ctx.concept_anchor_weight != 0.0) {
    t.concept_anchor = ctx.concept_anchor_weight * (w - ctx.concept_anchor).squaredNorm();
  }
  if (ctx.weight_decay != 0.0) t.weight_decay = ctx.weight_decay * w.squaredNorm();
  return t;
}

double objective(const Vector& w, const ObjectiveContext& ctx) { return objective_terms(w, ctx).total(); }

Vector objective_grad(const Vector& w, const ObjectiveContext& ctx) {
  Vector g = loss_grad_wrt_proxy(*ctx.encoder, ctx.prompt, w, ctx.image);
  if (ctx.anchor_weight != 0.0) g += 2.0 * ctx.anchor_weight * (w - ctx.anchor);
  if (ctx.contrastive_weight != 0.0) {
    g += ctx.contrastive_weight * contrastive_regularizer_grad(w, ctx.concept_embeddings, ctx.target_index);
  }
  if (ctx.concept_anchor_weight != 0.0) g += 2.0 * ctx.concept_anchor_weight * (w - ctx.concept_anchor);
  if (ctx.weight_decay != 0.0) g += 2.0 * ctx.weight_decay * w;
  return g;
}

ObjectiveContext make_objective_context(const UnitVector& image, const ConceptSpec& spec,
                                        const SelectedReference* reference, const HyperParams& hyper, Variant variant,
                                        const TextEncoder& encoder, const TokenTable& table) {
  const Vector concept_embedding = table.lookup(spec.concept_word);
  ObjectiveContext ctx{.image = image,
                       .prompt = render_prompt_with_proxy(spec.prompt, concept_embedding, table),
                       .anchor = concept_embedding,
                       .concept_embeddings = {},
                       .concept_anchor = {}};
  ctx.encoder = &encoder;
  ctx.weight_decay = hyper.weight_decay;
  if (uses_reference(variant)) {
    if (!reference) throw ConfigError("variant '" + to_string(variant) + "' needs a selected reference word");
    ctx.anchor = reference->token_embedding;
  }
  switch (variant) {
    case Variant::proxy:
      break;
    case Variant::concept_level:
    case Variant::reference:
      ctx.anchor_weight = hyper.alpha;
      break;
    case Variant::concept_reference:
      ctx.anchor_weight = hyper.alpha;
      ctx.concept_anchor = concept_embedding;
      ctx.concept_anchor_weight = hyper.beta;
      break;
    case Variant::full:
      ctx.anchor_weight = hyper.alpha;
      if (!spec.contrastive_concepts.empty()) {
        ctx.concept_embeddings.resize(table.dim(), static_cast<Index>(spec.contrastive_concepts.size()));
        for (std::size_t j = 0; j < spec.contrastive_concepts.size(); ++j) {
          ctx.concept_embeddings.col(static_cast<Index>(j)) = table.lookup(spec.contrastive_concepts[j]);
        }
        ctx.target_index = spec.target_index();
        ctx.contrastive_weight = hyper.beta;
      }
      break;
  }
  ctx.validate();
  return ctx;
}

}  // namespace proxyclust
