#include "proxyclust/optimizer.hpp"

#include <cmath>
#include <sstream>

#include "proxyclust/errors.hpp"

namespace proxyclust {

ProxyState adam_step(ProxyState state, const Vector& grad, const HyperParams& hyper) {
  if (grad.size() != state.w.size() || state.m.size() != state.w.size() || state.v.size() != state.w.size()) {
    throw DimensionError("adam_step: gradient and state dimensions differ");
  }
  if (!grad.allFinite()) throw NumericalError("adam_step: non-finite gradient");
  const double b1 = hyper.momentum;
  const double b2 = hyper.beta2;
  state.step_count += 1;
  state.m = b1 * state.m + (1.0 - b1) * grad;
  state.v = b2 * state.v + (1.0 - b2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
  const Vector m_hat = state.m / c1;
  const Vector v_hat = state.v / c2;
  state.w -= hyper.learning_rate * (m_hat.array() / (v_hat.array().sqrt() + hyper.epsilon)).matrix();
  return state;
}

ProxyState optimize_proxy(Index image_index, const ObjectiveContext& ctx, const HyperParams& hyper) {
  hyper.validate();
  ProxyState state;
  state.reference.image_index = image_index;
  state.w = ctx.anchor;
  state.m = Vector::Zero(ctx.anchor.size());
  state.v = Vector::Zero(ctx.anchor.size());
  state.initial_loss = objective(state.w, ctx);
  if (!std::isfinite(state.initial_loss)) {
    throw NumericalError("image " + std::to_string(image_index) + ": non-finite initial loss");
  }
  for (int it = 0; it < hyper.iterations; ++it) {
    const Vector g = objective_grad(state.w, ctx);
    if (!g.allFinite()) {
      throw NumericalError("image " + std::to_string(image_index) + ": non-finite gradient at iteration " +
                           std::to_string(it));
    }
    state = adam_step(std::move(state), g, hyper);
    if (!state.w.allFinite()) {
      throw NumericalError("image " + std::to_string(image_index) + ": proxy diverged at iteration " +
                           std::to_string(it));
    }
  }
  state.final_loss = objective(state.w, ctx);
  if (!std::isfinite(state.final_loss)) {
    throw NumericalError("image " + std::to_string(image_index) + ": non-finite loss at iteration " +
                         std::to_string(hyper.iterations));
  }
  return state;
}

ProxyBatch optimize_all(const std::vector<UnitVector>& images, const ConceptSpec& spec, const HyperParams& hyper,
                        const TextEncoder& encoder, const TokenTable& table, const OptimizeOptions& options) {
  if (images.empty()) throw ConfigError("optimize_all: no images");
  hyper.validate();
  spec.validate();
  spec.validate_tokens(table);
  if (table.dim() != encoder.dim()) throw DimensionError("token table and encoder dimensions differ");

  const Index n = static_cast<Index>(images.size());
  const bool needs_reference = uses_reference(options.variant);
  std::optional<CandidatePrompts> prompts;
  if (needs_reference) prompts.emplace(spec, encoder, table);

  std::vector<ProxyState> states(images.size());
  std::vector<std::string> failures(images.size());
  parallel_for(n, options.workers, [&](Index i) {
    const auto& image = images[static_cast<std::size_t>(i)];
    try {
      std::optional<SelectedReference> ref;
      if (needs_reference) ref = select_reference(i, image, *prompts, table);
      const auto ctx = make_objective_context(image, spec, ref ? &*ref : nullptr, hyper, options.variant, encoder,
                                              table);
      ProxyState state = optimize_proxy(i, ctx, hyper);
      if (ref) state.reference = std::move(*ref);
      state.reference.image_index = i;
      states[static_cast<std::size_t>(i)] = std::move(state);
    } catch (const Error& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  });

  std::ostringstream err;
  int failed = 0;
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i].empty()) {
      err << (failed++ ? "; " : "") << "[" << i << "] " << failures[i];
    }
  }
  if (failed) {
    throw NumericalError("optimize_all: " + std::to_string(failed) + " of " + std::to_string(n) +
                         " images failed: " + err.str());
  }

  ProxyBatch batch;
  batch.proxies.resize(n, encoder.dim());
  batch.initial_losses.resize(n);
  batch.final_losses.resize(n);
  for (Index i = 0; i < n; ++i) {
    auto& s = states[static_cast<std::size_t>(i)];
    batch.proxies.row(i) = s.w.transpose();
    batch.initial_losses[i] = s.initial_loss;
    batch.final_losses[i] = s.final_loss;
    batch.references.push_back(std::move(s.reference));
  }
  batch.mean_final_loss = batch.final_losses.mean();
  return batch;
}

}  // namespace proxyclust
