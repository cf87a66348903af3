#pragma once

#include <vector>

#include "proxyclust/objective.hpp"
#include "proxyclust/parallel.hpp"

namespace proxyclust {

// One image's learnable proxy w_i with its Adam moments.
struct ProxyState {
  Vector w;
  Vector m;
  Vector v;
  long step_count = 0;
  SelectedReference reference;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Adam with bias correction; beta1 = hyper.momentum. Throws NumericalError on a
// non-finite gradient.
ProxyState adam_step(ProxyState state, const Vector& grad, const HyperParams& hyper);

// w starts at ctx.anchor and takes hyper.iterations full-objective steps.
ProxyState optimize_proxy(Index image_index, const ObjectiveContext& ctx, const HyperParams& hyper);

struct ProxyBatch {
  RowMatrix proxies;  // n x d, row i is image i's proxy
  Vector initial_losses;
  Vector final_losses;
  std::vector<SelectedReference> references;
  double mean_final_loss = 0.0;
};

struct OptimizeOptions {
  Variant variant = Variant::full;
  int workers = 1;  // images are split across this many threads
};

// Selects references and optimizes every image independently. Per-image
// failures are collected and rethrown together as a NumericalError.
ProxyBatch optimize_all(const std::vector<UnitVector>& images, const ConceptSpec& spec, const HyperParams& hyper,
                        const TextEncoder& encoder, const TokenTable& table, const OptimizeOptions& options = {});

}  // namespace proxyclust
