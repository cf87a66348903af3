#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "proxyclust/builtin_encoder.hpp"
#include "proxyclust/token_table.hpp"

namespace proxyclust {

// Empirical check of |h'(w) - H(w)| <= (L_h + L_H) |t - w| for h' and H that
// agree on a discrete token set T, and of the tighter nearest-token bound.

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<Vector(const Vector&)>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

inline constexpr double kLipschitzInflation = 1.1;

// Max slope over sampled pairs; a lower bound on the true constant. Sorting
// the samples makes adjacent pairs sufficient, and adding samples (same seed)
// never lowers the estimate.
double estimate_lipschitz(const ScalarFn& f, Interval domain, std::size_t samples, std::uint64_t seed);

// Same estimate for a vector-valued f restricted to the segment
// origin + s * direction, s in [-half_width, half_width].
double estimate_lipschitz_on_line(const VectorFn& f, const Vector& origin, const Vector& direction,
                                  double half_width, std::size_t samples, std::uint64_t seed);

struct ScalarFamily {
  std::string name;
  ScalarFn h_prime;
  ScalarFn H;
  std::vector<double> tokens;
  Interval domain;
  double lipschitz_h = 0.0;
  double lipschitz_H = 0.0;

  // h'(t) == H(t) on every token within 1e-9; throws ConfigError otherwise.
  void check_admissible() const;
  // Fills both constants with inflated estimates over the domain.
  void estimate_constants(std::size_t samples, std::uint64_t seed, double inflation = kLipschitzInflation);
};

struct GapBound {
  double gap = 0.0;
  double bound = 0.0;
};

// Throws ConfigError if t is not one of the family's tokens.
GapBound bound_gap(const ScalarFamily& family, double w, double t);

struct BoundSample {
  Vector w;
  double gap = 0.0;
  double arbitrary_bound = 0.0;
  double nearest_bound = 0.0;
  bool arbitrary_is_nearest = false;
};

struct BoundReport {
  std::string family;
  std::size_t trials = 0;
  double max_gap_ratio = 0.0;  // max gap / nearest_bound
  bool nearest_dominates = true;
  double mean_nearest_bound = 0.0;
  double mean_arbitrary_bound = 0.0;
  double lipschitz_h = 0.0;
  double lipschitz_H = 0.0;
  std::vector<BoundSample> samples;
};

// Samples w uniformly over the domain and a uniformly random token per trial.
// Throws TheoremViolation if either inequality fails.
BoundReport verify_theorem(const ScalarFamily& family, std::size_t trials, std::uint64_t seed);

// The canonical example: h'(w) = w, H(w) = w + sin(pi w) on T = integers in
// [-radius, radius], with exact constants 1 and 1 + pi.
ScalarFamily sine_family(int radius = 5);
// Random admissible families: h' and H interpolate shared knot values on the
// integers 0..knots, H through extra random midpoints. Constants are
// estimated from kFamilyLipschitzSamples points and inflated.
inline constexpr std::size_t kFamilyLipschitzSamples = 20000;
ScalarFamily piecewise_linear_family(std::uint64_t seed, int knots = 8);
// h'(w) = a sin(c w) + b w, H = h' + e sin(pi w) cos(g w), T = integers.
ScalarFamily smooth_family(std::uint64_t seed, int radius = 4);

struct EncoderFamilyOptions {
  double perturbation_scale = 0.1;
  std::size_t trials = 1000;
  std::size_t lipschitz_lines = 16;
  std::size_t lipschitz_samples = 400;
  double inflation = kLipschitzInflation;
  std::uint64_t seed = 0;
};

// Vector analog with h'(w) = h(prompt with w) and
// H(w) = h'(w) + scale * dist(w, T) * g(prompt with w), where g is a second
// encoder and T the table's token embeddings; H agrees with h' on T.
BoundReport encoder_family_check(const BuiltinEncoder& h_prime, const BuiltinEncoder& perturbation,
                                 const TokenTable& tokens, const PromptTemplate& prompt,
                                 const EncoderFamilyOptions& options);

std::string format_bound_report(const BoundReport& report, bool include_samples = false);

}  // namespace proxyclust
