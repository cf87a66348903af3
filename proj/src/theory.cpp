#include "proxyclust/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/rng.hpp"

namespace proxyclust {

namespace {

constexpr double kBoundSlack = 1e-12;

double nearest_token(const std::vector<double>& tokens, double w) {
  double best = tokens.front();
  for (double t : tokens)
    if (std::abs(t - w) < std::abs(best - w)) best = t;
  return best;
}

void finish_report(BoundReport& r) {
  if (r.trials == 0) return;
  double sn = 0.0, sa = 0.0;
  for (const auto& s : r.samples) {
    sn += s.nearest_bound;
    sa += s.arbitrary_bound;
  }
  r.mean_nearest_bound = sn / static_cast<double>(r.trials);
  r.mean_arbitrary_bound = sa / static_cast<double>(r.trials);
}

void record(BoundReport& r, BoundSample s) {
  if (s.gap > s.nearest_bound + kBoundSlack) {
    throw TheoremViolation(r.family + ": gap " + std::to_string(s.gap) + " exceeds nearest-token bound " +
                           std::to_string(s.nearest_bound));
  }
  if (s.nearest_bound > s.arbitrary_bound) {
    r.nearest_dominates = false;
    throw TheoremViolation(r.family + ": nearest-token bound " + std::to_string(s.nearest_bound) +
                           " exceeds arbitrary-token bound " + std::to_string(s.arbitrary_bound));
  }
  const double ratio = s.nearest_bound > 0.0 ? s.gap / s.nearest_bound : 0.0;
  r.max_gap_ratio = std::max(r.max_gap_ratio, ratio);
  r.samples.push_back(std::move(s));
  ++r.trials;
}

}  // namespace

double estimate_lipschitz(const ScalarFn& f, Interval domain, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("estimate_lipschitz needs at least two samples");
  if (!(domain.hi > domain.lo) || !std::isfinite(domain.lo) || !std::isfinite(domain.hi)) {
    throw ConfigError("estimate_lipschitz: degenerate domain");
  }
  Rng rng(seed);
  std::vector<std::pair<double, double>> pts(samples);
  for (auto& p : pts) {
    p.first = rng.uniform(domain.lo, domain.hi);
    p.second = f(p.first);
  }
  std::sort(pts.begin(), pts.end());
  double best = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double dx = pts[i].first - pts[i - 1].first;
    if (dx > 0.0) best = std::max(best, std::abs(pts[i].second - pts[i - 1].second) / dx);
  }
  return best;
}

double estimate_lipschitz_on_line(const VectorFn& f, const Vector& origin, const Vector& direction,
                                  double half_width, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ConfigError("estimate_lipschitz needs at least two samples");
  if (!(half_width > 0.0)) throw ConfigError("estimate_lipschitz: degenerate domain");
  const double len = direction.norm();
  if (!(len > 0.0)) throw ConfigError("estimate_lipschitz: zero direction");
  const Vector unit = direction / len;
  Rng rng(seed);
  std::vector<double> s(samples);
  for (auto& x : s) x = rng.uniform(-half_width, half_width);
  std::sort(s.begin(), s.end());
  double best = 0.0;
  Vector prev = f(origin + s[0] * unit);
  for (std::size_t i = 1; i < s.size(); ++i) {
    Vector cur = f(origin + s[i] * unit);
    const double dx = s[i] - s[i - 1];
    if (dx > 0.0) best = std::max(best, (cur - prev).norm() / dx);
    prev = std::move(cur);
  }
  return best;
}

void ScalarFamily::check_admissible() const {
  if (tokens.empty()) throw ConfigError(name + ": empty token set");
  for (double t : tokens) {
    if (std::abs(h_prime(t) - H(t)) > 1e-9) {
      throw ConfigError(name + ": h' and H disagree at token " + std::to_string(t));
    }
  }
}

void ScalarFamily::estimate_constants(std::size_t samples, std::uint64_t seed, double inflation) {
  lipschitz_h = inflation * estimate_lipschitz(h_prime, domain, samples, seed);
  lipschitz_H = inflation * estimate_lipschitz(H, domain, samples, derive_seed(seed, 1));
}

GapBound bound_gap(const ScalarFamily& family, double w, double t) {
  if (std::find(family.tokens.begin(), family.tokens.end(), t) == family.tokens.end()) {
    throw ConfigError(family.name + ": " + std::to_string(t) + " is not a token");
  }
  return {std::abs(family.h_prime(w) - family.H(w)), (family.lipschitz_h + family.lipschitz_H) * std::abs(t - w)};
}

BoundReport verify_theorem(const ScalarFamily& family, std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw ConfigError("verify_theorem needs at least one trial");
  family.check_admissible();
  BoundReport report;
  report.family = family.name;
  report.lipschitz_h = family.lipschitz_h;
  report.lipschitz_H = family.lipschitz_H;
  report.samples.reserve(trials);
  Rng rng(seed);
  for (std::size_t i = 0; i < trials; ++i) {
    const double w = family.domain.hi > family.domain.lo ? rng.uniform(family.domain.lo, family.domain.hi)
                                                         : family.domain.lo;
    const double t_any = family.tokens[static_cast<std::size_t>(rng.below(family.tokens.size()))];
    const double t_near = nearest_token(family.tokens, w);
    const GapBound any = bound_gap(family, w, t_any);
    const GapBound near = bound_gap(family, w, t_near);
    BoundSample s;
    s.w = Vector::Constant(1, w);
    s.gap = near.gap;
    s.arbitrary_bound = any.bound;
    s.nearest_bound = near.bound;
    s.arbitrary_is_nearest = std::abs(t_any - w) == std::abs(t_near - w);
    record(report, std::move(s));
  }
  finish_report(report);
  return report;
}

ScalarFamily sine_family(int radius) {
  ScalarFamily f;
  f.name = "sine(h'=w, H=w+sin(pi w))";
  f.h_prime = [](double w) { return w; };
  f.H = [](double w) { return w + std::sin(std::numbers::pi * w); };
  for (int t = -radius; t <= radius; ++t) f.tokens.push_back(t);
  f.domain = {static_cast<double>(-radius), static_cast<double>(radius)};
  f.lipschitz_h = 1.0;
  f.lipschitz_H = 1.0 + std::numbers::pi;
  return f;
}

namespace {

// Linear interpolation through (xs[i], ys[i]); xs sorted, clamped outside.
ScalarFn interpolant(std::vector<double> xs, std::vector<double> ys) {
  return [xs = std::move(xs), ys = std::move(ys)](double w) {
    if (w <= xs.front()) return ys.front();
    if (w >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), w);
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());
    const double u = (w - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return ys[j - 1] + u * (ys[j] - ys[j - 1]);
  };
}

}  // namespace

ScalarFamily piecewise_linear_family(std::uint64_t seed, int knots) {
  if (knots < 1) throw ConfigError("piecewise linear family needs at least one knot interval");
  Rng rng(seed);
  std::vector<double> xs, ys, xs_fine, ys_fine;
  for (int t = 0; t <= knots; ++t) {
    xs.push_back(t);
    ys.push_back(rng.uniform(-2.0, 2.0));
  }
  for (int t = 0; t <= knots; ++t) {
    xs_fine.push_back(t);
    ys_fine.push_back(ys[static_cast<std::size_t>(t)]);
    if (t < knots) {
      xs_fine.push_back(t + rng.uniform(0.2, 0.8));
      ys_fine.push_back(rng.uniform(-3.0, 3.0));
    }
  }
  ScalarFamily f;
  f.name = "piecewise-linear(seed=" + std::to_string(seed) + ")";
  f.tokens = xs;
  f.h_prime = interpolant(xs, ys);
  f.H = interpolant(xs_fine, ys_fine);
  f.domain = {0.0, static_cast<double>(knots)};
  f.estimate_constants(kFamilyLipschitzSamples, derive_seed(seed, 1));
  return f;
}

ScalarFamily smooth_family(std::uint64_t seed, int radius) {
  Rng rng(seed);
  const double a = rng.uniform(0.5, 2.0), b = rng.uniform(-1.0, 1.0), c = rng.uniform(0.5, 3.0);
  const double e = rng.uniform(0.2, 1.5), g = rng.uniform(0.0, 2.0);
  ScalarFamily f;
  f.name = "smooth(seed=" + std::to_string(seed) + ")";
  f.h_prime = [=](double w) { return a * std::sin(c * w) + b * w; };
  f.H = [=](double w) { return a * std::sin(c * w) + b * w + e * std::sin(std::numbers::pi * w) * std::cos(g * w); };
  for (int t = -radius; t <= radius; ++t) f.tokens.push_back(t);
  f.domain = {static_cast<double>(-radius), static_cast<double>(radius)};
  f.estimate_constants(kFamilyLipschitzSamples, derive_seed(seed, 1));
  return f;
}

BoundReport encoder_family_check(const BuiltinEncoder& h_prime, const BuiltinEncoder& perturbation,
                                 const TokenTable& tokens, const PromptTemplate& prompt,
                                 const EncoderFamilyOptions& options) {
  if (options.trials < 1) throw ConfigError("encoder_family_check needs at least one trial");
  if (tokens.size() < 1) throw ConfigError("encoder_family_check needs a non-empty token table");
  if (h_prime.dim() != tokens.dim() || perturbation.dim() != tokens.dim()) {
    throw DimensionError("encoder_family_check: encoder and token dimensions differ");
  }
  const RowMatrix& T = tokens.embeddings();
  const Index d = tokens.dim();

  auto nearest = [&](const Vector& w, Index* which) {
    Index arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < T.rows(); ++r) {
      const double dist = (T.row(r).transpose() - w).norm();
      if (dist < best) {
        best = dist;
        arg = r;
      }
    }
    if (which) *which = arg;
    return best;
  };
  const VectorFn f_h = [&](const Vector& w) {
    return Vector(h_prime.encode(render_prompt_with_proxy(prompt, w, tokens)).values());
  };
  const double scale = options.perturbation_scale;
  const VectorFn f_H = [&](const Vector& w) {
    const auto seq = render_prompt_with_proxy(prompt, w, tokens);
    Vector out = h_prime.encode(seq).values();
    if (scale != 0.0) out += scale * nearest(w, nullptr) * perturbation.encode(seq).values();
    return out;
  };

  // Domain: Gaussian offsets around randomly chosen tokens.
  const double spread = 1.0 / std::sqrt(static_cast<double>(d));
  Rng rng(options.seed);
  auto draw_point = [&] {
    Vector w = T.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(T.rows())))).transpose();
    for (Index j = 0; j < d; ++j) w[j] += spread * rng.normal();
    return w;
  };

  double lh = 0.0, lH = 0.0;
  for (std::size_t l = 0; l < options.lipschitz_lines; ++l) {
    const Vector origin = draw_point();
    Vector dir(d);
    for (Index j = 0; j < d; ++j) dir[j] = rng.normal();
    const std::uint64_t s = derive_seed(options.seed, l);
    lh = std::max(lh, estimate_lipschitz_on_line(f_h, origin, dir, 3.0 * spread, options.lipschitz_samples, s));
    lH = std::max(lH, estimate_lipschitz_on_line(f_H, origin, dir, 3.0 * spread, options.lipschitz_samples, s));
  }
  lh *= options.inflation;
  lH *= options.inflation;

  BoundReport report;
  report.family = "encoder(" + h_prime.describe() + " + " + std::to_string(scale) + " * dist * " +
                  perturbation.describe() + ")";
  report.lipschitz_h = lh;
  report.lipschitz_H = lH;
  for (std::size_t i = 0; i < options.trials; ++i) {
    const Vector w = draw_point();
    const Index any = static_cast<Index>(rng.below(static_cast<std::uint64_t>(T.rows())));
    Index near_idx = 0;
    const double near_dist = nearest(w, &near_idx);
    const double any_dist = (T.row(any).transpose() - w).norm();
    BoundSample s;
    s.gap = (f_h(w) - f_H(w)).norm();
    s.nearest_bound = (lh + lH) * near_dist;
    s.arbitrary_bound = (lh + lH) * any_dist;
    s.arbitrary_is_nearest = any_dist <= near_dist;
    s.w = w;
    record(report, std::move(s));
  }
  finish_report(report);
  return report;
}

std::string format_bound_report(const BoundReport& report, bool include_samples) {
  nlohmann::json j;
  j["family"] = report.family;
  j["trials"] = report.trials;
  j["max_gap_ratio"] = report.max_gap_ratio;
  j["nearest_dominates"] = report.nearest_dominates;
  j["mean_nearest_bound"] = report.mean_nearest_bound;
  j["mean_arbitrary_bound"] = report.mean_arbitrary_bound;
  j["lipschitz_h"] = report.lipschitz_h;
  j["lipschitz_H"] = report.lipschitz_H;
  if (include_samples) {
    auto& arr = j["samples"];
    arr = nlohmann::json::array();
    for (const auto& s : report.samples) {
      arr.push_back({{"w", std::vector<double>(s.w.data(), s.w.data() + s.w.size())},
                     {"gap", s.gap},
                     {"arbitrary_bound", s.arbitrary_bound},
                     {"nearest_bound", s.nearest_bound}});
    }
  }
  return j.dump(2);
}

}  // namespace proxyclust
