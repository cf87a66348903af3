#include "doctest.h"
#include "fixtures.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/objective.hpp"
#include "proxyclust/reference_selection.hpp"

using namespace proxyclust;

namespace {

const Variant kVariants[] = {Variant::proxy, Variant::concept_level, Variant::reference, Variant::concept_reference,
                             Variant::full};

}  // namespace

TEST_SUITE("objective") {
  TEST_CASE("variant names round trip") {
    for (auto v : kVariants) CHECK(parse_variant(to_string(v)) == v);
    CHECK(parse_variant("concept") == Variant::concept_level);
    CHECK_THROWS_AS(parse_variant("bogus"), ConfigError);
    CHECK_FALSE(uses_reference(Variant::proxy));
    CHECK_FALSE(uses_reference(Variant::concept_level));
    CHECK(uses_reference(Variant::full));
  }

  TEST_CASE("hyperparameter validation") {
    HyperParams h;
    h.validate();
    CHECK(h.alpha == 0.4);
    CHECK(h.beta == 0.3);
    CHECK(h.learning_rate == 0.01);
    CHECK(h.weight_decay == 0.0);
    CHECK(h.momentum == 0.9);
    CHECK(h.lambda == 1.0);
    auto bad = [](auto mutate) {
      HyperParams x;
      mutate(x);
      CHECK_THROWS_AS(x.validate(), ConfigError);
    };
    bad([](HyperParams& x) { x.alpha = -1; });
    bad([](HyperParams& x) { x.beta = std::nan(""); });
    bad([](HyperParams& x) { x.learning_rate = 0; });
    bad([](HyperParams& x) { x.momentum = 1.0; });
    bad([](HyperParams& x) { x.weight_decay = -0.1; });
    bad([](HyperParams& x) { x.iterations = -1; });
  }

  TEST_CASE("contrastive regularizer against direct softmax") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
      const Index d = 4, J = 3;
      const Matrix U = Matrix::NullaryExpr(d, J, [&] { return rng.normal(); });
      const Vector w = fixture::random_point(rng, d, 1.0);
      const Index t = static_cast<Index>(rng.below(J));
      const Vector logits = U.transpose() * w;
      const double want = -std::log(std::exp(logits[t]) / logits.array().exp().sum());
      CHECK(contrastive_regularizer(w, U, t) == doctest::Approx(want).epsilon(1e-12));
      auto f = [&](const Vector& v) { return contrastive_regularizer(v, U, t); };
      const Vector num = oracle::central_difference(f, w, 1e-6);
      CHECK((contrastive_regularizer_grad(w, U, t) - num).norm() < 1e-7);
    }
    const Matrix U = Matrix::Identity(2, 2) * 1e4;
    Vector w(2);
    w << 1.0, 0.0;
    CHECK(std::isfinite(contrastive_regularizer(w, U, 1)));
    CHECK(contrastive_regularizer(w, U, 1) == doctest::Approx(1e4));
    CHECK_THROWS_AS(contrastive_regularizer(w, U, 2), ConfigError);
    CHECK_THROWS_AS(contrastive_regularizer(Vector(Vector::Ones(3)), U, 0), DimensionError);
  }

  TEST_CASE("every variant matches the oracle objective") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto c = fixture::random_case(seed, 8);
      const auto ref = select_reference(0, c.images[0], c.spec, *c.encoder, c.table);
      HyperParams h;
      h.weight_decay = 0.01;
      Rng rng(seed);
      for (auto v : kVariants) {
        const auto ctx = make_objective_context(c.images[0], c.spec, &ref, h, v, *c.encoder, c.table);
        const auto o = fixture::oracle_objective(c, c.images[0], ref.word, h, v);
        const Vector w = fixture::random_point(rng, 8, 0.3);
        CHECK(objective(w, ctx) == doctest::Approx(o(w)).epsilon(1e-12));
        const Vector num = oracle::central_difference(o, w, 1e-6);
        CHECK((objective_grad(w, ctx) - num).norm() / num.norm() < 1e-6);
      }
    }
  }

  TEST_CASE("initial anchors per variant") {
    auto c = fixture::random_case(3, 6);
    const auto ref = select_reference(0, c.images[0], c.spec, *c.encoder, c.table);
    const HyperParams h;
    const Vector u = c.table.lookup("color");
    CHECK(make_objective_context(c.images[0], c.spec, &ref, h, Variant::proxy, *c.encoder, c.table).anchor == u);
    CHECK(make_objective_context(c.images[0], c.spec, &ref, h, Variant::concept_level, *c.encoder, c.table).anchor == u);
    CHECK(make_objective_context(c.images[0], c.spec, &ref, h, Variant::full, *c.encoder, c.table).anchor ==
          ref.token_embedding);
    CHECK_THROWS_AS(make_objective_context(c.images[0], c.spec, nullptr, h, Variant::full, *c.encoder, c.table),
                    ConfigError);
    CHECK_NOTHROW(make_objective_context(c.images[0], c.spec, nullptr, h, Variant::proxy, *c.encoder, c.table));
  }

  TEST_CASE("full variant without contrastive concepts drops the term") {
    auto c = fixture::random_case(4, 6);
    c.spec.contrastive_concepts.clear();
    const auto ref = select_reference(0, c.images[0], c.spec, *c.encoder, c.table);
    const auto ctx = make_objective_context(c.images[0], c.spec, &ref, HyperParams{}, Variant::full, *c.encoder, c.table);
    CHECK(ctx.contrastive_weight == 0.0);
    CHECK(objective_terms(ref.token_embedding, ctx).contrastive == 0.0);
  }

  TEST_CASE("terms decompose the total") {
    auto c = fixture::random_case(8, 6);
    const auto ref = select_reference(0, c.images[0], c.spec, *c.encoder, c.table);
    HyperParams h;
    h.weight_decay = 0.1;
    const auto ctx = make_objective_context(c.images[0], c.spec, &ref, h, Variant::full, *c.encoder, c.table);
    const Vector w = Vector::Constant(6, 0.1);
    const auto t = objective_terms(w, ctx);
    CHECK(t.similarity >= -1.0);
    CHECK(t.similarity <= 1.0);
    CHECK(t.reference == doctest::Approx(0.4 * (w - ref.token_embedding).squaredNorm()));
    CHECK(t.weight_decay == doctest::Approx(0.1 * w.squaredNorm()));
    CHECK(t.total() == objective(w, ctx));
  }

  TEST_CASE("context validation") {
    auto c = fixture::random_case(1, 6);
    const auto ref = select_reference(0, c.images[0], c.spec, *c.encoder, c.table);
    auto ctx = make_objective_context(c.images[0], c.spec, &ref, HyperParams{}, Variant::full, *c.encoder, c.table);
    auto broken = ctx;
    broken.encoder = nullptr;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
    broken = ctx;
    broken.anchor = Vector::Zero(3);
    CHECK_THROWS_AS(broken.validate(), DimensionError);
    broken = ctx;
    broken.target_index = 7;
    CHECK_THROWS_AS(broken.validate(), ConfigError);
  }
}
