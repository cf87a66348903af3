#include "doctest.h"
#include "fixtures.hpp"
#include "proxyclust/errors.hpp"
#include "proxyclust/optimizer.hpp"

using namespace proxyclust;

TEST_SUITE("optimizer") {
  TEST_CASE("adam step matches a scalar loop") {
    HyperParams h;
    h.learning_rate = 0.05;
    ProxyState s;
    s.w = Vector::Constant(3, 1.0);
    s.m = Vector::Zero(3);
    s.v = Vector::Zero(3);
    std::vector<double> w(3, 1.0), m(3, 0.0), v(3, 0.0);
    Rng rng(2);
    for (int t = 1; t <= 5; ++t) {
      Vector g(3);
      for (int j = 0; j < 3; ++j) g[j] = rng.normal();
      s = adam_step(s, g, h);
      for (int j = 0; j < 3; ++j) {
        m[j] = 0.9 * m[j] + 0.1 * g[j];
        v[j] = 0.999 * v[j] + 0.001 * g[j] * g[j];
        const double mh = m[j] / (1 - std::pow(0.9, t)), vh = v[j] / (1 - std::pow(0.999, t));
        w[j] -= 0.05 * mh / (std::sqrt(vh) + 1e-8);
      }
      for (int j = 0; j < 3; ++j) CHECK(s.w[j] == doctest::Approx(w[j]).epsilon(1e-14));
    }
    CHECK(s.step_count == 5);
  }

  TEST_CASE("first adam step has magnitude close to the learning rate") {
    HyperParams h;
    ProxyState s;
    s.w = Vector::Zero(2);
    s.m = Vector::Zero(2);
    s.v = Vector::Zero(2);
    Vector g(2);
    g << 3.0, -1e-3;
    s = adam_step(s, g, h);
    CHECK(s.w[0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(s.w[1] == doctest::Approx(0.01).epsilon(1e-4));
  }

  TEST_CASE("adam step rejects bad gradients") {
    ProxyState s;
    s.w = s.m = s.v = Vector::Zero(2);
    CHECK_THROWS_AS(adam_step(s, Vector::Zero(3), HyperParams{}), DimensionError);
    Vector g(2);
    g << 1.0, std::nan("");
    CHECK_THROWS_AS(adam_step(s, g, HyperParams{}), NumericalError);
  }

  TEST_CASE("optimization descends and zero iterations is the identity") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto c = fixture::random_case(seed, 8, 4);
      HyperParams h;
      h.iterations = 200;
      const auto batch = optimize_all(c.images, c.spec, h, *c.encoder, c.table);
      for (Index i = 0; i < 4; ++i) CHECK(batch.final_losses[i] <= batch.initial_losses[i]);
      CHECK(batch.mean_final_loss == doctest::Approx(batch.final_losses.mean()));
      h.iterations = 0;
      const auto frozen = optimize_all(c.images, c.spec, h, *c.encoder, c.table);
      for (Index i = 0; i < 4; ++i) {
        CHECK(frozen.proxies.row(i).transpose() == frozen.references[static_cast<std::size_t>(i)].token_embedding);
        CHECK(frozen.final_losses[i] == frozen.initial_losses[i]);
      }
    }
  }

  TEST_CASE("a heavy reference penalty pins the proxy") {
    auto c = fixture::random_case(9, 16, 3);
    HyperParams h;
    h.alpha = 1e3;
    const auto batch = optimize_all(c.images, c.spec, h, *c.encoder, c.table);
    for (Index i = 0; i < 3; ++i) {
      const Vector z = batch.references[static_cast<std::size_t>(i)].token_embedding;
      CHECK((batch.proxies.row(i).transpose() - z).norm() < 0.05);
    }
  }

  TEST_CASE("workers do not change results") {
    auto c = fixture::random_case(4, 8, 9);
    HyperParams h;
    h.iterations = 50;
    const auto serial = optimize_all(c.images, c.spec, h, *c.encoder, c.table, {Variant::full, 1});
    const auto threaded = optimize_all(c.images, c.spec, h, *c.encoder, c.table, {Variant::full, 4});
    CHECK(serial.proxies == threaded.proxies);
    CHECK(serial.final_losses == threaded.final_losses);
  }

  TEST_CASE("references are recorded per image") {
    auto c = fixture::random_case(2, 8, 5);
    HyperParams h;
    h.iterations = 1;
    const auto batch = optimize_all(c.images, c.spec, h, *c.encoder, c.table);
    REQUIRE(batch.references.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(batch.references[i].image_index == static_cast<Index>(i));
      CHECK(std::find(c.spec.candidates.begin(), c.spec.candidates.end(), batch.references[i].word) !=
            c.spec.candidates.end());
    }
    const auto plain = optimize_all(c.images, c.spec, h, *c.encoder, c.table, {Variant::proxy, 1});
    CHECK(plain.references[0].word.empty());
  }

  TEST_CASE("divergence names the image and iteration") {
    auto c = fixture::random_case(6, 4, 2);
    HyperParams h;
    h.learning_rate = 1e200;
    h.iterations = 3;
    try {
      optimize_all(c.images, c.spec, h, *c.encoder, c.table);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("[0]") != std::string::npos);
      CHECK(msg.find("[1]") != std::string::npos);
    }
  }

  TEST_CASE("input validation") {
    auto c = fixture::random_case(1, 4, 1);
    CHECK_THROWS_AS(optimize_all({}, c.spec, HyperParams{}, *c.encoder, c.table), ConfigError);
    HyperParams bad;
    bad.learning_rate = -1;
    CHECK_THROWS_AS(optimize_all(c.images, c.spec, bad, *c.encoder, c.table), ConfigError);
    auto spec = c.spec;
    spec.candidates.push_back("missing");
    CHECK_THROWS_AS(optimize_all(c.images, spec, HyperParams{}, *c.encoder, c.table), UnknownTokenError);
  }
}

TEST_SUITE("parallel") {
  TEST_CASE("parallel_for covers every index and rethrows by index") {
    std::vector<int> hits(100, 0);
    parallel_for(100, 4, [&](Index i) { hits[static_cast<std::size_t>(i)] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    try {
      parallel_for(10, 3, [](Index i) {
        if (i == 7 || i == 3) throw std::runtime_error("fail " + std::to_string(i));
      });
      FAIL("expected a rethrow");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "fail 3");
    }
    parallel_for(0, 4, [](Index) { FAIL("no work expected"); });
  }
}
