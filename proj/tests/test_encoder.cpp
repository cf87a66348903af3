#include <array>
#include <optional>

#include "doctest.h"
#include "oracles.hpp"
#include "proxyclust/builtin_encoder.hpp"
#include "proxyclust/errors.hpp"
#include "test_support.hpp"

using namespace proxyclust;

namespace {

Matrix fixture_tokens(Index d, Index len) {
  Matrix t(d, len);
  for (Index j = 0; j < d; ++j)
    for (Index s = 0; s < len; ++s) t(j, s) = 0.1 * static_cast<double>(j + 1) - 0.05 * static_cast<double>(s);
  return t;
}

TokenSequence sequence(const Matrix& tokens, std::optional<Index> slot = std::nullopt) {
  TokenSequence seq;
  seq.embeddings = tokens;
  seq.words.assign(static_cast<std::size_t>(tokens.cols()), "w");
  seq.slot_index = slot;
  return seq;
}

}  // namespace

TEST_SUITE("encoder") {
  // Frozen from tests/oracles/builtin_encoder_golden.py.
  TEST_CASE("golden weights and outputs at d=4, seed=0") {
    const auto enc = BuiltinEncoder::from_seed(4, 0);
    const auto& w = enc.weights();
    const double w1_row0[] = {-0.3402066230773926, 0.49214521050453186, -0.46043097972869873, 0.09749466180801392};
    const double b2[] = {-0.340457022190094, 0.17006534337997437, 0.26777130365371704, 0.3381829559803009};
    for (int j = 0; j < 4; ++j) {
      CHECK(w.w1(0, j) == w1_row0[j]);
      CHECK(w.b2[j] == b2[j]);
    }
    const std::vector<std::pair<Index, std::array<double, 4>>> golden = {
        {1, {-0.46953946716457234, -0.10003453978007884, 0.7319893035371354, -0.4834433153256095}},
        {3, {-0.5786776917810195, -0.0007649460424342223, 0.7443655093389402, -0.3332439532821621}},
        {6, {-0.6410869567954915, 0.07599916442282083, 0.7499618034307477, -0.14418368225506417}},
    };
    for (const auto& [len, expected] : golden) {
      const UnitVector out = enc.encode(sequence(fixture_tokens(4, len)));
      for (int j = 0; j < 4; ++j) CHECK(out[j] == doctest::Approx(expected[static_cast<std::size_t>(j)]).epsilon(1e-13));
    }
  }

  TEST_CASE("forward matches the loop oracle") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Index d = 2 + static_cast<Index>(seed % 7) * 3;
      const auto enc = BuiltinEncoder::from_seed(d, seed);
      Rng rng(seed + 100);
      const Index len = 1 + static_cast<Index>(rng.below(10));
      Matrix tokens(d, len);
      for (Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = rng.uniform(-1, 1);
      const auto got = enc.encode(sequence(tokens));
      const auto want = oracle::encode(enc.weights(), tokens);
      for (Index j = 0; j < d; ++j) CHECK(got[j] == doctest::Approx(want[static_cast<std::size_t>(j)]).epsilon(1e-12));
      CHECK(got.values().norm() == doctest::Approx(1.0).epsilon(1e-14));
    }
  }

  TEST_CASE("forward is templated on the scalar") {
    const auto wd = generate_builtin_weights<double>(6, 3);
    const auto wf = generate_builtin_weights<float>(6, 3);
    CHECK(wd.w1.cast<float>() == wf.w1);
    const Matrix tokens = fixture_tokens(6, 4);
    const auto ad = builtin_forward(wd, tokens);
    const auto af = builtin_forward(wf, MatrixX<float>(tokens.cast<float>()));
    CHECK((ad.output.cast<float>() - af.output).cwiseAbs().maxCoeff() < 1e-5f);
  }

  TEST_CASE("sinusoidal positions") {
    const Matrix p = sinusoidal_positions<double>(4, 3);
    CHECK(p(0, 0) == 0.0);
    CHECK(p(1, 0) == 1.0);
    CHECK(p(0, 1) == doctest::Approx(std::sin(1.0)));
    CHECK(p(2, 2) == doctest::Approx(std::sin(2.0 / 100.0)));
    CHECK(p(3, 2) == doctest::Approx(std::cos(2.0 / 100.0)));
  }

  TEST_CASE("analytic gradient matches central differences of the oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Index d = 8;
      const auto enc = BuiltinEncoder::from_seed(d, seed);
      Rng rng(seed + 7);
      Matrix tokens(d, 5);
      for (Index i = 0; i < tokens.size(); ++i) tokens.data()[i] = rng.uniform(-0.5, 0.5);
      const auto seq = sequence(tokens, 2);
      Vector image(d), proxy(d);
      for (Index j = 0; j < d; ++j) {
        image[j] = rng.uniform(-1, 1);
        proxy[j] = rng.uniform(-0.5, 0.5);
      }
      const UnitVector x = normalize(image);
      const Vector analytic = enc.similarity_gradient(seq, proxy, x);
      auto f = [&](const Vector& w) {
        Matrix t = tokens;
        t.col(2) = w;
        const auto h = oracle::encode(enc.weights(), t);
        double s = 0;
        for (Index j = 0; j < d; ++j) s += x[j] * h[static_cast<std::size_t>(j)];
        return -s;
      };
      const Vector numeric = oracle::central_difference(f, proxy, 1e-6);
      CHECK((analytic - numeric).norm() / std::max(numeric.norm(), 1e-12) < 1e-6);
      CHECK(similarity_loss(enc, seq, proxy, x) == doctest::Approx(f(proxy)).epsilon(1e-12));
    }
  }

  TEST_CASE("finite difference wrapper agrees with the analytic gradient") {
    auto inner = std::make_shared<BuiltinEncoder>(BuiltinEncoder::from_seed(6, 11));
    const FiniteDifferenceEncoder fd(inner, 1e-5);
    CHECK(fd.provides_gradient());
    CHECK(fd.describe().find("builtin") != std::string::npos);
    const auto seq = sequence(fixture_tokens(6, 3), 1);
    const Vector proxy = Vector::Constant(6, 0.2);
    const UnitVector x = normalize(Vector::LinSpaced(6, -1.0, 1.0));
    const Vector a = inner->similarity_gradient(seq, proxy, x);
    const Vector b = fd.similarity_gradient(seq, proxy, x);
    CHECK((a - b).norm() < 1e-8);
    CHECK((loss_grad_wrt_proxy(*inner, seq, proxy, x) - a).norm() == 0.0);
    CHECK_THROWS_AS(finite_diff_grad(*inner, seq, proxy, x, 0.0), ConfigError);
    CHECK_THROWS_AS(FiniteDifferenceEncoder(inner, -1.0), ConfigError);
    CHECK_THROWS_AS(FiniteDifferenceEncoder(nullptr), ConfigError);
  }

  TEST_CASE("sequence validation") {
    const auto enc = BuiltinEncoder::from_seed(4, 0, 5);
    CHECK(enc.max_length() == 5);
    CHECK_THROWS_AS(enc.encode(sequence(fixture_tokens(4, 6))), ConfigError);
    CHECK_THROWS_AS(enc.encode(sequence(fixture_tokens(3, 2))), DimensionError);
    CHECK_THROWS_AS(enc.encode(sequence(Matrix(4, 0))), ConfigError);
    CHECK_THROWS_AS(BuiltinEncoder::from_seed(0, 0), ConfigError);
  }

  TEST_CASE("a zero pre-normalization output is a numerical error") {
    auto w = generate_builtin_weights<double>(3, 0);
    w.w2.setZero();
    w.b2.setZero();
    const BuiltinEncoder enc(w);
    CHECK_THROWS_AS(enc.encode(sequence(fixture_tokens(3, 2))), NumericalError);
  }

  TEST_CASE("weights survive save and load") {
    test::TempDir dir;
    const auto enc = BuiltinEncoder::from_seed(5, 2);
    save_builtin_weights(enc.weights(), dir.path);
    const BuiltinEncoder back(load_builtin_weights(dir.path));
    const auto seq = sequence(fixture_tokens(5, 4));
    CHECK(enc.encode(seq).values() == back.encode(seq).values());
    std::filesystem::remove(dir / "b2.mmap");
    CHECK_THROWS_AS(load_builtin_weights(dir.path), IoError);
  }
}
