#include <set>

#include "doctest.h"
#include "proxyclust/errors.hpp"
#include "proxyclust/prompt.hpp"
#include "proxyclust/rng.hpp"
#include "proxyclust/token_table.hpp"
#include "proxyclust/unit_vector.hpp"

using namespace proxyclust;

TEST_SUITE("core") {
  TEST_CASE("normalize yields unit norm and rejects degenerate input") {
    Vector v(3);
    v << 3.0, 0.0, 4.0;
    const UnitVector u = normalize(v);
    CHECK(u.values().norm() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(u[0] == doctest::Approx(0.6));
    CHECK_THROWS_AS(normalize(Vector::Zero(3)), NormalizationError);
    Vector bad = v;
    bad[1] = std::nan("");
    CHECK_THROWS_AS(normalize(bad), NormalizationError);
  }

  TEST_CASE("normalize is templated on the scalar") {
    Eigen::Vector3f f(1.0f, 2.0f, 2.0f);
    const auto u = normalize(f);
    static_assert(std::is_same_v<std::decay_t<decltype(u)>, BasicUnitVector<float>>);
    CHECK(u[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
  }

  TEST_CASE("dot checks dimensions") {
    const UnitVector a = normalize(Vector::Ones(3));
    const UnitVector b = normalize(Vector::Ones(4));
    CHECK(dot(a, a) == doctest::Approx(1.0));
    CHECK_THROWS_AS(dot(a, b), DimensionError);
  }

  TEST_CASE("error exit codes") {
    CHECK(ConfigError("x").exit_code() == 2);
    CHECK(ParseError("x").exit_code() == 2);
    CHECK(UnknownTokenError("w").exit_code() == 2);
    CHECK(FormatError("x", 3).exit_code() == 2);
    CHECK(NumericalError("x").exit_code() == 3);
    CHECK(TheoremViolation("x").exit_code() == 3);
    CHECK(BackendUnavailableError("x").exit_code() == 4);
    CHECK(UnknownTokenError("kiwi").word() == "kiwi");
    CHECK(FormatError("x", 17).byte_offset() == 17);
  }

  TEST_CASE("rng is deterministic and in range") {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const double x = a.uniform();
      CHECK(x == b.uniform());
      differs = differs || x != c.uniform();
      CHECK(x >= 0.0);
      CHECK(x < 1.0);
    }
    CHECK(differs);
    Rng r(7);
    for (int i = 0; i < 1000; ++i) CHECK(r.below(5) < 5);
  }

  TEST_CASE("rng normal has roughly standard moments") {
    Rng r(1);
    double sum = 0, sq = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const double x = r.normal();
      sum += x;
      sq += x * x;
    }
    CHECK(std::abs(sum / n) < 0.03);
    CHECK(std::abs(sq / n - 1.0) < 0.05);
  }

  TEST_CASE("sample_without_replacement draws distinct indices") {
    Rng r(3);
    const auto s = r.sample_without_replacement(10, 10);
    CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 10);
    const auto t = r.sample_without_replacement(100, 5);
    CHECK(t.size() == 5);
    for (auto i : t) CHECK(i < 100);
  }

  TEST_CASE("derive_seed separates streams") {
    CHECK(derive_seed(0, 0) != derive_seed(0, 1));
    CHECK(derive_seed(0, 1) != derive_seed(1, 1));
    CHECK(derive_seed(5, 2) == derive_seed(5, 2));
  }

  TEST_CASE("tokenize lowercases and splits on whitespace") {
    const auto t = tokenize("  Fruit with\tthe COLOR  of\n");
    REQUIRE(t.size() == 5);
    CHECK(t[0] == "fruit");
    CHECK(t[3] == "color");
    CHECK(tokenize("   ").empty());
  }

  TEST_CASE("token table lookup and validation") {
    RowMatrix e(2, 3);
    e << 1, 2, 3, 4, 5, 6;
    const TokenTable t({"red", "green"}, e);
    CHECK(t.dim() == 3);
    CHECK(t.size() == 2);
    CHECK(t.contains("green"));
    CHECK_FALSE(t.contains("blue"));
    CHECK(t.index_of("green") == 1);
    CHECK(t.lookup("green")[2] == 6.0);
    CHECK(lookup_token(t, "red")[0] == 1.0);
    CHECK_THROWS_AS(t.lookup("blue"), UnknownTokenError);
    CHECK_THROWS_AS(TokenTable({"red", "red"}, e), ConfigError);
    CHECK_THROWS_AS(TokenTable({"red", ""}, e), ConfigError);
    CHECK_THROWS_AS(TokenTable({"red"}, e), DimensionError);
  }

  TEST_CASE("random token table is float-exact and bounded") {
    const auto t = TokenTable::random({"a", "b", "c"}, 16, 9);
    const double bound = 0.25;
    for (Index i = 0; i < t.size(); ++i)
      for (Index j = 0; j < t.dim(); ++j) {
        const double v = t.embeddings()(i, j);
        CHECK(std::abs(v) <= bound);
        CHECK(static_cast<double>(static_cast<float>(v)) == v);
      }
    CHECK(TokenTable::random({"a"}, 4, 9).embeddings() == TokenTable::random({"a"}, 4, 9).embeddings());
  }

  TEST_CASE("prompt template parse and render") {
    const auto p = PromptTemplate::parse("fruit with the color of {}");
    CHECK(p.before_slot.size() == 5);
    CHECK(p.after_slot.empty());
    CHECK(p.slot_index() == 5);
    CHECK(p.length() == 6);
    CHECK(p.text() == "fruit with the color of {}");
    CHECK(PromptTemplate::parse(p.text()) == p);
    const auto words = p.render_words("red");
    CHECK(words.size() == 6);
    CHECK(words[5] == "red");

    const auto mid = PromptTemplate::parse("a {} photo");
    CHECK(mid.slot_index() == 1);
    CHECK(mid.render_words("x") == std::vector<std::string>{"a", "x", "photo"});
  }

  TEST_CASE("prompt template rejects malformed text") {
    CHECK_THROWS_AS(PromptTemplate::parse("no slot here"), ParseError);
    CHECK_THROWS_AS(PromptTemplate::parse("{} and {}"), ParseError);
    CHECK_THROWS_AS(PromptTemplate::parse("glued{}"), ParseError);
    CHECK_THROWS_AS(PromptTemplate::parse(""), ParseError);
  }

  TEST_CASE("render_prompt looks tokens up in order") {
    const auto table = TokenTable::random({"fruit", "with", "the", "color", "of", "red"}, 4, 1);
    const auto p = PromptTemplate::parse("fruit with the color of {}");
    const auto seq = render_prompt(p, "red", table);
    CHECK(seq.length() == 6);
    CHECK(seq.dim() == 4);
    REQUIRE(seq.slot_index.has_value());
    CHECK(*seq.slot_index == 5);
    CHECK_FALSE(seq.slot_is_proxy);
    for (Index s = 0; s < 6; ++s) CHECK(seq.embeddings.col(s) == table.lookup(seq.words[static_cast<std::size_t>(s)]));
    CHECK_THROWS_AS(render_prompt(p, "blue", table), UnknownTokenError);

    Vector w = Vector::Constant(4, 0.5);
    const auto proxied = seq.with_proxy(w);
    CHECK(proxied.slot_is_proxy);
    CHECK(proxied.embeddings.col(5) == w);
    CHECK(proxied.embeddings.leftCols(5) == seq.embeddings.leftCols(5));
    CHECK_THROWS_AS(seq.with_proxy(Vector::Ones(3)), DimensionError);

    const auto direct = render_prompt_with_proxy(p, w, table);
    CHECK(direct.embeddings == proxied.embeddings);
    CHECK(direct.slot_is_proxy);
  }
}
