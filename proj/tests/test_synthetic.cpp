#include "doctest.h"
#include "proxyclust/errors.hpp"
#include "proxyclust/matrix_io.hpp"
#include "proxyclust/metrics.hpp"
#include "proxyclust/pipeline.hpp"
#include "proxyclust/reference_selection.hpp"
#include "proxyclust/synthetic.hpp"
#include "test_support.hpp"

using namespace proxyclust;

TEST_SUITE("synthetic") {
  TEST_CASE("shape, balance and determinism") {
    const auto spec = SyntheticSpec::fruit(3, 0.05, 60, 16);
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    CHECK(a.images == b.images);
    CHECK(a.images.rows() == 60);
    CHECK(a.images.cols() == 16);
    for (Index i = 0; i < 60; ++i) CHECK(a.images.row(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    REQUIRE(a.truths.size() == 2);
    CHECK(a.truths[0].k() == 3);
    CHECK(a.truths[1].k() == 4);
    CHECK(nmi(a.truths[0], a.truths[1]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(a.concepts[0].concept_word == "color");
    CHECK(a.concepts[1].candidates == std::vector<std::string>{"apple", "banana", "grape", "cherry"});
    CHECK(generate_synthetic(SyntheticSpec::fruit(4, 0.05, 60, 16)).images != a.images);
  }

  TEST_CASE("noise-free images select their own value for every aspect") {
    const auto data = generate_synthetic(SyntheticSpec::fruit(0, 0.0, 36, 16));
    const BuiltinEncoder enc(data.weights);
    for (std::size_t a = 0; a < 2; ++a) {
      const CandidatePrompts prompts(data.concepts[a], enc, data.table);
      for (Index i = 0; i < 36; ++i) {
        const auto ref = select_reference(i, normalize(data.images.row(i).transpose()), prompts, data.table);
        CHECK(ref.candidate_index == data.truths[a][i]);
      }
    }
  }

  TEST_CASE("validation") {
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec::fruit(0, 0.05, 50, 16)), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec::fruit(0, 0.05, 60, 5)), ConfigError);
    CHECK_THROWS_AS(generate_synthetic(SyntheticSpec::fruit(0, -1.0, 60, 16)), ConfigError);
    auto s = SyntheticSpec::fruit();
    s.aspects[0].values = {"red"};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = SyntheticSpec::fruit();
    s.aspects[1].name = "color";
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("written dataset loads back") {
    test::TempDir dir;
    const auto data = generate_synthetic(SyntheticSpec::fruit(1, 0.05, 24, 12));
    const auto manifest_path = write_synthetic(data, dir.path);
    const auto manifest = DatasetManifest::load(manifest_path);
    const auto loaded = load_dataset(manifest);
    CHECK(loaded.images.size() == 24);
    CHECK(loaded.table.vocabulary() == data.table.vocabulary());
    for (Index i = 0; i < 24; ++i)
      CHECK((loaded.images[static_cast<std::size_t>(i)].values() - data.images.row(i).transpose()).norm() < 1e-6);
    const auto truth = load_ground_truth(manifest, 24);
    CHECK(truth.names == std::vector<std::string>{"color", "species"});
    CHECK(truth.labelings[1] == data.truths[1]);
    const auto enc = make_encoder("builtin", manifest);
    CHECK(enc->dim() == 12);
    const auto spec = load_concept_spec(dir / "concept_color.json", &loaded.table);
    CHECK(spec == data.concepts[0]);
    CHECK(std::filesystem::exists(dir / "config.json"));
  }
}
