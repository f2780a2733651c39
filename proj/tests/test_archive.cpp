#include "mvtl/archive.hpp"
#include "mvtl/csv.hpp"

#include "oracles.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

using namespace mvtl;

namespace {

ModelArchive trained(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto make = [&](Eigen::Index n, double shift) {
        std::vector<std::size_t> y(static_cast<std::size_t>(n));
        std::vector<Matrix> v{oracle::random_matrix(rng, n, 3), oracle::random_matrix(rng, n, 4)};
        for (Eigen::Index i = 0; i < n; ++i) {
            y[static_cast<std::size_t>(i)] = i % 2;
            for (auto& m : v) m.row(i).array() += shift + (i % 2 ? 1.0 : -1.0);
        }
        return make_multiview(v, one_hot_encode(y, 2), DomainTag::source);
    };
    const auto src = make(50, 0.0), tgt = make(16, 0.5);
    ModelArchive a{fit(src, tgt, TrainConfig{}).model, fit_normalizer(tgt)};
    return a;
}

}  // namespace

TEST_SUITE("archive") {

TEST_CASE("sha256 known answers") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("round trip is prediction-identical on 100 probes") {
    TempDir dir;
    const ModelArchive a = trained(1);
    save_model(a, dir / "m.txt");
    const ModelArchive b = load_model(dir / "m.txt");
    CHECK(b.model.weights == a.model.weights);
    CHECK(b.model.config.lambda_t == a.model.config.lambda_t);
    std::mt19937_64 rng(2);
    const auto probes = make_multiview({oracle::random_matrix(rng, 100, 3, 2.0), oracle::random_matrix(rng, 100, 4, 2.0)},
                                       std::nullopt, DomainTag::target);
    CHECK(decision_values(a.model, probes) == decision_values(b.model, probes));
    CHECK(predict_labels(a.model, probes) == predict_labels(b.model, probes));
    for (std::size_t v = 0; v < 2; ++v) {
        CHECK(b.normalizer.mean[v] == a.normalizer.mean[v]);
        CHECK(b.normalizer.scale[v] == a.normalizer.scale[v]);
    }
    CHECK(serialize_model(b) == serialize_model(a));
}

TEST_CASE("corrupted archives are rejected") {
    const std::string text = serialize_model(trained(3));
    SUBCASE("truncated") {
        try {
            parse_model(text.substr(0, text.size() / 2));
            FAIL("expected an error");
        } catch (const ArchiveError& e) {
            CHECK(e.kind() == ArchiveError::Kind::checksum);
        }
    }
    SUBCASE("tampered") {
        std::string t = text;
        t[t.find("weights=") + 9] = t[t.find("weights=") + 9] == '1' ? '2' : '1';
        try {
            parse_model(t);
            FAIL("expected an error");
        } catch (const ArchiveError& e) {
            CHECK(e.kind() == ArchiveError::Kind::checksum);
        }
    }
    SUBCASE("newer version") {
        std::string t = text;
        t.replace(t.find("version=1"), 9, "version=2");
        try {
            parse_model(t);
            FAIL("expected an error");
        } catch (const ArchiveError& e) {
            CHECK(e.kind() == ArchiveError::Kind::version);
            CHECK(std::string(e.what()).find("version 2") != std::string::npos);
        }
    }
    SUBCASE("not an archive") {
        CHECK_THROWS_AS(parse_model("hello\n"), ArchiveError);
    }
}

}
