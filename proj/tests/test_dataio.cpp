#include "mvtl/csv.hpp"
#include "mvtl/dataio.hpp"
#include "mvtl/kvconfig.hpp"
#include "mvtl/synth.hpp"
#include "mvtl/transfer.hpp"

#include "temp_dir.hpp"

#include <doctest.h>

#include <limits>

using namespace mvtl;

namespace {

void write(const std::string& path, const std::string& text) { csv::write_file(path, text); }

}  // namespace

TEST_SUITE("dataio") {

TEST_CASE("number formatting round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 123456789.123456789}) {
        CHECK(csv::parse_number(csv::format_number(v), "", 0) == v);
    }
    CHECK_THROWS_AS(csv::parse_number("nan", "f", 1), ParseError);
    CHECK_THROWS_AS(csv::parse_number("inf", "f", 1), ParseError);
    CHECK_THROWS_AS(csv::parse_number("1.5x", "f", 1), ParseError);
    CHECK_THROWS_AS(csv::parse_number("", "f", 1), ParseError);
}

TEST_CASE("numeric reader") {
    TempDir dir;
    write(dir / "a.csv", "# comment\nx,y\n1,2\n\n3,4\n");
    const auto t = csv::read_numeric(dir / "a.csv");
    CHECK(t.header == std::vector<std::string>{"x", "y"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[1][1] == 4.0);
    CHECK(t.lines[1] == 5);

    write(dir / "b.csv", "x,y\n1,2\n3\n");
    try {
        csv::read_numeric(dir / "b.csv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(std::string(e.what()).find("b.csv:3") != std::string::npos);
    }
    write(dir / "c.csv", "x\nNaN\n");
    CHECK_THROWS_AS(csv::read_numeric(dir / "c.csv"), ParseError);
    CHECK_THROWS_AS(csv::read_numeric(dir / "missing.csv"), ParseError);
}

TEST_CASE("key-value files") {
    auto kv = KeyValues::parse("# note\nfs = 256\nname=abc\nflag=true\nlist=1, 2,3\n", "x");
    CHECK(kv.get_double("fs") == 256.0);
    CHECK(kv.get("name") == "abc");
    CHECK(kv.get_bool("flag", false));
    CHECK(kv.get_doubles("list", {}) == std::vector<double>{1, 2, 3});
    CHECK(kv.get_size("missing", 7) == 7);
    CHECK_THROWS_AS(kv.get("missing"), ParseError);
    CHECK_THROWS_AS(KeyValues::parse("novalue\n", "x"), ParseError);
    CHECK_THROWS_AS(kv.get_size("fs", 0) + kv.get_size("name", 0), ParseError);
}

TEST_CASE("raw record loading") {
    TempDir dir;
    const auto p = dataio::record_paths(dir.str(), "rec");
    write(p.signal, "t,ch1,ch2\n0,1,4\n0.5,2,5\n1.0,3,6\n");
    write(p.metadata, "fs=2\n");
    write(p.annotation, "start_s,end_s\n");
    auto r = dataio::load_raw(p.signal, p.annotation);
    CHECK(r.samples.rows() == 2);
    CHECK(r.samples.cols() == 3);
    CHECK(r.samples(1, 2) == 6.0);
    CHECK(r.seizure_intervals.empty());

    write(p.annotation, "start_s,end_s\n0.5,1.5\n");
    CHECK_NOTHROW(dataio::load_raw(p.signal, p.annotation));
    write(p.annotation, "start_s,end_s\n0.5,2.0\n");
    CHECK_THROWS_AS(dataio::load_raw(p.signal, p.annotation), ParseError);
    write(p.annotation, "start_s,end_s\n0.0,1.0\n0.5,1.2\n");
    CHECK_THROWS_AS(dataio::load_raw(p.signal, p.annotation), ParseError);

    write(p.annotation, "start_s,end_s\n");
    write(p.signal, "t,ch1\n0,1\n0.5,inf\n");
    CHECK_THROWS_AS(dataio::load_raw(p.signal, p.annotation), ParseError);
    write(p.signal, "t,ch1\n0,1\n0.7,2\n");
    CHECK_THROWS_AS(dataio::load_raw(p.signal, p.annotation), ParseError);
}

TEST_CASE("raw record round trip and discovery") {
    TempDir dir;
    const auto d = synth_domains(SynthSpec{}, 3);
    std::filesystem::create_directories(dir / "D1");
    for (const auto& r : d.source) dataio::save_raw(r, dataio::record_paths(dir / "D1", r.id));
    std::filesystem::create_directories(dir / "features");
    csv::write_file(dir / "features/D1_time.csv", "time_0,label\n0,0\n");
    CHECK(dataio::discover_datasets(dir.str()) == std::vector<std::string>{"D1"});
    const auto loaded = dataio::load_dataset(dir / "D1");
    REQUIRE(loaded.size() == d.source.size());
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].samples == d.source[i].samples);
        REQUIRE(loaded[i].seizure_intervals.size() == d.source[i].seizure_intervals.size());
        for (std::size_t k = 0; k < loaded[i].seizure_intervals.size(); ++k) {
            CHECK(loaded[i].seizure_intervals[k].start_s == d.source[i].seizure_intervals[k].start_s);
            CHECK(loaded[i].seizure_intervals[k].end_s == d.source[i].seizure_intervals[k].end_s);
        }
    }
}

TEST_CASE("synthetic domains") {
    SynthSpec spec;
    spec.records_per_domain = 2;
    spec.record_seconds = 60;
    const auto a = synth_domains(spec, 42), b = synth_domains(spec, 42);
    REQUIRE(a.source.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(a.source[i].samples == b.source[i].samples);
        CHECK(a.target[i].samples == b.target[i].samples);
        CHECK_NOTHROW(validate(a.source[i]));
        CHECK(a.source[i].seizure_intervals.size() == 2);
        for (const auto& iv : a.source[i].seizure_intervals) {
            CHECK(iv.start_s * spec.fs == std::round(iv.start_s * spec.fs));
            CHECK(iv.end_s * spec.fs == std::round(iv.end_s * spec.fs));
        }
    }
    const auto c = synth_domains(spec, 43);
    CHECK(c.source[0].samples != a.source[0].samples);
}

TEST_CASE("no shift means matched domain statistics") {
    SynthSpec spec;
    spec.shift_magnitude = 0.0;
    spec.records_per_domain = 4;
    const auto d = synth_domains(spec, 5);
    FeatureConfig fc;
    const auto src = extract_features(d.source, fc), tgt = extract_features(d.target, fc);
    const auto norm = fit_normalizer(src);
    const auto s = norm.apply(src), t = norm.apply(tgt);
    // Spectral bins follow the background tones drawn per record, so only the
    // time and wavelet views get an absolute bound.
    for (std::size_t v : {0, 2}) {
        const double gap = (s.views[v].data.colwise().mean() - t.views[v].data.colwise().mean()).cwiseAbs().maxCoeff();
        CHECK(gap < 0.5);
    }

    SynthSpec shifted;
    shifted.records_per_domain = 4;
    const auto e = synth_domains(shifted, 5);
    const auto s2 = norm.apply(extract_features(e.source, fc)), t2 = norm.apply(extract_features(e.target, fc));
    for (std::size_t v = 0; v < 3; ++v) {
        const double matched = (s.views[v].data.colwise().mean() - t.views[v].data.colwise().mean()).norm();
        const double moved = (s2.views[v].data.colwise().mean() - t2.views[v].data.colwise().mean()).norm();
        CHECK(moved > matched);
    }
}

TEST_CASE("feature files round trip") {
    TempDir dir;
    SynthSpec spec;
    spec.records_per_domain = 1;
    spec.record_seconds = 40;
    const auto d = synth_domains(spec, 9);
    const auto ds = extract_features(d.source, FeatureConfig{});
    dataio::write_features(dir.str(), "X", ds);
    for (std::size_t v = 0; v < 3; ++v) CHECK(std::filesystem::exists(dataio::feature_path(dir.str(), "X", v)));
    const auto back = dataio::read_features(dir.str(), "X");
    for (std::size_t v = 0; v < 3; ++v) CHECK(back.views[v].data == ds.views[v].data);
    CHECK(back.labels() == ds.labels());

    const auto norm = fit_normalizer(ds);
    dataio::write_normalizer(dataio::normalizer_path(dir.str(), "X"), norm);
    const auto n2 = dataio::read_normalizer(dataio::normalizer_path(dir.str(), "X"));
    for (std::size_t v = 0; v < 3; ++v) {
        CHECK(n2.mean[v] == norm.mean[v]);
        CHECK(n2.scale[v] == norm.scale[v]);
    }

    const std::string first = csv::read_file(dataio::feature_path(dir.str(), "X", 0));
    CHECK(first.rfind("time_0,time_1,", 0) == 0);
    std::string broken = csv::read_file(dataio::feature_path(dir.str(), "X", 1));
    broken.replace(broken.rfind(",0\n") != std::string::npos ? broken.rfind(",0\n") : broken.rfind(",1\n"), 3, ",7\n");
    write(dataio::feature_path(dir.str(), "X", 1), broken);
    CHECK_THROWS_AS(dataio::read_features(dir.str(), "X"), ParseError);
}

}
