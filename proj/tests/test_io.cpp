#include "pafp/errors.hpp"
#include "pafp/io.hpp"

#include <doctest.h>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <vector>

using namespace pafp;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path dir;
    TempDir() {
        dir = fs::temp_directory_path() /
              ("pafp-io-" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }
    std::string operator/(const char* name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    out << body;
    REQUIRE(out.good());
}

double parse17(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    REQUIRE(res.ec == std::errc());
    REQUIRE(res.ptr == s.data() + s.size());
    return v;
}

} // namespace

TEST_SUITE("io") {

TEST_CASE("decimal formatting round-trips binary64 exactly") {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int t = 0; t < 200; ++t) {
        const double v = u(rng);
        CHECK(parse17(fmt17(v)) == v);
    }
    for (double v : {0.0, -0.0, 1e-300, -1e300, 0.1, 1.0 / 3.0,
                     std::numeric_limits<double>::denorm_min(),
                     std::numeric_limits<double>::max()}) {
        CHECK(parse17(fmt17(v)) == v);
    }
    CHECK(fmt17(0.5) == "0.5");
}

TEST_CASE("model files round-trip bitwise") {
    TempDir td;
    ModelFile mf;
    mf.model.w = {0.1, -2.5, 1.0 / 3.0, 0.0};
    mf.model.threshold = 0.7071067811865476;

    const std::string plain = td / "plain.model";
    save_model(plain, mf);
    const auto back = load_model(plain);
    CHECK(back.model.w == mf.model.w);
    CHECK(back.model.threshold == mf.model.threshold);
    CHECK_FALSE(back.rff.has_value());

    mf.rff = RffParams{0.125, 512, 42};
    const std::string with_rff = td / "rff.model";
    save_model(with_rff, mf);
    const auto back2 = load_model(with_rff);
    REQUIRE(back2.rff.has_value());
    CHECK(back2.rff->gamma == 0.125);
    CHECK(back2.rff->out_dim == 512);
    CHECK(back2.rff->seed == 42);
    CHECK(back2.model.w == mf.model.w);

    // saving twice produces identical bytes
    const std::string copy = td / "copy.model";
    save_model(copy, mf);
    CHECK(slurp(copy) == slurp(with_rff));
}

TEST_CASE("model loader rejects bad files with line numbers") {
    TempDir td;
    const std::string p = td / "bad.model";

    spit(p, "pa-model v2\ndim 2\nthreshold 0\nweights 1 0\n");
    CHECK_THROWS_AS(load_model(p), VersionError);

    spit(p, "something else\n");
    CHECK_THROWS_AS(load_model(p), ParseError);

    spit(p, "pa-model v1\ndim 2\nthreshold zero\nweights 1 0\n");
    try {
        load_model(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    spit(p, "pa-model v1\ndim 3\nthreshold 0\nweights 1 0\n");
    try {
        load_model(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("expected 3 weights") != std::string::npos);
    }

    spit(p, "pa-model v1\ndim 1\nthreshold 0\nweights 1\ntrailing\n");
    CHECK_THROWS_AS(load_model(p), ParseError);
}

TEST_CASE("datasets round-trip and reject malformed rows") {
    TempDir td;
    Dataset d;
    d.dim = 3;
    d.examples.push_back({{0.5, -1.25, 3.0}, +1});
    d.examples.push_back({{-0.0, 1e-12, -7.5}, -1});

    const std::string p = td / "data.csv";
    save_dataset(p, d);
    const auto back = load_dataset(p);
    CHECK(back.dim == d.dim);
    REQUIRE(back.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(back.examples[i].x == d.examples[i].x);
        CHECK(back.examples[i].y == d.examples[i].y);
    }

    spit(p, "label,f0\n2,0.5\n");
    CHECK_THROWS_AS(load_dataset(p), ParseError);

    spit(p, "label,f0\n1,0.5,0.7\n");
    try {
        load_dataset(p);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    spit(p, "notlabel,f0\n1,0.5\n");
    CHECK_THROWS_AS(load_dataset(p), ParseError);

    spit(p, "");
    CHECK_THROWS_AS(load_dataset(p), ParseError);
}

TEST_CASE("summaries round-trip and version-check") {
    TempDir td;
    SummarySet s;
    s.dim = 2;
    s.clusters.push_back({{1.0, 0.5}, 10, 0.8});
    s.clusters.push_back({{-1.0 / 3.0, 0.0}, 30, 0.1});

    const std::string p = td / "summ.csv";
    save_summaries(p, s);
    const auto back = load_summaries(p);
    CHECK(back.dim == s.dim);
    REQUIRE(back.clusters.size() == 2);
    CHECK(back.clusters[1].center == s.clusters[1].center);
    CHECK(back.clusters[1].size == 30);
    CHECK(back.clusters[1].malicious_fraction == 0.1);

    spit(p, "pa-summaries v9 dim=2 k=1\n1,0.5,0,0\n");
    CHECK_THROWS_AS(load_summaries(p), VersionError);

    spit(p, "pa-summaries v1 dim=2 k=1\n1,1.5,0,0\n"); // fraction out of range
    CHECK_THROWS_AS(load_summaries(p), ParseError);
}

TEST_CASE("score files have a frozen shape") {
    TempDir td;
    const std::string p = td / "scores.csv";
    save_scores(p, {0.5, 0.1}, {-1, +1});
    CHECK(slurp(p) == "label,score\n-1,0.5\n1,0.10000000000000001\n");
}

TEST_CASE("report rendering has a frozen shape") {
    EvalReport r;
    r.accuracy = 0.975;
    r.auc = 0.9875;
    r.pauc_norm = 0.5;
    r.tpr = 0.96;
    r.fpr = 0.000625;
    r.threshold = 1.25;
    r.fpr_limit = 0.001;
    r.n_pos = 2040;
    r.n_neg = 2960;
    CHECK(render_report(r) ==
          "accuracy=0.975000\n"
          "auc=0.987500\n"
          "pauc_norm=0.500000\n"
          "tpr=0.960000\n"
          "fpr=0.000625\n"
          "threshold=1.250000\n"
          "fpr_limit=0.001000\n"
          "n_pos=2040\n"
          "n_neg=2960\n");
}

TEST_CASE("min-max transform") {
    Dataset d;
    d.dim = 2;
    d.examples.push_back({{0.0, 10.0}, +1});
    d.examples.push_back({{4.0, 20.0}, -1});
    const auto mm = fit_minmax(d);
    const auto z = apply_minmax(mm, FeatureVector{2.0, 15.0});
    CHECK(z[0] == 0.5);
    CHECK(z[1] == 0.5);
    const auto lo = apply_minmax(mm, FeatureVector{0.0, 10.0});
    CHECK(lo[0] == 0.0);
    const auto hi = apply_minmax(mm, FeatureVector{4.0, 20.0});
    CHECK(hi[0] == 1.0);

    // constant feature maps to 0 instead of dividing by zero
    Dataset flat;
    flat.dim = 1;
    flat.examples.push_back({{3.0}, +1});
    flat.examples.push_back({{3.0}, -1});
    const auto fm = fit_minmax(flat);
    CHECK(apply_minmax(fm, FeatureVector{3.0})[0] == 0.0);

    Dataset empty;
    empty.dim = 1;
    CHECK_THROWS_AS(fit_minmax(empty), InvalidInput);
    CHECK_THROWS_AS(apply_minmax(mm, FeatureVector{1.0}), InvalidInput);

    const auto whole = apply_minmax(mm, d);
    CHECK(whole.examples[0].x[0] == 0.0);
    CHECK(whole.examples[1].x[1] == 1.0);
}

TEST_CASE("example hashing matches an independent fnv-1a") {
    LabeledExample ex{{1.5, -2.0}, -1};
    // canonical row the hash covers: label, then 17-digit coordinates
    const std::string row = "-1," + fmt17(1.5) + "," + fmt17(-2.0);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : row) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    CHECK(example_hash(ex) == std::string(buf));
    CHECK(example_hash(ex).size() == 16);
}

TEST_CASE("fp database appends, reloads, and locks") {
    TempDir td;
    const std::string db = td / "fp.db";

    LabeledExample ex{{1.0, 2.0}, -1};
    FpDbRow row;
    row.hash = example_hash(ex);
    row.label = -1;
    row.timestamp = 1234;
    row.verdict = Verdict::Applied;
    row.impact = -0.25;
    append_fp_db(db, row, ex);

    LabeledExample ex2{{-3.0, 0.5}, -1};
    FpDbRow row2 = row;
    row2.hash = example_hash(ex2);
    row2.verdict = Verdict::Audit;
    row2.impact = -0.9;
    append_fp_db(db, row2, ex2);

    const auto rows = load_fp_db(db);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].hash == row.hash);
    CHECK(rows[0].timestamp == 1234);
    CHECK(rows[0].verdict == Verdict::Applied);
    CHECK(rows[0].impact == -0.25);
    CHECK(rows[1].verdict == Verdict::Audit);

    const auto examples = load_fp_examples(db + ".examples");
    REQUIRE(examples.size() == 2);
    CHECK(examples[0].x == ex.x);
    CHECK(examples[1].x == ex2.x);
    CHECK(example_hash(examples[1]) == rows[1].hash);

    // a mismatched hash/example pair must be rejected
    FpDbRow bad = row;
    bad.hash = "0000000000000000";
    CHECK_THROWS_AS(append_fp_db(db, bad, ex), InvalidInput);

    // a stale lock blocks writers and is reported, not ignored
    spit(db + ".lock", "");
    CHECK_THROWS_AS(append_fp_db(db, row, ex), ConcurrentWriteError);
    fs::remove(db + ".lock");
    CHECK_NOTHROW(append_fp_db(db, row, ex));
    CHECK_FALSE(fs::exists(db + ".lock")); // released after append
}

TEST_CASE("verdict names") {
    CHECK(std::string(verdict_name(Verdict::Applied)) == "Applied");
    CHECK(std::string(verdict_name(Verdict::Passive)) == "Passive");
    CHECK(std::string(verdict_name(Verdict::Audit)) == "Audit");
}

} // TEST_SUITE
