#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

#include "forgelab/data.hpp"
#include "test_helpers.hpp"

using namespace forgelab;
using data::Domain;
using data::MiniBatch;
using linalg::Matrix;
using linalg::Vector;

namespace {

// Writes a raw IDX pair: one d-pixel "image" per example plus label bytes.
void write_idx_pair(const std::string& img_path, const std::string& lbl_path,
                    const std::vector<std::vector<unsigned char>>& pixels,
                    const std::vector<unsigned char>& labels, std::uint32_t img_magic = 0x803,
                    std::uint32_t lbl_magic = 0x801, bool truncate_pixels = false) {
    auto be32 = [](std::ofstream& out, std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    std::ofstream img(img_path, std::ios::binary | std::ios::trunc);
    be32(img, img_magic);
    be32(img, pixels.size());
    be32(img, pixels.empty() ? 0 : pixels[0].size());
    be32(img, 1);
    for (const auto& p : pixels) {
        const std::size_t n = truncate_pixels ? p.size() / 2 : p.size();
        img.write(reinterpret_cast<const char*>(p.data()), n);
        if (truncate_pixels) break;
    }
    std::ofstream lbl(lbl_path, std::ios::binary | std::ios::trunc);
    be32(lbl, lbl_magic);
    be32(lbl, labels.size());
    lbl.write(reinterpret_cast<const char*>(labels.data()), labels.size());
}

std::string tmp_path(const std::string& name) { return "/tmp/forgelab_test_" + name; }

}  // namespace

TEST_SUITE("data") {

TEST_CASE("grid membership accepts q/255 values and rejects off-grid ones") {
    MiniBatch batch;
    batch.x = Matrix{{0.0}, {37.0 / 255.0}, {1.0}};
    batch.y = Matrix{{1.0}, {0.0}};
    CHECK(data::in_domain(batch, Domain::discrete_grid(256)));

    MiniBatch off;
    off.x = Matrix{{0.5000004}};
    off.y = Matrix{{1.0}, {0.0}};
    CHECK_FALSE(data::in_domain(off, Domain::discrete_grid(2), 1e-7));
}

TEST_CASE("box membership and one-hot label checks") {
    MiniBatch batch;
    batch.x = Matrix{{0.4}, {-0.1}};
    batch.y = Matrix{{1.0}, {0.0}};
    CHECK_FALSE(data::in_domain(batch, Domain::continuous_box(0.0, 1.0)));
    CHECK(data::in_domain(batch, Domain::continuous_box(-1.0, 1.0)));

    MiniBatch bad_label;
    bad_label.x = Matrix{{0.4}};
    bad_label.y = Matrix{{0.6}, {0.4}};
    CHECK_FALSE(data::in_domain(bad_label, Domain::continuous_box(0.0, 1.0)));
    // real-vector labels are unconstrained
    CHECK(data::in_domain(bad_label,
                          Domain::continuous_box(0.0, 1.0, Domain::LabelKind::real_vector)));
}

TEST_CASE("distinctness is multiset-like over columns") {
    Rng rng = make_rng(51);
    MiniBatch a = testutil::random_batch(rng, 4, 3, 5);
    CHECK_FALSE(data::distinct(a, a));

    MiniBatch permuted = a;
    for (std::size_t k = 0; k < 5; ++k) {
        permuted.x.set_col(k, a.x.col((k + 2) % 5));
        permuted.y.set_col(k, a.y.col((k + 2) % 5));
    }
    CHECK_FALSE(data::distinct(a, permuted));
    CHECK_FALSE(data::distinct(permuted, a));

    MiniBatch replaced = a;
    replaced.x.set_col(3, testutil::random_vector(rng, 4));
    CHECK(data::distinct(replaced, a));
}

TEST_CASE("distinct requires matching shapes") {
    Rng rng = make_rng(52);
    MiniBatch a = testutil::random_batch(rng, 4, 3, 5);
    MiniBatch b = testutil::random_batch(rng, 4, 3, 6);
    CHECK_THROWS_AS((void)data::distinct(a, b), std::invalid_argument);
}

TEST_CASE("synthetic generation is deterministic and in-domain") {
    const Domain dom = Domain::discrete_grid(256);
    const data::Dataset ds1 = data::gen_synthetic(99, 60, 7, 4, dom);
    const data::Dataset ds2 = data::gen_synthetic(99, 60, 7, 4, dom);
    REQUIRE(ds1.size() == 60);
    for (std::size_t i = 0; i < ds1.size(); ++i) {
        CHECK(ds1.examples[i].x == ds2.examples[i].x);  // bit-identical
        CHECK(ds1.examples[i].y == ds2.examples[i].y);
    }
    CHECK(data::in_domain(data::batch_from_examples(ds1.examples), dom));

    std::vector<int> counts(4, 0);
    for (const auto& e : ds1.examples) {
        for (std::size_t c = 0; c < 4; ++c) {
            if (e.y[c] == 1.0) ++counts[c];
        }
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    CHECK(*hi - *lo <= 1);
}

TEST_CASE("idx parsing: scaling, one-hot labels and header errors") {
    const std::string img = tmp_path("img");
    const std::string lbl = tmp_path("lbl");

    write_idx_pair(img, lbl, {{255}}, {3});
    const data::Dataset ds = data::load_idx(img, lbl);
    REQUIRE(ds.size() == 1);
    CHECK(ds.examples[0].x == Vector{1.0});
    CHECK(ds.examples[0].y == testutil::one_hot(10, 3));
    CHECK(ds.domain.input == Domain::InputKind::discrete_grid);
    CHECK(ds.domain.levels == 256);

    write_idx_pair(img, lbl, {{0}, {128}}, {1});  // count mismatch
    CHECK_THROWS_WITH_AS((void)data::load_idx(img, lbl), doctest::Contains("2 images but 1"),
                         std::runtime_error);

    write_idx_pair(img, lbl, {{0}}, {1}, 0x804);  // bad image magic
    CHECK_THROWS_WITH_AS((void)data::load_idx(img, lbl), doctest::Contains("magic"),
                         std::runtime_error);

    write_idx_pair(img, lbl, {{0, 1, 2, 3}}, {1}, 0x803, 0x801, true);  // truncated pixels
    CHECK_THROWS_WITH_AS((void)data::load_idx(img, lbl), doctest::Contains("truncated"),
                         std::runtime_error);

    write_idx_pair(img, lbl, {{7}}, {11});  // label beyond the 10 classes
    CHECK_THROWS_WITH_AS((void)data::load_idx(img, lbl), doctest::Contains("label"),
                         std::runtime_error);

    std::remove(img.c_str());
    std::remove(lbl.c_str());
}

TEST_CASE("idx round trip reproduces pixels exactly") {
    const data::Dataset ds = data::gen_synthetic(7, 40, 9, 10, Domain::discrete_grid(256));
    const std::string img = tmp_path("rt_img");
    const std::string lbl = tmp_path("rt_lbl");
    data::save_idx(ds, img, lbl);
    const data::Dataset back = data::load_idx(img, lbl);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.examples[i].x == ds.examples[i].x);  // exact, not approximate
        CHECK(back.examples[i].y == ds.examples[i].y);
    }
    std::remove(img.c_str());
    std::remove(lbl.c_str());
}

TEST_CASE("sample_batch: permutation at full size, deterministic per seed") {
    const data::Dataset ds = data::gen_synthetic(3, 12, 5, 3, Domain::continuous_box(0.0, 1.0));
    const MiniBatch full = data::sample_batch(ds, 12, 42);
    const MiniBatch everything = data::batch_from_examples(ds.examples);
    CHECK_FALSE(data::distinct(full, everything));
    CHECK_FALSE(data::distinct(everything, full));

    const MiniBatch again = data::sample_batch(ds, 12, 42);
    CHECK(full.x.data() == again.x.data());

    const MiniBatch b1 = data::sample_batch(ds, 4, 1);
    const MiniBatch b2 = data::sample_batch(ds, 4, 2);
    CHECK(data::distinct(b1, b2));  // overwhelmingly likely for these seeds

    CHECK_THROWS_AS((void)data::sample_batch(ds, 13, 0), std::invalid_argument);
}

TEST_CASE("quantized values always pass grid membership") {
    Rng rng = make_rng(53);
    for (int levels : {2, 5, 256}) {
        Matrix x = testutil::random_matrix(rng, 6, 4, 0.0, 1.0);
        const double span = levels - 1;
        for (double& v : x.data()) v = std::round(v * span) / span;
        MiniBatch batch;
        batch.x = x;
        batch.y = Matrix(3, 4);
        for (std::size_t k = 0; k < 4; ++k) batch.y(k % 3, k) = 1.0;
        CHECK(data::in_domain(batch, Domain::discrete_grid(levels)));
    }
}

}  // TEST_SUITE
