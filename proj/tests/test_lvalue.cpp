#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "deltalab/lvalue.hpp"

using namespace deltalab;

namespace {

const HeckeCoefficients& table() {
    static const HeckeCoefficients f = HeckeCoefficients::eta_level11(1000000);
    return f;
}

std::shared_ptr<const PrimeModulus> mod11() {
    static const auto m = std::make_shared<const PrimeModulus>(11);
    return m;
}

}  // namespace

TEST_CASE("central values at level 11 are stable across smoothing scales") {
    // frozen two-scale evaluations; the value is the X = 6q sum
    const double expected[9][2] = {
        {0.520642907585997, 0.156599727739492},  {0.610453446644189, -0.799534195101492},
        {0.914628485998749, -1.09063098814823},  {1.27164657062058, -1.01593573932564},
        {1.75939903821737, 0.0},                 {1.27164657062058, 1.01593573932564},
        {0.914628485998749, 1.09063098814823},   {0.610453446644189, 0.799534195101492},
        {0.520642907585997, -0.156599727739492},
    };
    for (u64 t = 1; t <= 9; ++t) {
        const DirichletCharacter chi(mod11(), t);
        const LValueResult r = lvalue_central(table(), chi);
        CHECK(r.value.real() == doctest::Approx(expected[t - 1][0]).epsilon(1e-12));
        CHECK(r.value.imag() == doctest::Approx(expected[t - 1][1]).epsilon(1e-12).scale(1.0));
        CHECK(r.accepted);
        CHECK(r.stability_gap < 1e-3 * (1.0 + std::abs(r.value)));
        // the gap is a real measurement, not a rounding artifact
        CHECK(r.stability_gap > 1e-7);
        CHECK(r.stability_gap < 5e-5);
        CHECK(r.truncation == 2970);
        CHECK(r.conductor == 121);
        CHECK(r.method == "smoothed-series");
    }
}

TEST_CASE("conjugate characters give conjugate central values") {
    for (u64 t = 1; t <= 4; ++t) {
        const DirichletCharacter chi(mod11(), t);
        const DirichletCharacter bar(mod11(), 10 - t);
        const LValueResult a = lvalue_central(table(), chi);
        const LValueResult b = lvalue_central(table(), bar);
        CHECK(std::abs(a.value - std::conj(b.value)) < 1e-14);
        // the modulus is well-defined without knowing any root number
        CHECK(std::abs(std::abs(a.value) - std::abs(b.value)) < 1e-14);
    }
    const DirichletCharacter quad(mod11(), 5);
    CHECK(std::abs(lvalue_central(table(), quad).value.imag()) < 1e-15);
}

TEST_CASE("doubling the smoothing scale barely moves an accepted value") {
    for (u64 t : {1ull, 5ull, 7ull}) {
        const DirichletCharacter chi(mod11(), t);
        const LValueResult r = lvalue_central(table(), chi);
        const cplx wider = dirichlet_series_smoothed(table(), chi, 12.0 * 11.0);
        CHECK(std::abs(wider - r.value) < 1e-8);
    }
}

TEST_CASE("degenerate evaluation requests are rejected") {
    CHECK_THROWS_AS(lvalue_central(table(), DirichletCharacter(mod11(), 0)),
                    std::invalid_argument);

    const auto mod13 = std::make_shared<const PrimeModulus>(13);
    CHECK_THROWS_AS(lvalue_central(table(), DirichletCharacter(mod13, 1)),
                    std::invalid_argument);

    // horizon 500 admits the X = 3q scale but not X = 6q
    const HeckeCoefficients small = HeckeCoefficients::eta_level11(500);
    CHECK_NOTHROW(dirichlet_series_smoothed(small, DirichletCharacter(mod11(), 1), 33.0));
    CHECK_THROWS_AS(lvalue_central(small, DirichletCharacter(mod11(), 1)),
                    std::out_of_range);
}

TEST_CASE("exponent study emits per-character rows and a summary") {
    const char* path = "test_lvalue_level11.tbl";
    table().save_file(path);

    const ExponentStudy st = exponent_study({path});
    REQUIRE(st.rows.size() == 10);
    CHECK(st.errors.empty());
    CHECK(st.flags.empty());
    for (size_t i = 0; i < 9; ++i) {
        CHECK(st.rows[i].q == 11);
        CHECK(st.rows[i].chi_index == std::to_string(i + 1));
        CHECK(st.rows[i].abs ==
              doctest::Approx(std::hypot(st.rows[i].re, st.rows[i].im)).epsilon(1e-14));
        CHECK(st.rows[i].r_conv ==
              doctest::Approx(st.rows[i].abs / std::sqrt(11.0)).epsilon(1e-14));
        CHECK(st.rows[i].r_sub ==
              doctest::Approx(st.rows[i].abs / std::pow(11.0, 0.5 - 1.0 / 12.0)).epsilon(1e-14));
    }
    const ExponentStudyRow& summary = st.rows.back();
    CHECK(summary.chi_index == "max");
    CHECK(summary.abs == doctest::Approx(1.75939903821737).epsilon(1e-12));
    CHECK(summary.r_conv == doctest::Approx(0.530478769662).epsilon(1e-10));
    CHECK(summary.r_sub == doctest::Approx(0.647814599695).epsilon(1e-10));
    CHECK(std::isfinite(summary.r_conv));

    const std::string csv = st.to_csv();
    CHECK(csv.rfind("q,chi_index,re,im,abs,stability_gap,r_conv,r_sub\n", 0) == 0);
    size_t lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 11);
    CHECK(st.to_csv() == exponent_study({path}).to_csv());

    SUBCASE("a missing file is isolated, the rest of the study proceeds") {
        const ExponentStudy mixed = exponent_study({path, "no_such_table.tbl"});
        CHECK(mixed.rows.size() == 10);
        REQUIRE(mixed.errors.size() == 1);
        CHECK(mixed.errors[0].find("no_such_table.tbl") != std::string::npos);
    }

    SUBCASE("an empty file list yields a bare header") {
        const ExponentStudy none = exponent_study({});
        CHECK(none.rows.empty());
        CHECK(none.errors.empty());
        CHECK(none.to_csv() == "q,chi_index,re,im,abs,stability_gap,r_conv,r_sub\n");
    }

    std::remove(path);
}
