#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "deltalab/arith.hpp"
#include "deltalab/coeffs.hpp"

using namespace deltalab;

namespace {

struct Curve {
    i64 a1, a2, a3, a4, a6;
};

const Curve k11a1{0, -1, 1, -10, -20};
const Curve k17a1{1, -1, 1, -1, -14};
const Curve k19a1{0, 1, 1, -9, -15};

/// Point-count oracle: a_p = p + 1 - #E(F_p), independent of any series
/// expansion.  Odd p via the completed square, p = 2 by direct enumeration.
i64 curve_ap(const Curve& e, u64 p) {
    if (p == 2) {
        i64 points = 1;
        for (i64 x = 0; x < 2; ++x) {
            for (i64 y = 0; y < 2; ++y) {
                i64 lhs = y * y + e.a1 * x * y + e.a3 * y;
                i64 rhs = x * x * x + e.a2 * x * x + e.a4 * x + e.a6;
                if (mod_floor(lhs - rhs, 2) == 0) ++points;
            }
        }
        return 3 - points;
    }
    i64 c2 = e.a1 * e.a1 + 4 * e.a2;
    i64 c1 = 2 * e.a1 * e.a3 + 4 * e.a4;
    i64 c0 = e.a3 * e.a3 + 4 * e.a6;
    i64 total = 0;
    for (u64 x = 0; x < p; ++x) {
        u64 g = (4 * powmod(x, 3, p)) % p;
        g = (g + mulmod(mod_floor(c2, p), mulmod(x, x, p), p)) % p;
        g = (g + mulmod(mod_floor(c1, p), x, p)) % p;
        g = (g + mod_floor(c0, p)) % p;
        total += legendre_symbol(static_cast<i64>(g), p);
    }
    return -total;
}

std::string render(const HeckeCoefficients& c) {
    std::ostringstream out;
    out << "LEVEL=" << c.level() << " WEIGHT=" << c.weight() << " LABEL=" << c.label()
        << " NMAX=" << c.nmax() << "\n";
    for (u64 n = 1; n <= c.nmax(); ++n) out << n << " " << c.a(n) << "\n";
    return out.str();
}

HeckeCoefficients parse_string(const std::string& text) {
    std::istringstream in(text);
    return HeckeCoefficients::parse(in);
}

}  // namespace

TEST_CASE("eta expansion frozen head") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(100);
    i64 expected[] = {1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1};
    for (u64 n = 1; n <= 15; ++n) CHECK(c.a(n) == expected[n - 1]);
    CHECK(c.level() == 11);
    CHECK(c.weight() == 2);
    CHECK(c.label() == "11.2.a.a");
}

TEST_CASE("eta expansion matches point counts") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(1000);
    for (u64 p = 2; p <= 1000; ++p) {
        if (!is_prime(p) || p == 11) continue;
        CHECK(c.a(p) == curve_ap(k11a1, p));
    }
    CHECK(c.a(11) == 1);
}

TEST_CASE("companion curves frozen values") {
    CHECK(curve_ap(k17a1, 2) == -1);
    CHECK(curve_ap(k17a1, 3) == 0);
    CHECK(curve_ap(k17a1, 5) == -2);
    CHECK(curve_ap(k19a1, 2) == 0);
    CHECK(curve_ap(k19a1, 3) == -2);
    CHECK(curve_ap(k19a1, 5) == 3);
}

TEST_CASE("structural validation passes on the eta backend") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(10000);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("amplifier identity is exact") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(10000);
    for (u64 ell = 2; ell <= 97; ++ell) {
        if (!is_prime(ell) || ell == 11) continue;
        CHECK(c.a(ell) * c.a(ell) - c.a(ell * ell) == static_cast<i64>(ell));
        double lam = c.lambda(ell);
        CHECK(std::abs(lam * lam - c.lambda(ell * ell) - 1.0) <= 1e-12);
    }
}

TEST_CASE("integer Hecke relation") {
    const u64 mcap = 2000;
    HeckeCoefficients c = HeckeCoefficients::eta_level11(97 * mcap);
    for (u64 ell = 2; ell <= 97; ++ell) {
        if (!is_prime(ell) || ell == 11) continue;
        for (u64 m = 1; m <= mcap; ++m) {
            if (m % 11 == 0 || m % ell == 0) {
                if (m % ell == 0 && m % 11 != 0) {
                    // d runs over {1, ell}: a_m a_ell = a_{m ell} + ell^{k-1} a_{m/ell}.
                    CHECK(c.a(m) * c.a(ell) ==
                          c.a(m * ell) + static_cast<i64>(ell) * c.a(m / ell));
                }
                continue;
            }
            CHECK(c.a(m) * c.a(ell) == c.a(m * ell));
        }
    }
}

TEST_CASE("analytic normalization") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(100);
    CHECK(c.lambda(1) == 1.0);
    CHECK(std::abs(c.lambda(2) + std::sqrt(2.0)) <= 1e-15);
    CHECK(std::abs(c.lambda(4) - 1.0) <= 1e-15);
    CHECK_THROWS(c.lambda(0));
    CHECK_THROWS(c.a(101));
}

TEST_CASE("file roundtrip and cross-backend equality") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(500);
    std::string path = "test_coeffs_roundtrip.txt";
    c.save_file(path);
    HeckeCoefficients d = HeckeCoefficients::load_file(path);
    CHECK(d.level() == 11);
    CHECK(d.nmax() == 500);
    CHECK(d.label() == c.label());
    for (u64 n = 1; n <= 500; ++n) CHECK(d.a(n) == c.a(n));
    std::remove(path.c_str());
}

TEST_CASE("validation rejects tampered tables") {
    std::string good = render(HeckeCoefficients::eta_level11(20));

    std::string bad6 = good;
    bad6.replace(bad6.find("\n6 2\n"), 5, "\n6 3\n");
    CHECK_THROWS_WITH(parse_string(bad6), "multiplicativity violated at n=6");

    CHECK_THROWS_WITH(
        parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=3\n1 1\n2 5\n3 -1\n"),
        "Deligne bound violated at p=2");

    std::string bad11 = good;
    bad11.replace(bad11.find("\n11 1\n"), 6, "\n11 3\n");
    CHECK_THROWS_WITH(parse_string(bad11), "level coefficient violated at p=11");

    std::string bad4 = good;
    bad4.replace(bad4.find("\n4 2\n"), 5, "\n4 5\n");
    CHECK_THROWS_WITH(parse_string(bad4), "Hecke recursion violated at n=4");

    CHECK_THROWS_WITH(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=1\n1 2\n"), "a_1 must be 1");
}

TEST_CASE("strict parsing") {
    CHECK_THROWS(parse_string(""));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 NMAX=2\n1 1\n2 -2\n"));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1\n"));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1\n3 -1\n"));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1 \n2 -2\n"));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1\r\n2 -2\n"));
    CHECK_THROWS(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1\n2 -2\nleftover\n"));
    CHECK_THROWS(parse_string("LEVEL=12 WEIGHT=2 LABEL=x NMAX=1\n1 1\n"));
    CHECK_NOTHROW(parse_string("LEVEL=11 WEIGHT=2 LABEL=x NMAX=2\n1 1\n2 -2\n"));
}

TEST_CASE("rankin selberg diagnostic") {
    HeckeCoefficients c = HeckeCoefficients::eta_level11(10000);
    CHECK(c.rankin_selberg_ratio(1) == 1.0);
    KahanSum direct;
    for (u64 n = 1; n <= 10; ++n) direct.add(c.lambda(n) * c.lambda(n));
    CHECK(std::abs(c.rankin_selberg_ratio(10) - direct.value() / 10.0) <= 1e-14);
    double r2 = c.rankin_selberg_ratio(100);
    double r3 = c.rankin_selberg_ratio(1000);
    double r4 = c.rankin_selberg_ratio(10000);
    CHECK(r2 / r3 < 3.0);
    CHECK(r3 / r2 < 3.0);
    CHECK(r3 / r4 < 3.0);
    CHECK(r4 / r3 < 3.0);
}
