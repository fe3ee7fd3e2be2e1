/**
 * @file numeric.hpp
 * @brief Shared numeric kernel: exact modular arithmetic on 64-bit words,
 *        deterministic primality, compensated and pairwise summation,
 *        cached roots of unity, a portable RNG, and chunked parallel loops
 *        whose results do not depend on the thread count.
 */
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace deltalab {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;
using u128 = unsigned __int128;
using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTau = 2.0 * kPi;

/// Value of a finite sum together with an absolute error bound for it.
struct SumValue {
    cplx value{0.0, 0.0};
    double abs_error_bound = 0.0;
};

// ============================================================================
// Exact modular arithmetic
// ============================================================================

inline u64 mulmod(u64 a, u64 b, u64 m) {
    return static_cast<u64>((static_cast<u128>(a) * b) % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) {
    if (m == 1) return 0;
    u64 r = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

/// Least nonnegative residue of a mod m for signed a.  Requires m >= 1.
inline u64 mod_floor(i64 a, u64 m) {
    i64 mm = static_cast<i64>(m);
    i64 r = a % mm;
    if (r < 0) r += mm;
    return static_cast<u64>(r);
}

/// Inverse of a mod m.  Throws if gcd(a, m) != 1.
inline u64 inv_mod(u64 a, u64 m) {
    i64 t = 0, new_t = 1;
    i64 r = static_cast<i64>(m), new_r = static_cast<i64>(a % m);
    while (new_r != 0) {
        i64 quot = r / new_r;
        i64 tmp = t - quot * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - quot * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) throw std::domain_error("inv_mod: argument not invertible");
    if (t < 0) t += static_cast<i64>(m);
    return static_cast<u64>(t);
}

// ============================================================================
// Primality
// ============================================================================

/// Deterministic Miller-Rabin over the first twelve prime bases, valid for
/// every 64-bit input.
inline bool is_prime(u64 n) {
    if (n < 2) return false;
    for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    u64 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        u64 x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 0; i < s - 1; ++i) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// Smallest prime >= start that is not in `excluded`.
inline u64 next_prime_excluding(u64 start, const std::vector<u64>& excluded) {
    u64 n = start < 2 ? 2 : start;
    for (;;) {
        bool skip = false;
        for (u64 e : excluded) {
            if (n == e) skip = true;
        }
        if (!skip && is_prime(n)) return n;
        ++n;
    }
}

// ============================================================================
// Summation
// ============================================================================

template <typename T>
inline T pairwise_sum(const T* data, std::size_t n) {
    if (n <= 32) {
        T s{};
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename T>
inline T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v.data(), v.size());
}

/// Compensated accumulator.  value() is exact to within a few ulps of the
/// true running sum for well-scaled inputs.
struct KahanSum {
    double hi = 0.0;
    double lo = 0.0;

    void add(double x) {
        double y = x - lo;
        double t = hi + y;
        lo = (t - hi) - y;
        hi = t;
    }
    double value() const { return hi; }
};

struct KahanSumC {
    KahanSum re, im;

    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.value(), im.value()}; }
};

// ============================================================================
// Roots of unity
// ============================================================================

/// e(a / c) = exp(2 pi i a / c) with the fraction reduced in extended
/// precision before the trig evaluation.  Accepts any signed numerator.
inline cplx unit_root(i64 a, u64 c) {
    if (c == 0) throw std::domain_error("unit_root: zero modulus");
    u64 r = mod_floor(a, c);
    long double angle = 2.0L * 3.141592653589793238462643383279502884L *
                        static_cast<long double>(r) / static_cast<long double>(c);
    return {static_cast<double>(std::cos(angle)), static_cast<double>(std::sin(angle))};
}

/// Cached table of all c-th roots of unity; root(k) = e(k / c).
class RootTable {
  public:
    explicit RootTable(u64 c) : c_(c), table_(c) {
        if (c == 0) throw std::domain_error("RootTable: zero modulus");
        for (u64 k = 0; k < c; ++k) table_[k] = unit_root(static_cast<i64>(k), c);
    }

    u64 modulus() const { return c_; }
    cplx root(u64 k) const { return table_[k < c_ ? k : k % c_]; }
    cplx root_signed(i64 k) const { return table_[mod_floor(k, c_)]; }

  private:
    u64 c_;
    std::vector<cplx> table_;
};

// ============================================================================
// Portable RNG
// ============================================================================

/// SplitMix64.  Identical output on every platform for a given seed.
struct SplitMix64 {
    u64 state;

    explicit SplitMix64(u64 seed) : state(seed) {}

    u64 next() {
        u64 z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Unbiased draw from [0, n) by multiply-shift rejection.
    u64 below(u64 n) {
        u128 m = static_cast<u128>(next()) * n;
        u64 lo = static_cast<u64>(m);
        if (lo < n) {
            u64 threshold = (0 - n) % n;
            while (lo < threshold) {
                m = static_cast<u128>(next()) * n;
                lo = static_cast<u64>(m);
            }
        }
        return static_cast<u64>(m >> 64);
    }
};

// ============================================================================
// Deterministic chunked parallelism
// ============================================================================

/// Worker count: DELTA_LAB_THREADS if set, hardware concurrency otherwise.
int thread_count();

/// Runs fn(chunk_index, lo, hi) over consecutive half-open ranges [lo, hi)
/// of width `chunk` covering [begin, end).  Chunks are claimed dynamically,
/// so fn must write only to state owned by its chunk index.
void run_chunked(i64 begin, i64 end, i64 chunk, int threads,
                 const std::function<void(std::size_t, i64, i64)>& fn);

/// Sum of term(i) over [begin, end).  Per-chunk compensated partials are
/// reduced pairwise in chunk order, so the result is independent of the
/// thread count.
cplx chunked_sum(i64 begin, i64 end, i64 chunk,
                 const std::function<cplx(i64)>& term);

}  // namespace deltalab
