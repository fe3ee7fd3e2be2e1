#include "deltalab/arith.hpp"

#include <algorithm>
#include <numeric>

namespace deltalab {

std::vector<u64> prime_factors(u64 n) {
    std::vector<u64> out;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            out.push_back(p);
            while (n % p == 0) n /= p;
        }
    }
    if (n > 1) out.push_back(n);
    return out;
}

std::vector<u64> divisors(u64 n) {
    std::vector<u64> out;
    for (u64 d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            if (d != n / d) out.push_back(n / d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int mobius(u64 n) {
    int sign = 1;
    for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return 0;
            sign = -sign;
        }
    }
    if (n > 1) sign = -sign;
    return sign;
}

int legendre_symbol(i64 a, u64 p) {
    u64 r = powmod(mod_floor(a, p), (p - 1) / 2, p);
    if (r == 0) return 0;
    return r == 1 ? 1 : -1;
}

PrimeModulus::PrimeModulus(u64 q) : q_(q) {
    if (q <= 3 || !is_prime(q)) throw std::invalid_argument("q must be prime > 3");
    std::vector<u64> fac = prime_factors(q - 1);
    g_ = 0;
    for (u64 g = 2; g < q; ++g) {
        bool primitive = true;
        for (u64 p : fac) {
            if (powmod(g, (q - 1) / p, q) == 1) {
                primitive = false;
                break;
            }
        }
        if (primitive) {
            g_ = g;
            break;
        }
    }
    dlog_.assign(q, 0);
    u64 x = 1;
    for (u64 j = 0; j + 1 < q; ++j) {
        dlog_[x] = j;
        x = mulmod(x, g_, q);
    }
}

DirichletCharacter::DirichletCharacter(std::shared_ptr<const PrimeModulus> mod, u64 index)
    : mod_(std::move(mod)), t_(index) {
    u64 q = mod_->q();
    if (t_ >= q - 1) throw std::invalid_argument("character index out of range");
    RootTable unity(q - 1);
    table_.assign(q, cplx{0.0, 0.0});
    for (u64 a = 1; a < q; ++a) {
        table_[a] = unity.root(mulmod(t_, mod_->dlog(a), q - 1));
    }
}

DirichletCharacter DirichletCharacter::conjugate() const {
    u64 order = mod_->q() - 1;
    return DirichletCharacter(mod_, (order - t_) % order);
}

DirichletCharacter legendre_character(std::shared_ptr<const PrimeModulus> mod) {
    u64 q = mod->q();
    return DirichletCharacter(std::move(mod), (q - 1) / 2);
}

cplx gauss_sum(const DirichletCharacter& chi) {
    if (chi.is_trivial()) throw std::invalid_argument("character not primitive");
    u64 q = chi.modulus();
    RootTable roots(q);
    std::vector<cplx> terms;
    terms.reserve(q - 1);
    for (u64 a = 1; a < q; ++a) terms.push_back(chi.value_u(a) * roots.root(a));
    return pairwise_sum(terms);
}

i64 ramanujan_sum(u64 c, i64 n) {
    u64 g = std::gcd(c, mod_floor(n, c));
    if (g == 0) g = c;
    i64 total = 0;
    for (u64 d : divisors(g)) total += static_cast<i64>(d) * mobius(c / d);
    return total;
}

cplx trivial_delta(i64 n, u64 q) {
    if (q == 0) throw std::domain_error("trivial_delta: zero modulus");
    KahanSumC acc;
    for (u64 c : divisors(q)) {
        RootTable roots(c);
        for (u64 a = 0; a < c; ++a) {
            if (std::gcd(a, c) != 1) continue;
            acc.add(roots.root_signed(static_cast<i64>(a) * (n % static_cast<i64>(c))));
        }
    }
    return acc.value() / static_cast<double>(q);
}

i64 trivial_delta_exact(i64 n, u64 q) {
    i64 total = 0;
    for (u64 c : divisors(q)) total += ramanujan_sum(c, n);
    return total / static_cast<i64>(q);
}

double delta_identity_max_error_prime(u64 q) {
    // For prime q the divisor expansion collapses to the full residue sum
    // (1/q) sum_{b mod q} e(b n / q).
    RootTable roots(q);
    double worst = 0.0;
    for (i64 n = -static_cast<i64>(q) + 1; n < static_cast<i64>(q); ++n) {
        u64 step = mod_floor(n, q);
        double re = 0.0, im = 0.0;
        u64 idx = 0;
        for (u64 b = 0; b < q; ++b) {
            cplx z = roots.root(idx);
            re += z.real();
            im += z.imag();
            idx += step;
            if (idx >= q) idx -= q;
        }
        double ind = (n == 0) ? 1.0 : 0.0;
        double err = std::hypot(re / static_cast<double>(q) - ind, im / static_cast<double>(q));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace deltalab
