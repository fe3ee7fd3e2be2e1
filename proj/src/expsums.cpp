#include "deltalab/expsums.hpp"

namespace deltalab {

TwistKernel::TwistKernel(DirichletCharacter chi) : chi_(std::move(chi)), q_(chi_.modulus()) {
    if (chi_.is_trivial()) throw std::invalid_argument("character not primitive");
    DirichletCharacter bar = chi_.conjugate();
    RootTable roots(q_);
    table_.assign(q_ * q_, cplx{0.0, 0.0});
    std::vector<u64> inv(q_, 0);
    for (u64 a = 1; a < q_; ++a) inv[a] = chi_.residues().inverse(a);
    std::vector<cplx> phase(q_);
    for (u64 u = 0; u < q_; ++u) {
        for (u64 a = 1; a < q_; ++a) phase[a] = roots.root(mulmod(inv[a], u, q_));
        for (u64 n = 0; n < q_; ++n) {
            KahanSumC acc;
            for (u64 a = 1; a < q_; ++a) acc.add(bar.value_u((n + a) % q_) * phase[a]);
            table_[u * q_ + n] = acc.value();
        }
    }
}

cplx twisted_shift_sum(const TwistKernel& kernel, i64 m, i64 n, u64 ell, unsigned amp, u64 p) {
    u64 q = kernel.q();
    if (p % q == 0) throw std::domain_error("shift sum requires (p, q) = 1");
    u64 u = mulmod(mod_floor(m, q), powmod(ell, amp, q), q);
    u = mulmod(u, inv_mod(p % q, q), q);
    return kernel.at(static_cast<i64>(u), n);
}

cplx twisted_shift_sum_brute(const DirichletCharacter& chi, i64 m, i64 n, u64 ell, unsigned amp,
                             u64 p) {
    u64 q = chi.modulus();
    if (p % q == 0) throw std::domain_error("shift sum requires (p, q) = 1");
    DirichletCharacter bar = chi.conjugate();
    const PrimeModulus& mod = chi.residues();
    u64 top = mulmod(mod_floor(m, q), powmod(ell, amp, q), q);
    KahanSumC acc;
    for (u64 a = 1; a < q; ++a) {
        u64 e_arg = mulmod(top, mod.inverse(mulmod(a, p % q, q)), q);
        acc.add(bar.value(static_cast<i64>(n) + static_cast<i64>(a)) *
                unit_root(static_cast<i64>(e_arg), q));
    }
    return acc.value();
}

cplx correlation_brute(const DirichletCharacter& chi, i64 m, i64 alpha, i64 gamma, i64 n1,
                       i64 n2) {
    if (chi.is_trivial()) throw std::invalid_argument("character not primitive");
    u64 q = chi.modulus();
    const PrimeModulus& mod = chi.residues();
    u64 mr = mod_floor(m, q);
    u64 ar = mod_floor(alpha, q);
    u64 gr = mod_floor(gamma, q);
    if (ar == 0 || gr == 0) throw std::domain_error("correlation requires (alpha gamma, q) = 1");
    DirichletCharacter bar = chi.conjugate();
    std::vector<cplx> terms;
    terms.reserve(q - 1);
    for (u64 z = 1; z < q; ++z) {
        u64 w = (mr + mulmod(gr, mod.inverse(z), q)) % q;
        if (w == 0) continue;
        u64 arg2 = (mod_floor(n2, q) + mulmod(ar, mod.inverse(w), q)) % q;
        terms.push_back(bar.value(n1 + static_cast<i64>(z)) * chi.value_u(arg2));
    }
    return pairwise_sum(terms);
}

CorrelationValue correlation_closed(const DirichletCharacter& chi, i64 m, i64 alpha, i64 gamma,
                                    i64 n1, i64 n2) {
    if (chi.is_trivial()) throw std::invalid_argument("character not primitive");
    u64 q = chi.modulus();
    const PrimeModulus& mod = chi.residues();
    u64 mr = mod_floor(m, q);
    u64 ar = mod_floor(alpha, q);
    u64 gr = mod_floor(gamma, q);
    u64 n1r = mod_floor(n1, q);
    u64 n2r = mod_floor(n2, q);
    if (ar == 0 || gr == 0) throw std::domain_error("correlation requires (alpha gamma, q) = 1");
    if (n1r == 0 || n2r == 0) {
        throw std::domain_error("closed form requires (n1 n2, q) = 1");
    }

    CorrelationValue out;
    if (mr == 0) {
        out.branch = 1;
        out.closed_form = true;
        u64 ag = mulmod(ar, mod.inverse(gr), q);
        u64 shift = mod_floor(static_cast<i64>(n2r) - static_cast<i64>(mulmod(n1r, ag, q)), q);
        double rq = (shift == 0) ? static_cast<double>(q - 1) : -1.0;
        out.value = chi.value_u(ag) * rq - chi.value_u(mulmod(n2r, mod.inverse(n1r), q));
        return out;
    }

    u64 minv = mod.inverse(mr);
    u64 c1 = mod_floor(static_cast<i64>(n1r) - static_cast<i64>(mulmod(minv, gr, q)), q);
    u64 c2 = (n2r + mulmod(minv, ar, q)) % q;
    if (c1 == 0 && c2 == 0) {
        out.branch = 3;
        out.closed_form = true;
        if (chi.is_quadratic()) {
            // Substituting s = z + inv(m) gamma turns the sum into
            // chi(inv(m) n2 gamma) * sum_{s != inv(m) gamma} chi(s^2), and the
            // excluded s contributes 1, leaving q - 2.
            out.value = chi.value_u(mulmod(mulmod(minv, n2r, q), gr, q)) *
                        static_cast<double>(q - 2);
        } else {
            out.value = -chi.value_u(mulmod(mulmod(mr, n2r, q), mod.inverse(gr), q));
        }
        return out;
    }

    out.branch = 2;
    out.closed_form = false;
    return out;
}

}  // namespace deltalab
