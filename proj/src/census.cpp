#include "deltalab/census.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "deltalab/numeric.hpp"

namespace deltalab {

namespace {

struct FamilyShape {
    bool distinct = false;
    int branch = 0;  // 0 rigidity, 1 forced-zero, 2 product, 3 progression
};

FamilyShape shape_of(CensusFamily f) {
    switch (f) {
        case CensusFamily::kDistinctRigidity: return {true, 0};
        case CensusFamily::kEqualRigidity: return {false, 0};
        case CensusFamily::kDistinctForcedZero: return {true, 1};
        case CensusFamily::kEqualForcedZero: return {false, 1};
        case CensusFamily::kDistinctProduct: return {true, 2};
        case CensusFamily::kEqualProduct: return {false, 2};
        case CensusFamily::kDistinctProgression: return {true, 3};
        case CensusFamily::kEqualProgression: return {false, 3};
    }
    throw std::invalid_argument("census: unknown family");
}

i64 floordiv(i64 a, i64 b) {
    i64 quot = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --quot;
    return quot;
}

i64 ceildiv(i64 a, i64 b) { return -floordiv(-a, b); }

/// Number of n in [-R, R] \ {0} with n = a (mod p), 0 <= a < p.
i64 count_in_class(u64 a, u64 p, i64 R) {
    i64 ai = static_cast<i64>(a), pi = static_cast<i64>(p);
    i64 cnt = floordiv(R - ai, pi) + floordiv(R + ai, pi) + 1;
    if (a == 0) --cnt;
    return std::max<i64>(cnt, 0);
}

/// CRT: x = a1 (mod m1), x = a2 (mod m2) for coprime m1, m2.
u64 crt2(u64 a1, u64 m1, u64 a2, u64 m2) {
    u64 d = mod_floor(static_cast<i64>(a2 % m2) - static_cast<i64>(a1 % m2),
                      m2);
    u64 k = mulmod(d, inv_mod(m1 % m2, m2), m2);
    return a1 + m1 * k;  // < m1*m2
}

template <typename F>
void for_each_in_class(u64 a, u64 T, i64 M, F&& fn) {
    i64 ai = static_cast<i64>(a), Ti = static_cast<i64>(T);
    for (i64 k = ceildiv(-M - ai, Ti); ai + k * Ti <= M; ++k) fn(ai + k * Ti);
}

void validate(const CensusConfig& cfg, const FamilyShape& fs) {
    if (!cfg.modulus) throw std::invalid_argument("census: modulus is required");
    const u64 q = cfg.modulus->q();
    if (cfg.L_set.empty()) throw std::invalid_argument("census: L_set is empty");
    if (cfg.P_set.empty()) throw std::invalid_argument("census: P_set is empty");
    if (fs.distinct && cfg.L_set.size() < 2)
        throw std::invalid_argument("census: distinct families need at least two amplifier lengths");
    auto check_set = [q](const std::vector<u64>& s, const char* which, u64 cap) {
        for (size_t i = 0; i < s.size(); ++i) {
            if (!is_prime(s[i]) || s[i] > cap)
                throw std::invalid_argument(std::string("census: ") + which + " members must be primes <= " + std::to_string(cap));
            if (s[i] == q || q % s[i] == 0)
                throw std::invalid_argument(std::string("census: ") + which + " members must be coprime to the modulus");
            for (size_t j = i + 1; j < s.size(); ++j)
                if (s[i] == s[j]) throw std::invalid_argument(std::string("census: duplicate entries in ") + which);
        }
    };
    check_set(cfg.L_set, "L_set", 10'000);
    check_set(cfg.P_set, "P_set", 100'000);
    for (u64 l : cfg.L_set)
        for (u64 p : cfg.P_set)
            if (l == p) throw std::invalid_argument("census: L_set and P_set must be disjoint");
    if (cfg.R < 1) throw std::invalid_argument("census: R must be >= 1");
    if (cfg.M < 0) throw std::invalid_argument("census: M must be >= 0");
    const double lmax = static_cast<double>(*std::max_element(cfg.L_set.begin(), cfg.L_set.end()));
    const double pmax = static_cast<double>(*std::max_element(cfg.P_set.begin(), cfg.P_set.end()));
    // every product formed below must stay well inside i64
    if (static_cast<double>(cfg.R) * lmax * lmax * pmax > 1e17 ||
        static_cast<double>(cfg.M) * static_cast<double>(cfg.R) > 1e17 ||
        pmax * pmax * static_cast<double>(q) > 1e17)
        throw std::invalid_argument("census: parameter products overflow the integer range");
}

std::string span_note(const char* label, double have, double need, bool ok) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s %.0f %s %.0f", label, have, ok ? "<" : ">=", need);
    return buf;
}

struct Recorder {
    CensusReport& rep;
    void hit(u64 l1, u64 l2, u64 p1, u64 p2, i64 n1, i64 n2, i64 m, std::string reason) {
        ++rep.counterexample_count;
        if (rep.counterexamples.size() < 16)
            rep.counterexamples.push_back({l1, l2, p1, p2, n1, n2, m, std::move(reason)});
    }
};

struct Sampler {
    bool active = false;
    u64 threshold = 0;
    SplitMix64 rng;
    explicit Sampler(u64 seed) : rng(seed) {}
    void arm(u64 cap, double estimate) {
        if (cap == 0 || estimate <= static_cast<double>(cap)) return;
        double prob = static_cast<double>(cap) / estimate;
        active = true;
        threshold = static_cast<u64>(prob * 1.8446744073709552e19);
    }
    bool keep() { return !active || rng.next() < threshold; }
};

template <typename F>
void each_pair(const std::vector<u64>& s, bool distinct, F&& fn) {
    if (distinct) {
        for (u64 a : s)
            for (u64 b : s)
                if (a != b) fn(a, b);
    } else {
        for (u64 a : s) fn(a, a);
    }
}

}  // namespace

const char* census_family_name(CensusFamily family) {
    switch (family) {
        case CensusFamily::kDistinctRigidity: return "distinct-rigidity";
        case CensusFamily::kEqualRigidity: return "equal-rigidity";
        case CensusFamily::kDistinctForcedZero: return "distinct-forced-zero";
        case CensusFamily::kEqualForcedZero: return "equal-forced-zero";
        case CensusFamily::kDistinctProduct: return "distinct-product";
        case CensusFamily::kEqualProduct: return "equal-product";
        case CensusFamily::kDistinctProgression: return "distinct-progression";
        case CensusFamily::kEqualProgression: return "equal-progression";
    }
    return "unknown";
}

std::optional<CensusFamily> census_family_from(std::string_view name) {
    for (CensusFamily f : {CensusFamily::kDistinctRigidity, CensusFamily::kEqualRigidity,
                           CensusFamily::kDistinctForcedZero, CensusFamily::kEqualForcedZero,
                           CensusFamily::kDistinctProduct, CensusFamily::kEqualProduct,
                           CensusFamily::kDistinctProgression, CensusFamily::kEqualProgression}) {
        if (name == census_family_name(f)) return f;
    }
    return std::nullopt;
}

CensusReport congruence_census(const CensusConfig& cfg, CensusFamily family) {
    const FamilyShape fs = shape_of(family);
    validate(cfg, fs);

    const u64 q = cfg.modulus->q();
    const i64 qi = static_cast<i64>(q);
    const i64 R = cfg.R, M = cfg.M;
    const u64 lmax = *std::max_element(cfg.L_set.begin(), cfg.L_set.end());
    const u64 pmin = *std::min_element(cfg.P_set.begin(), cfg.P_set.end());
    const u64 pmax = *std::max_element(cfg.P_set.begin(), cfg.P_set.end());
    // the amplifier squares cancel across an equal pair, so the congruence
    // span that must fit under q drops to 2*R*pmax there
    const double lfac = fs.distinct ? static_cast<double>(lmax * lmax) : 1.0;

    CensusReport rep;
    rep.family = family;
    rep.q = q;
    rep.L_set = cfg.L_set;
    rep.P_set = cfg.P_set;
    rep.R = R;
    rep.M = M;
    rep.seed = cfg.seed;
    Recorder rec{rep};

    const double npair_l = fs.distinct
        ? static_cast<double>(cfg.L_set.size() * (cfg.L_set.size() - 1))
        : static_cast<double>(cfg.L_set.size());
    const double np = static_cast<double>(cfg.P_set.size());
    const double nfreq = 2.0 * static_cast<double>(R);
    const double nshift = 2.0 * static_cast<double>(M) + 1.0;

    Sampler samp(cfg.seed);
    switch (fs.branch) {
        case 0: case 2: samp.arm(cfg.sample_cap, npair_l * np * np * nfreq * nfreq); break;
        case 1: samp.arm(cfg.sample_cap, npair_l * np * nfreq * nfreq); break;
        case 3: samp.arm(cfg.sample_cap, npair_l * np * nshift * (np - 1.0 + nfreq)); break;
    }
    rep.sampled = samp.active;

    auto ell_sq = [](u64 l) { return static_cast<i64>(l * l); };

    switch (fs.branch) {
        case 0: {  // rigidity: congruence solutions are equalities, shifts unique
            const bool win_eq = 2.0 * static_cast<double>(R) * lfac * static_cast<double>(pmax) <
                                static_cast<double>(q);
            const bool win_m = 2.0 * static_cast<double>(M) <
                               static_cast<double>(pmin * pmin) * static_cast<double>(q);
            const bool win_r = R < qi;
            rep.window_satisfied = win_eq && win_m && win_r;
            rep.window_note =
                span_note("congruence span", 2.0 * R * lfac * pmax, static_cast<double>(q), win_eq) +
                "; " +
                span_note("shift span", 2.0 * static_cast<double>(M),
                          static_cast<double>(pmin * pmin) * static_cast<double>(q), win_m);
            each_pair(cfg.L_set, fs.distinct, [&](u64 l1, u64 l2) {
                for (u64 p1 : cfg.P_set)
                    for (u64 p2 : cfg.P_set)
                        for (i64 n1 = -R; n1 <= R; ++n1) {
                            if (n1 == 0 || mod_floor(n1, p1) == 0) continue;
                            for (i64 n2 = -R; n2 <= R; ++n2) {
                                if (n2 == 0 || mod_floor(n2, p2) == 0) continue;
                                if (!samp.keep()) continue;
                                ++rep.tuples;
                                const i64 lhs = n2 * ell_sq(l1) * static_cast<i64>(p2);
                                const i64 rhs = n1 * ell_sq(l2) * static_cast<i64>(p1);
                                if (mod_floor(lhs - rhs, q) != 0) continue;
                                ++rep.solutions;
                                if (lhs != rhs)
                                    rec.hit(l1, l2, p1, p2, n1, n2, 0,
                                            "congruence holds but the integer equality fails");
                                // admissible shifts form one class; a second member in range breaks uniqueness
                                u64 cls, mod;
                                if (p1 != p2) {
                                    const u64 a1 = mulmod(mod_floor(ell_sq(l1) * static_cast<i64>(p2), p1),
                                                          inv_mod(mod_floor(n1, p1), p1), p1);
                                    const u64 a2 = mulmod(mod_floor(-ell_sq(l2) * static_cast<i64>(p1), p2),
                                                          inv_mod(mod_floor(n2, p2), p2), p2);
                                    cls = crt2(a1, p1, a2, p2);
                                    mod = p1 * p2;
                                } else {
                                    const u64 c = mod_floor(
                                        static_cast<i64>(mulmod(inv_mod(mod_floor(n1, p1), p1),
                                                                mod_floor(ell_sq(l1), p1), p1)) -
                                            static_cast<i64>(mulmod(inv_mod(mod_floor(n2, p1), p1),
                                                                    mod_floor(ell_sq(l2), p1), p1)),
                                        p1);
                                    cls = c * p1;
                                    mod = p1 * p1;
                                }
                                cls = crt2(cls, mod, 0, q);
                                mod *= q;
                                i64 members = 0;
                                i64 witness = 0;
                                for_each_in_class(cls, mod, M, [&](i64 m) {
                                    ++members;
                                    witness = m;
                                });
                                if (members > 1)
                                    rec.hit(l1, l2, p1, p2, n1, n2, witness,
                                            "shift class has " + std::to_string(members) +
                                                " members in range, expected at most 1");
                            }
                        }
            });
            break;
        }
        case 1: {  // forced-zero: equal detection primes, q-congruence failing
            const bool win = static_cast<double>(M) < static_cast<double>(pmin) * static_cast<double>(q);
            const bool win_r = R < qi;
            rep.window_satisfied = win && win_r;
            rep.window_note =
                span_note("shift span", static_cast<double>(M),
                          static_cast<double>(pmin) * static_cast<double>(q), win) +
                "; stricter of the shift-span and progression-count readings";
            each_pair(cfg.L_set, fs.distinct, [&](u64 l1, u64 l2) {
                for (u64 p : cfg.P_set)
                    for (i64 n1 = -R; n1 <= R; ++n1) {
                        if (n1 == 0 || mod_floor(n1, p) == 0) continue;
                        for (i64 n2 = -R; n2 <= R; ++n2) {
                            if (n2 == 0 || mod_floor(n2, p) == 0) continue;
                            if (!samp.keep()) continue;
                            ++rep.tuples;
                            if (mod_floor(n2 * ell_sq(l1) - n1 * ell_sq(l2), q) == 0) continue;
                            const u64 c = mod_floor(
                                static_cast<i64>(mulmod(inv_mod(mod_floor(n1, p), p),
                                                        mod_floor(ell_sq(l1), p), p)) -
                                    static_cast<i64>(mulmod(inv_mod(mod_floor(n2, p), p),
                                                            mod_floor(ell_sq(l2), p), p)),
                                p);
                            const u64 cls = crt2(c * p, p * p, 0, q);
                            for_each_in_class(cls, p * p * q, M, [&](i64 m) {
                                ++rep.solutions;
                                if (m != 0)
                                    rec.hit(l1, l2, p, p, n1, n2, m,
                                            "nonzero shift survives the congruence system");
                            });
                        }
                    }
            });
            break;
        }
        case 2: {  // product: solutions factor as m*n1 = l1^2*p2, m*n2 = -l2^2*p1
            const double need = static_cast<double>(pmin) * static_cast<double>(q);
            const double have = static_cast<double>(M) * static_cast<double>(R) +
                                static_cast<double>(lmax * lmax) * static_cast<double>(pmax);
            const bool win = have < need && R < qi;
            rep.window_satisfied = win;
            rep.window_note = span_note("product span", have, need, have < need);
            each_pair(cfg.L_set, fs.distinct, [&](u64 l1, u64 l2) {
                for (u64 p1 : cfg.P_set)
                    for (u64 p2 : cfg.P_set)
                        for (i64 n1 = -R; n1 <= R; ++n1) {
                            if (n1 == 0 || mod_floor(n1, p1) == 0 || mod_floor(n1, q) == 0) continue;
                            for (i64 n2 = -R; n2 <= R; ++n2) {
                                if (n2 == 0 || mod_floor(n2, p2) == 0 || mod_floor(n2, q) == 0) continue;
                                if (!samp.keep()) continue;
                                ++rep.tuples;
                                // the two deep conditions share one shift class mod q iff this vanishes
                                if (mod_floor(n2 * ell_sq(l1) * static_cast<i64>(p2) +
                                                  n1 * ell_sq(l2) * static_cast<i64>(p1),
                                              q) != 0)
                                    continue;
                                u64 cls, mod;
                                if (p1 != p2) {
                                    const u64 a1 = mulmod(mod_floor(ell_sq(l1) * static_cast<i64>(p2), p1),
                                                          inv_mod(mod_floor(n1, p1), p1), p1);
                                    const u64 a2 = mulmod(mod_floor(-ell_sq(l2) * static_cast<i64>(p1), p2),
                                                          inv_mod(mod_floor(n2, p2), p2), p2);
                                    cls = crt2(a1, p1, a2, p2);
                                    mod = p1 * p2;
                                } else {
                                    const u64 c = mod_floor(
                                        static_cast<i64>(mulmod(inv_mod(mod_floor(n1, p1), p1),
                                                                mod_floor(ell_sq(l1), p1), p1)) -
                                            static_cast<i64>(mulmod(inv_mod(mod_floor(n2, p1), p1),
                                                                    mod_floor(ell_sq(l2), p1), p1)),
                                        p1);
                                    cls = c * p1;
                                    mod = p1 * p1;
                                }
                                const u64 aq = mulmod(mod_floor(ell_sq(l1) * static_cast<i64>(p2), q),
                                                      inv_mod(mod_floor(n1, q), q), q);
                                cls = crt2(cls, mod, aq, q);
                                mod *= q;
                                for_each_in_class(cls, mod, M, [&](i64 m) {
                                    if (m == 0) return;
                                    ++rep.solutions;
                                    if (m * n1 != ell_sq(l1) * static_cast<i64>(p2) ||
                                        m * n2 != -ell_sq(l2) * static_cast<i64>(p1))
                                        rec.hit(l1, l2, p1, p2, n1, n2, m,
                                                "solution escapes the product identity");
                                });
                            }
                        }
            });
            break;
        }
        case 3: {  // progression: per-shift class counts obey ceil(2R/p) + 1
            rep.window_satisfied = true;
            rep.window_note = "count bound is unconditional";
            each_pair(cfg.L_set, fs.distinct, [&](u64 l1, u64 l2) {
                for (u64 p1 : cfg.P_set)
                    for (u64 p2 : cfg.P_set) {
                        const i64 bound1 = ceildiv(2 * R, static_cast<i64>(p1)) + 1;
                        const i64 bound2 = ceildiv(2 * R, static_cast<i64>(p2)) + 1;
                        if (p1 != p2) {
                            for (i64 m = -M; m <= M; ++m) {
                                if (m == 0 || mod_floor(m, q) == 0) continue;
                                if (mod_floor(m, p1) == 0 || mod_floor(m, p2) == 0) continue;
                                if (!samp.keep()) continue;
                                ++rep.tuples;
                                const u64 a1 = mulmod(mod_floor(ell_sq(l1) * static_cast<i64>(p2), p1),
                                                      inv_mod(mod_floor(m, p1), p1), p1);
                                const u64 a2 = mulmod(mod_floor(-ell_sq(l2) * static_cast<i64>(p1), p2),
                                                      inv_mod(mod_floor(m, p2), p2), p2);
                                const i64 c1 = count_in_class(a1, p1, R);
                                const i64 c2 = count_in_class(a2, p2, R);
                                rep.solutions += static_cast<u64>(c1 * c2);
                                if (c1 > bound1)
                                    rec.hit(l1, l2, p1, p2, 0, 0, m,
                                            "n1 class count " + std::to_string(c1) + " exceeds " +
                                                std::to_string(bound1));
                                if (c2 > bound2)
                                    rec.hit(l1, l2, p1, p2, 0, 0, m,
                                            "n2 class count " + std::to_string(c2) + " exceeds " +
                                                std::to_string(bound2));
                            }
                        } else {
                            const u64 p = p1;
                            for (i64 m = -M; m <= M; ++m) {
                                if (m == 0 || mod_floor(m, q) == 0) continue;
                                if (mod_floor(m, p) != 0) continue;  // p must divide the shift here
                                const i64 mred = m / static_cast<i64>(p);
                                for (i64 n1 = -R; n1 <= R; ++n1) {
                                    if (n1 == 0 || mod_floor(n1, p) == 0) continue;
                                    if (!samp.keep()) continue;
                                    ++rep.tuples;
                                    const u64 r = mod_floor(
                                        static_cast<i64>(mulmod(inv_mod(mod_floor(n1, p), p),
                                                                mod_floor(ell_sq(l1), p), p)) -
                                            mred,
                                        p);
                                    if (r == 0) continue;  // empty class: n2 would need p | n2
                                    const u64 a2 = mulmod(mod_floor(ell_sq(l2), p), inv_mod(r, p), p);
                                    const i64 c2 = count_in_class(a2, p, R);
                                    rep.solutions += static_cast<u64>(c2);
                                    if (c2 > bound2)
                                        rec.hit(l1, l2, p, p, n1, 0, m,
                                                "n2 class count " + std::to_string(c2) + " exceeds " +
                                                    std::to_string(bound2));
                                }
                            }
                        }
                    }
            });
            break;
        }
    }
    return rep;
}

std::string CensusReport::to_json() const {
    nlohmann::ordered_json j;
    j["family"] = census_family_name(family);
    j["q"] = q;
    j["L"] = L_set;
    j["P"] = P_set;
    j["R"] = R;
    j["M"] = M;
    j["sampled"] = sampled;
    j["seed"] = seed;
    j["window"] = {{"satisfied", window_satisfied}, {"note", window_note}};
    j["tuples"] = tuples;
    j["solutions"] = solutions;
    j["counterexample_count"] = counterexample_count;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const CensusTuple& t : counterexamples) {
        nlohmann::ordered_json e;
        e["l1"] = t.ell1;
        e["l2"] = t.ell2;
        e["p1"] = t.p1;
        e["p2"] = t.p2;
        e["n1"] = t.n1;
        e["n2"] = t.n2;
        e["m"] = t.m;
        e["reason"] = t.reason;
        arr.push_back(std::move(e));
    }
    j["counterexamples"] = std::move(arr);
    return j.dump(2);
}

}  // namespace deltalab
