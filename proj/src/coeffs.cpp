#include "deltalab/coeffs.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace deltalab {

namespace {

i64 ipow_i64(u64 base, u64 exp) {
    i64 r = 1;
    for (u64 i = 0; i < exp; ++i) r *= static_cast<i64>(base);
    return r;
}

/// Exponents g and signs s of prod (1-x^n) = sum s x^g, all g <= limit.
std::vector<std::pair<u64, int>> pentagonal_terms(u64 limit) {
    std::vector<std::pair<u64, int>> out;
    out.emplace_back(0, 1);
    for (u64 j = 1;; ++j) {
        u64 g1 = j * (3 * j - 1) / 2;
        u64 g2 = j * (3 * j + 1) / 2;
        int s = (j % 2 == 0) ? 1 : -1;
        bool any = false;
        if (g1 <= limit) {
            out.emplace_back(g1, s);
            any = true;
        }
        if (g2 <= limit) {
            out.emplace_back(g2, s);
            any = true;
        }
        if (!any) break;
    }
    return out;
}

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& reason) {
    throw std::runtime_error("parse error at line " + std::to_string(line_no) + ": " + reason);
}

/// Strict base-10 integer: optional leading '-', digits, nothing else.
bool parse_int_strict(const std::string& s, i64& out) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (std::size_t j = i; j < s.size(); ++j) {
        if (s[j] < '0' || s[j] > '9') return false;
    }
    try {
        out = std::stoll(s);
    } catch (const std::exception&) {
        return false;
    }
    return std::to_string(out) == s;
}

}  // namespace

HeckeCoefficients::HeckeCoefficients(u64 level, u64 weight, std::string label,
                                     std::vector<i64> a_one_indexed)
    : level_(level),
      weight_(weight),
      nmax_(a_one_indexed.empty() ? 0 : a_one_indexed.size() - 1),
      label_(std::move(label)),
      a_(std::move(a_one_indexed)) {
    if (nmax_ < 1) throw std::invalid_argument("empty coefficient table");
}

HeckeCoefficients HeckeCoefficients::eta_level11(u64 nmax) {
    if (nmax < 1 || nmax > 1000000) {
        throw std::invalid_argument("eta backend horizon out of range");
    }
    u64 m = nmax;
    auto pent = pentagonal_terms(m - 1);
    std::vector<i64> acc(m, 0);
    for (auto [g1, s1] : pent) {
        for (auto [g2, s2] : pent) {
            u64 e = g1 + g2;
            if (e < m) acc[e] += s1 * s2;
        }
    }
    std::vector<std::pair<u64, int>> pent11;
    for (auto [g, s] : pentagonal_terms((m - 1) / 11)) pent11.emplace_back(11 * g, s);
    std::vector<i64> tmp(m);
    for (int pass = 0; pass < 2; ++pass) {
        std::fill(tmp.begin(), tmp.end(), 0);
        for (auto [e, s] : pent11) {
            if (s > 0) {
                for (u64 i = e; i < m; ++i) tmp[i] += acc[i - e];
            } else {
                for (u64 i = e; i < m; ++i) tmp[i] -= acc[i - e];
            }
        }
        std::swap(acc, tmp);
    }
    std::vector<i64> a(nmax + 1, 0);
    for (u64 n = 1; n <= nmax; ++n) a[n] = acc[n - 1];
    return HeckeCoefficients(11, 2, "11.2.a.a", std::move(a));
}

HeckeCoefficients HeckeCoefficients::load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("file not found: " + path);
    return parse(in);
}

HeckeCoefficients HeckeCoefficients::parse(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) parse_fail(1, "missing header");
    if (!line.empty() && line.back() == '\r') parse_fail(1, "CR line ending");

    std::istringstream hdr(line);
    std::string f_level, f_weight, f_label, f_nmax, extra;
    if (!(hdr >> f_level >> f_weight >> f_label >> f_nmax) || (hdr >> extra)) {
        parse_fail(1, "bad header");
    }
    auto field = [&](const std::string& tok, const std::string& key) -> std::string {
        if (tok.rfind(key + "=", 0) != 0) parse_fail(1, "expected " + key + "=");
        return tok.substr(key.size() + 1);
    };
    i64 level = 0, weight = 0, nmax = 0;
    if (!parse_int_strict(field(f_level, "LEVEL"), level) || level < 2 ||
        !is_prime(static_cast<u64>(level))) {
        parse_fail(1, "LEVEL must be prime");
    }
    if (!parse_int_strict(field(f_weight, "WEIGHT"), weight) || weight < 2 || weight % 2 != 0) {
        parse_fail(1, "bad WEIGHT");
    }
    std::string label = field(f_label, "LABEL");
    if (label.empty()) parse_fail(1, "bad LABEL");
    if (!parse_int_strict(field(f_nmax, "NMAX"), nmax) || nmax < 1) parse_fail(1, "bad NMAX");

    std::vector<i64> a(static_cast<std::size_t>(nmax) + 1, 0);
    for (i64 n = 1; n <= nmax; ++n) {
        std::size_t line_no = static_cast<std::size_t>(n) + 1;
        if (!std::getline(in, line)) {
            parse_fail(line_no, "missing coefficient at n=" + std::to_string(n));
        }
        if (!line.empty() && line.back() == '\r') parse_fail(line_no, "CR line ending");
        std::size_t sp = line.find(' ');
        if (sp == std::string::npos) parse_fail(line_no, "expected '<n> <a_n>'");
        i64 got_n = 0, got_a = 0;
        if (!parse_int_strict(line.substr(0, sp), got_n) ||
            !parse_int_strict(line.substr(sp + 1), got_a)) {
            parse_fail(line_no, "expected '<n> <a_n>'");
        }
        if (got_n != n) {
            parse_fail(line_no, "missing coefficient at n=" + std::to_string(n));
        }
        a[static_cast<std::size_t>(n)] = got_a;
    }
    if (std::getline(in, line) && !line.empty()) {
        parse_fail(static_cast<std::size_t>(nmax) + 2, "trailing content");
    }

    HeckeCoefficients out(static_cast<u64>(level), static_cast<u64>(weight), label, std::move(a));
    out.validate();
    return out;
}

void HeckeCoefficients::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << "LEVEL=" << level_ << " WEIGHT=" << weight_ << " LABEL=" << label_
        << " NMAX=" << nmax_ << "\n";
    for (u64 n = 1; n <= nmax_; ++n) out << n << " " << a_[n] << "\n";
    if (!out) throw std::runtime_error("cannot write file: " + path);
}

void HeckeCoefficients::validate() const {
    if (a_[1] != 1) throw std::runtime_error("a_1 must be 1");
    // Smallest-prime-factor sieve; s[n] = 0 marks n prime (or n < 2).
    using u32_local = unsigned int;
    std::vector<u32_local> s(nmax_ + 1, 0);
    for (u64 i = 2; i * i <= nmax_; ++i) {
        if (s[i] != 0) continue;
        for (u64 j = i * i; j <= nmax_; j += i) {
            if (s[j] == 0) s[j] = static_cast<u32_local>(i);
        }
    }
    for (u64 n = 2; n <= nmax_; ++n) {
        u64 p = (s[n] == 0) ? n : s[n];
        if (p == n) {
            i128 sq = static_cast<i128>(a_[n]) * a_[n];
            if (p == level_) {
                i128 want = static_cast<i128>(ipow_i64(level_, weight_ - 2));
                if (sq != want) {
                    throw std::runtime_error("level coefficient violated at p=" +
                                             std::to_string(p));
                }
            } else {
                i128 bound = static_cast<i128>(4) * ipow_i64(p, weight_ - 1);
                if (sq > bound) {
                    throw std::runtime_error("Deligne bound violated at p=" + std::to_string(p));
                }
            }
            continue;
        }
        u64 pr = p, rest = n / p;
        while (rest % p == 0) {
            pr *= p;
            rest /= p;
        }
        if (rest > 1) {
            if (a_[n] != a_[pr] * a_[rest]) {
                throw std::runtime_error("multiplicativity violated at n=" + std::to_string(n));
            }
        } else if (p == level_) {
            if (a_[n] != a_[p] * a_[n / p]) {
                throw std::runtime_error("level recursion violated at n=" + std::to_string(n));
            }
        } else {
            i64 expect = a_[p] * a_[n / p] - ipow_i64(p, weight_ - 1) * a_[n / (p * p)];
            if (a_[n] != expect) {
                throw std::runtime_error("Hecke recursion violated at n=" + std::to_string(n));
            }
        }
    }
}

double HeckeCoefficients::rankin_selberg_ratio(u64 X) const {
    check_horizon(X);
    KahanSum acc;
    for (u64 n = 1; n <= X; ++n) {
        double l = lambda(n);
        acc.add(l * l);
    }
    return acc.value() / static_cast<double>(X);
}

}  // namespace deltalab
