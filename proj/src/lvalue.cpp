#include "deltalab/lvalue.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

#include "deltalab/numeric.hpp"

namespace deltalab {

cplx dirichlet_series_smoothed(const HeckeCoefficients& f, const DirichletCharacter& chi,
                               double X) {
    if (X <= 0.0) throw std::invalid_argument("smoothing scale must be positive");
    if (static_cast<double>(f.nmax()) < 10.0 * X)
        throw std::out_of_range("coefficient horizon insufficient: need 10x the smoothing scale");
    const u64 cut = std::min(f.nmax(), static_cast<u64>(std::ceil(45.0 * X)));
    KahanSumC acc;
    for (u64 n = 1; n <= cut; ++n) {
        const cplx c = chi.value_u(n);
        if (c == cplx(0.0, 0.0)) continue;
        acc.add(c * (f.lambda(n) * std::exp(-static_cast<double>(n) / X) /
                     std::sqrt(static_cast<double>(n))));
    }
    return acc.value();
}

LValueResult lvalue_central(const HeckeCoefficients& f, const DirichletCharacter& chi) {
    if (chi.is_trivial())
        throw std::invalid_argument("twist character must be nontrivial");
    if (f.level() != chi.modulus())
        throw std::invalid_argument("coefficient level must equal the twist modulus");
    const double q = static_cast<double>(chi.modulus());
    const cplx narrow = dirichlet_series_smoothed(f, chi, 3.0 * q);
    const cplx wide = dirichlet_series_smoothed(f, chi, 6.0 * q);
    LValueResult res;
    res.value = wide;
    res.stability_gap = std::abs(narrow - wide);
    res.accepted = res.stability_gap < 1e-3 * (1.0 + std::abs(wide));
    res.truncation = std::min(f.nmax(), static_cast<u64>(std::ceil(45.0 * 6.0 * q)));
    res.conductor = chi.modulus() * chi.modulus();
    return res;
}

namespace {

ExponentStudyRow make_row(u64 q, std::string chi_index, const LValueResult& r) {
    ExponentStudyRow row;
    row.q = q;
    row.chi_index = std::move(chi_index);
    row.re = r.value.real();
    row.im = r.value.imag();
    row.abs = std::abs(r.value);
    row.stability_gap = r.stability_gap;
    const double qd = static_cast<double>(q);
    row.r_conv = row.abs / std::sqrt(qd);
    row.r_sub = row.abs / std::pow(qd, 0.5 - 1.0 / 12.0);
    return row;
}

}  // namespace

ExponentStudy exponent_study(const std::vector<std::string>& coefficient_files) {
    ExponentStudy study;
    for (const std::string& path : coefficient_files) {
        try {
            const HeckeCoefficients f = HeckeCoefficients::load_file(path);
            const u64 q = f.level();
            if (!is_prime(q))
                throw std::invalid_argument("level must be prime for the twist study");
            auto mod = std::make_shared<const PrimeModulus>(q);
            size_t best = study.rows.size();
            double best_abs = -1.0;
            for (u64 t = 1; t + 1 < q; ++t) {
                const DirichletCharacter chi(mod, t);
                const LValueResult r = lvalue_central(f, chi);
                study.rows.push_back(make_row(q, std::to_string(t), r));
                if (study.rows.back().abs > best_abs) {
                    best_abs = study.rows.back().abs;
                    best = study.rows.size() - 1;
                }
            }
            ExponentStudyRow summary = study.rows[best];
            summary.chi_index = "max";
            if (summary.r_conv > 10.0)
                study.flags.push_back("level " + std::to_string(q) +
                                      ": convexity ratio exceeds 10");
            study.rows.push_back(std::move(summary));
        } catch (const std::exception& e) {
            study.errors.push_back(path + ": " + e.what());
        }
    }
    return study;
}

std::string ExponentStudy::to_csv() const {
    std::string out = "q,chi_index,re,im,abs,stability_gap,r_conv,r_sub\n";
    char buf[256];
    for (const ExponentStudyRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%llu,%s,%.12e,%.12e,%.12e,%.12e,%.12e,%.12e\n",
                      static_cast<unsigned long long>(r.q), r.chi_index.c_str(), r.re,
                      r.im, r.abs, r.stability_gap, r.r_conv, r.r_sub);
        out += buf;
    }
    return out;
}

}  // namespace deltalab
