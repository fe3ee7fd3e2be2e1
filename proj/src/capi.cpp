#include "deltalab.h"

#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "deltalab/arith.hpp"
#include "deltalab/census.hpp"
#include "deltalab/coeffs.hpp"
#include "deltalab/expsums.hpp"
#include "deltalab/lvalue.hpp"
#include "deltalab/numeric.hpp"
#include "deltalab/pipeline.hpp"
#include "deltalab/transforms.hpp"

using namespace deltalab;
using ojson = nlohmann::ordered_json;

struct dl_context {
    std::string last_error;
    std::map<u64, std::shared_ptr<const HeckeCoefficients>> eta_cache;
    std::map<std::string, std::shared_ptr<const HeckeCoefficients>> file_cache;
};

namespace {

constexpr const char* kVersion = "1.0.0";

/// Distinguishes missing/unreadable files from config mistakes.
struct io_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

ojson parse_config(const char* config_json) {
    if (config_json == nullptr || *config_json == '\0') return ojson::object();
    ojson j = ojson::parse(config_json);  // json exceptions map to DL_EINVAL
    if (!j.is_object()) throw std::invalid_argument("configuration must be a JSON object");
    return j;
}

i64 get_int(const ojson& cfg, const char* key, i64 def) {
    if (!cfg.contains(key)) return def;
    if (!cfg[key].is_number_integer())
        throw std::invalid_argument(std::string(key) + " must be an integer");
    return cfg[key].get<i64>();
}

u64 get_uint(const ojson& cfg, const char* key, u64 def) {
    i64 v = get_int(cfg, key, static_cast<i64>(def));
    if (v < 0) throw std::invalid_argument(std::string(key) + " must be nonnegative");
    return static_cast<u64>(v);
}

double get_real(const ojson& cfg, const char* key, double def) {
    if (!cfg.contains(key)) return def;
    if (!cfg[key].is_number()) throw std::invalid_argument(std::string(key) + " must be a number");
    return cfg[key].get<double>();
}

bool get_flag(const ojson& cfg, const char* key, bool def) {
    if (!cfg.contains(key)) return def;
    if (!cfg[key].is_boolean()) throw std::invalid_argument(std::string(key) + " must be a boolean");
    return cfg[key].get<bool>();
}

std::string get_text(const ojson& cfg, const char* key, const std::string& def) {
    if (!cfg.contains(key)) return def;
    if (!cfg[key].is_string()) throw std::invalid_argument(std::string(key) + " must be a string");
    return cfg[key].get<std::string>();
}

std::vector<u64> get_prime_list(const ojson& cfg, const char* key) {
    std::vector<u64> out;
    if (!cfg.contains(key)) return out;
    if (!cfg[key].is_array())
        throw std::invalid_argument(std::string(key) + " must be an array of integers");
    for (const auto& e : cfg[key]) {
        if (!e.is_number_integer() || e.get<i64>() < 1)
            throw std::invalid_argument(std::string(key) + " must be an array of positive integers");
        out.push_back(e.get<u64>());
    }
    return out;
}

void apply_threads(const ojson& cfg) {
    if (!cfg.contains("threads")) return;
    i64 t = get_int(cfg, "threads", 0);
    if (t < 1) throw std::invalid_argument("threads must be >= 1");
    setenv("DELTA_LAB_THREADS", std::to_string(t).c_str(), 1);
}

std::shared_ptr<const HeckeCoefficients> resolve_coeffs(dl_context* ctx, const ojson& cfg,
                                                        u64 default_horizon) {
    const std::string spec = get_text(cfg, "coeffs", "eta11");
    if (spec == "eta11") {
        const u64 horizon = get_uint(cfg, "horizon", default_horizon);
        auto it = ctx->eta_cache.find(horizon);
        if (it != ctx->eta_cache.end()) return it->second;
        auto table = std::make_shared<const HeckeCoefficients>(
            HeckeCoefficients::eta_level11(horizon));
        ctx->eta_cache.emplace(horizon, table);
        return table;
    }
    auto it = ctx->file_cache.find(spec);
    if (it != ctx->file_cache.end()) return it->second;
    try {
        auto table =
            std::make_shared<const HeckeCoefficients>(HeckeCoefficients::load_file(spec));
        ctx->file_cache.emplace(spec, table);
        return table;
    } catch (const std::runtime_error& e) {
        throw io_failure(e.what());
    }
}

ojson num2(cplx z) { return ojson::array({z.real(), z.imag()}); }

ojson envelope(const char* op, ojson resolved) {
    ojson rep;
    rep["op"] = op;
    rep["version"] = kVersion;
    rep["config"] = std::move(resolved);
    return rep;
}

int run_guard(dl_context* ctx, char** report_json,
              const std::function<std::pair<bool, ojson>()>& body) {
    if (ctx == nullptr) return DL_ERROR;
    if (report_json == nullptr) {
        ctx->last_error = "report output pointer is null";
        return DL_EINVAL;
    }
    *report_json = nullptr;
    try {
        auto [pass, rep] = body();
        rep["pass"] = pass;
        *report_json = dup_string(rep.dump(2));
        if (*report_json == nullptr) {
            ctx->last_error = "out of memory";
            return DL_ERROR;
        }
        ctx->last_error.clear();
        return pass ? DL_OK : DL_CHECK_FAILED;
    } catch (const nlohmann::json::exception& e) {
        ctx->last_error = std::string("configuration: ") + e.what();
        return DL_EINVAL;
    } catch (const io_failure& e) {
        ctx->last_error = e.what();
        return DL_EIO;
    } catch (const std::invalid_argument& e) {
        ctx->last_error = e.what();
        return DL_EINVAL;
    } catch (const std::out_of_range& e) {
        ctx->last_error = e.what();
        return DL_EINVAL;
    } catch (const std::exception& e) {
        ctx->last_error = e.what();
        return DL_ERROR;
    }
}

// ---------------------------------------------------------------------------
// charsum

struct CharsumTally {
    u64 closed_cases = 0, generic_cases = 0;
    double max_closed_error = 0.0, max_generic_ratio = 0.0;
    std::optional<ojson> first_failure;

    void take(const DirichletCharacter& chi, i64 m, i64 alpha, i64 gamma, i64 n1, i64 n2,
              double tol, double bound) {
        const CorrelationValue cv = correlation_closed(chi, m, alpha, gamma, n1, n2);
        const cplx brute = correlation_brute(chi, m, alpha, gamma, n1, n2);
        bool ok;
        if (cv.closed_form) {
            ++closed_cases;
            const double err = std::abs(cv.value - brute);
            max_closed_error = std::max(max_closed_error, err);
            ok = err <= tol;
        } else {
            ++generic_cases;
            const double mag = std::abs(brute);
            max_generic_ratio =
                std::max(max_generic_ratio, mag / std::sqrt(static_cast<double>(chi.modulus())));
            ok = mag <= bound;
        }
        if (!ok && !first_failure) {
            ojson f;
            f["chi_index"] = chi.index();
            f["m"] = m;
            f["alpha"] = alpha;
            f["gamma"] = gamma;
            f["n1"] = n1;
            f["n2"] = n2;
            f["branch"] = cv.branch;
            f["brute"] = num2(brute);
            if (cv.closed_form) f["closed_form"] = num2(cv.value);
            first_failure = std::move(f);
        }
    }
};

std::pair<bool, ojson> do_charsum(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    const u64 q = get_uint(cfg, "q", 0);
    auto mod = std::make_shared<const PrimeModulus>(q);  // validates primality
    std::string mode = get_text(cfg, "mode", q <= 13 ? "exhaustive" : "sample");
    if (mode != "exhaustive" && mode != "sample")
        throw std::invalid_argument("mode must be \"exhaustive\" or \"sample\"");
    if (mode == "exhaustive" && q > 13)
        throw std::invalid_argument("exhaustive sweep supported for q <= 13; use sampling");
    const u64 samples = get_uint(cfg, "samples", 100000);
    const u64 seed = get_uint(cfg, "seed", 1);

    const double tol = 1e-8 * static_cast<double>(q);
    const double bound = static_cast<double>(q);

    ojson resolved;
    resolved["q"] = q;
    resolved["mode"] = mode;
    if (mode == "sample") {
        resolved["samples"] = samples;
        resolved["seed"] = seed;
    }
    resolved["closed_form_tolerance"] = tol;
    resolved["generic_bound"] = bound;

    std::vector<DirichletCharacter> chars;
    for (u64 t = 1; t + 1 < q; ++t) chars.emplace_back(mod, t);

    CharsumTally tally;
    if (mode == "exhaustive") {
        for (const DirichletCharacter& chi : chars)
            for (u64 m = 0; m < q; ++m)
                for (u64 alpha = 1; alpha < q; ++alpha)
                    for (u64 gamma = 1; gamma < q; ++gamma)
                        for (u64 n1 = 1; n1 < q; ++n1)
                            for (u64 n2 = 1; n2 < q; ++n2)
                                tally.take(chi, m, alpha, gamma, n1, n2, tol, bound);
    } else {
        SplitMix64 rng(seed);
        for (u64 i = 0; i < samples; ++i) {
            const DirichletCharacter& chi = chars[rng.below(chars.size())];
            const i64 m = static_cast<i64>(rng.below(q));
            const i64 alpha = static_cast<i64>(1 + rng.below(q - 1));
            const i64 gamma = static_cast<i64>(1 + rng.below(q - 1));
            const i64 n1 = static_cast<i64>(1 + rng.below(q - 1));
            const i64 n2 = static_cast<i64>(1 + rng.below(q - 1));
            tally.take(chi, m, alpha, gamma, n1, n2, tol, bound);
        }
    }

    ojson rep = envelope("charsum", std::move(resolved));
    ojson checks;
    checks["closed_form_cases"] = tally.closed_cases;
    checks["generic_cases"] = tally.generic_cases;
    checks["max_closed_form_error"] = tally.max_closed_error;
    checks["max_generic_ratio"] = tally.max_generic_ratio;
    rep["checks"] = std::move(checks);
    rep["first_failure"] = tally.first_failure ? *tally.first_failure : ojson(nullptr);
    (void)ctx;
    return {!tally.first_failure.has_value(), std::move(rep)};
}

// ---------------------------------------------------------------------------
// delta

std::pair<bool, ojson> do_delta(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    u64 q_min = get_uint(cfg, "q_min", 5);
    u64 q_max = get_uint(cfg, "q_max", 997);
    if (cfg.contains("q")) q_min = q_max = get_uint(cfg, "q", 0);
    if (q_min < 5 || q_max < q_min || q_max > 20000)
        throw std::invalid_argument("need 5 <= q_min <= q_max <= 20000");
    const double tol = 1e-9;

    ojson resolved;
    resolved["q_min"] = q_min;
    resolved["q_max"] = q_max;
    resolved["tolerance"] = tol;

    u64 primes_checked = 0, worst_q = 0;
    double max_error = 0.0;
    for (u64 q = q_min; q <= q_max; ++q) {
        if (!is_prime(q)) continue;
        ++primes_checked;
        const double err = delta_identity_max_error_prime(q);
        if (err > max_error) {
            max_error = err;
            worst_q = q;
        }
    }
    if (primes_checked == 0) throw std::invalid_argument("no primes in the requested range");

    ojson rep = envelope("delta", std::move(resolved));
    rep["primes_checked"] = primes_checked;
    rep["max_error"] = max_error;
    rep["worst_q"] = worst_q;
    (void)ctx;
    return {max_error < tol, std::move(rep)};
}

// ---------------------------------------------------------------------------
// poisson

std::pair<bool, ojson> do_poisson(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    const u64 q = get_uint(cfg, "q", 11);
    auto mod = std::make_shared<const PrimeModulus>(q);
    const u64 chi_index = get_uint(cfg, "chi_index", 1);
    const DirichletCharacter chi(mod, chi_index);
    const double N = get_real(cfg, "N", 40.0);

    struct Case {
        i64 alpha;
        u64 ell, c;
        double N;
    };
    std::vector<Case> cases;
    if (cfg.contains("cases")) {
        if (!cfg["cases"].is_array()) throw std::invalid_argument("cases must be an array");
        for (const auto& e : cfg["cases"]) {
            if (!e.is_object()) throw std::invalid_argument("each case must be an object");
            cases.push_back({get_int(e, "alpha", 1), get_uint(e, "ell", 1),
                             get_uint(e, "c", 1), get_real(e, "N", N)});
        }
    } else {
        // deterministic sweep over a modulus pool mixing split, inert,
        // level-sharing and composite c
        const u64 pool[] = {1, 2, 3, 7, 13, 14, q, 2 * q, 7 * q, 13 * q};
        const u64 sweep = get_uint(cfg, "sweep", 50);
        const u64 seed = get_uint(cfg, "seed", 1);
        SplitMix64 rng(seed);
        while (cases.size() < sweep) {
            const u64 c = pool[rng.below(10)];
            i64 alpha = static_cast<i64>(1 + rng.below(2 * c + 3));
            while (std::gcd(mod_floor(alpha, c), c) != 1) ++alpha;
            const u64 ell = 1 + rng.below(3);
            cases.push_back({alpha, ell, c, N});
        }
    }
    if (cases.empty()) throw std::invalid_argument("no cases to run");

    ojson resolved;
    resolved["q"] = q;
    resolved["chi_index"] = chi_index;
    if (!cfg.contains("cases")) {
        resolved["sweep"] = cases.size();
        resolved["seed"] = get_uint(cfg, "seed", 1);
        resolved["N"] = N;
    }

    ojson out = ojson::array();
    bool all = true;
    double max_diff = 0.0;
    for (const Case& k : cases) {
        const VerifyReport r = poisson_verify(chi, k.alpha, k.ell, k.c, k.N);
        ojson e;
        e["alpha"] = k.alpha;
        e["ell"] = k.ell;
        e["c"] = k.c;
        e["N"] = k.N;
        e["lhs"] = num2(r.lhs);
        e["rhs"] = num2(r.rhs);
        e["abs_diff"] = r.abs_diff;
        e["claimed_bound"] = r.claimed_bound;
        e["tail_bound"] = r.tail_bound;
        e["pass"] = r.pass;
        out.push_back(std::move(e));
        all = all && r.pass;
        max_diff = std::max(max_diff, r.abs_diff);
    }

    ojson rep = envelope("poisson", std::move(resolved));
    rep["cases"] = std::move(out);
    rep["max_abs_diff"] = max_diff;
    (void)ctx;
    return {all, std::move(rep)};
}

// ---------------------------------------------------------------------------
// voronoi

std::pair<bool, ojson> do_voronoi(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    auto coeffs = resolve_coeffs(ctx, cfg, 300000);

    struct Case {
        i64 alpha;
        u64 c;
        double dilation;
        std::optional<cplx> eta;
    };
    std::vector<Case> cases;
    if (cfg.contains("cases")) {
        if (!cfg["cases"].is_array()) throw std::invalid_argument("cases must be an array");
        for (const auto& e : cfg["cases"]) {
            if (!e.is_object()) throw std::invalid_argument("each case must be an object");
            Case k{get_int(e, "alpha", 1), get_uint(e, "c", 1), get_real(e, "dilation", 3240.0),
                   std::nullopt};
            if (e.contains("eta")) {
                if (!e["eta"].is_array() || e["eta"].size() != 2)
                    throw std::invalid_argument("eta must be a [re, im] pair");
                k.eta = cplx(e["eta"][0].get<double>(), e["eta"][1].get<double>());
            }
            cases.push_back(k);
        }
    } else {
        cases = {{1, 1, 3240.0, std::nullopt},
                 {1, 2, 12960.0, std::nullopt},
                 {2, 3, 29160.0, std::nullopt},
                 {3, 7, 21560.0, std::nullopt}};
    }
    if (cases.empty()) throw std::invalid_argument("no cases to run");

    ojson resolved;
    resolved["coeffs"] = get_text(cfg, "coeffs", "eta11");
    resolved["horizon"] = coeffs->nmax();
    resolved["case_count"] = cases.size();

    ojson out = ojson::array();
    bool all = true;
    std::optional<cplx> chained_eta;
    cplx first_fit{0.0, 0.0};
    for (const Case& k : cases) {
        // the first case fits the dual constant; later ones must close the
        // identity with the same constant unless the config pins their own
        std::optional<cplx> eta = k.eta ? k.eta : chained_eta;
        const VerifyReport r = voronoi_verify(*coeffs, k.alpha, k.c, k.dilation, eta);
        if (r.eta_was_fitted && !chained_eta) {
            chained_eta = r.fitted_eta;
            first_fit = r.fitted_eta;
        }
        ojson e;
        e["alpha"] = k.alpha;
        e["c"] = k.c;
        e["dilation"] = k.dilation;
        e["lhs"] = num2(r.lhs);
        e["rhs"] = num2(r.rhs);
        e["rel_diff"] = r.rel_diff;
        e["claimed_bound"] = r.claimed_bound;
        e["tail_bound"] = r.tail_bound;
        e["truncation"] = r.truncation;
        e["eta"] = num2(r.eta_was_fitted ? r.fitted_eta : (eta ? *eta : cplx{0.0, 0.0}));
        e["eta_fitted"] = r.eta_was_fitted;
        e["pass"] = r.pass;
        out.push_back(std::move(e));
        all = all && r.pass;
    }

    ojson rep = envelope("voronoi", std::move(resolved));
    rep["cases"] = std::move(out);
    rep["fitted_eta"] = num2(first_fit);
    rep["fitted_eta_modulus_error"] = std::abs(std::abs(first_fit) - 1.0);
    return {all, std::move(rep)};
}

// ---------------------------------------------------------------------------
// pipeline

std::pair<bool, ojson> do_pipeline(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    const u64 q = get_uint(cfg, "q", 11);
    auto mod = std::make_shared<const PrimeModulus>(q);
    auto coeffs = resolve_coeffs(ctx, cfg, 1000000);

    PipelineConfig pc;
    pc.modulus = mod;
    pc.coeffs = coeffs;
    pc.chi_index = get_uint(cfg, "chi_index", 1);
    pc.beta = get_real(cfg, "beta", pc.beta);
    pc.amplifier_exponent = static_cast<int>(get_int(cfg, "amp", pc.amplifier_exponent));
    pc.eps = get_real(cfg, "eps", pc.eps);
    pc.seed = get_uint(cfg, "seed", pc.seed);
    pc.radius_scale = get_real(cfg, "radius_scale", pc.radius_scale);
    pc.dual_terms_cap = get_uint(cfg, "dual_terms_cap", pc.dual_terms_cap);
    pc.run_dual = get_flag(cfg, "run_dual", pc.run_dual);
    pc.run_dyadic = get_flag(cfg, "run_dyadic", pc.run_dyadic);

    const double N_hint = get_real(cfg, "N", 0.0);
    const std::vector<u64> L_hint = get_prime_list(cfg, "L");
    const std::vector<u64> P_hint = get_prime_list(cfg, "P");

    ojson planner_info(nullptr);
    if (N_hint > 0.0 && !L_hint.empty() && !P_hint.empty()) {
        pc.N = N_hint;
        pc.L_set = L_hint;
        pc.P_set = P_hint;
    } else {
        PlannerResult plan = parameter_planner(mod, pc.beta, pc.amplifier_exponent, pc.eps,
                                               coeffs, pc.chi_index, N_hint, L_hint, P_hint);
        plan.config.seed = pc.seed;
        plan.config.radius_scale = pc.radius_scale;
        plan.config.dual_terms_cap = pc.dual_terms_cap;
        plan.config.run_dual = pc.run_dual;
        plan.config.run_dyadic = pc.run_dyadic;
        pc = plan.config;
        ojson info;
        info["mode"] = plan.mode;
        info["window_empty"] = plan.window_empty;
        ojson det;
        for (const auto& [k, v] : plan.details) det[k] = v;
        info["details"] = std::move(det);
        planner_info = std::move(info);
    }

    PipelineRun run(pc);
    const bool all = run.run_all();

    ojson resolved;
    resolved["q"] = q;
    resolved["chi_index"] = pc.chi_index;
    resolved["coeffs"] = get_text(cfg, "coeffs", "eta11");
    resolved["horizon"] = coeffs->nmax();
    resolved["N"] = pc.N;
    resolved["beta"] = pc.beta;
    resolved["amp"] = pc.amplifier_exponent;
    resolved["L"] = pc.L_set;
    resolved["P"] = pc.P_set;
    resolved["eps"] = pc.eps;
    resolved["seed"] = pc.seed;
    resolved["radius_scale"] = pc.radius_scale;
    resolved["dual_terms_cap"] = pc.dual_terms_cap;
    resolved["run_dual"] = pc.run_dual;
    resolved["run_dyadic"] = pc.run_dyadic;

    ojson rep = envelope("pipeline", std::move(resolved));
    rep["planner"] = std::move(planner_info);
    rep["transcript"] = ojson::parse(run.transcript().to_json());
    return {all, std::move(rep)};
}

// ---------------------------------------------------------------------------
// census

std::pair<bool, ojson> do_census(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    const u64 q = get_uint(cfg, "q", 0);
    auto mod = std::make_shared<const PrimeModulus>(q);

    const std::string family_name = get_text(cfg, "family", "");
    const auto family = census_family_from(family_name);
    if (!family)
        throw std::invalid_argument("unknown census family: " + family_name);

    CensusConfig cc;
    cc.modulus = mod;
    cc.L_set = get_prime_list(cfg, "L");
    cc.P_set = get_prime_list(cfg, "P");
    cc.R = get_int(cfg, "R", 0);
    cc.M = get_int(cfg, "M", 0);
    cc.sample_cap = get_uint(cfg, "sample_cap", 0);
    cc.seed = get_uint(cfg, "seed", 1);

    const CensusReport res = congruence_census(cc, *family);

    ojson resolved;
    resolved["q"] = q;
    resolved["family"] = family_name;
    resolved["L"] = cc.L_set;
    resolved["P"] = cc.P_set;
    resolved["R"] = cc.R;
    resolved["M"] = cc.M;
    resolved["sample_cap"] = cc.sample_cap;
    resolved["seed"] = cc.seed;

    ojson rep = envelope("census", std::move(resolved));
    rep["report"] = ojson::parse(res.to_json());
    (void)ctx;
    return {res.clean(), std::move(rep)};
}

// ---------------------------------------------------------------------------
// lvalue

std::pair<bool, ojson> do_lvalue(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    const u64 q = get_uint(cfg, "q", 11);
    auto mod = std::make_shared<const PrimeModulus>(q);
    auto coeffs = resolve_coeffs(ctx, cfg, std::max<u64>(10000, 300 * q));
    if (coeffs->level() != q)
        throw std::invalid_argument("coefficient level must equal the twist modulus");

    std::vector<u64> indices;
    const std::string which =
        cfg.contains("chi_index") && cfg["chi_index"].is_string()
            ? cfg["chi_index"].get<std::string>()
            : "";
    if (which == "all" || !cfg.contains("chi_index")) {
        for (u64 t = 1; t + 1 < q; ++t) indices.push_back(t);
    } else if (!which.empty()) {
        throw std::invalid_argument("chi_index must be an integer or \"all\"");
    } else {
        indices.push_back(get_uint(cfg, "chi_index", 1));
    }

    ojson resolved;
    resolved["q"] = q;
    resolved["chi_index"] = which.empty() && cfg.contains("chi_index")
                                ? ojson(indices[0])
                                : ojson("all");
    resolved["coeffs"] = get_text(cfg, "coeffs", "eta11");
    resolved["horizon"] = coeffs->nmax();

    ojson values = ojson::array();
    bool all = true;
    for (u64 t : indices) {
        const DirichletCharacter chi(mod, t);
        const LValueResult r = lvalue_central(*coeffs, chi);
        ojson e;
        e["chi_index"] = t;
        e["value"] = num2(r.value);
        e["abs"] = std::abs(r.value);
        e["stability_gap"] = r.stability_gap;
        e["accepted"] = r.accepted;
        e["truncation"] = r.truncation;
        e["conductor"] = r.conductor;
        values.push_back(std::move(e));
        all = all && r.accepted;
    }

    ojson rep = envelope("lvalue", std::move(resolved));
    rep["method"] = "smoothed-series";
    rep["values"] = std::move(values);
    return {all, std::move(rep)};
}

// ---------------------------------------------------------------------------
// lstudy

std::pair<bool, ojson> do_lstudy(dl_context* ctx, const char* config_json) {
    const ojson cfg = parse_config(config_json);
    apply_threads(cfg);
    if (cfg.contains("levels") && !cfg["levels"].is_array())
        throw std::invalid_argument("levels must be an array of file paths");
    std::vector<std::string> files;
    if (cfg.contains("levels"))
        for (const auto& e : cfg["levels"]) {
            if (!e.is_string()) throw std::invalid_argument("levels must be an array of file paths");
            files.push_back(e.get<std::string>());
        }

    const ExponentStudy study = exponent_study(files);
    if (!files.empty() && study.errors.size() == files.size()) {
        // nothing succeeded: surface the first failure as an I/O error
        throw io_failure(study.errors.front());
    }

    ojson resolved;
    resolved["levels"] = files;

    ojson rep = envelope("lstudy", std::move(resolved));
    rep["rows"] = study.rows.size();
    rep["errors"] = study.errors;
    rep["flags"] = study.flags;
    rep["csv"] = study.to_csv();
    (void)ctx;
    return {true, std::move(rep)};
}

}  // namespace

extern "C" {

dl_context* dl_context_create(void) { return new (std::nothrow) dl_context(); }

void dl_context_destroy(dl_context* ctx) { delete ctx; }

const char* dl_last_error(const dl_context* ctx) {
    return ctx == nullptr ? "" : ctx->last_error.c_str();
}

const char* dl_version(void) { return kVersion; }

void dl_string_free(char* s) { std::free(s); }

int dl_run_charsum(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_charsum(ctx, config_json); });
}

int dl_run_delta(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_delta(ctx, config_json); });
}

int dl_run_poisson(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_poisson(ctx, config_json); });
}

int dl_run_voronoi(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_voronoi(ctx, config_json); });
}

int dl_run_pipeline(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_pipeline(ctx, config_json); });
}

int dl_run_census(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_census(ctx, config_json); });
}

int dl_run_lvalue(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_lvalue(ctx, config_json); });
}

int dl_run_lstudy(dl_context* ctx, const char* config_json, char** report_json) {
    return run_guard(ctx, report_json, [&] { return do_lstudy(ctx, config_json); });
}

}  // extern "C"
