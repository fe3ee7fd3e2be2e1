#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "deltalab/arith.hpp"
#include "deltalab/coeffs.hpp"
#include "deltalab/pipeline.hpp"

using namespace deltalab;

namespace {

/// Shared full-horizon table: the dual sums walk the entire first million
/// coefficients, and building it once keeps the suite under a minute.
std::shared_ptr<const HeckeCoefficients> table1m() {
    static const auto t =
        std::make_shared<const HeckeCoefficients>(HeckeCoefficients::eta_level11(1000000));
    return t;
}

std::shared_ptr<const PrimeModulus> mod11() {
    static const auto m = std::make_shared<const PrimeModulus>(11);
    return m;
}

PipelineConfig reference_config() {
    PipelineConfig cfg;
    cfg.modulus = mod11();
    cfg.chi_index = 1;
    cfg.coeffs = table1m();
    cfg.N = 40.0;
    cfg.L_set = {3, 7};
    cfg.P_set = {1427, 1429};
    cfg.amplifier_exponent = 2;
    return cfg;
}

/// Small-window variant whose composite-modulus dual reaches full kernel
/// support inside the coefficient horizon.
PipelineConfig deep_dual_config() {
    PipelineConfig cfg = reference_config();
    cfg.N = 6.0;
    cfg.L_set = {3};
    cfg.P_set = {41, 43};
    return cfg;
}

double detail_num(const TranscriptStep& st, const std::string& key) {
    for (const auto& [k, v] : st.details)
        if (k == key) return std::strtod(v.c_str(), nullptr);
    FAIL("missing detail ", key);
    return 0.0;
}

std::string detail_str(const TranscriptStep& st, const std::string& key) {
    for (const auto& [k, v] : st.details)
        if (k == key) return v;
    FAIL("missing detail ", key);
    return {};
}

bool has_detail(const TranscriptStep& st, const std::string& key) {
    for (const auto& [k, v] : st.details)
        if (k == key) return true;
    return false;
}

void check_close(cplx z, double re, double im, double tol) {
    CHECK(std::abs(z.real() - re) <= tol);
    CHECK(std::abs(z.imag() - im) <= tol);
}

void check_detail_pair(const TranscriptStep& st, const std::string& key, double re, double im,
                       double tol) {
    std::string v = detail_str(st, key);
    REQUIRE(v.front() == '(');
    char* end = nullptr;
    double r = std::strtod(v.c_str() + 1, &end);
    REQUIRE(end != nullptr);
    while (*end == ',' || *end == ' ') ++end;
    double i = std::strtod(end, nullptr);
    CHECK(std::abs(r - re) <= tol);
    CHECK(std::abs(i - im) <= tol);
}

}  // namespace

TEST_CASE("moment chain verifies at the reference configuration") {
    PipelineRun run(reference_config());
    REQUIRE(run.run_all());
    const Transcript& tr = run.transcript();
    REQUIRE(tr.steps.size() == 7);

    // Step labels are part of the serialized contract.
    const char* names[7] = {"s_direct",       "amplified_decomposition", "sharp_form",
                            "delta_insertion", "c_bucket_split",          "dual_expansion_verify",
                            "dyadic_blocks"};
    const char* refs[7] = {"smoothed-moment-definition", "amplifier-identity",
                           "hecke-expansion-rearrangement", "delta-expansion",
                           "modulus-bucket-partition", "dual-summation-identity",
                           "dyadic-majorant-table"};
    for (int i = 0; i < 7; ++i) {
        CHECK(tr.steps[i].name == names[i]);
        CHECK(tr.steps[i].paper_ref == refs[i]);
        CHECK(tr.steps[i].passed());
    }

    check_close(run.base_sum(), 3.771981327509614, 2.464413751977097, 1e-12);
    check_close(run.weighted_sum(), 1.706372505302, 1.114853840180, 1e-9);
    check_close(run.square_sum(), -2.065608822208, -1.349559911797, 1e-9);
    check_close(run.sharp_sum(), -2.317642903142257, -1.534126870542875, 1e-12);
    check_close(run.correction(), 0.2520340809346, 0.1845669587459, 1e-9);

    const cplx* b = run.bucket_totals();
    check_close(b[0], 6.730720892324e-08, 1.191459519151e-08, 1e-15);
    check_close(b[1], 9.135932327022e-02, -4.798336959997e-02, 1e-12);
    check_close(b[2], 8.016037496809e-04, -3.450615276439e-04, 1e-13);
    check_close(b[3], -2.409803897469, -1.485798451330, 1e-9);

    const TranscriptStep* s0 = tr.find("s_direct");
    REQUIRE(s0 != nullptr);
    CHECK(detail_num(*s0, "support_count") == 39.0);
    CHECK(detail_num(*s0, "triangle_bound") == doctest::Approx(12.19613817113).epsilon(1e-9));

    const TranscriptStep* amp = tr.find("amplified_decomposition");
    REQUIRE(amp != nullptr);
    CHECK(detail_str(*amp, "coefficient_identity_integer") == "exact");
    CHECK(amp->residual < 1e-14);

    const TranscriptStep* sharp = tr.find("sharp_form");
    REQUIRE(sharp != nullptr);
    CHECK(detail_num(*sharp, "dilation_l3") == 360.0);
    CHECK(detail_num(*sharp, "dilation_l7") == 1960.0);
    CHECK(sharp->residual < 1e-12);

    const TranscriptStep* delta = tr.find("delta_insertion");
    REQUIRE(delta != nullptr);
    CHECK(delta->relation == "exact");
    CHECK(detail_num(*delta, "detection_span") == 15680.0);
    CHECK(detail_num(*delta, "detection_margin_p1427") == 17.0);
    CHECK(detail_num(*delta, "detection_margin_p1429") == 39.0);
    CHECK(detail_str(*delta, "detection_protected") == "yes");
    CHECK(delta->residual < 1e-12);

    const TranscriptStep* buckets = tr.find("c_bucket_split");
    REQUIRE(buckets != nullptr);
    CHECK(buckets->residual < 1e-12);
    CHECK(detail_num(*buckets, "cross_route_max_dev") < 1e-12);

    const TranscriptStep* dual = tr.find("dual_expansion_verify");
    REQUIRE(dual != nullptr);
    CHECK(detail_str(*dual, "cq_verdict") == "pass");
    check_detail_pair(*dual, "cq_dual", 8.016037777873e-04, -3.450615345683e-04, 1e-12);
    CHECK(detail_num(*dual, "cq_residual") < 8.8e-8);
    CHECK(detail_num(*dual, "cq_truncation_certificate") < detail_num(*dual, "cq_tolerance"));
    CHECK(detail_num(*dual, "cq_m_stop") == 8192.0);
    CHECK(detail_num(*dual, "cq_frequency_radius") == 12.0);
    // All four composite cells sit far outside the reachable kernel range at
    // these detection moduli and must be reported out of range, not verified.
    CHECK(detail_str(*dual, "cpq_verdict") == "skipped");
    for (const char* key : {"cpq_l3_p1427", "cpq_l3_p1429", "cpq_l7_p1427", "cpq_l7_p1429"})
        CHECK(detail_str(*dual, key).rfind("skipped", 0) == 0);

    const TranscriptStep* dyad = tr.find("dyadic_blocks");
    REQUIRE(dyad != nullptr);
    CHECK(dyad->residual < 1e-12);
    CHECK(detail_num(*dyad, "block_count") == 1.0);
    CHECK(detail_num(*dyad, "block_floor") == doctest::Approx(631321.0560510).epsilon(1e-9));
    CHECK(detail_num(*dyad, "coefficient_range") == 1000000.0);
}

TEST_CASE("composite-modulus dual verifies at full kernel support") {
    PipelineRun run(deep_dual_config());
    REQUIRE(run.run_all());
    const Transcript& tr = run.transcript();

    check_close(run.base_sum(), 1.099037833558396, 0.5230082264750812, 1e-12);

    const TranscriptStep* delta = tr.find("delta_insertion");
    REQUIRE(delta != nullptr);
    CHECK(detail_num(*delta, "detection_span") == 432.0);
    CHECK(detail_num(*delta, "detection_margin_p41") == 19.0);
    CHECK(detail_num(*delta, "detection_margin_p43") == 41.0);

    const TranscriptStep* dual = tr.find("dual_expansion_verify");
    REQUIRE(dual != nullptr);
    CHECK(dual->passed());
    CHECK(detail_str(*dual, "cq_verdict") == "pass");
    CHECK(detail_num(*dual, "cq_m_stop") == 65536.0);
    CHECK(detail_num(*dual, "cq_frequency_radius") == 98.0);
    CHECK(detail_num(*dual, "cq_residual") < 1e-9);

    // Both composite cells reach the full million-term horizon, and their
    // measured residuals clear the 1e-4 relative gate with margin.
    CHECK(detail_num(*dual, "cpq_l3_p41_terms") == 1000000.0);
    CHECK(detail_num(*dual, "cpq_l3_p43_terms") == 1000000.0);
    check_detail_pair(*dual, "cpq_l3_p41_direct", -5.315863701703e-01, -2.142340950335e-01,
                      1e-10);
    check_detail_pair(*dual, "cpq_l3_p41_dual", -5.315881705523e-01, -2.142377163412e-01, 1e-10);
    check_detail_pair(*dual, "cpq_l3_p43_dual", -6.213680949650e-02, -2.970164535616e-01, 1e-10);
    CHECK(detail_num(*dual, "cpq_l3_p41_residual") <
          detail_num(*dual, "cpq_l3_p41_tolerance"));
    CHECK(detail_num(*dual, "cpq_l3_p43_residual") <
          detail_num(*dual, "cpq_l3_p43_tolerance"));
    CHECK(detail_num(*dual, "cpq_l3_p41_frequency_certificate") <
          detail_num(*dual, "cpq_l3_p41_tolerance") / 3.0);
    CHECK(detail_num(*dual, "cpq_l3_p43_frequency_certificate") <
          detail_num(*dual, "cpq_l3_p43_tolerance") / 3.0);

    const TranscriptStep* dyad = tr.find("dyadic_blocks");
    REQUIRE(dyad != nullptr);
    CHECK(detail_num(*dyad, "block_count") == 9.0);
    CHECK(detail_num(*dyad, "block_floor") == doctest::Approx(3474.391728847).epsilon(1e-9));
    CHECK(dyad->residual < 1e-12);
}

TEST_CASE("halved truncation radii re-expose the certified tails") {
    PipelineConfig cfg = deep_dual_config();
    cfg.radius_scale = 0.5;
    PipelineRun run(cfg);
    CHECK_FALSE(run.run_all());
    const Transcript& tr = run.transcript();

    // Only the dual step fails, and it fails on its certificates: the
    // measured residuals stay tiny, but the claimed tail bounds no longer
    // clear the gate, which is exactly what a sharp certificate must do.
    for (const auto& st : tr.steps) {
        if (st.name == "dual_expansion_verify")
            CHECK(st.verdict == "fail");
        else
            CHECK(st.verdict == "pass");
    }
    const TranscriptStep* dual = tr.find("dual_expansion_verify");
    REQUIRE(dual != nullptr);
    CHECK(detail_str(*dual, "cq_verdict") == "fail");
    CHECK(detail_num(*dual, "cq_residual") < 1e-7);
    CHECK(detail_num(*dual, "cq_truncation_certificate") > detail_num(*dual, "cq_tolerance"));
    CHECK(detail_num(*dual, "cq_m_stop") == 32768.0);
    CHECK(detail_num(*dual, "cpq_l3_p41_frequency_certificate") >
          detail_num(*dual, "cpq_l3_p41_tolerance"));
    CHECK(detail_num(*dual, "cpq_l3_p43_frequency_certificate") >
          detail_num(*dual, "cpq_l3_p43_tolerance"));
}

TEST_CASE("undersized detection moduli alias and the step reports a witness") {
    PipelineConfig cfg = reference_config();
    cfg.P_set = {199, 211};
    PipelineRun run(cfg);
    CHECK_FALSE(run.run_all());
    const Transcript& tr = run.transcript();

    const TranscriptStep* delta = tr.find("delta_insertion");
    REQUIRE(delta != nullptr);
    CHECK(delta->verdict == "fail");
    CHECK(delta->residual == doctest::Approx(0.9272927177828).epsilon(1e-9));
    CHECK(detail_str(*delta, "detection_protected") == "no");
    CHECK(detail_str(*delta, "aliasing_witness") == "m=2558 n=41 l=3 p=199");
    CHECK(detail_num(*delta, "detection_margin_p199") == -13491.0);
    CHECK(detail_num(*delta, "detection_margin_p211") == -13359.0);

    const TranscriptStep* buckets = tr.find("c_bucket_split");
    REQUIRE(buckets != nullptr);
    CHECK(buckets->verdict == "fail");
    CHECK(buckets->residual == doctest::Approx(delta->residual).epsilon(1e-12));

    // The dual identities do not involve the aliased detection route, so the
    // step still verifies: shallow cells skipped, deep cells at full support.
    const TranscriptStep* dual = tr.find("dual_expansion_verify");
    REQUIRE(dual != nullptr);
    CHECK(dual->passed());
    CHECK(detail_str(*dual, "cpq_l3_p199").rfind("skipped", 0) == 0);
    CHECK(detail_str(*dual, "cpq_l3_p211").rfind("skipped", 0) == 0);
    CHECK(detail_num(*dual, "cpq_l7_p199_residual") <
          detail_num(*dual, "cpq_l7_p199_tolerance"));
    CHECK(detail_num(*dual, "cpq_l7_p211_residual") <
          detail_num(*dual, "cpq_l7_p211_tolerance"));
}

TEST_CASE("transcripts serialize deterministically") {
    PipelineConfig cfg = deep_dual_config();
    cfg.run_dual = false;  // keep the double run cheap; dyadic still exercises the kernels

    PipelineRun a(cfg);
    PipelineRun b(cfg);
    a.run_all();
    b.run_all();
    std::string ja = a.transcript().to_json();
    CHECK(ja == b.transcript().to_json());
    CHECK(a.transcript().to_text() == b.transcript().to_text());

    auto parsed = nlohmann::json::parse(ja);
    REQUIRE(parsed.is_array());
    REQUIRE(parsed.size() == 7);
    for (const auto& step : parsed) {
        for (const char* key :
             {"name", "paper_ref", "relation", "lhs", "rhs", "residual", "claimed_bound",
              "verdict", "details"}) {
            CHECK(step.contains(key));
        }
        CHECK(step["lhs"].size() == 2);
    }
    CHECK(parsed[5]["verdict"] == "skipped");

    const TranscriptStep* dual = a.transcript().find("dual_expansion_verify");
    REQUIRE(dual != nullptr);
    CHECK(has_detail(*dual, "reason"));
}

TEST_CASE("conjugate character mirrors the moment") {
    PipelineConfig cfg = deep_dual_config();
    PipelineRun plain(cfg);
    cfg.chi_index = 9;  // order-10 group: index 9 is the conjugate of index 1
    PipelineRun conj(cfg);
    plain.s_direct();
    conj.s_direct();
    CHECK(std::abs(conj.base_sum().real() - plain.base_sum().real()) <= 1e-14);
    CHECK(std::abs(conj.base_sum().imag() + plain.base_sum().imag()) <= 1e-14);
}

TEST_CASE("steps refuse to run out of order") {
    PipelineRun run(deep_dual_config());
    CHECK_THROWS_AS(run.amplified_decomposition(), std::logic_error);
    CHECK_THROWS_AS(run.dual_expansion_verify(), std::logic_error);
    run.s_direct();
    CHECK_THROWS_AS(run.s_direct(), std::logic_error);
    CHECK_THROWS_AS(run.sharp_form(), std::logic_error);
    run.amplified_decomposition();
    run.sharp_form();
    CHECK_THROWS_AS(run.c_bucket_split(), std::logic_error);
}

TEST_CASE("configuration validation rejects malformed input") {
    auto valid = deep_dual_config;

    { PipelineConfig c = valid(); c.modulus.reset();
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.coeffs.reset();
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.chi_index = 0;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.chi_index = 10;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.modulus = std::make_shared<const PrimeModulus>(13);
      CHECK_THROWS_WITH_AS(PipelineRun{c},
                           doctest::Contains("coefficient level must equal the twist modulus"),
                           std::invalid_argument); }
    { PipelineConfig c = valid(); c.N = 4.0;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.amplifier_exponent = 3;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.L_set = {};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.L_set = {4};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.L_set = {11};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.L_set = {3, 3};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.P_set = {};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.P_set = {9};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.P_set = {11};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.P_set = {3};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.P_set = {41, 41};
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.eps = 0.0;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.radius_scale = 0.0;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid(); c.radius_scale = 1.5;
      CHECK_THROWS_AS(PipelineRun{c}, std::invalid_argument); }
    { PipelineConfig c = valid();
      c.coeffs = std::make_shared<const HeckeCoefficients>(HeckeCoefficients::eta_level11(100));
      CHECK_THROWS_WITH_AS(PipelineRun{c},
                           doctest::Contains("coefficient horizon insufficient"),
                           std::out_of_range); }
}

TEST_CASE("planner fills runnable configurations") {
    SUBCASE("small modulus with hints keeps them and protects detection") {
        auto res = parameter_planner(mod11(), 5.0 / 6.0, 2, 0.05, table1m(), 1, 40.0, {3, 7});
        CHECK(res.mode == "identity-verification");
        CHECK(res.config.N == 40.0);
        REQUIRE(res.config.L_set.size() == 2);
        REQUIRE(res.config.P_set.size() == 2);
        CHECK(res.config.P_set[0] == 1427);
        CHECK(res.config.P_set[1] == 1429);
        PipelineRun run(res.config);  // planner output is runnable as-is
        run.s_direct();
    }
    SUBCASE("small modulus without hints falls back to explicit sets") {
        auto res = parameter_planner(mod11(), 5.0 / 6.0, 2, 0.05, table1m());
        CHECK(res.mode == "identity-verification");
        CHECK(res.config.N == 8.0);
        REQUIRE(res.config.L_set.size() == 1);
        CHECK(res.config.L_set[0] == 3);
        REQUIRE(res.config.P_set.size() == 2);
        CHECK(res.config.P_set[0] == 53);
        CHECK(res.config.P_set[1] == 59);
    }
    SUBCASE("large modulus opens the asymptotic window") {
        auto big = std::make_shared<const PrimeModulus>(1000003);
        auto res = parameter_planner(big, 5.0 / 6.0, 2, 0.05, table1m());
        CHECK(res.mode == "asymptotic");
        CHECK_FALSE(res.window_empty);
        REQUIRE(res.config.L_set.size() >= 1);
        CHECK(res.config.L_set[0] == 5);
        double span = 0.0;
        for (u64 ell : res.config.L_set) {
            double d = 8.0 * res.config.N * static_cast<double>(ell) * static_cast<double>(ell);
            span = std::max(span, d);
        }
        for (u64 p : res.config.P_set)
            CHECK(static_cast<double>(p) * 1000003.0 > span);
    }
}
