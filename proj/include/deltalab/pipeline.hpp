/**
 * @file pipeline.hpp
 * @brief End-to-end verification chain for the amplified twisted moment: the
 *        direct moment, its amplifier decomposition, the Hecke rearrangement
 *        into a detected-diagonal form, the exact point-mass expansion over
 *        an auxiliary prime modulus, the divisor-bucket partition of that
 *        expansion, dual recomputations of the two arithmetically deep
 *        buckets, and a dyadic majorant table.  Every step appends a record
 *        to a deterministic, serializable transcript.
 */
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deltalab/arith.hpp"
#include "deltalab/coeffs.hpp"

namespace deltalab {

/// Explicit N^epsilon stand-in used by every truncation radius; recorded in
/// transcripts wherever it enters a bound.
inline double eps_multiplier(u64 q) { return 8.0 * std::log(2.0 + static_cast<double>(q)); }

struct PipelineConfig {
    std::shared_ptr<const PrimeModulus> modulus;
    u64 chi_index = 1;                ///< character index, nonzero
    std::shared_ptr<const HeckeCoefficients> coeffs;
    double N = 0.0;                   ///< centre of the smooth n-window (N, 2N)
    double beta = 5.0 / 6.0;          ///< nominal exponent with N near q^beta
    int amplifier_exponent = 2;       ///< 1 or 2: which amplifier piece is rearranged
    std::vector<u64> L_set;           ///< amplifier primes, coprime to q
    std::vector<u64> P_set;           ///< auxiliary detection primes, disjoint from L_set
    double eps = 0.05;
    double ramanujan_theta = 7.0 / 64.0;
    u64 seed = 1;

    // Dual-side controls.  radius_scale shrinks every truncation radius (the
    // sharpness demonstration sets 0.5); dual_terms_cap bounds the dual
    // m-sum length for the largest bucket, on top of the coefficient horizon.
    double radius_scale = 1.0;
    u64 dual_terms_cap = 1200000;
    bool run_dual = true;
    bool run_dyadic = true;
};

struct TranscriptStep {
    std::string name;
    std::string paper_ref;            ///< relation label, e.g. "amplifier-identity"
    std::string relation;             ///< "exact" or "bounded-error"
    cplx lhs{0.0, 0.0};
    cplx rhs{0.0, 0.0};
    double residual = 0.0;            ///< |lhs - rhs|
    double claimed_bound = 0.0;       ///< tolerance the verdict compares against
    std::string verdict;              ///< "pass", "fail", or "skipped"
    std::vector<std::pair<std::string, std::string>> details;

    void put(const std::string& key, const std::string& value);
    void put_num(const std::string& key, double value);
    void put_int(const std::string& key, i64 value);
    bool passed() const { return verdict == "pass"; }
};

struct Transcript {
    std::vector<TranscriptStep> steps;

    bool all_pass() const;            ///< no step with verdict "fail"
    const TranscriptStep* find(const std::string& name) const;
    std::string to_json() const;      ///< byte-stable across identical runs
    std::string to_text() const;      ///< one line per step
};

/**
 * Runs the verification chain.  Construction validates the configuration:
 * q prime > 3, nonzero character index, amplifier primes coprime to q,
 * L_set and P_set disjoint, coefficient level equal to q, and a coefficient
 * horizon covering every direct sum.  Steps must run in order; run_all() is
 * the usual entry point.  The transcript is append-only and two runs with
 * the same configuration serialize identically.
 */
class PipelineRun {
  public:
    explicit PipelineRun(PipelineConfig cfg);
    ~PipelineRun();
    PipelineRun(const PipelineRun&) = delete;
    PipelineRun& operator=(const PipelineRun&) = delete;

    const PipelineConfig& config() const { return cfg_; }
    const Transcript& transcript() const { return transcript_; }

    const TranscriptStep& s_direct();
    const TranscriptStep& amplified_decomposition();
    const TranscriptStep& sharp_form();
    const TranscriptStep& delta_insertion();
    const TranscriptStep& c_bucket_split();
    const TranscriptStep& dual_expansion_verify();
    const TranscriptStep& dyadic_blocks();

    /// All seven steps in order; returns transcript().all_pass().
    bool run_all();

    // Computed values, populated as steps run.
    cplx base_sum() const { return S_; }
    cplx weighted_sum() const { return S1_; }
    cplx square_sum() const { return S2_; }
    cplx sharp_sum() const { return Ssharp_; }
    cplx correction() const { return corr_; }
    /// Bucket totals in divisor order {1, p, q, pq}, summed over the prime sets.
    const cplx* bucket_totals() const { return bucket_; }

  private:
    struct PerLP;                     // per (amplifier prime, detection prime) cache

    u64 amp_power(u64 ell) const;     // ell^amplifier_exponent
    double dilation(u64 ell) const;   // N * ell^amplifier_exponent
    TranscriptStep& begin_step(const std::string& name, const std::string& ref,
                               const std::string& relation);
    void settle(TranscriptStep& step, cplx lhs, cplx rhs, double tol_rel);
    void build_kernel(PerLP& cell, i64 radius);

    PipelineConfig cfg_;
    DirichletCharacter chi_;
    Transcript transcript_;
    int stage_ = 0;

    cplx S_{0.0, 0.0}, S1_{0.0, 0.0}, S2_{0.0, 0.0};
    cplx Ssharp_{0.0, 0.0}, corr_{0.0, 0.0};
    cplx amp_target_{0.0, 0.0};       // the piece the sharp form rearranges
    cplx bucket_[4];
    std::vector<cplx> inner_cache_;   // per-amplifier inner sums from step 2
    std::vector<PerLP> cells_;        // filled by delta_insertion
};

struct PlannerResult {
    PipelineConfig config;
    std::string mode;                 ///< "asymptotic" or "identity-verification"
    bool window_empty = false;
    std::vector<std::pair<std::string, std::string>> details;
};

/**
 * Fills a runnable configuration from (q, beta, amplifier exponent).  The
 * amplifier-length window is evaluated with an effective epsilon no larger
 * than a quarter of the symbolic window width, so a window that is nonempty
 * in exponent arithmetic stays nonempty numerically; when even the symbolic
 * window is empty, or no admissible prime lies inside it, the planner falls
 * back to identity-verification mode with small explicit sets.  Provided
 * hints (N, L_set, P_set) are validated and kept.  P_set is chosen so that
 * every detection modulus p*q strictly exceeds the spread of the detected
 * difference, and is regenerated upward when it would meet L_set.
 */
PlannerResult parameter_planner(std::shared_ptr<const PrimeModulus> modulus, double beta,
                                int amplifier_exponent, double eps,
                                std::shared_ptr<const HeckeCoefficients> coeffs,
                                u64 chi_index = 1, double N_hint = 0.0,
                                std::vector<u64> L_hint = {}, std::vector<u64> P_hint = {});

}  // namespace deltalab
