#pragma once

#include <string>
#include <vector>

#include "errors.hpp"

namespace blaschke {

/// Every numerical threshold used by the library, in one record. The CLI
/// exposes each entry as --tol.<name>=<value>; library entry points accept a
/// const reference and default to defaults().
struct Tolerances {
    // geometry and construction
    double interior_margin   = 1e-12;  ///< zeros and disk points stay this far inside |z| = 1
    double unimodular        = 1e-12;  ///< drift allowed on |c| for unimodular constants
    double close_zero_warn   = 1e-4;   ///< pseudohyperbolic gap that triggers a conditioning warning
    double singular_denom    = 1e-14;  ///< |1 - conj(lambda) z| below this is a singularity

    // polynomial roots
    double poly_trim         = 1e-14;  ///< relative cutoff when trimming leading coefficients
    double poly_residual     = 1e-11;  ///< accept roots with |p(r)| <= this * ||c|| * max(1,|r|)^deg
    int    poly_sweeps       = 500;    ///< simultaneous-iteration sweep cap

    // fibers and critical points
    double fiber_residual    = 1e-10;  ///< |B(z) - w| <= this * max(1, |B'(z)|) per fiber point
    double fiber_cluster     = 1e-5;   ///< fiber points closer than this count as one repeated point
    double dedup_critical    = 1e-6;   ///< clustering radius for repeated critical roots
    double dedup_exceptional = 1e-9;   ///< dedup radius for critical values and exceptional points
    double multiplicity_cut  = 1e-8;   ///< |B^(k)| below this counts as vanishing
    int    max_degree        = 64;     ///< cap on any rational-form degree

    // path tracking
    double track_residual    = 1e-9;   ///< residual bound that holds at every accepted sample
    double min_derivative    = 1e-10;  ///< |B'| below this aborts a track (too close to critical)
    double step_underflow    = 1e-12;  ///< parameter step below this is a tracking failure
    double initial_step      = 2e-2;
    double correction_ratio  = 0.4;    ///< Newton correction allowed, as a fraction of fiber separation
    double sample_ratio      = 0.3333333333333333;  ///< per-step motion allowed, same units
    int    newton_iterations = 8;
    int    easy_accepts      = 4;      ///< accepted steps in a row before the step doubles
    double match_guard       = 3.0;    ///< endpoint match rejected if 2nd best within guard * best

    // monodromy
    double loop_radius_cap   = 0.1;
    double spiral_step       = 0.05;   ///< ring spacing of the base point search
    double fiber_separation  = 1e-4;   ///< base fiber must be at least this separated
    long   group_order_cap   = 3628800;  ///< element enumeration stops beyond 10!

    // collision clustering / gluing
    double collision_stop    = 1e-4;   ///< stopping distance from the critical value
    double collision_shrink  = 0.8;    ///< contraction ratio that marks a colliding pair
    double cluster_gap       = 3.0;    ///< required inter- vs intra-cluster gap factor
    int    collision_retries = 5;

    // irreducibility conditions and stage gates
    double thm_margin        = 1e-6;   ///< simple-zero and injectivity margins must exceed this
    double stage_margin      = 1e-8;   ///< stage gates: distinct critical values, simple zeros
    int    scan_budget       = 10000;  ///< candidates examined per stage before giving up

    // rotational structure
    double rotation_match    = 1e-8;
    int    rotation_n_max    = 6;

    // composition and profile consistency
    double compose_eval      = 1e-9;
    double profile_agreement = 1e-8;   ///< thinness profile vs direct derivative cross-check

    // Bergman-space checks
    double quad_clearance    = 5e-3;   ///< nodes closer to the exceptional set are forfeited
    double boundary_clearance = 1e-4;  ///< branch evaluation refuses points this close to the circle
    double forfeit_cap       = 1e-4;   ///< total quadrature weight allowed to be forfeited
    double symmetry_check    = 1e-8;   ///< B(rho(z)) = B(z) sampling tolerance

    static const Tolerances& defaults() {
        static const Tolerances t;
        return t;
    }

    bool operator==(const Tolerances&) const = default;

    void set(const std::string& name, double value);
    static std::vector<std::string> names();
};

inline void Tolerances::set(const std::string& name, double value) {
    if (name == "interior_margin") interior_margin = value;
    else if (name == "unimodular") unimodular = value;
    else if (name == "close_zero_warn") close_zero_warn = value;
    else if (name == "singular_denom") singular_denom = value;
    else if (name == "poly_trim") poly_trim = value;
    else if (name == "poly_residual") poly_residual = value;
    else if (name == "poly_sweeps") poly_sweeps = static_cast<int>(value);
    else if (name == "fiber_residual") fiber_residual = value;
    else if (name == "fiber_cluster") fiber_cluster = value;
    else if (name == "dedup_critical") dedup_critical = value;
    else if (name == "dedup_exceptional") dedup_exceptional = value;
    else if (name == "multiplicity_cut") multiplicity_cut = value;
    else if (name == "max_degree") max_degree = static_cast<int>(value);
    else if (name == "track_residual") track_residual = value;
    else if (name == "min_derivative") min_derivative = value;
    else if (name == "step_underflow") step_underflow = value;
    else if (name == "initial_step") initial_step = value;
    else if (name == "correction_ratio") correction_ratio = value;
    else if (name == "sample_ratio") sample_ratio = value;
    else if (name == "newton_iterations") newton_iterations = static_cast<int>(value);
    else if (name == "easy_accepts") easy_accepts = static_cast<int>(value);
    else if (name == "match_guard") match_guard = value;
    else if (name == "loop_radius_cap") loop_radius_cap = value;
    else if (name == "spiral_step") spiral_step = value;
    else if (name == "fiber_separation") fiber_separation = value;
    else if (name == "group_order_cap") group_order_cap = static_cast<long>(value);
    else if (name == "collision_stop") collision_stop = value;
    else if (name == "collision_shrink") collision_shrink = value;
    else if (name == "cluster_gap") cluster_gap = value;
    else if (name == "collision_retries") collision_retries = static_cast<int>(value);
    else if (name == "thm_margin") thm_margin = value;
    else if (name == "stage_margin") stage_margin = value;
    else if (name == "scan_budget") scan_budget = static_cast<int>(value);
    else if (name == "rotation_match") rotation_match = value;
    else if (name == "rotation_n_max") rotation_n_max = static_cast<int>(value);
    else if (name == "compose_eval") compose_eval = value;
    else if (name == "profile_agreement") profile_agreement = value;
    else if (name == "quad_clearance") quad_clearance = value;
    else if (name == "boundary_clearance") boundary_clearance = value;
    else if (name == "forfeit_cap") forfeit_cap = value;
    else if (name == "symmetry_check") symmetry_check = value;
    else throw spec_error("unknown tolerance name: " + name);
}

inline std::vector<std::string> Tolerances::names() {
    return {
        "interior_margin", "unimodular", "close_zero_warn", "singular_denom",
        "poly_trim", "poly_residual", "poly_sweeps",
        "fiber_residual", "fiber_cluster", "dedup_critical", "dedup_exceptional",
        "multiplicity_cut", "max_degree",
        "track_residual", "min_derivative", "step_underflow", "initial_step",
        "correction_ratio", "sample_ratio", "newton_iterations", "easy_accepts",
        "match_guard",
        "loop_radius_cap", "spiral_step", "fiber_separation", "group_order_cap",
        "collision_stop", "collision_shrink", "cluster_gap", "collision_retries",
        "thm_margin", "stage_margin", "scan_budget",
        "rotation_match", "rotation_n_max",
        "compose_eval", "profile_agreement",
        "quad_clearance", "boundary_clearance", "forfeit_cap", "symmetry_check",
    };
}

} // namespace blaschke
