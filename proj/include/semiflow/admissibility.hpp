#pragma once

// Sampled admissibility constants for control/observation operators, the
// joint audit across a mesh family, the convolution-inequality harness and
// the bounded-factor shortcut fits.

#include <span>
#include <string>

#include "semiflow/io_map.hpp"
#include "semiflow/probes.hpp"

namespace semiflow {

struct ConstantEstimate {
    std::vector<double> per_mesh;
    PlateauDiagnostic diag;
    double value = 0.0; // finest mesh
};

/// Control constant: max over band-limited inputs u (u(0) = 0) of
/// |int_0^t T(t-s) B u(s) ds|_X / |u|_{L^p([0,t],U)}, per mesh, with the
/// plateau verdict across the family.
ConstantEstimate control_admissibility(std::span<const ControlObsTriple> family, double p,
                                       double t, int probe_count, std::uint64_t seed);

/// Observation constant: max over probes x (band-limited, resolvent-smoothed
/// and normalized spikes) of (int_0^t |C T(s) x|_Y^p ds)^{1/p} / |x|_X via
/// graded time quadrature (open at s = 0, resolved to the mesh scale).
ConstantEstimate observation_admissibility(std::span<const ControlObsTriple> family, double p,
                                           double t, int probe_count, std::uint64_t seed);

/// Spec'd constructor for the discretized Volterra map (m >= 8).
InputOutputMap build_io_map(const ControlObsTriple& triple, double t, int m, double p);

struct AdmissibilityEntry {
    std::string name;
    PlateauDiagnostic diag;
};

struct AdmissibilityReport {
    double p = 2.0;
    double t = 1.0;
    std::vector<AdmissibilityEntry> entries;
    Verdict overall = Verdict::FAIL;

    const AdmissibilityEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

/// Runs the full condition set over the mesh family: compatibility constant,
/// control constant, observation constant, io-map norm and (for endomorphic
/// maps) the feedback inverse norm.
AdmissibilityReport audit_admissibility(std::span<const ControlObsTriple> family, double p,
                                        double t, int probe_count, int io_steps,
                                        std::uint64_t seed);

// ---------------------------------------------------------------------------
// Convolution inequality harness: |K * v|_r <= |k|_q |v|_p for
// 1/p + 1/q = 1 + 1/r, with k possibly singular (integrable) at 0.
// ---------------------------------------------------------------------------

struct YoungReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double norm_k_q = 0.0;
    double norm_v_p = 0.0;
    bool pass = false;
};

YoungReport young_convolution_check(const std::function<double(double)>& kernel_norm,
                                    const std::function<Vector(double, const Vector&)>& kernel_apply,
                                    const std::function<Vector(double)>& v,
                                    const DiscreteSpace& v_space, const DiscreteSpace& out_space,
                                    double p, double q, double r, double singular_scale = 1.0);

// ---------------------------------------------------------------------------
// Bounded-factor shortcut: when one factor is bounded the io-map norm decays
// like t^{1/p} (bounded control) or t^{1-1/p} (bounded observation).
// ---------------------------------------------------------------------------

enum class BoundedFactor { Control, Observation };

struct ScalingFitReport {
    double fitted_exponent = 0.0;
    double envelope_constant = 0.0; // smallest M with |F_t| <= M t^target
    double target_exponent = 0.0;
    bool pass = false;
    bool feedback_claimed = false;
    std::vector<double> t_grid;
    std::vector<double> norms;
};

ScalingFitReport bounded_factor_shortcut(const ControlObsTriple& triple, double p,
                                         BoundedFactor branch, double t0 = 1.0,
                                         int io_steps = 24);

} // namespace semiflow
