#include "semiflow/admissibility.hpp"

namespace semiflow {

namespace {

int graded_levels_for(double interval, double scale) {
    const double target = interval * std::max(scale, 1.0) * 1e3;
    int levels = static_cast<int>(std::ceil(std::log2(std::max(target, 2.0))));
    return std::clamp(levels, 8, 44);
}

/// Time-quadrature nodes for int_0^t f(s) ds with an integrable singularity
/// at s = 0, resolved down to ~1e-3/scale. Open at s = 0; the innermost
/// interval is closed with a midpoint panel.
std::vector<QuadNode> singular_time_nodes(double t, double scale) {
    const int levels = graded_levels_for(t, scale);
    auto nodes = graded_gauss(0.0, t, levels);
    const double eps = t * std::pow(0.5, levels);
    nodes.push_back({0.5 * eps, eps});
    return nodes;
}

/// Vector-valued input probe u(s) = sum_r profile_r(s) dir_r with u(0) = 0.
struct InputProbe {
    std::vector<std::function<Complex(double)>> profiles;
    std::vector<Vector> directions;

    Vector operator()(double s) const {
        Vector u = Vector::Zero(directions[0].size());
        for (std::size_t r = 0; r < profiles.size(); ++r) u += profiles[r](s) * directions[r];
        return u;
    }
};

InputProbe make_input_probe(const ProbeEnsemble& probes, const DiscreteSpace& u_space, double t,
                            int index) {
    InputProbe ip;
    for (int r = 0; r < 3; ++r) {
        ip.profiles.push_back(probes.time_profile(t, 3 * index + r));
        Vector dir = probes.band_limited(u_space, 100 + 3 * index + r);
        const double nd = u_space.norm(dir);
        if (nd > 1e-12) dir /= nd;
        ip.directions.push_back(dir);
    }
    return ip;
}

double time_lp_norm(const std::function<Vector(double)>& u, const DiscreteSpace& u_space,
                    double t, double p) {
    const int n = 257;
    RealVector w = trapezoid_weights(n, t);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double s = t * i / (n - 1);
        acc += w(i) * std::pow(u_space.norm(u(s)), p);
    }
    return std::pow(acc, 1.0 / p);
}

} // namespace

ConstantEstimate control_admissibility(std::span<const ControlObsTriple> family, double p,
                                       double t, int probe_count, std::uint64_t seed) {
    if (t <= 0.0) throw DomainError("control_admissibility: t must be positive");
    if (p < 1.0) throw DomainError("control_admissibility: p must be >= 1");
    if (family.empty()) throw DimensionError("control_admissibility: empty family");

    ProbeEnsemble probes(seed);
    ConstantEstimate est;
    for (const auto& triple : family) {
        const GeneratorRep& a = *triple.a;
        const auto nodes = singular_time_nodes(t, a.scale());
        double m_mesh = 0.0;
        for (int i = 0; i < probe_count; ++i) {
            InputProbe u = make_input_probe(probes, triple.u_space(), t, i);
            Vector z = Vector::Zero(a.dim());
            for (const auto& nd : nodes) {
                // tau = t - s; u evaluated at t - tau.
                Vector bu = triple.b.matrix * u(t - nd.x);
                z += nd.w * a.semigroup_apply(nd.x, bu);
            }
            const double denom = time_lp_norm([&](double s) { return u(s); },
                                              triple.u_space(), t, p);
            if (denom > 1e-12) m_mesh = std::max(m_mesh, a.space().norm(z) / denom);
        }
        est.per_mesh.push_back(m_mesh);
    }
    est.value = est.per_mesh.back();
    if (est.per_mesh.size() >= 2) est.diag = plateau_verdict(est.per_mesh);
    return est;
}

ConstantEstimate observation_admissibility(std::span<const ControlObsTriple> family, double p,
                                           double t, int probe_count, std::uint64_t seed) {
    if (t <= 0.0) throw DomainError("observation_admissibility: t must be positive");
    if (p < 1.0) throw DomainError("observation_admissibility: p must be >= 1");
    if (family.empty()) throw DimensionError("observation_admissibility: empty family");

    ProbeEnsemble probes(seed);
    ConstantEstimate est;
    for (const auto& triple : family) {
        const GeneratorRep& a = *triple.a;
        const auto nodes = singular_time_nodes(t, a.scale());

        // Probe matrix: band-limited, resolvent-smoothed and spike columns.
        const int n_band = std::max(probe_count / 2, 4);
        const int n_dom = std::max(probe_count / 4, 2);
        auto spikes = probes.spike_positions(a.space(), 8);
        Matrix x(a.dim(), n_band + n_dom + static_cast<int>(spikes.size()));
        int col = 0;
        for (int i = 0; i < n_band; ++i) x.col(col++) = probes.band_limited(a.space(), i);
        for (int i = 0; i < n_dom; ++i) x.col(col++) = probes.domain_probe(a, i);
        for (auto j : spikes) {
            Vector s = Vector::Zero(a.dim());
            s(j) = 1.0;
            x.col(col++) = s;
        }

        RealVector denom(x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) denom(j) = a.space().norm(Vector(x.col(j)));

        RealVector acc = RealVector::Zero(x.cols());
        for (const auto& nd : nodes) {
            Matrix tx(a.dim(), x.cols());
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                tx.col(j) = a.semigroup_apply(nd.x, Vector(x.col(j)));
            Matrix ctx = triple.c.matrix * tx;
            for (Eigen::Index j = 0; j < x.cols(); ++j)
                acc(j) += nd.w * std::pow(triple.y_space().norm(Vector(ctx.col(j))), p);
        }
        double m_mesh = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            if (denom(j) > 1e-12)
                m_mesh = std::max(m_mesh, std::pow(acc(j), 1.0 / p) / denom(j));
        est.per_mesh.push_back(m_mesh);
    }
    est.value = est.per_mesh.back();
    if (est.per_mesh.size() >= 2) est.diag = plateau_verdict(est.per_mesh);
    return est;
}

InputOutputMap build_io_map(const ControlObsTriple& triple, double t, int m, double p) {
    if (m < 8) throw DomainError("build_io_map: need m >= 8");
    if (t <= 0.0) throw DomainError("build_io_map: t must be positive");
    return InputOutputMap::from_triple(triple, t, m, p);
}

AdmissibilityReport audit_admissibility(std::span<const ControlObsTriple> family, double p,
                                        double t, int probe_count, int io_steps,
                                        std::uint64_t seed) {
    if (family.size() < 2) throw DimensionError("audit_admissibility: need a mesh family");
    AdmissibilityReport rep;
    rep.p = p;
    rep.t = t;

    std::vector<double> compat, ionorm, feedback_inv;
    bool endomorphic = true;
    for (const auto& triple : family) {
        Matrix r = triple.a->resolvent(triple.a->base_lambda()).matrix;
        Matrix crb = triple.c.matrix * r * triple.b.matrix;
        compat.push_back(induced_norm(crb, triple.u_space(), triple.y_space(), seed).upper);

        auto f = build_io_map(triple, t, io_steps, p);
        ionorm.push_back(io_norm(f, seed).upper);
        if (f.input_space().same_layout(f.output_space())) {
            feedback_inv.push_back(feedback_check(f, seed).inverse_norm);
        } else {
            endomorphic = false;
        }
    }

    rep.entries.push_back({"compatibility |C R B|", plateau_verdict(compat)});
    rep.entries.push_back(
        {"control constant", control_admissibility(family, p, t, probe_count, seed).diag});
    rep.entries.push_back(
        {"observation constant",
         observation_admissibility(family, p, t, probe_count, seed).diag});
    rep.entries.push_back({"io-map norm", plateau_verdict(ionorm)});
    if (endomorphic && !feedback_inv.empty())
        rep.entries.push_back({"feedback inverse norm", plateau_verdict(feedback_inv)});

    rep.overall = Verdict::PASS;
    for (const auto& e : rep.entries) {
        if (e.diag.verdict == Verdict::FAIL) rep.overall = Verdict::FAIL;
        if (e.diag.verdict == Verdict::SUSPECT && rep.overall == Verdict::PASS)
            rep.overall = Verdict::SUSPECT;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Convolution inequality harness
// ---------------------------------------------------------------------------

YoungReport young_convolution_check(const std::function<double(double)>& kernel_norm,
                                    const std::function<Vector(double, const Vector&)>& kernel_apply,
                                    const std::function<Vector(double)>& v,
                                    const DiscreteSpace& v_space, const DiscreteSpace& out_space,
                                    double p, double q, double r, double singular_scale) {
    auto inv = [](double e) { return std::isinf(e) ? 0.0 : 1.0 / e; };
    if (std::abs(inv(p) + inv(q) - 1.0 - inv(r)) > 1e-12)
        throw DomainError("young_convolution_check: need 1/p + 1/q = 1 + 1/r");

    YoungReport rep;

    // |k|_q with a geometric-continuation tail toward the singular endpoint.
    if (std::isinf(q)) {
        double mx = 0.0;
        for (const auto& nd : graded_gauss(0.0, 1.0, 24)) mx = std::max(mx, kernel_norm(nd.x));
        rep.norm_k_q = mx;
    } else {
        const int levels = 36;
        std::vector<double> panel(levels, 0.0);
        double hi = 1.0;
        for (int l = 0; l < levels; ++l) {
            const double lo = std::pow(0.5, l + 1);
            for (const auto& nd : gauss8(lo, hi))
                panel[l] += nd.w * std::pow(kernel_norm(nd.x), q);
            hi = lo;
        }
        double total = 0.0;
        for (double pl : panel) total += pl;
        const double ratio = panel[levels - 1] / std::max(panel[levels - 2], 1e-300);
        if (ratio >= 0.98)
            throw NumericError("young_convolution_check: |K|^q does not look integrable at 0",
                               ratio);
        total += panel[levels - 1] * ratio / (1.0 - ratio);
        rep.norm_k_q = std::pow(total, 1.0 / q);
    }

    // |v|_p on [0,1].
    if (std::isinf(p)) {
        double mx = 0.0;
        for (int i = 0; i <= 512; ++i) mx = std::max(mx, v_space.norm(v(i / 512.0)));
        rep.norm_v_p = mx;
    } else {
        RealVector w = trapezoid_weights(513, 1.0);
        double acc = 0.0;
        for (int i = 0; i <= 512; ++i)
            acc += w(i) * std::pow(v_space.norm(v(i / 512.0)), p);
        rep.norm_v_p = std::pow(acc, 1.0 / p);
    }

    // |K * v|_r via graded inner quadrature.
    auto convolution_at = [&](double t) {
        Vector acc = Vector::Zero(out_space.dim());
        if (t <= 0.0) return acc;
        const int levels = graded_levels_for(t, singular_scale);
        for (const auto& nd : graded_gauss(0.0, t, levels))
            acc += nd.w * kernel_apply(nd.x, v(t - nd.x));
        const double eps = t * std::pow(0.5, levels);
        acc += eps * kernel_apply(0.5 * eps, v(t - 0.5 * eps));
        return acc;
    };
    const int outer = 65;
    if (std::isinf(r)) {
        double mx = 0.0;
        for (int i = 1; i < outer; ++i)
            mx = std::max(mx, out_space.norm(convolution_at(double(i) / (outer - 1))));
        rep.lhs = mx;
    } else {
        RealVector w = trapezoid_weights(outer, 1.0);
        double acc = 0.0;
        for (int i = 1; i < outer; ++i)
            acc += w(i) * std::pow(out_space.norm(convolution_at(double(i) / (outer - 1))), r);
        rep.lhs = std::pow(acc, 1.0 / r);
    }

    rep.rhs = rep.norm_k_q * rep.norm_v_p;
    rep.pass = rep.lhs <= rep.rhs * 1.02;
    return rep;
}

// ---------------------------------------------------------------------------
// Bounded-factor shortcut
// ---------------------------------------------------------------------------

ScalingFitReport bounded_factor_shortcut(const ControlObsTriple& triple, double p,
                                         BoundedFactor branch, double t0, int io_steps) {
    if (p < 1.0) throw DomainError("bounded_factor_shortcut: p must be >= 1");
    ScalingFitReport rep;
    rep.target_exponent = (branch == BoundedFactor::Control) ? 1.0 / p : 1.0 - 1.0 / p;

    rep.t_grid = log_grid(1e-3 * t0, t0, 7);
    std::vector<double> lt, ln;
    for (double t : rep.t_grid) {
        const double nrm = io_norm(build_io_map(triple, t, io_steps, p)).upper;
        rep.norms.push_back(nrm);
        if (nrm > 0.0) {
            lt.push_back(std::log(t));
            ln.push_back(std::log(nrm));
        }
        rep.envelope_constant =
            std::max(rep.envelope_constant, nrm / std::pow(t, rep.target_exponent));
    }
    if (lt.size() >= 2) rep.fitted_exponent = fit_line(lt, ln).slope;
    rep.pass = rep.fitted_exponent >= rep.target_exponent - 0.1;
    rep.feedback_claimed = (branch == BoundedFactor::Control) || p > 1.0;
    return rep;
}

} // namespace semiflow
