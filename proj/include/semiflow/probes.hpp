#pragma once

// Deterministic probe ensembles: band-limited random fields with k^{-2}
// coefficient decay (mesh-coherent across refinement), coordinate spikes and
// time profiles vanishing at t = 0.

#include <functional>

#include "semiflow/generator.hpp"

namespace semiflow {

class ProbeEnsemble {
public:
    explicit ProbeEnsemble(std::uint64_t seed) : seed_(seed) {}

    /// Band-limited field on the space's grid. The coefficient stream depends
    /// only on (seed, index), so refining the grid refines the same field.
    Vector band_limited(const DiscreteSpace& space, int index, int modes = 16) const {
        Rng rng = Rng(seed_).fork(0x1000 + static_cast<std::uint64_t>(index));
        const auto& g = space.grid();
        const double a = g(0), len = g(g.size() - 1) - g(0);
        Vector x = Vector::Zero(space.dim());
        for (int k = 1; k <= modes; ++k) {
            const Complex ck = rng.next_complex_gaussian() / double(k * k);
            const Complex dk = rng.next_complex_gaussian() / double(k * k);
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double xi = (g(i) - a) / std::max(len, 1e-300);
                x(i) += ck * std::sin(k * 3.14159265358979323846 * xi) +
                        dk * std::cos(k * 3.14159265358979323846 * xi);
            }
        }
        return x;
    }

    /// Band-limited probe pushed into D(A) through the resolvent at the base
    /// point, normalized in the space norm.
    Vector domain_probe(const GeneratorRep& gen, int index) const {
        Vector y = band_limited(gen.space(), index);
        Matrix r = gen.resolvent(gen.base_lambda()).matrix;
        Vector x = r * y;
        const double n = gen.space().norm(x);
        if (n < 1e-300) return x;
        return x / n;
    }

    /// Deterministic selection of spike positions spread over the grid.
    std::vector<Eigen::Index> spike_positions(const DiscreteSpace& space, int count) const {
        std::vector<Eigen::Index> idx;
        const Eigen::Index n = space.dim();
        for (int i = 0; i < count; ++i)
            idx.push_back(static_cast<Eigen::Index>((2 * i + 1) * (n - 1) / (2 * count)));
        return idx;
    }

    /// Scalar time shape with u(0) = 0 on [0, t].
    std::function<Complex(double)> time_profile(double t, int index, int modes = 12) const {
        Rng rng = Rng(seed_).fork(0x2000 + static_cast<std::uint64_t>(index));
        std::vector<Complex> c(modes);
        for (int k = 0; k < modes; ++k)
            c[k] = rng.next_complex_gaussian() / double((k + 1) * (k + 1));
        return [c, t](double s) {
            Complex v = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k)
                v += c[k] * std::sin((k + 1) * 3.14159265358979323846 * s / (2.0 * t));
            return v;
        };
    }

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
};

} // namespace semiflow
