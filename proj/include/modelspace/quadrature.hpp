#pragma once

// Gauss-Legendre rules, the polar disk grid used for area integrals against
// normalized area measure, and boundary (circle) integration rules.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "modelspace/errors.hpp"
#include "modelspace/parallel.hpp"
#include "modelspace/types.hpp"

namespace modelspace {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;  // sum to 2
};

/// Newton iteration on the Legendre three-term recurrence.
inline GaussRule gaussLegendre(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "Gauss rule needs n >= 1");
    static std::mutex cacheLock;
    static std::map<int, GaussRule> cache;
    {
        std::lock_guard<std::mutex> guard(cacheLock);
        if (auto it = cache.find(n); it != cache.end()) return it->second;
    }
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
    std::lock_guard<std::mutex> guard(cacheLock);
    cache.emplace(n, rule);
    return rule;
}

/// Tensor grid on the disk: composite Gauss rule in r on [0,1) (panels graded
/// toward the circle) times an equispaced trapezoid rule in angle. Integrals
/// are against normalized area measure dA = r dr dtheta / pi.
class QuadratureGrid {
public:
    QuadratureGrid(std::vector<double> breakpoints, int nodesPerPanel, int angularCount)
        : angularCount_(angularCount), nodesPerPanel_(nodesPerPanel) {
        if (angularCount < 4 || nodesPerPanel < 1 || breakpoints.size() < 2)
            throw Error(ErrorCode::InvalidArgument, "degenerate quadrature grid");
        const GaussRule rule = gaussLegendre(nodesPerPanel);
        for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
            const double a = breakpoints[p], b = breakpoints[p + 1];
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                radii_.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
                radialWeights_.push_back(0.5 * (b - a) * rule.weights[i]);
            }
        }
    }

    /// 16 panels of Gauss nodes with breakpoints 0, 1/64, 1/8, 1/4, 1/2,
    /// 1-2^-k (k = 2..12) and 1.
    /// refine = 0 gives 256 x 1024 nodes; each refinement doubles both counts.
    static QuadratureGrid standard(int refine = 0) {
        std::vector<double> bp{0.0, 1.0 / 64.0, 0.125, 0.25, 0.5};
        for (int k = 2; k <= 12; ++k) bp.push_back(1.0 - std::ldexp(1.0, -k));
        bp.push_back(1.0);
        return QuadratureGrid(bp, 16 << refine, 1024 << refine);
    }

    /// Same panels with a chosen node count per panel and angle count.
    static QuadratureGrid withNodes(int nodesPerPanel, int angularCount) {
        std::vector<double> bp{0.0, 1.0 / 64.0, 0.125, 0.25, 0.5};
        for (int k = 2; k <= 12; ++k) bp.push_back(1.0 - std::ldexp(1.0, -k));
        bp.push_back(1.0);
        return QuadratureGrid(bp, nodesPerPanel, angularCount);
    }

    int angularCount() const { return angularCount_; }
    int nodesPerPanel() const { return nodesPerPanel_; }
    std::size_t radialCount() const { return radii_.size(); }
    std::size_t totalNodes() const { return radii_.size() * static_cast<std::size_t>(angularCount_); }
    const std::vector<double>& radii() const { return radii_; }
    const std::vector<double>& radialWeights() const { return radialWeights_; }

    Complex node(std::size_t ring, int j) const { return radii_[ring] * unimodular(kTwoPi * j / angularCount_); }

    /// Area weight of one node (normalized measure).
    double weight(std::size_t ring) const { return 2.0 * radii_[ring] * radialWeights_[ring] / angularCount_; }

    /// sum over nodes of weight * f(z); rings run in parallel and are reduced
    /// pairwise in ring order.
    template <class F>
    double integrate(F&& f) const {
        std::vector<double> ringSums(radii_.size());
        parallelFor(radii_.size(), [&](std::size_t ring) {
            std::vector<double> vals(static_cast<std::size_t>(angularCount_));
            for (int j = 0; j < angularCount_; ++j) vals[static_cast<std::size_t>(j)] = f(node(ring, j));
            ringSums[ring] = weight(ring) * pairwiseSum(vals);
        });
        return pairwiseSum(ringSums);
    }

private:
    int angularCount_;
    int nodesPerPanel_;
    std::vector<double> radii_;
    std::vector<double> radialWeights_;
};

/// Mean of f over N equispaced boundary angles (offset by half a step so
/// that the point 1 is never sampled).
template <class F>
double circleMeanTrapezoid(F&& f, int points) {
    std::vector<double> vals(static_cast<std::size_t>(points));
    parallelFor(vals.size(), [&](std::size_t k) { vals[k] = f(kTwoPi * (static_cast<double>(k) + 0.5) / points); });
    return pairwiseSum(vals) / points;
}

/// Mean of f over the circle by composite Gauss rules on panels that are
/// uniform (width 2pi/uniformPanels) and additionally graded geometrically
/// toward each angle in `peaks`, down to width ~1e-16 of the panel size.
/// Resolves integrands with near-singular peaks of arbitrary narrowness.
template <class F>
double circleMeanGraded(F&& f, const std::vector<double>& peaks, int uniformPanels = 64, int nodesPerPanel = 16) {
    const double start = peaks.empty() ? 0.0 : peaks.front();
    std::vector<double> bp;
    const double width = kTwoPi / uniformPanels;
    for (int i = 0; i <= uniformPanels; ++i) bp.push_back(start + width * i);
    for (double p : peaks) {
        double rel = p - start;
        rel -= kTwoPi * std::floor(rel / kTwoPi);
        for (int shift : {0, 1}) {
            const double c = start + rel + shift * kTwoPi;
            const double end = start + kTwoPi;
            if (c <= end) bp.push_back(c);
            for (int j = 0; j < 56; ++j) {
                const double h = width * std::ldexp(1.0, -j);
                if (c - h > start && c - h < end) bp.push_back(c - h);
                if (c + h > start && c + h < end) bp.push_back(c + h);
            }
        }
    }
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(), [](double a, double b) { return b - a <= 1e-300; }), bp.end());
    const GaussRule rule = gaussLegendre(nodesPerPanel);
    std::vector<double> panelSums(bp.size() - 1);
    parallelFor(panelSums.size(), [&](std::size_t p) {
        const double a = bp[p], b = bp[p + 1];
        double s = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            s += rule.weights[i] * f(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i]);
        panelSums[p] = 0.5 * (b - a) * s;
    });
    return pairwiseSum(panelSums) / kTwoPi;
}

}  // namespace modelspace
