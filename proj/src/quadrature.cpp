#include "spnp/quadrature.hpp"

#include <cmath>

namespace spnp {

QuadratureRule QuadratureRule::triangle3() {
    QuadratureRule q;
    q.kind = Kind::tri3;
    q.degree = 2;
    q.points = {{1.0 / 6.0, 1.0 / 6.0}, {2.0 / 3.0, 1.0 / 6.0}, {1.0 / 6.0, 2.0 / 3.0}};
    q.weights = {1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0};
    return q;
}

QuadratureRule QuadratureRule::triangle7() {
    QuadratureRule q;
    q.kind = Kind::tri7;
    q.degree = 5;
    const double s15 = std::sqrt(15.0);
    const double a1 = (6.0 - s15) / 21.0, b1 = (9.0 + 2.0 * s15) / 21.0;
    const double a2 = (6.0 + s15) / 21.0, b2 = (9.0 - 2.0 * s15) / 21.0;
    const double w0 = 9.0 / 80.0;
    const double w1 = (155.0 - s15) / 2400.0;
    const double w2 = (155.0 + s15) / 2400.0;
    q.points = {{1.0 / 3.0, 1.0 / 3.0}, {a1, a1}, {b1, a1}, {a1, b1}, {a2, a2}, {b2, a2}, {a2, b2}};
    q.weights = {w0, w1, w1, w1, w2, w2, w2};
    return q;
}

void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(k, 0.0);
    weights.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            const double pk = k == 0 ? 1.0 : (k == 1 ? x : p1);
            const double pkm1 = k == 1 ? 1.0 : p0;
            dp = k * (x * pk - pkm1) / (x * x - 1.0);
            const double dx = pk / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        nodes[k - 1 - i] = x;
        weights[k - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

QuadratureRule QuadratureRule::edge_gauss(int k) {
    if (k != 2 && k != 4 && k != 8) throw ConfigError("edge_gauss: k must be 2, 4 or 8");
    std::vector<double> x, w;
    gauss_legendre(k, x, w);
    QuadratureRule q;
    q.kind = Kind::edge;
    q.degree = 2 * k - 1;
    for (int i = 0; i < k; ++i) {
        q.points.push_back({0.5 * (x[i] + 1.0), 0.0});
        q.weights.push_back(0.5 * w[i]);
    }
    return q;
}

std::string QuadratureRule::name() const {
    switch (kind) {
        case Kind::tri3: return "triangle-3pt";
        case Kind::tri7: return "triangle-7pt";
        case Kind::edge: return "edge-gauss-" + std::to_string(points.size());
    }
    return "unknown";
}

}  // namespace spnp
