#include "spnp/delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <utility>

namespace spnp::detail {

namespace {

struct Tri {
    std::array<int, 3> v;
    long double cx, cy, r2;
    bool alive = true;
};

long double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return static_cast<long double>(b[0] - a[0]) * (c[1] - a[1]) -
           static_cast<long double>(b[1] - a[1]) * (c[0] - a[0]);
}

Tri make_tri(const std::vector<Vec2>& p, int a, int b, int c) {
    if (orient(p[a], p[b], p[c]) < 0) std::swap(b, c);
    const long double ax = p[a][0], ay = p[a][1];
    const long double bx = p[b][0] - ax, by = p[b][1] - ay;
    const long double cx = p[c][0] - ax, cy = p[c][1] - ay;
    const long double d = 2.0L * (bx * cy - by * cx);
    Tri t{{a, b, c}, 0, 0, 0};
    if (d == 0.0L) {
        t.cx = ax;
        t.cy = ay;
        t.r2 = std::numeric_limits<long double>::infinity();
        return t;
    }
    const long double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
    const long double ux = (cy * b2 - by * c2) / d;
    const long double uy = (bx * c2 - cx * b2) / d;
    t.cx = ax + ux;
    t.cy = ay + uy;
    t.r2 = ux * ux + uy * uy;
    return t;
}

// Circumcircle test: fast reject/accept on the circumcenter, lifted determinant in
// extended precision near the circle.
bool in_circumcircle(const std::vector<Vec2>& p, const Tri& t, const Vec2& q) {
    const long double dx = t.cx - q[0], dy = t.cy - q[1];
    const long double dist2 = dx * dx + dy * dy;
    const long double slack = 1e-9L * t.r2;
    if (dist2 < t.r2 - slack) return true;
    if (dist2 > t.r2 + slack) return false;
    const Vec2& a = p[t.v[0]];
    const Vec2& b = p[t.v[1]];
    const Vec2& c = p[t.v[2]];
    const long double adx = a[0] - q[0], ady = a[1] - q[1];
    const long double bdx = b[0] - q[0], bdy = b[1] - q[1];
    const long double cdx = c[0] - q[0], cdy = c[1] - q[1];
    const long double det = (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) -
                            (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
                            (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    return det > 0.0L;
}

std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<std::array<int, 3>> delaunay_triangulate(const std::vector<Vec2>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) return {};

    double xmin = points[0][0], xmax = xmin, ymin = points[0][1], ymax = ymin;
    for (const auto& q : points) {
        xmin = std::min(xmin, q[0]);
        xmax = std::max(xmax, q[0]);
        ymin = std::min(ymin, q[1]);
        ymax = std::max(ymax, q[1]);
    }
    const double span = std::max(xmax - xmin, ymax - ymin);
    const double mx = 0.5 * (xmin + xmax), my = 0.5 * (ymin + ymax);

    std::vector<Vec2> p = points;
    p.push_back({mx - 200.0 * span, my - 100.0 * span});
    p.push_back({mx + 200.0 * span, my - 100.0 * span});
    p.push_back({mx, my + 200.0 * span});

    std::vector<Tri> tris;
    std::unordered_map<std::uint64_t, int> edge_owner;  // directed edge -> triangle
    auto add = [&](int a, int b, int c) {
        tris.push_back(make_tri(p, a, b, c));
        const int id = static_cast<int>(tris.size()) - 1;
        const auto& v = tris.back().v;
        for (int e = 0; e < 3; ++e) edge_owner[key(v[e], v[(e + 1) % 3])] = id;
    };
    auto kill = [&](int t) {
        tris[t].alive = false;
        const auto& v = tris[t].v;
        for (int e = 0; e < 3; ++e) {
            auto it = edge_owner.find(key(v[e], v[(e + 1) % 3]));
            if (it != edge_owner.end() && it->second == t) edge_owner.erase(it);
        }
    };
    auto neighbor = [&](int a, int b) {
        auto it = edge_owner.find(key(b, a));
        return it == edge_owner.end() ? -1 : it->second;
    };
    add(n, n + 1, n + 2);

    std::vector<int> cavity, stack;
    std::vector<char> in_cavity;
    for (int i = 0; i < n; ++i) {
        const Vec2& q = p[i];
        int start = -1;
        for (int t = static_cast<int>(tris.size()) - 1; t >= 0 && start < 0; --t) {
            if (!tris[t].alive) continue;
            const auto& v = tris[t].v;
            if (orient(p[v[0]], p[v[1]], q) >= 0 && orient(p[v[1]], p[v[2]], q) >= 0 &&
                orient(p[v[2]], p[v[0]], q) >= 0)
                start = t;
        }
        if (start < 0) continue;  // duplicate or unlocatable point

        in_cavity.assign(tris.size(), 0);
        cavity.assign(1, start);
        in_cavity[start] = 1;
        stack.assign(1, start);
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const auto v = tris[t].v;
            for (int e = 0; e < 3; ++e) {
                const int nb = neighbor(v[e], v[(e + 1) % 3]);
                if (nb < 0 || in_cavity[nb] || !in_circumcircle(p, tris[nb], q)) continue;
                in_cavity[nb] = 1;
                cavity.push_back(nb);
                stack.push_back(nb);
            }
        }
        // grow until every cavity boundary edge is strictly visible from q
        for (bool grown = true; grown;) {
            grown = false;
            for (std::size_t c = 0; c < cavity.size(); ++c) {
                const auto v = tris[cavity[c]].v;
                for (int e = 0; e < 3; ++e) {
                    const int a = v[e], b = v[(e + 1) % 3];
                    const int nb = neighbor(a, b);
                    if (nb >= 0 && in_cavity[nb]) continue;
                    if (orient(p[a], p[b], q) > 0) continue;
                    if (nb < 0) continue;
                    in_cavity[nb] = 1;
                    cavity.push_back(nb);
                    grown = true;
                }
            }
        }

        std::vector<std::pair<int, int>> boundary;
        for (int t : cavity) {
            const auto& v = tris[t].v;
            for (int e = 0; e < 3; ++e) {
                const int a = v[e], b = v[(e + 1) % 3];
                const int nb = neighbor(a, b);
                if (nb < 0 || !in_cavity[nb]) boundary.emplace_back(a, b);
            }
        }
        for (int t : cavity) kill(t);
        for (const auto& [a, b] : boundary) {
            if (orient(p[a], p[b], q) <= 0.0L) continue;
            add(a, b, i);
        }
    }

    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris) {
        if (!t.alive || t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
        out.push_back(t.v);
    }
    for (auto& t : out) {
        auto it = std::min_element(t.begin(), t.end());
        std::rotate(t.begin(), it, t.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace spnp::detail
