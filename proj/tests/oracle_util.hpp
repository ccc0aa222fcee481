#pragma once

// Shared test-side oracles: dense coordinate-based assembly and small field
// factories. Everything here is intentionally independent of the library's
// precomputed mesh tables so it can serve as a cross-check.

#include <cmath>
#include <functional>
#include <vector>

#include "doctest.h"
#include "fpl/field.hpp"
#include "fpl/mesh.hpp"
#include "fpl/rng.hpp"

namespace testutil {

inline fpl::Field random_constrained(const fpl::Mesh& m, std::uint64_t seed, double amp = 1.0) {
    fpl::Field u = fpl::Field::zeros(m);
    fpl::Rng rng(seed);
    for (std::int64_t i = 0; i < m.node_count; ++i)
        if (!m.dirichlet[static_cast<std::size_t>(i)]) u[i] = rng.uniform(-amp, amp);
    return u;
}

inline fpl::Field coord_field(const fpl::Mesh& m,
                              const std::function<double(const std::vector<double>&)>& fn) {
    fpl::Field u = fpl::Field::zeros(m, false);
    std::vector<double> x(static_cast<std::size_t>(m.dim));
    for (std::int64_t i = 0; i < m.node_count; ++i) {
        for (int k = 0; k < m.dim; ++k) x[static_cast<std::size_t>(k)] = m.node_coord(i, k);
        u[i] = fn(x);
    }
    return u;
}

inline fpl::Field ones_field(const fpl::Mesh& m) {
    return coord_field(m, [](const std::vector<double>&) { return 1.0; });
}

// Dense inverse by Gauss-Jordan with partial pivoting; also reports |det|.
inline std::vector<double> mat_inverse(std::vector<double> a, int n, double* absdet) {
    std::vector<double> inv(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i * n + i)] = 1.0;
    double det = 1.0;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::abs(a[static_cast<std::size_t>(r * n + c)]) >
                std::abs(a[static_cast<std::size_t>(piv * n + c)]))
                piv = r;
        if (piv != c) {
            for (int k = 0; k < n; ++k) {
                std::swap(a[static_cast<std::size_t>(c * n + k)],
                          a[static_cast<std::size_t>(piv * n + k)]);
                std::swap(inv[static_cast<std::size_t>(c * n + k)],
                          inv[static_cast<std::size_t>(piv * n + k)]);
            }
        }
        const double d = a[static_cast<std::size_t>(c * n + c)];
        det *= d;
        REQUIRE(std::abs(d) > 1e-14);
        for (int k = 0; k < n; ++k) {
            a[static_cast<std::size_t>(c * n + k)] /= d;
            inv[static_cast<std::size_t>(c * n + k)] /= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == c) continue;
            const double m = a[static_cast<std::size_t>(r * n + c)];
            if (m == 0.0) continue;
            for (int k = 0; k < n; ++k) {
                a[static_cast<std::size_t>(r * n + k)] -= m * a[static_cast<std::size_t>(c * n + k)];
                inv[static_cast<std::size_t>(r * n + k)] -=
                    m * inv[static_cast<std::size_t>(c * n + k)];
            }
        }
    }
    *absdet = std::abs(det);
    return inv;
}

// Stiffness matrix of the euclidean Dirichlet form assembled from vertex
// coordinates alone: basis gradients come from inverting the edge matrix of
// each simplex, fully independent of the mesh's precomputed tables.
inline std::vector<double> dense_stiffness(const fpl::Mesh& m) {
    const int d = m.dim;
    const std::size_t nn = static_cast<std::size_t>(m.node_count);
    std::vector<double> a(nn * nn, 0.0);
    std::vector<std::int64_t> nodes(static_cast<std::size_t>(d) + 1);
    double fact = 1.0;
    for (int k = 2; k <= d; ++k) fact *= k;
    for (std::int64_t s = 0; s < m.simplex_count; ++s) {
        m.simplex_nodes(s, nodes.data());
        std::vector<double> edges(static_cast<std::size_t>(d) * static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                edges[static_cast<std::size_t>(k * d + j)] =
                    m.node_coord(nodes[static_cast<std::size_t>(j) + 1], k) -
                    m.node_coord(nodes[0], k);
        double adet = 0.0;
        const std::vector<double> inv = mat_inverse(edges, d, &adet);
        const double vol = adet / fact;
        // rows of inv are the gradients of the barycentric functions 1..d
        std::vector<double> grads(static_cast<std::size_t>(d + 1) * static_cast<std::size_t>(d),
                                  0.0);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                const double g = inv[static_cast<std::size_t>(j * d + k)];
                grads[static_cast<std::size_t>((j + 1) * d + k)] = g;
                grads[static_cast<std::size_t>(k)] -= g;
            }
        for (int v = 0; v <= d; ++v)
            for (int w = 0; w <= d; ++w) {
                double dot = 0.0;
                for (int k = 0; k < d; ++k)
                    dot += grads[static_cast<std::size_t>(v * d + k)] *
                           grads[static_cast<std::size_t>(w * d + k)];
                a[static_cast<std::size_t>(nodes[static_cast<std::size_t>(v)]) * nn +
                  static_cast<std::size_t>(nodes[static_cast<std::size_t>(w)])] += vol * dot;
            }
    }
    return a;
}

// Lumped load vector m_i f(x2_i) on free nodes, zero on the boundary.
inline std::vector<double> dense_load(const fpl::Mesh& m, const fpl::Field& f) {
    std::vector<double> b(static_cast<std::size_t>(m.node_count), 0.0);
    for (std::int64_t i = 0; i < m.node_count; ++i)
        if (!m.dirichlet[static_cast<std::size_t>(i)])
            b[static_cast<std::size_t>(i)] =
                m.lumped_mass[static_cast<std::size_t>(i)] * f[m.cross_index(i)];
    return b;
}

// Direct dense solve of the constrained system A u = b (rows/cols of fixed
// nodes replaced by the identity), via the Gauss-Jordan inverse above.
inline std::vector<double> dense_dirichlet_solve(const fpl::Mesh& m, const fpl::Field& f) {
    const std::size_t nn = static_cast<std::size_t>(m.node_count);
    std::vector<double> a = dense_stiffness(m);
    const std::vector<double> b = dense_load(m, f);
    for (std::size_t i = 0; i < nn; ++i) {
        if (!m.dirichlet[i]) continue;
        for (std::size_t j = 0; j < nn; ++j) {
            a[i * nn + j] = i == j ? 1.0 : 0.0;
            a[j * nn + i] = i == j ? 1.0 : 0.0;
        }
    }
    double adet = 0.0;
    const std::vector<double> inv = mat_inverse(a, static_cast<int>(nn), &adet);
    std::vector<double> u(nn, 0.0);
    for (std::size_t i = 0; i < nn; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < nn; ++j) s += inv[i * nn + j] * b[j];
        u[i] = s;
    }
    return u;
}

} // namespace testutil
