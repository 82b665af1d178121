#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace varcons {

// Uniform tensor-product mesh of bilinear quadrilaterals on the space-time
// slab (0, t_final) x (x_min, x_max). Time is the first coordinate: node
// (i, j) sits at (i * dt, x_min + j * dx) and global node numbering walks
// space fastest, a = i * (nx + 1) + j. Element (ei, ej) spans time levels
// [ei, ei+1] and space columns [ej, ej+1].
struct SpaceTimeMesh {
    int nt = 0;
    int nx = 0;
    double t_final = 1.0;
    double x_min = -1.0;
    double x_max = 1.0;

    double dt() const { return t_final / nt; }
    double dx() const { return (x_max - x_min) / nx; }
    int num_nodes() const { return (nt + 1) * (nx + 1); }
    int num_elements() const { return nt * nx; }

    int node_index(int i, int j) const { return i * (nx + 1) + j; }
    double node_t(int i) const { return t_final * i / nt; }
    double node_x(int j) const { return x_min + (x_max - x_min) * j / nx; }

    // Corner nodes of element (ei, ej) in the fixed local order
    // (i,j), (i,j+1), (i+1,j), (i+1,j+1); see reference_shape below for the
    // matching reference-square corners.
    std::array<int, 4> element_nodes(int ei, int ej) const {
        int base = node_index(ei, ej);
        return {base, base + 1, base + nx + 1, base + nx + 2};
    }

    bool operator==(const SpaceTimeMesh&) const = default;
};

// Validates the discretization parameters before handing back a mesh.
inline SpaceTimeMesh build_mesh(int nt, int nx, double t_final, double x_min,
                                double x_max) {
    if (nt < 1 || nx < 1) {
        throw std::invalid_argument("build_mesh: need nt >= 1 and nx >= 1, got nt=" +
                                    std::to_string(nt) + " nx=" + std::to_string(nx));
    }
    if (!(t_final > 0.0) || !std::isfinite(t_final)) {
        throw std::invalid_argument("build_mesh: t_final must be positive and finite");
    }
    if (!(x_max > x_min) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
        throw std::invalid_argument("build_mesh: need finite x_min < x_max");
    }
    return SpaceTimeMesh{nt, nx, t_final, x_min, x_max};
}

// Scalar field given by nodal values on a SpaceTimeMesh, the basic currency
// of the discretization. Values are stored in global node order.
struct NodalField {
    SpaceTimeMesh mesh;
    std::vector<double> values;

    NodalField() = default;
    explicit NodalField(const SpaceTimeMesh& m, double fill = 0.0)
        : mesh(m), values(static_cast<size_t>(m.num_nodes()), fill) {}

    double& operator()(int i, int j) { return values[mesh.node_index(i, j)]; }
    double operator()(int i, int j) const { return values[mesh.node_index(i, j)]; }
};

inline void require_same_mesh(const SpaceTimeMesh& a, const SpaceTimeMesh& b,
                              const char* where) {
    if (!(a == b)) {
        throw std::invalid_argument(std::string(where) +
                                    ": fields live on different meshes");
    }
}

// Bilinear shape functions on the reference square [-1,1]^2. Local corner k
// sits at (xi_k, eta_k) with xi mapping to time and eta to space, ordered to
// match SpaceTimeMesh::element_nodes.
inline constexpr std::array<double, 4> kRefXi{-1.0, -1.0, 1.0, 1.0};
inline constexpr std::array<double, 4> kRefEta{-1.0, 1.0, -1.0, 1.0};

inline double reference_shape(int k, double xi, double eta) {
    return 0.25 * (1.0 + kRefXi[k] * xi) * (1.0 + kRefEta[k] * eta);
}
inline double reference_shape_dxi(int k, double xi, double eta) {
    (void)xi;
    return 0.25 * kRefXi[k] * (1.0 + kRefEta[k] * eta);
}
inline double reference_shape_deta(int k, double xi, double eta) {
    (void)eta;
    return 0.25 * kRefEta[k] * (1.0 + kRefXi[k] * xi);
}

// Tensor 2x2 Gauss rule on the reference square (weights are all 1). This
// rule integrates the bilinear-form integrands here exactly, which is what
// makes the discrete compatibility identities hold to rounding instead of to
// quadrature error.
struct QuadraturePoint {
    double xi;
    double eta;
    double weight;
};

inline const std::array<QuadraturePoint, 4>& gauss_2x2() {
    static const double g = 1.0 / std::sqrt(3.0);
    static const std::array<QuadraturePoint, 4> pts{{
        {-g, -g, 1.0},
        {-g, g, 1.0},
        {g, -g, 1.0},
        {g, g, 1.0},
    }};
    return pts;
}

// Two-point Gauss rule on [-1, 1] for the edge integrals in the load vector.
inline const std::array<std::pair<double, double>, 2>& gauss_edge() {
    static const double g = 1.0 / std::sqrt(3.0);
    static const std::array<std::pair<double, double>, 2> pts{{{-g, 1.0}, {g, 1.0}}};
    return pts;
}

}  // namespace varcons
