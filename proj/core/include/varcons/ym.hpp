#pragma once

#include <vector>

#include "varcons/defect.hpp"
#include "varcons/descent.hpp"
#include "varcons/fem.hpp"
#include "varcons/flux.hpp"
#include "varcons/mesh.hpp"

namespace varcons {

// Empirical Young measure built from an iterate sequence: the space-time
// slab is partitioned into coarse cells of `coarsen` x `coarsen` elements
// (short cells at the far edges when the factor does not divide evenly), and
// each cell carries a normalized histogram over [z_min, z_max] of every
// iterate's values at the quadrature points inside the cell. Values outside
// the range are clamped into the end bins and counted.
struct EmpiricalYoungMeasure {
    SpaceTimeMesh mesh;
    int coarsen = 1;
    int cells_t = 0;
    int cells_x = 0;
    double z_min = -1.0;
    double z_max = 1.0;
    int bins = 1;
    std::vector<double> weights;  // cell-major, then bin: size cells_t*cells_x*bins
    long clamped_samples = 0;
    long total_samples = 0;

    int num_cells() const { return cells_t * cells_x; }
    int cell_of_element(int ei, int ej) const {
        return (ei / coarsen) * cells_x + (ej / coarsen);
    }
    double bin_center(int b) const {
        return z_min + (b + 0.5) * (z_max - z_min) / bins;
    }
    const double* cell_weights(int cell) const { return &weights[static_cast<size_t>(cell) * bins]; }
};

EmpiricalYoungMeasure empirical_measure(const std::vector<NodalField>& iterates,
                                        int coarsen, double z_min, double z_max,
                                        int bins);

// First moment and flux moment of the measure, evaluated per cell with the
// bin-midpoint rule and prolonged to nodal fields by averaging the values of
// the cells whose elements touch each node.
struct MeasureMoments {
    NodalField u_bar;
    NodalField f_bar;
};

MeasureMoments measure_moments(const EmpiricalYoungMeasure& measure,
                               const FluxModel& flux);

// Defect energy of the averaged fields: the defect problem is solved with
// u_bar in the field slot and f_bar in the flux slot, so the flux value is
// the measure's average rather than f(u_bar). A small value certifies that
// the measure satisfies the conservation law in the averaged sense.
double averaged_defect_energy(const ProblemData& problem, const MeasureMoments& moments,
                              double rel_tol = kDefectRelTolDefault);

enum class RunLabel {
    classical_weak_candidate,
    strong_ym_candidate,
    e_positive_no_solution,
    inconclusive,
};

const char* to_string(RunLabel label);

// Scale-relative thresholds for the run classifier. The classifier is a
// heuristic diagnostic over trends, not a proof of any limit behavior.
struct ClassifierThresholds {
    double e_factor = 1e-4;          // E_final <= e_factor * E_initial
    double increment_factor = 1e-3;  // tail increments <= factor * field scale
    double gradient_factor = 1e-3;   // grad_final <= factor * grad_initial
};

struct RunReport {
    double e_trend = 1.0;          // last-quartile mean over first-quartile mean
    double gradient_trend = 1.0;
    double increment_trend = 1.0;  // iterate Cauchy increments, same ratio
    bool e_small = false;
    bool increments_small = false;
    bool gradient_small = false;
    double e_initial = 0.0;
    double e_final = 0.0;
    RunLabel label = RunLabel::inconclusive;
};

// Labels a descent run: classical-weak-candidate when the energy collapsed
// and the iterates settled, strong-YM-candidate when the energy collapsed
// while the iterates kept moving (oscillation), E-positive-no-solution when
// the gradient died with the energy stuck above tolerance, inconclusive
// otherwise.
RunReport classify_run(const DescentHistory& history,
                       const std::vector<NodalField>& iterates,
                       const ClassifierThresholds& thresholds = {});

}  // namespace varcons
