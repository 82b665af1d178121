#include "varcons/ym.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace varcons {

EmpiricalYoungMeasure empirical_measure(const std::vector<NodalField>& iterates,
                                        int coarsen, double z_min, double z_max,
                                        int bins) {
    if (iterates.empty()) {
        throw std::invalid_argument("empirical_measure: need at least one iterate");
    }
    if (coarsen < 1) {
        throw std::invalid_argument("empirical_measure: coarsening factor must be >= 1");
    }
    if (bins < 1) {
        throw std::invalid_argument("empirical_measure: need at least one bin");
    }
    if (!(z_max > z_min)) {
        throw std::invalid_argument("empirical_measure: z_range is empty");
    }
    const SpaceTimeMesh& mesh = iterates.front().mesh;
    for (const NodalField& field : iterates) {
        require_same_mesh(field.mesh, mesh, "empirical_measure");
    }

    EmpiricalYoungMeasure measure;
    measure.mesh = mesh;
    measure.coarsen = coarsen;
    measure.cells_t = (mesh.nt + coarsen - 1) / coarsen;
    measure.cells_x = (mesh.nx + coarsen - 1) / coarsen;
    measure.z_min = z_min;
    measure.z_max = z_max;
    measure.bins = bins;
    measure.weights.assign(static_cast<size_t>(measure.num_cells()) * bins, 0.0);

    const double width = (z_max - z_min) / bins;
    std::vector<long> cell_counts(static_cast<size_t>(measure.num_cells()), 0);
    for (const NodalField& field : iterates) {
        const std::vector<double> values = quad_values(field);
        for (int ei = 0; ei < mesh.nt; ++ei) {
            for (int ej = 0; ej < mesh.nx; ++ej) {
                const int cell = measure.cell_of_element(ei, ej);
                const size_t base = (static_cast<size_t>(ei) * mesh.nx + ej) * 4;
                for (int q = 0; q < 4; ++q) {
                    double z = values[base + q];
                    if (z < z_min || z > z_max) {
                        ++measure.clamped_samples;
                        z = std::clamp(z, z_min, z_max);
                    }
                    int bin = static_cast<int>((z - z_min) / width);
                    bin = std::clamp(bin, 0, bins - 1);
                    measure.weights[static_cast<size_t>(cell) * bins + bin] += 1.0;
                    ++cell_counts[cell];
                    ++measure.total_samples;
                }
            }
        }
    }
    for (int cell = 0; cell < measure.num_cells(); ++cell) {
        const double count = static_cast<double>(cell_counts[cell]);
        for (int b = 0; b < bins; ++b) {
            measure.weights[static_cast<size_t>(cell) * bins + b] /= count;
        }
    }
    return measure;
}

MeasureMoments measure_moments(const EmpiricalYoungMeasure& measure,
                               const FluxModel& flux) {
    const SpaceTimeMesh& mesh = measure.mesh;
    std::vector<double> cell_u(static_cast<size_t>(measure.num_cells()), 0.0);
    std::vector<double> cell_f(static_cast<size_t>(measure.num_cells()), 0.0);
    for (int cell = 0; cell < measure.num_cells(); ++cell) {
        const double* w = measure.cell_weights(cell);
        for (int b = 0; b < measure.bins; ++b) {
            const double z = measure.bin_center(b);
            cell_u[cell] += w[b] * z;
            cell_f[cell] += w[b] * flux.f(z);
        }
    }

    // Prolong the per-cell constants to nodes: each node averages the cell
    // values of the (up to four) elements it belongs to.
    MeasureMoments moments{NodalField(mesh), NodalField(mesh)};
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            double sum_u = 0.0, sum_f = 0.0;
            int count = 0;
            for (int ei = i - 1; ei <= i; ++ei) {
                if (ei < 0 || ei >= mesh.nt) continue;
                for (int ej = j - 1; ej <= j; ++ej) {
                    if (ej < 0 || ej >= mesh.nx) continue;
                    const int cell = measure.cell_of_element(ei, ej);
                    sum_u += cell_u[cell];
                    sum_f += cell_f[cell];
                    ++count;
                }
            }
            moments.u_bar(i, j) = sum_u / count;
            moments.f_bar(i, j) = sum_f / count;
        }
    }
    return moments;
}

double averaged_defect_energy(const ProblemData& problem, const MeasureMoments& moments,
                              double rel_tol) {
    require_same_mesh(moments.u_bar.mesh, problem.mesh, "averaged_defect_energy");
    require_same_mesh(moments.f_bar.mesh, problem.mesh, "averaged_defect_energy");
    const DefectOperator op(problem);
    const NodalField v = op.solve_constrained(
        assemble_defect_rhs_from_values(problem, quad_values(moments.u_bar),
                                        quad_values(moments.f_bar)),
        rel_tol);
    return 0.5 * integrate_h1_pairing(v, v);
}

const char* to_string(RunLabel label) {
    switch (label) {
        case RunLabel::classical_weak_candidate: return "classical-weak-candidate";
        case RunLabel::strong_ym_candidate: return "strong-YM-candidate";
        case RunLabel::e_positive_no_solution: return "E-positive-no-solution";
        case RunLabel::inconclusive: return "inconclusive";
    }
    return "unknown";
}

namespace {

// Mean of the first and last quarters of a series (at least one element
// each), plus their ratio with 0/0 reading as flat.
struct TrendSummary {
    double first = 0.0;
    double last = 0.0;
    double ratio = 1.0;
};

TrendSummary trend(const std::vector<double>& series) {
    TrendSummary summary;
    if (series.empty()) return summary;
    const size_t quarter = std::max<size_t>(1, series.size() / 4);
    double first_sum = 0.0, last_sum = 0.0;
    for (size_t i = 0; i < quarter; ++i) first_sum += series[i];
    for (size_t i = series.size() - quarter; i < series.size(); ++i) last_sum += series[i];
    summary.first = first_sum / quarter;
    summary.last = last_sum / quarter;
    if (summary.first != 0.0) {
        summary.ratio = summary.last / summary.first;
    } else {
        summary.ratio = summary.last == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    return summary;
}

}  // namespace

RunReport classify_run(const DescentHistory& history,
                       const std::vector<NodalField>& iterates,
                       const ClassifierThresholds& thresholds) {
    if (history.records.empty()) {
        throw std::invalid_argument("classify_run: history is empty");
    }
    std::vector<double> energies, gradients;
    energies.reserve(history.records.size());
    gradients.reserve(history.records.size());
    for (const DescentRecord& record : history.records) {
        energies.push_back(record.energy);
        gradients.push_back(record.gradient_norm);
    }
    std::vector<double> increments;
    for (size_t k = 0; k + 1 < iterates.size(); ++k) {
        NodalField diff = iterates[k + 1];
        for (size_t a = 0; a < diff.values.size(); ++a) {
            diff.values[a] -= iterates[k].values[a];
        }
        increments.push_back(lumped_l2_norm(diff));
    }

    RunReport report;
    const TrendSummary e_trend = trend(energies);
    const TrendSummary g_trend = trend(gradients);
    const TrendSummary inc_trend = trend(increments);
    report.e_trend = e_trend.ratio;
    report.gradient_trend = g_trend.ratio;
    report.increment_trend = inc_trend.ratio;
    report.e_initial = energies.front();
    report.e_final = energies.back();

    report.e_small = report.e_final <= thresholds.e_factor * report.e_initial;
    report.gradient_small =
        gradients.back() <= thresholds.gradient_factor * gradients.front();

    // Increment scale: the larger of the first and last iterate norms guards
    // the degenerate zero start (u_init = 0 would otherwise make every
    // nonzero increment count as large).
    if (increments.empty()) {
        report.increments_small = true;  // a single snapshot cannot oscillate
    } else {
        const double scale = std::max(lumped_l2_norm(iterates.front()),
                                      lumped_l2_norm(iterates.back()));
        report.increments_small = inc_trend.last <= thresholds.increment_factor * scale;
    }

    if (report.e_small && report.increments_small) {
        report.label = RunLabel::classical_weak_candidate;
    } else if (report.e_small) {
        report.label = RunLabel::strong_ym_candidate;
    } else if (report.gradient_small) {
        report.label = RunLabel::e_positive_no_solution;
    } else {
        report.label = RunLabel::inconclusive;
    }
    return report;
}

}  // namespace varcons
