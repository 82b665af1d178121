#include "varcons_run/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace varcons::cli {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

namespace {

std::ofstream open_output(const std::string& path, std::ios::openmode mode) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

void write_row(std::ofstream& out, const CsvRow& row) {
    for (size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out << ',';
        out << row[i];
    }
    out << '\n';
}

}  // namespace

void write_csv(const std::string& path, const CsvRow& header,
               const std::vector<CsvRow>& rows) {
    std::ofstream out = open_output(path, std::ios::out);
    write_row(out, header);
    for (const CsvRow& row : rows) write_row(out, row);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void write_history_csv(const std::string& path, const DescentHistory& history) {
    std::vector<CsvRow> rows;
    rows.reserve(history.records.size());
    for (const DescentRecord& r : history.records) {
        rows.push_back({std::to_string(r.index), format_double(r.energy),
                        format_double(r.gradient_norm), format_double(r.step_size),
                        std::to_string(r.halvings)});
    }
    write_csv(path, {"iter", "E", "grad_norm", "step", "halvings"}, rows);
}

void write_field_csv(const std::string& path, const NodalField& field,
                     const std::string& value_name) {
    const SpaceTimeMesh& mesh = field.mesh;
    std::vector<CsvRow> rows;
    rows.reserve(static_cast<size_t>(mesh.num_nodes()));
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            rows.push_back({format_double(mesh.node_t(i)), format_double(mesh.node_x(j)),
                            format_double(field(i, j))});
        }
    }
    write_csv(path, {"t", "x", value_name}, rows);
}

void write_comparison_csv(const std::string& path, const NodalField& field,
                          const std::vector<double>& exact) {
    const SpaceTimeMesh& mesh = field.mesh;
    if (exact.size() != field.values.size()) {
        throw std::invalid_argument("comparison: exact values size mismatch");
    }
    std::vector<CsvRow> rows;
    rows.reserve(exact.size());
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            const size_t a = static_cast<size_t>(mesh.node_index(i, j));
            const double u = field.values[a];
            rows.push_back({format_double(mesh.node_t(i)), format_double(mesh.node_x(j)),
                            format_double(u), format_double(exact[a]),
                            format_double(std::abs(u - exact[a]))});
        }
    }
    write_csv(path, {"t", "x", "u", "u_exact", "abs_err"}, rows);
}

void write_heatmap_pgm(const std::string& path, const NodalField& field) {
    const SpaceTimeMesh& mesh = field.mesh;
    const auto [lo_it, hi_it] =
        std::minmax_element(field.values.begin(), field.values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    const double span = hi - lo;

    std::ofstream out = open_output(path, std::ios::out | std::ios::binary);
    out << "P5\n" << (mesh.nx + 1) << ' ' << (mesh.nt + 1) << "\n255\n";
    std::vector<unsigned char> row(static_cast<size_t>(mesh.nx + 1));
    for (int i = 0; i <= mesh.nt; ++i) {
        for (int j = 0; j <= mesh.nx; ++j) {
            double shade = 128.0;
            if (span > 0.0) shade = 255.0 * (field(i, j) - lo) / span;
            row[static_cast<size_t>(j)] =
                static_cast<unsigned char>(std::clamp(shade, 0.0, 255.0));
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size()));
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void ensure_directory(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory '" + path +
                                 "': " + ec.message());
    }
}

}  // namespace varcons::cli
