#pragma once

#include <string>
#include <vector>

#include "varcons/descent.hpp"
#include "varcons/mesh.hpp"

namespace varcons::cli {

// Formats a double with 17 significant digits, enough to round-trip IEEE
// binary64 exactly so reruns produce byte-identical artifacts.
std::string format_double(double value);

// One output row: preformatted cells joined by commas.
using CsvRow = std::vector<std::string>;

void write_csv(const std::string& path, const CsvRow& header,
               const std::vector<CsvRow>& rows);

// history.csv: iter,E,grad_norm,step,halvings with one row per record.
void write_history_csv(const std::string& path, const DescentHistory& history);

// Nodal field as t,x,value triples, node-major in t then x.
void write_field_csv(const std::string& path, const NodalField& field,
                     const std::string& value_name);

// t,x,u,u_exact,abs_err rows for a field with a known exact solution.
void write_comparison_csv(const std::string& path, const NodalField& field,
                          const std::vector<double>& exact);

// Binary P5 grayscale image of the nodal values, rows ordered t = 0 upward,
// mapped linearly from [min, max] to [0, 255]. A constant field maps to 128.
void write_heatmap_pgm(const std::string& path, const NodalField& field);

// Creates the directory (and parents) if needed; throws on failure.
void ensure_directory(const std::string& path);

}  // namespace varcons::cli
