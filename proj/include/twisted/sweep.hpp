#pragma once

// Parameter sweeps, single grid runs and the verification suites behind the
// command-line front end.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twisted/grid.hpp"

namespace twisted::sweep {

struct CurveRequest {
  int dim = 2;
  double alpha_min = 0.01;
  double alpha_max = 0.99;
  int steps = 100;
  int jobs = 1;
  /// Adds closed-form rows at alpha = 0 and alpha = 1.
  bool with_limits = false;
};

struct CurveRow {
  double alpha, m, lambda, omega, M, m_lb, lambda_lb, dm_dalpha, dlambda_dalpha;
};

/// Throws InputError on an invalid request.
void validate(const CurveRequest& req);
/// Rows in increasing alpha, computed on up to `jobs` threads.
std::vector<CurveRow> compute_curve(const CurveRequest& req);
/// m >= m_lb and lambda >= lambda_lb, up to a few ulps at the closed-form endpoints.
bool within_bounds(const CurveRow& row);
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& rows);

struct MCurveRequest {
  int dim = 2;
  double alpha = 1.0 / 6;
  double m_min = 0.01;
  double m_max = 1.0;
  int steps = 100;
  int jobs = 1;
};

struct MCurveRow {
  double m, lambda;
  std::string branch;
  double upper_bound_f;
};

void validate(const MCurveRequest& req);
std::vector<MCurveRow> compute_mcurve(const MCurveRequest& req);
bool within_bounds(const MCurveRow& row);
void write_mcurve_csv(std::ostream& out, const std::vector<MCurveRow>& rows);

enum class PlotKind { curve, mcurve };

/// gnuplot script plotting the columns of `csv_path`.
void write_gnuplot(std::ostream& out, const std::string& csv_path, PlotKind kind);

struct GridRequest {
  double h = 0.0;
  grid::ShapeSpec shapes;
  grid::ConstraintClass g_class = grid::ConstraintClass::constant;
  double alpha = 1.0;
  std::vector<int> alpha_shapes{0};
  /// Whitespace-separated weights, one per interior node, x index fastest.
  std::optional<std::filesystem::path> values_file;
};

/// Parses a JSON grid request; relative values_file paths resolve
/// against `base_dir`. Throws InputError on malformed input.
GridRequest parse_grid_request(std::string_view json_text, const std::filesystem::path& base_dir = {});

struct GridRecord {
  double lambda, lambda1, lambda2, xi;
  int nodal_count;
  double area;
  int iterations;
};

GridRecord run_grid(const GridRequest& req);
std::string to_json(const GridRecord& rec);

struct Check {
  std::string suite;
  std::string name;
  bool pass;
  std::string detail;
};

/// suite in {bessel, twoball, grid, all}; throws InputError otherwise.
std::vector<Check> run_verify(std::string_view suite);
void write_report(std::ostream& out, const std::vector<Check>& checks);

} // namespace twisted::sweep
