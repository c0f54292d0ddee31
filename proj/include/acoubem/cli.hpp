#pragma once

#include "acoubem/fields.hpp"
#include "acoubem/formulations.hpp"
#include "acoubem/precond.hpp"
#include "acoubem/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace acoubem {

struct SphereSpec {
  double radius = 0.0;
  Vec3 center = Vec3::Zero();
};

struct RunSpec {
  Formulation formulation = Formulation::Pmchwt;
  PreconditionerKind preconditioner = PreconditionerKind::Mass;
};

/// Flat key/value run configuration; see README for the file grammar.
struct RunConfig {
  std::vector<SphereSpec> spheres;
  std::vector<std::string> msh_files;
  Material exterior = water();
  std::vector<Material> interiors;  // one per interface, or a single entry for all
  std::vector<double> frequencies;
  double n_h = 6.0;
  std::vector<RunSpec> runs{RunSpec{}};
  OsrcSettings osrc;
  std::optional<double> r_eff;
  GmresOptions gmres;
  QuadratureConfig quadrature;
  Vec3 direction = Vec3(1.0, 0.0, 0.0);
  cplx amplitude{1.0, 0.0};
  std::string report_path;
  std::string grid_path;
  std::string grid_preset = "square";
  std::string solution_path;
  std::string sweep_path;
  int threads = 0;
};

/// Applies one `key = value` assignment. Throws ConfigError for unknown keys
/// and malformed values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Reads `key = value` lines; `#` starts a comment. Overrides of the form
/// `key=value` are applied afterwards in order.
RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Throws ConfigError unless there is at least one frequency, n_h >= 2, a
/// nonempty geometry whose files exist, and a material per interface.
void validate_config(const RunConfig& config);

/// Interfaces for one frequency. Sphere meshes are generated with
/// h = min(lambda_0, lambda_m) / n_h.
Scene build_scene(const RunConfig& config, double frequency);

struct Timings {
  double assembly_s = 0.0;
  double solve_s = 0.0;
  double fields_s = 0.0;
  double total_s = 0.0;
};

struct SolveOutcome {
  RunSpec run;
  double frequency = 0.0;
  std::vector<Eigen::Index> interface_dofs;  // trace dofs per interface (2 x vertices)
  Eigen::Index dofs = 0;
  SolveReport report;
  SurfaceSolution solution;
  Timings timings;
};

struct VerifyOutcome {
  SolveOutcome solve;
  double error = 0.0;          // amplitude norm against the series solution
  double complex_error = 0.0;  // complex-valued norm
  FieldGrid bem, oracle;
};

/// Single centred sphere against the series solution on the grid preset.
/// Writes the JSON report and CSV grid when the paths are set.
VerifyOutcome run_verify_sphere(const RunConfig& config);

struct SweepRow {
  double frequency_hz = 0.0;
  RunSpec run;
  Eigen::Index dofs = 0;
  int iterations = 0;
  bool converged = false;
  double t_per_iter_s = 0.0;
  double t_total_s = 0.0;
};

/// One row per (frequency, run); non-converged runs are recorded, not fatal.
std::vector<SweepRow> run_sweep(const RunConfig& config);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Any geometry. Writes the binary solution with its JSON sidecar and the
/// optional field grid.
SolveOutcome run_solve(const RunConfig& config);

/// Little-endian float64 re/im pairs: phi_1, psi_1, phi_2, psi_2, ...
void write_solution_binary(const std::string& path, const SurfaceSolution& solution);
SurfaceSolution read_solution_binary(const std::string& path, const std::vector<Eigen::Index>& vertex_counts);

}  // namespace acoubem
