#include "acoubem/cli.hpp"

#include "acoubem/analytic.hpp"
#include "acoubem/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace acoubem {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not an integer");
  return static_cast<int>(x);
}

std::vector<double> numbers(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::string s = v;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(to_double(key, tok));
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
  const auto x = numbers(key, v);
  if (x.size() != 3) throw Error(ErrorCode::ConfigError, key + ": expected three components");
  return Vec3(x[0], x[1], x[2]);
}

Material to_material(const std::string& key, const std::string& v) {
  if (auto preset = material_preset(v)) return *preset;
  const auto x = numbers(key, v);
  if (x.size() != 4) throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is neither a preset nor 'rho c alpha b'");
  Material m{"custom", x[0], x[1], x[2], x[3]};
  try {
    check_material(m);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, key + ": " + e.what());
  }
  return m;
}

nlohmann::json vec_json(const Vec3& v) { return {v[0], v[1], v[2]}; }

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["n_h"] = c.n_h;
  j["exterior"] = c.exterior.name;
  for (const auto& m : c.interiors) j["interiors"].push_back(m.name);
  for (const auto& s : c.spheres) j["spheres"].push_back({{"radius", s.radius}, {"center", vec_json(s.center)}});
  for (const auto& f : c.msh_files) j["msh"].push_back(f);
  j["osrc"] = {{"n_pade", c.osrc.n_pade}, {"theta_degrees", c.osrc.theta * 180.0 / std::numbers::pi}};
  if (c.r_eff) j["osrc"]["r_eff"] = *c.r_eff;
  j["gmres"] = {{"tol", c.gmres.tol}, {"max_iter", c.gmres.max_iter}};
  j["direction"] = vec_json(c.direction);
  return j;
}

nlohmann::json outcome_json(const SolveOutcome& o) {
  nlohmann::json j;
  j["frequency_hz"] = o.frequency;
  j["formulation"] = to_string(o.run.formulation);
  j["preconditioner"] = to_string(o.run.preconditioner);
  j["dofs"] = o.dofs;
  j["interface_dofs"] = o.interface_dofs;
  j["iterations"] = o.report.iterations;
  j["converged"] = o.report.converged;
  j["solver"] = nlohmann::json::parse(to_json(o.report));
  j["timings"] = {{"assembly_s", o.timings.assembly_s},
                  {"solve_s", o.timings.solve_s},
                  {"fields_s", o.timings.fields_s},
                  {"total_s", o.timings.total_s}};
  return j;
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

void write_grid(const std::string& path, const FieldGrid& grid) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  write_grid_csv(out, grid);
}

std::vector<Vec3> grid_points(const RunConfig& config) {
  if (config.grid_preset == "square") return square_grid_points();
  throw Error(ErrorCode::ConfigError, "unknown grid preset '" + config.grid_preset + "'");
}

const RunSpec& single_run(const RunConfig& config, const char* command) {
  if (config.runs.size() != 1) throw Error(ErrorCode::ConfigError, std::string(command) + " needs exactly one run");
  if (config.frequencies.size() != 1) throw Error(ErrorCode::ConfigError, std::string(command) + " needs exactly one frequency");
  return config.runs.front();
}

SolveOutcome solve_once(const RunConfig& config, const Scene& scene, double frequency, const RunSpec& run,
                        OperatorCache& cache, std::optional<BlockSystem>& system_out) {
  const auto t0 = Clock::now();
  SolveOutcome o;
  o.run = run;
  o.frequency = frequency;
  const PlaneWave wave(config.direction, cplx(1.0, 0.0), config.amplitude);
  system_out.emplace(build_system(run.formulation, scene, frequency, wave, cache));
  const BlockSystem& sys = *system_out;
  const auto pre = make_preconditioner(run.preconditioner, sys, config.osrc);
  o.timings.assembly_s = seconds_since(t0);

  const auto t1 = Clock::now();
  const auto result = gmres([&](const CVector& x) { return sys.apply(x); }, [&](const CVector& x) { return pre->apply(x); },
                            sys.rhs(), config.gmres);
  o.timings.solve_s = seconds_since(t1);
  o.report = result.report;
  o.solution = split_solution(sys, result.x);
  o.dofs = sys.dimension();
  for (std::size_t m = 0; m < sys.interface_count(); ++m) o.interface_dofs.push_back(2 * sys.interface(m).space->dof_count());
  o.timings.total_s = seconds_since(t0);
  return o;
}

PlaneWave incident(const RunConfig& config, const BlockSystem& sys) {
  return PlaneWave(config.direction, sys.k_exterior(), config.amplitude);
}

void write_le_double(std::ostream& out, double x) {
  const auto bits = std::bit_cast<std::uint64_t>(x);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

double read_le_double(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error(ErrorCode::DimensionMismatch, "solution file too short");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void set_config_value(RunConfig& c, const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (key == "geometry.spheres") {
    c.spheres.clear();
    for (const auto& item : split(v, ';')) {
      const auto x = numbers(key, item);
      if (x.size() != 1 && x.size() != 4) throw Error(ErrorCode::ConfigError, key + ": expected 'radius [x y z]'");
      SphereSpec s{x[0], x.size() == 4 ? Vec3(x[1], x[2], x[3]) : Vec3::Zero()};
      if (!(s.radius > 0.0)) throw Error(ErrorCode::ConfigError, key + ": radius must be positive");
      c.spheres.push_back(s);
    }
  } else if (key == "geometry.msh") {
    c.msh_files = split(v, ';');
  } else if (key == "medium.exterior") {
    c.exterior = to_material(key, v);
  } else if (key == "medium.interior") {
    c.interiors.clear();
    for (const auto& item : split(v, ';')) c.interiors.push_back(to_material(key, item));
  } else if (key == "frequencies") {
    c.frequencies = numbers(key, v);
  } else if (key == "n_h") {
    c.n_h = to_double(key, v);
  } else if (key == "runs") {
    c.runs.clear();
    for (const auto& item : split(v, ',')) {
      const auto slash = item.find('/');
      if (slash == std::string::npos) throw Error(ErrorCode::ConfigError, key + ": expected formulation/preconditioner");
      c.runs.push_back({formulation_from_string(trim(item.substr(0, slash))),
                        preconditioner_from_string(trim(item.substr(slash + 1)))});
    }
  } else if (key == "osrc.n_pade") {
    c.osrc.n_pade = to_int(key, v);
  } else if (key == "osrc.theta_degrees") {
    c.osrc.theta = to_double(key, v) * std::numbers::pi / 180.0;
  } else if (key == "osrc.r_eff") {
    c.r_eff = to_double(key, v);
  } else if (key == "gmres.tol") {
    c.gmres.tol = to_double(key, v);
  } else if (key == "gmres.max_iter") {
    c.gmres.max_iter = to_int(key, v);
  } else if (key == "quadrature.regular_order") {
    c.quadrature.regular_order = to_int(key, v);
  } else if (key == "quadrature.singular_order") {
    c.quadrature.singular_order = to_int(key, v);
  } else if (key == "incident.direction") {
    c.direction = to_vec3(key, v);
  } else if (key == "incident.amplitude") {
    const auto x = numbers(key, v);
    if (x.empty() || x.size() > 2) throw Error(ErrorCode::ConfigError, key + ": expected 're [im]'");
    c.amplitude = cplx(x[0], x.size() == 2 ? x[1] : 0.0);
  } else if (key == "output.report") {
    c.report_path = v;
  } else if (key == "output.grid") {
    c.grid_path = v;
  } else if (key == "output.grid_preset") {
    c.grid_preset = v;
  } else if (key == "output.solution") {
    c.solution_path = v;
  } else if (key == "output.sweep") {
    c.sweep_path = v;
  } else if (key == "threads") {
    c.threads = to_int(key, v);
    c.quadrature.threads = c.threads;
  } else {
    throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
  }
}

RunConfig parse_config(std::istream& in, const std::vector<std::string>& overrides) {
  RunConfig c;
  std::string line;
  int line_no = 0;
  auto assign = [&](const std::string& text, const std::string& where) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, where + ": expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    if (key.empty()) throw Error(ErrorCode::ConfigError, where + ": empty key");
    set_config_value(c, key, text.substr(eq + 1));
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    assign(line, "line " + std::to_string(line_no));
  }
  for (const auto& o : overrides) assign(o, "override '" + o + "'");
  return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open config '" + path + "'");
  return parse_config(in, overrides);
}

void validate_config(const RunConfig& c) {
  if (c.frequencies.empty()) throw Error(ErrorCode::ConfigError, "at least one frequency is required");
  for (double f : c.frequencies) {
    if (!(f > 0.0)) throw Error(ErrorCode::ConfigError, "frequencies must be positive");
  }
  if (!(c.n_h >= 2.0)) throw Error(ErrorCode::ConfigError, "n_h must be >= 2");
  const std::size_t count = c.spheres.size() + c.msh_files.size();
  if (count == 0) throw Error(ErrorCode::InvalidScene, "the geometry list is empty");
  for (const auto& f : c.msh_files) {
    if (!std::filesystem::exists(f)) throw Error(ErrorCode::ConfigError, "mesh file '" + f + "' does not exist");
  }
  if (c.interiors.size() != 1 && c.interiors.size() != count) {
    throw Error(ErrorCode::ConfigError, "medium.interior needs one material or one per interface");
  }
  if (c.runs.empty()) throw Error(ErrorCode::ConfigError, "no runs configured");
  for (const auto& r : c.runs) {
    const bool osrc = r.preconditioner == PreconditionerKind::OsrcInterior || r.preconditioner == PreconditionerKind::OsrcExterior;
    if (osrc && r.formulation != Formulation::PmchwtPermuted) {
      throw Error(ErrorCode::ConfigError, "OSRC preconditioners need the pmchwt-permuted formulation");
    }
  }
  if (c.osrc.n_pade < 1) throw Error(ErrorCode::ConfigError, "osrc.n_pade must be >= 1");
  if (!(c.osrc.theta >= 0.0 && c.osrc.theta < std::numbers::pi)) throw Error(ErrorCode::ConfigError, "osrc.theta_degrees must lie in [0, 180)");
  if (c.r_eff && !(*c.r_eff > 0.0)) throw Error(ErrorCode::ConfigError, "osrc.r_eff must be positive");
  if (!(c.gmres.tol > 0.0)) throw Error(ErrorCode::ConfigError, "gmres.tol must be positive");
  if (c.gmres.max_iter < 0) throw Error(ErrorCode::ConfigError, "gmres.max_iter must be >= 0");
  if (!(c.direction.norm() > 0.0)) throw Error(ErrorCode::ConfigError, "incident.direction must be nonzero");
}

Scene build_scene(const RunConfig& c, double frequency) {
  validate_config(c);
  Scene scene{c.exterior, {}};
  std::size_t m = 0;
  auto material = [&](std::size_t i) { return c.interiors.size() == 1 ? c.interiors.front() : c.interiors[i]; };
  for (const auto& s : c.spheres) {
    const Material mat = material(m++);
    const double h = element_size({c.exterior, mat}, frequency, c.n_h);
    const int level = subdivisions_for_density(s.radius, h);
    auto mesh = std::make_shared<const SurfaceMesh>(generate_icosphere(s.radius, level, s.center));
    scene.interfaces.push_back(Interface{mesh, mat, c.r_eff});
  }
  for (const auto& path : c.msh_files) {
    auto mesh = std::make_shared<const SurfaceMesh>(read_msh_file(path));
    scene.interfaces.push_back(Interface{mesh, material(m++), c.r_eff});
  }
  return scene;
}

VerifyOutcome run_verify_sphere(const RunConfig& config) {
  validate_config(config);
  const RunSpec run = single_run(config, "verify-sphere");
  if (config.spheres.size() != 1 || !config.msh_files.empty() || config.spheres.front().center.norm() != 0.0) {
    throw Error(ErrorCode::ConfigError, "verify-sphere needs a single sphere centred at the origin");
  }
  const double f = config.frequencies.front();
  const Scene scene = build_scene(config, f);
  OperatorCache cache(config.quadrature);
  std::optional<BlockSystem> sys;
  VerifyOutcome v;
  v.solve = solve_once(config, scene, f, run, cache, sys);

  const auto t0 = Clock::now();
  const auto points = grid_points(config);
  const PlaneWave wave = incident(config, *sys);
  v.bem = evaluate_potentials(*sys, v.solve.solution, wave, points, config.threads);
  v.solve.timings.fields_s = seconds_since(t0);

  const Material& inner = scene.interfaces.front().material;
  const auto series = sphere_coefficients(config.spheres.front().radius, sys->k_exterior(), wavenumber(inner, f),
                                          config.exterior.rho, inner.rho);
  v.oracle.points = points;
  v.oracle.regions = v.bem.regions;
  v.oracle.values.assign(points.size(), cplx(0.0, 0.0));
  std::vector<Vec3> kept;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (v.bem.regions[i].excluded) continue;
    kept.push_back(points[i]);
    index.push_back(i);
  }
  const auto values = series_field(series, kept, config.direction.normalized());
  for (std::size_t i = 0; i < kept.size(); ++i) v.oracle.values[index[i]] = config.amplitude * values[i];
  v.error = relative_error_grid(v.bem, v.oracle);
  v.complex_error = relative_complex_error_grid(v.bem, v.oracle);
  v.solve.timings.total_s += seconds_since(t0);

  if (!config.report_path.empty()) {
    nlohmann::json j = outcome_json(v.solve);
    j["command"] = "verify-sphere";
    j["error"] = v.error;
    j["complex_error"] = v.complex_error;
    j["grid"] = {{"preset", config.grid_preset},
                 {"points", points.size()},
                 {"excluded", std::count_if(v.bem.regions.begin(), v.bem.regions.end(), [](const Region& r) { return r.excluded; })}};
    j["config"] = config_json(config);
    write_json(config.report_path, j);
  }
  if (!config.grid_path.empty()) write_grid(config.grid_path, v.bem);
  return v;
}

std::vector<SweepRow> run_sweep(const RunConfig& config) {
  validate_config(config);
  if (config.frequencies.size() < 2) throw Error(ErrorCode::ConfigError, "sweep needs at least two frequencies");
  std::vector<SweepRow> rows;
  for (double f : config.frequencies) {
    const Scene scene = build_scene(config, f);
    OperatorCache cache(config.quadrature);
    for (const auto& run : config.runs) {
      std::optional<BlockSystem> sys;
      SweepRow r;
      r.frequency_hz = f;
      r.run = run;
      SolveOutcome o;
      try {
        o = solve_once(config, scene, f, run, cache, sys);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::Breakdown) throw;
        r.dofs = sys ? sys->dimension() : 0;
        rows.push_back(r);
        continue;
      }
      r.dofs = o.dofs;
      r.iterations = o.report.iterations;
      r.converged = o.report.converged;
      r.t_per_iter_s = o.report.wall_time_per_iteration_s;
      r.t_total_s = o.report.wall_time_total_s;
      rows.push_back(r);
    }
  }
  if (!config.sweep_path.empty()) {
    std::ofstream out(config.sweep_path);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + config.sweep_path + "'");
    write_sweep_csv(out, rows);
  }
  if (!config.report_path.empty()) {
    nlohmann::json j;
    j["command"] = "sweep";
    for (const auto& r : rows) {
      j["rows"].push_back({{"frequency_hz", r.frequency_hz},
                           {"formulation", to_string(r.run.formulation)},
                           {"preconditioner", to_string(r.run.preconditioner)},
                           {"dofs", r.dofs},
                           {"iterations", r.iterations},
                           {"converged", r.converged},
                           {"t_per_iter_s", r.t_per_iter_s},
                           {"t_total_s", r.t_total_s}});
    }
    j["config"] = config_json(config);
    write_json(config.report_path, j);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "frequency_hz,formulation,preconditioner,dofs,iterations,converged,t_per_iter_s,t_total_s\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.frequency_hz << ',' << to_string(r.run.formulation) << ',' << to_string(r.run.preconditioner) << ','
        << r.dofs << ',' << r.iterations << ',' << (r.converged ? "true" : "false") << ',' << r.t_per_iter_s << ','
        << r.t_total_s << '\n';
  }
}

SolveOutcome run_solve(const RunConfig& config) {
  validate_config(config);
  const RunSpec run = single_run(config, "solve");
  const double f = config.frequencies.front();
  const Scene scene = build_scene(config, f);
  OperatorCache cache(config.quadrature);
  std::optional<BlockSystem> sys;
  SolveOutcome o = solve_once(config, scene, f, run, cache, sys);

  if (!config.solution_path.empty()) {
    write_solution_binary(config.solution_path, o.solution);
    nlohmann::json side;
    side["format"] = "little-endian float64, interleaved re/im";
    side["order"] = "per interface: phi (Dirichlet trace) then psi (exterior-scaled Neumann trace)";
    side["frequency_hz"] = f;
    side["formulation"] = to_string(run.formulation);
    side["preconditioner"] = to_string(run.preconditioner);
    std::size_t offset = 0;
    for (std::size_t m = 0; m < o.solution.phi.size(); ++m) {
      const auto n = static_cast<std::size_t>(o.solution.phi[m].size());
      side["interfaces"].push_back({{"index", m},
                                    {"vertices", n},
                                    {"material", scene.interfaces[m].material.name},
                                    {"phi_offset", offset},
                                    {"psi_offset", offset + n}});
      offset += 2 * n;
    }
    side["complex_values"] = offset;
    write_json(config.solution_path + ".json", side);
  }
  if (!config.grid_path.empty()) {
    const auto t0 = Clock::now();
    const auto grid = evaluate_potentials(*sys, o.solution, incident(config, *sys), grid_points(config), config.threads);
    o.timings.fields_s = seconds_since(t0);
    o.timings.total_s += o.timings.fields_s;
    write_grid(config.grid_path, grid);
  }
  if (!config.report_path.empty()) {
    nlohmann::json j = outcome_json(o);
    j["command"] = "solve";
    j["config"] = config_json(config);
    write_json(config.report_path, j);
  }
  return o;
}

void write_solution_binary(const std::string& path, const SurfaceSolution& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path + "'");
  for (std::size_t m = 0; m < s.phi.size(); ++m) {
    for (const CVector* v : {&s.phi[m], &s.psi[m]}) {
      for (Eigen::Index i = 0; i < v->size(); ++i) {
        write_le_double(out, (*v)[i].real());
        write_le_double(out, (*v)[i].imag());
      }
    }
  }
}

SurfaceSolution read_solution_binary(const std::string& path, const std::vector<Eigen::Index>& vertex_counts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open '" + path + "'");
  SurfaceSolution s;
  for (const auto n : vertex_counts) {
    for (auto* list : {&s.phi, &s.psi}) {
      CVector v(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double re = read_le_double(in);
        v[i] = cplx(re, read_le_double(in));
      }
      list->push_back(std::move(v));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw Error(ErrorCode::DimensionMismatch, "solution file too long");
  return s;
}

}  // namespace acoubem
