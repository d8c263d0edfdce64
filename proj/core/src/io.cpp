#include "dsm/io.hpp"

#include "dsm/strain.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <map>
#include <sstream>

namespace dsm {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse number '" + s + "' for " + what);
  }
}

long parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse integer '" + s + "' for " + what);
  }
}

bool parse_bool(const std::string& s, const std::string& what) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ValidationError("cannot parse boolean '" + s + "' for " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

/// Write-temp-then-rename so partially written files never appear.
void atomic_write(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string());
}

SurfaceGrid read_surface_csv(const fs::path& path, std::ifstream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "x,y,z")
    throw IoError(path.string() + ": expected header 'x,y,z'");
  std::vector<Eigen::RowVector3d> rows;
  long data_row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 3)
      throw IoError(path.string() + ": parse error at row " + std::to_string(data_row));
    Eigen::RowVector3d p;
    for (int c = 0; c < 3; ++c) {
      try {
        size_t pos = 0;
        p(c) = std::stod(parts[c], &pos);
        if (pos != parts[c].size()) throw std::invalid_argument(parts[c]);
      } catch (const std::exception&) {
        throw IoError(path.string() + ": parse error at row " + std::to_string(data_row));
      }
    }
    if (!p.allFinite())
      throw IoError(path.string() + ": non-finite coordinate at row " +
                    std::to_string(data_row));
    rows.push_back(p);
    ++data_row;
  }
  if (rows.empty()) throw IoError(path.string() + ": no points");
  SurfaceGrid grid;
  grid.points.resize(static_cast<Eigen::Index>(rows.size()), 3);
  for (size_t i = 0; i < rows.size(); ++i) grid.points.row(i) = rows[i];
  return grid;
}

SurfaceGrid read_surface_mesh(const fs::path& path, std::ifstream& in) {
  long n = 0, t = 0;
  if (!(in >> n >> t) || n < 1 || t < 0)
    throw IoError(path.string() + ": expected counts 'N T' on the first line");
  SurfaceGrid grid;
  grid.points.resize(n, 3);
  for (long i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c)
      if (!(in >> grid.points(i, c)))
        throw IoError(path.string() + ": malformed vertex " + std::to_string(i));
  for (long f = 0; f < t; ++f) {
    std::array<int, 3> tri{};
    for (int c = 0; c < 3; ++c)
      if (!(in >> tri[c]))
        throw IoError(path.string() + ": malformed face " + std::to_string(f));
    for (int idx : tri)
      if (idx < 0 || idx >= n)
        throw IoError(path.string() + ": face " + std::to_string(f) +
                      " index out of range");
    grid.triangles.push_back(tri);
  }
  if (!grid.points.allFinite()) throw IoError(path.string() + ": non-finite coordinate");
  return grid;
}

std::string surface_to_csv(const SurfaceGrid& grid) {
  std::string out = "x,y,z\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    out += format_double(grid.points(i, 0));
    out += ',';
    out += format_double(grid.points(i, 1));
    out += ',';
    out += format_double(grid.points(i, 2));
    out += '\n';
  }
  return out;
}

std::string surface_to_mesh(const SurfaceGrid& grid) {
  std::string out = std::to_string(grid.size()) + " " +
                    std::to_string(grid.triangles.size()) + "\n";
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    out += format_double(grid.points(i, 0)) + " " + format_double(grid.points(i, 1)) +
           " " + format_double(grid.points(i, 2)) + "\n";
  for (const auto& tri : grid.triangles)
    out += std::to_string(tri[0]) + " " + std::to_string(tri[1]) + " " +
           std::to_string(tri[2]) + "\n";
  return out;
}

}  // namespace

SurfaceGrid read_surface(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  SurfaceGrid grid = path.extension() == ".csv" ? read_surface_csv(path, in)
                                                : read_surface_mesh(path, in);
  grid.validate();
  return grid;
}

void write_surface(const fs::path& path, const SurfaceGrid& grid) {
  const bool mesh = grid.has_triangles() || path.extension() == ".mesh";
  atomic_write(path, mesh ? surface_to_mesh(grid) : surface_to_csv(grid));
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");

  RunConfig cfg;
  std::map<int, fs::path> targets;
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = s.substr(1, s.size() - 2);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 'key = value'");
    const std::string key = trim(s.substr(0, eq));
    const std::string val = trim(s.substr(eq + 1));
    const std::string ctx = section + "." + key;

    if (section == "problem") {
      if (key == "initial") {
        cfg.initial = base / val;
      } else if (key.rfind("target.", 0) == 0) {
        targets[int(parse_int(key.substr(7), ctx))] = base / val;
      } else if (key == "times") {
        for (const auto& item : split(val, ',')) cfg.times.push_back(parse_double(item, ctx));
      } else {
        throw ValidationError(path.string() + ": unknown key " + ctx);
      }
    } else if (section == "solver") {
      auto& o = cfg.solver;
      if (key == "max_iterations") o.max_iterations = int(parse_int(val, ctx));
      else if (key == "rho") o.rho = parse_double(val, ctx);
      else if (key == "lambda") o.lambda = parse_double(val, ctx);
      else if (key == "sigma_v") o.sigma_v = parse_double(val, ctx);
      else if (key == "sigma_d") o.sigma_d = parse_double(val, ctx);
      else if (key == "ridge") o.ridge = parse_double(val, ctx);
      else if (key == "stop_factor") o.stop_factor = parse_double(val, ctx);
      else if (key == "gap_tol") o.gap_tol = parse_double(val, ctx);
      else if (key == "stag_tol") o.stag_tol = parse_double(val, ctx);
      else if (key == "stag_window") o.stag_window = int(parse_int(val, ctx));
      else if (key == "inner_tol") o.inner_tol = parse_double(val, ctx);
      else if (key == "inner_max") o.inner_max = int(parse_int(val, ctx));
      else if (key == "frozen_u") o.frozen_u = parse_bool(val, ctx);
      else if (key == "seed") o.seed = static_cast<unsigned long>(parse_int(val, ctx));
      else if (key == "record_timing") o.record_timing = parse_bool(val, ctx);
      else throw ValidationError(path.string() + ": unknown key " + ctx);
    } else if (section == "baseline") {
      auto& o = cfg.baseline;
      if (key == "max_iterations") o.max_iterations = int(parse_int(val, ctx));
      else if (key == "armijo_c") o.armijo_c = parse_double(val, ctx);
      else if (key == "backtrack_factor") o.backtrack_factor = parse_double(val, ctx);
      else if (key == "initial_step") o.initial_step = parse_double(val, ctx);
      else if (key == "grad_tol") o.grad_tol = parse_double(val, ctx);
      else throw ValidationError(path.string() + ": unknown key " + ctx);
    } else if (section == "output") {
      if (key == "dir") cfg.out_dir = base / val;
      else if (key == "quantile") cfg.quantile = parse_double(val, ctx);
      else throw ValidationError(path.string() + ": unknown key " + ctx);
    } else {
      throw ValidationError(path.string() + ": unknown section [" + section + "]");
    }
  }

  for (const auto& [idx, p] : targets) {
    if (idx != static_cast<int>(cfg.targets.size()) + 1)
      throw ValidationError(path.string() + ": target indices must be 1..L without gaps");
    cfg.targets.push_back(p);
  }
  if (cfg.initial.empty()) throw ValidationError(path.string() + ": problem.initial missing");
  if (cfg.targets.empty()) throw ValidationError(path.string() + ": no targets configured");
  if (cfg.times.size() != cfg.targets.size() + 1)
    throw ValidationError(path.string() + ": times must list L+1 values");
  return cfg;
}

void write_config(const fs::path& path, const RunConfig& cfg) {
  // Paths are emitted relative to the config location when possible.
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const auto rel = [&](const fs::path& p) {
    std::error_code ec;
    const fs::path r = fs::relative(p, base, ec);
    return ec ? p.string() : r.string();
  };

  std::string out = "[problem]\n";
  out += "initial = " + rel(cfg.initial) + "\n";
  for (size_t k = 0; k < cfg.targets.size(); ++k)
    out += "target." + std::to_string(k + 1) + " = " + rel(cfg.targets[k]) + "\n";
  out += "times = ";
  for (size_t k = 0; k < cfg.times.size(); ++k)
    out += (k ? "," : "") + format_double(cfg.times[k]);
  out += "\n\n[solver]\n";
  const auto& s = cfg.solver;
  out += "max_iterations = " + std::to_string(s.max_iterations) + "\n";
  out += "rho = " + format_double(s.rho) + "\n";
  out += "lambda = " + format_double(s.lambda) + "\n";
  out += "sigma_v = " + format_double(s.sigma_v) + "\n";
  out += "sigma_d = " + format_double(s.sigma_d) + "\n";
  out += "ridge = " + format_double(s.ridge) + "\n";
  out += "stop_factor = " + format_double(s.stop_factor) + "\n";
  out += "gap_tol = " + format_double(s.gap_tol) + "\n";
  out += "stag_tol = " + format_double(s.stag_tol) + "\n";
  out += "stag_window = " + std::to_string(s.stag_window) + "\n";
  out += "inner_tol = " + format_double(s.inner_tol) + "\n";
  out += "inner_max = " + std::to_string(s.inner_max) + "\n";
  out += std::string("frozen_u = ") + (s.frozen_u ? "true" : "false") + "\n";
  out += "seed = " + std::to_string(s.seed) + "\n";
  out += std::string("record_timing = ") + (s.record_timing ? "true" : "false") + "\n";
  out += "\n[baseline]\n";
  const auto& b = cfg.baseline;
  out += "max_iterations = " + std::to_string(b.max_iterations) + "\n";
  out += "armijo_c = " + format_double(b.armijo_c) + "\n";
  out += "backtrack_factor = " + format_double(b.backtrack_factor) + "\n";
  out += "initial_step = " + format_double(b.initial_step) + "\n";
  out += "grad_tol = " + format_double(b.grad_tol) + "\n";
  out += "\n[output]\n";
  out += "dir = " + rel(cfg.out_dir) + "\n";
  out += "quantile = " + format_double(cfg.quantile) + "\n";
  atomic_write(path, out);
}

SnapshotProblem load_problem(const RunConfig& cfg) {
  SnapshotProblem problem;
  problem.initial = read_surface(cfg.initial);
  for (const auto& t : cfg.targets) problem.targets.push_back(read_surface(t));
  problem.time.times = cfg.times;
  problem.time.validate();
  if (static_cast<int>(problem.targets.size()) != problem.time.steps())
    throw ValidationError("config: target count does not match time grid");
  return problem;
}

namespace {

std::string history_to_csv(const std::vector<IterationRecord>& history, int steps) {
  std::string out = "iteration,cost,kin,disp";
  for (int k = 1; k <= steps; ++k) out += ",hausdorff_" + std::to_string(k);
  out += ",consensus_gap,seconds\n";
  for (const auto& rec : history) {
    out += std::to_string(rec.iteration);
    out += ',' + format_double(rec.cost);
    out += ',' + format_double(rec.kin);
    out += ',' + format_double(rec.disp);
    for (double h : rec.hausdorff) out += ',' + format_double(h);
    out += ',' + format_double(rec.consensus_gap);
    out += ',' + format_double(rec.seconds);
    out += '\n';
  }
  return out;
}

}  // namespace

int run_match(const RunConfig& cfg) {
  const SnapshotProblem problem = load_problem(cfg);
  OsaSolver solver(problem, cfg.solver);
  const SolveReport report = solver.solve();

  fs::create_directories(cfg.out_dir);
  const int steps = problem.num_steps();
  for (int k = 0; k <= steps; ++k) {
    SurfaceGrid state = report.trajectory.states[k];
    state.triangles.clear();  // plot-ready point trajectories
    write_surface(cfg.out_dir / ("trajectory_" + std::to_string(k) + ".csv"), state);
  }
  for (int k = 0; k < steps; ++k) {
    SurfaceGrid block;
    block.points = report.controls.alphas[k];
    write_surface(cfg.out_dir / ("controls_" + std::to_string(k) + ".csv"), block);
  }
  atomic_write(cfg.out_dir / "history.csv", history_to_csv(report.history, steps));
  atomic_write(cfg.out_dir / "termination.txt", to_string(report.termination) + "\n");
  return 0;
}

int run_strain(const StrainArgs& args) {
  const SurfaceGrid reference = read_surface(args.reference);
  if (!reference.has_triangles())
    throw ValidationError("strain requires a triangulated reference mesh");

  fs::path deformed_path = args.deformed;
  if (deformed_path.empty()) {
    if (args.match_dir.empty())
      throw ValidationError("strain: give a deformed grid or a match output directory");
    // Pick the last trajectory snapshot of a completed match run.
    int best = -1;
    for (const auto& entry : fs::directory_iterator(args.match_dir)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("trajectory_", 0) == 0 && entry.path().extension() == ".csv") {
        const int k = int(parse_int(name.substr(11, name.size() - 15), "trajectory index"));
        if (k > best) {
          best = k;
          deformed_path = entry.path();
        }
      }
    }
    if (best < 0) throw IoError("no trajectory_*.csv in " + args.match_dir.string());
  }
  SurfaceGrid deformed = read_surface(deformed_path);
  deformed.triangles = reference.triangles;

  const StrainField field = strain_intensity(reference, deformed);
  fs::create_directories(args.out_dir);

  std::string csv = "vertex_index,x,y,z,si\n";
  for (Eigen::Index i = 0; i < reference.size(); ++i) {
    csv += std::to_string(i);
    for (int c = 0; c < 3; ++c) csv += ',' + format_double(reference.points(i, c));
    csv += ',';
    csv += field.defined[i] ? format_double(field.values[i]) : "undefined";
    csv += '\n';
  }
  atomic_write(args.out_dir / "strain.csv", csv);

  std::vector<double> qs;
  for (int i = 1; i <= 19; ++i) qs.push_back(0.05 * i);
  const std::vector<double> values = strain_quantiles(field, qs);
  std::string qcsv = "quantile,value\n";
  for (size_t i = 0; i < qs.size(); ++i)
    qcsv += format_double(qs[i]) + ',' + format_double(values[i]) + '\n';
  atomic_write(args.out_dir / "strain_quantiles.csv", qcsv);
  return 0;
}

int run_compare(const RunConfig& cfg) {
  using Clock = std::chrono::steady_clock;
  const SnapshotProblem problem = load_problem(cfg);
  const int steps = problem.num_steps();

  const auto t0 = Clock::now();
  OsaSolver osa(problem, cfg.solver);
  const SolveReport osa_report = osa.solve();
  const double osa_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

  const auto t1 = Clock::now();
  const SolveReport gd_report = solve_gd(problem, cfg.baseline);
  const double gd_seconds = std::chrono::duration<double>(Clock::now() - t1).count();

  fs::create_directories(cfg.out_dir);
  const auto final_rhd = [&](const SolveReport& r) {
    return robust_hausdorff(r.trajectory.states[steps], problem.targets[steps - 1],
                            cfg.quantile);
  };
  const auto final_kin = [&](const SolveReport& r) {
    return kinetic_energy(r.controls, osa.gram(), problem.time);
  };

  std::string csv = "method,robust_hausdorff,kinetic_energy,cpu_seconds,iterations\n";
  csv += "osa," + format_double(final_rhd(osa_report)) + ',' +
         format_double(final_kin(osa_report)) + ',' + format_double(osa_seconds) + ',' +
         std::to_string(osa_report.history.size()) + '\n';
  csv += "gd-armijo," + format_double(final_rhd(gd_report)) + ',' +
         format_double(final_kin(gd_report)) + ',' + format_double(gd_seconds) + ',' +
         std::to_string(gd_report.history.size()) + '\n';
  atomic_write(cfg.out_dir / "compare.csv", csv);
  atomic_write(cfg.out_dir / "history_osa.csv", history_to_csv(osa_report.history, steps));
  atomic_write(cfg.out_dir / "history_gd.csv", history_to_csv(gd_report.history, steps));
  return 0;
}

int run_synth(const SynthArgs& args) {
  const SyntheticProblem synth = generate(args.spec);
  const fs::path dir = args.out_dir;
  fs::create_directories(dir / "surfaces");

  RunConfig cfg;
  cfg.initial = dir / "surfaces" / "initial.mesh";
  write_surface(cfg.initial, synth.problem.initial);
  const int steps = synth.problem.num_steps();
  for (int k = 1; k <= steps; ++k) {
    const fs::path p = dir / "surfaces" / ("target_" + std::to_string(k) + ".mesh");
    write_surface(p, synth.problem.targets[k - 1]);
    cfg.targets.push_back(p);

    SurfaceGrid truth = synth.ground_truth.states[k];
    truth.triangles.clear();
    write_surface(dir / "surfaces" / ("ground_truth_" + std::to_string(k) + ".csv"), truth);
  }
  cfg.times = synth.problem.time.times;
  cfg.solver.seed = args.spec.seed;
  cfg.out_dir = dir / "out";
  write_config(dir / "config.ini", cfg);
  return 0;
}

}  // namespace dsm
