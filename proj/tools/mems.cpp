// Command-line front end: simulate, predict, compare, profiles, mesh.

#include "mems/geometry.hpp"
#include "mems/mesh.hpp"
#include "mems/profiles.hpp"
#include "mems/report.hpp"
#include "mems/simulation.hpp"
#include "mems/skeleton.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace mems;

namespace {

enum ExitCode { kOk = 0, kSolverFailure = 1, kInvalidConfig = 2, kMissingInput = 3 };

struct Config {
  std::string domain = "rect";
  std::string domain_file;
  std::string eps = "0.02";
  int n = 6240;
  double tau = 0.01;
  double rtol = 1e-6;
  double atol = 1e-8;
  std::string out = "mems_out";
  double grid_h = 0.01;
  int snapshots = 12;
  int jobs = 1;
  std::string times;
  std::string touchdown;
  std::string cache;
  double t_estimate = kQuenchTime;
  double t_max = 1.0;
  bool fixed_mesh = false;
  bool quiet = false;
};

struct CliError {
  int code;
  std::string message;
};

std::string eps_tag(double eps) {
  std::ostringstream s;
  s << std::setprecision(6) << eps;
  return s.str();
}

Domain load_domain(const Config& c) {
  if (!c.domain_file.empty()) {
    if (!fs::exists(c.domain_file)) throw CliError{kMissingInput, "domain file not found: " + c.domain_file};
    try {
      return Domain::load(c.domain_file);
    } catch (const Error& e) {
      throw CliError{kInvalidConfig, e.what()};
    }
  }
  try {
    return Domain::preset(c.domain);
  } catch (const DomainError& e) {
    throw CliError{kInvalidConfig, e.what()};
  }
}

std::vector<double> eps_values(const Config& c) {
  try {
    return parse_eps_list(c.eps);
  } catch (const DomainError& e) {
    throw CliError{kInvalidConfig, e.what()};
  }
}

void validate(const Config& c) {
  if (c.n < 50) throw CliError{kInvalidConfig, "--n must be at least 50"};
  if (!(c.tau > 0.0) || !(c.rtol > 0.0) || !(c.atol > 0.0)) throw CliError{kInvalidConfig, "tolerances and tau must be positive"};
  if (!(c.grid_h > 0.0)) throw CliError{kInvalidConfig, "--grid-h must be positive"};
  if (c.jobs < 1) throw CliError{kInvalidConfig, "--jobs must be at least 1"};
}

std::string cache_dir(const Config& c) { return c.cache.empty() ? (fs::path(c.out) / "cache").string() : c.cache; }

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream f(p);
  if (!f) throw CliError{kMissingInput, "cannot write " + p.string()};
  return f;
}

// Geometric levels of 1 + min U from 1 down to the stopping level.
std::vector<double> snapshot_levels(int n, double stop_gap) {
  std::vector<double> lv;
  for (int k = 0; k < n; ++k) lv.push_back(n == 1 ? stop_gap : std::pow(stop_gap, static_cast<double>(k) / (n - 1)));
  return lv;
}

struct SimOutcome {
  bool ok = false;
  std::string error;
  TouchdownReport report;
};

SimOutcome simulate_one(const Domain& domain, const Config& c, double eps, std::mutex& io) {
  SimOutcome res;
  const std::string tag = eps_tag(eps);
  const fs::path dir = fs::path(c.out);
  std::ofstream log = open_out(dir / ("run_eps" + tag + ".log"));
  SimulationConfig sc;
  sc.eps = eps;
  sc.target_N = c.n;
  sc.tau = c.tau;
  sc.rtol = c.rtol;
  sc.atol = c.atol;
  sc.t_max = c.t_max;
  sc.adapt = !c.fixed_mesh;
  sc.log = &log;
  const auto levels = snapshot_levels(c.snapshots, 1.0 + sc.stop_level);
  size_t next = 0;
  if (c.snapshots > 0) {
    fs::create_directories(dir / "snapshots");
    sc.observer = [&](const StepInfo& info, const TriMesh& mesh, const Eigen::VectorXd& u) {
      if (next >= levels.size() || 1.0 + info.min_u > levels[next]) return;
      while (next < levels.size() && 1.0 + info.min_u <= levels[next]) ++next;
      std::ostringstream name;
      name << "eps" << tag << "_" << std::setw(2) << std::setfill('0') << next - 1 << ".vtk";
      std::ostringstream title;
      title << "eps " << tag << " t " << std::setprecision(12) << info.t;
      write_vtk((dir / "snapshots" / name.str()).string(), mesh, {{"u", &u}}, title.str());
    };
  }
  try {
    res.report = run_simulation(domain, sc);
    res.ok = true;
  } catch (const SimulationFailure& f) {
    res.error = f.what();
    res.report = f.checkpoint;
    if (res.report.mesh.num_vertices() > 0)
      write_vtk((dir / ("checkpoint_eps" + tag + ".vtk")).string(), res.report.mesh, {{"u", &res.report.u}},
                "checkpoint");
  } catch (const Error& e) {
    res.error = e.what();
  }
  if (res.ok) {
    std::ofstream tr = open_out(dir / ("troughs_eps" + tag + ".csv"));
    write_troughs_csv(tr, res.report);
  }
  if (!c.quiet) {
    std::lock_guard<std::mutex> lock(io);
    if (res.ok)
      std::cout << "eps " << tag << ": t_touch " << std::setprecision(8) << res.report.t_touch << ", "
                << res.report.points.size() << " touchdown point(s), " << res.report.steps << " steps\n";
    else
      std::cerr << "eps " << tag << ": solver failure: " << res.error << '\n';
  }
  return res;
}

int cmd_simulate(const Config& c) {
  const Domain domain = load_domain(c);
  const auto eps = eps_values(c);
  fs::create_directories(c.out);
  std::vector<SimOutcome> results(eps.size());
  std::mutex io;
  std::atomic<size_t> cursor{0};
  auto worker = [&]() {
    for (size_t k = cursor++; k < eps.size(); k = cursor++) results[k] = simulate_one(domain, c, eps[k], io);
  };
  std::vector<std::thread> pool;
  const int nthreads = std::min<int>(c.jobs, static_cast<int>(eps.size()));
  for (int k = 0; k < nthreads; ++k) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream csv = open_out(fs::path(c.out) / "touchdown.csv");
  write_touchdown_header(csv);
  bool failed = false;
  for (const auto& r : results) {
    if (r.ok)
      write_touchdown_row(csv, touchdown_row(r.report));
    else
      failed = true;
  }
  return failed ? kSolverFailure : kOk;
}

std::vector<double> parse_times(const std::string& s) {
  std::vector<double> t;
  if (s.empty()) return t;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      t.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw CliError{kInvalidConfig, "cannot parse time '" + item + "'"};
    }
  }
  return t;
}

int cmd_predict(const Config& c) {
  const Domain domain = load_domain(c);
  const auto eps = eps_values(c);
  const auto times = parse_times(c.times);
  fs::create_directories(c.out);
  const Profiles prof = load_or_solve_profiles(cache_dir(c));
  SkeletonSet sk;
  try {
    sk = compute_skeleton(domain, c.grid_h);
  } catch (const ResolutionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  {
    std::ofstream f = open_out(fs::path(c.out) / "skeleton.csv");
    write_skeleton_csv(f, sk);
  }
  PredictOptions po;
  po.grid_h = c.grid_h;
  po.t_estimate = c.t_estimate;
  for (double e : eps) {
    const std::string tag = eps_tag(e);
    const TouchdownPrediction p = predict_touchdown(domain, sk, e, prof.constants, po);
    std::ofstream f = open_out(fs::path(c.out) / ("prediction_eps" + tag + ".txt"));
    write_prediction_report(f, p, e);
    if (!c.quiet) write_prediction_report(std::cout, p, e);
    for (double t : times) {
      const double d = prof.constants.z0 * phi(std::min(t, std::nextafter(kQuenchTime, 0.0)), e);
      try {
        const auto lines = firefront(domain, d, c.grid_h);
        std::ostringstream name;
        name << "firefront_eps" << tag << "_t" << std::setprecision(6) << t << ".csv";
        std::ofstream ff = open_out(fs::path(c.out) / name.str());
        write_polylines_csv(ff, lines, domain);
      } catch (const EmptyResult& ex) {
        std::cerr << "eps " << tag << ", t " << t << ": " << ex.what() << '\n';
      }
    }
  }
  return kOk;
}

int cmd_compare(const Config& c) {
  const Domain domain = load_domain(c);
  const fs::path td = c.touchdown.empty() ? fs::path(c.out) / "touchdown.csv" : fs::path(c.touchdown);
  if (!fs::exists(td)) throw CliError{kMissingInput, "touchdown table not found: " + td.string() + " (run simulate first)"};
  std::vector<TouchdownRow> rows;
  {
    std::ifstream in(td);
    try {
      rows = read_touchdown_csv(in);
    } catch (const DomainError& e) {
      throw CliError{kMissingInput, e.what()};
    }
  }
  const Profiles prof = load_or_solve_profiles(cache_dir(c));
  const SkeletonSet sk = compute_skeleton(domain, c.grid_h);
  PredictOptions po;
  po.grid_h = c.grid_h;

  std::ofstream cmp = open_out(fs::path(c.out) / "compare.csv");
  cmp << "# mems-compare v1\n";
  cmp << "eps,point,x,y,dist_skeleton,dist_prediction\n" << std::setprecision(10);
  std::ofstream ov = open_out(fs::path(c.out) / "overlay.csv");
  ov << "# mems-overlay v1\n";
  ov << "kind,id,x,y,eps\n" << std::setprecision(10);
  for (size_t b = 0; b < sk.branches.size(); ++b)
    for (const auto& p : sk.branches[b].points) ov << "skeleton," << b << ',' << p.x() << ',' << p.y() << ",\n";
  for (const auto& r : rows) {
    po.t_estimate = r.t_touch;
    const TouchdownPrediction pred = predict_touchdown(domain, sk, r.eps, prof.constants, po);
    double worst = 0.0;
    for (size_t k = 0; k < r.points.size(); ++k) {
      const Vec2& x = r.points[k];
      const double ds = distance_to_skeleton(sk, x);
      double dp = std::numeric_limits<double>::infinity();
      for (const auto& q : pred.points) dp = std::min(dp, (q.point - x).norm());
      worst = std::max(worst, ds);
      cmp << r.eps << ',' << k << ',' << x.x() << ',' << x.y() << ',' << ds << ',' << dp << '\n';
      ov << "touchdown," << k << ',' << x.x() << ',' << x.y() << ',' << r.eps << '\n';
    }
    if (!c.quiet)
      std::cout << "eps " << eps_tag(r.eps) << ": " << r.points.size() << " point(s), max distance to skeleton "
                << std::setprecision(4) << worst << '\n';
  }
  return kOk;
}

int cmd_profiles(const Config& c) {
  fs::create_directories(c.out);
  const Profiles p = load_or_solve_profiles(cache_dir(c));
  {
    std::ofstream f = open_out(fs::path(c.out) / "w0.csv");
    write_profile_csv(f, p.w0, "w0");
  }
  {
    std::ofstream f = open_out(fs::path(c.out) / "w1bar.csv");
    write_profile_csv(f, p.w1bar, "w1bar");
  }
  const auto& k = p.constants;
  std::ofstream f = open_out(fs::path(c.out) / "constants.txt");
  for (std::ostream* o : {static_cast<std::ostream*>(&f), &std::cout}) {
    *o << std::setprecision(8) << "z0 " << k.z0 << "\nw0(z0) " << k.w0_at_z0 << "\nw1bar(z0) " << k.w1bar_at_z0
       << "\nalpha " << k.alpha << "\nwkb_rate " << k.wkb_rate << '\n';
  }
  return kOk;
}

int cmd_mesh(const Config& c) {
  const Domain domain = load_domain(c);
  fs::create_directories(c.out);
  const TriMesh m = generate_initial_mesh(domain, c.n);
  double amin = std::numeric_limits<double>::infinity(), amax = 0.0;
  for (int k = 0; k < m.num_triangles(); ++k) {
    amin = std::min(amin, m.signed_area(k));
    amax = std::max(amax, m.signed_area(k));
  }
  write_vtk((fs::path(c.out) / "mesh.vtk").string(), m, {}, "initial mesh");
  std::cout << "triangles " << m.num_triangles() << "\nvertices " << m.num_vertices() << "\ninterior "
            << m.num_interior() << "\nmin_area " << amin << "\nmax_area " << amax << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Moving-mesh touchdown simulator and skeleton predictor"};
  app.set_config("--config", "", "key = value file mirroring the flags (flags win)");
  app.require_subcommand(1);
  Config c;
  app.add_option("--domain", c.domain, "preset: rect, rect-hole, rect-4holes, polar-asym")->capture_default_str();
  app.add_option("--domain-file", c.domain_file, "curve definition file (overrides --domain)");
  app.add_option("--eps", c.eps, "eps value, list a,b,c or geometric range lo:hi:n")->capture_default_str();
  app.add_option("--n", c.n, "target triangle count")->capture_default_str();
  app.add_option("--tau", c.tau, "mesh response time")->capture_default_str();
  app.add_option("--rtol", c.rtol, "PDE relative tolerance")->capture_default_str();
  app.add_option("--atol", c.atol, "PDE absolute tolerance")->capture_default_str();
  app.add_option("--out", c.out, "output directory")->capture_default_str();
  app.add_option("--grid-h", c.grid_h, "skeleton background grid spacing")->capture_default_str();
  app.add_option("--snapshots", c.snapshots, "VTK snapshots per run (0 disables)")->capture_default_str();
  app.add_option("--jobs", c.jobs, "parallel simulations in an eps sweep")->capture_default_str();
  app.add_option("--times", c.times, "firefront times t1,t2,... for predict");
  app.add_option("--touchdown", c.touchdown, "touchdown table for compare (default <out>/touchdown.csv)");
  app.add_option("--cache", c.cache, "profile cache directory (default <out>/cache)");
  app.add_option("--t-estimate", c.t_estimate, "quench time used by predict")->capture_default_str();
  app.add_option("--t-max", c.t_max, "simulation end time if touchdown is not reached")->capture_default_str();
  app.add_flag("--fixed-mesh", c.fixed_mesh, "disable mesh movement");
  app.add_flag("--quiet", c.quiet, "suppress console summaries");

  std::function<int(const Config&)> verb;
  auto sub = [&](const char* name, const char* help, int (*fn)(const Config&)) {
    app.add_subcommand(name, help)->fallthrough()->callback([&verb, fn] { verb = fn; });
  };
  sub("simulate", "run the moving-mesh solver for each eps", cmd_simulate);
  sub("predict", "skeleton, firefronts and touchdown prediction", cmd_predict);
  sub("compare", "distances from simulated touchdown points to the skeleton", cmd_compare);
  sub("profiles", "dump the boundary-layer profiles and constants", cmd_profiles);
  sub("mesh", "generate and inspect the initial mesh", cmd_mesh);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    validate(c);
    return verb(c);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
}
