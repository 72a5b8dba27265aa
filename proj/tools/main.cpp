#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "lmaflow/calabi.hpp"
#include "lmaflow/flow.hpp"
#include "lmaflow/metric.hpp"
#include "lmaflow/scenarios.hpp"
#include "lmaflow/shrinker.hpp"
#include "lmaflow/trace_io.hpp"
#include "lmaflow/transforms.hpp"

using namespace lmaflow;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) {
  if (dir.empty()) return name;
  std::filesystem::create_directories(dir);
  return (std::filesystem::path(dir) / name).string();
}

SymMat matrix_from_entries(int dim, const std::vector<double>& entries) {
  SymMat m = SymMat::identity(dim);
  if (entries.empty()) return m;
  m = SymMat::zero(dim);
  if (static_cast<int>(entries.size()) == dim) {
    for (int i = 0; i < dim; ++i) m.at(i, i) = entries[i];
  } else if (static_cast<int>(entries.size()) == dim * dim) {
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) m.at(i, j) = entries[i * dim + j];
  } else {
    throw CLI::ValidationError(
        "--A needs dim (diagonal) or dim*dim (row-major) entries");
  }
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Numerical laboratory for the logarithmic Monge-Ampere flow, its "
      "self-shrinking potentials and the associated transforms"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string out_dir;
  std::string config_path;
  std::uint64_t seed = 20240613;
  app.add_option("--out-dir", out_dir, "directory for output files");
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--seed", seed, "seed for randomized suites");

  // ---- flow ----------------------------------------------------------
  auto* flow_cmd = app.add_subcommand("flow", "integrate the potential flow");
  int f_dim = 1, f_points = 256, f_samples = 21, f_wavenumber = 1;
  double f_extent = kTwoPi, f_t_end = 1.0, f_amplitude = 0.1;
  std::string f_waveform = "sine", f_trace = "trace.csv";
  std::vector<double> f_matrix;
  bool f_metric = false;
  flow_cmd->add_option("--dim", f_dim, "dimension (1..3)");
  flow_cmd->add_option("--points", f_points, "points per axis");
  flow_cmd->add_option("--extent", f_extent, "torus extent per axis");
  flow_cmd->add_option("--A", f_matrix, "background matrix entries");
  flow_cmd->add_option("--waveform", f_waveform,
                       "perturbation preset (none|sine|sineprod|cosine)");
  flow_cmd->add_option("--amplitude", f_amplitude, "perturbation amplitude");
  flow_cmd->add_option("--wavenumber", f_wavenumber, "waveform wavenumber");
  flow_cmd->add_option("--t-end", f_t_end, "final time");
  flow_cmd->add_option("--samples", f_samples, "number of sample times");
  flow_cmd->add_flag("--with-metric", f_metric,
                     "append ln_det_g_sup and phase_range columns");
  flow_cmd->add_option("--trace", f_trace, "trace output file name");

  // ---- solve ---------------------------------------------------------
  auto* solve_cmd =
      app.add_subcommand("solve", "Dirichlet Newton solve of a shrinker "
                                  "equation on a box");
  std::string s_equation = "ma";
  int s_dim = 2, s_points = 65, s_wavenumber = 1;
  double s_lo = -1.0, s_hi = 1.0, s_wiggle = 0.0, s_bump = 0.1, s_tol = 1e-9;
  std::vector<double> s_matrix;
  std::string s_solution = "solution.field", s_report = "newton_report.csv";
  solve_cmd->add_option("--equation", s_equation, "ma or sl")
      ->check(CLI::IsMember({"ma", "sl"}));
  solve_cmd->add_option("--dim", s_dim, "dimension (1..3)");
  solve_cmd->add_option("--points", s_points, "points per axis");
  solve_cmd->add_option("--box-lo", s_lo, "box lower corner");
  solve_cmd->add_option("--box-hi", s_hi, "box upper corner");
  solve_cmd->add_option("--A", s_matrix, "boundary quadratic matrix entries");
  solve_cmd->add_option("--wiggle", s_wiggle, "boundary wiggle amplitude");
  solve_cmd->add_option("--wavenumber", s_wavenumber, "wiggle wavenumber");
  solve_cmd->add_option("--bump", s_bump, "initial-guess bump amplitude");
  solve_cmd->add_option("--tol", s_tol, "sup-residual tolerance");
  solve_cmd->add_option("--solution", s_solution, "solution snapshot file");
  solve_cmd->add_option("--report", s_report, "iterations log file");

  // ---- transform -----------------------------------------------------
  auto* tr_cmd = app.add_subcommand("transform", "potential-space maps");
  std::string t_mode = "legendre", t_input, t_output = "transform_out";
  std::vector<double> t_eigs;
  tr_cmd->add_option("--mode", t_mode, "legendre, lewy or angle-check")
      ->check(CLI::IsMember({"legendre", "lewy", "angle-check"}));
  tr_cmd->add_option("--input", t_input, "input snapshot file");
  tr_cmd->add_option("--output", t_output, "output file stem");
  tr_cmd->add_option("--eigs", t_eigs, "eigenvalues for angle-check");

  // ---- decay ---------------------------------------------------------
  auto* decay_cmd =
      app.add_subcommand("decay", "fit decay exponents from a trace file");
  std::string d_trace, d_quantity = "d3_sq", d_out;
  double d_eps0 = 0.5;
  decay_cmd->add_option("--trace", d_trace, "trace file")->required();
  decay_cmd->add_option("--quantity", d_quantity, "sigma, d3_sq or d4_sq")
      ->check(CLI::IsMember({"sigma", "d3_sq", "d4_sq"}));
  decay_cmd->add_option("--eps0", d_eps0, "fit window start");
  decay_cmd->add_option("--out", d_out, "output file (default stdout)");

  // ---- suite ---------------------------------------------------------
  auto* suite_cmd =
      app.add_subcommand("suite", "run a named scenario from --config");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*flow_cmd) {
      GridSpec grid = make_torus(f_dim, f_points, f_extent);
      PotentialField u0 =
          make_quadratic(grid, 0.0, matrix_from_entries(f_dim, f_matrix));
      apply_waveform(u0, f_waveform, f_amplitude, f_wavenumber);
      std::vector<double> samples(f_samples);
      for (int k = 0; k < f_samples; ++k)
        samples[k] = f_t_end * k / (f_samples - 1);
      FlowOptions opts;
      opts.with_metric = f_metric;
      const FlowRun run = run_flow(u0, f_t_end, samples, opts);
      const std::string path = in_dir(out_dir, f_trace);
      write_trace(run.trace, path);
      std::printf("wrote %s (%zu samples, %ld steps)\n", path.c_str(),
                  run.trace.records.size(), run.steps_taken);
      return 0;
    }

    if (*solve_cmd) {
      GridSpec grid = make_box(s_dim, s_lo, s_hi, s_points);
      const SymMat a = matrix_from_entries(s_dim, s_matrix);
      const bool ma = s_equation == "ma";
      PotentialField quad =
          ma ? quadratic_shrinker_ma(grid, a) : quadratic_shrinker_sl(grid, a);
      PotentialField boundary = quad;
      if (s_wiggle != 0.0) {
        PotentialField w = make_quadratic(grid, 0.0, SymMat::zero(s_dim));
        apply_waveform(w, "cosine", s_wiggle, s_wavenumber);
        for (long node = 0; node < grid.total_nodes(); ++node)
          boundary.perturbation[node] += w.perturbation[node];
      }
      PotentialField guess = boundary;
      if (s_bump != 0.0) {
        PotentialField b = make_quadratic(grid, 0.0, SymMat::zero(s_dim));
        apply_waveform(b, "bump", s_bump);
        for (long node = 0; node < grid.total_nodes(); ++node)
          guess.perturbation[node] += b.perturbation[node];
      }
      NewtonOptions opts;
      opts.tolerance = s_tol;
      auto [solution, report] =
          ma ? newton_solve_ma(grid, boundary, guess, opts)
             : newton_solve_sl(grid, boundary, guess, opts);
      write_field_snapshot(solution, in_dir(out_dir, s_solution));
      std::ofstream rep(in_dir(out_dir, s_report));
      rep << "iter,residual_sup,damping\n";
      for (size_t k = 0; k < report.residual_history.size(); ++k) {
        rep << k << "," << report.residual_history[k] << ",";
        if (k > 0 && k - 1 < report.damping_used.size())
          rep << report.damping_used[k - 1];
        rep << "\n";
      }
      std::printf("%s in %d iterations, final residual %.3e\n",
                  report.converged ? "converged" : "NOT converged",
                  report.iterations, report.residual_history.back());
      return report.converged ? 0 : 3;
    }

    if (*tr_cmd) {
      if (t_mode == "angle-check") {
        if (t_eigs.empty())
          throw CLI::ValidationError("--eigs required for angle-check");
        const double err = angle_shift_error(t_eigs);
        std::printf("angle_shift_error %.17g\n", err);
        return 0;
      }
      if (t_input.empty())
        throw CLI::ValidationError("--input snapshot required");
      const PotentialField u = read_field_snapshot(t_input);
      if (t_mode == "legendre") {
        const LegendrePair pair = legendre(u);
        const std::string path = in_dir(out_dir, t_output + ".field");
        write_field_snapshot(pair.dual, path);
        std::printf("wrote %s (input_convex=%d)\n", path.c_str(),
                    pair.input_convex ? 1 : 0);
        return 0;
      }
      // lewy: per-node report of mapped points / gradients / Hessian range.
      const LewyImage img = lewy_rotate(u);
      const std::string path = in_dir(out_dir, t_output + ".csv");
      std::ofstream out(path);
      out << "node,xbar0,xbar1,xbar2,dubar0,dubar1,dubar2,hbar_min,hbar_max\n";
      for (long node = 0; node < u.grid.total_nodes(); ++node) {
        if (!img.valid[node]) continue;
        const auto lam = img.mapped_hessian[node].eigenvalues();
        out << node;
        for (int a = 0; a < 3; ++a) out << "," << img.mapped_points[node][a];
        for (int a = 0; a < 3; ++a) out << "," << img.mapped_gradient[node][a];
        out << "," << lam[0] << "," << lam[u.grid.dim - 1] << "\n";
      }
      std::printf("wrote %s (injective=%d)\n", path.c_str(),
                  img.injective ? 1 : 0);
      return 0;
    }

    if (*decay_cmd) {
      const FlowTrace trace = read_trace(d_trace);
      const DecayQuantity q = decay_quantity_from_name(d_quantity);
      const DecayFit fit = decay_fit(trace, q, d_eps0);
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!d_out.empty()) {
        file.open(in_dir(out_dir, d_out));
        os = &file;
      }
      *os << "# quantity=" << d_quantity << " eps0=" << d_eps0
          << " fitted_exponent=" << fit.fitted_exponent
          << " fitted_constant=" << fit.fitted_constant
          << " c_emp=" << fit.c_emp << " power=" << fit.power
          << " bound_satisfied=" << (fit.bound_satisfied ? 1 : 0) << "\n";
      *os << "t,value,bound,margin\n";
      for (const auto& r : trace.records) {
        if (r.t < d_eps0 * (1.0 - 1e-12)) continue;
        const double v = d_quantity == "sigma"   ? r.diag.sup_sigma
                         : d_quantity == "d3_sq" ? r.diag.sup_d3_sq
                                                 : r.diag.sup_d4_sq;
        const double bound = fit.c_emp / std::pow(r.t, fit.power);
        *os << r.t << "," << v << "," << bound << "," << bound - v << "\n";
      }
      return fit.bound_satisfied ? 0 : 3;
    }

    if (*suite_cmd) {
      if (config_path.empty())
        throw CLI::ValidationError("suite requires --config");
      const ExperimentConfig cfg = ExperimentConfig::load(config_path);
      const std::uint64_t cfg_seed =
          static_cast<std::uint64_t>(cfg.params.get_long(
              "seed", static_cast<long>(seed)));
      const ScenarioResult result = run_scenario(cfg, out_dir, cfg_seed);
      for (const auto& [name, ok] : result.checks)
        std::printf("%s %s\n", ok ? "PASS" : "FAIL", name.c_str());
      return result.all_passed() ? 0 : 3;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
