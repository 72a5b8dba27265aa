#include <cmath>

#include "doctest.h"
#include "lmaflow/calabi.hpp"
#include "lmaflow/flow.hpp"
#include "lmaflow/shrinker.hpp"

using namespace lmaflow;

namespace {

PotentialField sine_field(int points, double amplitude, int wavenumber = 1) {
  GridSpec g = make_torus(1, points);
  PotentialField u = make_quadratic(g, 0.0, SymMat::identity(1));
  apply_waveform(u, "sine", amplitude, wavenumber);
  return u;
}

std::vector<double> linspace(double t_end, int count) {
  std::vector<double> t(count);
  for (int k = 0; k < count; ++k) t[k] = t_end * k / (count - 1);
  return t;
}

}  // namespace

TEST_CASE("flow rhs closed forms") {
  SUBCASE("identity background vanishes") {
    GridSpec g = make_torus(2, 16);
    PotentialField u = make_quadratic(g, 0.0, SymMat::identity(2));
    for (double v : flow_rhs(u)) CHECK(v == doctest::Approx(0.0));
  }
  SUBCASE("diag(e^2, 1) gives 1 everywhere") {
    GridSpec g = make_torus(2, 16);
    SymMat a = SymMat::diagonal(2, {std::exp(2.0), 1.0, 0.0});
    PotentialField u = make_quadratic(g, 0.0, a);
    for (double v : flow_rhs(u)) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("1d sine at pi/2 gives ln 0.9") {
    PotentialField u = sine_field(256, 0.1);
    const auto rhs = flow_rhs(u);
    const long node = 256 / 4;  // x = pi/2
    CHECK(rhs[node] == doctest::Approx(std::log(0.9)).epsilon(1e-4));
  }
  SUBCASE("convexity loss names the node") {
    GridSpec g = make_torus(1, 16);
    PotentialField u = make_quadratic(g, 0.0, SymMat::identity(1));
    apply_waveform(u, "sine", 2.0);  // Hessian dips below zero
    CHECK_THROWS_AS(flow_rhs(u), ConvexityLoss);
    try {
      flow_rhs(u);
    } catch (const ConvexityLoss& e) {
      CHECK(e.node >= 0);
      CHECK(std::string(e.what()).find("node") != std::string::npos);
    }
  }
}

TEST_CASE("flow step") {
  SUBCASE("identity quadratic is a fixed point") {
    GridSpec g = make_torus(2, 16);
    FlowState s{0.0, make_quadratic(g, 0.0, SymMat::identity(2))};
    FlowState s2 = flow_step(s, 0.01);
    for (double p : s2.potential.perturbation) CHECK(p == 0.0);
    CHECK(s2.time == doctest::Approx(0.01));
  }
  SUBCASE("general quadratic accrues a uniform shift") {
    GridSpec g = make_torus(2, 16);
    SymMat a = SymMat::diagonal(2, {std::exp(2.0), 1.0, 0.0});
    FlowState s{0.0, make_quadratic(g, 0.0, a)};
    const double dt = 0.005;
    for (int k = 0; k < 10; ++k) s = flow_step(s, dt);
    for (double p : s.potential.perturbation)
      CHECK(p == doctest::Approx(10 * dt * 1.0).epsilon(1e-12));
    // Background untouched.
    CHECK(s.potential.background_matrix.at(0, 0) == a.at(0, 0));
  }
}

TEST_CASE("small perturbations decay like the linearized heat equation") {
  // phi_t = ln(1 + phi'') ~ phi'' about u'' = 1, so the sine mode decays
  // like eps * exp(-t) up to O(eps^2) corrections.
  const double eps = 0.01;
  PotentialField u0 = sine_field(64, eps);
  const double t_end = 2.0;
  const FlowRun run = run_flow(u0, t_end, linspace(t_end, 5));
  for (const auto& snap : run.snapshots) {
    if (snap.time < 0.49) continue;
    double sup = 0.0;
    for (double p : snap.potential.perturbation)
      sup = std::max(sup, std::abs(p));
    CHECK(sup == doctest::Approx(eps * std::exp(-snap.time)).epsilon(0.10));
  }
}

TEST_CASE("run_flow on quadratic data keeps third derivatives at zero") {
  GridSpec g = make_torus(2, 16);
  SymMat a = SymMat::diagonal(2, {2.0, 1.0, 0.0});
  PotentialField u0 = make_quadratic(g, 0.0, a);
  const FlowRun run = run_flow(u0, 0.5, linspace(0.5, 6));
  REQUIRE(run.trace.records.size() == 6);
  for (const auto& r : run.trace.records) {
    CHECK(r.diag.sup_d3_sq == doctest::Approx(0.0));
    CHECK(r.diag.mu_min == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.diag.mu_max == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(r.diag.flow_residual) < 1e-10);
  }
  // Exact closed form: u(t) = u0 + t (1/n) ln det A, uniform in x.
  const double rate = 0.5 * std::log(2.0);
  for (size_t k = 0; k < run.snapshots.size(); ++k) {
    const auto& snap = run.snapshots[k];
    for (double p : snap.potential.perturbation)
      CHECK(std::abs(p - snap.time * rate) <= 1e-10 * std::max(1.0, snap.time));
  }
}

TEST_CASE("3d flow run stays stable and contracts the eigen range") {
  GridSpec g = make_torus(3, 16);
  PotentialField u0 = make_quadratic(g, 0.0, SymMat::identity(3));
  apply_waveform(u0, "sine", 0.1);
  const FlowRun run = run_flow(u0, 6.0, linspace(6.0, 4));
  const double lo = run.initial_range.lo, hi = run.initial_range.hi;
  double prev_d3 = 1e300;
  for (const auto& r : run.trace.records) {
    CHECK(r.diag.mu_min >= 0.99 * lo);
    CHECK(r.diag.mu_max <= 1.01 * hi);
    CHECK(r.diag.sup_d3_sq <= prev_d3 + 1e-12);
    prev_d3 = r.diag.sup_d3_sq;
  }
}

TEST_CASE("trace flow residual is first order in the sample spacing") {
  // The residual column differences consecutive snapshots, so halving the
  // sample spacing should roughly halve it while the mode is still large.
  auto residual_at = [](int samples, size_t record) {
    PotentialField u0 = sine_field(64, 0.1);
    const FlowRun run = run_flow(u0, 2.0, linspace(2.0, samples));
    return run.trace.records[record].diag.flow_residual;
  };
  const double r1 = residual_at(6, 1);   // t = 0.4, spacing 0.4
  const double r2 = residual_at(11, 2);  // t = 0.4, spacing 0.2
  CHECK(r1 / r2 > 1.5);
  CHECK(r1 / r2 < 2.6);
}

TEST_CASE("sigma stays below the barrier along a 1d run") {
  PotentialField u0 = sine_field(128, 0.1);
  const FlowRun run = run_flow(u0, 2.0, linspace(2.0, 11));
  const double sigma0 = run.trace.records.front().diag.sup_sigma;
  CHECK(sigma0 > 0.0);
  for (const auto& r : run.trace.records) {
    const double bound = sigma_supersolution_bound(sigma0, r.t, 1);
    CHECK(r.diag.sup_sigma <= bound * 1.05 + 1e-300);
  }
}

TEST_CASE("eigen range stays inside the initial bounds on a 2d run") {
  GridSpec g = make_torus(2, 32);
  PotentialField u0 = make_quadratic(g, 0.0, SymMat::identity(2));
  apply_waveform(u0, "sine", 0.05);
  const FlowRun run = run_flow(u0, 2.0, linspace(2.0, 9));
  const double lo = run.initial_range.lo, hi = run.initial_range.hi;
  CHECK(lo == doctest::Approx(0.95).epsilon(1e-2));
  for (const auto& r : run.trace.records) {
    CHECK(r.diag.mu_min >= 0.99 * lo);
    CHECK(r.diag.mu_max <= 1.01 * hi);
  }
}

TEST_CASE("run_flow input validation") {
  PotentialField u0 = sine_field(64, 0.01);
  CHECK_THROWS(run_flow(u0, 1.0, {}));
  CHECK_THROWS(run_flow(u0, 1.0, {0.5, 0.25}));
  CHECK_THROWS(run_flow(u0, 1.0, {0.0, 2.0}));
}

TEST_CASE("parabolic scaling") {
  PotentialField u0 = sine_field(64, 0.05);
  const FlowRun run = run_flow(u0, 0.4, linspace(0.4, 5));
  const std::array<double, 3> x0{u0.grid.position({16, 0, 0})[0], 0.0, 0.0};
  const double t0 = 0.2;

  SUBCASE("mu = 1 is an affine renormalization; Hessian unchanged") {
    const auto scaled = parabolic_scale(run.snapshots, x0, t0, 1.0);
    REQUIRE(scaled.size() == run.snapshots.size());
    std::vector<std::uint8_t> va, vb;
    const auto ha = hessian_field(run.snapshots[2].potential, va);
    const auto hb = hessian_field(scaled[2].potential, vb);
    for (long node = 0; node < u0.grid.total_nodes(); ++node) {
      if (!va[node]) continue;
      const auto idx = u0.grid.unravel(node);
      const long mapped = scaled[2].potential.grid.linear_index(idx);
      if (!vb[mapped]) continue;
      CHECK(hb[mapped].at(0, 0) ==
            doctest::Approx(ha[node].at(0, 0)).epsilon(1e-11));
    }
  }

  SUBCASE("second derivatives are invariant for any mu") {
    const auto scaled = parabolic_scale(run.snapshots, x0, t0, 3.0);
    std::vector<std::uint8_t> va, vb;
    const auto ha = hessian_field(run.snapshots[1].potential, va);
    const auto hb = hessian_field(scaled[1].potential, vb);
    for (long node = 0; node < u0.grid.total_nodes(); ++node) {
      const auto idx = u0.grid.unravel(node);
      const long mapped = scaled[1].potential.grid.linear_index(idx);
      if (!va[node] || !vb[mapped]) continue;
      CHECK(hb[mapped].at(0, 0) ==
            doctest::Approx(ha[node].at(0, 0)).epsilon(1e-10));
    }
  }

  SUBCASE("third derivatives scale by 1/mu") {
    const double mu = 2.0;
    const auto scaled = parabolic_scale(run.snapshots, x0, t0, mu);
    const auto t3a = derivative_tensors(run.snapshots[2].potential, 3);
    const auto t3b = derivative_tensors(scaled[2].potential, 3);
    for (long node = 0; node < u0.grid.total_nodes(); ++node) {
      const auto idx = u0.grid.unravel(node);
      const long mapped = scaled[2].potential.grid.linear_index(idx);
      if (!t3a.valid[node] || !t3b.valid[mapped]) continue;
      CHECK(std::abs(t3b.component(mapped, 0) -
                     t3a.component(node, 0) / mu) <= 1e-8);
    }
  }

  SUBCASE("normalization at the base point") {
    const auto scaled = parabolic_scale(run.snapshots, x0, t0, 2.0);
    // Snapshot bracketing t0 = 0.2 is index 2 (t = 0.2 exactly).
    const auto& v = scaled[2].potential;
    CHECK(scaled[2].time == doctest::Approx(0.0));
    std::array<int, 3> center{16, 0, 0};
    const long cnode = v.grid.linear_index(center);
    CHECK(std::abs(v.total_value(cnode)) < 1e-12);
    std::vector<std::uint8_t> gv;
    const auto grad = gradient_field(v, gv);
    REQUIRE(gv[cnode]);
    CHECK(std::abs(grad[cnode][0]) < 1e-11);
  }

  SUBCASE("scaled series has the same flow residual as the source") {
    const auto scaled = parabolic_scale(run.snapshots, x0, t0, 2.0);
    const double r_src = flow_residual_sup(
        run.snapshots[1].potential, run.snapshots[2].potential,
        run.snapshots[2].time - run.snapshots[1].time);
    const double r_scaled = flow_residual_sup(
        scaled[1].potential, scaled[2].potential,
        scaled[2].time - scaled[1].time);
    CHECK(r_scaled == doctest::Approx(r_src).epsilon(1e-9));
  }

  SUBCASE("off-grid base point rejected") {
    CHECK_THROWS(parabolic_scale(run.snapshots, {0.05, 0.0, 0.0}, t0, 1.0));
    CHECK_THROWS(parabolic_scale(run.snapshots, x0, 7.0, 1.0));
  }
}

TEST_CASE("self-similar extension") {
  SUBCASE("quadratic shrinkers stay solutions of the flow") {
    GridSpec g = make_box(2, -2.0, 2.0, 33);
    SymMat a = SymMat::diagonal(2, {1.0, 4.0, 0.0});
    PotentialField u = quadratic_shrinker_ma(g, a);
    for (double t : {0.0, 0.25, 0.5}) {
      PotentialField v = self_similar_extend(u, t);
      const double dt = 1e-3;
      PotentialField v2 = self_similar_extend(u, t + dt);
      CHECK(flow_residual_sup(v, v2, dt) <= 1e-10);
    }
  }
  SUBCASE("t = 0 is the identity") {
    GridSpec g = make_box(1, -2.0, 2.0, 65);
    PotentialField u = make_quadratic(g, 0.3, SymMat::identity(1));
    set_perturbation(u, [](const std::array<double, 3>& x) {
      return 0.05 * std::sin(x[0]);
    });
    PotentialField v = self_similar_extend(u, 0.0);
    for (long node = 0; node < g.total_nodes(); ++node)
      CHECK(v.perturbation[node] ==
            doctest::Approx(u.perturbation[node]).epsilon(1e-13));
    CHECK(v.background_const == doctest::Approx(0.3));
  }
  SUBCASE("third derivative scaling identity, cubic perturbation (exact)") {
    GridSpec g = make_box(1, -4.0, 4.0, 257);
    GridSpec target = make_box(1, -2.0, 2.0, 65);
    PotentialField u = make_quadratic(g, 0.0, SymMat::identity(1));
    set_perturbation(u, [](const std::array<double, 3>& x) {
      return 0.05 * x[0] * x[0] * x[0];
    });
    const double t = 0.5;
    PotentialField v = self_similar_extend(u, t, target);
    const auto t3 = derivative_tensors(v, 3);
    const double expect = 0.3 / std::sqrt(1.0 - t);  // (1-t)^{-1/2} D3u
    for (long node = 0; node < target.total_nodes(); ++node) {
      if (!t3.valid[node]) continue;
      CHECK(std::abs(t3.component(node, 0) - expect) <= 1e-8);
    }
  }
  SUBCASE("third derivative scaling identity, sine perturbation") {
    GridSpec g = make_box(1, -8.0, 8.0, 513);
    GridSpec target = make_box(1, -4.0, 4.0, 129);
    PotentialField u = make_quadratic(g, 0.0, SymMat::identity(1));
    set_perturbation(u, [](const std::array<double, 3>& x) {
      return 0.05 * std::sin(x[0]);
    });
    const double t = 0.5;
    const double stretch = 1.0 / std::sqrt(1.0 - t);
    PotentialField v = self_similar_extend(u, t, target);
    const auto t3 = derivative_tensors(v, 3);
    // Error budget: target-stencil truncation O(h_t^2 D5 v) ~ 1.4e-4 at
    // this resolution; interpolation noise is far below it.
    for (long node = 0; node < target.total_nodes(); ++node) {
      if (!t3.valid[node]) continue;
      const auto x = target.position(target.unravel(node));
      const double exact = stretch * (-0.05 * std::cos(stretch * x[0]));
      CHECK(std::abs(t3.component(node, 0) - exact) <= 1e-3);
    }
  }
  SUBCASE("evaluation outside the source box is rejected") {
    GridSpec g = make_box(1, -1.0, 1.0, 65);
    PotentialField u = make_quadratic(g, 0.0, SymMat::identity(1));
    set_perturbation(u, [](const std::array<double, 3>& x) {
      return 0.01 * std::sin(x[0]);
    });
    CHECK_THROWS(self_similar_extend(u, 0.5));  // needs |x|*sqrt(2) <= 1
  }
}
