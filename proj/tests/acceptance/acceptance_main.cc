// Acceptance criteria AC1-AC10. Prints one [PASS]/[FAIL] line per criterion
// with its runtime and exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gainpath/errors.h"
#include "gainpath/lyapunov.h"
#include "gainpath/path.h"
#include "gainpath/stability.h"
#include "support/random_specs.h"

namespace {

using namespace gainpath;
namespace gt = gainpath::testing;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Falsified certificates collected by AC1-AC9 for the replay criterion.
struct Falsified {
  NetworkSpec spec;
  Certificate cert;
  std::string origin;
};
std::vector<Falsified> g_falsified;

void record(const GainOperator& op, const Certificate& cert, const std::string& origin) {
  if (cert.falsified()) g_falsified.push_back({op.spec(), cert, origin});
}

bool finite_vector(const PlusVector& v) {
  for (double x : v.values()) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Outcome ac1() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int specs = 0;
  while (specs < 100) {
    const std::size_t n = gt::uniform_index(rng, 1, 20);
    const auto spec = gt::random_spec(rng, n, gt::random_maf_kind(rng), gt::GainFamily::kMixed,
                                      std::min(0.4, 3.0 / static_cast<double>(n)));
    const GainOperator op(spec);
    const auto s = gt::random_vector(rng, n, 0.0, 1.0);
    // Draws that overflow within 20 steps are not meaningful for the identity.
    try {
      if (!finite_vector(op.gamma_hat_power(s, 20))) continue;
    } catch (const gainpath::Error&) {
      continue;
    }
    ++specs;
    PlusVector hat = s;
    PlusVector power = s;
    PlusVector join = s;
    for (int k = 1; k <= 20; ++k) {
      const PlusVector next = op.gamma_hat_power(s, k);
      const PlusVector recursive = oplus(s, op.gamma(hat));
      const double scale = std::max(1.0, next.sup_norm());
      worst = std::max(worst, sup_distance(next, recursive) / scale);
      power = op.gamma(power);
      join = oplus(join, power);
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max(worst, (join[i] - next[i]) / scale);
      }
      hat = next;
    }
  }
  return {worst <= 1e-14, "100 specs, worst residual " + std::to_string(worst)};
}

Outcome ac2() {
  std::mt19937_64 rng(1002);
  int mismatches = 0;
  for (int c = 0; c < 50; ++c) {
    const std::size_t n = gt::uniform_index(rng, 1, 20);
    const GainOperator op(gt::random_spec(rng, n, MafSpec::Kind::kMax, gt::GainFamily::kMixed,
                                          std::min(0.4, 3.0 / static_cast<double>(n))));
    const auto s = gt::random_vector(rng, n, 0.0, 1.0);
    PlusVector power = s;
    PlusVector join = s;
    for (int k = 1; k <= 20; ++k) {
      power = op.gamma(power);
      join = oplus(join, power);
      if (!(op.gamma_hat_power(s, k) == join)) ++mismatches;
    }
  }
  return {mismatches == 0, "50 specs, " + std::to_string(mismatches) + " bitwise mismatches"};
}

Outcome ac3() {
  const GainOperator op(gt::two_node_identity(MafSpec::Max()));
  std::mt19937_64 rng(1003);
  bool hat_constant = true;
  for (int c = 0; c < 20; ++c) {
    const auto s = gt::random_vector(rng, 2, 0.0, 5.0);
    const auto two = op.gamma_hat_power(s, 2);
    for (int k = 3; k <= 10; ++k) hat_constant &= op.gamma_hat_power(s, k) == two;
  }
  bool ones_fixed = true;
  const auto traj = simulate(op, OperatorKind::Gamma(), PlusVector::Ones(2), 50, 0.0);
  for (const auto& st : traj.states) ones_fixed &= st == PlusVector::Ones(2);
  const auto cert = check_sgc_sample(op, 200, 1003);
  record(op, cert, "AC3 SGC");
  record(op, estimate_oplus_mbi_phi(op, {0.5, 1.0, 2.0}, 4, kDefaultKmax, 1003),
         "AC3 oplus-MBI");
  record(op, check_max_robust_sgc(op, ScalarFn::Linear(0.5), 200, 1003),
         "AC3 max-robust SGC");
  record(op, estimate_ugs_phi(op, OperatorKind::Gamma(), {1.0}, 4, kDefaultKmax, 1003),
         "AC3 UGS");
  const bool witness_ones = cert.falsified() && cert.witness && cert.witness->s &&
                            *cert.witness->s == PlusVector::Ones(2);
  return {hat_constant && ones_fixed && witness_ones,
          std::string("gamma-hat constant after 2 steps: ") + (hat_constant ? "yes" : "no") +
              ", Gamma(1) = 1 along the trajectory: " + (ones_fixed ? "yes" : "no") +
              ", SGC witness 1: " + (witness_ones ? "yes" : "no")};
}

Outcome ac4() {
  std::mt19937_64 rng(1004);
  double worst = 0.0;
  for (int c = 0; c < 30; ++c) {
    const std::size_t n = gt::uniform_index(rng, 2, 6);
    const GainOperator op(gt::random_linear_sum(rng, n, gt::uniform(rng, 0.1, 0.89)));
    const auto phi = default_phi(op, {0.5, 1.0, 2.0}, 1004);
    for (double r : {0.5, 1.0, 2.0}) {
      const auto set = enumerate_fixed_points_sumtype(op, r);
      if (set.points.empty()) return {false, "enumeration found no fixed point"};
      std::vector<double> lo(n, std::numeric_limits<double>::infinity());
      std::vector<double> hi(n, 0.0);
      for (const auto& p : set.points) {
        for (std::size_t i = 0; i < n; ++i) {
          lo[i] = std::min(lo[i], p[i]);
          hi[i] = std::max(hi[i], p[i]);
        }
      }
      const auto lower = compute_sigma_star(op, r);
      const auto upper = compute_sigma_upper(op, r, phi);
      for (std::size_t i = 0; i < n; ++i) {
        worst = std::max({worst, std::abs(lower[i] - lo[i]), std::abs(upper[i] - hi[i])});
      }
    }
  }
  return {worst <= 1e-8, "30 specs x 3 levels, worst deviation " + std::to_string(worst)};
}

Outcome ac5() {
  const GainOperator op(gt::two_node_linear());
  const auto uges = certify_uges_linear(op);
  record(op, uges, "AC5 UGES");
  const double radius = *uges.estimate.scalar;
  const double g2 = op.gamma_power(PlusVector::Ones(2), 2).sup_norm();
  double worst = 0.0;
  const std::vector<double> grid{0.5, 1.0, 2.0, 4.0};
  for (double r : grid) {
    const auto s = compute_sigma_star(op, r);
    worst = std::max({worst, std::abs(s[0] - 2 * r), std::abs(s[1] - r)});
  }
  const auto table = build_path_table(op, grid);
  const auto report = verify_path(op, table, std::nullopt, {{0.5, 4.0}});
  const bool p4 = report.p4.pass && report.p4.entries.size() == 1 &&
                  std::abs(report.p4.entries[0].c - 1.0) <= 1e-9 &&
                  std::abs(report.p4.entries[0].C - 2.0) <= 1e-9;
  const bool pass = std::abs(radius - 0.5) <= 1e-9 && g2 == 0.25 && worst <= 1e-9 &&
                    report.p1.pass && report.p2.pass && report.p3.pass && p4;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "radius %.12f, |Gamma^2(1)| %.3g, sigma error %.2e, P1-P4 %s, c=%.3g C=%.3g",
                radius, g2, worst, report.passed() ? "pass" : "fail",
                report.p4.entries.empty() ? 0.0 : report.p4.entries[0].c,
                report.p4.entries.empty() ? 0.0 : report.p4.entries[0].C);
  return {pass, buf};
}

// All fixed points of Gamma_r for a two-node sum network with scalar gains,
// found by scanning s1 for sign changes of the reduced residual and bisecting.
std::vector<PlusVector> scan_fixed_points(const std::function<double(double)>& g12,
                                          const std::function<double(double)>& g21,
                                          double r, double hi) {
  auto second = [&](double s1) { return std::max(r, g21(s1)); };
  auto residual = [&](double s1) { return std::max(r, g12(second(s1))) - s1; };
  std::vector<PlusVector> out;
  const int steps = 400000;
  double prev_x = r;
  double prev_f = residual(r);
  if (prev_f == 0.0) out.push_back({r, second(r)});
  for (int k = 1; k <= steps; ++k) {
    const double x = r + (hi - r) * k / steps;
    const double f = residual(x);
    if (f == 0.0) {
      out.push_back({x, second(x)});
    } else if (prev_f != 0.0 && (prev_f > 0.0) != (f > 0.0)) {
      double a = prev_x;
      double b = x;
      for (int q = 0; q < 200; ++q) {
        const double m = 0.5 * (a + b);
        ((residual(m) > 0.0) == (prev_f > 0.0) ? a : b) = m;
      }
      out.push_back({0.5 * (a + b), second(0.5 * (a + b))});
    }
    prev_x = x;
    prev_f = f;
  }
  return out;
}

Outcome ac6() {
  const GainOperator op(gt::two_node_power());
  auto g12 = [](double t) { return 0.5 * std::sqrt(t); };
  auto g21 = [](double t) { return t * t; };
  const auto phi = default_phi(op, log_levels(0.01, 10.0, 31), 1006);

  const auto low = scan_fixed_points(g12, g21, 0.04, 10.0);
  PlusVector oracle_low = low.front();
  for (const auto& p : low) oracle_low = p.sup_norm() < oracle_low.sup_norm() ? p : oracle_low;
  const auto up = scan_fixed_points(g12, g21, 1.0, phi(1.0));
  PlusVector oracle_up = up.front();
  for (const auto& p : up) oracle_up = p.sup_norm() > oracle_up.sup_norm() ? p : oracle_up;

  const auto s_low = compute_sigma_star(op, 0.04);
  const auto s_up = compute_sigma_upper(op, 1.0, phi);
  const double e1 = sup_distance(s_low, oracle_low);
  const double e2 = sup_distance(s_up, oracle_up);
  const double e3 = std::max(sup_distance(s_low, {0.1, 0.04}), sup_distance(s_up, {1.0, 1.0}));
  const auto k = check_order_contraction(op, 2, 0.1, 1.0, 400, 1006);
  record(op, k, "AC6 order contraction");
  const double kval = k.estimate.scalar.value_or(-1.0);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "sigma_*(0.04) err %.2e, sigma^*(1) err %.2e, vs closed form %.2e, K %.4f", e1,
                e2, e3, kval);
  return {e1 <= 1e-8 && e2 <= 1e-8 && e3 <= 1e-8 && std::abs(kval - 0.5) <= 0.02, buf};
}

Outcome ac7() {
  std::mt19937_64 rng(1007);
  double worst_ratio = 0.0;
  int certified = 0;
  const auto grid = log_grid(0.1, 10.0, 8);
  while (certified < 20) {
    const std::size_t n = gt::uniform_index(rng, 2, 10);
    const GainOperator op(gt::random_linear_sum(rng, n, gt::uniform(rng, 0.1, 0.9)));
    const auto cert = certify_uges_linear(op);
    record(op, cert, "AC7 UGES");
    if (cert.verdict != Verdict::kExactPass) continue;
    ++certified;
    const double bound = *cert.estimate.m / (1.0 - *cert.estimate.rate);
    const double lip = build_path_table(op, grid).lipschitz_constant();
    worst_ratio = std::max(worst_ratio, lip / bound);
  }
  return {worst_ratio <= 1.05,
          "20 certified specs, max Lipschitz / (M/(1-gamma)) = " + std::to_string(worst_ratio)};
}

Outcome ac8() {
  std::vector<PlusVector> sigmas;
  for (std::size_t n : {50u, 100u, 200u}) {
    const GainOperator op(NetworkSpec::FromTemplate(gt::quarter_chain(n), n));
    sigmas.push_back(compute_sigma_star(op, 1.0));
  }
  // Interior: the central 20 nodes of each truncation.
  double worst = 0.0;
  for (std::size_t q = 0; q < 20; ++q) {
    const double ref = sigmas[0][15 + q];
    worst = std::max(worst, std::abs(sigmas[1][40 + q] - ref));
    worst = std::max(worst, std::abs(sigmas[2][90 + q] - ref));
  }
  return {worst <= 1e-10, "n = 50/100/200, worst interior difference " + std::to_string(worst)};
}

Outcome ac9() {
  const std::size_t n = 10;
  std::vector<SubsystemModel> models(n);
  for (std::size_t i = 0; i < n; ++i) {
    models[i].a = 2.0;
    models[i].c = 1.0;
    if (i > 0) models[i].coupling.push_back({i - 1, 0.25});
    if (i + 1 < n) models[i].coupling.push_back({i + 1, 0.25});
  }
  const auto derived = derive_gain_spec(models);
  const GainOperator op(derived.spec);
  const auto rho = ScalarFn::Linear(0.5);
  const GainOperator scaled(scale_gains(derived.spec, 1.5));
  const auto grid = log_levels(1e-3, 1e3, 103);
  const auto phi = default_phi(scaled, grid, 1009);
  const auto table = build_path_table(scaled, grid, &phi);
  const auto report = verify_path(op, table, rho, {{grid.front(), grid.back()}});
  double alpha_slope = std::numeric_limits<double>::infinity();
  for (const auto& a : derived.alphas) alpha_slope = std::min(alpha_slope, a.linear_slope());
  const auto alpha = ScalarFn::Linear(0.1 * alpha_slope);
  const auto V = assemble_V(table, models, derived.gamma_u_max);

  std::mt19937_64 rng(1009);
  std::vector<IssRun> batch;
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x0(n);
    double top = 0.0;
    for (double& v : x0) {
      v = gt::uniform(rng, -1.0, 1.0);
      top = std::max(top, std::abs(v));
    }
    const double size = std::exp(gt::uniform(rng, std::log(0.1), std::log(10.0)));
    for (double& v : x0) v *= size / top;
    InputSignal u{0.1, {}};
    if ((t / 2) % 2 == 1) {
      const double amp = gt::uniform(rng, 0.0, 0.25);
      for (int k = 0; k < 100; ++k) {
        std::vector<double> w(n);
        for (double& v : w) v = amp * gt::uniform(rng, -1.0, 1.0);
        u.values.push_back(std::move(w));
      }
    }
    auto traj = simulate_network_ode(models, x0, u, 10.0, 1e-3);
    const auto rep = check_iss_decay(traj, V, u, alpha, 1e-2);
    violations += rep.violations;
    checked += rep.checked;
    batch.push_back({std::move(traj), u.sup_norm()});
  }
  const auto fit = fit_iss_estimate(batch);
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "path %s, %zu violations in %zu checked samples, fit %s (gamma %.3f, "
                "exceedance %.4f)",
                report.passed() ? "pass" : "fail", violations, checked,
                fit.pass ? "pass" : "fail", fit.gamma_slope, fit.exceedance);
  return {report.passed() && violations == 0 && fit.pass && fit.exceedance <= 0.01, buf};
}

Outcome ac10() {
  std::size_t ok = 0;
  std::string failed;
  for (const auto& f : g_falsified) {
    if (replay_witness(GainOperator(f.spec), f.cert)) {
      ++ok;
    } else {
      failed += " " + f.origin;
    }
  }
  return {ok == g_falsified.size() && !g_falsified.empty(),
          std::to_string(ok) + "/" + std::to_string(g_falsified.size()) +
              " falsified certificates replayed" + (failed.empty() ? "" : "; failed:" + failed)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4}, {"AC5", ac5},
      {"AC6", ac6}, {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}};
  // Runtime limits in seconds, in criterion order.
  const double limits[] = {10, 5, 5, 60, 5, 10, 30, 30, 120, 60};
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[c].second();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > limits[c]) {
      out.pass = false;
      out.detail += " (over the " + std::to_string(static_cast<int>(limits[c])) + " s limit)";
    }
    failures += out.pass ? 0 : 1;
    std::printf("[%s] %s %.3fs  %s\n", out.pass ? "PASS" : "FAIL", criteria[c].first, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
