// Command-line front end: validate, simulate, certify, path, lyapunov.
//
// Exit codes: 0 when every verdict passes or is not falsified, 1 when any
// verdict is falsified or a computation fails, 2 on usage or parse errors.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gainpath/errors.h"
#include "gainpath/graph.h"
#include "gainpath/io.h"
#include "gainpath/lyapunov.h"
#include "gainpath/network.h"
#include "gainpath/operators.h"
#include "gainpath/path.h"
#include "gainpath/stability.h"

namespace {

using gainpath::Certificate;
using gainpath::GainOperator;
using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct Options {
  std::string network;
  double tol = gainpath::kDefaultTol;
  int kmax = gainpath::kDefaultKmax;
  std::string grid;
  std::uint64_t seed = 0;
  std::string truncation;
  std::string rho;
  std::string omega;
  std::string out;

  std::string property = "all";
  int budget = 2000;
  int samples = 16;
  int k = 2;

  std::string op = "gamma";
  double r = 1.0;
  std::string s0;

  int trajectories = 20;
  double horizon = 10.0;
  double dt = 1e-3;
  double decay_tol = 1e-2;
};

void write_file(const Options& opt, const std::string& name, const std::string& body) {
  if (opt.out.empty()) return;
  std::filesystem::create_directories(opt.out);
  std::ofstream(std::filesystem::path(opt.out) / name) << body;
}

std::vector<std::optional<std::size_t>> truncations(const Options& opt) {
  if (opt.truncation.empty()) return {std::nullopt};
  std::vector<std::optional<std::size_t>> out;
  for (std::size_t n : gainpath::parse_truncation_flag(opt.truncation)) out.emplace_back(n);
  return out;
}

std::vector<double> grid_or(const Options& opt, const std::string& fallback) {
  return gainpath::parse_grid_flag(opt.grid.empty() ? fallback : opt.grid);
}

std::string suffix(const std::optional<std::size_t>& n, std::size_t count) {
  return count > 1 && n ? "_n" + std::to_string(*n) : "";
}

int run_validate(const Options& opt) {
  const auto sizes = truncations(opt);
  bool ok = true;
  json all = json::array();
  for (const auto& n : sizes) {
    std::ifstream in(opt.network);
    if (!in) throw gainpath::ParseError(opt.network + ": cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    const auto doc = gainpath::parse_network(buf.str(), n);
    const auto report = gainpath::validate_network(doc.spec);
    const auto tech = gainpath::check_standard_technical(
        doc.spec, gainpath::log_levels(1e-2, 1e2, 9));
    std::printf("network n=%zu edges=%zu\n", doc.spec.n, doc.spec.edge_count());
    json checks = json::array();
    for (const auto& c : report.checks) {
      std::printf("  %-14s %s  %s\n", c.name.c_str(), c.passed ? "ok  " : "FAIL",
                  c.detail.c_str());
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    std::printf("  %-14s %s\n", "xi-bound", tech.xi_ok ? "ok" : "not satisfied");
    std::printf("  %-14s %s\n", "eta-bound", tech.eta_ok ? "ok" : "not satisfied");
    ok = ok && report.passed();
    all.push_back({{"n", doc.spec.n},
                   {"passed", report.passed()},
                   {"checks", checks},
                   {"xi_ok", tech.xi_ok},
                   {"eta_ok", tech.eta_ok}});
  }
  write_file(opt, "validation.json", all.dump(2) + "\n");
  return ok ? kExitPass : kExitFail;
}

gainpath::OperatorKind operator_kind(const Options& opt) {
  if (opt.op == "gamma") return gainpath::OperatorKind::Gamma();
  if (opt.op == "gamma-hat") return gainpath::OperatorKind::GammaHat();
  if (opt.op == "gamma-r") return gainpath::OperatorKind::GammaR(opt.r);
  if (opt.op == "scaled") {
    if (opt.omega.empty()) throw gainpath::ParseError("--operator scaled needs --omega");
    return gainpath::OperatorKind::Scaled(gainpath::parse_function_flag(opt.omega),
                                          gainpath::ScalingMode::kPreInverse);
  }
  throw gainpath::ParseError("unknown operator '" + opt.op + "'");
}

gainpath::PlusVector initial_state(const Options& opt, std::size_t n) {
  if (opt.s0.empty()) return gainpath::PlusVector::Ones(n);
  std::vector<double> v;
  std::stringstream in(opt.s0);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    try {
      v.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw gainpath::ParseError("--s0: '" + tok + "' is not a number");
    }
  }
  if (v.size() == 1) return gainpath::PlusVector::Constant(n, v[0]);
  if (v.size() != n) throw gainpath::ParseError("--s0 has the wrong length");
  return gainpath::PlusVector(v);
}

int run_simulate(const Options& opt) {
  const auto doc = gainpath::load_network(opt.network, truncations(opt).front());
  const GainOperator op(doc.spec);
  const auto kind = operator_kind(opt);
  const auto traj = gainpath::simulate(op, kind, initial_state(opt, op.size()), opt.kmax,
                                       opt.tol);
  std::string csv = "k,component,s\n";
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    for (std::size_t i = 0; i < op.size(); ++i) {
      csv += std::to_string(k) + "," + std::to_string(i + 1) + "," +
             gainpath::format_double(traj.states[k][i]) + "\n";
    }
  }
  write_file(opt, "trajectory.csv", csv);
  std::printf("operator %s: %d iterations, %s, final norm %s\n", kind.describe().c_str(),
              traj.iterations,
              traj.overflowed ? "overflow" : traj.converged ? "converged" : "kmax reached",
              gainpath::format_double(traj.states.back().sup_norm()).c_str());
  return traj.overflowed ? kExitFail : kExitPass;
}

std::vector<std::pair<std::string, Certificate>> certify_one(const Options& opt,
                                                             const GainOperator& op,
                                                             const std::string& property) {
  const auto levels = grid_or(opt, "0.01:100:9");
  std::vector<std::pair<std::string, Certificate>> out;
  if (property == "ugs") {
    out.emplace_back(property, gainpath::estimate_ugs_phi(op, operator_kind(opt), levels,
                                                          opt.samples, opt.kmax, opt.seed));
  } else if (property == "uges") {
    if (op.is_additive() && op.has_linear_gains()) {
      out.emplace_back(property, gainpath::certify_uges_linear(op));
    } else {
      out.emplace_back(property,
                       gainpath::certify_homogeneous(op, static_cast<int>(4 * op.size() + 20)));
    }
  } else if (property == "sgc") {
    out.emplace_back(property, gainpath::check_sgc_sample(op, opt.budget, opt.seed));
  } else if (property == "uniform-sgc") {
    out.emplace_back(property, gainpath::estimate_uniform_sgc_eta(op, levels, opt.samples,
                                                                  opt.seed));
  } else if (property == "oplus-mbi") {
    out.emplace_back(property, gainpath::estimate_oplus_mbi_phi(op, levels, opt.samples,
                                                                opt.kmax, opt.seed));
  } else if (property == "mbi") {
    const auto oplus =
        gainpath::estimate_oplus_mbi_phi(op, levels, opt.samples, opt.kmax, opt.seed);
    if (oplus.falsified()) {
      out.emplace_back(property, gainpath::mbi_from_oplus_witness(op, oplus));
    } else if (op.has_linear_gains()) {
      out.emplace_back(property, gainpath::mbi_by_uges_route(op));
    } else {
      Certificate c;
      c.property = gainpath::Property::kMbi;
      c.verdict = gainpath::Verdict::kInconclusive;
      c.seed = opt.seed;
      c.notes.push_back("no MBI route applies: gains are nonlinear and no witness was found");
      out.emplace_back(property, c);
    }
  } else if (property == "max-robust-sgc") {
    const auto omega = gainpath::parse_function_flag(opt.omega.empty() ? "linear:0.999"
                                                                       : opt.omega);
    out.emplace_back(property,
                     gainpath::check_max_robust_sgc(op, omega, opt.budget, opt.seed));
  } else if (property == "order-contraction") {
    out.emplace_back(property, gainpath::check_order_contraction(
                                   op, opt.k, levels.front(), levels.back(),
                                   opt.budget, opt.seed));
  } else {
    throw gainpath::ParseError("unknown property '" + property + "'");
  }
  return out;
}

int run_certify(const Options& opt) {
  const auto doc = gainpath::load_network(opt.network, truncations(opt).front());
  const GainOperator op(doc.spec);
  std::vector<std::string> props;
  if (opt.property == "all") {
    props = {"ugs", "uges", "sgc", "uniform-sgc", "oplus-mbi", "mbi", "max-robust-sgc",
             "order-contraction"};
  } else {
    props = {opt.property};
  }
  bool any_falsified = false;
  bool any_failed = false;
  json report = json::array();
  for (const auto& p : props) {
    std::vector<std::pair<std::string, Certificate>> certs;
    try {
      certs = certify_one(opt, op, p);
    } catch (const gainpath::WrongClassError& e) {
      std::printf("%-18s not applicable: %s\n", p.c_str(), e.what());
      if (opt.property != "all") any_failed = true;
      continue;
    } catch (const gainpath::ParseError&) {
      throw;
    } catch (const gainpath::Error& e) {
      std::printf("%-18s error: %s\n", p.c_str(), e.what());
      any_failed = true;
      continue;
    }
    for (auto& [name, cert] : certs) {
      if (cert.falsified()) {
        const bool replayed = gainpath::replay_witness(op, cert);
        cert.notes.push_back(replayed ? "witness replayed by direct evaluation"
                                      : "witness did not replay");
        any_falsified = true;
      }
      std::printf("%-18s %s\n", name.c_str(), gainpath::to_string(cert.verdict));
      const std::string body = gainpath::certificate_json(cert);
      write_file(opt, "certificate_" + name + ".json", body + "\n");
      report.push_back(json::parse(body));
    }
  }
  if (opt.out.empty()) std::cout << report.dump(2) << "\n";
  return any_falsified || any_failed ? kExitFail : kExitPass;
}

json path_report_json(const gainpath::PathReport& rep, const gainpath::PathTable& table) {
  json p4 = json::array();
  for (const auto& e : rep.p4.entries) p4.push_back({{"a", e.a}, {"b", e.b}, {"c", e.c}, {"C", e.C}});
  json out = {
      {"truncation", table.meta().truncation},
      {"mode", gainpath::to_string(table.meta().mode)},
      {"max_gap", table.meta().max_gap},
      {"lipschitz", table.lipschitz_constant()},
      {"p1", {{"pass", rep.p1.pass}, {"worst_margin", rep.p1.worst}, {"worst_r", rep.p1.worst_r}}},
      {"p2", {{"pass", rep.p2.pass}}},
      {"p3", {{"pass", rep.p3.pass}, {"min_step", rep.p3.min_step}}},
      {"p4", {{"pass", rep.p4.pass}, {"intervals", p4}}},
      {"side",
       {{"interval", {rep.side.lo, rep.side.hi}},
        {"maf_lower_bound", rep.side.maf.l},
        {"maf_notes", rep.side.maf.notes},
        {"gain_lower_lipschitz", rep.side.gain_lipschitz}}},
  };
  if (rep.p3.component) {
    out["p3"]["component"] = *rep.p3.component + 1;
    out["p3"]["interval"] = {rep.p3.interval->first, rep.p3.interval->second};
  }
  if (rep.side.contraction) {
    out["side"]["order_contraction"] = json::parse(gainpath::certificate_json(*rep.side.contraction));
  }
  return out;
}

struct BuiltPath {
  gainpath::PathTable table;
  gainpath::PathReport report;
};

// Builds the path for (id + rho) o Gamma when rho is linear and verifies it
// against Gamma with that rho.
BuiltPath build_and_verify(const Options& opt, const gainpath::NetworkSpec& spec,
                           const std::vector<double>& grid,
                           const std::optional<gainpath::ScalarFn>& rho) {
  const GainOperator op(spec);
  std::optional<GainOperator> scaled;
  if (rho && rho->is_linear()) {
    scaled.emplace(gainpath::scale_gains(spec, 1.0 + rho->linear_slope()));
  }
  const GainOperator& target = scaled ? *scaled : op;
  std::optional<gainpath::ScalarFn> phi;
  try {
    phi = gainpath::default_phi(target, grid, opt.seed);
  } catch (const gainpath::Error& e) {
    std::printf("note: no UGS envelope for the upper construction (%s)\n", e.what());
  }
  auto table = gainpath::build_path_table(target, grid, phi ? &*phi : nullptr, opt.tol,
                                          opt.kmax);
  auto report = gainpath::verify_path(op, table, rho, {{grid.front(), grid.back()}});
  return {std::move(table), std::move(report)};
}

std::optional<gainpath::ScalarFn> rho_of(const Options& opt, const char* fallback) {
  const std::string text = opt.rho.empty() ? fallback : opt.rho;
  if (text.empty() || text == "none") return std::nullopt;
  return gainpath::parse_function_flag(text);
}

int run_path(const Options& opt) {
  const auto grid = grid_or(opt, "0.1:10:35");
  const auto rho = rho_of(opt, "");
  const auto sizes = truncations(opt);
  bool ok = true;
  for (const auto& n : sizes) {
    const auto doc = gainpath::load_network(opt.network, n);
    try {
      const BuiltPath built = build_and_verify(opt, doc.spec, grid, rho);
      const std::string tag = suffix(n, sizes.size());
      write_file(opt, "path" + tag + ".csv", gainpath::path_table_csv(built.table));
      json rep = path_report_json(built.report, built.table);
      rep["seed"] = opt.seed;
      write_file(opt, "path_report" + tag + ".json", rep.dump(2) + "\n");
      std::printf("n=%zu P1 %s P2 %s P3 %s P4 %s gap %s lipschitz %s\n", doc.spec.n,
                  built.report.p1.pass ? "pass" : "FAIL",
                  built.report.p2.pass ? "pass" : "FAIL",
                  built.report.p3.pass ? "pass" : "FAIL",
                  built.report.p4.pass ? "pass" : "FAIL",
                  gainpath::format_double(built.table.meta().max_gap).c_str(),
                  gainpath::format_double(built.table.lipschitz_constant()).c_str());
      ok = ok && built.report.passed();
    } catch (const gainpath::PathConstructionError& e) {
      std::printf("n=%zu path construction failed: %s\n", doc.spec.n, e.what());
      ok = false;
    }
  }
  return ok ? kExitPass : kExitFail;
}

int run_lyapunov(const Options& opt) {
  const auto doc = gainpath::load_network(opt.network, truncations(opt).front());
  if (!doc.dynamics) throw gainpath::ParseError(opt.network + ": no dynamics block");
  const auto& models = *doc.dynamics;
  const auto derived = gainpath::derive_gain_spec(models);
  const auto grid = grid_or(opt, "0.001:1000:103");
  const auto rho = rho_of(opt, "linear:0.5");

  BuiltPath built = build_and_verify(opt, doc.spec, grid, rho);
  double alpha_slope = std::numeric_limits<double>::infinity();
  for (const auto& a : derived.alphas) alpha_slope = std::min(alpha_slope, a.linear_slope());
  const auto alpha = gainpath::ScalarFn::Linear(0.1 * alpha_slope);
  const auto V = gainpath::assemble_V(built.table, models, derived.gamma_u_max);

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> log_size(std::log(0.1), std::log(10.0));
  const std::size_t dim = gainpath::state_offsets(models).back();
  std::vector<gainpath::IssRun> batch;
  std::size_t violations = 0;
  std::size_t checked = 0;
  for (int t = 0; t < opt.trajectories; ++t) {
    std::vector<double> x0(dim);
    double top = 0.0;
    for (double& v : x0) {
      v = unit(rng);
      top = std::max(top, std::abs(v));
    }
    const double size = std::exp(log_size(rng));
    for (double& v : x0) v = v / top * size;
    gainpath::InputSignal u;
    u.mesh = 0.1;
    if ((t / 2) % 2 == 1) {
      const double amp = 0.5 * (unit(rng) + 1.0) / 2.0;
      const auto steps = static_cast<std::size_t>(std::ceil(opt.horizon / u.mesh));
      for (std::size_t k = 0; k < steps; ++k) {
        std::vector<double> w(dim);
        for (double& v : w) v = amp * unit(rng);
        u.values.push_back(std::move(w));
      }
    }
    auto traj = gainpath::simulate_network_ode(models, x0, u, opt.horizon, opt.dt);
    const auto rep = gainpath::check_iss_decay(traj, V, u, alpha, opt.decay_tol);
    violations += rep.violations;
    checked += rep.checked;
    batch.push_back({std::move(traj), u.sup_norm()});
  }
  const auto fit = gainpath::fit_iss_estimate(batch);
  json out = {{"path_passed", built.report.passed()},
              {"trajectories", opt.trajectories},
              {"checked_samples", checked},
              {"violations", violations},
              {"fit", {{"pass", fit.pass}, {"gamma_slope", fit.gamma_slope},
                       {"exceedance", fit.exceedance}, {"notes", fit.notes}}},
              {"seed", opt.seed}};
  write_file(opt, "lyapunov_report.json", out.dump(2) + "\n");
  std::printf("path %s, decay violations %zu of %zu checked, ISS fit %s (exceedance %s)\n",
              built.report.passed() ? "pass" : "FAIL", violations, checked,
              fit.pass ? "pass" : "FAIL", gainpath::format_double(fit.exceedance).c_str());
  return built.report.passed() && violations == 0 && fit.pass ? kExitPass : kExitFail;
}

void add_common(CLI::App* cmd, Options& opt) {
  cmd->add_option("network", opt.network, "Network JSON file")->required();
  cmd->add_option("--tol", opt.tol, "Fixed-point tolerance");
  cmd->add_option("--kmax", opt.kmax, "Iteration cap");
  cmd->add_option("--grid", opt.grid, "Log grid a:b:points");
  cmd->add_option("--seed", opt.seed, "Random seed");
  cmd->add_option("--truncation", opt.truncation, "Template sizes n[,n2,...]");
  cmd->add_option("--rho", opt.rho, "Decay margin kind:params");
  cmd->add_option("--omega", opt.omega, "Scaling function kind:params");
  cmd->add_option("--out", opt.out, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gain-operator small-gain toolbox"};
  app.require_subcommand(1);
  Options opt;

  auto* validate = app.add_subcommand("validate", "Check a network file");
  add_common(validate, opt);

  auto* simulate = app.add_subcommand("simulate", "Iterate an operator system");
  add_common(simulate, opt);
  simulate->add_option("--operator", opt.op, "gamma, gamma-hat, gamma-r or scaled");
  simulate->add_option("--r", opt.r, "Level r for gamma-r");
  simulate->add_option("--s0", opt.s0, "Initial state v1,v2,... or a single level");

  auto* certify = app.add_subcommand("certify", "Certify or falsify stability properties");
  add_common(certify, opt);
  certify->add_option("--property", opt.property,
                      "ugs, uges, sgc, uniform-sgc, oplus-mbi, mbi, max-robust-sgc, "
                      "order-contraction or all");
  certify->add_option("--budget", opt.budget, "Sample budget for searches");
  certify->add_option("--samples", opt.samples, "Samples per level");
  certify->add_option("--k", opt.k, "Power for order contraction");
  certify->add_option("--operator", opt.op, "Operator for ugs");

  auto* path = app.add_subcommand("path", "Build and verify a path of decay");
  add_common(path, opt);

  auto* lyap = app.add_subcommand("lyapunov", "Assemble and test the composite ISS Lyapunov function");
  add_common(lyap, opt);
  lyap->add_option("--trajectories", opt.trajectories, "Number of simulated trajectories");
  lyap->add_option("--horizon", opt.horizon, "Simulation horizon T");
  lyap->add_option("--dt", opt.dt, "Integration step");
  lyap->add_option("--decay-tol", opt.decay_tol, "Tolerance of the decay check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (*validate) return run_validate(opt);
    if (*simulate) return run_simulate(opt);
    if (*certify) return run_certify(opt);
    if (*path) return run_path(opt);
    if (*lyap) return run_lyapunov(opt);
  } catch (const gainpath::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const gainpath::InvalidNetworkError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  } catch (const gainpath::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return kExitUsage;
}
