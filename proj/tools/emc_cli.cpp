// emc: command-line front end for energy-momentum-Casimir certification.
//
// Exit codes: 0 stable / consistent, 2 inconclusive, 3 structural failure,
// 1 usage or runtime error.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "emcert/dynamics.hpp"
#include "emcert/emc.hpp"
#include "emcert/io.hpp"
#include "emcert/lie.hpp"
#include "emcert/phase.hpp"
#include "emcert/releq.hpp"
#include "emcert/systems.hpp"
#include "emcert/verify.hpp"

namespace {

using emcert::io::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInconclusive = 2;
constexpr int kExitStructure = 3;

struct SystemArgs {
  std::string name;
  emcert::ParameterMap params;
  std::vector<std::string> extra;  // key=value

  emcert::ParameterMap raw() const {
    emcert::ParameterMap p = params;
    for (const auto& kv : extra) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw emcert::Error(emcert::ErrorCode::Usage, "--param expects key=value, got '" + kv + "'");
      }
      try {
        std::size_t used = 0;
        const std::string v = kv.substr(eq + 1);
        p[kv.substr(0, eq)] = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::logic_error&) {
        throw emcert::Error(emcert::ErrorCode::Usage, "--param value is not a number in '" + kv + "'");
      }
    }
    return p;
  }

  emcert::ParameterMap resolved() const { return emcert::resolve_parameters(emcert::catalog_entry(name), raw()); }
};

void add_system_options(CLI::App* sub, SystemArgs& a) {
  sub->add_option("system", a.name, "catalog system name (see list-systems)")->required();
  sub->add_option_function<std::vector<double>>(
         "--I",
         [&a](const std::vector<double>& v) {
           if (v.size() != 3) throw CLI::ValidationError("--I", "expects three values I1,I2,I3");
           a.params["I1"] = v[0];
           a.params["I2"] = v[1];
           a.params["I3"] = v[2];
         },
         "principal moments I1,I2,I3")
      ->delimiter(',')
      ->expected(3);
  for (const char* key : {"I1", "I2", "I3", "Mgl", "omega"}) {
    const std::string k = key;
    sub->add_option_function<double>("--" + k, [&a, k](double v) { a.params[k] = v; }, "system parameter " + k);
  }
  sub->add_option("--param", a.extra, "additional system parameter key=value");
}

struct PointArgs {
  std::vector<double> at;
  std::vector<double> xi;
  std::string equilibrium;
};

void add_point_options(CLI::App* sub, PointArgs& p) {
  sub->add_option("--at", p.at, "point z_e (comma separated)")->delimiter(',');
  sub->add_option("--xi", p.xi, "generator guess xi (comma separated)")->delimiter(',');
  sub->add_option("--equilibrium", p.equilibrium, "named known equilibrium of the system");
}

struct Seed {
  emcert::Point z;
  emcert::AlgebraElement xi;
  std::string label;
};

Seed resolve_seed(const emcert::PhaseSpaceSystem& sys, const SystemArgs& s, const PointArgs& p) {
  const auto known = emcert::known_equilibria(s.name, s.raw());
  Seed seed;
  if (!p.at.empty()) {
    if (!p.equilibrium.empty()) throw emcert::Error(emcert::ErrorCode::Usage, "--at and --equilibrium are exclusive");
    seed.z = Eigen::Map<const emcert::VectorXd>(p.at.data(), static_cast<Eigen::Index>(p.at.size()));
    seed.xi = emcert::AlgebraElement::zero(sys.dim_g());
    seed.label = "point";
  } else {
    if (known.empty()) throw emcert::Error(emcert::ErrorCode::Usage, "system has no known equilibria; pass --at");
    const emcert::KnownEquilibrium* chosen = &known.front();
    if (!p.equilibrium.empty()) {
      chosen = nullptr;
      std::string names;
      for (const auto& k : known) {
        if (k.name == p.equilibrium) chosen = &k;
        names += (names.empty() ? "" : ", ") + k.name;
      }
      if (!chosen) {
        throw emcert::Error(emcert::ErrorCode::Usage,
                            "unknown equilibrium '" + p.equilibrium + "' (known: " + names + ")");
      }
    }
    seed.z = chosen->point;
    seed.xi = emcert::AlgebraElement(chosen->xi);
    seed.label = chosen->name;
  }
  if (!p.xi.empty()) {
    seed.xi = emcert::AlgebraElement(
        Eigen::Map<const emcert::VectorXd>(p.xi.data(), static_cast<Eigen::Index>(p.xi.size())));
  }
  emcert::check_point(sys, seed.z);
  sys.group.check(seed.xi);
  return seed;
}

json system_config(const SystemArgs& s) {
  json params = json::object();
  for (const auto& [k, v] : s.resolved()) params[k] = v;
  return json{{"name", s.name}, {"params", params}};
}

struct CertifyArgs {
  emcert::EmcTolerances tol;
  double sigma_max = 1e6;
  int xi_budget = 101;
  double search_radius = 0.0;
  double tube_radius = 0.5;
  double tol_re = 1e-9;
};

void add_certify_options(CLI::App* sub, CertifyArgs& c) {
  sub->add_option("--tol-zero", c.tol.zero_rel, "zero-cluster tolerance relative to the spectral radius")
      ->capture_default_str();
  sub->add_option("--tol-pos", c.tol.pos_rel, "definiteness tolerance relative to the spectral radius")
      ->capture_default_str();
  sub->add_option("--tol-angle", c.tol.angle, "kernel principal-angle tolerance (rad)")->capture_default_str();
  sub->add_option("--tol-crit", c.tol.crit, "criticality tolerance on the EMC gradient")->capture_default_str();
  sub->add_option("--tol-null", c.tol.null, "relative null-space threshold")->capture_default_str();
  sub->add_option("--tol-re", c.tol_re, "relative-equilibrium residual tolerance")->capture_default_str();
  sub->add_option("--sigma-max", c.sigma_max, "cap on the f2 weight")->capture_default_str();
  sub->add_option("--xi-budget", c.xi_budget, "grid points per searched dimension")->capture_default_str();
  sub->add_option("--search-radius", c.search_radius, "half-width of the xi search box (0 = automatic)")
      ->capture_default_str();
  sub->add_option("--tube-radius", c.tube_radius, "radius of the tube where f is evaluated")->capture_default_str();
}

json certify_config(const CertifyArgs& c) {
  return json{{"tolerances", emcert::io::to_json(c.tol)}, {"sigma_max", c.sigma_max},
              {"xi_budget", c.xi_budget},                 {"search_radius", c.search_radius},
              {"tube_radius", c.tube_radius},             {"tol_re", c.tol_re}};
}

/// Writes all of `text` to `path` or stdout; files are written to a
/// temporary name first so a failure never leaves partial output.
void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw emcert::Error(emcert::ErrorCode::Usage, "cannot write '" + path + "'");
    os << text;
    if (!os) throw emcert::Error(emcert::ErrorCode::Usage, "cannot write '" + path + "'");
  }
  fs::rename(tmp, target);
}

json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw emcert::Error(emcert::ErrorCode::Usage, "cannot read '" + path + "'");
  try {
    return json::parse(is);
  } catch (const json::exception& e) {
    throw emcert::Error(emcert::ErrorCode::Usage, "'" + path + "' is not valid JSON: " + e.what());
  }
}

json envelope(const std::string& kind, json config) {
  return json{{"schema_version", emcert::io::kSchemaVersion}, {"kind", kind}, {"config", std::move(config)}};
}

int verdict_exit(emcert::Verdict v) {
  return v == emcert::Verdict::CertifiedStable ? kExitOk : kExitInconclusive;
}

/// Runs the structure checks and reports failures on stderr.
bool structure_ok(const emcert::PhaseSpaceSystem& sys) {
  const auto rep = emcert::check_structure(sys, 10);
  if (rep.passed()) return true;
  for (const auto& [name, c] : rep.entries()) {
    if (!c->passed) std::cerr << "emc: structure check '" << name << "' failed: " << c->max_violation << '\n';
  }
  return false;
}

// ---------------------------------------------------------------------------

int cmd_list_systems(bool as_json) {
  json out = json::array();
  for (const auto& e : emcert::system_catalog()) {
    json params = json::array();
    for (const auto& p : e.parameters) {
      params.push_back(json{{"name", p.name},
                            {"default", p.default_value},
                            {"min", emcert::io::num(p.min)},
                            {"max", emcert::io::num(p.max)},
                            {"min_exclusive", p.min_exclusive},
                            {"description", p.description}});
    }
    json seeds = json::array();
    for (const auto& k : e.seeds(emcert::resolve_parameters(e, {}))) {
      seeds.push_back(json{{"name", k.name}, {"point", emcert::io::vec(k.point)}, {"xi", emcert::io::vec(k.xi)}});
    }
    out.push_back(json{{"name", e.name}, {"description", e.description}, {"parameters", params}, {"equilibria", seeds}});
  }
  if (as_json) {
    emit(json{{"schema_version", emcert::io::kSchemaVersion}, {"kind", "catalog"}, {"systems", out}}.dump(2) + "\n", "");
    return kExitOk;
  }
  std::ostringstream os;
  for (const auto& s : out) {
    os << s["name"].get<std::string>() << "  " << s["description"].get<std::string>() << '\n';
    for (const auto& p : s["parameters"]) {
      os << "    --" << p["name"].get<std::string>() << " (default " << p["default"].get<double>() << ")  "
         << p["description"].get<std::string>() << '\n';
    }
    for (const auto& k : s["equilibria"]) os << "    equilibrium " << k["name"].get<std::string>() << " at " << k["point"].dump() << '\n';
  }
  emit(os.str(), "");
  return kExitOk;
}

int cmd_check_structure(const SystemArgs& s, int samples, std::uint64_t seed, double tol, const std::string& out) {
  const auto sys = emcert::instantiate_system(s.name, s.raw());
  const auto rep = emcert::check_structure(sys, samples, seed, tol);
  json j = envelope("structure", json{{"system", system_config(s)}, {"samples", samples}, {"seed", seed}, {"tol", tol}});
  j["report"] = emcert::io::to_json(rep);
  emit(j.dump(2) + "\n", out);
  return rep.passed() ? kExitOk : kExitStructure;
}

int cmd_check_group(const std::string& name, int samples, std::uint64_t seed, const std::string& out) {
  const auto g = emcert::builtin_group(name);
  const auto inv = emcert::check_invariant_inner_products(g, samples, seed);
  json j = envelope("group", json{{"group", name}, {"samples", samples}, {"seed", seed}});
  j["dim"] = g.dim();
  j["matrix_dim"] = g.matrix_dim();
  j["jacobi_residual"] = g.jacobi_residual();
  j["invariance"] = json{{"max_violation_algebra", inv.max_violation_algebra},
                         {"max_violation_dual", inv.max_violation_dual},
                         {"max_pairing_excess", inv.max_pairing_excess},
                         {"passed", inv.passed}};
  emit(j.dump(2) + "\n", out);
  return inv.passed ? kExitOk : kExitStructure;
}

int cmd_find_re(const SystemArgs& s, const PointArgs& p, const std::string& seed_arg, double tol_re,
                const std::string& out) {
  const auto sys = emcert::instantiate_system(s.name, s.raw());
  PointArgs pa = p;
  if (!seed_arg.empty()) {
    std::vector<double> values;
    std::stringstream ss(seed_arg);
    std::string item;
    bool numeric = true;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(item, &used));
        numeric = numeric && used == item.size();
      } catch (const std::logic_error&) {
        numeric = false;
      }
    }
    if (numeric && !values.empty()) {
      pa.at = values;
    } else {
      pa.equilibrium = seed_arg;
    }
  }
  const Seed seed = resolve_seed(sys, s, pa);
  emcert::ReleqOptions opt;
  opt.tol_re = tol_re;
  const auto re = emcert::find_relative_equilibrium(sys, seed.z, seed.xi, opt);
  json j = envelope("relative_equilibrium",
                    json{{"system", system_config(s)}, {"seed", emcert::io::vec(seed.z)},
                         {"xi_seed", emcert::io::vec(seed.xi.coeffs)}, {"tol_re", tol_re}});
  j["relative_equilibrium"] = emcert::io::to_json(re);
  emit(j.dump(2) + "\n", out);
  return kExitOk;
}

struct CertifyOutcome {
  emcert::RelativeEquilibrium re;
  emcert::EmcCertificate cert;
};

CertifyOutcome run_certify(const emcert::PhaseSpaceSystem& sys, const SystemArgs& s, const PointArgs& p,
                           const CertifyArgs& c) {
  const Seed seed = resolve_seed(sys, s, p);
  emcert::ReleqOptions opt;
  opt.tol_re = c.tol_re;
  opt.tol_null = c.tol.null;
  CertifyOutcome o;
  o.re = emcert::find_relative_equilibrium(sys, seed.z, seed.xi, opt);
  emcert::EmcProblem problem;
  problem.sys = sys;
  problem.re = o.re;
  problem.tol = c.tol;
  problem.sigma_max = c.sigma_max;
  problem.xi_search_budget = c.xi_budget;
  problem.search_radius = c.search_radius;
  problem.tube_radius = c.tube_radius;
  o.cert = emcert::certify(problem);
  return o;
}

int cmd_certify(const SystemArgs& s, const PointArgs& p, const CertifyArgs& c, const std::string& out) {
  const auto sys = emcert::instantiate_system(s.name, s.raw());
  if (!structure_ok(sys)) return kExitStructure;
  const CertifyOutcome o = run_certify(sys, s, p, c);
  json j = envelope("certificate", json{{"system", system_config(s)},
                                        {"at", p.at},
                                        {"xi", p.xi},
                                        {"equilibrium", p.equilibrium},
                                        {"certify", certify_config(c)}});
  j["relative_equilibrium"] = emcert::io::to_json(o.re);
  j["certificate"] = emcert::io::to_json(o.cert);
  if (o.cert.sigma) j["audit"] = emcert::io::to_json(emcert::audit_certificate(sys, o.cert));
  emit(j.dump(2) + "\n", out);
  return verdict_exit(o.cert.verdict);
}

struct VerifyArgs {
  std::string certificate;
  std::vector<double> deltas{1e-4, 1e-3, 1e-2};
  int samples = 20;
  double T = 100.0;
  double h = 1e-3;
  std::string method = "rk4";
  double escape_radius = 0.5;
  std::uint64_t seed = 1;
  int stride = 10;
  int threads = 0;
  std::string csv;
};

int cmd_verify(const SystemArgs& s, const PointArgs& p, const CertifyArgs& c, const VerifyArgs& v,
               const std::string& out) {
  const auto sys = emcert::instantiate_system(s.name, s.raw());
  if (!structure_ok(sys)) return kExitStructure;
  emcert::RelativeEquilibrium re;
  emcert::EmcCertificate cert;
  json cert_source;
  if (!v.certificate.empty()) {
    const json doc = read_json(v.certificate);
    cert = emcert::io::certificate_from(doc.contains("certificate") ? doc.at("certificate") : doc);
    emcert::ReleqOptions opt;
    opt.tol_re = std::max(c.tol_re, 1e-8);
    re = emcert::make_relative_equilibrium(sys, cert.z_e, cert.xi_used, opt);
    if (!p.at.empty()) {
      const emcert::Point at = Eigen::Map<const emcert::VectorXd>(p.at.data(), static_cast<Eigen::Index>(p.at.size()));
      if (at.size() != cert.z_e.size() || (at - cert.z_e).norm() > 1e-6 * std::max(1.0, at.norm())) {
        throw emcert::Error(emcert::ErrorCode::Usage, "--at does not match the certificate's z_e");
      }
    }
    cert_source = v.certificate;
  } else {
    const CertifyOutcome o = run_certify(sys, s, p, c);
    re = o.re;
    cert = o.cert;
  }
  emcert::ExperimentProtocol proto;
  proto.deltas = v.deltas;
  proto.samples_per_delta = v.samples;
  proto.T = v.T;
  proto.h = v.h;
  proto.method = emcert::parse_method(v.method);
  proto.escape_radius = v.escape_radius;
  proto.seed = v.seed;
  proto.record_stride = v.stride;
  proto.threads = v.threads;
  proto.keep_series = !v.csv.empty();
  const auto rep = emcert::stability_experiment(sys, re, cert, proto);

  json j = envelope("experiment", json{{"system", system_config(s)},
                                       {"at", p.at},
                                       {"equilibrium", p.equilibrium},
                                       {"certificate_file", cert_source},
                                       {"certify", certify_config(c)},
                                       {"protocol", emcert::io::to_json(proto)}});
  j["certificate"] = emcert::io::to_json(cert);
  j["experiment"] = emcert::io::to_json(rep);
  const std::string text = j.dump(2) + "\n";
  if (!v.csv.empty()) {
    std::ostringstream os;
    emcert::io::write_series_csv(os, rep);
    emit(os.str(), v.csv);
  }
  emit(text, out);
  return rep.verdict == emcert::EmpiricalVerdict::consistent_with_stable ? kExitOk : kExitInconclusive;
}

int cmd_simulate(const SystemArgs& s, const PointArgs& p, double T, double h, const std::string& method, int stride,
                 const std::string& out) {
  const auto sys = emcert::instantiate_system(s.name, s.raw());
  const Seed seed = resolve_seed(sys, s, p);
  const auto tr = emcert::integrate(sys, seed.z, T, h, emcert::parse_method(method), stride);
  std::ostringstream os;
  emcert::write_csv(os, tr);
  emit(os.str(), out);
  const auto d = emcert::conservation_drift(sys, tr);
  std::cerr << "drift: H " << d.hamiltonian << "  J " << d.momentum << "  C " << d.casimirs << '\n';
  return kExitOk;
}

std::string fmt_num(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::string fmt_vec(const json& a) {
  std::ostringstream os;
  os.precision(10);
  os << '(';
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) os << ", ";
    if (a[i].is_null()) os << "null"; else os << a[i].get<double>();
  }
  os << ')';
  return os.str();
}

int cmd_report(const std::string& cert_path, const std::string& exp_path, const std::string& out) {
  if (cert_path.empty() && exp_path.empty()) {
    throw emcert::Error(emcert::ErrorCode::Usage, "report needs --certificate and/or --experiment");
  }
  std::ostringstream os;
  os.precision(10);
  int code = kExitOk;
  auto describe_cert = [&](const json& doc) {
    const json& c = doc.contains("certificate") ? doc.at("certificate") : doc;
    const auto cert = emcert::io::certificate_from(c);
    if (doc.contains("config")) os << "config: " << doc.at("config").dump() << '\n';
    os << "Certificate\n";
    os << "  verdict:              " << emcert::to_string(cert.verdict) << '\n';
    os << "  z_e:                  " << fmt_vec(c.at("z_e")) << '\n';
    os << "  xi:                   " << fmt_vec(c.at("xi_used")) << '\n';
    os << "  lambda:               " << fmt_vec(c.at("lambda")) << "  (null-space dim " << cert.lambda_nullspace_dim << ")\n";
    os << "  K dim / orbit in K:   " << cert.K_dim << " / " << cert.orbit_dim_in_K << '\n';
    os << "  restricted spectrum:  " << fmt_vec(c.at("spectrum")) << '\n';
    os << "  zero cluster dim:     " << cert.zero_cluster_dim << "  (principal angle " << cert.kernel_principal_angle << ")\n";
    os << "  sign branch:          " << (cert.sign_branch ? emcert::to_string(*cert.sign_branch) : "none") << '\n';
    os << "  sigma:                " << (cert.sigma ? fmt_num(*cert.sigma) : std::string("none")) << '\n';
    if (cert.verdict != emcert::Verdict::CertifiedStable) code = kExitInconclusive;
  };
  if (!cert_path.empty()) describe_cert(read_json(cert_path));
  if (!exp_path.empty()) {
    const json doc = read_json(exp_path);
    if (cert_path.empty() && doc.contains("certificate")) describe_cert(doc);
    const json& e = doc.at("experiment");
    os << "Experiment\n";
    const json& proto = e.at("protocol");
    os << "  protocol:             T = " << proto.at("T").get<double>() << ", h = " << proto.at("h").get<double>()
       << ", " << proto.at("samples_per_delta").get<int>() << " samples per delta, "
       << proto.at("method").get<std::string>() << '\n';
    for (const auto& d : e.at("per_delta")) {
      os << "  delta " << d.at("delta").get<double>() << ": max orbit distance " << d.at("max_orbit_distance").get<double>()
         << ", max f " << (d.at("max_f").is_null() ? std::string("n/a") : fmt_num(d.at("max_f").get<double>()))
         << ", LS3 violations " << d.at("violations").get<int>() << ", failures " << d.at("failures").get<int>() << '\n';
    }
    const std::string verdict = e.at("verdict").get<std::string>();
    os << "  empirical verdict:    " << verdict << '\n';
    if (verdict != "consistent_with_stable") code = kExitInconclusive;
  }
  emit(os.str(), out);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-momentum-Casimir stability certification for Hamiltonian systems with symmetry", "emc"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; sections are named after subcommands");
  app.get_config_formatter_base()->arrayDelimiter(',');

  std::string out;
  SystemArgs sys_args;
  PointArgs point_args;
  CertifyArgs cert_args;
  VerifyArgs verify_args;

  auto* list = app.add_subcommand("list-systems", "list catalog systems, parameters and known equilibria");
  bool list_json = false;
  list->add_flag("--json", list_json, "machine-readable output");

  auto* structure = app.add_subcommand("check-structure", "check Poisson, symmetry and momentum-map structure");
  add_system_options(structure, sys_args);
  int samples = 20;
  std::uint64_t seed = 11;
  double tol = 1e-8;
  structure->add_option("--samples", samples, "random sample points")->capture_default_str();
  structure->add_option("--seed", seed, "random seed")->capture_default_str();
  structure->add_option("--tol", tol, "violation tolerance")->capture_default_str();
  structure->add_option("--out", out, "output file (default stdout)");

  auto* group = app.add_subcommand("check-group", "check a built-in Lie group: Jacobi identity, invariant inner product");
  std::string group_name;
  group->add_option("group", group_name, "trivial, so3, torus1, torus2")->required();
  group->add_option("--samples", samples, "random group elements")->capture_default_str();
  group->add_option("--seed", seed, "random seed")->capture_default_str();
  group->add_option("--out", out, "output file (default stdout)");

  auto* find = app.add_subcommand("find-re", "solve for a relative equilibrium near a seed");
  add_system_options(find, sys_args);
  add_point_options(find, point_args);
  std::string find_seed;
  find->add_option("--seed", find_seed, "seed point (comma separated) or known equilibrium name");
  find->add_option("--tol-re", cert_args.tol_re, "residual tolerance")->capture_default_str();
  find->add_option("--out", out, "output file (default stdout)");

  auto* certify = app.add_subcommand("certify", "run the energy-momentum-Casimir test and write a certificate");
  add_system_options(certify, sys_args);
  add_point_options(certify, point_args);
  add_certify_options(certify, cert_args);
  certify->add_option("--out", out, "certificate file (default stdout)");

  auto* verify = app.add_subcommand("verify", "integrate perturbed trajectories and monitor the Liapunov bound");
  add_system_options(verify, sys_args);
  add_point_options(verify, point_args);
  add_certify_options(verify, cert_args);
  verify->add_option("--certificate", verify_args.certificate, "certificate JSON from certify (else certify first)");
  verify->add_option("--deltas", verify_args.deltas, "perturbation sizes")->delimiter(',')->capture_default_str();
  verify->add_option("--samples", verify_args.samples, "trajectories per perturbation size")->capture_default_str();
  verify->add_option("--T", verify_args.T, "time horizon")->capture_default_str();
  verify->add_option("--step", verify_args.h, "step size h")->capture_default_str();
  verify->add_option("--method", verify_args.method, "rk4 or implicit_midpoint")->capture_default_str();
  verify->add_option("--escape-radius", verify_args.escape_radius, "orbit distance counted as escape")
      ->capture_default_str();
  verify->add_option("--seed", verify_args.seed, "random seed")->capture_default_str();
  verify->add_option("--stride", verify_args.stride, "steps between monitored points")->capture_default_str();
  verify->add_option("--threads", verify_args.threads, "worker threads (0 = hardware)")->capture_default_str();
  verify->add_option("--csv", verify_args.csv, "per-sample time series CSV");
  verify->add_option("--out", out, "experiment report file (default stdout)");

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory and write it as CSV");
  add_system_options(simulate, sys_args);
  add_point_options(simulate, point_args);
  double sim_T = 10.0, sim_h = 1e-3;
  std::string sim_method = "rk4";
  int sim_stride = 1;
  simulate->add_option("--T", sim_T, "time horizon")->capture_default_str();
  simulate->add_option("--step", sim_h, "step size h")->capture_default_str();
  simulate->add_option("--method", sim_method, "rk4 or implicit_midpoint")->capture_default_str();
  simulate->add_option("--stride", sim_stride, "steps between recorded states")->capture_default_str();
  simulate->add_option("--out", out, "CSV file (default stdout)");

  auto* report = app.add_subcommand("report", "summarize a certificate and/or experiment report");
  std::string report_cert, report_exp;
  report->add_option("--certificate", report_cert, "certificate JSON");
  report->add_option("--experiment", report_exp, "experiment JSON");
  report->add_option("--out", out, "summary file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (*list) return cmd_list_systems(list_json);
    if (*structure) return cmd_check_structure(sys_args, samples, seed, tol, out);
    if (*group) return cmd_check_group(group_name, samples, seed, out);
    if (*find) return cmd_find_re(sys_args, point_args, find_seed, cert_args.tol_re, out);
    if (*certify) return cmd_certify(sys_args, point_args, cert_args, out);
    if (*verify) return cmd_verify(sys_args, point_args, cert_args, verify_args, out);
    if (*simulate) return cmd_simulate(sys_args, point_args, sim_T, sim_h, sim_method, sim_stride, out);
    if (*report) return cmd_report(report_cert, report_exp, out);
  } catch (const emcert::Error& e) {
    std::cerr << "emc: error: " << e.what() << '\n';
    const auto code = e.code();
    return code == emcert::ErrorCode::Structure || code == emcert::ErrorCode::InvariantProduct ? kExitStructure
                                                                                              : kExitError;
  } catch (const std::exception& e) {
    std::cerr << "emc: error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
