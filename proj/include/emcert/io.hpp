#pragma once

// JSON serialization for certificates, structure reports and experiment
// reports. Requires nlohmann/json on the include path.

#include <nlohmann/json.hpp>

#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "emcert/dynamics.hpp"
#include "emcert/emc.hpp"
#include "emcert/error.hpp"
#include "emcert/phase.hpp"
#include "emcert/releq.hpp"
#include "emcert/verify.hpp"

namespace emcert::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline json vec(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

inline VectorXd vec_from(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::Usage, "expected a numeric array");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::Usage, "expected a numeric array");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// Non-finite values become null.
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

inline Verdict parse_verdict(const std::string& s) {
  for (Verdict v : {Verdict::CertifiedStable, Verdict::Inconclusive_Indefinite, Verdict::Inconclusive_KernelMismatch,
                    Verdict::Failed_EM1, Verdict::Failed_EM3, Verdict::Failed_SigmaCap}) {
    if (s == to_string(v)) return v;
  }
  throw Error(ErrorCode::Usage, "unknown verdict '" + s + "'");
}

inline json to_json(const EmcTolerances& t) {
  return json{{"zero_rel", t.zero_rel}, {"pos_rel", t.pos_rel},     {"angle", t.angle}, {"crit", t.crit},
              {"null", t.null},         {"inclusion", t.inclusion}, {"em3", t.em3}};
}

inline EmcTolerances tolerances_from(const json& j) {
  EmcTolerances t;
  t.zero_rel = j.at("zero_rel").get<double>();
  t.pos_rel = j.at("pos_rel").get<double>();
  t.angle = j.at("angle").get<double>();
  t.crit = j.at("crit").get<double>();
  t.null = j.at("null").get<double>();
  t.inclusion = j.at("inclusion").get<double>();
  t.em3 = j.at("em3").get<double>();
  return t;
}

inline json to_json(const RelativeEquilibrium& re) {
  return json{{"z_e", vec(re.z_e)},
              {"xi", vec(re.xi.coeffs)},
              {"mu", vec(re.mu.coeffs)},
              {"residual_norm", re.residual_norm},
              {"isotropy_nontrivial", re.isotropy_nontrivial},
              {"iterations", re.iterations}};
}

inline json to_json(const EmcCertificate& c) {
  json j;
  j["lambda"] = vec(c.lambda);
  j["lambda_nullspace_dim"] = c.lambda_nullspace_dim;
  j["xi_used"] = vec(c.xi_used.coeffs);
  j["sign_branch"] = c.sign_branch ? json(to_string(*c.sign_branch)) : json(nullptr);
  j["sigma"] = opt(c.sigma);
  j["K_dim"] = c.K_dim;
  j["orbit_dim_in_K"] = c.orbit_dim_in_K;
  j["spectrum"] = vec(c.spectrum);
  j["zero_cluster_dim"] = c.zero_cluster_dim;
  j["kernel_principal_angle"] = c.kernel_principal_angle;
  j["verdict"] = to_string(c.verdict);
  j["diagnostics"] = json{{"em1_residual", c.em1_residual},
                          {"em3_violation", c.em3_violation},
                          {"tol_zero", c.tol_zero},
                          {"tol_pos", c.tol_pos},
                          {"slice_spectrum_min", num(c.slice_spectrum_min)},
                          {"search_margin", num(c.search_margin)},
                          {"search_dim", c.search_dim},
                          {"candidates_evaluated", c.candidates_evaluated},
                          {"momentum_norm_violation", c.momentum_norm_violation}};
  j["z_e"] = vec(c.z_e);
  j["mu"] = vec(c.mu.coeffs);
  j["casimirs_at_z_e"] = vec(c.casimirs_at_z_e);
  j["emc_at_z_e"] = c.emc_at_z_e;
  j["tube_radius"] = c.tube_radius;
  j["tolerances"] = to_json(c.tolerances);
  return j;
}

inline EmcCertificate certificate_from(const json& j) {
  try {
    EmcCertificate c;
    c.lambda = vec_from(j.at("lambda"));
    c.lambda_nullspace_dim = j.at("lambda_nullspace_dim").get<int>();
    c.xi_used = AlgebraElement(vec_from(j.at("xi_used")));
    if (!j.at("sign_branch").is_null()) {
      const auto s = j.at("sign_branch").get<std::string>();
      if (s != "positive" && s != "negative") throw Error(ErrorCode::Usage, "sign_branch must be positive or negative");
      c.sign_branch = s == "positive" ? SignBranch::Positive : SignBranch::Negative;
    }
    if (!j.at("sigma").is_null()) c.sigma = j.at("sigma").get<double>();
    c.K_dim = j.at("K_dim").get<int>();
    c.orbit_dim_in_K = j.at("orbit_dim_in_K").get<int>();
    c.spectrum = vec_from(j.at("spectrum"));
    c.zero_cluster_dim = j.at("zero_cluster_dim").get<int>();
    c.kernel_principal_angle = j.at("kernel_principal_angle").get<double>();
    c.verdict = parse_verdict(j.at("verdict").get<std::string>());
    const json& d = j.at("diagnostics");
    c.em1_residual = d.at("em1_residual").get<double>();
    c.em3_violation = d.at("em3_violation").get<double>();
    c.tol_zero = d.at("tol_zero").get<double>();
    c.tol_pos = d.at("tol_pos").get<double>();
    c.slice_spectrum_min = d.at("slice_spectrum_min").is_null() ? std::nan("") : d.at("slice_spectrum_min").get<double>();
    c.search_margin = d.at("search_margin").is_null() ? std::nan("") : d.at("search_margin").get<double>();
    c.search_dim = d.at("search_dim").get<int>();
    c.candidates_evaluated = d.at("candidates_evaluated").get<int>();
    c.momentum_norm_violation = d.at("momentum_norm_violation").get<double>();
    c.z_e = vec_from(j.at("z_e"));
    c.mu = DualElement(vec_from(j.at("mu")));
    c.casimirs_at_z_e = vec_from(j.at("casimirs_at_z_e"));
    c.emc_at_z_e = j.at("emc_at_z_e").get<double>();
    c.tube_radius = j.at("tube_radius").get<double>();
    c.tolerances = tolerances_from(j.at("tolerances"));
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Usage, std::string("malformed certificate: ") + e.what());
  }
}

inline json to_json(const CertificateAudit& a) {
  return json{{"em1_gradient", a.em1_gradient},
              {"k_annihilation", a.k_annihilation},
              {"orbit_in_k_residual", a.orbit_in_k_residual},
              {"f_invariance", a.f_invariance},
              {"f1_slice_agreement", a.f1_slice_agreement},
              {"f2_kernel_angle", a.f2_kernel_angle},
              {"f2_slice_min", a.f2_slice_min},
              {"slice_min_with_sigma", a.slice_min_with_sigma},
              {"f_evaluated", a.f_evaluated}};
}

inline json to_json(const StructureReport& r) {
  json checks = json::object();
  for (const auto& [name, c] : r.entries()) {
    checks[name] = json{{"max_violation", num(c->max_violation)}, {"passed", c->passed}};
  }
  return json{{"samples", r.samples}, {"passed", r.passed()}, {"checks", checks}};
}

inline json to_json(const ConservationDrift& d) {
  return json{{"hamiltonian", d.hamiltonian}, {"momentum", d.momentum}, {"casimirs", d.casimirs}};
}

inline json to_json(const ExperimentProtocol& p) {
  return json{{"deltas", p.deltas},
              {"samples_per_delta", p.samples_per_delta},
              {"T", p.T},
              {"h", p.h},
              {"method", to_string(p.method)},
              {"escape_radius", p.escape_radius},
              {"escape_delta_max", p.escape_delta_max},
              {"seed", p.seed},
              {"record_stride", p.record_stride}};
}

inline json to_json(const StabilityExperimentReport& r) {
  json per = json::array();
  for (const auto& d : r.per_delta) {
    per.push_back(json{{"delta", d.delta},
                       {"max_orbit_distance", d.max_orbit_distance},
                       {"max_f", opt(d.max_f)},
                       {"violations", d.violations},
                       {"failures", d.failures},
                       {"max_drift", d.max_drift}});
  }
  json samples = json::array();
  for (const auto& s : r.samples) {
    samples.push_back(json{{"delta", s.delta},
                           {"index", s.index},
                           {"z0", vec(s.z0)},
                           {"max_orbit_distance", s.max_orbit_distance},
                           {"max_f", opt(s.max_f)},
                           {"ls3_bound", opt(s.ls3_bound)},
                           {"slack", s.slack},
                           {"violations", s.violations},
                           {"started_in_tube", s.started_in_tube},
                           {"degraded_distance", s.degraded_distance},
                           {"drift", to_json(s.drift)},
                           {"failure", opt(s.failure)}});
  }
  return json{{"protocol", to_json(r.protocol)},
              {"per_delta", per},
              {"samples", samples},
              {"violations", r.violations},
              {"ls3_monitored", r.ls3_monitored},
              {"verdict", to_string(r.verdict)}};
}

/// Header "delta,sample,t,orbit_distance,f"; f is empty where not evaluated.
inline void write_series_csv(std::ostream& os, const StabilityExperimentReport& r) {
  os << "delta,sample,t,orbit_distance,f\n";
  std::ostringstream row;
  row.precision(17);
  for (const auto& s : r.samples) {
    for (std::size_t k = 0; k < s.series.t.size(); ++k) {
      row.str("");
      row << s.delta << ',' << s.index << ',' << s.series.t[k] << ',' << s.series.orbit_distance[k] << ',';
      if (std::isfinite(s.series.f[k])) row << s.series.f[k];
      os << row.str() << '\n';
    }
  }
}

}  // namespace emcert::io
