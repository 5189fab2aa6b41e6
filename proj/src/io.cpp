#include "dexlab/io.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace dexlab {

namespace {

using nlohmann::json;

Eigen::VectorXd vector_field(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw ValidationError(path + ": must be a nonempty array of numbers");
  }
  Eigen::VectorXd v(j.size());
  for (std::size_t n = 0; n < j.size(); ++n) {
    if (!j[n].is_number()) {
      throw ValidationError(path + "[" + std::to_string(n) + "]: must be a number");
    }
    v[n] = j[n].get<double>();
  }
  return v;
}

json to_array(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index n = 0; n < v.size(); ++n) a.push_back(v[n]);
  return a;
}

json to_matrix(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows.push_back(to_array(m.row(i).transpose()));
  }
  return rows;
}

}  // namespace

Economy economy_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("economy: root must be an object");
  if (!j.contains("beta") || !j["beta"].is_number()) {
    throw ValidationError("beta: required number");
  }
  if (!j.contains("horizon") || !j["horizon"].is_number_integer()) {
    throw ValidationError("horizon: required integer");
  }
  if (!j.contains("agents") || !j["agents"].is_array() || j["agents"].empty()) {
    throw ValidationError("agents: required nonempty array");
  }
  DiscountStructure d = DiscountStructure::make(j["beta"].get<double>(),
                                                j["horizon"].get<int>());

  std::vector<AgentSpec> agents;
  agents.reserve(j["agents"].size());
  for (std::size_t i = 0; i < j["agents"].size(); ++i) {
    const std::string at = "agents[" + std::to_string(i) + "]";
    const json& a = j["agents"][i];
    if (!a.is_object()) throw ValidationError(at + ": must be an object");
    if (!a.contains("family") || !a["family"].is_string()) {
      throw ValidationError(at + ".family: required string \"log\" or \"isoelastic\"");
    }
    const std::string family = a["family"].get<std::string>();
    UtilityFamily fam;
    double sigma = 1.0;
    if (family == "log") {
      fam = UtilityFamily::Log;
      if (a.contains("sigma") && std::abs(a["sigma"].get<double>() - 1.0) > 1e-12) {
        throw ValidationError(at + ".sigma: log family fixes sigma = 1");
      }
    } else if (family == "isoelastic") {
      fam = UtilityFamily::Isoelastic;
      if (!a.contains("sigma") || !a["sigma"].is_number()) {
        throw ValidationError(at + ".sigma: required number for isoelastic family");
      }
      sigma = a["sigma"].get<double>();
    } else {
      throw ValidationError(at + ".family: must be \"log\" or \"isoelastic\", got \"" +
                            family + "\"");
    }
    if (!a.contains("taste")) throw ValidationError(at + ".taste: required array");
    if (!a.contains("endowment")) throw ValidationError(at + ".endowment: required array");
    UtilityKernel kernel;
    try {
      kernel = UtilityKernel::make(fam, sigma, vector_field(a["taste"], at + ".taste"));
    } catch (const ValidationError& err) {
      throw ValidationError(at + "." + err.what());
    }
    agents.push_back({std::move(kernel), vector_field(a["endowment"], at + ".endowment")});
  }
  return Economy::make(std::move(d), std::move(agents));
}

nlohmann::json economy_to_json(const Economy& e) {
  json j;
  j["beta"] = e.discount.beta;
  j["horizon"] = e.discount.horizon;
  json agents = json::array();
  for (const AgentSpec& a : e.agents) {
    json ja;
    ja["family"] = a.kernel.is_log() ? "log" : "isoelastic";
    ja["sigma"] = a.kernel.sigma;
    ja["taste"] = to_array(a.kernel.taste);
    ja["endowment"] = to_array(a.endowment);
    agents.push_back(std::move(ja));
  }
  j["agents"] = std::move(agents);
  return j;
}

Economy load_economy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open economy file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& err) {
    throw ValidationError("economy file " + path + ": " + err.what());
  }
  return economy_from_json(j);
}

void save_economy(const Economy& e, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write economy file: " + path);
  out << economy_to_json(e).dump(2) << "\n";
}

nlohmann::json equilibrium_to_json(const EquilibriumResult& eq) {
  json j;
  j["prices"] = to_array(eq.prices);
  j["price_ratios"] = to_array(eq.price_ratios);
  j["allocation"] = to_matrix(eq.allocation);
  j["shadow_values"] = to_array(eq.shadow_values);
  j["residual_sup"] = eq.residual_sup;
  j["walras_sup"] = eq.walras_sup;
  j["iterations"] = eq.iterations;
  j["starts_used"] = eq.starts_used;
  return j;
}

nlohmann::json stability_to_json(const StabilityReport& rep) {
  json j;
  j["max_sym_eig"] = rep.max_sym_eig;
  j["negative_definite"] = rep.negative_definite;
  j["index"] = rep.index;
  j["det_log10"] = rep.det_log10;
  j["diag_margin"] = rep.diag_margin;
  j["condition_estimate"] = rep.condition_estimate;
  j["sym_spectrum"] = to_array(rep.sym_spectrum);
  return j;
}

nlohmann::json diversification_to_json(const DiversificationReport& rep) {
  json j;
  j["a5"] = rep.a5;
  j["a5_prime"] = rep.a5_prime;
  j["spectral_available"] = rep.spectral_available;
  if (rep.spectral_available) {
    j["spectral_eigs"] = to_array(rep.spectral_eigs);
    j["spectral_sum_sq"] = rep.spectral_sum_sq;
    j["cs_gap"] = rep.cs_gap;
  }
  j["rho"] = to_matrix(rep.rho);
  j["net_trades"] = to_matrix(rep.net_trades);
  return j;
}

}  // namespace dexlab
