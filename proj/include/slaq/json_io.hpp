#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slaq/descriptors.hpp"
#include "slaq/error.hpp"
#include "slaq/graph.hpp"

namespace slaq {

// Descriptor file format:
//   {"kind": "netlsd"|"vnge", "method": ..., "params": {...},
//    "grid": {"t_min", "t_max", "count", "t": [...]},   (netlsd only)
//    "values": [...] | "value": x,
//    "std_errors": [...] | "std_error": x,               (slaq only)
//    "seed": s,                                           (slaq only)
//    "graph_hash": "<16 hex digits>"}

inline nlohmann::json params_to_json(const MethodParams& p) {
  nlohmann::json j = nlohmann::json::object();
  if (p.slq) {
    j["n_v"] = p.slq->n_v;
    j["steps"] = p.slq->steps;
    j["distribution"] = std::string(to_string(p.slq->distribution));
    j["reorthogonalize"] = p.slq->reorth();
  }
  if (p.k) j["k"] = *p.k;
  if (p.taylor) j["variant"] = std::string(to_string(*p.taylor));
  return j;
}

inline nlohmann::json to_json(const Descriptor& d, const std::string& graph_hash_hex) {
  nlohmann::json j;
  const MethodParams* params;
  if (const auto* h = std::get_if<HeatTraceDescriptor>(&d)) {
    j["kind"] = "netlsd";
    j["method"] = std::string(to_string(h->method));
    j["grid"] = {{"t_min", h->grid.t_min()},
                 {"t_max", h->grid.t_max()},
                 {"count", h->grid.size()},
                 {"t", std::vector<double>(h->grid.values().begin(), h->grid.values().end())}};
    j["values"] = h->values;
    if (!h->std_errors.empty()) {
      nlohmann::json se = nlohmann::json::array();
      for (double x : h->std_errors) se.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
      j["std_errors"] = std::move(se);
    }
    params = &h->params;
  } else {
    const auto& e = std::get<EntropyValue>(d);
    j["kind"] = "vnge";
    j["method"] = std::string(to_string(e.method));
    j["value"] = e.value;
    if (std::isfinite(e.std_error)) j["std_error"] = e.std_error;
    params = &e.params;
  }
  j["params"] = params_to_json(*params);
  if (params->slq) j["seed"] = params->slq->seed;
  j["graph_hash"] = graph_hash_hex;
  return j;
}

/// Inverse of to_json (the graph hash is not part of the descriptor).
inline Descriptor descriptor_from_json(const nlohmann::json& j) {
  try {
    const auto kind = parse_descriptor_kind(j.at("kind").get<std::string>());
    const auto method = parse_method(j.at("method").get<std::string>());
    if (!kind || !method) throw InvalidArgument("descriptor json: unknown kind or method");
    MethodParams params;
    const auto& p = j.at("params");
    if (p.contains("n_v")) {
      SlqConfig cfg;
      cfg.n_v = p.at("n_v").get<std::size_t>();
      cfg.steps = p.at("steps").get<std::size_t>();
      cfg.distribution = p.at("distribution").get<std::string>() == "gaussian" ? ProbeDistribution::Gaussian
                                                                                : ProbeDistribution::Rademacher;
      cfg.reorthogonalize = p.value("reorthogonalize", cfg.reorth());
      cfg.seed = j.value("seed", std::uint64_t{0});
      params.slq = cfg;
    }
    if (p.contains("k")) params.k = p.at("k").get<std::size_t>();
    if (p.contains("variant")) {
      params.taylor = p.at("variant").get<std::string>() == "as-printed" ? TaylorVariant::AsPrinted
                                                                         : TaylorVariant::Corrected;
    }
    if (*kind == DescriptorKind::NetLsd) {
      HeatTraceDescriptor h{TimeGrid::from_values(j.at("grid").at("t").get<std::vector<double>>()),
                            j.at("values").get<std::vector<double>>(), *method, params, {}};
      if (j.contains("std_errors")) {
        for (const auto& x : j.at("std_errors")) {
          h.std_errors.push_back(x.is_null() ? std::nan("") : x.get<double>());
        }
      }
      return h;
    }
    EntropyValue e{j.at("value").get<double>(), *method, params};
    if (j.contains("std_error")) e.std_error = j.at("std_error").get<double>();
    return e;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("descriptor json: ") + e.what());
  }
}

}  // namespace slaq
