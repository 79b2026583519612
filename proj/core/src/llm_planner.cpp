#include "netlock/llm_planner.hpp"

#include <cmath>
#include <regex>

#include "httplib.h"

namespace netlock {

namespace {

struct Endpoint {
  std::string host_port;
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^http://([A-Za-z0-9.\-_]+(:[0-9]{1,5})?)(/[^\s]*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw Error("invalid endpoint config: '" + url + "' (expected http://host[:port]/path)");
  }
  return {"http://" + m[1].str(), m[3].matched ? m[3].str() : "/"};
}

nlohmann::json schema_violation(const std::string& message) {
  return nlohmann::json::array({{{"kind", "schema"}, {"instance", nullptr}, {"subject", ""}, {"message", message}}});
}

}  // namespace

std::string lockplan_constraints_doc() {
  return "Respond with exactly one JSON object: {\"version\":\"lockplan_v1\",\"source_circuit\":string,"
         "\"key_width\":int,\"seed\":int,\"instances\":[{\"style\":string,\"targets\":[signal],"
         "\"key_bits\":[int],\"correct_bits\":[0|1],\"helpers\":[{\"signal\":signal,\"polarity\":0|1}]}]}. "
         "Rules: key_bits of all instances partition 0..key_width-1; correct_bits has one entry per key bit. "
         "xor_xnor: 1 target, 1 key bit, no helpers. mux_lock: 1 target, 1 key bit, exactly 1 helper (the decoy). "
         "perturb_restore: 1 target, at least 2 key bits, 1 to 8 helpers. pairwise_subgraph: 2 targets, 1 key bit, "
         "no helpers. Targets must be gate outputs and may appear once. Helpers and decoys must not lie in the "
         "transitive fanout of their target; pairwise targets must not lie in each other's fanout. Signals starting "
         "with 'lk_' or 'keyinput' are reserved. No combinational cycles may result.";
}

nlohmann::json llm_request_body(const Netlist& n, const FeatureMap& features, const RankedSites& ranked,
                                std::uint32_t key_width, const StylePolicy& policy, std::size_t shortlist_size) {
  const auto& st = ranked.circuit_stats;
  nlohmann::json shortlist = nlohmann::json::array();
  for (std::size_t i = 0; i < ranked.entries.size() && i < shortlist_size; ++i) {
    const auto& e = ranked.entries[i];
    auto f = features.find(e.node);
    nlohmann::json fj = f == features.end() ? nlohmann::json::object() : to_json(f->second);
    fj.erase("node");
    shortlist.push_back({{"node", e.node}, {"score", e.score}, {"features", std::move(fj)}});
  }
  nlohmann::json styles = nlohmann::json::array();
  for (auto s : policy.styles) styles.push_back(to_string(s));
  return {{"task", kLockPlanVersion},
          {"circuit",
           {{"name", n.name()},
            {"n_inputs", st.inputs},
            {"n_outputs", st.outputs},
            {"n_gates", st.gates},
            {"depth", st.max_depth}}},
          {"shortlist", std::move(shortlist)},
          {"key_width", key_width},
          {"allowed_styles", std::move(styles)},
          {"constraints_doc", lockplan_constraints_doc()}};
}

LlmPlanResult llm_plan(const Netlist& n, const FeatureMap& features, const RankedSites& ranked,
                       std::uint32_t key_width, const StylePolicy& policy, std::uint64_t seed, const LlmConfig& cfg,
                       const PlannerOptions& opt) {
  const auto ep = parse_endpoint(cfg.endpoint);
  if (cfg.max_retries == 0) throw Error("invalid endpoint config: max_retries must be at least 1");
  if (!(cfg.timeout_s > 0)) throw Error("invalid endpoint config: timeout must be positive");

  httplib::Client client(ep.host_port);
  const auto secs = static_cast<time_t>(cfg.timeout_s);
  const auto usecs = static_cast<time_t>((cfg.timeout_s - std::floor(cfg.timeout_s)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!cfg.auth_header.empty()) headers.emplace(cfg.auth_header, cfg.auth_value);

  LlmPlanResult result;
  auto body = llm_request_body(n, features, ranked, key_width, policy, cfg.shortlist_size);
  while (result.attempts < cfg.max_retries) {
    ++result.attempts;
    body["attempt"] = result.attempts;
    auto res = client.Post(ep.path, headers, body.dump(), "application/json");
    if (!res) {
      result.errors.push_back("transport: " + httplib::to_string(res.error()));
      continue;
    }
    if (res->status != 200) {
      result.errors.push_back("http status " + std::to_string(res->status));
      continue;
    }
    nlohmann::json violations;
    try {
      auto plan = parse_plan(res->body);
      std::vector<PlanViolation> vs;
      if (plan.key_width != key_width) {
        vs.push_back({PlanViolationKind::Structure, SIZE_MAX, "key_width",
                      "key_width " + std::to_string(plan.key_width) + " does not match the requested " +
                          std::to_string(key_width)});
      }
      for (std::size_t i = 0; i < plan.instances.size(); ++i) {
        const auto s = plan.instances[i].style;
        if (std::find(policy.styles.begin(), policy.styles.end(), s) == policy.styles.end())
          vs.push_back({PlanViolationKind::Structure, i, std::string(to_string(s)), "style not allowed"});
      }
      if (vs.empty()) vs = validate_plan(plan, n, opt.bounds);
      if (vs.empty()) {
        result.plan = std::move(plan);
        result.provenance = "llm";
        return result;
      }
      violations = to_json(vs);
    } catch (const std::exception& e) {
      violations = schema_violation(e.what());
    }
    result.errors.push_back(violations.dump());
    body["previous_response"] = res->body;
    body["violations"] = std::move(violations);
  }
  result.plan = heuristic_plan(n, ranked, key_width, policy, seed, opt);
  result.provenance = "fallback";
  return result;
}

}  // namespace netlock
