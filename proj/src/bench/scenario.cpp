#include "fog/bench/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "fog/bench/calibration.hpp"
#include "fog/topology/topology_json.hpp"

namespace fog::bench {

using nlohmann::json;

namespace {

template <typename T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ScenarioError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError(where + "." + key + ": " + e.what());
  }
}

json resolve_calibrated_links(json topo) {
  if (!topo.contains("links")) return topo;
  for (auto& link : topo["links"]) {
    if (!link.contains("one_way_latency")) continue;
    auto& lat = link["one_way_latency"];
    if (lat.value("dist", "") != "calibrated") continue;
    const std::string where = "link " + link.value("from", "?") + "-" + link.value("to", "?");
    const auto cal = calibrate_overhead(get<double>(lat, "inf_mean_ms", where), get<double>(lat, "inf_std_ms", where),
                                        get<double>(lat, "rtt_mean_ms", where), get<double>(lat, "rtt_std_ms", where));
    const auto d = calibrated_link_latency(cal);
    lat = json{{"dist", "tnorm"}, {"mean_ms", d.mean}, {"std_ms", d.std}, {"min_ms", d.min}};
  }
  return topo;
}

topology::DomainId domain_ref(const json& j, const topology::Topology& t, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<topology::DomainId>();
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    for (const auto& d : t.domains)
      if (d.name == name) return d.id;
    throw ScenarioError(where + ": unknown trust domain '" + name + "'");
  }
  throw ScenarioError(where + ": home_domain must be a domain id or name");
}

std::optional<std::uint32_t> opt_version(const json& j) {
  if (!j.contains("version")) return std::nullopt;
  return j.at("version").get<std::uint32_t>();
}

LifecycleStep::Op parse_op(const std::string& op, const std::string& where) {
  if (op == "train") return LifecycleStep::Op::train;
  if (op == "adapt") return LifecycleStep::Op::adapt;
  if (op == "deploy") return LifecycleStep::Op::deploy;
  throw ScenarioError(where + ": unknown op '" + op + "'");
}

std::string_view op_name(LifecycleStep::Op op) {
  switch (op) {
    case LifecycleStep::Op::train: return "train";
    case LifecycleStep::Op::adapt: return "adapt";
    case LifecycleStep::Op::deploy: return "deploy";
  }
  return "?";
}

std::string error_name(const lifecycle::LifecycleError& e) {
  if (dynamic_cast<const lifecycle::MixedDomain*>(&e)) return "MixedDomain";
  if (dynamic_cast<const lifecycle::PrivacyViolation*>(&e)) return "PrivacyViolation";
  if (dynamic_cast<const lifecycle::NodeIsRobot*>(&e)) return "NodeIsRobot";
  if (dynamic_cast<const lifecycle::StageError*>(&e)) return "StageError";
  if (dynamic_cast<const lifecycle::CapacityExceeded*>(&e)) return "CapacityExceeded";
  if (dynamic_cast<const lifecycle::DuplicateModel*>(&e)) return "DuplicateModel";
  if (dynamic_cast<const lifecycle::UnknownModel*>(&e)) return "UnknownModel";
  return "LifecycleError";
}

bool error_matches(const std::string& expected, const std::string& actual) {
  return expected == actual || (expected == "PrivacyViolation" && actual == "MixedDomain");
}

const lifecycle::ManifestEntry* find_model(const Scenario& s, const std::string& id) {
  for (const auto& m : s.models)
    if (m.artifact.model_id == id) return &m;
  return nullptr;
}

}  // namespace

Scenario scenario_from_json(const json& j, const std::string& base_dir) {
  Scenario s;
  try {
    s.name = j.value("name", std::string("scenario"));
    s.seed = get<std::uint64_t>(j, "seed", "scenario");
    s.topology = topology::topology_from_json(resolve_calibrated_links(get<json>(j, "topology", "scenario")));

    const json models = get<json>(j, "models", "scenario");
    if (models.is_string()) {
      std::filesystem::path p = models.get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      s.models = lifecycle::load_manifest(p.string());
    } else {
      s.models = lifecycle::manifest_from_json(models);
      for (auto& m : s.models)
        if (m.weights_path && std::filesystem::path(*m.weights_path).is_relative())
          m.weights_path = (std::filesystem::path(base_dir) / *m.weights_path).string();
    }

    for (const auto& c : j.value("capsules", json::array())) {
      CapsuleDecl d;
      d.id = get<std::string>(c, "id", "capsule");
      const auto privacy = c.value("privacy", std::string("public"));
      if (privacy == "public") d.privacy = capsule::Privacy::public_data;
      else if (privacy == "private") d.privacy = capsule::Privacy::private_data;
      else throw ScenarioError("capsule " + d.id + ": privacy must be public or private");
      d.home_domain = domain_ref(get<json>(c, "home_domain", "capsule " + d.id), s.topology, "capsule " + d.id);
      s.capsules.push_back(std::move(d));
    }

    std::size_t i = 0;
    for (const auto& st : j.value("lifecycle", json::array())) {
      const std::string where = "lifecycle[" + std::to_string(i++) + "]";
      LifecycleStep step;
      step.op = parse_op(get<std::string>(st, "op", where), where);
      step.model_id = get<std::string>(st, "model", where);
      step.version = opt_version(st);
      step.node = get<std::string>(st, "node", where);
      step.capsules = st.value("capsules", std::vector<std::string>{});
      if (st.contains("expect_error")) step.expect_error = st.at("expect_error").get<std::string>();
      s.lifecycle.push_back(std::move(step));
    }

    for (const auto& d : j.value("deployments", json::array()))
      s.deployments.push_back(
          DeploymentDecl{get<std::string>(d, "model", "deployment"), opt_version(d), get<std::string>(d, "node", "deployment")});

    if (j.contains("placement")) {
      const auto& p = j.at("placement");
      PlacementSpec spec;
      spec.mode = placement::parse_mode(p.value("mode", std::string("exact")));
      spec.alpha = p.value("alpha", 1.0);
      spec.beta = p.value("beta", 0.0);
      spec.candidate_hosts = p.value("candidate_hosts", std::vector<std::string>{});
      for (const auto& d : p.value("demand", json::array()))
        spec.demand.push_back(placement::Demand{get<std::string>(d, "robot", "demand"),
                                                get<std::string>(d, "model", "demand"),
                                                get<double>(d, "requests_per_second", "demand")});
      s.placement = std::move(spec);
    }

    const json req = get<json>(j, "requests", "scenario");
    s.requests.count = req.value("count", std::size_t{200});
    const auto arrival = req.value("arrival", std::string("sequential"));
    if (arrival == "sequential") s.requests.arrival = Arrival::sequential;
    else if (arrival == "poisson") s.requests.arrival = Arrival::poisson;
    else throw ScenarioError("requests.arrival must be sequential or poisson");
    s.requests.rate_per_s = req.value("rate_per_s", 1.0);
    for (const auto& t : get<json>(req, "targets", "requests")) {
      RequestTarget target{get<std::string>(t, "robot", "target"), get<std::string>(t, "model", "target"), {}};
      if (t.contains("host")) target.host = t.at("host").get<std::string>();
      s.requests.targets.push_back(std::move(target));
    }

    for (const auto& p : j.value("reference", json::array()))
      s.reference.push_back(ReferenceRow{get<std::string>(p, "host", "reference"),
                                           get<std::string>(p, "model", "reference"), p.value("label", ""),
                                           get<double>(p, "rtt_mean", "reference"), p.value("rtt_std", 0.0),
                                           get<double>(p, "inf_mean", "reference"), p.value("inf_std", 0.0)});
  } catch (const ScenarioError&) {
    throw;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  } catch (const Error& e) {
    throw ScenarioError(e.what());
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ScenarioError("scenario '" + path + "': " + e.what());
  }
  return scenario_from_json(j, std::filesystem::path(path).parent_path().string());
}

void validate_scenario(const Scenario& s) {
  const auto violations = topology::validate_topology(s.topology);
  if (!violations.empty()) {
    std::string msg = "topology invalid:";
    for (const auto& v : violations) msg += " " + v.message + ";";
    throw ScenarioError(msg);
  }
  std::set<std::string> models, capsules;
  for (const auto& m : s.models)
    if (!models.insert(m.artifact.model_id).second)
      throw ScenarioError("model '" + m.artifact.model_id + "' declared twice");
  for (const auto& c : s.capsules) {
    if (!capsules.insert(c.id).second) throw ScenarioError("capsule '" + c.id + "' declared twice");
    bool known = false;
    for (const auto& d : s.topology.domains) known = known || d.id == c.home_domain;
    if (!known) throw ScenarioError("capsule '" + c.id + "' names an unknown trust domain");
  }
  auto need_model = [&](const std::string& id, const std::string& where) {
    if (!models.contains(id)) throw ScenarioError(where + ": unknown model '" + id + "'");
  };
  auto need_node = [&](const std::string& id, const std::string& where) {
    if (!s.topology.find_node(id)) throw ScenarioError(where + ": unknown node '" + id + "'");
  };
  for (std::size_t i = 0; i < s.lifecycle.size(); ++i) {
    const auto& st = s.lifecycle[i];
    const std::string where = "lifecycle[" + std::to_string(i) + "]";
    need_model(st.model_id, where);
    need_node(st.node, where);
    for (const auto& c : st.capsules)
      if (!capsules.contains(c)) throw ScenarioError(where + ": unknown capsule '" + c + "'");
  }
  for (const auto& d : s.deployments) {
    need_model(d.model_id, "deployment");
    need_node(d.node, "deployment");
  }
  if (s.placement) {
    for (const auto& d : s.placement->demand) need_model(d.model_id, "placement demand");
    for (const auto& h : s.placement->candidate_hosts) need_node(h, "placement candidate_hosts");
  }
  if (s.requests.count == 0) throw ScenarioError("requests.count must be at least 1");
  if (s.requests.arrival == Arrival::poisson && !(s.requests.rate_per_s > 0.0))
    throw ScenarioError("requests.rate_per_s must be positive for poisson arrivals");
  for (const auto& t : s.requests.targets) {
    const auto* r = s.topology.find_node(t.robot);
    if (!r || r->kind != topology::NodeKind::robot) throw ScenarioError("target: '" + t.robot + "' is not a robot");
    need_model(t.model_id, "target");
    if (t.host) need_node(*t.host, "target");
  }
}

lifecycle::Registry build_registry(const Scenario& s, std::vector<StepOutcome>* steps) {
  lifecycle::Registry reg(s.topology);
  std::set<std::string> trained;
  for (const auto& st : s.lifecycle)
    if (st.op == LifecycleStep::Op::train) trained.insert(st.model_id);
  for (const auto& m : s.models)
    if (!trained.contains(m.artifact.model_id)) reg.import_artifact(m.artifact);

  std::map<std::string, capsule::CapsuleLabel> labels;
  for (const auto& c : s.capsules)
    labels[c.id] = capsule::CapsuleLabel{capsule::capsule_id_from_name(c.id), c.privacy, c.home_domain};

  auto latest_version = [&](const std::string& model_id) -> std::uint32_t {
    const auto* a = reg.latest(model_id);
    if (!a) throw ScenarioError("model '" + model_id + "' has no registered version");
    return a->version;
  };

  for (std::size_t i = 0; i < s.lifecycle.size(); ++i) {
    const auto& st = s.lifecycle[i];
    std::vector<capsule::CapsuleLabel> caps;
    for (const auto& c : st.capsules) caps.push_back(labels.at(c));
    StepOutcome out{i, std::string(op_name(st.op)) + " " + st.model_id + " on " + st.node, "ok"};
    try {
      switch (st.op) {
        case LifecycleStep::Op::train:
          reg.register_train(st.model_id, caps, st.node, find_model(s, st.model_id)->artifact.profile);
          break;
        case LifecycleStep::Op::adapt:
          reg.adapt(st.model_id, st.version.value_or(latest_version(st.model_id)), caps, st.node);
          break;
        case LifecycleStep::Op::deploy:
          reg.deploy(st.model_id, st.version.value_or(latest_version(st.model_id)), st.node);
          break;
      }
    } catch (const lifecycle::LifecycleError& e) {
      out.result = error_name(e);
      if (!st.expect_error || !error_matches(*st.expect_error, out.result))
        throw ScenarioError("lifecycle[" + std::to_string(i) + "] " + out.description + ": " + e.what());
    }
    if (st.expect_error && out.result == "ok")
      throw ScenarioError("lifecycle[" + std::to_string(i) + "] " + out.description + ": expected " +
                          *st.expect_error + " but the step succeeded");
    if (steps) steps->push_back(std::move(out));
  }

  for (const auto& d : s.deployments) {
    try {
      reg.deploy(d.model_id, d.version.value_or(latest_version(d.model_id)), d.node);
    } catch (const lifecycle::LifecycleError& e) {
      throw ScenarioError("deployment of " + d.model_id + " on " + d.node + ": " + e.what());
    }
  }
  return reg;
}

ScenarioResult run_scenario(const Scenario& scenario, const RunOverrides& overrides) {
  validate_scenario(scenario);
  const std::uint64_t seed = overrides.seed.value_or(scenario.seed);
  const std::size_t count = overrides.requests.value_or(scenario.requests.count);
  if (count == 0) throw ScenarioError("request count must be at least 1");

  ScenarioResult result;
  lifecycle::Registry reg = build_registry(scenario, &result.steps);

  if (scenario.placement) {
    const auto& spec = *scenario.placement;
    placement::PlacementProblem problem;
    problem.topology = scenario.topology;
    problem.alpha = spec.alpha;
    problem.beta = spec.beta;
    problem.candidate_hosts = spec.candidate_hosts;
    problem.demand = spec.demand;
    std::set<std::string> ids;
    for (const auto& d : spec.demand) ids.insert(d.model_id);
    for (const auto& id : ids) {
      const auto* a = reg.latest(id);
      if (!a) throw ScenarioError("placement: model '" + id + "' has no registered version");
      problem.models.push_back(*a);
    }
    try {
      result.plan = placement::optimize(problem, spec.mode);
    } catch (const placement::NoFeasiblePlan&) {
      throw;
    } catch (const placement::PlacementError& e) {
      throw ScenarioError(std::string("placement: ") + e.what());
    }
    for (const auto& [model_id, node] : result.plan->assignment) {
      try {
        reg.deploy(model_id, reg.latest(model_id)->version, node);
      } catch (const lifecycle::LifecycleError& e) {
        throw ScenarioError("deploying placement of " + model_id + " on " + node + ": " + e.what());
      }
    }
  }
  result.deployments = reg.active_deployments();

  simcore::Engine engine;
  serving::SimPlane plane(engine, scenario.topology, seed);
  for (const auto& d : result.deployments) plane.deploy(d.node_id, d.model_id, reg.get(d.model_id, d.version).profile);

  struct Resolved {
    std::string robot, host, model;
  };
  std::vector<Resolved> targets;
  for (const auto& t : scenario.requests.targets) {
    std::string host;
    if (t.host) {
      host = *t.host;
    } else if (result.plan && result.plan->assignment.contains(t.model_id)) {
      host = result.plan->assignment.at(t.model_id);
    } else {
      std::vector<std::string> hosts;
      for (const auto& d : result.deployments)
        if (d.model_id == t.model_id && scenario.topology.find_link(t.robot, d.node_id)) hosts.push_back(d.node_id);
      if (hosts.size() != 1)
        throw ScenarioError("target " + t.robot + "/" + t.model_id + ": " +
                            (hosts.empty() ? "no reachable deployment" : "several deployments; name a host"));
      host = hosts.front();
    }
    if (!scenario.topology.find_link(t.robot, host))
      throw ScenarioError("target " + t.robot + "/" + t.model_id + ": no link to " + host);
    targets.push_back(Resolved{t.robot, host, t.model_id});
  }

  // Lives until engine.run() returns; completion callbacks re-enter it.
  std::vector<std::size_t> sent(targets.size(), 0);
  std::function<void(std::size_t)> send_next;
  if (scenario.requests.arrival == Arrival::sequential) {
    send_next = [&](std::size_t k) {
      if (sent[k]++ == count) return;
      plane.submit(targets[k].robot, targets[k].host, targets[k].model,
                   [&, k](simcore::Engine&, const serving::TimingRecord&) { send_next(k); });
    };
    for (std::size_t k = 0; k < targets.size(); ++k) send_next(k);
  } else {
    const double mean_gap_us = 1e6 / scenario.requests.rate_per_s;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      simcore::RngStream arrivals(seed, "arrivals " + targets[k].robot + ">" + targets[k].host + " " + targets[k].model);
      double t = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        t += arrivals.exponential(1.0) * mean_gap_us;
        const auto& tg = targets[k];
        engine.schedule_at(static_cast<simcore::SimTime>(std::llround(t)),
                           [&plane, tg](simcore::Engine&, const simcore::SimEvent&) {
                             plane.submit(tg.robot, tg.host, tg.model, nullptr);
                           });
      }
    }
  }
  engine.run();

  result.log = plane.log();
  std::sort(result.log.begin(), result.log.end(),
            [](const auto& a, const auto& b) { return a.index < b.index; });
  result.summary = summarize(result.log);
  return result;
}

}  // namespace fog::bench
