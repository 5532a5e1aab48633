#include "fog/placement/placement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace fog::placement {

Mode parse_mode(std::string_view text) {
  if (text == "exact") return Mode::exact;
  if (text == "greedy") return Mode::greedy;
  throw PlacementError("unknown placement mode '" + std::string(text) + "'");
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::unassigned: return "Unassigned";
    case ViolationKind::not_candidate: return "NotCandidate";
    case ViolationKind::robot_host: return "NodeIsRobot";
    case ViolationKind::capacity_exceeded: return "CapacityExceeded";
    case ViolationKind::privacy_violation: return "PrivacyViolation";
    case ViolationKind::no_route: return "NoRoute";
  }
  return "?";
}

double expected_rtt(const std::string& robot, const lifecycle::WorkloadProfile& profile,
                    const topology::NodeSpec& node, const topology::Topology& topology) {
  const auto& link = topology.link(robot, node.id);
  return 2.0 * simcore::mean(link.one_way_latency) + topology::transmission_time(profile.request_bytes, link) +
         topology::transmission_time(profile.response_bytes, link) + profile.compute_for(node).mean_ms;
}

void validate_problem(const PlacementProblem& p) {
  if (!(p.alpha >= 0.0) || !(p.beta >= 0.0) || !(p.alpha + p.beta > 0.0))
    throw PlacementError("placement weights need alpha >= 0, beta >= 0 and alpha + beta > 0");
  std::set<std::string> ids;
  for (const auto& m : p.models)
    if (!ids.insert(m.model_id).second) throw PlacementError("model '" + m.model_id + "' listed twice");
  for (const auto& d : p.demand) {
    if (!(d.requests_per_second >= 0.0) || !std::isfinite(d.requests_per_second))
      throw PlacementError("demand must be finite and >= 0");
    const auto* r = p.topology.find_node(d.robot);
    if (!r || r->kind != topology::NodeKind::robot) throw PlacementError("demand names unknown robot '" + d.robot + "'");
    if (!ids.contains(d.model_id)) throw PlacementError("demand names unknown model '" + d.model_id + "'");
  }
  for (const auto& h : p.candidate_hosts)
    if (!p.topology.find_node(h)) throw PlacementError("unknown candidate host '" + h + "'");
}

std::vector<std::string> candidate_hosts(const PlacementProblem& p) {
  std::vector<std::string> out = p.candidate_hosts;
  if (out.empty())
    for (const auto* n : p.topology.hosts()) out.push_back(n->id);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Feasibility feasible(const PlacementPlan& plan, const PlacementProblem& p) {
  Feasibility f;
  auto add = [&](ViolationKind k, std::string model, std::string node, std::string msg) {
    f.ok = false;
    f.violations.push_back(Violation{k, std::move(model), std::move(node), std::move(msg)});
  };
  const auto hosts = candidate_hosts(p);
  std::map<std::string, std::int64_t> used;
  for (const auto& m : p.models) {
    auto it = plan.assignment.find(m.model_id);
    if (it == plan.assignment.end()) {
      add(ViolationKind::unassigned, m.model_id, "", "model is not assigned to a host");
      continue;
    }
    const auto* node = p.topology.find_node(it->second);
    if (!node) {
      add(ViolationKind::not_candidate, m.model_id, it->second, "unknown node");
      continue;
    }
    if (!std::binary_search(hosts.begin(), hosts.end(), node->id))
      add(ViolationKind::not_candidate, m.model_id, node->id, "node is not a candidate host");
    if (!node->can_host_models()) add(ViolationKind::robot_host, m.model_id, node->id, "robots cannot host models");
    if (m.taint.is_private() && *m.taint.domain != node->trust_domain)
      add(ViolationKind::privacy_violation, m.model_id, node->id,
          "model is " + lifecycle::to_string(m.taint) + " but node is in domain " + std::to_string(node->trust_domain));
    for (const auto& d : p.demand)
      if (d.model_id == m.model_id && d.requests_per_second > 0.0 && !p.topology.find_link(d.robot, node->id))
        add(ViolationKind::no_route, m.model_id, node->id, "robot '" + d.robot + "' has no link to this node");
    used[node->id] += m.profile.mem_units;
  }
  for (const auto& [node_id, units] : used) {
    const auto& node = p.topology.node(node_id);
    if (units > node.mem_capacity)
      add(ViolationKind::capacity_exceeded, "", node_id,
          std::to_string(units) + " memory units assigned, capacity " + std::to_string(node.mem_capacity));
  }
  return f;
}

double plan_cost(const PlacementPlan& plan, const PlacementProblem& p) {
  const auto f = feasible(plan, p);
  if (!f.ok) throw InfeasiblePlan("plan is infeasible: " + f.violations.front().message);
  double latency = 0.0;
  for (const auto& d : p.demand) {
    if (d.requests_per_second == 0.0) continue;
    const auto& m = *std::find_if(p.models.begin(), p.models.end(),
                                  [&](const lifecycle::ModelArtifact& a) { return a.model_id == d.model_id; });
    const auto& node = p.topology.node(plan.assignment.at(d.model_id));
    latency += d.requests_per_second * expected_rtt(d.robot, m.profile, node, p.topology);
  }
  std::set<std::string> used;
  for (const auto& m : p.models) used.insert(plan.assignment.at(m.model_id));
  double hourly = 0.0;
  for (const auto& id : used) hourly += p.topology.node(id).hourly_cost;
  return p.alpha * latency + p.beta * hourly;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool better(double candidate, double best) {
  return candidate < best - 1e-9 * std::max(1.0, std::abs(best));
}

/// Per-(model, host) quantities precomputed once for both search modes.
struct Tables {
  std::vector<const lifecycle::ModelArtifact*> models;  // sorted by id
  std::vector<const topology::NodeSpec*> hosts;          // sorted by id
  std::vector<std::vector<double>> latency_cost;         // alpha * sum demand * rtt
  std::vector<std::vector<bool>> allowed;                // per-model constraints, capacity aside
  std::vector<std::int64_t> mem;
  std::vector<std::int64_t> capacity;
  std::vector<double> fixed_cost;                        // beta * hourly_cost
};

Tables build_tables(const PlacementProblem& p) {
  Tables t;
  for (const auto& m : p.models) t.models.push_back(&m);
  std::sort(t.models.begin(), t.models.end(),
            [](const auto* a, const auto* b) { return a->model_id < b->model_id; });
  for (const auto& id : candidate_hosts(p)) t.hosts.push_back(&p.topology.node(id));
  t.latency_cost.assign(t.models.size(), std::vector<double>(t.hosts.size(), 0.0));
  t.allowed.assign(t.models.size(), std::vector<bool>(t.hosts.size(), true));
  for (std::size_t i = 0; i < t.models.size(); ++i) {
    const auto& m = *t.models[i];
    t.mem.push_back(m.profile.mem_units);
    for (std::size_t h = 0; h < t.hosts.size(); ++h) {
      const auto& node = *t.hosts[h];
      bool ok = node.can_host_models() && m.profile.mem_units <= node.mem_capacity &&
                !(m.taint.is_private() && *m.taint.domain != node.trust_domain);
      double cost = 0.0;
      for (const auto& d : p.demand) {
        if (d.model_id != m.model_id || d.requests_per_second == 0.0) continue;
        if (!p.topology.find_link(d.robot, node.id)) {
          ok = false;
          break;
        }
        cost += d.requests_per_second * expected_rtt(d.robot, m.profile, node, p.topology);
      }
      t.allowed[i][h] = ok;
      t.latency_cost[i][h] = ok ? p.alpha * cost : kInf;
    }
  }
  for (const auto* h : t.hosts) {
    t.capacity.push_back(h->mem_capacity);
    t.fixed_cost.push_back(p.beta * h->hourly_cost);
  }
  return t;
}

struct ExactSearch {
  const Tables& t;
  std::vector<std::size_t> choice;
  std::vector<std::size_t> best_choice;
  std::vector<std::int64_t> used_mem;
  std::vector<int> host_load;
  double best = kInf;

  explicit ExactSearch(const Tables& tables)
      : t(tables), choice(tables.models.size()), used_mem(tables.hosts.size(), 0), host_load(tables.hosts.size(), 0) {}

  void search(std::size_t i, double partial) {
    // Every term is non-negative, so a partial cost that cannot strictly
    // beat the incumbent rules out the whole subtree.
    if (best < kInf && !better(partial, best)) return;
    if (i == t.models.size()) {
      best = partial;
      best_choice = choice;
      return;
    }
    for (std::size_t h = 0; h < t.hosts.size(); ++h) {
      if (!t.allowed[i][h] || used_mem[h] + t.mem[i] > t.capacity[h]) continue;
      const double add = t.latency_cost[i][h] + (host_load[h] == 0 ? t.fixed_cost[h] : 0.0);
      choice[i] = h;
      used_mem[h] += t.mem[i];
      ++host_load[h];
      search(i + 1, partial + add);
      used_mem[h] -= t.mem[i];
      --host_load[h];
    }
  }
};

PlacementPlan to_plan(const Tables& t, const std::vector<std::size_t>& choice, const PlacementProblem& p) {
  PlacementPlan plan;
  for (std::size_t i = 0; i < t.models.size(); ++i) plan.assignment[t.models[i]->model_id] = t.hosts[choice[i]]->id;
  plan.objective_value = plan_cost(plan, p);
  return plan;
}

}  // namespace

PlacementPlan optimize(const PlacementProblem& p, Mode mode) {
  validate_problem(p);
  const Tables t = build_tables(p);
  if (t.models.empty()) return PlacementPlan{};
  if (t.hosts.empty()) throw NoFeasiblePlan("no candidate hosts");

  if (mode == Mode::exact) {
    const double space = std::pow(static_cast<double>(t.hosts.size()), static_cast<double>(t.models.size()));
    if (space > kMaxExactAssignments)
      throw PlacementError("exact placement limited to 1e6 assignments; use greedy mode");
    ExactSearch s(t);
    s.search(0, 0.0);
    if (s.best == kInf) throw NoFeasiblePlan("no assignment satisfies privacy, capacity and routing constraints");
    return to_plan(t, s.best_choice, p);
  }

  std::vector<double> total_demand(t.models.size(), 0.0);
  for (std::size_t i = 0; i < t.models.size(); ++i)
    for (const auto& d : p.demand)
      if (d.model_id == t.models[i]->model_id) total_demand[i] += d.requests_per_second;
  std::vector<std::size_t> order(t.models.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return total_demand[a] > total_demand[b]; });

  std::vector<std::size_t> choice(t.models.size());
  std::vector<std::int64_t> used_mem(t.hosts.size(), 0);
  std::vector<int> host_load(t.hosts.size(), 0);
  for (std::size_t i : order) {
    double best = kInf;
    std::size_t best_h = t.hosts.size();
    for (std::size_t h = 0; h < t.hosts.size(); ++h) {
      if (!t.allowed[i][h] || used_mem[h] + t.mem[i] > t.capacity[h]) continue;
      const double marginal = t.latency_cost[i][h] + (host_load[h] == 0 ? t.fixed_cost[h] : 0.0);
      if (best_h == t.hosts.size() || better(marginal, best)) {
        best = marginal;
        best_h = h;
      }
    }
    if (best_h == t.hosts.size())
      throw NoFeasiblePlan("greedy placement found no feasible host for model '" + t.models[i]->model_id + "'");
    choice[i] = best_h;
    used_mem[best_h] += t.mem[i];
    ++host_load[best_h];
  }
  return to_plan(t, choice, p);
}

}  // namespace fog::placement
