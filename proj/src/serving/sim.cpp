#include "fog/serving/sim.hpp"

#include <algorithm>

namespace fog::serving {

using simcore::SimTime;

SimServer::SimServer(topology::NodeSpec node, std::uint64_t root_seed, std::size_t queue_limit)
    : node_(std::move(node)), root_seed_(root_seed), queue_limit_(queue_limit) {}

void SimServer::deploy(const std::string& model_id, lifecycle::WorkloadProfile profile) {
  lifecycle::validate(profile);
  models_[model_id] = std::move(profile);
}

void SimServer::undeploy(const std::string& model_id) { models_.erase(model_id); }

const lifecycle::WorkloadProfile* SimServer::profile(const std::string& model_id) const {
  auto it = models_.find(model_id);
  return it == models_.end() ? nullptr : &it->second;
}

std::size_t SimServer::in_system(SimTime at) {
  while (!finishes_.empty() && finishes_.front() <= at) finishes_.pop_front();
  return finishes_.size();
}

ServiceResult SimServer::handle(const RequestId& id, const std::string& model_id, std::uint64_t input_bytes,
                                SimTime arrival) {
  if (arrival < last_arrival_) throw Error("SimServer: arrivals must be nondecreasing");
  last_arrival_ = arrival;

  ServiceResult r;
  r.response.request_id = id;
  r.arrival = r.start = r.finish = arrival;

  const auto* prof = profile(model_id);
  if (!prof) {
    r.response.status = Status::model_not_found;
    return r;
  }
  if (input_bytes != prof->request_bytes) {
    r.response.status = Status::malformed;
    return r;
  }
  if (in_system(arrival) >= queue_limit_) {
    r.response.status = Status::overloaded;
    return r;
  }

  auto it = service_streams_.find(model_id);
  if (it == service_streams_.end())
    it = service_streams_.emplace(model_id, simcore::RngStream(root_seed_, "svc " + node_.id + " " + model_id)).first;
  const SimTime service = std::max<SimTime>(1, simcore::ms_to_us(it->second.draw(prof->compute_dist_for(node_))));

  r.start = std::max(arrival, free_at_);
  r.finish = r.start + service;
  free_at_ = r.finish;
  busy_ += service;
  finishes_.push_back(r.finish);
  r.response.status = Status::ok;
  r.response.t_inf_us = service;
  return r;
}

ServiceResult SimServer::handle(const InferenceRequest& req, SimTime arrival) {
  return handle(req.request_id, req.model_id, req.input_blob.size(), arrival);
}

SimPlane::SimPlane(simcore::Engine& engine, const topology::Topology& topology, std::uint64_t root_seed,
                   std::size_t queue_limit)
    : engine_(engine), topology_(topology), root_seed_(root_seed), queue_limit_(queue_limit) {}

SimServer& SimPlane::server(const std::string& node_id) {
  auto it = servers_.find(node_id);
  if (it == servers_.end())
    it = servers_.emplace(node_id, std::make_unique<SimServer>(topology_.node(node_id), root_seed_, queue_limit_)).first;
  return *it->second;
}

void SimPlane::deploy(const std::string& node_id, const std::string& model_id,
                      const lifecycle::WorkloadProfile& profile) {
  server(node_id).deploy(model_id, profile);
}

simcore::RngStream& SimPlane::link_stream(const std::string& from, const std::string& to) {
  const std::string key = "lat " + from + ">" + to;
  auto it = link_streams_.find(key);
  if (it == link_streams_.end()) it = link_streams_.emplace(key, simcore::RngStream(root_seed_, key)).first;
  return it->second;
}

void SimPlane::submit(const std::string& robot, const std::string& node_id, const std::string& model_id,
                      Callback on_done) {
  const auto* prof = server(node_id).profile(model_id);
  submit(robot, node_id, model_id, prof ? prof->request_bytes : 0, std::move(on_done));
}

void SimPlane::submit(const std::string& robot, const std::string& node_id, const std::string& model_id,
                      std::uint64_t input_bytes, Callback on_done) {
  const auto& link = topology_.link(robot, node_id);
  SimServer& srv = server(node_id);

  TimingRecord rec;
  rec.index = next_index_++;
  rec.request_id = sim_request_id(root_seed_, rec.index);
  rec.robot = robot;
  rec.host = node_id;
  rec.model_id = model_id;
  rec.t_send = engine_.now();

  const SimTime up = simcore::ms_to_us(topology::sample_one_way_latency(link, link_stream(robot, node_id))) +
                     simcore::ms_to_us(topology::transmission_time(input_bytes, link));

  engine_.schedule(
      up,
      [this, &srv, &link, rec, input_bytes, on_done = std::move(on_done)](simcore::Engine& eng,
                                                                          const simcore::SimEvent&) mutable {
        const auto result = srv.handle(rec.request_id, rec.model_id, input_bytes, eng.now());
        rec.status = result.response.status;
        rec.arrival = result.arrival;
        rec.start = result.start;
        rec.finish = result.finish;
        const std::uint64_t resp_bytes = rec.status == Status::ok ? srv.profile(rec.model_id)->response_bytes : 0;
        const SimTime down =
            simcore::ms_to_us(topology::sample_one_way_latency(link, link_stream(rec.host, rec.robot))) +
            simcore::ms_to_us(topology::transmission_time(resp_bytes, link));
        eng.schedule_at(rec.finish + down,
                        [this, rec, on_done = std::move(on_done)](simcore::Engine& e, const simcore::SimEvent&) mutable {
                          rec.recv = e.now();
                          log_.push_back(rec);
                          if (on_done) on_done(e, rec);
                        });
      });
}

TimingRecord run_sim_request(simcore::Engine& engine, const topology::Topology& topology,
                             const lifecycle::ModelArtifact& artifact, const lifecycle::Deployment& deployment,
                             const std::string& robot, std::uint64_t seed) {
  if (!deployment.active) throw Error("deployment " + std::to_string(deployment.id) + " is not active");
  SimPlane plane(engine, topology, seed);
  plane.deploy(deployment.node_id, deployment.model_id, artifact.profile);
  std::optional<TimingRecord> out;
  plane.submit(robot, deployment.node_id, deployment.model_id,
               [&out](simcore::Engine&, const TimingRecord& r) { out = r; });
  engine.run();
  if (!out) throw Error("run_sim_request: request did not complete");
  return *out;
}

RequestId sim_request_id(std::uint64_t root_seed, std::uint64_t index) {
  std::uint64_t s = root_seed ^ 0x5157a11e5157a11eULL;
  const std::uint64_t hi = simcore::splitmix64(s);
  RequestId id{};
  for (int i = 0; i < 8; ++i) id[i] = static_cast<std::uint8_t>(hi >> (56 - 8 * i));
  for (int i = 0; i < 8; ++i) id[8 + i] = static_cast<std::uint8_t>(index >> (56 - 8 * i));
  return id;
}

}  // namespace fog::serving
