#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fog/lifecycle/artifact.hpp"
#include "fog/lifecycle/registry.hpp"
#include "fog/serving/messages.hpp"
#include "fog/simcore/engine.hpp"
#include "fog/simcore/rng.hpp"
#include "fog/topology/topology.hpp"

namespace fog::serving {

inline constexpr std::size_t kDefaultQueueLimit = 64;

/// Outcome of one request at a simulated server, all times in µs.
struct ServiceResult {
  InferenceResponse response;
  simcore::SimTime arrival = 0;
  simcore::SimTime start = 0;
  simcore::SimTime finish = 0;
};

/// Single-server FIFO node. A request that finds `queue_limit` requests
/// already in the system (waiting or in service) is rejected with
/// status overloaded.
class SimServer {
 public:
  SimServer(topology::NodeSpec node, std::uint64_t root_seed, std::size_t queue_limit = kDefaultQueueLimit);

  const topology::NodeSpec& node() const { return node_; }

  void deploy(const std::string& model_id, lifecycle::WorkloadProfile profile);
  void undeploy(const std::string& model_id);
  bool serves(const std::string& model_id) const { return models_.contains(model_id); }
  const lifecycle::WorkloadProfile* profile(const std::string& model_id) const;

  /// Requests must be handed over in nondecreasing arrival order.
  /// `input_bytes` stands in for the blob: a size other than the profile's
  /// request_bytes makes the request malformed.
  ServiceResult handle(const RequestId& id, const std::string& model_id, std::uint64_t input_bytes,
                       simcore::SimTime arrival);
  ServiceResult handle(const InferenceRequest& req, simcore::SimTime arrival);

  simcore::SimTime busy_time() const { return busy_; }
  simcore::SimTime free_at() const { return free_at_; }
  std::size_t in_system(simcore::SimTime at);

 private:
  topology::NodeSpec node_;
  std::uint64_t root_seed_;
  std::size_t queue_limit_;
  std::map<std::string, lifecycle::WorkloadProfile> models_;
  std::map<std::string, simcore::RngStream> service_streams_;
  std::deque<simcore::SimTime> finishes_;  // of accepted requests, nondecreasing
  simcore::SimTime free_at_ = 0;
  simcore::SimTime busy_ = 0;
  simcore::SimTime last_arrival_ = 0;
};

/// One simulated request, µs on the engine clock.
struct TimingRecord {
  std::uint64_t index = 0;
  RequestId request_id{};
  std::string robot;
  std::string host;
  std::string model_id;
  Status status = Status::ok;
  simcore::SimTime t_send = 0;
  simcore::SimTime arrival = 0;
  simcore::SimTime start = 0;
  simcore::SimTime finish = 0;
  simcore::SimTime recv = 0;

  simcore::SimTime t_rtt_us() const { return recv - t_send; }
  simcore::SimTime t_inf_us() const { return finish - start; }
  simcore::SimTime queue_delay_us() const { return start - arrival; }
  double t_rtt_ms() const { return simcore::us_to_ms(t_rtt_us()); }
  double t_inf_ms() const { return simcore::us_to_ms(t_inf_us()); }
  double queue_delay_ms() const { return simcore::us_to_ms(queue_delay_us()); }
};

/// End-to-end request path on a discrete-event engine:
///   send -> uplink latency + tx(request) -> FIFO service -> downlink latency + tx(response) -> receive
/// Latency draws come from one stream per link direction, service draws from
/// one stream per (node, model), so results do not depend on how unrelated
/// traffic interleaves.
class SimPlane {
 public:
  using Callback = std::function<void(simcore::Engine&, const TimingRecord&)>;

  SimPlane(simcore::Engine& engine, const topology::Topology& topology, std::uint64_t root_seed,
           std::size_t queue_limit = kDefaultQueueLimit);

  SimServer& server(const std::string& node_id);
  void deploy(const std::string& node_id, const std::string& model_id, const lifecycle::WorkloadProfile& profile);

  /// Sends a request from `robot` to `node_id` now. `on_done` fires at the
  /// receive time. Throws NoRoute when no link joins the two.
  void submit(const std::string& robot, const std::string& node_id, const std::string& model_id, Callback on_done);
  void submit(const std::string& robot, const std::string& node_id, const std::string& model_id,
              std::uint64_t input_bytes, Callback on_done);

  const std::vector<TimingRecord>& log() const { return log_; }
  std::uint64_t submitted() const { return next_index_; }

 private:
  simcore::RngStream& link_stream(const std::string& from, const std::string& to);

  simcore::Engine& engine_;
  const topology::Topology& topology_;
  std::uint64_t root_seed_;
  std::size_t queue_limit_;
  std::map<std::string, std::unique_ptr<SimServer>> servers_;
  std::map<std::string, simcore::RngStream> link_streams_;
  std::vector<TimingRecord> log_;
  std::uint64_t next_index_ = 0;
};

/// Runs one request from `robot` to the deployment's node on `engine` and
/// drains it. Throws NoRoute when the robot has no link to that node.
TimingRecord run_sim_request(simcore::Engine& engine, const topology::Topology& topology,
                             const lifecycle::ModelArtifact& artifact, const lifecycle::Deployment& deployment,
                             const std::string& robot, std::uint64_t seed);

/// Deterministic request id for simulated request `index`.
RequestId sim_request_id(std::uint64_t root_seed, std::uint64_t index);

}  // namespace fog::serving
