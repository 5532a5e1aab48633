#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "fog/dior/model.hpp"
#include "fog/lifecycle/manifest.hpp"
#include "fog/serving/messages.hpp"
#include "fog/topology/topology.hpp"

namespace fog::serving {

struct EvalResult {
  Status status = Status::ok;
  Bytes result;
};

/// Must be safe to call from several connection threads at once.
using Evaluator = std::function<EvalResult(std::span<const std::uint8_t> input)>;

struct LiveModel {
  lifecycle::WorkloadProfile profile;
  Evaluator evaluate;
};

using ModelTable = std::map<std::string, LiveModel>;

/// Sleeps for a compute-time draw for `node`, then returns a fixed
/// response_bytes-sized synthetic result.
Evaluator make_stub_evaluator(const lifecycle::WorkloadProfile& profile, const topology::NodeSpec& node,
                              std::uint64_t seed);

/// Input: two big-endian IEEE-754 doubles (16 bytes). Output: one
/// big-endian double per class, the real-domain class probabilities.
/// Any other input size is malformed.
Evaluator make_dior_evaluator(dior::DiorModel model);

Bytes encode_point(double x0, double x1);
std::vector<double> decode_probabilities(std::span<const std::uint8_t> blob);

/// toy_dior entries evaluate a DiorModel loaded from `weights` (or a seeded
/// initialization when absent); every other task gets the sleeping stub.
ModelTable models_from_manifest(const std::vector<lifecycle::ManifestEntry>& entries, const topology::NodeSpec& node,
                                std::uint64_t seed);

struct LiveServerConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;  // 0 picks an ephemeral port
  std::string node_id = "edge-gpu";
  topology::Accelerator accelerator = topology::Accelerator::gpu;
  std::size_t queue_limit = 64;
  std::uint32_t max_payload = 64u << 20;
};

struct ServedRequest {
  RequestId request_id{};
  std::string model_id;
  Status status = Status::ok;
  std::uint64_t t_inf_us = 0;
};

class ServerError : public Error {
 public:
  using Error::Error;
};

/// Thread-per-connection TCP server for the framed protocol. A request that
/// would put more than queue_limit requests in flight gets status overloaded.
/// A bad frame header draws an ERROR frame and closes that connection; an
/// unparseable INFER_REQ payload draws an ERROR frame and the connection
/// stays open.
class LiveServer {
 public:
  LiveServer(LiveServerConfig config, ModelTable models);
  ~LiveServer();

  LiveServer(const LiveServer&) = delete;
  LiveServer& operator=(const LiveServer&) = delete;

  void start();
  void stop();
  std::uint16_t port() const { return port_; }

  /// Replaces the served model table atomically.
  void set_models(ModelTable models);

  std::vector<ServedRequest> metrics() const;
  std::uint64_t protocol_errors() const { return protocol_errors_.load(); }

 private:
  struct Connection {
    int fd = -1;
    std::thread thread;
    std::atomic<bool> done{false};
  };

  void accept_loop();
  void serve_connection(Connection& conn);
  Frame handle_frame(const Frame& frame);
  InferenceResponse handle_request(const InferenceRequest& req);
  void reap(bool all);

  LiveServerConfig config_;
  topology::NodeSpec node_;
  std::shared_ptr<const ModelTable> models_;
  mutable std::mutex models_mu_;

  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread accept_thread_;
  std::mutex conns_mu_;
  std::list<Connection> conns_;

  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::uint64_t> protocol_errors_{0};
  mutable std::mutex metrics_mu_;
  std::vector<ServedRequest> metrics_;
};

}  // namespace fog::serving
