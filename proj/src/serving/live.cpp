#include "fog/serving/live.hpp"

#include <bit>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <fstream>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <json.hpp>

#include "fog/detail/big_endian.hpp"
#include "fog/dior/train.hpp"
#include "fog/simcore/rng.hpp"
#include "net.hpp"

namespace fog::serving {

namespace {

std::uint64_t elapsed_us(std::chrono::steady_clock::time_point since) {
  return static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - since).count());
}

}  // namespace

Evaluator make_stub_evaluator(const lifecycle::WorkloadProfile& profile, const topology::NodeSpec& node,
                              std::uint64_t seed) {
  struct State {
    State(simcore::RngStream s, simcore::DistSpec d, std::size_t n) : stream(std::move(s)), dist(d), result(n) {}
    std::mutex mu;
    simcore::RngStream stream;
    simcore::DistSpec dist;
    Bytes result;
  };
  auto st = std::make_shared<State>(
      simcore::RngStream(seed, "live svc " + node.id + " " + std::string(lifecycle::to_string(profile.task))),
      profile.compute_dist_for(node), profile.response_bytes);
  for (std::size_t i = 0; i < st->result.size(); ++i) st->result[i] = static_cast<std::uint8_t>(i * 31 + 7);
  return [st](std::span<const std::uint8_t>) {
    double ms;
    {
      std::lock_guard lock(st->mu);
      ms = st->stream.draw(st->dist);
    }
    std::this_thread::sleep_for(std::chrono::microseconds(static_cast<std::int64_t>(std::llround(ms * 1000.0))));
    return EvalResult{Status::ok, st->result};
  };
}

Bytes encode_point(double x0, double x1) {
  Bytes out;
  detail::put_be(out, std::bit_cast<std::uint64_t>(x0));
  detail::put_be(out, std::bit_cast<std::uint64_t>(x1));
  return out;
}

std::vector<double> decode_probabilities(std::span<const std::uint8_t> blob) {
  if (blob.size() % 8 != 0) throw MessageError("probability blob size is not a multiple of 8");
  std::vector<double> out;
  for (std::size_t i = 0; i < blob.size(); i += 8)
    out.push_back(std::bit_cast<double>(detail::get_be<std::uint64_t>(blob.subspan(i, 8))));
  return out;
}

Evaluator make_dior_evaluator(dior::DiorModel model) {
  auto m = std::make_shared<const dior::DiorModel>(std::move(model));
  return [m](std::span<const std::uint8_t> input) {
    if (input.size() != 16) return EvalResult{Status::malformed, {}};
    Eigen::Matrix2Xd x(2, 1);
    x(0, 0) = std::bit_cast<double>(detail::get_be<std::uint64_t>(input.subspan(0, 8)));
    x(1, 0) = std::bit_cast<double>(detail::get_be<std::uint64_t>(input.subspan(8, 8)));
    if (!std::isfinite(x(0, 0)) || !std::isfinite(x(1, 0))) return EvalResult{Status::malformed, {}};
    const Eigen::MatrixXd p = dior::predict_proba(*m, x, dior::Domain::real);
    EvalResult r;
    for (Eigen::Index c = 0; c < p.rows(); ++c) detail::put_be(r.result, std::bit_cast<std::uint64_t>(p(c, 0)));
    return r;
  };
}

ModelTable models_from_manifest(const std::vector<lifecycle::ManifestEntry>& entries, const topology::NodeSpec& node,
                                std::uint64_t seed) {
  ModelTable table;
  for (const auto& e : entries) {
    const auto& a = e.artifact;
    LiveModel m{a.profile, {}};
    if (a.profile.task == lifecycle::Task::toy_dior) {
      dior::DiorModel model;
      if (e.weights_path) {
        std::ifstream in(*e.weights_path);
        if (!in) throw ServerError("cannot read weights file '" + *e.weights_path + "'");
        model = dior::model_from_json(nlohmann::json::parse(in));
      } else {
        model = dior::init_model(dior::Variant::dann, 4, seed);
      }
      m.profile.response_bytes = 8 * static_cast<std::uint64_t>(model.num_classes);
      m.evaluate = make_dior_evaluator(std::move(model));
    } else {
      m.evaluate = make_stub_evaluator(a.profile, node, seed);
    }
    table[a.model_id] = std::move(m);
  }
  return table;
}

LiveServer::LiveServer(LiveServerConfig config, ModelTable models)
    : config_(std::move(config)), models_(std::make_shared<const ModelTable>(std::move(models))) {
  node_.id = config_.node_id;
  node_.kind = topology::NodeKind::edge;
  node_.accelerator = config_.accelerator;
}

LiveServer::~LiveServer() { stop(); }

void LiveServer::set_models(ModelTable models) {
  auto next = std::make_shared<const ModelTable>(std::move(models));
  std::lock_guard lock(models_mu_);
  models_.swap(next);
}

std::vector<ServedRequest> LiveServer::metrics() const {
  std::lock_guard lock(metrics_mu_);
  return metrics_;
}

void LiveServer::start() {
  if (running_) return;
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw ServerError("socket: " + net::errno_text(errno));
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(config_.port);
  const std::string host = config_.host == "localhost" ? "127.0.0.1" : config_.host;
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    net::close_fd(listen_fd_);
    throw ServerError("listen address must be a numeric IPv4 address, got '" + config_.host + "'");
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 64) < 0) {
    const int err = errno;
    net::close_fd(listen_fd_);
    throw ServerError("bind/listen " + config_.host + ":" + std::to_string(config_.port) + ": " + net::errno_text(err));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  running_ = true;
  accept_thread_ = std::thread([this] { accept_loop(); });
}

void LiveServer::stop() {
  if (!running_.exchange(false)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  if (accept_thread_.joinable()) accept_thread_.join();
  net::close_fd(listen_fd_);
  {
    std::lock_guard lock(conns_mu_);
    for (auto& c : conns_) ::shutdown(c.fd, SHUT_RDWR);
  }
  reap(true);
}

void LiveServer::reap(bool all) {
  std::lock_guard lock(conns_mu_);
  for (auto it = conns_.begin(); it != conns_.end();) {
    if (all || it->done) {
      if (it->thread.joinable()) it->thread.join();
      net::close_fd(it->fd);
      it = conns_.erase(it);
    } else {
      ++it;
    }
  }
}

void LiveServer::accept_loop() {
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      break;
    }
    if (!running_) {
      ::close(fd);
      break;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    reap(false);
    std::lock_guard lock(conns_mu_);
    auto& c = conns_.emplace_back();
    c.fd = fd;
    c.thread = std::thread([this, &c] { serve_connection(c); });
  }
}

void LiveServer::serve_connection(Connection& conn) {
  const int fd = conn.fd;
  auto send = [&](const Frame& f) { return net::write_all(fd, encode_frame(f)) == net::IoStatus::ok; };
  std::array<std::uint8_t, kFrameHeaderSize> header{};
  while (running_) {
    if (net::read_exact(fd, header, -1) != net::IoStatus::ok) break;
    Frame frame;
    std::uint32_t len = 0;
    try {
      len = decode_frame_header(header, frame.type);
    } catch (const FrameError& e) {
      ++protocol_errors_;
      send(error_frame(e.what()));
      break;
    }
    if (len > config_.max_payload) {
      ++protocol_errors_;
      send(error_frame("TooLarge: payload of " + std::to_string(len) + " bytes exceeds server limit"));
      break;
    }
    frame.payload.resize(len);
    if (net::read_exact(fd, frame.payload, -1) != net::IoStatus::ok) break;
    if (!send(handle_frame(frame))) break;
  }
  // The peer sees EOF now; the descriptor itself is released by reap().
  ::shutdown(fd, SHUT_RDWR);
  conn.done = true;
}

Frame LiveServer::handle_frame(const Frame& frame) {
  switch (frame.type) {
    case FrameType::ping: return Frame{FrameType::pong, frame.payload};
    case FrameType::infer_req: {
      InferenceRequest req;
      try {
        req = decode_request(frame.payload);
      } catch (const MessageError& e) {
        ++protocol_errors_;
        return error_frame(std::string("malformed INFER_REQ: ") + e.what());
      }
      try {
        return response_frame(handle_request(req));
      } catch (const std::exception& e) {
        return error_frame(std::string("evaluation failed: ") + e.what());
      }
    }
    default:
      ++protocol_errors_;
      return error_frame("unexpected frame type " + std::to_string(static_cast<int>(frame.type)));
  }
}

InferenceResponse LiveServer::handle_request(const InferenceRequest& req) {
  struct InFlight {
    std::atomic<std::size_t>& n;
    std::size_t now;
    explicit InFlight(std::atomic<std::size_t>& c) : n(c), now(++c) {}
    ~InFlight() { --n; }
  } guard(in_flight_);

  InferenceResponse resp;
  resp.request_id = req.request_id;
  std::shared_ptr<const ModelTable> table;
  {
    std::lock_guard lock(models_mu_);
    table = models_;
  }
  auto it = table->find(req.model_id);
  if (it == table->end()) {
    resp.status = Status::model_not_found;
  } else if (guard.now > config_.queue_limit) {
    resp.status = Status::overloaded;
  } else {
    const auto t0 = std::chrono::steady_clock::now();
    EvalResult r = it->second.evaluate(req.input_blob);
    const std::uint64_t t_inf = elapsed_us(t0);
    resp.status = r.status;
    resp.result_blob = std::move(r.result);
    if (r.status == Status::ok) resp.t_inf_us = std::max<std::uint64_t>(1, t_inf);
  }
  std::lock_guard lock(metrics_mu_);
  metrics_.push_back(ServedRequest{resp.request_id, req.model_id, resp.status, resp.t_inf_us});
  return resp;
}

}  // namespace fog::serving
