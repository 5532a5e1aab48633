// fog: command-line front end for capsules, serving, placement, benchmarks
// and DIOR training.

#include <csignal>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "fog/bench/scenario.hpp"
#include "fog/bench/stats.hpp"
#include "fog/capsule/capsule.hpp"
#include "fog/dior/train.hpp"
#include "fog/lifecycle/manifest.hpp"
#include "fog/placement/placement.hpp"
#include "fog/serving/client.hpp"
#include "fog/serving/live.hpp"

namespace {

using fog::capsule::Bytes;

constexpr int kExitOk = 0;
constexpr int kExitTampered = 1;
constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

std::optional<Bytes> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

bool write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  out << data;
  return static_cast<bool>(out);
}

bool write_file(const std::string& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  return static_cast<bool>(out);
}

int fail(int code, const std::string& msg) {
  std::cerr << "fog: " << msg << "\n";
  return code;
}

// ---- capsule ---------------------------------------------------------------

struct CapsuleArgs {
  std::string file;
  std::string payload;
  std::string payload_file;
  std::string key;
  std::string id;
  std::string privacy = "public";
  std::uint32_t domain = 0;
  std::optional<std::uint64_t> timestamp;
};

int capsule_append(const CapsuleArgs& a) {
  using namespace fog::capsule;
  DataCapsule c;
  if (std::filesystem::exists(a.file)) {
    auto bytes = read_file(a.file);
    if (!bytes) return fail(kExitValidation, "cannot read " + a.file);
    try {
      c = parse_capsule(*bytes);
    } catch (const CapsuleFormatError& e) {
      return fail(kExitTampered, a.file + ": " + e.what());
    }
    if (auto bad = verify_capsule(c, to_bytes(a.key)))
      return fail(kExitTampered, a.file + ": record " + std::to_string(*bad) + " fails verification; refusing to append");
  } else {
    c.capsule_id = capsule_id_from_name(a.id.empty() ? std::filesystem::path(a.file).filename().string() : a.id);
    c.privacy = a.privacy == "private" ? Privacy::private_data : Privacy::public_data;
    c.home_domain = a.domain;
  }
  Bytes payload;
  if (!a.payload_file.empty()) {
    auto p = read_file(a.payload_file);
    if (!p) return fail(kExitValidation, "cannot read " + a.payload_file);
    payload = std::move(*p);
  } else {
    payload = to_bytes(a.payload);
  }
  const std::uint64_t ts = a.timestamp.value_or(static_cast<std::uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::system_clock::now().time_since_epoch())
          .count()));
  const Digest head = append_record(c, payload, ts, to_bytes(a.key));
  if (!write_file(a.file, serialize_capsule(c))) return fail(kExitValidation, "cannot write " + a.file);
  std::cout << "seq " << c.records.back().seq << " head " << to_hex(head) << "\n";
  return kExitOk;
}

int capsule_verify(const CapsuleArgs& a) {
  using namespace fog::capsule;
  auto bytes = read_file(a.file);
  if (!bytes) return fail(kExitValidation, "cannot read " + a.file);
  DataCapsule c;
  try {
    c = parse_capsule(*bytes);
  } catch (const CapsuleFormatError& e) {
    std::cout << "TAMPERED format " << e.what() << "\n";
    return kExitTampered;
  }
  if (auto bad = verify_capsule(c, to_bytes(a.key))) {
    std::cout << "TAMPERED record " << *bad << "\n";
    return kExitTampered;
  }
  std::cout << "OK " << c.records.size() << " records head " << to_hex(c.head) << "\n";
  return kExitOk;
}

// ---- serve / infer ---------------------------------------------------------

struct ServeArgs {
  std::string listen = "127.0.0.1:7070";
  std::string models;
  std::string accelerator = "gpu";
  std::string node_id = "edge-gpu";
  std::size_t queue_limit = 64;
  std::uint64_t seed = 1;
};

int serve(const ServeArgs& a) {
  using namespace fog::serving;
  const Endpoint ep = parse_endpoint(a.listen);
  LiveServerConfig cfg;
  cfg.host = ep.host;
  cfg.port = ep.port;
  cfg.node_id = a.node_id;
  cfg.accelerator = fog::topology::parse_accelerator(a.accelerator);
  cfg.queue_limit = a.queue_limit;
  fog::topology::NodeSpec node;
  node.id = cfg.node_id;
  node.kind = fog::topology::NodeKind::edge;
  node.accelerator = cfg.accelerator;

  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);  // inherited by server threads

  LiveServer server(cfg, models_from_manifest(fog::lifecycle::load_manifest(a.models), node, a.seed));
  server.start();
  std::cout << "listening on " << cfg.host << ":" << server.port() << std::endl;
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  std::cerr << "served " << server.metrics().size() << " requests\n";
  return kExitOk;
}

struct InferArgs {
  std::string connect;
  std::string model;
  std::string input;
  std::size_t repeat = 1;
  int timeout_ms = 5000;
};

int infer(const InferArgs& a) {
  using namespace fog::serving;
  auto blob = read_file(a.input);
  if (!blob) return fail(kExitValidation, "cannot read " + a.input);
  Client client(parse_endpoint(a.connect), a.timeout_ms);
  std::vector<double> rtt, inf;
  std::size_t errors = 0;
  std::cout << "i,request_id,status,t_rtt_ms,t_inf_ms\n";
  for (std::size_t i = 0; i < a.repeat; ++i) {
    const auto r = client.infer(a.model, *blob);
    const double t_inf = static_cast<double>(r.response.t_inf_us) / 1000.0;
    std::printf("%zu,%s,%s,%.3f,%.3f\n", i, request_id_hex(r.request.request_id).c_str(),
                std::string(to_string(r.response.status)).c_str(), r.t_rtt_ms, t_inf);
    if (r.response.status == Status::ok) {
      rtt.push_back(r.t_rtt_ms);
      inf.push_back(t_inf);
    } else {
      ++errors;
    }
  }
  std::cout << "\nn,errors,rtt_mean,rtt_std,rtt_p50,rtt_p95,inf_mean,inf_std\n";
  if (rtt.empty()) {
    std::printf("0,%zu,,,,,,\n", errors);
    return kExitFailure;
  }
  const auto r = fog::bench::describe(rtt);
  const auto s = fog::bench::describe(inf);
  std::printf("%zu,%zu,%.3f,%.3f,%.3f,%.3f,%.3f,%.3f\n", r.n, errors, r.mean, r.std, r.p50, r.p95, s.mean, s.std);
  return kExitOk;
}

// ---- place / bench ---------------------------------------------------------

struct PlaceArgs {
  std::string scenario;
  std::string mode;
  std::optional<double> alpha;
  std::optional<double> beta;
};

int place(const PlaceArgs& a) {
  using namespace fog;
  const auto s = bench::load_scenario(a.scenario);
  bench::validate_scenario(s);
  const auto reg = bench::build_registry(s);
  placement::PlacementProblem p;
  p.topology = s.topology;
  placement::Mode mode = placement::Mode::exact;
  if (s.placement) {
    mode = s.placement->mode;
    p.alpha = s.placement->alpha;
    p.beta = s.placement->beta;
    p.candidate_hosts = s.placement->candidate_hosts;
    p.demand = s.placement->demand;
  } else {
    for (const auto& t : s.requests.targets) p.demand.push_back(placement::Demand{t.robot, t.model_id, 1.0});
  }
  if (!a.mode.empty()) mode = placement::parse_mode(a.mode);
  if (a.alpha) p.alpha = *a.alpha;
  if (a.beta) p.beta = *a.beta;
  std::set<std::string> ids;
  for (const auto& d : p.demand) ids.insert(d.model_id);
  for (const auto& id : ids) p.models.push_back(*reg.latest(id));
  const auto plan = placement::optimize(p, mode);
  nlohmann::json out{{"mode", mode == placement::Mode::exact ? "exact" : "greedy"},
                     {"alpha", p.alpha},
                     {"beta", p.beta},
                     {"assignment", plan.assignment},
                     {"objective_value", plan.objective_value}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> requests;
  std::string format = "csv";
  std::string out;
  std::string log;
};

int bench_cmd(const BenchArgs& a) {
  using namespace fog::bench;
  const auto format = parse_report_format(a.format);
  const auto s = load_scenario(a.scenario);
  const auto result = run_scenario(s, RunOverrides{a.seed, a.requests});
  for (const auto& w : result.summary.warnings) std::cerr << "fog: warning: " << w << "\n";
  const std::string report = emit_report(result.summary, format, s.reference);
  if (a.out.empty() || a.out == "-") {
    std::cout << report;
  } else if (!write_file(a.out, report)) {
    return fail(kExitValidation, "cannot write " + a.out);
  }
  if (!a.log.empty() && !write_file(a.log, emit_log_csv(result.log)))
    return fail(kExitValidation, "cannot write " + a.log);
  return kExitOk;
}

// ---- dior ------------------------------------------------------------------

struct DiorArgs {
  std::string variant = "dann";
  std::uint64_t seed = 1;
  int epochs = 200;
  double lr = 0.05;
  std::string out;
  std::string save_weights;
};

int dior_train(const DiorArgs& a) {
  using namespace fog::dior;
  ShiftConfig sc;
  sc.seed = a.seed;
  const auto data = make_shifted_dataset(sc);
  TrainConfig cfg;
  cfg.seed = a.seed;
  cfg.epochs = a.epochs;
  cfg.lr = a.lr;
  const auto result = train_variant(parse_variant(a.variant), data, cfg);
  const auto final = final_metrics(result.model, data);
  const std::string metrics = metrics_to_json(result, final, cfg).dump(2) + "\n";
  if (a.out.empty() || a.out == "-") std::cout << metrics;
  else if (!write_file(a.out, metrics)) return fail(kExitValidation, "cannot write " + a.out);
  if (!a.save_weights.empty() && !write_file(a.save_weights, model_to_json(result.model).dump() + "\n"))
    return fail(kExitValidation, "cannot write " + a.save_weights);
  std::fprintf(stderr, "%s: real_eval %.3f sim_eval %.3f disc %.3f\n", a.variant.c_str(), final.real_eval,
               final.sim_eval, final.disc_accuracy);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fog robotics toolkit: data capsules, inference serving, placement and benchmarks"};
  app.require_subcommand(1);
  int code = kExitOk;

  CapsuleArgs cap;
  auto* capsule = app.add_subcommand("capsule", "Append to or verify a DataCapsule file");
  capsule->require_subcommand(1);
  auto* append = capsule->add_subcommand("append", "Append one signed record (creates the file if missing)");
  append->add_option("--file", cap.file, "Capsule file")->required();
  auto* payload_opt = append->add_option("--payload", cap.payload, "Payload text");
  append->add_option("--payload-file", cap.payload_file, "Read the payload from a file")->excludes(payload_opt);
  append->add_option("--key", cap.key, "Owner signing secret")->required();
  append->add_option("--id", cap.id, "Capsule name for a new file (defaults to the file name)");
  append->add_option("--privacy", cap.privacy, "public | private for a new file")
      ->check(CLI::IsMember({"public", "private"}));
  append->add_option("--domain", cap.domain, "Home trust domain id for a new file");
  append->add_option("--timestamp", cap.timestamp, "Record timestamp in µs (default: now)");
  append->callback([&] { code = capsule_append(cap); });
  auto* verify = capsule->add_subcommand("verify", "Verify hashes and signatures; exit 1 if tampered");
  verify->add_option("--file", cap.file, "Capsule file")->required();
  verify->add_option("--key", cap.key, "Owner signing secret")->required();
  verify->callback([&] { code = capsule_verify(cap); });

  ServeArgs sa;
  auto* serve_cmd = app.add_subcommand("serve", "Run the inference server until SIGINT/SIGTERM");
  serve_cmd->add_option("--listen", sa.listen, "HOST:PORT (port 0 picks one)");
  serve_cmd->add_option("--models", sa.models, "Model manifest JSON")->required();
  serve_cmd->add_option("--accelerator", sa.accelerator, "cpu | gpu")->check(CLI::IsMember({"cpu", "gpu"}));
  serve_cmd->add_option("--node-id", sa.node_id, "Node id used for per-node compute times");
  serve_cmd->add_option("--queue-limit", sa.queue_limit, "Requests in flight before status overloaded");
  serve_cmd->add_option("--seed", sa.seed, "Seed for stub compute draws and default toy_dior weights");
  serve_cmd->callback([&] { code = serve(sa); });

  InferArgs ia;
  auto* infer_cmd = app.add_subcommand("infer", "Send inference requests and print timings as CSV");
  infer_cmd->add_option("--connect", ia.connect, "HOST:PORT")->required();
  infer_cmd->add_option("--model", ia.model, "Model id")->required();
  infer_cmd->add_option("--input", ia.input, "Input blob file")->required();
  infer_cmd->add_option("--repeat", ia.repeat, "Number of requests");
  infer_cmd->add_option("--timeout-ms", ia.timeout_ms, "Per-request timeout");
  infer_cmd->callback([&] { code = infer(ia); });

  PlaceArgs pa;
  auto* place_cmd = app.add_subcommand("place", "Solve the placement problem of a scenario and print JSON");
  place_cmd->add_option("--scenario", pa.scenario, "Scenario JSON")->required();
  place_cmd->add_option("--mode", pa.mode, "exact | greedy")->check(CLI::IsMember({"exact", "greedy"}));
  place_cmd->add_option("--alpha", pa.alpha, "Latency weight");
  place_cmd->add_option("--beta", pa.beta, "Hourly cost weight");
  place_cmd->callback([&] { code = place(pa); });

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Run a scenario and emit a timing report");
  bench->add_option("--scenario", ba.scenario, "Scenario JSON")->required();
  bench->add_option("--seed", ba.seed, "Override the scenario seed");
  bench->add_option("--requests", ba.requests, "Override requests per target");
  bench->add_option("--format", ba.format, "csv | md")->check(CLI::IsMember({"csv", "md"}));
  bench->add_option("--out", ba.out, "Report path (default stdout)");
  bench->add_option("--log", ba.log, "Also write the per-request log as CSV");
  bench->callback([&] { code = bench_cmd(ba); });

  DiorArgs da;
  auto* dior = app.add_subcommand("dior", "Domain-invariant object recognition on the toy fixture");
  dior->require_subcommand(1);
  auto* dtrain = dior->add_subcommand("train", "Train one variant and print metrics JSON");
  dtrain->add_option("--variant", da.variant, "source | naive | dann | adda");
  dtrain->add_option("--seed", da.seed, "Dataset, initialization and batch seed");
  dtrain->add_option("--epochs", da.epochs, "Training epochs");
  dtrain->add_option("--lr", da.lr, "Learning rate");
  dtrain->add_option("--out", da.out, "Metrics JSON path (default stdout)");
  dtrain->add_option("--save-weights", da.save_weights, "Write model weights JSON for `fog serve`");
  dtrain->callback([&] { code = dior_train(da); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  } catch (const fog::placement::NoFeasiblePlan& e) {
    return fail(kExitInfeasible, e.what());
  } catch (const fog::serving::ClientError& e) {
    return fail(kExitFailure, e.what());
  } catch (const fog::serving::ServerError& e) {
    return fail(kExitFailure, e.what());
  } catch (const fog::Error& e) {
    return fail(kExitValidation, e.what());
  } catch (const std::exception& e) {
    return fail(kExitFailure, e.what());
  }
  return code;
}
