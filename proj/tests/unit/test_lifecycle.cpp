#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fog/capsule/capsule.hpp"
#include "fog/lifecycle/manifest.hpp"
#include "fog/lifecycle/registry.hpp"

using namespace fog;
using namespace fog::lifecycle;
using capsule::CapsuleLabel;
using capsule::Privacy;

namespace {

// Domain 0 is the lab (home), domain 1 the cloud provider, domain 2 a second site.
topology::Topology fixture(std::int64_t edge_mem = 10) {
  topology::Topology t;
  t.domains = {{0, "lab"}, {1, "aws"}, {2, "warehouse"}};
  auto add = [&](std::string id, topology::NodeKind k, topology::DomainId d, std::int64_t mem) {
    topology::NodeSpec n;
    n.id = std::move(id);
    n.kind = k;
    n.accelerator = k == topology::NodeKind::robot ? topology::Accelerator::none : topology::Accelerator::gpu;
    n.trust_domain = d;
    n.mem_capacity = mem;
    t.nodes.push_back(n);
  };
  add("robot", topology::NodeKind::robot, 0, 0);
  add("edge", topology::NodeKind::edge, 0, edge_mem);
  add("cloud", topology::NodeKind::cloud, 1, 100);
  add("depot", topology::NodeKind::edge, 2, 10);
  return t;
}

CapsuleLabel cap(const std::string& name, bool priv, topology::DomainId d) {
  return {capsule::capsule_id_from_name(name), priv ? Privacy::private_data : Privacy::public_data, d};
}

const CapsuleLabel kSim = cap("sim", false, 1);
const CapsuleLabel kLab = cap("lab", true, 0);
const CapsuleLabel kDepot = cap("depot", true, 2);

std::vector<CapsuleLabel> v(std::initializer_list<CapsuleLabel> l) { return l; }

WorkloadProfile profile(std::int64_t mem = 2) {
  auto p = default_profile(Task::object_recognition);
  p.mem_units = mem;
  return p;
}

}  // namespace

TEST_CASE("taint_of joins capsule privacy") {
  CHECK(taint_of({}) == Taint::public_taint());
  CHECK(taint_of(v({kSim, cap("x", true, 2)})) == Taint::private_to(2));
  CHECK_THROWS_AS(taint_of(v({cap("a", true, 1), cap("b", true, 2)})), MixedDomain);
  CHECK(taint_of(v({kLab, kLab, kSim})) == Taint::private_to(0));
  CHECK(join(Taint::public_taint(), Taint::private_to(3)) == Taint::private_to(3));
  CHECK(join(Taint::private_to(3), Taint::private_to(3)) == Taint::private_to(3));
  CHECK_THROWS_AS(join(Taint::private_to(1), Taint::private_to(3)), MixedDomain);
}

TEST_CASE("MixedDomain is a privacy violation") {
  CHECK_THROWS_AS(taint_of(v({cap("a", true, 1), cap("b", true, 2)})), PrivacyViolation);
}

TEST_CASE("taint text form") {
  CHECK(to_string(Taint::public_taint()) == "public");
  CHECK(to_string(Taint::private_to(4)) == "private:4");
  CHECK(parse_taint("private:4") == Taint::private_to(4));
  CHECK(parse_taint("public") == Taint::public_taint());
  CHECK_THROWS_AS(parse_taint("secret"), LifecycleError);
}

TEST_CASE("training on public sim data in the cloud") {
  Registry r(fixture());
  const auto& a = r.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK(a.stage == Stage::trained);
  CHECK(a.version == 1);
  CHECK(a.taint == Taint::public_taint());
  CHECK(a.produced_on == "cloud");
}

TEST_CASE("training on private data in the cloud is refused") {
  Registry r(fixture());
  CHECK_THROWS_AS(r.register_train("objrec", v({kLab}), "cloud", profile()), PrivacyViolation);
  CHECK(r.artifacts().empty());
}

TEST_CASE("training on two private domains is MixedDomain") {
  Registry r(fixture());
  CHECK_THROWS_AS(r.register_train("objrec", v({kLab, kDepot}), "edge", profile()), MixedDomain);
}

TEST_CASE("duplicate models and robots are refused") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK_THROWS_AS(r.register_train("objrec", v({kSim}), "cloud", profile()), DuplicateModel);
  CHECK_THROWS_AS(r.register_train("other", v({kSim}), "robot", profile()), NodeIsRobot);
}

TEST_CASE("adapting at the edge on private home data taints the weights") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  const auto& a = r.adapt("objrec", 1, v({kLab}), "edge");
  CHECK(a.stage == Stage::adapted);
  CHECK(a.version == 2);
  CHECK(a.taint == Taint::private_to(0));
  CHECK(a.trained_on.size() == 2);
}

TEST_CASE("adapting in the cloud with private data is refused") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK_THROWS_AS(r.adapt("objrec", 1, v({kLab}), "cloud"), PrivacyViolation);
  CHECK(r.find("objrec", 2) == nullptr);
}

TEST_CASE("adapting with public data keeps a public taint") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK(r.adapt("objrec", 1, v({cap("more-sim", false, 1)}), "cloud").taint == Taint::public_taint());
}

TEST_CASE("private weights cannot be moved to another domain by adapting there") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.adapt("objrec", 1, v({kLab}), "edge");
  CHECK_THROWS_AS(r.adapt("objrec", 2, v({kSim}), "cloud"), PrivacyViolation);
  CHECK_THROWS_AS(r.adapt("objrec", 2, v({kDepot}), "depot"), PrivacyViolation);
}

TEST_CASE("deploying the adapted private model") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.adapt("objrec", 1, v({kLab}), "edge");
  CHECK_NOTHROW(r.deploy("objrec", 2, "edge"));
  CHECK(r.get("objrec", 2).stage == Stage::deployed);
  CHECK_THROWS_AS(r.deploy("objrec", 2, "cloud"), PrivacyViolation);
  CHECK_THROWS_AS(r.deploy("objrec", 2, "robot"), NodeIsRobot);
}

TEST_CASE("privacy is checked before the robot rule") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.adapt("objrec", 1, v({kDepot}), "depot");
  CHECK_THROWS_AS(r.deploy("objrec", 2, "robot"), PrivacyViolation);
}

TEST_CASE("a new version deprecates the active one on that node") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.deploy("objrec", 1, "edge");
  r.adapt("objrec", 1, v({kLab}), "edge");
  r.deploy("objrec", 2, "edge");
  CHECK(r.get("objrec", 1).stage == Stage::deprecated);
  CHECK(r.get("objrec", 2).stage == Stage::deployed);
  REQUIRE(r.active_on("objrec", "edge") != nullptr);
  CHECK(r.active_on("objrec", "edge")->version == 2);
  CHECK(r.active_deployments().size() == 1);
  CHECK(r.mem_used("edge") == 2);
}

TEST_CASE("a version active elsewhere is not deprecated") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.deploy("objrec", 1, "edge");
  r.deploy("objrec", 1, "cloud");
  r.adapt("objrec", 1, v({kSim}), "cloud");
  r.deploy("objrec", 2, "edge");
  CHECK(r.get("objrec", 1).stage == Stage::deployed);
  r.deploy("objrec", 2, "cloud");
  CHECK(r.get("objrec", 1).stage == Stage::deprecated);
}

TEST_CASE("redeploying the active version is idempotent") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  const auto id = r.deploy("objrec", 1, "edge");
  CHECK(r.deploy("objrec", 1, "edge") == id);
  CHECK(r.active_deployments().size() == 1);
}

TEST_CASE("deprecated versions cannot be deployed or adapted") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.deploy("objrec", 1, "edge");
  r.adapt("objrec", 1, v({kSim}), "cloud");
  r.deploy("objrec", 2, "edge");
  CHECK_THROWS_AS(r.deploy("objrec", 1, "cloud"), StageError);
  CHECK_THROWS_AS(r.adapt("objrec", 1, v({kSim}), "cloud"), StageError);
}

TEST_CASE("capacity is additive and checked on deploy") {
  Registry r(fixture(5));
  r.register_train("a", v({kSim}), "cloud", profile(3));
  r.register_train("b", v({kSim}), "cloud", profile(3));
  r.register_train("c", v({kSim}), "cloud", profile(2));
  r.deploy("a", 1, "edge");
  CHECK_THROWS_AS(r.deploy("b", 1, "edge"), CapacityExceeded);
  CHECK_NOTHROW(r.deploy("c", 1, "edge"));
  CHECK(r.mem_used("edge") == 5);
}

TEST_CASE("replacing a version frees its memory first") {
  Registry r(fixture(3));
  r.register_train("a", v({kSim}), "cloud", profile(3));
  r.deploy("a", 1, "edge");
  r.adapt("a", 1, v({kLab}), "edge");
  CHECK_NOTHROW(r.deploy("a", 2, "edge"));
  CHECK(r.mem_used("edge") == 3);
}

TEST_CASE("failed calls leave the registry unchanged") {
  Registry r(fixture(3));
  r.register_train("a", v({kSim}), "cloud", profile(3));
  r.deploy("a", 1, "edge");
  const auto before = r.artifacts();
  const auto history = r.deployment_history();
  CHECK_THROWS(r.adapt("a", 1, v({kLab}), "cloud"));
  CHECK_THROWS(r.register_train("b", v({kLab, kDepot}), "edge", profile()));
  r.register_train("b", v({kSim}), "cloud", profile(1));
  CHECK_THROWS(r.deploy("b", 1, "edge"));
  CHECK(r.artifacts().size() == before.size() + 1);
  CHECK(r.deployment_history() == history);
}

TEST_CASE("ignore policy keeps weights public but data confined") {
  Registry r(fixture(), TaintPolicy::ignore);
  r.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK(r.adapt("objrec", 1, v({kLab}), "edge").taint == Taint::public_taint());
  CHECK_NOTHROW(r.deploy("objrec", 2, "cloud"));
  CHECK_THROWS_AS(r.adapt("objrec", 2, v({kLab}), "cloud"), PrivacyViolation);
}

TEST_CASE("versions increase and digests follow lineage") {
  Registry r(fixture());
  r.register_train("objrec", v({kSim}), "cloud", profile());
  r.adapt("objrec", 1, v({kLab}), "edge");
  r.adapt("objrec", 2, v({kLab}), "edge");
  CHECK(r.latest("objrec")->version == 3);
  CHECK(r.get("objrec", 2).weights_digest != r.get("objrec", 3).weights_digest);
  Registry again(fixture());
  again.register_train("objrec", v({kSim}), "cloud", profile());
  CHECK(again.get("objrec", 1).weights_digest == r.get("objrec", 1).weights_digest);
  CHECK_THROWS_AS(r.get("objrec", 9), UnknownModel);
}

TEST_CASE("manifest entries parse and round-trip") {
  const auto j = nlohmann::json::parse(R"({
    "model_id": "objrec", "version": 1, "task": "object_recognition",
    "request_bytes": 921600, "response_bytes": 2400,
    "compute_ms": {"cpu": {"mean": 52.34, "std": 4.18}, "gpu": {"mean": 33.27, "std": 3.09}},
    "compute_ms_by_node": {"ec2-east": {"mean": 31.93, "std": 1.53}},
    "mem_units": 2, "taint": "private:0"})");
  const auto e = manifest_entry_from_json(j);
  CHECK(e.artifact.model_id == "objrec");
  CHECK(e.artifact.profile.gpu.mean_ms == 33.27);
  CHECK(e.artifact.profile.by_node.at("ec2-east").std_ms == 1.53);
  CHECK(e.artifact.taint == Taint::private_to(0));
  CHECK(manifest_entry_from_json(manifest_entry_to_json(e)).artifact == e.artifact);

  topology::NodeSpec east;
  east.id = "ec2-east";
  east.accelerator = topology::Accelerator::gpu;
  CHECK(e.artifact.profile.compute_for(east).mean_ms == 31.93);
  east.id = "other";
  CHECK(e.artifact.profile.compute_for(east).mean_ms == 33.27);
  east.accelerator = topology::Accelerator::cpu;
  CHECK(e.artifact.profile.compute_for(east).mean_ms == 52.34);
}

TEST_CASE("manifest errors are reported") {
  CHECK_THROWS_AS(manifest_entry_from_json(nlohmann::json::parse(R"({"model_id":"x"})")), LifecycleError);
  auto j = nlohmann::json::parse(R"({"model_id": "x", "version": 1, "task": "toy_dior", "request_bytes": 16,
    "response_bytes": 32, "compute_ms": {"cpu": {"mean": -1, "std": 0}, "gpu": {"mean": 1, "std": 0}},
    "mem_units": 1, "taint": "public"})");
  CHECK_THROWS_AS(manifest_entry_from_json(j), LifecycleError);
}

TEST_CASE("manifest files resolve relative weight paths") {
  const auto dir = std::filesystem::temp_directory_path() / "fog_manifest_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "m.json") << R"([{"model_id": "dior", "version": 1, "task": "toy_dior", "request_bytes": 16,
    "response_bytes": 32, "compute_ms": {"cpu": {"mean": 0.05, "std": 0}, "gpu": {"mean": 0.05, "std": 0}},
    "mem_units": 1, "taint": "public", "weights": "w.json"}])";
  const auto m = load_manifest((dir / "m.json").string());
  REQUIRE(m.size() == 1);
  REQUIRE(m[0].weights_path);
  CHECK(std::filesystem::path(*m[0].weights_path) == dir / "w.json");
  std::filesystem::remove_all(dir);
}
