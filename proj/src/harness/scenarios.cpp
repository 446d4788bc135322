#include "gateway/harness/scenarios.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <thread>

#include "gateway/backends/adapters.hpp"
#include "gateway/backends/file_store.hpp"
#include "gateway/core/engine.hpp"
#include "gateway/error.hpp"
#include "gateway/harness/mocks.hpp"
#include "gateway/sources/camera.hpp"
#include "gateway/sources/oximeter.hpp"

namespace gateway::harness {

using namespace std::chrono_literals;
using std::chrono::milliseconds;

namespace {

constexpr auto kSettle = 5s;
constexpr std::uint32_t kImageWidth = 64;
constexpr std::uint32_t kImageHeight = 48;

struct Abort {};

class Recorder {
 public:
  explicit Recorder(ScenarioReport& report) : report_(report) {}

  bool check(std::string description, bool pass, std::string detail = {}) {
    report_.steps.push_back({std::move(description), pass, std::move(detail)});
    return pass;
  }
  /// Records the step and ends the scenario when it fails.
  void require(std::string description, bool pass, std::string detail = {}) {
    if (!check(std::move(description), pass, std::move(detail))) throw Abort{};
  }

 private:
  ScenarioReport& report_;
};

bool wait_until(const std::function<bool()>& pred, milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (!pred()) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(2ms);
  }
  return true;
}

exec::RuntimeConfig scenario_runtime() {
  exec::RuntimeConfig cfg;
  cfg.worker_count = 4;
  cfg.default_timeout = 8s;
  cfg.shutdown_grace = 1s;
  return cfg;
}

backends::BackendEndpointConfig endpoint(const std::string& url) {
  backends::BackendEndpointConfig cfg;
  cfg.master_url = url;
  cfg.poll_interval = 10ms;
  cfg.poll_limit = 500;
  cfg.connect_timeout = 1s;
  cfg.read_timeout = 5s;
  return cfg;
}

/// Every logged request of `server` carried `rid`.
bool all_tagged(const RequestLog& log, std::string_view server, const std::string& rid) {
  for (const auto& r : log.entries()) {
    if (r.server == server && r.request_id != rid) return false;
  }
  return true;
}

// Independent oracles; deliberately not shared with the transform code.
Bytes oracle_complement(const Bytes& ppm) {
  const auto header = sources::ppm_header(kImageWidth, kImageHeight).size();
  Bytes out = ppm;
  for (std::size_t i = header; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>(~out[i]);
  return out;
}

Bytes oracle_marker(const Bytes& in) {
  Bytes out = in;
  for (char c : std::string("DETECTED")) out.push_back(static_cast<std::uint8_t>(c));
  return out;
}

std::string describe(const Bytes& got, const Bytes& want) {
  std::ostringstream os;
  os << "got " << got.size() << " bytes, want " << want.size();
  const auto mismatch = std::mismatch(got.begin(), got.end(), want.begin(), want.end());
  if (mismatch.first != got.end() || mismatch.second != want.end())
    os << ", first difference at offset " << (mismatch.first - got.begin());
  return os.str();
}

void oximeter_fogbus(Recorder& rec) {
  MockClusterOptions mo;
  mo.fogbus = 0;
  MockCluster mocks(mo);

  core::Engine engine(scenario_runtime());
  engine.register_store("oximeter");
  engine.register_store("analysis");
  engine.register_provider({"fogbus", "analysis", core::InputSpec::Batch, std::nullopt},
                           backends::fogbus_body(endpoint(mocks.fogbus()->url()), backends::BatchSource{"oximeter", 64}));
  engine.start();

  sources::HypopneaEpisode episode;  // 5 baseline, 5 dipped, 5 baseline frames
  const std::size_t total = episode.lead_len + episode.dip_len + episode.tail_len;
  sources::StreamProfile profile;
  profile.rate_hz = 100.0;
  profile.waveform = episode;
  auto stream = sources::start_stream(engine, profile, "oximeter", "oximeter-stream");
  const bool finished = stream->wait_finished(5s);
  rec.require("stream emits the whole episode", finished && stream->emitted() == total,
              std::to_string(stream->emitted()) + " frames emitted");
  stream->stop();

  const auto frames = engine.retrieve_latest("oximeter", 64);
  std::size_t ordered = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto f = sources::decode_frame(frames[i].payload.view());
    ordered += frames[i].data_id == i + 1 && f.seq == i;
  }
  rec.require("frames stored in order", frames.size() == total && ordered == total,
              std::to_string(frames.size()) + " stored, " + std::to_string(ordered) + " in order");

  const auto rid = engine.produce_data("analysis");
  rec.require("analysis completes", engine.wait_idle(kSettle));
  const auto out = engine.retrieve_latest("analysis", 1);
  rec.require("one analysis envelope", out.size() == 1);
  const std::string want = "HYPOPNEA:" + std::to_string(episode.dip_len);
  const std::string got = to_string(out[0].payload.view());
  rec.check("count equals the scripted dip length", got == want, "got " + got + ", want " + want);
  rec.check("analysis carries the request id", out[0].request_id == rid && out[0].producer_key == "fogbus");

  const auto& log = *mocks.log();
  rec.check("FogBus saw exactly one request", log.count("fogbus") == 1 && log.count("fogbus", "POST", "/analyze") == 1,
            std::to_string(log.count("fogbus")) + " requests");
  rec.check("FogBus request tagged with the request id", all_tagged(log, "fogbus", core::format_request_id(rid)));
  engine.stop(true);
}

void camera_offload(Recorder& rec, bool aneka) {
  const std::string backend = aneka ? "aneka" : "edgelens";
  MockClusterOptions mo;
  if (aneka) {
    mo.aneka = 0;
    mo.blob = 0;
  } else {
    mo.edgelens_master = 0;
    mo.edgelens_worker = 0;
    mo.worker.pending_polls = 2;
  }
  MockCluster mocks(mo);

  core::Engine engine(scenario_runtime());
  engine.register_store("photo-raw");
  engine.register_store("detect-out");
  engine.register_provider({"camera", "photo-raw", core::InputSpec::None, std::nullopt},
                           sources::camera_body({kImageWidth, kImageHeight, "checker"}));
  if (aneka) {
    auto cfg = endpoint(mocks.aneka()->url());
    cfg.transfer = {backends::FileStoreConfig::Kind::HttpBlob, mocks.blob()->url()};
    engine.register_provider({"aneka", "detect-out", core::InputSpec::Single, std::nullopt},
                             backends::aneka_body(cfg, "append-marker"));
  } else {
    engine.register_provider({"edgelens", "detect-out", core::InputSpec::Single, std::nullopt},
                             backends::edgelens_body(endpoint(mocks.edgelens_master()->url())));
  }
  engine.attach_trigger("photo-raw", core::ProduceInto{"detect-out"});
  engine.start();

  const auto rid = engine.run_provider("camera");
  rec.require("pipeline settles", engine.wait_idle(kSettle));

  const Bytes photo = sources::capture(kImageWidth, kImageHeight, "checker").pixels;
  const auto raw = engine.retrieve_latest("photo-raw", 8);
  rec.require("one photo stored", raw.size() == 1, std::to_string(raw.size()) + " envelopes");
  rec.check("photo is the checker image", raw[0].payload.bytes() == photo, describe(raw[0].payload.bytes(), photo));

  const auto out = engine.retrieve_latest("detect-out", 8);
  rec.require("one detection stored", out.size() == 1,
              std::to_string(out.size()) + " envelopes; " + backend + " last_error: " +
                  engine.provider_state(backend).last_error.value_or("none"));
  const Bytes want = aneka ? oracle_marker(photo) : oracle_complement(photo);
  rec.check("detection is byte-exact", out[0].payload.bytes() == want, describe(out[0].payload.bytes(), want));
  rec.check("request id continuous across stores", raw[0].request_id == rid && out[0].request_id == rid,
            core::format_request_id(raw[0].request_id) + " -> " + core::format_request_id(out[0].request_id));
  rec.check("detection produced by " + backend, out[0].producer_key == backend, out[0].producer_key);

  const auto& log = *mocks.log();
  const auto hex = core::format_request_id(rid);
  if (aneka) {
    const auto polls = log.count("aneka", "GET", "/tasks/");
    const auto transfers = log.count("blob");
    rec.check("Aneka requests: 2 transfers + 1 submit + polls",
              transfers == 2 && log.count("blob", "PUT", "/blob/in/" + hex) == 1 &&
                  log.count("aneka", "POST", "/tasks") == 1 && polls == 3 && log.count("aneka") == 1 + polls,
              std::to_string(transfers) + " transfers, " + std::to_string(polls) + " polls");
    rec.check("Aneka requests tagged with the request id", all_tagged(log, "aneka", hex));
  } else {
    const auto polls = log.count("edgelens-worker", "GET", "/result/");
    const auto total = log.count("edgelens-master") + log.count("edgelens-worker");
    rec.check("EdgeLens requests: 3 + polls", polls == 3 && total == 3 + polls,
              std::to_string(total) + " requests, " + std::to_string(polls) + " polls");
    rec.check("EdgeLens requests tagged with the request id",
              all_tagged(log, "edgelens-master", hex) && all_tagged(log, "edgelens-worker", hex));
  }
  engine.stop(true);
}

void chooser_fallback(Recorder& rec) {
  const auto root = std::filesystem::temp_directory_path() /
                    ("gateway-fallback-" + std::to_string(std::random_device{}()));
  struct Cleanup {
    std::filesystem::path p;
    ~Cleanup() {
      std::error_code ec;
      std::filesystem::remove_all(p, ec);
    }
  } cleanup{root};

  MockClusterOptions mo;
  mo.edgelens_master = 0;
  mo.edgelens_worker = 0;
  mo.aneka = 0;
  mo.aneka_root = root.string();
  MockCluster mocks(mo);

  core::Engine engine(scenario_runtime());
  engine.register_store("detect-out");
  engine.register_provider({"edgelens", "detect-out", core::InputSpec::Single, std::nullopt},
                           backends::edgelens_body(endpoint(mocks.edgelens_master()->url())));
  auto aneka_cfg = endpoint(mocks.aneka()->url());
  aneka_cfg.transfer = {backends::FileStoreConfig::Kind::LocalDirectory, root.string()};
  engine.register_provider({"aneka", "detect-out", core::InputSpec::Single, std::nullopt},
                           backends::aneka_body(aneka_cfg, "append-marker"));
  core::ChooserPolicy policy{"detect-out", {"edgelens", "aneka"}, core::ChooserMode::PriorityWithBusySkip, true};
  engine.set_chooser(policy);
  engine.start();

  const auto image = sources::capture(kImageWidth, kImageHeight, "checker");
  auto photo = [&] {
    core::DataEnvelope env;
    env.payload = Payload(image.pixels);
    env.media_type = std::string(sources::kPpmMediaType);
    return env;
  };
  auto state = [&](const std::string& key) { return engine.provider_state(key).state; };
  auto producer_of = [&](std::uint64_t rid) -> std::string {
    for (const auto& env : engine.retrieve_latest("detect-out", 64)) {
      if (env.request_id == rid) return env.producer_key;
    }
    return {};
  };

  // jam edgelens: its job never completes while the worker holds results
  mocks.edgelens_worker()->set_hold(true);
  engine.produce_data("detect-out", photo());
  rec.require("edgelens takes the first request", wait_until([&] { return mocks.edgelens_worker()->jobs() == 1; }, kSettle) &&
                                                      state("edgelens") == exec::ProviderState::Running);
  const auto second = engine.produce_data("detect-out", photo());
  const bool served = wait_until([&] { return !producer_of(second).empty(); }, kSettle);
  rec.check("aneka selected while edgelens Running",
            served && producer_of(second) == "aneka" && state("edgelens") == exec::ProviderState::Running,
            "served by '" + producer_of(second) + "', edgelens " + std::string(exec::to_string(state("edgelens"))));
  mocks.edgelens_worker()->set_hold(false);
  rec.require("jammed request completes", engine.wait_idle(kSettle));

  // fail edgelens permanently: the master stops assigning workers
  mocks.edgelens_master()->set_workers({});
  const auto failing = engine.produce_data("detect-out", photo());
  rec.require("failing request settles", engine.wait_idle(kSettle));
  const auto st = engine.provider_state("edgelens");
  rec.check("edgelens Failed with NoWorkerAssigned",
            st.state == exec::ProviderState::Failed && st.last_error &&
                st.last_error->find(to_string(Errc::NoWorkerAssigned)) != std::string::npos && producer_of(failing).empty(),
            st.last_error.value_or("no error"));

  const auto third = engine.produce_data("detect-out", photo());
  rec.require("request settles", engine.wait_idle(kSettle));
  rec.check("Idle aneka preferred over Failed edgelens", producer_of(third) == "aneka", producer_of(third));

  // jam aneka: with fallback on, the Failed edgelens is retried
  mocks.aneka()->set_hold(true);
  const auto master_before = mocks.log()->count("edgelens-master");
  engine.produce_data("detect-out", photo());
  rec.require("aneka takes the request", wait_until([&] { return state("aneka") == exec::ProviderState::Running; }, kSettle));
  engine.produce_data("detect-out", photo());
  const bool retried = wait_until([&] { return mocks.log()->count("edgelens-master") > master_before; }, kSettle);
  rec.check("fallback retries Failed edgelens while aneka Running", retried);
  rec.require("retry settles", wait_until([&] { return state("edgelens") != exec::ProviderState::Running; }, kSettle));

  policy.fallback_on_failure = false;
  engine.set_chooser(policy);
  std::string refused;
  try {
    engine.produce_data("detect-out", photo());
  } catch (const Error& e) {
    refused = std::string(to_string(e.code()));
  }
  rec.check("without fallback the request is refused", refused == to_string(Errc::AllCandidatesUnavailable),
            refused.empty() ? "accepted" : refused);

  mocks.aneka()->set_hold(false);
  rec.require("pipeline settles", engine.wait_idle(kSettle));
  engine.stop(true);
}

}  // namespace

bool ScenarioReport::passed() const {
  return !steps.empty() && std::all_of(steps.begin(), steps.end(), [](const ScenarioStep& s) { return s.pass; });
}

std::string ScenarioReport::to_text() const {
  std::ostringstream os;
  os << "scenario " << scenario_id << '\n';
  for (const auto& s : steps) {
    os << "  [" << (s.pass ? "ok" : "FAIL") << "] " << s.description;
    if (!s.detail.empty()) os << " (" << s.detail << ')';
    os << '\n';
  }
  os << (passed() ? "PASS" : "FAIL") << ' ' << scenario_id << " in " << elapsed.count() << " ms\n";
  return os.str();
}

void ScenarioReport::raise_if_failed() const {
  for (const auto& s : steps) {
    if (!s.pass) throw Error(Errc::ScenarioFailed, scenario_id + ": " + s.description + (s.detail.empty() ? "" : " (" + s.detail + ")"));
  }
  if (steps.empty()) throw Error(Errc::ScenarioFailed, scenario_id + ": no steps ran");
}

const std::vector<std::string>& scenario_ids() {
  static const std::vector<std::string> ids{"oximeter-fogbus", "camera-edgelens", "camera-aneka", "chooser-fallback"};
  return ids;
}

ScenarioReport run_scenario(std::string_view id) {
  std::function<void(Recorder&)> body;
  if (id == "oximeter-fogbus") body = oximeter_fogbus;
  else if (id == "camera-edgelens") body = [](Recorder& r) { camera_offload(r, false); };
  else if (id == "camera-aneka") body = [](Recorder& r) { camera_offload(r, true); };
  else if (id == "chooser-fallback") body = chooser_fallback;
  else throw Error(Errc::InvalidArgument, "unknown scenario '" + std::string(id) + "'");

  ScenarioReport report;
  report.scenario_id = std::string(id);
  Recorder rec(report);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(rec);
  } catch (const Abort&) {
  } catch (const std::exception& e) {
    rec.check("scenario ran without errors", false, e.what());
  }
  report.elapsed = std::chrono::duration_cast<milliseconds>(std::chrono::steady_clock::now() - t0);
  return report;
}

}  // namespace gateway::harness
