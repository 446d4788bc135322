#include "gateway/backends/adapters.hpp"

#include <condition_variable>
#include <mutex>

#include "gateway/backends/transforms.hpp"
#include "gateway/core/engine.hpp"
#include "gateway/error.hpp"
#include "http_session.hpp"
#include "json.hpp"

namespace gateway::backends {

using detail::HttpSession;
using detail::raise_transport;
using detail::trim;
using nlohmann::json;

void BackendEndpointConfig::validate() const {
  if (master_url.empty()) throw Error(Errc::InvalidArgument, "master_url is empty");
  if (poll_limit == 0) throw Error(Errc::InvalidArgument, "poll_limit must be positive");
  if (poll_interval.count() < 0) throw Error(Errc::InvalidArgument, "poll_interval must be >= 0");
  if (connect_timeout.count() <= 0 || read_timeout.count() <= 0)
    throw Error(Errc::InvalidArgument, "timeouts must be positive");
}

namespace {

httplib::Headers request_headers(std::uint64_t request_id) {
  return {{std::string(kRequestIdHeader), core::format_request_id(request_id)}};
}

std::string body_of(ByteView bytes) { return std::string(bytes.begin(), bytes.end()); }

/// Sleeps unless cancelled first; throws Cancelled in that case.
void pause(milliseconds d, std::stop_token stop) {
  if (d.count() == 0) {
    if (stop.stop_requested()) throw Error(Errc::Cancelled, "cancelled while polling");
    return;
  }
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lk(mu);
  if (cv.wait_for(lk, stop, d, [] { return false; }) || stop.stop_requested())
    throw Error(Errc::Cancelled, "cancelled while polling");
}

[[noreturn]] void raise_status(const httplib::Response& res, const std::string& what) {
  throw Error(Errc::BackendError, what + " returned " + std::to_string(res.status) +
                                      (res.body.empty() ? "" : ": " + res.body.substr(0, 200)),
              res.status);
}

}  // namespace

Bytes fogbus_analyze(ByteView payload, std::uint64_t request_id, const BackendEndpointConfig& cfg) {
  HttpSession master(cfg.master_url, cfg.connect_timeout, cfg.read_timeout);
  auto res = master.post("/analyze", body_of(payload), "application/octet-stream", request_headers(request_id));
  if (!res) raise_transport(res.error(), "POST /analyze");
  if (res->status != 200) raise_status(*res, "POST /analyze");
  return to_bytes(res->body);
}

Bytes edgelens_detect(ByteView image, std::uint64_t request_id, const BackendEndpointConfig& cfg,
                      std::stop_token stop) {
  const auto headers = request_headers(request_id);

  // 1) designated worker; the master connection is not kept past this step
  std::string worker_url;
  {
    HttpSession master(cfg.master_url, cfg.connect_timeout, cfg.read_timeout);
    auto assigned = master.get("/worker", headers);
    if (!assigned) raise_transport(assigned.error(), "GET /worker");
    if (assigned->status == 204) throw Error(Errc::NoWorkerAssigned, "master has no worker");
    if (assigned->status != 200) raise_status(*assigned, "GET /worker");
    worker_url = trim(assigned->body);
  }
  if (worker_url.empty()) throw Error(Errc::NoWorkerAssigned, "master returned an empty worker address");

  // 2) upload straight to the worker
  HttpSession worker(worker_url, cfg.connect_timeout, cfg.read_timeout);
  auto uploaded = worker.post("/upload", body_of(image), "application/octet-stream", headers);
  if (!uploaded) raise_transport(uploaded.error(), "POST /upload");
  if (uploaded->status != 200) raise_status(*uploaded, "POST /upload");
  const std::string job = trim(uploaded->body);
  if (job.empty()) throw Error(Errc::BackendError, "worker returned an empty job id");

  // 3) start
  auto started = worker.post("/execute/" + job, "", "text/plain", headers);
  if (!started) raise_transport(started.error(), "POST /execute");
  if (started->status != 202 && started->status != 200) raise_status(*started, "POST /execute/" + job);

  // 4) poll for the result
  for (std::size_t poll = 1; poll <= cfg.poll_limit; ++poll) {
    auto result = worker.get("/result/" + job, headers);
    if (!result) raise_transport(result.error(), "GET /result");
    if (result->status == 200) return to_bytes(result->body);
    if (result->status != 404) raise_status(*result, "GET /result/" + job);
    if (poll < cfg.poll_limit) pause(cfg.poll_interval, stop);
  }
  throw Error(Errc::PollExhausted, "job " + job + " not ready after " + std::to_string(cfg.poll_limit) + " polls");
}

Bytes aneka_detect(ByteView image, std::uint64_t request_id, const BackendEndpointConfig& cfg,
                   std::string_view transform_id, std::stop_token stop) {
  const auto headers = request_headers(request_id);
  auto files = make_file_store(cfg.transfer);
  const std::string input_path = "in/" + core::format_request_id(request_id);
  files->put(input_path, image);

  HttpSession master(cfg.master_url, cfg.connect_timeout, cfg.read_timeout);
  const json submission{{"input", input_path}, {"transform", std::string(transform_id)}};
  auto submitted = master.post("/tasks", submission.dump(), "application/json", headers);
  if (!submitted) raise_transport(submitted.error(), "POST /tasks");
  if (submitted->status != 200) raise_status(*submitted, "POST /tasks");

  std::string task_id;
  try {
    task_id = json::parse(submitted->body).at("task_id").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(Errc::BackendError, std::string("bad task receipt: ") + e.what(), submitted->status);
  }

  for (std::size_t poll = 1; poll <= cfg.poll_limit; ++poll) {
    auto status = master.get("/tasks/" + task_id, headers);
    if (!status) raise_transport(status.error(), "GET /tasks");
    if (status->status != 200) raise_status(*status, "GET /tasks/" + task_id);

    std::string state;
    json doc;
    try {
      doc = json::parse(status->body);
      state = doc.at("state").get<std::string>();
    } catch (const json::exception& e) {
      throw Error(Errc::BackendError, std::string("bad task status: ") + e.what(), status->status);
    }
    if (state == "Completed") {
      if (!doc.contains("result_ref") || !doc["result_ref"].is_string())
        throw Error(Errc::BackendError, "completed task " + task_id + " has no result_ref");
      return files->get(doc["result_ref"].get<std::string>());
    }
    if (state == "Failed") throw Error(Errc::TaskFailed, "task " + task_id + " failed");
    if (state != "Submitted" && state != "Running")
      throw Error(Errc::BackendError, "task " + task_id + " in unknown state '" + state + "'");
    if (poll < cfg.poll_limit) pause(cfg.poll_interval, stop);
  }
  throw Error(Errc::PollExhausted,
              "task " + task_id + " not complete after " + std::to_string(cfg.poll_limit) + " polls");
}

// provider bodies ----------------------------------------------------------------

namespace {

Bytes gather(core::ExecutionContext& ctx, const std::optional<BatchSource>& batch) {
  if (std::holds_alternative<std::monostate>(ctx.input) && batch) {
    return core::flatten(ctx.engine.retrieve_latest(batch->store_key, batch->window));
  }
  return core::flatten(ctx.input);
}

Bytes require_image(core::ExecutionContext& ctx, const char* who) {
  Bytes image = core::flatten(ctx.input);
  if (image.empty()) throw Error(Errc::InvalidArgument, std::string(who) + " needs a nonempty input image");
  return image;
}

}  // namespace

core::ProviderBody fogbus_body(BackendEndpointConfig cfg, std::optional<BatchSource> batch) {
  cfg.validate();
  return [cfg = std::move(cfg), batch = std::move(batch)](core::ExecutionContext& ctx) {
    const Bytes payload = gather(ctx, batch);
    return core::ProviderResult{fogbus_analyze(payload, ctx.request.request_id, cfg), "text/plain"};
  };
}

core::ProviderBody edgelens_body(BackendEndpointConfig cfg) {
  cfg.validate();
  return [cfg = std::move(cfg)](core::ExecutionContext& ctx) {
    const Bytes image = require_image(ctx, "edgelens");
    return core::ProviderResult{edgelens_detect(image, ctx.request.request_id, cfg, ctx.stop),
                                core::input_media_type(ctx.input)};
  };
}

core::ProviderBody aneka_body(BackendEndpointConfig cfg, std::string transform_id) {
  cfg.validate();
  if (!is_known_transform(transform_id))
    throw Error(Errc::UnknownTransform, "unknown transform '" + transform_id + "'");
  return [cfg = std::move(cfg), transform_id = std::move(transform_id)](core::ExecutionContext& ctx) {
    const Bytes image = require_image(ctx, "aneka");
    return core::ProviderResult{aneka_detect(image, ctx.request.request_id, cfg, transform_id, ctx.stop),
                                core::input_media_type(ctx.input)};
  };
}

core::ProviderBody local_body(std::string transform_id, std::optional<BatchSource> batch) {
  if (!is_known_transform(transform_id))
    throw Error(Errc::UnknownTransform, "unknown transform '" + transform_id + "'");
  return [transform_id = std::move(transform_id), batch = std::move(batch)](core::ExecutionContext& ctx) {
    const Bytes input = gather(ctx, batch);
    return core::ProviderResult{apply_transform(transform_id, input),
                                transform_media_type(transform_id, core::input_media_type(ctx.input))};
  };
}

}  // namespace gateway::backends
