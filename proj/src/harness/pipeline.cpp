#include "gateway/harness/pipeline.hpp"

#include <set>

#include "gateway/backends/adapters.hpp"
#include "gateway/error.hpp"
#include "gateway/sources/camera.hpp"

namespace gateway::harness {

using nlohmann::json;

namespace {

constexpr std::size_t kPreviewBytes = 16;

core::ProviderBody body_for(const ProviderConfig& p) {
  switch (p.kind) {
    case ProviderKind::Camera: return sources::camera_body(camera_settings(p));
    case ProviderKind::OximeterStream: return sources::oximeter_read_body(stream_profile(p).waveform);
    case ProviderKind::FogBus: return backends::fogbus_body(endpoint_settings(p), batch_source(p));
    case ProviderKind::EdgeLens: return backends::edgelens_body(endpoint_settings(p));
    case ProviderKind::Aneka: return backends::aneka_body(endpoint_settings(p), transform_setting(p));
    case ProviderKind::Local: return backends::local_body(transform_setting(p), batch_source(p));
    case ProviderKind::BitmapConvert: return sources::bitmap_convert_body();
  }
  throw Error(Errc::InvalidArgument, "unhandled provider kind");
}

json error_response(const Error& e) {
  return {{"ok", false}, {"error", std::string(to_string(e.code()))}, {"message", e.detail()}};
}

std::optional<core::DataEnvelope> input_envelope(const json& args, const core::RequestContext& ctx) {
  if (!args.contains("input_hex")) return std::nullopt;
  core::DataEnvelope env;
  env.request_id = ctx.request_id;
  env.payload = Payload(from_hex(args.at("input_hex").get<std::string>()));
  env.media_type = args.contains("media_type") ? args.at("media_type").get<std::string>()
                                               : sniff_media_type(env.payload.view());
  return env;
}

}  // namespace

std::string sniff_media_type(ByteView bytes) {
  if (sources::parse_ppm(bytes)) return std::string(sources::kPpmMediaType);
  return "application/octet-stream";
}

Gateway::Gateway(PipelineConfig config) : config_(std::move(config)) {
  validate(config_);
  engine_ = std::make_unique<core::Engine>(exec::RuntimeConfig::from_env(config_.runtime));
  for (const auto& s : config_.stores) engine_->register_store(s.key, s.capacity);
  for (const auto& p : config_.providers) {
    engine_->register_provider({p.key, p.output_store, input_spec_for(p), p.timeout}, body_for(p));
    if (p.kind == ProviderKind::OximeterStream && stream_autostart(p))
      autostart_.emplace_back(p.key, stream_profile(p));
  }
  std::set<std::string> sinks;
  for (const auto& t : config_.triggers) {
    if (t.start_provider) engine_->attach_trigger(t.store, core::StartProvider{*t.start_provider});
    if (t.produce) engine_->attach_trigger(t.store, core::ProduceInto{*t.produce});
    if (t.notify) {
      if (sinks.insert(*t.notify).second) {
        engine_->register_sink(*t.notify, [this, id = *t.notify](const core::DataEnvelope& env,
                                                                 const core::RequestContext& ctx) {
          std::function<void(const std::string&)> fn;
          {
            std::lock_guard lk(mu_);
            fn = notify_;
          }
          if (fn)
            fn("notify sink=" + id + " data_id=" + std::to_string(env.data_id) +
               " request_id=" + core::format_request_id(ctx.request_id) + " size=" + std::to_string(env.payload.size()));
        });
      }
      engine_->attach_trigger(t.store, core::Notify{*t.notify});
    }
  }
  for (const auto& c : config_.choosers) engine_->set_chooser(c);
}

Gateway::~Gateway() { stop(false); }

void Gateway::start() {
  std::lock_guard lk(mu_);
  if (started_) throw Error(Errc::AlreadyRunning, "gateway already started");
  engine_->start();
  for (const auto& [key, profile] : autostart_) {
    const auto* p = config_.find_provider(key);
    streams_.push_back(sources::start_stream(*engine_, profile, p->output_store, key));
  }
  started_ = true;
}

void Gateway::stop(bool drain) {
  std::vector<std::unique_ptr<sources::OximeterStream>> streams;
  {
    std::lock_guard lk(mu_);
    if (!started_) return;
    started_ = false;
    streams.swap(streams_);
  }
  for (auto& s : streams) s->stop();
  engine_->stop(drain);
}

void Gateway::on_shutdown(std::function<void()> fn) {
  std::lock_guard lk(mu_);
  shutdown_ = std::move(fn);
}

void Gateway::on_notify(std::function<void(const std::string&)> fn) {
  std::lock_guard lk(mu_);
  notify_ = std::move(fn);
}

json Gateway::handle(const json& request) {
  try {
    if (!request.is_object() || !request.contains("op") || !request.at("op").is_string())
      throw Error(Errc::InvalidArgument, "request needs a string 'op'");
    const json args = request.value("args", json::object());
    if (!args.is_object()) throw Error(Errc::InvalidArgument, "'args' must be an object");
    const auto op = request.at("op").get<std::string>();
    json response = dispatch(op, args);
    if (op == "shutdown") {
      std::function<void()> fn;
      {
        std::lock_guard lk(mu_);
        fn = shutdown_;
      }
      if (fn) fn();
    }
    return response;
  } catch (const Error& e) {
    return error_response(e);
  } catch (const json::exception& e) {
    return error_response(Error(Errc::InvalidArgument, e.what()));
  }
}

json Gateway::dispatch(const std::string& op, const json& args) {
  if (op == "produce" || op == "run") {
    const bool produce = op == "produce";
    const auto target = args.at(produce ? "store" : "provider").get<std::string>();
    const auto ctx = engine_->new_request("control");
    core::ProviderInput input;
    if (auto env = input_envelope(args, ctx)) input = std::move(*env);
    const auto rid = produce ? engine_->produce_data(target, std::move(input), ctx)
                             : engine_->run_provider(target, std::move(input), ctx);
    return {{"ok", true}, {"request_id", core::format_request_id(rid)}};
  }
  if (op == "tail") {
    const auto store = args.at("store").get<std::string>();
    const auto n = args.value("n", std::size_t{10});
    json out = json::array();
    for (const auto& env : engine_->retrieve_latest(store, n)) {
      out.push_back({{"data_id", env.data_id},
                     {"request_id", core::format_request_id(env.request_id)},
                     {"media_type", env.media_type},
                     {"producer", env.producer_key},
                     {"size", env.payload.size()},
                     {"preview", to_hex(env.payload.view(), kPreviewBytes)}});
    }
    return {{"ok", true}, {"envelopes", std::move(out)}};
  }
  if (op == "status") {
    json providers = json::array();
    for (const auto& key : engine_->provider_keys()) {
      const auto st = engine_->provider_state(key);
      providers.push_back({{"key", key},
                           {"state", std::string(exec::to_string(st.state))},
                           {"pending", st.pending},
                           {"last_error", st.last_error ? json(*st.last_error) : json(nullptr)}});
    }
    json stores = json::array();
    for (const auto& key : engine_->store_keys()) {
      const auto& s = engine_->store_ref(key);
      stores.push_back({{"key", key}, {"size", s.size()}, {"last_data_id", s.last_data_id()}});
    }
    return {{"ok", true}, {"providers", std::move(providers)}, {"stores", std::move(stores)}};
  }
  if (op == "shutdown") return {{"ok", true}};
  throw Error(Errc::InvalidArgument, "unknown op '" + op + "'");
}

}  // namespace gateway::harness
