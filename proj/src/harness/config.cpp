#include "gateway/harness/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "gateway/backends/transforms.hpp"
#include "gateway/error.hpp"

namespace gateway::harness {

using nlohmann::json;
using std::chrono::milliseconds;

namespace {

constexpr std::pair<ProviderKind, std::string_view> kKindNames[] = {
    {ProviderKind::Camera, "camera"},     {ProviderKind::OximeterStream, "oximeter-stream"},
    {ProviderKind::FogBus, "fogbus"},     {ProviderKind::EdgeLens, "edgelens"},
    {ProviderKind::Aneka, "aneka"},       {ProviderKind::Local, "local"},
    {ProviderKind::BitmapConvert, "bitmap-convert"},
};

[[noreturn]] void parse_error(const std::string& msg) { throw Error(Errc::ParseError, msg); }

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!obj.is_object()) parse_error(where + ": expected an object");
  for (const auto& [k, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || a == k;
    if (!ok) parse_error(where + ": unknown field '" + k + "'");
  }
}

template <class T>
T field(const json& obj, const char* name, T fallback, const std::string& where) {
  if (!obj.contains(name)) return fallback;
  try {
    return obj.at(name).get<T>();
  } catch (const json::exception&) {
    parse_error(where + ": field '" + name + "' has the wrong type");
  }
}

template <class T>
T required(const json& obj, const char* name, const std::string& where) {
  if (!obj.contains(name)) parse_error(where + ": missing field '" + name + "'");
  return field<T>(obj, name, T{}, where);
}

std::string where_of(const ProviderConfig& p) { return "provider '" + p.key + "'"; }

int bounded_int(const json& obj, const char* name, int fallback, int lo, int hi, const std::string& where) {
  const int v = field<int>(obj, name, fallback, where);
  if (v < lo || v > hi)
    parse_error(where + ": '" + name + "' must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return v;
}

}  // namespace

std::string_view to_string(ProviderKind k) noexcept {
  for (const auto& [kind, name] : kKindNames) {
    if (kind == k) return name;
  }
  return "?";
}

std::optional<ProviderKind> parse_provider_kind(std::string_view name) {
  for (const auto& [kind, n] : kKindNames) {
    if (n == name) return kind;
  }
  return std::nullopt;
}

const ProviderConfig* PipelineConfig::find_provider(std::string_view key) const {
  for (const auto& p : providers) {
    if (p.key == key) return &p;
  }
  return nullptr;
}

const StoreConfig* PipelineConfig::find_store(std::string_view key) const {
  for (const auto& s : stores) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

// settings readers -------------------------------------------------------------

sources::CameraSettings camera_settings(const ProviderConfig& p) {
  const auto w = where_of(p);
  check_keys(p.settings, {"width", "height", "pattern"}, w);
  sources::CameraSettings s;
  s.width = static_cast<std::uint32_t>(bounded_int(p.settings, "width", 64, 1, 4096, w));
  s.height = static_cast<std::uint32_t>(bounded_int(p.settings, "height", 48, 1, 4096, w));
  s.pattern = field<std::string>(p.settings, "pattern", "checker", w);
  try {
    (void)sources::capture(1, 1, s.pattern);
  } catch (const Error& e) {
    parse_error(w + ": " + e.what());
  }
  return s;
}

sources::StreamProfile stream_profile(const ProviderConfig& p) {
  const auto w = where_of(p);
  check_keys(p.settings, {"rate_hz", "jitter_ms", "autostart", "waveform"}, w);
  sources::StreamProfile profile;
  profile.rate_hz = field<double>(p.settings, "rate_hz", 1.0, w);
  profile.jitter_ms = static_cast<unsigned>(bounded_int(p.settings, "jitter_ms", 0, 0, 60'000, w));
  const json wave = p.settings.value("waveform", json{{"type", "constant"}});
  const std::string ww = w + " waveform";
  const auto type = field<std::string>(wave, "type", "constant", ww);
  if (type == "constant") {
    check_keys(wave, {"type", "spo2", "pulse_bpm"}, ww);
    profile.waveform = sources::ConstantWave{field<int>(wave, "spo2", 98, ww), field<int>(wave, "pulse_bpm", 72, ww)};
  } else if (type == "scripted") {
    check_keys(wave, {"type", "frames"}, ww);
    sources::ScriptedWave s;
    for (const auto& f : required<json>(wave, "frames", ww)) {
      check_keys(f, {"spo2", "pulse_bpm"}, ww + " frame");
      s.frames.push_back({static_cast<std::uint8_t>(bounded_int(f, "spo2", 0, 0, 100, ww)),
                          static_cast<std::uint8_t>(bounded_int(f, "pulse_bpm", 72, 0, 255, ww)), 0});
    }
    profile.waveform = std::move(s);
  } else if (type == "hypopnea_episode") {
    check_keys(wave, {"type", "baseline", "dip_depth", "dip_len", "pulse_bpm", "lead_len", "tail_len"}, ww);
    sources::HypopneaEpisode h;
    h.baseline = field<int>(wave, "baseline", h.baseline, ww);
    h.dip_depth = field<int>(wave, "dip_depth", h.dip_depth, ww);
    h.dip_len = field<std::size_t>(wave, "dip_len", h.dip_len, ww);
    h.pulse_bpm = field<int>(wave, "pulse_bpm", h.pulse_bpm, ww);
    h.lead_len = field<std::size_t>(wave, "lead_len", h.lead_len, ww);
    h.tail_len = field<std::size_t>(wave, "tail_len", h.tail_len, ww);
    profile.waveform = h;
  } else {
    parse_error(ww + ": unknown type '" + type + "'");
  }
  try {
    profile.validate();
  } catch (const Error& e) {
    parse_error(w + ": " + e.what());
  }
  return profile;
}

bool stream_autostart(const ProviderConfig& p) { return field<bool>(p.settings, "autostart", true, where_of(p)); }

backends::BackendEndpointConfig endpoint_settings(const ProviderConfig& p) {
  const auto w = where_of(p);
  check_keys(p.settings,
             {"master_url", "poll_interval_ms", "poll_limit", "connect_timeout_ms", "read_timeout_ms", "file_store",
              "transform", "batch_from", "batch_window"},
             w);
  backends::BackendEndpointConfig cfg;
  cfg.master_url = required<std::string>(p.settings, "master_url", w);
  cfg.poll_interval = milliseconds(field<long>(p.settings, "poll_interval_ms", cfg.poll_interval.count(), w));
  cfg.poll_limit = field<std::size_t>(p.settings, "poll_limit", cfg.poll_limit, w);
  cfg.connect_timeout = milliseconds(field<long>(p.settings, "connect_timeout_ms", cfg.connect_timeout.count(), w));
  cfg.read_timeout = milliseconds(field<long>(p.settings, "read_timeout_ms", cfg.read_timeout.count(), w));
  if (p.kind == ProviderKind::Aneka) {
    const json fs = required<json>(p.settings, "file_store", w);
    check_keys(fs, {"kind", "root"}, w + " file_store");
    const auto kind = required<std::string>(fs, "kind", w);
    if (kind == "local-directory") cfg.transfer.kind = backends::FileStoreConfig::Kind::LocalDirectory;
    else if (kind == "http-blob") cfg.transfer.kind = backends::FileStoreConfig::Kind::HttpBlob;
    else parse_error(w + ": unknown file_store kind '" + kind + "'");
    cfg.transfer.root = required<std::string>(fs, "root", w);
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    parse_error(w + ": " + e.what());
  }
  return cfg;
}

std::optional<backends::BatchSource> batch_source(const ProviderConfig& p) {
  const auto w = where_of(p);
  if (!p.settings.contains("batch_from")) return std::nullopt;
  backends::BatchSource b{required<std::string>(p.settings, "batch_from", w),
                          field<std::size_t>(p.settings, "batch_window", 64, w)};
  if (b.window == 0) parse_error(w + ": batch_window must be positive");
  return b;
}

std::string transform_setting(const ProviderConfig& p) {
  const auto w = where_of(p);
  std::string t = p.kind == ProviderKind::Local ? required<std::string>(p.settings, "transform", w)
                                                : field<std::string>(p.settings, "transform", "append-marker", w);
  if (!backends::is_known_transform(t)) parse_error(w + ": unknown transform '" + t + "'");
  return t;
}

core::InputSpec input_spec_for(const ProviderConfig& p) {
  switch (p.kind) {
    case ProviderKind::Camera:
    case ProviderKind::OximeterStream: return core::InputSpec::None;
    case ProviderKind::FogBus: return core::InputSpec::Batch;
    case ProviderKind::Local:
      return transform_setting(p) == backends::kHypopneaCount ? core::InputSpec::Batch : core::InputSpec::Single;
    default: return core::InputSpec::Single;
  }
}

// parse / validate ---------------------------------------------------------------

PipelineConfig parse_config(const json& doc) {
  PipelineConfig cfg;
  try {
    check_keys(doc, {"stores", "providers", "triggers", "choosers", "runtime", "control_socket", "allow_cycle"},
               "config");
    cfg.control_socket = field<std::string>(doc, "control_socket", "", "config");
    cfg.allow_cycle = field<bool>(doc, "allow_cycle", false, "config");

    if (doc.contains("runtime")) {
      const json& r = doc.at("runtime");
      check_keys(r, {"worker_count", "default_timeout_ms", "pending_queue_depth", "shutdown_grace_ms", "queue_capacity"},
                 "runtime");
      auto& rt = cfg.runtime;
      rt.worker_count = field<std::size_t>(r, "worker_count", rt.worker_count, "runtime");
      rt.default_timeout = milliseconds(field<long>(r, "default_timeout_ms", rt.default_timeout.count(), "runtime"));
      rt.pending_queue_depth = field<std::size_t>(r, "pending_queue_depth", rt.pending_queue_depth, "runtime");
      rt.shutdown_grace = milliseconds(field<long>(r, "shutdown_grace_ms", rt.shutdown_grace.count(), "runtime"));
      rt.queue_capacity = field<std::size_t>(r, "queue_capacity", rt.queue_capacity, "runtime");
    }

    for (const auto& s : doc.value("stores", json::array())) {
      check_keys(s, {"key", "capacity"}, "store");
      cfg.stores.push_back({required<std::string>(s, "key", "store"),
                            field<std::size_t>(s, "capacity", core::kDefaultStoreCapacity, "store")});
    }
    for (const auto& p : doc.value("providers", json::array())) {
      check_keys(p, {"key", "kind", "output_store", "settings", "timeout_ms"}, "provider");
      ProviderConfig pc;
      pc.key = required<std::string>(p, "key", "provider");
      const auto kind = required<std::string>(p, "kind", "provider '" + pc.key + "'");
      auto parsed = parse_provider_kind(kind);
      if (!parsed) parse_error("provider '" + pc.key + "': unknown kind '" + kind + "'");
      pc.kind = *parsed;
      pc.output_store = required<std::string>(p, "output_store", "provider '" + pc.key + "'");
      pc.settings = p.value("settings", json::object());
      if (!pc.settings.is_object()) parse_error("provider '" + pc.key + "': settings must be an object");
      if (p.contains("timeout_ms")) pc.timeout = milliseconds(field<long>(p, "timeout_ms", 0, "provider"));
      cfg.providers.push_back(std::move(pc));
    }
    for (const auto& t : doc.value("triggers", json::array())) {
      check_keys(t, {"store", "start_provider", "produce", "notify"}, "trigger");
      TriggerConfig tc;
      tc.store = required<std::string>(t, "store", "trigger");
      if (t.contains("start_provider")) tc.start_provider = field<std::string>(t, "start_provider", "", "trigger");
      if (t.contains("produce")) tc.produce = field<std::string>(t, "produce", "", "trigger");
      if (t.contains("notify")) tc.notify = field<std::string>(t, "notify", "", "trigger");
      cfg.triggers.push_back(std::move(tc));
    }
    for (const auto& c : doc.value("choosers", json::array())) {
      check_keys(c, {"store", "candidates", "mode", "fallback_on_failure"}, "chooser");
      core::ChooserPolicy policy;
      policy.store_key = required<std::string>(c, "store", "chooser");
      policy.candidates = required<std::vector<std::string>>(c, "candidates", "chooser");
      const auto mode = field<std::string>(c, "mode", "priority", "chooser");
      if (mode == "priority") policy.mode = core::ChooserMode::PriorityWithBusySkip;
      else if (mode == "round-robin") policy.mode = core::ChooserMode::RoundRobin;
      else parse_error("chooser: unknown mode '" + mode + "'");
      policy.fallback_on_failure = field<bool>(c, "fallback_on_failure", true, "chooser");
      cfg.choosers.push_back(std::move(policy));
    }
  } catch (const json::exception& e) {
    parse_error(e.what());
  }
  validate(cfg);
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) parse_error("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    parse_error(path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

void validate(const PipelineConfig& cfg) {
  auto unknown = [](const std::string& msg) { throw Error(Errc::UnknownReference, msg); };

  try {
    cfg.runtime.validate();
  } catch (const Error& e) {
    parse_error(std::string("runtime: ") + e.what());
  }

  std::set<std::string> keys;
  for (const auto& s : cfg.stores) {
    if (s.key.empty()) parse_error("store key must be nonempty");
    if (s.capacity == 0) parse_error("store '" + s.key + "': capacity must be positive");
    if (!keys.insert(s.key).second) parse_error("duplicate store '" + s.key + "'");
  }
  keys.clear();
  for (const auto& p : cfg.providers) {
    if (p.key.empty()) parse_error("provider key must be nonempty");
    if (!keys.insert(p.key).second) parse_error("duplicate provider '" + p.key + "'");
    if (!cfg.find_store(p.output_store))
      unknown("provider '" + p.key + "' outputs to unknown store '" + p.output_store + "'");
    switch (p.kind) {
      case ProviderKind::Camera: (void)camera_settings(p); break;
      case ProviderKind::OximeterStream: (void)stream_profile(p); break;
      case ProviderKind::FogBus:
      case ProviderKind::EdgeLens: (void)endpoint_settings(p); break;
      case ProviderKind::Aneka:
        (void)endpoint_settings(p);
        (void)transform_setting(p);
        break;
      case ProviderKind::Local:
        check_keys(p.settings, {"transform", "batch_from", "batch_window"}, where_of(p));
        (void)transform_setting(p);
        break;
      case ProviderKind::BitmapConvert: check_keys(p.settings, {}, where_of(p)); break;
    }
    if (auto b = batch_source(p); b && !cfg.find_store(b->store_key))
      unknown("provider '" + p.key + "' batches from unknown store '" + b->store_key + "'");
    if (p.timeout && p.timeout->count() <= 0) parse_error("provider '" + p.key + "': timeout_ms must be positive");
  }

  // store -> stores it can cause writes into
  std::map<std::string, std::set<std::string>> edges;
  for (const auto& t : cfg.triggers) {
    if (!cfg.find_store(t.store)) unknown("trigger on unknown store '" + t.store + "'");
    const int actions = t.start_provider.has_value() + t.produce.has_value() + t.notify.has_value();
    if (actions != 1) parse_error("trigger on '" + t.store + "' must have exactly one action");
    if (t.start_provider) {
      const auto* p = cfg.find_provider(*t.start_provider);
      if (!p) unknown("trigger starts unknown provider '" + *t.start_provider + "'");
      edges[t.store].insert(p->output_store);
    }
    if (t.produce) {
      if (!cfg.find_store(*t.produce)) unknown("trigger produces into unknown store '" + *t.produce + "'");
      edges[t.store].insert(*t.produce);
    }
  }

  for (const auto& c : cfg.choosers) {
    if (!cfg.find_store(c.store_key)) unknown("chooser for unknown store '" + c.store_key + "'");
    if (c.candidates.empty()) parse_error("chooser for '" + c.store_key + "' has no candidates");
    for (const auto& k : c.candidates) {
      const auto* p = cfg.find_provider(k);
      if (!p) unknown("chooser candidate '" + k + "' is not a provider");
      if (p->output_store != c.store_key)
        throw Error(Errc::OutputMismatch, "chooser candidate '" + k + "' outputs to '" + p->output_store + "'");
    }
  }

  if (cfg.allow_cycle) return;
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> marks;
  std::function<void(const std::string&, std::vector<std::string>&)> visit = [&](const std::string& node,
                                                                                   std::vector<std::string>& path) {
    marks[node] = Mark::Active;
    path.push_back(node);
    for (const auto& next : edges[node]) {
      if (marks[next] == Mark::Active) {
        std::string cycle;
        for (auto it = std::find(path.begin(), path.end(), next); it != path.end(); ++it) cycle += *it + " -> ";
        throw Error(Errc::CycleDetected, "trigger cycle: " + cycle + next);
      }
      if (marks[next] == Mark::None) visit(next, path);
    }
    path.pop_back();
    marks[node] = Mark::Done;
  };
  for (const auto& s : cfg.stores) {
    std::vector<std::string> path;
    if (marks[s.key] == Mark::None) visit(s.key, path);
  }
}

json to_json(const PipelineConfig& cfg) {
  json doc;
  if (!cfg.control_socket.empty()) doc["control_socket"] = cfg.control_socket;
  doc["allow_cycle"] = cfg.allow_cycle;
  doc["runtime"] = {{"worker_count", cfg.runtime.worker_count},
                    {"default_timeout_ms", cfg.runtime.default_timeout.count()},
                    {"pending_queue_depth", cfg.runtime.pending_queue_depth},
                    {"shutdown_grace_ms", cfg.runtime.shutdown_grace.count()},
                    {"queue_capacity", cfg.runtime.queue_capacity}};
  doc["stores"] = json::array();
  for (const auto& s : cfg.stores) doc["stores"].push_back({{"key", s.key}, {"capacity", s.capacity}});
  doc["providers"] = json::array();
  for (const auto& p : cfg.providers) {
    json j{{"key", p.key}, {"kind", std::string(to_string(p.kind))}, {"output_store", p.output_store},
           {"settings", p.settings}};
    if (p.timeout) j["timeout_ms"] = p.timeout->count();
    doc["providers"].push_back(std::move(j));
  }
  doc["triggers"] = json::array();
  for (const auto& t : cfg.triggers) {
    json j{{"store", t.store}};
    if (t.start_provider) j["start_provider"] = *t.start_provider;
    if (t.produce) j["produce"] = *t.produce;
    if (t.notify) j["notify"] = *t.notify;
    doc["triggers"].push_back(std::move(j));
  }
  doc["choosers"] = json::array();
  for (const auto& c : cfg.choosers) {
    doc["choosers"].push_back({{"store", c.store_key},
                               {"candidates", c.candidates},
                               {"mode", std::string(core::to_string(c.mode))},
                               {"fallback_on_failure", c.fallback_on_failure}});
  }
  return doc;
}

}  // namespace gateway::harness
