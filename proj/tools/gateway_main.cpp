#include <unistd.h>

#include <fstream>
#include <iostream>
#include <iterator>

#include "CLI11.hpp"
#include "gateway/core/types.hpp"
#include "gateway/error.hpp"
#include "gateway/harness/config.hpp"
#include "gateway/harness/control.hpp"
#include "gateway/harness/pipeline.hpp"
#include "gateway/harness/scenarios.hpp"
#include "signals.hpp"

namespace {

using nlohmann::json;
namespace harness = gateway::harness;

enum Exit { kOk = 0, kConfig = 1, kUnreachable = 2, kFailed = 3 };

int report_error(const json& response) {
  std::cerr << "error: " << response.value("error", "Unknown") << ": " << response.value("message", "") << '\n';
  return kFailed;
}

/// Sends one control request; exits through `code` on transport failure.
std::optional<json> call(const std::string& socket_flag, const json& request, int& code) {
  const auto socket = harness::control_socket_path(socket_flag);
  try {
    return harness::control_call(socket, request);
  } catch (const gateway::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    code = kUnreachable;
    return std::nullopt;
  }
}

int cmd_run(const std::string& config_path, const std::string& socket_flag) {
  const auto signals = gateway::tools::block_termination_signals();
  harness::PipelineConfig config;
  try {
    config = harness::load_config(config_path);
  } catch (const gateway::Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  const auto socket = !socket_flag.empty()          ? std::filesystem::path(socket_flag)
                      : !config.control_socket.empty() ? std::filesystem::path(config.control_socket)
                                                       : harness::control_socket_path("");
  try {
    harness::Gateway gateway(std::move(config));
    gateway.on_notify([](const std::string& line) { std::cout << line << std::endl; });
    gateway.on_shutdown([] { ::kill(::getpid(), SIGTERM); });
    harness::ControlServer server(socket, [&](const json& req) { return gateway.handle(req); });
    gateway.start();
    std::cout << "gateway running, control socket " << socket.string() << std::endl;
    const int sig = gateway::tools::wait_for_signal(signals);
    std::cout << "signal " << sig << ", draining" << std::endl;
    server.stop();
    gateway.stop(true);
  } catch (const gateway::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}

int cmd_trigger(const std::string& socket, const std::string& store, const std::string& provider,
                const std::string& input_path, const std::string& media_type) {
  json args = json::object();
  if (!input_path.empty()) {
    std::ifstream in(input_path, std::ios::binary);
    if (!in) {
      std::cerr << "error: cannot read " << input_path << '\n';
      return kConfig;
    }
    const gateway::Bytes data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    args["input_hex"] = gateway::to_hex(data);
    if (!media_type.empty()) args["media_type"] = media_type;
  }
  json request;
  if (!store.empty()) {
    args["store"] = store;
    request = {{"op", "produce"}, {"args", args}};
  } else {
    args["provider"] = provider;
    request = {{"op", "run"}, {"args", args}};
  }
  int code = kOk;
  const auto response = call(socket, request, code);
  if (!response) return code;
  if (!response->value("ok", false)) return report_error(*response);
  std::cout << response->at("request_id").get<std::string>() << '\n';
  return kOk;
}

int cmd_tail(const std::string& socket, const std::string& store, std::size_t n) {
  int code = kOk;
  const auto response = call(socket, {{"op", "tail"}, {"args", {{"store", store}, {"n", n}}}}, code);
  if (!response) return code;
  if (!response->value("ok", false)) {
    report_error(*response);
    return kConfig;
  }
  for (const auto& e : response->at("envelopes")) {
    std::cout << "data_id=" << e.at("data_id").get<std::uint64_t>() << " request_id=" << e.at("request_id").get<std::string>()
              << " media_type=" << e.at("media_type").get<std::string>() << " size=" << e.at("size").get<std::size_t>()
              << " preview=" << e.at("preview").get<std::string>() << '\n';
  }
  return kOk;
}

int cmd_status(const std::string& socket) {
  int code = kOk;
  const auto response = call(socket, {{"op", "status"}}, code);
  if (!response) return code;
  if (!response->value("ok", false)) {
    report_error(*response);
    return kConfig;
  }
  for (const auto& p : response->at("providers")) {
    std::cout << p.at("key").get<std::string>() << ' ' << p.at("state").get<std::string>()
              << " pending=" << p.at("pending").get<std::size_t>();
    if (!p.at("last_error").is_null()) std::cout << " last_error=\"" << p.at("last_error").get<std::string>() << '"';
    std::cout << '\n';
  }
  for (const auto& s : response->at("stores")) {
    std::cout << "store " << s.at("key").get<std::string>() << " size=" << s.at("size").get<std::size_t>()
              << " last_data_id=" << s.at("last_data_id").get<std::uint64_t>() << '\n';
  }
  return kOk;
}

int cmd_scenario(const std::string& id) {
  harness::ScenarioReport report;
  try {
    report = harness::run_scenario(id);
  } catch (const gateway::Error& e) {
    std::cerr << "error: " << e.what() << "; known scenarios:";
    for (const auto& s : harness::scenario_ids()) std::cerr << ' ' << s;
    std::cerr << '\n';
    return kConfig;
  }
  std::cout << report.to_text();
  return report.passed() ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IoT gateway daemon and control client"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string socket;
  app.add_option("--socket", socket, "Control socket path (default: $GATEWAY_SOCKET or /tmp/gateway.sock)");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Start the daemon and block until SIGINT/SIGTERM");
  run->add_option("--config", config_path, "Pipeline configuration (JSON)")->required();

  std::string store, provider, input, media_type;
  auto* trigger = app.add_subcommand("trigger", "Start a request and print its request id");
  auto* produce_opt = trigger->add_option("--produce", store, "Store to produce into");
  auto* run_opt = trigger->add_option("--run", provider, "Provider to run directly");
  produce_opt->excludes(run_opt);
  trigger->add_option("--input", input, "File stored as the request's input envelope");
  trigger->add_option("--media-type", media_type, "Media type of --input (default: sniffed)");

  std::string tail_store;
  std::size_t tail_n = 10;
  auto* tail = app.add_subcommand("tail", "Print the newest envelopes of a store");
  tail->add_option("--store", tail_store, "Store key")->required();
  tail->add_option("--n", tail_n, "Number of envelopes")->check(CLI::PositiveNumber);

  auto* status = app.add_subcommand("status", "Print provider states");

  std::string scenario_id;
  auto* scenario = app.add_subcommand("scenario", "Run a built-in end-to-end scenario");
  scenario->add_option("id", scenario_id, "Scenario id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  if (*trigger && store.empty() && provider.empty()) {
    std::cerr << "error: trigger needs --produce or --run\n";
    return kConfig;
  }

  if (*run) return cmd_run(config_path, socket);
  if (*trigger) return cmd_trigger(socket, store, provider, input, media_type);
  if (*tail) return cmd_tail(socket, tail_store, tail_n);
  if (*status) return cmd_status(socket);
  if (*scenario) return cmd_scenario(scenario_id);
  return kConfig;
}
