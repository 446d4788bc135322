#include <iostream>

#include "CLI11.hpp"
#include "gateway/error.hpp"
#include "gateway/harness/mocks.hpp"
#include "signals.hpp"

namespace harness = gateway::harness;

int main(int argc, char** argv) {
  CLI::App app{"Mock offloading backends"};
  app.require_subcommand(1);
  harness::MockClusterOptions options;
  int fogbus = -1, master = -1, worker = -1, aneka = -1, blob = -1;
  auto* serve = app.add_subcommand("serve", "Serve the selected mocks until SIGINT/SIGTERM");
  serve->add_option("--fogbus", fogbus, "FogBus master port (0 = any)");
  serve->add_option("--edgelens-master", master, "EdgeLens master port");
  serve->add_option("--edgelens-worker", worker, "EdgeLens worker port");
  serve->add_option("--aneka", aneka, "Aneka master port");
  serve->add_option("--blob", blob, "Blob file store port");
  serve->add_option("--pending-polls", options.worker.pending_polls, "EdgeLens result polls answered 404 per job");
  serve->add_option("--worker-transform", options.worker.transform, "EdgeLens worker transform");
  serve->add_option("--aneka-root", options.aneka_root, "Directory shared with Aneka clients when no blob server runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  auto port = [](int p) { return p >= 0 ? std::optional<int>(p) : std::nullopt; };
  options.fogbus = port(fogbus);
  options.edgelens_master = port(master);
  options.edgelens_worker = port(worker);
  options.aneka = port(aneka);
  options.blob = port(blob);
  if (!options.fogbus && !options.edgelens_master && !options.edgelens_worker && !options.aneka && !options.blob) {
    std::cerr << "error: select at least one mock\n";
    return 1;
  }

  const auto signals = gateway::tools::block_termination_signals();
  try {
    harness::MockCluster cluster(options);
    cluster.log()->set_echo([](const std::string& line) { std::cout << line << std::endl; });
    for (const harness::MockServer* s : std::initializer_list<const harness::MockServer*>{
             cluster.fogbus(), cluster.edgelens_master(), cluster.edgelens_worker(), cluster.aneka(), cluster.blob()}) {
      if (s) std::cout << s->name() << " listening on " << s->url() << std::endl;
    }
    gateway::tools::wait_for_signal(signals);
    cluster.stop();
  } catch (const gateway::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
