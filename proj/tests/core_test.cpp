#include <gtest/gtest.h>

#include <algorithm>
#include <latch>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "chooser_tables.hpp"
#include "gateway/core/engine.hpp"
#include "gateway/error.hpp"
#include "support.hpp"

namespace gateway::core {
namespace {

using namespace std::chrono_literals;
using exec::ProviderState;
using testing::eventually;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

exec::RuntimeConfig quick(std::size_t workers = 4) {
  exec::RuntimeConfig c;
  c.worker_count = workers;
  c.default_timeout = 5s;
  c.shutdown_grace = 1s;
  return c;
}

ProviderBody constant(std::string text, std::string media = "text/plain") {
  return [text, media](ExecutionContext&) { return ProviderResult{to_bytes(text), media}; };
}

/// Body that blocks until released, then echoes its input.
struct Gate {
  std::atomic<bool> open{false};
  std::atomic<int> entered{0};
  ProviderBody body() {
    return [this](ExecutionContext& ctx) {
      ++entered;
      while (!open && !ctx.stop.stop_requested()) std::this_thread::sleep_for(1ms);
      return ProviderResult{flatten(ctx.input), "application/octet-stream"};
    };
  }
};

class EngineTest : public ::testing::Test {
 protected:
  void SetUp() override { engine.start(); }
  void TearDown() override {
    if (engine.running()) engine.stop(false);
  }
  void settle() { ASSERT_TRUE(engine.wait_idle(5s)); }
  std::uint64_t put(const std::string& store, const std::string& text) {
    return engine.store(store, Payload(to_bytes(text)), "text/plain", engine.new_request("test"));
  }
  Engine engine{quick()};
};

// stores ------------------------------------------------------------------------

TEST_F(EngineTest, FreshStoreIsEmpty) {
  auto& s = engine.register_store("oximeter-raw", 1024);
  EXPECT_EQ(s.size(), 0u);
  EXPECT_TRUE(engine.retrieve_latest("oximeter-raw", 5).empty());
}

TEST_F(EngineTest, RegisterStoreErrors) {
  engine.register_store("oximeter-raw", 8);
  EXPECT_EQ(code_of([&] { engine.register_store("oximeter-raw", 8); }), Errc::DuplicateKey);
  EXPECT_EQ(code_of([&] { engine.register_store("x", 0); }), Errc::InvalidCapacity);
  EXPECT_EQ(code_of([&] { engine.register_store("", 1); }), Errc::InvalidArgument);
}

TEST_F(EngineTest, FirstIdIsOneAndRoundTrip) {
  engine.register_store("s");
  const auto ctx = engine.new_request("test");
  const auto id = engine.store("s", Payload(to_bytes("abc")), "text/plain", ctx);
  EXPECT_EQ(id, 1u);
  const auto a = engine.retrieve("s", id);
  const auto b = engine.retrieve("s", id);
  EXPECT_EQ(gateway::to_string(a.payload.view()), "abc");
  EXPECT_EQ(a.media_type, "text/plain");
  EXPECT_EQ(a.request_id, ctx.request_id);
  EXPECT_EQ(a.producer_key, "external");
  EXPECT_EQ(a.payload, b.payload);
}

TEST_F(EngineTest, NineIntoEightEvictsOldest) {
  engine.register_store("s", 8);
  for (int i = 0; i < 9; ++i) put("s", std::to_string(i));
  EXPECT_EQ(code_of([&] { engine.retrieve("s", 1); }), Errc::NotFound);
  for (std::uint64_t id = 2; id <= 9; ++id) EXPECT_EQ(gateway::to_string(engine.retrieve("s", id).payload.view()), std::to_string(id - 1));
}

TEST_F(EngineTest, RetrieveLatest) {
  engine.register_store("s", 8);
  for (int i = 0; i < 3; ++i) put("s", std::to_string(i));
  auto two = engine.retrieve_latest("s", 2);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0].data_id, 2u);
  EXPECT_EQ(two[1].data_id, 3u);
  for (int i = 3; i < 10; ++i) put("s", std::to_string(i));
  auto all = engine.retrieve_latest("s", 20);
  ASSERT_EQ(all.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(all[i].data_id, i + 3);
}

TEST_F(EngineTest, UnknownStore) {
  EXPECT_EQ(code_of([&] { put("nope", "x"); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.retrieve("nope", 1); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.retrieve_latest("nope", 1); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.produce_data("nope"); }), Errc::UnknownStore);
  engine.register_store("s");
  EXPECT_EQ(code_of([&] { engine.retrieve("s", 1); }), Errc::NotFound);
}

TEST_F(EngineTest, EvictionPropertyRandomized) {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    const std::size_t cap = 1 + rng() % 16;
    const std::size_t n = rng() % 40;
    const auto key = "s" + std::to_string(round);
    engine.register_store(key, cap);
    for (std::size_t i = 0; i < n; ++i) put(key, "p");
    const std::uint64_t lo = n > cap ? n - cap + 1 : 1;
    for (std::uint64_t id = 1; id <= n + 1; ++id) {
      const bool expect = id >= lo && id <= n;
      bool found = true;
      try {
        engine.retrieve(key, id);
      } catch (const Error&) {
        found = false;
      }
      EXPECT_EQ(found, expect) << "cap=" << cap << " n=" << n << " id=" << id;
    }
  }
}

TEST_F(EngineTest, ConcurrentStoresAreGapFree) {
  engine.register_store("s", 100'000);
  constexpr int kThreads = 8, kEach = 500;
  std::vector<std::vector<std::uint64_t>> ids(kThreads);
  std::latch go(kThreads);
  {
    std::vector<std::jthread> threads;
    for (int t = 0; t < kThreads; ++t) {
      threads.emplace_back([&, t] {
        go.arrive_and_wait();
        for (int i = 0; i < kEach; ++i) ids[t].push_back(put("s", "x"));
      });
    }
  }
  std::vector<std::uint64_t> all;
  for (auto& v : ids) {
    EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
    all.insert(all.end(), v.begin(), v.end());
  }
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), static_cast<std::size_t>(kThreads * kEach));
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i + 1);
}

// providers ----------------------------------------------------------------------

TEST_F(EngineTest, RegisterProvider) {
  engine.register_store("photo-raw");
  engine.register_provider({"cam", "photo-raw"}, constant("img"));
  EXPECT_EQ(engine.provider_state("cam").state, ProviderState::Idle);
  EXPECT_EQ(code_of([&] { engine.register_provider({"cam", "photo-raw"}, constant("x")); }), Errc::DuplicateKey);
  EXPECT_EQ(code_of([&] { engine.register_provider({"x", "nope"}, constant("x")); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.provider_state("nope"); }), Errc::UnknownProvider);
  EXPECT_EQ(code_of([&] { engine.run_provider("nope"); }), Errc::UnknownProvider);
}

TEST_F(EngineTest, RunProviderStoresUnderItsRequest) {
  engine.register_store("photo-raw");
  engine.register_provider({"cam", "photo-raw"}, constant("img", "image/x-portable-pixmap"));
  const auto r = engine.run_provider("cam");
  settle();
  const auto out = engine.retrieve_latest("photo-raw", 5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].request_id, r);
  EXPECT_EQ(out[0].producer_key, "cam");
  EXPECT_EQ(out[0].media_type, "image/x-portable-pixmap");

  const auto ctx = engine.new_request("explicit");
  EXPECT_EQ(engine.run_provider("cam", {}, ctx), ctx.request_id);
  settle();
  EXPECT_EQ(engine.retrieve_latest("photo-raw", 1)[0].request_id, ctx.request_id);
}

TEST_F(EngineTest, BodyFailureMarksFailedAndStoresNothing) {
  engine.register_store("s");
  std::atomic<int> calls{0};
  engine.register_provider({"p", "s"}, [&](ExecutionContext&) -> ProviderResult {
    if (calls++ == 0) throw Error(Errc::BackendError, "boom");
    return {to_bytes("ok"), "text/plain"};
  });
  engine.run_provider("p");
  settle();
  auto st = engine.provider_state("p");
  EXPECT_EQ(st.state, ProviderState::Failed);
  ASSERT_TRUE(st.last_error);
  EXPECT_NE(st.last_error->find("boom"), std::string::npos);
  EXPECT_EQ(engine.store_ref("s").size(), 0u);

  // retry from Failed
  engine.run_provider("p");
  settle();
  EXPECT_EQ(engine.provider_state("p").state, ProviderState::Idle);
  EXPECT_EQ(engine.store_ref("s").size(), 1u);
}

TEST_F(EngineTest, RunningWhileBodyExecutes) {
  engine.register_store("s");
  Gate gate;
  engine.register_provider({"p", "s"}, gate.body());
  engine.run_provider("p");
  ASSERT_TRUE(eventually([&] { return gate.entered == 1; }));
  EXPECT_EQ(engine.provider_state("p").state, ProviderState::Running);
  gate.open = true;
  settle();
  EXPECT_EQ(engine.provider_state("p").state, ProviderState::Idle);
}

TEST_F(EngineTest, TimeoutFailsProvider) {
  engine.register_store("s");
  Gate gate;
  engine.register_provider({"slow", "s", InputSpec::None, 50ms}, gate.body());
  engine.run_provider("slow");
  settle();
  auto st = engine.provider_state("slow");
  EXPECT_EQ(st.state, ProviderState::Failed);
  ASSERT_TRUE(st.last_error);
  EXPECT_NE(st.last_error->find("Timeout"), std::string::npos);
  EXPECT_EQ(engine.store_ref("s").size(), 0u);
}

TEST_F(EngineTest, ExpiredDeadlineFailsBeforeBody) {
  engine.register_store("s");
  std::atomic<bool> ran{false};
  engine.register_provider({"p", "s"}, [&](ExecutionContext&) {
    ran = true;
    return ProviderResult{};
  });
  auto ctx = engine.new_request("test");
  ctx.deadline = std::chrono::steady_clock::now() - 1ms;
  engine.run_provider("p", {}, ctx);
  settle();
  EXPECT_FALSE(ran);
  EXPECT_EQ(engine.provider_state("p").state, ProviderState::Failed);
}

TEST_F(EngineTest, InputNormalization) {
  engine.register_store("in");
  engine.register_store("out");
  std::atomic<std::size_t> batch_size{0};
  engine.register_provider({"batch", "out", InputSpec::Batch}, [&](ExecutionContext& ctx) {
    batch_size = std::get<std::vector<DataEnvelope>>(ctx.input).size();
    return ProviderResult{};
  });
  engine.register_provider({"single", "out", InputSpec::Single}, constant("x"));
  put("in", "a");
  engine.run_provider("batch", engine.retrieve("in", 1));
  settle();
  EXPECT_EQ(batch_size.load(), 1u);
  EXPECT_EQ(code_of([&] {
              engine.run_provider("single", std::vector<DataEnvelope>{engine.retrieve("in", 1), engine.retrieve("in", 1)});
            }),
            Errc::InvalidArgument);
}

// triggers -------------------------------------------------------------------------

TEST_F(EngineTest, StartProviderTriggerRunsOncePerEvent) {
  engine.register_store("photo-raw");
  engine.register_store("photo-bitmap");
  std::mutex mu;
  std::vector<std::uint64_t> inputs;
  engine.register_provider({"bitmap", "photo-bitmap", InputSpec::Single}, [&](ExecutionContext& ctx) {
    std::lock_guard lk(mu);
    inputs.push_back(std::get<DataEnvelope>(ctx.input).data_id);
    return ProviderResult{flatten(ctx.input), "image/bmp"};
  });
  engine.attach_trigger("photo-raw", StartProvider{"bitmap"});
  const auto ctx = engine.new_request("test");
  engine.store("photo-raw", Payload(to_bytes("img")), "image/x-portable-pixmap", ctx);
  settle();
  ASSERT_EQ(inputs, std::vector<std::uint64_t>{1});
  const auto out = engine.retrieve_latest("photo-bitmap", 5);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].request_id, ctx.request_id);
}

TEST_F(EngineTest, TriggerErrors) {
  engine.register_store("s");
  EXPECT_EQ(code_of([&] { engine.attach_trigger("nope", Notify{"x"}); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.attach_trigger("s", StartProvider{"nope"}); }), Errc::UnknownProvider);
  EXPECT_EQ(code_of([&] { engine.attach_trigger("s", ProduceInto{"nope"}); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.set_trigger_enabled(999, false); }), Errc::NotFound);
}

TEST_F(EngineTest, TriggersFireInRegistrationOrderOnStoringThread) {
  engine.register_store("s");
  std::vector<std::string> order;
  std::set<std::thread::id> threads;
  for (const char* id : {"t1", "t2", "t3"}) {
    engine.register_sink(id, [&, id](const DataEnvelope&, const RequestContext&) {
      order.push_back(id);
      threads.insert(std::this_thread::get_id());
    });
    engine.attach_trigger("s", Notify{id});
  }
  put("s", "x");
  EXPECT_EQ(order, (std::vector<std::string>{"t1", "t2", "t3"}));
  EXPECT_EQ(threads, std::set<std::thread::id>{std::this_thread::get_id()});
  const auto events = engine.store_ref("s").events();
  EXPECT_EQ(std::count_if(events.begin(), events.end(), [](const std::string& e) { return e.starts_with("notify sink=t1"); }), 1);
}

TEST_F(EngineTest, DisabledTriggerDoesNotFire) {
  engine.register_store("s");
  int fired = 0;
  engine.register_sink("x", [&](const DataEnvelope&, const RequestContext&) { ++fired; });
  const auto id = engine.attach_trigger("s", Notify{"x"});
  engine.set_trigger_enabled(id, false);
  put("s", "a");
  EXPECT_EQ(fired, 0);
  engine.set_trigger_enabled(id, true);
  put("s", "b");
  EXPECT_EQ(fired, 1);
}

TEST_F(EngineTest, SinkMayStoreWithoutDeadlock) {
  engine.register_store("a");
  engine.register_store("b");
  engine.register_sink("copy", [&](const DataEnvelope& env, const RequestContext& ctx) {
    engine.store("b", env.payload, env.media_type, ctx);
  });
  engine.attach_trigger("a", Notify{"copy"});
  const auto ctx = engine.new_request("test");
  engine.store("a", Payload(to_bytes("x")), "text/plain", ctx);
  ASSERT_EQ(engine.store_ref("b").size(), 1u);
  EXPECT_EQ(engine.retrieve("b", 1).request_id, ctx.request_id);
}

TEST_F(EngineTest, BusyTargetQueuesInputsInOrder) {
  engine.register_store("in");
  engine.register_store("out");
  Gate gate;
  engine.register_provider({"echo", "out", InputSpec::Single}, gate.body());
  engine.attach_trigger("in", StartProvider{"echo"});
  put("in", "first");
  ASSERT_TRUE(eventually([&] { return gate.entered == 1; }));
  put("in", "second");
  put("in", "third");
  EXPECT_EQ(engine.provider_state("echo").pending, 2u);
  gate.open = true;
  settle();
  const auto out = engine.retrieve_latest("out", 10);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(gateway::to_string(out[0].payload.view()), "first");
  EXPECT_EQ(gateway::to_string(out[1].payload.view()), "second");
  EXPECT_EQ(gateway::to_string(out[2].payload.view()), "third");
}

TEST(EngineQueue, OverflowLogsDeliveryFailure) {
  auto cfg = quick();
  cfg.pending_queue_depth = 2;
  Engine engine(cfg);
  engine.start();
  engine.register_store("in");
  engine.register_store("out");
  Gate gate;
  engine.register_provider({"echo", "out", InputSpec::Single}, gate.body());
  engine.attach_trigger("in", StartProvider{"echo"});
  auto put = [&](const char* s) { engine.store("in", Payload(to_bytes(s)), "text/plain", engine.new_request("t")); };
  put("1");
  ASSERT_TRUE(eventually([&] { return gate.entered == 1; }));
  put("2");
  put("3");
  put("4");
  const auto events = engine.store_ref("in").events();
  ASSERT_EQ(events.size(), 1u);
  EXPECT_TRUE(events[0].starts_with("delivery-failed"));
  EXPECT_NE(events[0].find("data_id=4"), std::string::npos);
  EXPECT_EQ(code_of([&] { engine.run_provider("echo", engine.retrieve("in", 1)); }), Errc::QueueFull);
  gate.open = true;
  ASSERT_TRUE(engine.wait_idle(5s));
  EXPECT_EQ(engine.store_ref("out").size(), 3u);
  engine.stop(true);
}

TEST_F(EngineTest, RequestIdChainsThroughTriggers) {
  engine.register_store("a");
  engine.register_store("b");
  engine.register_store("c");
  engine.register_provider({"src", "a"}, constant("x"));
  engine.register_provider({"ab", "b", InputSpec::Single}, [](ExecutionContext& c) {
    return ProviderResult{flatten(c.input), "text/plain"};
  });
  engine.register_provider({"bc", "c", InputSpec::Single}, [](ExecutionContext& c) {
    return ProviderResult{flatten(c.input), "text/plain"};
  });
  engine.attach_trigger("a", StartProvider{"ab"});
  engine.attach_trigger("b", ProduceInto{"c"});
  std::set<std::uint64_t> rids;
  for (int i = 0; i < 5; ++i) rids.insert(engine.run_provider("src"));
  settle();
  EXPECT_EQ(rids.size(), 5u);
  for (const auto* key : {"a", "b", "c"}) {
    std::set<std::uint64_t> seen;
    for (const auto& env : engine.retrieve_latest(key, 10)) seen.insert(env.request_id);
    EXPECT_EQ(seen, rids) << key;
  }
}

// arbitration ------------------------------------------------------------------------

TEST(Choose, TruthTables) {
  using testing::Table;
  auto check = [](const Table& table, ChooserMode mode, bool fallback, bool after_a) {
    for (const auto& row : table) {
      ChooserPolicy policy{"s", {"A", "B"}, mode, fallback};
      StateMap states{{"A", row.a}, {"B", row.b}};
      std::size_t cursor = after_a ? 0 : static_cast<std::size_t>(-1);
      std::optional<std::string> got;
      try {
        got = choose(policy, states, cursor);
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::AllCandidatesUnavailable);
      }
      EXPECT_EQ(got, row.pick) << "A=" << exec::to_string(row.a) << " B=" << exec::to_string(row.b);
    }
  };
  check(testing::kPriorityFallback, ChooserMode::PriorityWithBusySkip, true, false);
  check(testing::kPriorityNoFallback, ChooserMode::PriorityWithBusySkip, false, false);
  // priority ignores any cursor
  check(testing::kPriorityFallback, ChooserMode::PriorityWithBusySkip, true, true);
  check(testing::kPriorityFallback, ChooserMode::RoundRobin, true, false);
  check(testing::kPriorityNoFallback, ChooserMode::RoundRobin, false, false);
  check(testing::kRoundRobinAfterAFallback, ChooserMode::RoundRobin, true, true);
  check(testing::kRoundRobinAfterANoFallback, ChooserMode::RoundRobin, false, true);
}

TEST(Choose, DeterministicAndNeverRunningWhileIdleExists) {
  std::mt19937 rng(11);
  const ProviderState all[] = {ProviderState::Idle, ProviderState::Running, ProviderState::Failed};
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + rng() % 5;
    ChooserPolicy policy{"s", {}, ChooserMode::PriorityWithBusySkip, rng() % 2 == 0};
    StateMap states;
    bool any_idle = false;
    for (std::size_t k = 0; k < n; ++k) {
      policy.candidates.push_back("p" + std::to_string(k));
      states[policy.candidates.back()] = all[rng() % 3];
      any_idle = any_idle || states[policy.candidates.back()] == ProviderState::Idle;
    }
    std::string first, second;
    try {
      first = choose(policy, states);
      second = choose(policy, states);
    } catch (const Error&) {
      EXPECT_FALSE(any_idle);
      continue;
    }
    EXPECT_EQ(first, second);
    EXPECT_NE(states[first], ProviderState::Running);
    if (any_idle) {
      EXPECT_EQ(states[first], ProviderState::Idle);
    }
  }
}

TEST(Choose, MissingStateOrNoCandidates) {
  EXPECT_EQ(code_of([] { choose({"s", {"A"}}, {}); }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { choose({"s", {}}, {}); }), Errc::InvalidArgument);
}

TEST_F(EngineTest, SetChooserErrors) {
  engine.register_store("detect-out");
  engine.register_store("other");
  engine.register_provider({"edgelens", "detect-out"}, constant("e"));
  engine.register_provider({"aneka", "detect-out"}, constant("a"));
  engine.register_provider({"misc", "other"}, constant("m"));
  EXPECT_EQ(code_of([&] { engine.set_chooser({"nope", {"edgelens"}}); }), Errc::UnknownStore);
  EXPECT_EQ(code_of([&] { engine.set_chooser({"detect-out", {"nope"}}); }), Errc::UnknownProvider);
  EXPECT_EQ(code_of([&] { engine.set_chooser({"detect-out", {"edgelens", "misc"}}); }), Errc::OutputMismatch);
  EXPECT_EQ(code_of([&] { engine.set_chooser({"detect-out", {}}); }), Errc::InvalidArgument);
  engine.set_chooser({"detect-out", {"edgelens", "aneka"}});
  engine.produce_data("detect-out");
  settle();
  EXPECT_EQ(engine.retrieve_latest("detect-out", 1)[0].producer_key, "edgelens");
}

TEST_F(EngineTest, ProduceDataBusySkip) {
  engine.register_store("detect-out");
  Gate gate;
  engine.register_provider({"A", "detect-out"}, gate.body());
  engine.register_provider({"B", "detect-out"}, constant("b"));
  engine.set_chooser({"detect-out", {"A", "B"}});
  engine.produce_data("detect-out");
  ASSERT_TRUE(eventually([&] { return gate.entered == 1; }));
  const auto r = engine.produce_data("detect-out");
  ASSERT_TRUE(eventually([&] { return engine.store_ref("detect-out").size() == 1; }));
  const auto out = engine.retrieve_latest("detect-out", 1)[0];
  EXPECT_EQ(out.producer_key, "B");
  EXPECT_EQ(out.request_id, r);
  gate.open = true;
  settle();
}

TEST_F(EngineTest, ProduceDataAllUnavailableAndNoProvider) {
  engine.register_store("empty");
  EXPECT_EQ(code_of([&] { engine.produce_data("empty"); }), Errc::NoProvider);
  engine.register_store("s");
  Gate g1, g2;
  engine.register_provider({"A", "s"}, g1.body());
  engine.register_provider({"B", "s"}, g2.body());
  engine.set_chooser({"s", {"A", "B"}});
  engine.produce_data("s");
  engine.produce_data("s");
  ASSERT_TRUE(eventually([&] { return g1.entered == 1 && g2.entered == 1; }));
  EXPECT_EQ(code_of([&] { engine.produce_data("s"); }), Errc::AllCandidatesUnavailable);
  g1.open = g2.open = true;
  settle();
}

TEST_F(EngineTest, SingleProviderProduceEqualsRun) {
  engine.register_store("s");
  engine.register_provider({"only", "s"}, constant("x"));
  const auto r = engine.produce_data("s");
  settle();
  EXPECT_EQ(engine.retrieve("s", 1).request_id, r);
  EXPECT_EQ(engine.retrieve("s", 1).producer_key, "only");
}

TEST_F(EngineTest, RoundRobinRotates) {
  engine.register_store("s");
  engine.register_provider({"A", "s"}, constant("a"));
  engine.register_provider({"B", "s"}, constant("b"));
  engine.set_chooser({"s", {"A", "B"}, ChooserMode::RoundRobin, true});
  std::string seq;
  for (int i = 0; i < 4; ++i) {
    engine.produce_data("s");
    settle();
    seq += engine.retrieve_latest("s", 1)[0].producer_key;
  }
  EXPECT_EQ(seq, "ABAB");
}

TEST_F(EngineTest, RequestIdsUnique) {
  std::set<std::uint64_t> ids;
  for (int i = 0; i < 10'000; ++i) ids.insert(engine.new_request("t").request_id);
  EXPECT_EQ(ids.size(), 10'000u);
  EXPECT_EQ(format_request_id(0xabcULL), "0000000000000abc");
}

}  // namespace
}  // namespace gateway::core
