#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <set>
#include <vector>

#include "gateway/error.hpp"
#include "gateway/exec/runtime.hpp"
#include "gateway/exec/serial_executor.hpp"
#include "support.hpp"

namespace gateway::exec {
namespace {

using namespace std::chrono_literals;
using testing::ConcurrencyProbe;

RuntimeConfig small(std::size_t workers = 2) {
  RuntimeConfig c;
  c.worker_count = workers;
  c.default_timeout = 2s;
  c.shutdown_grace = 1s;
  return c;
}

Job job(std::function<void(std::stop_token)> body, std::function<void(const Outcome&)> post = {}) {
  Job j;
  j.provider_key = "p";
  j.request_id = 1;
  j.body = std::move(body);
  j.post_hook = std::move(post);
  return j;
}

TEST(RuntimeConfig, Validation) {
  RuntimeConfig c;
  EXPECT_NO_THROW(c.validate());
  c.worker_count = 0;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.pending_queue_depth = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(RuntimeConfig, Defaults) {
  RuntimeConfig c;
  EXPECT_EQ(c.worker_count, 4u);
  EXPECT_EQ(c.default_timeout, 30s);
  EXPECT_EQ(c.pending_queue_depth, 64u);
  EXPECT_EQ(c.shutdown_grace, 5s);
}

TEST(RuntimeConfig, EnvironmentOverrides) {
  ::setenv("GATEWAY_WORKERS", "7", 1);
  ::setenv("GATEWAY_TIMEOUT_MS", "1234", 1);
  const auto c = RuntimeConfig::from_env({});
  ::unsetenv("GATEWAY_WORKERS");
  ::unsetenv("GATEWAY_TIMEOUT_MS");
  EXPECT_EQ(c.worker_count, 7u);
  EXPECT_EQ(c.default_timeout, 1234ms);
  EXPECT_EQ(RuntimeConfig::from_env({}).worker_count, 4u);
}

TEST(SerialExecutor, RunsInPostOrderOnOneThread) {
  SerialExecutor ex;
  std::vector<int> seen;
  std::set<std::thread::id> threads;
  for (int i = 0; i < 100; ++i) {
    ex.post([&, i] {
      seen.push_back(i);
      threads.insert(std::this_thread::get_id());
    });
  }
  ex.call([] {});
  ASSERT_EQ(seen.size(), 100u);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(seen[i], i);
  EXPECT_EQ(threads.size(), 1u);
  EXPECT_NE(*threads.begin(), std::this_thread::get_id());
}

TEST(SerialExecutor, NestedCallDoesNotDeadlock) {
  SerialExecutor ex;
  int value = 0;
  ex.call([&] { ex.call([&] { value = 42; }); });
  EXPECT_EQ(value, 42);
}

TEST(Runtime, LifecycleErrors) {
  Runtime rt;
  EXPECT_THROW(rt.submit(job([](std::stop_token) {})), Error);
  EXPECT_THROW(rt.stop(true), Error);
  rt.start(small());
  try {
    rt.start(small());
    FAIL() << "second start accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::AlreadyRunning);
  }
  rt.stop(true);
  try {
    rt.submit(job([](std::stop_token) {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RuntimeStopped);
  }
  try {
    rt.stop(true);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NotRunning);
  }
}

TEST(Runtime, StartSubmitDrainIsDone) {
  Runtime rt;
  rt.start(small());
  auto t = rt.submit(job([](std::stop_token) { std::this_thread::sleep_for(20ms); }));
  rt.stop(true);
  EXPECT_EQ(t.status(), TicketStatus::Done);
}

TEST(Runtime, HooksAndBodyDoNotOverlapAndHooksShareOneThread) {
  Runtime rt;
  rt.start(small(4));
  std::mutex mu;
  std::vector<std::string> trace;
  std::set<std::thread::id> hook_threads;
  ConcurrencyProbe hooks;
  std::vector<Ticket> tickets;
  for (int i = 0; i < 20; ++i) {
    Job j;
    j.provider_key = "p" + std::to_string(i);
    j.pre_hook = [&, i] {
      hooks.enter();
      std::lock_guard lk(mu);
      trace.push_back("pre" + std::to_string(i));
      hook_threads.insert(std::this_thread::get_id());
      hooks.leave();
    };
    j.body = [&, i](std::stop_token) {
      std::lock_guard lk(mu);
      trace.push_back("body" + std::to_string(i));
    };
    j.post_hook = [&, i](const Outcome&) {
      hooks.enter();
      std::lock_guard lk(mu);
      trace.push_back("post" + std::to_string(i));
      hook_threads.insert(std::this_thread::get_id());
      hooks.leave();
    };
    tickets.push_back(rt.submit(std::move(j)));
  }
  for (auto& t : tickets) t.wait();
  rt.stop(true);
  EXPECT_EQ(hook_threads.size(), 1u);
  EXPECT_EQ(hooks.peak(), 1);
  for (int i = 0; i < 20; ++i) {
    auto pos = [&](const std::string& s) { return std::find(trace.begin(), trace.end(), s) - trace.begin(); };
    const auto id = std::to_string(i);
    EXPECT_LT(pos("pre" + id), pos("body" + id));
    EXPECT_LT(pos("body" + id), pos("post" + id));
  }
}

TEST(Runtime, PeakConcurrencyBoundedByWorkers) {
  Runtime rt;
  rt.start(small(2));
  ConcurrencyProbe probe;
  std::vector<Ticket> tickets;
  for (int i = 0; i < 10; ++i) {
    tickets.push_back(rt.submit(job([&](std::stop_token) {
      probe.enter();
      std::this_thread::sleep_for(30ms);
      probe.leave();
    })));
  }
  for (auto& t : tickets) t.wait();
  rt.stop(true);
  EXPECT_EQ(probe.peak(), 2);
  for (auto& t : tickets) EXPECT_EQ(t.status(), TicketStatus::Done);
}

TEST(Runtime, StatusAdvancesMonotonically) {
  Runtime rt;
  rt.start(small(1));
  std::atomic<bool> release{false};
  std::vector<TicketStatus> seen;
  std::mutex mu;
  auto t = rt.submit(job([&](std::stop_token) {
    while (!release) std::this_thread::sleep_for(1ms);
  }));
  std::jthread watcher([&](std::stop_token st) {
    while (!st.stop_requested()) {
      const auto s = t.status();
      std::lock_guard lk(mu);
      if (seen.empty() || seen.back() != s) seen.push_back(s);
      if (is_terminal(s)) return;
    }
  });
  ASSERT_TRUE(testing::eventually([&] { return t.status() == TicketStatus::Running; }));
  release = true;
  t.wait();
  watcher.join();
  rt.stop(true);
  for (std::size_t i = 1; i < seen.size(); ++i) EXPECT_LT(static_cast<int>(seen[i - 1]), static_cast<int>(seen[i]));
  EXPECT_EQ(seen.back(), TicketStatus::Done);
}

TEST(Runtime, BodyExceptionFailsTicket) {
  Runtime rt;
  rt.start(small());
  Outcome got;
  auto t = rt.submit(job([](std::stop_token) { throw Error(Errc::InvalidArgument, "boom"); },
                         [&](const Outcome& o) { got = o; }));
  t.wait();
  rt.stop(true);
  EXPECT_EQ(t.status(), TicketStatus::Failed);
  EXPECT_NE(t.error().find("boom"), std::string::npos);
  EXPECT_EQ(got.status, TicketStatus::Failed);
}

TEST(Runtime, PreHookFailureSkipsBody) {
  Runtime rt;
  rt.start(small());
  std::atomic<bool> ran{false};
  int posts = 0;
  Job j = job([&](std::stop_token) { ran = true; }, [&](const Outcome&) { ++posts; });
  j.pre_hook = [] { throw Error(Errc::Timeout, "deadline passed"); };
  auto t = rt.submit(std::move(j));
  t.wait();
  rt.stop(true);
  EXPECT_EQ(t.status(), TicketStatus::Failed);
  EXPECT_FALSE(ran);
  EXPECT_EQ(posts, 1);
}

TEST(Runtime, CooperativeTimeout) {
  Runtime rt;
  rt.start(small());
  Job j = job([](std::stop_token st) {
    while (!st.stop_requested()) std::this_thread::sleep_for(1ms);
  });
  j.timeout = 50ms;
  const auto t0 = std::chrono::steady_clock::now();
  auto t = rt.submit(std::move(j));
  t.wait();
  EXPECT_EQ(t.status(), TicketStatus::TimedOut);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 1s);
  rt.stop(true);
}

TEST(Runtime, IgnoringCancellationIsAbandonedAndWorkerRecycled) {
  Runtime rt;
  rt.start(small(1));
  std::atomic<bool> release{false};
  Job stuck = job([&](std::stop_token) {
    while (!release) std::this_thread::sleep_for(1ms);
  });
  stuck.timeout = 30ms;
  auto a = rt.submit(std::move(stuck));
  auto b = rt.submit(job([](std::stop_token) {}));
  ASSERT_TRUE(b.wait_for(2s));
  EXPECT_EQ(a.status(), TicketStatus::TimedOut);
  EXPECT_EQ(b.status(), TicketStatus::Done);
  release = true;
  rt.stop(true);
}

TEST(Runtime, QueueFull) {
  Runtime rt;
  auto c = small(1);
  c.queue_capacity = 2;
  rt.start(c);
  std::atomic<bool> release{false};
  auto blocker = [&](std::stop_token) {
    while (!release) std::this_thread::sleep_for(1ms);
  };
  auto first = rt.submit(job(blocker));
  ASSERT_TRUE(testing::eventually([&] { return first.status() == TicketStatus::Running; }));
  rt.submit(job(blocker));
  rt.submit(job(blocker));
  try {
    rt.submit(job(blocker));
    FAIL() << "queue accepted past capacity";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::QueueFull);
  }
  release = true;
  rt.stop(true);
}

TEST(Runtime, StopWithoutDrainFailsQueuedAndRunsPostHooks) {
  Runtime rt;
  rt.start(small(1));
  std::atomic<bool> release{false};
  std::atomic<int> posts{0};
  auto blocker = [&](std::stop_token st) {
    while (!release && !st.stop_requested()) std::this_thread::sleep_for(1ms);
  };
  auto running = rt.submit(job(blocker, [&](const Outcome&) { ++posts; }));
  ASSERT_TRUE(testing::eventually([&] { return running.status() == TicketStatus::Running; }));
  std::vector<Ticket> queued;
  for (int i = 0; i < 5; ++i) queued.push_back(rt.submit(job(blocker, [&](const Outcome&) { ++posts; })));
  rt.stop(false);
  for (auto& t : queued) {
    EXPECT_EQ(t.status(), TicketStatus::Failed);
    EXPECT_EQ(t.error(), "shutdown");
  }
  EXPECT_TRUE(is_terminal(running.status()));
  EXPECT_EQ(posts.load(), 6);
}

TEST(Runtime, DrainFinishesEverything) {
  Runtime rt;
  rt.start(small(2));
  std::vector<Ticket> tickets;
  for (int i = 0; i < 12; ++i) tickets.push_back(rt.submit(job([](std::stop_token) { std::this_thread::sleep_for(10ms); })));
  rt.stop(true);
  for (auto& t : tickets) EXPECT_EQ(t.status(), TicketStatus::Done);
}

TEST(Runtime, DrainGraceBoundsStop) {
  Runtime rt;
  auto c = small(1);
  c.shutdown_grace = 100ms;
  rt.start(c);
  std::atomic<bool> release{false};
  auto t = rt.submit(job([&](std::stop_token) {
    while (!release) std::this_thread::sleep_for(1ms);
  }));
  ASSERT_TRUE(testing::eventually([&] { return t.status() == TicketStatus::Running; }));
  const auto t0 = std::chrono::steady_clock::now();
  rt.stop(true);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 1s);
  EXPECT_TRUE(is_terminal(t.status()));
  release = true;
}

TEST(Runtime, RestartAfterStop) {
  Runtime rt;
  rt.start(small());
  rt.stop(true);
  rt.start(small());
  auto t = rt.submit(job([](std::stop_token) {}));
  t.wait();
  EXPECT_EQ(t.status(), TicketStatus::Done);
  rt.stop(true);
}

}  // namespace
}  // namespace gateway::exec
