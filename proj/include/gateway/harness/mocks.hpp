#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gateway/backends/file_store.hpp"

namespace gateway::harness {

struct RequestRecord {
  std::string server;
  std::string method;
  std::string path;
  std::size_t request_bytes = 0;
  std::size_t response_bytes = 0;
  int status = 0;
  std::string request_id;  // X-Request-Id, if sent
};

/// "<server> <method> <path> status=<s> in=<n> out=<m> [request=<id>]"
std::string format_record(const RequestRecord& r);

/// Shared, thread-safe log of every request any mock served.
class RequestLog {
 public:
  void add(RequestRecord record);
  std::vector<RequestRecord> entries() const;
  std::size_t size() const;
  std::size_t count(std::string_view server) const;
  /// Requests to `server` whose path starts with `path_prefix`.
  std::size_t count(std::string_view server, std::string_view method, std::string_view path_prefix) const;
  void clear();
  /// Called with each formatted record as it is added.
  void set_echo(std::function<void(const std::string&)> echo);

 private:
  mutable std::mutex mu_;
  std::vector<RequestRecord> entries_;
  std::function<void(const std::string&)> echo_;
};

struct MockRequest {
  std::string method;
  std::string path;
  std::string body;
  std::vector<std::string> captures;  // regex groups of the route
  std::string request_id;
};

struct MockResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/octet-stream";
};

using MockHandler = std::function<MockResponse(const MockRequest&)>;

/// HTTP server on 127.0.0.1 serving from a background thread. Subclasses
/// register routes in their constructor; listen() must follow.
class MockServer {
 public:
  MockServer(std::string name, std::shared_ptr<RequestLog> log);
  virtual ~MockServer();

  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;

  /// Port 0 picks an ephemeral port. Throws PortInUse.
  void listen(int port = 0);
  void stop();

  int port() const noexcept { return port_; }
  std::string url() const;
  const std::string& name() const noexcept { return name_; }
  const std::shared_ptr<RequestLog>& log() const noexcept { return log_; }

 protected:
  /// `pattern` is a regex over the path.
  void route(const std::string& method, const std::string& pattern, MockHandler handler);

 private:
  struct Impl;
  std::string name_;
  std::shared_ptr<RequestLog> log_;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

/// POST /analyze: counts desaturated frames of the posted batch as the
/// master's workers would, returning "HYPOPNEA:<n>"; 400 for an empty or
/// malformed batch.
class FogBusMock final : public MockServer {
 public:
  explicit FogBusMock(std::shared_ptr<RequestLog> log);
};

/// GET /worker: hands out registered worker URLs round-robin, 204 if none.
class EdgeLensMasterMock final : public MockServer {
 public:
  EdgeLensMasterMock(std::shared_ptr<RequestLog> log, std::vector<std::string> workers = {});
  ~EdgeLensMasterMock() override;
  void set_workers(std::vector<std::string> workers);

 private:
  std::mutex mu_;
  std::vector<std::string> workers_;
  std::size_t next_ = 0;
};

struct EdgeLensWorkerOptions {
  std::string transform = "complement";
  /// GET /result answers 404 this many times per job before the result.
  std::size_t pending_polls = 0;
  bool never_complete = false;
};

/// POST /upload, POST /execute/{job}, GET /result/{job}.
class EdgeLensWorkerMock final : public MockServer {
 public:
  EdgeLensWorkerMock(std::shared_ptr<RequestLog> log, EdgeLensWorkerOptions options = {});
  ~EdgeLensWorkerMock() override;

  /// While held every result poll answers 404.
  void set_hold(bool hold) { hold_ = hold; }
  std::size_t jobs() const;

 private:
  struct Job {
    std::string input;
    bool executed = false;
    std::size_t polls = 0;
  };
  EdgeLensWorkerOptions options_;
  std::atomic<bool> hold_{false};
  mutable std::mutex mu_;
  std::map<std::string, Job> jobs_;
  std::size_t next_job_ = 1;
};

struct AnekaOptions {
  /// State reported by the n-th status poll of a task (the last entry
  /// repeats). The task's output is produced when "Completed" is reported.
  std::vector<std::string> timeline{"Submitted", "Running", "Completed"};
};

/// POST /tasks {"input","transform"} -> {"task_id"}; GET /tasks/{id} ->
/// {"state","result_ref"}. Reads inputs from and writes "out/{task_id}" to
/// the shared file store, as the worker nodes would.
class AnekaMock final : public MockServer {
 public:
  AnekaMock(std::shared_ptr<RequestLog> log, std::shared_ptr<backends::FileStore> files, AnekaOptions options = {});
  ~AnekaMock() override;

  /// While held every status poll answers "Running" without advancing.
  void set_hold(bool hold) { hold_ = hold; }

 private:
  struct Task {
    std::string input;
    std::string transform;
    std::size_t polls = 0;
    std::string state = "Submitted";
    std::optional<std::string> result_ref;
  };
  std::shared_ptr<backends::FileStore> files_;
  AnekaOptions options_;
  std::atomic<bool> hold_{false};
  std::mutex mu_;
  std::map<std::string, Task> tasks_;
  std::size_t next_task_ = 1;
};

/// PUT/GET /blob/{path} over an in-memory store.
class BlobMock final : public MockServer {
 public:
  BlobMock(std::shared_ptr<RequestLog> log, std::shared_ptr<backends::MemoryStore> files);
  ~BlobMock() override;
  const std::shared_ptr<backends::MemoryStore>& files() const noexcept { return files_; }

 private:
  std::shared_ptr<backends::MemoryStore> files_;
};

/// Which mocks to run and on which ports (0 = ephemeral).
struct MockClusterOptions {
  std::optional<int> fogbus;
  std::optional<int> edgelens_master;
  std::optional<int> edgelens_worker;
  std::optional<int> aneka;
  std::optional<int> blob;
  EdgeLensWorkerOptions worker;
  AnekaOptions aneka_options;
  /// Directory the Aneka mock reads and writes when no blob server runs.
  std::string aneka_root;
};

/// A set of mocks sharing one request log. The EdgeLens master advertises
/// the worker when both run; the Aneka mock shares the blob store when
/// both run.
class MockCluster {
 public:
  explicit MockCluster(const MockClusterOptions& options);
  ~MockCluster();

  const std::shared_ptr<RequestLog>& log() const noexcept { return log_; }
  FogBusMock* fogbus() const noexcept { return fogbus_.get(); }
  EdgeLensMasterMock* edgelens_master() const noexcept { return master_.get(); }
  EdgeLensWorkerMock* edgelens_worker() const noexcept { return worker_.get(); }
  AnekaMock* aneka() const noexcept { return aneka_.get(); }
  BlobMock* blob() const noexcept { return blob_.get(); }

  void stop();

 private:
  std::shared_ptr<RequestLog> log_;
  std::unique_ptr<FogBusMock> fogbus_;
  std::unique_ptr<EdgeLensMasterMock> master_;
  std::unique_ptr<EdgeLensWorkerMock> worker_;
  std::unique_ptr<AnekaMock> aneka_;
  std::unique_ptr<BlobMock> blob_;
};

}  // namespace gateway::harness
