#include "gateway/harness/mocks.hpp"

#include <netinet/tcp.h>

#include <thread>

#include "gateway/backends/transforms.hpp"
#include "gateway/error.hpp"
#include "httplib.h"
#include "json.hpp"

namespace gateway::harness {

using nlohmann::json;

std::string format_record(const RequestRecord& r) {
  std::string line = r.server + " " + r.method + " " + r.path + " status=" + std::to_string(r.status) +
                     " in=" + std::to_string(r.request_bytes) + " out=" + std::to_string(r.response_bytes);
  if (!r.request_id.empty()) line += " request=" + r.request_id;
  return line;
}

// RequestLog -------------------------------------------------------------------

void RequestLog::add(RequestRecord record) {
  std::function<void(const std::string&)> echo;
  {
    std::lock_guard lk(mu_);
    entries_.push_back(record);
    echo = echo_;
  }
  if (echo) echo(format_record(record));
}

std::vector<RequestRecord> RequestLog::entries() const {
  std::lock_guard lk(mu_);
  return entries_;
}

std::size_t RequestLog::size() const {
  std::lock_guard lk(mu_);
  return entries_.size();
}

std::size_t RequestLog::count(std::string_view server) const {
  std::lock_guard lk(mu_);
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.server == server;
  return n;
}

std::size_t RequestLog::count(std::string_view server, std::string_view method, std::string_view path_prefix) const {
  std::lock_guard lk(mu_);
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.server == server && e.method == method && e.path.starts_with(path_prefix);
  return n;
}

void RequestLog::clear() {
  std::lock_guard lk(mu_);
  entries_.clear();
}

void RequestLog::set_echo(std::function<void(const std::string&)> echo) {
  std::lock_guard lk(mu_);
  echo_ = std::move(echo);
}

// MockServer -------------------------------------------------------------------

namespace {
constexpr const char* kLoggedHeader = "X-Mock-Logged";
constexpr std::size_t kServerThreads = 32;
}

struct MockServer::Impl {
  httplib::Server server;
  std::thread thread;
};

MockServer::MockServer(std::string name, std::shared_ptr<RequestLog> log)
    : name_(std::move(name)), log_(log ? std::move(log) : std::make_shared<RequestLog>()),
      impl_(std::make_unique<Impl>()) {
  impl_->server.new_task_queue = [] { return new httplib::ThreadPool(kServerThreads); };
  // no SO_REUSEPORT: a second server on a taken port must fail to bind
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
    ::setsockopt(sock, IPPROTO_TCP, TCP_NODELAY, &yes, sizeof(yes));
  });
  // routed requests are logged before the reply is sent; this catches the rest
  impl_->server.set_logger([this](const httplib::Request& req, const httplib::Response& res) {
    if (res.has_header(kLoggedHeader)) return;
    log_->add({name_, req.method, req.path, req.body.size(), res.body.size(), res.status,
               req.get_header_value("X-Request-Id")});
  });
}

MockServer::~MockServer() { stop(); }

void MockServer::route(const std::string& method, const std::string& pattern, MockHandler handler) {
  auto wrapped = [this, handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
    MockRequest mreq{req.method, req.path, req.body, {}, req.get_header_value("X-Request-Id")};
    for (std::size_t i = 1; i < req.matches.size(); ++i) mreq.captures.push_back(req.matches[i].str());
    MockResponse mres;
    try {
      mres = handler(mreq);
    } catch (const std::exception& e) {
      mres = {500, e.what(), "text/plain"};
    }
    res.status = mres.status;
    if (!mres.body.empty() || mres.status == 200) res.set_content(mres.body, mres.content_type);
    res.set_header(kLoggedHeader, "1");
    log_->add({name_, req.method, req.path, req.body.size(), mres.body.size(), mres.status, mreq.request_id});
  };
  auto& s = impl_->server;
  if (method == "GET") s.Get(pattern, wrapped);
  else if (method == "POST") s.Post(pattern, wrapped);
  else if (method == "PUT") s.Put(pattern, wrapped);
  else throw Error(Errc::InvalidArgument, "unsupported method " + method);
}

void MockServer::listen(int port) {
  auto& s = impl_->server;
  if (port == 0) {
    port_ = s.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw Error(Errc::PortInUse, name_ + ": no ephemeral port available");
  } else {
    if (!s.bind_to_port("127.0.0.1", port)) throw Error(Errc::PortInUse, name_ + ": port " + std::to_string(port));
    port_ = port;
  }
  impl_->thread = std::thread([&s] { s.listen_after_bind(); });
  s.wait_until_ready();
}

void MockServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

// FogBus -----------------------------------------------------------------------

FogBusMock::FogBusMock(std::shared_ptr<RequestLog> log) : MockServer("fogbus", std::move(log)) {
  route("POST", "/analyze", [](const MockRequest& req) -> MockResponse {
    try {
      auto out = backends::apply_transform(backends::kHypopneaCount, to_bytes(req.body));
      return {200, to_string(out), "text/plain"};
    } catch (const Error& e) {
      return {400, e.what(), "text/plain"};
    }
  });
}

// EdgeLens ---------------------------------------------------------------------

EdgeLensMasterMock::EdgeLensMasterMock(std::shared_ptr<RequestLog> log, std::vector<std::string> workers)
    : MockServer("edgelens-master", std::move(log)), workers_(std::move(workers)) {
  route("GET", "/worker", [this](const MockRequest&) -> MockResponse {
    std::lock_guard lk(mu_);
    if (workers_.empty()) return {204, "", "text/plain"};
    return {200, workers_[next_++ % workers_.size()], "text/plain"};
  });
}

// handlers touch subclass members, so the server stops before they go away
EdgeLensMasterMock::~EdgeLensMasterMock() { stop(); }
EdgeLensWorkerMock::~EdgeLensWorkerMock() { stop(); }
AnekaMock::~AnekaMock() { stop(); }
BlobMock::~BlobMock() { stop(); }

void EdgeLensMasterMock::set_workers(std::vector<std::string> workers) {
  std::lock_guard lk(mu_);
  workers_ = std::move(workers);
  next_ = 0;
}

EdgeLensWorkerMock::EdgeLensWorkerMock(std::shared_ptr<RequestLog> log, EdgeLensWorkerOptions options)
    : MockServer("edgelens-worker", std::move(log)), options_(std::move(options)) {
  if (!backends::is_known_transform(options_.transform))
    throw Error(Errc::UnknownTransform, "unknown transform '" + options_.transform + "'");
  route("POST", "/upload", [this](const MockRequest& req) -> MockResponse {
    std::lock_guard lk(mu_);
    const std::string id = "job-" + std::to_string(next_job_++);
    jobs_[id] = Job{req.body};
    return {200, id, "text/plain"};
  });
  route("POST", R"(/execute/([^/]+))", [this](const MockRequest& req) -> MockResponse {
    std::lock_guard lk(mu_);
    auto it = jobs_.find(req.captures.at(0));
    if (it == jobs_.end()) return {404, "unknown job", "text/plain"};
    it->second.executed = true;
    return {202, "", "text/plain"};
  });
  route("GET", R"(/result/([^/]+))", [this](const MockRequest& req) -> MockResponse {
    std::string input;
    {
      std::lock_guard lk(mu_);
      auto it = jobs_.find(req.captures.at(0));
      if (it == jobs_.end()) return {404, "", "text/plain"};
      Job& job = it->second;
      const std::size_t poll = job.polls++;
      if (!job.executed || hold_ || options_.never_complete || poll < options_.pending_polls)
        return {404, "", "text/plain"};
      input = job.input;
    }
    return {200, to_string(backends::apply_transform(options_.transform, to_bytes(input)))};
  });
}

std::size_t EdgeLensWorkerMock::jobs() const {
  std::lock_guard lk(mu_);
  return jobs_.size();
}

// Aneka ------------------------------------------------------------------------

AnekaMock::AnekaMock(std::shared_ptr<RequestLog> log, std::shared_ptr<backends::FileStore> files,
                     AnekaOptions options)
    : MockServer("aneka", std::move(log)), files_(std::move(files)), options_(std::move(options)) {
  if (!files_) throw Error(Errc::InvalidArgument, "aneka mock needs a file store");
  if (options_.timeline.empty()) options_.timeline = {"Completed"};
  route("POST", "/tasks", [this](const MockRequest& req) -> MockResponse {
    std::string input, transform;
    try {
      const auto doc = json::parse(req.body);
      input = doc.at("input").get<std::string>();
      transform = doc.at("transform").get<std::string>();
    } catch (const json::exception& e) {
      return {400, e.what(), "text/plain"};
    }
    if (!backends::is_known_transform(transform)) return {400, "unknown transform", "text/plain"};
    std::lock_guard lk(mu_);
    const std::string id = "task-" + std::to_string(next_task_++);
    Task task;
    task.input = input;
    task.transform = transform;
    tasks_[id] = std::move(task);
    return {200, json{{"task_id", id}}.dump(), "application/json"};
  });
  route("GET", R"(/tasks/([^/]+))", [this](const MockRequest& req) -> MockResponse {
    std::lock_guard lk(mu_);
    auto it = tasks_.find(req.captures.at(0));
    if (it == tasks_.end()) return {404, "unknown task", "text/plain"};
    Task& task = it->second;
    if (hold_ && task.state != "Completed" && task.state != "Failed")
      return {200, json{{"state", "Running"}, {"result_ref", nullptr}}.dump(), "application/json"};
    const auto& tl = options_.timeline;
    const std::string next = tl[std::min(task.polls++, tl.size() - 1)];
    if (task.state != "Completed" && task.state != "Failed") {
      task.state = next;
      if (next == "Completed") {
        // the worker node: fetch, process, upload
        try {
          const std::string ref = "out/" + it->first;
          files_->put(ref, backends::apply_transform(task.transform, files_->get(task.input)));
          task.result_ref = ref;
        } catch (const std::exception&) {
          task.state = "Failed";
        }
      }
    }
    json body{{"state", task.state}, {"result_ref", nullptr}};
    if (task.result_ref) body["result_ref"] = *task.result_ref;
    return {200, body.dump(), "application/json"};
  });
}

// Blob -------------------------------------------------------------------------

BlobMock::BlobMock(std::shared_ptr<RequestLog> log, std::shared_ptr<backends::MemoryStore> files)
    : MockServer("blob", std::move(log)), files_(files ? std::move(files) : std::make_shared<backends::MemoryStore>()) {
  route("PUT", R"(/blob/(.+))", [this](const MockRequest& req) -> MockResponse {
    try {
      files_->put(req.captures.at(0), to_bytes(req.body));
    } catch (const Error& e) {
      return {400, e.what(), "text/plain"};
    }
    return {201, "", "text/plain"};
  });
  route("GET", R"(/blob/(.+))", [this](const MockRequest& req) -> MockResponse {
    try {
      return {200, to_string(files_->get(req.captures.at(0)))};
    } catch (const Error&) {
      return {404, "", "text/plain"};
    }
  });
}

// MockCluster ------------------------------------------------------------------

MockCluster::MockCluster(const MockClusterOptions& options) : log_(std::make_shared<RequestLog>()) {
  if (options.blob) {
    blob_ = std::make_unique<BlobMock>(log_, std::make_shared<backends::MemoryStore>());
    blob_->listen(*options.blob);
  }
  if (options.edgelens_worker) {
    worker_ = std::make_unique<EdgeLensWorkerMock>(log_, options.worker);
    worker_->listen(*options.edgelens_worker);
  }
  if (options.edgelens_master) {
    std::vector<std::string> workers;
    if (worker_) workers.push_back(worker_->url());
    master_ = std::make_unique<EdgeLensMasterMock>(log_, std::move(workers));
    master_->listen(*options.edgelens_master);
  }
  if (options.fogbus) {
    fogbus_ = std::make_unique<FogBusMock>(log_);
    fogbus_->listen(*options.fogbus);
  }
  if (options.aneka) {
    std::shared_ptr<backends::FileStore> files;
    if (blob_) files = blob_->files();
    else if (!options.aneka_root.empty()) files = std::make_shared<backends::LocalDirectoryStore>(options.aneka_root);
    else files = std::make_shared<backends::MemoryStore>();
    aneka_ = std::make_unique<AnekaMock>(log_, std::move(files), options.aneka_options);
    aneka_->listen(*options.aneka);
  }
}

MockCluster::~MockCluster() { stop(); }

void MockCluster::stop() {
  for (MockServer* s : std::initializer_list<MockServer*>{fogbus_.get(), master_.get(), worker_.get(), aneka_.get(),
                                                          blob_.get()}) {
    if (s) s->stop();
  }
}

}  // namespace gateway::harness
