#include "gateway/backends/file_store.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>

#include "gateway/error.hpp"
#include "http_session.hpp"

namespace gateway::backends {

namespace fs = std::filesystem;

std::string_view to_string(FileStoreConfig::Kind k) noexcept {
  return k == FileStoreConfig::Kind::LocalDirectory ? "local-directory" : "http-blob";
}

namespace {

void check_relative(const std::string& path) {
  const fs::path p(path);
  if (path.empty() || p.is_absolute())
    throw Error(Errc::TransferFailed, "object path must be relative: '" + path + "'");
  for (const auto& part : p) {
    if (part == "..") throw Error(Errc::TransferFailed, "object path escapes root: '" + path + "'");
  }
}

}  // namespace

// local directory --------------------------------------------------------------

LocalDirectoryStore::LocalDirectoryStore(std::string root) : root_(std::move(root)) {}

void LocalDirectoryStore::put(const std::string& path, ByteView bytes) {
  check_relative(path);
  const fs::path target = fs::path(root_) / path;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw Error(Errc::TransferFailed, "cannot create " + target.parent_path().string() + ": " + ec.message());
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::TransferFailed, "cannot write " + target.string());
}

Bytes LocalDirectoryStore::get(const std::string& path) {
  check_relative(path);
  const fs::path source = fs::path(root_) / path;
  std::ifstream in(source, std::ios::binary);
  if (!in) throw Error(Errc::TransferFailed, "cannot read " + source.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// http blob --------------------------------------------------------------------

HttpBlobStore::HttpBlobStore(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

void HttpBlobStore::put(const std::string& path, ByteView bytes) {
  check_relative(path);
  detail::HttpSession session(base_url_, timeout_, timeout_);
  auto res = session.put("/blob/" + path, std::string(bytes.begin(), bytes.end()), "application/octet-stream");
  if (!res) throw Error(Errc::TransferFailed, "PUT /blob/" + path + ": " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw Error(Errc::TransferFailed, "PUT /blob/" + path + " returned " + std::to_string(res->status));
}

Bytes HttpBlobStore::get(const std::string& path) {
  check_relative(path);
  detail::HttpSession session(base_url_, timeout_, timeout_);
  auto res = session.get("/blob/" + path);
  if (!res) throw Error(Errc::TransferFailed, "GET /blob/" + path + ": " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(Errc::TransferFailed, "GET /blob/" + path + " returned " + std::to_string(res->status));
  return to_bytes(res->body);
}

// memory -----------------------------------------------------------------------

void MemoryStore::put(const std::string& path, ByteView bytes) {
  check_relative(path);
  std::lock_guard lk(mu_);
  objects_[path] = Bytes(bytes.begin(), bytes.end());
}

Bytes MemoryStore::get(const std::string& path) {
  std::lock_guard lk(mu_);
  auto it = objects_.find(path);
  if (it == objects_.end()) throw Error(Errc::TransferFailed, "no object '" + path + "'");
  return it->second;
}

std::size_t MemoryStore::size() const {
  std::lock_guard lk(mu_);
  return objects_.size();
}

std::unique_ptr<FileStore> make_file_store(const FileStoreConfig& config) {
  if (config.root.empty()) throw Error(Errc::TransferFailed, "file store root is empty");
  if (config.kind == FileStoreConfig::Kind::HttpBlob) return std::make_unique<HttpBlobStore>(config.root);
  return std::make_unique<LocalDirectoryStore>(config.root);
}

}  // namespace gateway::backends
