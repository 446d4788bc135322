#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "gateway/bytes.hpp"

namespace gateway::backends {

/// Stand-in for the FTP server used by the task-submission backend.
struct FileStoreConfig {
  enum class Kind { LocalDirectory, HttpBlob };
  Kind kind = Kind::LocalDirectory;
  /// Directory path, or base URL of a blob server ("http://host:port").
  std::string root;
};

std::string_view to_string(FileStoreConfig::Kind k) noexcept;

/// put/get of whole objects under relative slash-separated paths.
/// Failures throw TransferFailed.
class FileStore {
 public:
  virtual ~FileStore() = default;
  virtual void put(const std::string& path, ByteView bytes) = 0;
  virtual Bytes get(const std::string& path) = 0;
};

class LocalDirectoryStore final : public FileStore {
 public:
  explicit LocalDirectoryStore(std::string root);
  void put(const std::string& path, ByteView bytes) override;
  Bytes get(const std::string& path) override;

 private:
  std::string root_;
};

/// PUT/GET {base}/blob/{path}.
class HttpBlobStore final : public FileStore {
 public:
  explicit HttpBlobStore(std::string base_url,
                         std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));
  void put(const std::string& path, ByteView bytes) override;
  Bytes get(const std::string& path) override;

 private:
  std::string base_url_;
  std::chrono::milliseconds timeout_;
};

/// In-process store; the blob mock server serves one of these.
class MemoryStore final : public FileStore {
 public:
  void put(const std::string& path, ByteView bytes) override;
  Bytes get(const std::string& path) override;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, Bytes> objects_;
};

std::unique_ptr<FileStore> make_file_store(const FileStoreConfig& config);

}  // namespace gateway::backends
