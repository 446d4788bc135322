#pragma once

#include <chrono>
#include <string>

#include "httplib.h"

namespace gateway::backends::detail {

/// Thin wrapper over httplib::Client that keeps a base-path prefix and maps
/// transport failures onto library errors.
class HttpSession {
 public:
  HttpSession(const std::string& base_url, std::chrono::milliseconds connect_timeout,
              std::chrono::milliseconds read_timeout);

  httplib::Result get(const std::string& path, const httplib::Headers& headers = {});
  httplib::Result post(const std::string& path, const std::string& body, const std::string& content_type,
                       const httplib::Headers& headers = {});
  httplib::Result put(const std::string& path, const std::string& body, const std::string& content_type,
                      const httplib::Headers& headers = {});

  const std::string& base_url() const noexcept { return base_url_; }

 private:
  std::string base_url_;
  std::string prefix_;
  httplib::Client client_;
};

/// Throws BackendUnreachable or Timeout describing `what`.
[[noreturn]] void raise_transport(httplib::Error error, const std::string& what);

std::string trim(std::string s);

}  // namespace gateway::backends::detail
