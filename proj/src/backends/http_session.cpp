#include "http_session.hpp"

#include "gateway/error.hpp"

namespace gateway::backends::detail {

namespace {

struct SplitUrl {
  std::string origin;
  std::string prefix;
};

SplitUrl split(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos || url.compare(0, scheme, "http") != 0)
    throw Error(Errc::InvalidArgument, "expected an http:// URL, got '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

}  // namespace

HttpSession::HttpSession(const std::string& base_url, std::chrono::milliseconds connect_timeout,
                         std::chrono::milliseconds read_timeout)
    : base_url_(base_url), prefix_(split(base_url).prefix), client_(split(base_url).origin) {
  client_.set_connection_timeout(connect_timeout);
  client_.set_read_timeout(read_timeout);
  client_.set_write_timeout(read_timeout);
  client_.set_keep_alive(true);
  client_.set_tcp_nodelay(true);
}

httplib::Result HttpSession::get(const std::string& path, const httplib::Headers& headers) {
  return client_.Get(prefix_ + path, headers);
}

httplib::Result HttpSession::post(const std::string& path, const std::string& body, const std::string& content_type,
                                  const httplib::Headers& headers) {
  return client_.Post(prefix_ + path, headers, body, content_type);
}

httplib::Result HttpSession::put(const std::string& path, const std::string& body, const std::string& content_type,
                                 const httplib::Headers& headers) {
  return client_.Put(prefix_ + path, headers, body, content_type);
}

void raise_transport(httplib::Error error, const std::string& what) {
  const std::string detail = what + ": " + httplib::to_string(error);
  switch (error) {
    case httplib::Error::Read:
    case httplib::Error::Write:
      throw Error(Errc::Timeout, detail);
    default:
      throw Error(Errc::BackendUnreachable, detail);
  }
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  const auto last = s.find_last_not_of(ws);
  s.erase(last == std::string::npos ? 0 : last + 1);
  return s;
}

}  // namespace gateway::backends::detail
