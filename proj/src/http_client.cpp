// SPDX-License-Identifier: Apache-2.0
#include "sake/http_client.hpp"

#include <httplib.h>

#include <thread>

namespace sake {

HttpEndpoint HttpEndpoint::parse(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("URL needs a scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string post_json(const HttpEndpoint& endpoint, const std::string& body,
                      const HttpRetryOptions& options) {
  const auto secs =
      std::chrono::duration_cast<std::chrono::seconds>(options.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
      options.timeout - secs);
  std::string last_error;
  int last_status = 0;
  auto delay = options.backoff;
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
    httplib::Client client(endpoint.scheme_host_port);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    if (!options.bearer_token.empty()) {
      client.set_bearer_token_auth(options.bearer_token);
    }
    auto res = client.Post(endpoint.path, body, "application/json");
    if (!res) {
      last_status = 0;
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    const int status = res->status;
    if (status == 200) return res->body;
    if (status == 408 || status == 429 || status >= 500) {
      last_status = status;
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    throw HttpError(status, "HTTP " + std::to_string(status) + ": " + res->body);
  }
  throw HttpError(last_status,
                  endpoint.scheme_host_port + endpoint.path + ": gave up after " +
                      std::to_string(options.max_retries + 1) +
                      " attempts (" + last_error + ")");
}

}  // namespace sake
