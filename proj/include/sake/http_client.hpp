// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <stdexcept>
#include <string>

namespace sake {

struct HttpEndpoint {
  std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
  std::string path;              // e.g. "/embed"

  static HttpEndpoint parse(const std::string& url);
};

struct HttpRetryOptions {
  int max_retries = 3;
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds backoff{100};
  std::string bearer_token;
};

class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& what)
      : std::runtime_error(what), status_(status) {}

  // 0 for transport failures.
  int status() const { return status_; }

 private:
  int status_;
};

// POSTs a JSON body and returns the 200 response body. Transport failures and
// 408/429/5xx responses are retried with exponential backoff; other statuses
// throw immediately.
std::string post_json(const HttpEndpoint& endpoint, const std::string& body,
                      const HttpRetryOptions& options);

}  // namespace sake
