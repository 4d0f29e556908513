// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <memory>
#include <semaphore>
#include <string>

#include "sake/embedding.hpp"
#include "sake/http_client.hpp"

namespace sake {

struct RemoteEncoderConfig {
  std::string url;
  std::size_t dimension = HashEncoder::kDefaultDimension;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  int max_retries = 3;
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds backoff{100};
  std::string bearer_token;
};

// Client for an embedding service speaking
//   POST {texts: [string]}  ->  {vectors: [[number; d]]}
// Texts are sent in batches; at most max_in_flight requests are outstanding
// across all callers. Connection failures and 408/429/5xx responses are
// retried with exponential backoff. Returned vectors are L2-normalized.
class RemoteEncoder final : public Encoder {
 public:
  explicit RemoteEncoder(RemoteEncoderConfig config);
  ~RemoteEncoder() override;

  std::size_t dimension() const override { return config_.dimension; }
  std::string name() const override { return "remote:" + config_.url; }
  std::vector<Embedding> encode(
      std::span<const std::string> texts) const override;

 private:
  std::vector<Embedding> encode_batch(std::span<const std::string> batch) const;

  RemoteEncoderConfig config_;
  HttpEndpoint endpoint_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace sake
