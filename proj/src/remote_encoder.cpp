// SPDX-License-Identifier: Apache-2.0
#include "sake/remote_encoder.hpp"

#include <cmath>
#include <future>
#include <nlohmann/json.hpp>

namespace sake {

RemoteEncoder::RemoteEncoder(RemoteEncoderConfig config)
    : config_(std::move(config)),
      endpoint_(HttpEndpoint::parse(config_.url)),
      in_flight_(std::make_unique<std::counting_semaphore<>>(
          static_cast<std::ptrdiff_t>(std::max<std::size_t>(
              1, config_.max_in_flight)))) {
  if (config_.dimension == 0) throw std::invalid_argument("dimension is 0");
  if (config_.batch_size == 0) throw std::invalid_argument("batch_size is 0");
}

RemoteEncoder::~RemoteEncoder() = default;

std::vector<Embedding> RemoteEncoder::encode(
    std::span<const std::string> texts) const {
  std::vector<std::future<std::vector<Embedding>>> pending;
  for (std::size_t start = 0; start < texts.size();
       start += config_.batch_size) {
    const auto batch =
        texts.subspan(start, std::min(config_.batch_size, texts.size() - start));
    pending.push_back(std::async(std::launch::async, [this, batch] {
      in_flight_->acquire();
      try {
        auto v = encode_batch(batch);
        in_flight_->release();
        return v;
      } catch (...) {
        in_flight_->release();
        throw;
      }
    }));
  }
  std::vector<Embedding> out;
  out.reserve(texts.size());
  std::exception_ptr first_error;
  for (auto& f : pending) {
    try {
      for (auto& v : f.get()) out.push_back(std::move(v));
    } catch (...) {
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::vector<Embedding> RemoteEncoder::encode_batch(
    std::span<const std::string> batch) const {
  const std::string& first = batch.front();
  const std::string request =
      nlohmann::json{
          {"texts", std::vector<std::string>(batch.begin(), batch.end())}}
          .dump();
  std::string body;
  try {
    body = post_json(endpoint_, request,
                     {config_.max_retries, config_.timeout, config_.backoff,
                      config_.bearer_token});
  } catch (const HttpError& e) {
    throw EncoderError(first, e.what());
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw EncoderError(first, std::string("bad response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("vectors") ||
      !doc["vectors"].is_array() || doc["vectors"].size() != batch.size()) {
    throw EncoderError(first, "response must hold one vector per text");
  }
  std::vector<Embedding> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& jv = doc["vectors"][i];
    if (!jv.is_array() || jv.size() != config_.dimension) {
      throw EncoderError(batch[i], "vector has wrong dimension");
    }
    Embedding v;
    v.reserve(config_.dimension);
    for (const auto& x : jv) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw EncoderError(batch[i], "non-numeric vector component");
      }
      v.push_back(x.get<double>());
    }
    if (!l2_normalize(v) && !batch[i].empty()) {
      throw EncoderError(batch[i], "zero vector for non-empty label");
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace sake
