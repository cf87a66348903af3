#include "proxyclust/remote_encoder.hpp"

#include <cmath>

#include "httplib.h"
#include "json.hpp"
#include "proxyclust/errors.hpp"

namespace proxyclust {

using nlohmann::json;

std::string make_encode_request(const TokenSequence& seq) {
  json body;
  body["tokens"] = seq.words;
  body["slot_index"] = seq.slot_index ? json(*seq.slot_index) : json(nullptr);
  if (seq.slot_is_proxy && seq.slot_index) {
    const auto col = seq.embeddings.col(*seq.slot_index);
    body["proxy_embedding"] = std::vector<double>(col.data(), col.data() + col.size());
  } else {
    body["proxy_embedding"] = nullptr;
  }
  return body.dump();
}

Handshake parse_handshake(const std::string& body) {
  try {
    const json j = json::parse(body);
    Handshake h;
    h.dim = j.at("dim").get<Index>();
    h.max_len = j.at("max_len").get<Index>();
    h.grad_supported = j.at("grad_supported").get<bool>();
    if (h.dim <= 0 || h.max_len <= 0) throw BackendUnavailableError("handshake reports non-positive dim or max_len");
    return h;
  } catch (const json::exception& e) {
    throw BackendUnavailableError(std::string("malformed handshake response: ") + e.what());
  }
}

Vector parse_encode_response(const std::string& body, Index expected_dim) {
  std::vector<double> values;
  Index dim = 0;
  try {
    const json j = json::parse(body);
    values = j.at("embedding").get<std::vector<double>>();
    dim = j.at("dim").get<Index>();
  } catch (const json::exception& e) {
    throw BackendUnavailableError(std::string("malformed encode response: ") + e.what());
  }
  if (dim != expected_dim || static_cast<Index>(values.size()) != expected_dim) {
    throw BackendUnavailableError("encode response has dimension " + std::to_string(values.size()) + ", expected " +
                                  std::to_string(expected_dim));
  }
  Vector v = Eigen::Map<const Vector>(values.data(), dim);
  for (Index i = 0; i < dim; ++i)
    if (!std::isfinite(v[i])) throw BackendUnavailableError("encode response contains non-finite values");
  return v;
}

RemoteEncoder::RemoteEncoder(std::string url, double timeout_seconds)
    : url_(std::move(url)), timeout_seconds_(timeout_seconds) {
  handshake_ = parse_handshake(post("/v1/handshake", "{}"));
}

RemoteEncoder::~RemoteEncoder() = default;

std::unique_ptr<httplib::Client> RemoteEncoder::acquire() const {
  {
    std::lock_guard lock(pool_mutex_);
    if (!pool_.empty()) {
      auto client = std::move(pool_.back());
      pool_.pop_back();
      return client;
    }
  }
  auto client = std::make_unique<httplib::Client>(url_);
  if (!client->is_valid()) throw BackendUnavailableError("invalid backend url '" + url_ + "'");
  const auto secs = static_cast<time_t>(timeout_seconds_);
  const auto usecs = static_cast<time_t>((timeout_seconds_ - static_cast<double>(secs)) * 1e6);
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_keep_alive(true);
  client->set_tcp_nodelay(true);
  return client;
}

void RemoteEncoder::release(std::unique_ptr<httplib::Client> client) const {
  std::lock_guard lock(pool_mutex_);
  pool_.push_back(std::move(client));
}

std::string RemoteEncoder::post(const std::string& path, const std::string& body) const {
  auto client = acquire();
  auto res = client->Post(path, body, "application/json");
  if (!res) {
    throw BackendUnavailableError("request to " + url_ + path + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendUnavailableError("request to " + url_ + path + " returned HTTP " + std::to_string(res->status) +
                                  ": " + res->body);
  }
  std::string out = std::move(res->body);
  release(std::move(client));
  return out;
}

UnitVector RemoteEncoder::encode(const TokenSequence& seq) const {
  check_sequence(seq);
  const Vector v = parse_encode_response(post("/v1/encode", make_encode_request(seq)), dim());
  return normalize(v);
}

}  // namespace proxyclust
