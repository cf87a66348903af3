#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "proxyclust/encoder.hpp"

namespace httplib {
class Client;
}

namespace proxyclust {

// Wire format of the sidecar protocol.
//   POST /v1/handshake -> {"dim": int, "max_len": int, "grad_supported": bool}
//   POST /v1/encode    {"tokens": [str], "slot_index": int|null, "proxy_embedding": [num]|null}
//                      -> {"embedding": [num], "dim": int}
struct Handshake {
  Index dim = 0;
  Index max_len = 0;
  bool grad_supported = false;
};

std::string make_encode_request(const TokenSequence& seq);
Handshake parse_handshake(const std::string& body);
// Throws BackendUnavailableError on malformed bodies or a dimension mismatch.
Vector parse_encode_response(const std::string& body, Index expected_dim);

// Forward-only client; wrap in FiniteDifferenceEncoder for gradients.
class RemoteEncoder final : public TextEncoder {
 public:
  // url: "http://host:port". Performs the handshake; throws BackendUnavailableError.
  explicit RemoteEncoder(std::string url, double timeout_seconds = 30.0);
  ~RemoteEncoder() override;

  Index dim() const override { return handshake_.dim; }
  Index max_length() const override { return handshake_.max_len; }
  UnitVector encode(const TokenSequence& seq) const override;
  std::string describe() const override { return "remote(" + url_ + ")"; }

  const Handshake& handshake() const noexcept { return handshake_; }

 private:
  std::unique_ptr<httplib::Client> acquire() const;
  void release(std::unique_ptr<httplib::Client> client) const;
  std::string post(const std::string& path, const std::string& body) const;

  std::string url_;
  double timeout_seconds_;
  Handshake handshake_;
  mutable std::mutex pool_mutex_;
  mutable std::vector<std::unique_ptr<httplib::Client>> pool_;
};

}  // namespace proxyclust
