#pragma once

#include <memory>
#include <string>

namespace mgtd {

// Where an external adapter lives. Exactly one of the two fields is set:
// an HTTP POST endpoint, or a command spawned as a subprocess that speaks
// line-delimited JSON over its standard streams.
struct ExternalEndpoint {
  std::string http_url;
  std::string command;

  bool empty() const { return http_url.empty() && command.empty(); }
};

// One JSON object out, one JSON object back. Payload encoding is left to the
// caller so this header stays free of JSON library types.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  virtual std::string roundtrip(const std::string& request) = 0;
  virtual std::string describe() const = 0;
};

// Spawns `command` via /bin/sh and exchanges newline-terminated JSON objects
// over its stdin/stdout. The child is closed and reaped on destruction.
class SubprocessTransport final : public LineTransport {
 public:
  explicit SubprocessTransport(std::string command);
  ~SubprocessTransport() override;

  SubprocessTransport(const SubprocessTransport&) = delete;
  SubprocessTransport& operator=(const SubprocessTransport&) = delete;

  std::string roundtrip(const std::string& request) override;
  std::string describe() const override;

 private:
  std::string command_;
  int child_stdin_ = -1;
  int child_stdout_ = -1;
  long pid_ = -1;
  std::string buffer_;
};

// POSTs the request body as application/json and returns the response body.
// Only plain http:// endpoints are supported.
class HttpTransport final : public LineTransport {
 public:
  explicit HttpTransport(const std::string& url);
  ~HttpTransport() override;

  std::string roundtrip(const std::string& request) override;
  std::string describe() const override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<LineTransport> make_transport(const ExternalEndpoint& endpoint);

}  // namespace mgtd
