#include "mgtd/transport.hpp"

#include <csignal>
#include <cstring>
#include <mutex>
#include <stdexcept>

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "httplib.h"

namespace mgtd {

namespace {

// A dead child must surface as a read/write error, not kill the process.
void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

}  // namespace

SubprocessTransport::SubprocessTransport(std::string command)
    : command_(std::move(command)) {
  ignore_sigpipe_once();

  int to_child[2];
  int from_child[2];
  if (pipe(to_child) != 0 || pipe(from_child) != 0) {
    throw std::runtime_error("subprocess transport: pipe() failed");
  }

  pid_t pid = fork();
  if (pid < 0) {
    throw std::runtime_error("subprocess transport: fork() failed");
  }
  if (pid == 0) {
    dup2(to_child[0], STDIN_FILENO);
    dup2(from_child[1], STDOUT_FILENO);
    close(to_child[0]);
    close(to_child[1]);
    close(from_child[0]);
    close(from_child[1]);
    execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }

  close(to_child[0]);
  close(from_child[1]);
  child_stdin_ = to_child[1];
  child_stdout_ = from_child[0];
  pid_ = pid;
}

SubprocessTransport::~SubprocessTransport() {
  if (child_stdin_ >= 0) close(child_stdin_);
  if (child_stdout_ >= 0) close(child_stdout_);
  if (pid_ > 0) {
    int status = 0;
    waitpid(static_cast<pid_t>(pid_), &status, 0);
  }
}

std::string SubprocessTransport::roundtrip(const std::string& request) {
  std::string payload = request;
  payload.push_back('\n');
  std::size_t written = 0;
  while (written < payload.size()) {
    ssize_t n = write(child_stdin_, payload.data() + written,
                      payload.size() - written);
    if (n <= 0) {
      throw std::runtime_error("subprocess transport: child \"" + command_ +
                               "\" is not accepting input");
    }
    written += static_cast<std::size_t>(n);
  }

  for (;;) {
    auto newline = buffer_.find('\n');
    if (newline != std::string::npos) {
      std::string line = buffer_.substr(0, newline);
      buffer_.erase(0, newline + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = read(child_stdout_, chunk, sizeof(chunk));
    if (n <= 0) {
      throw std::runtime_error("subprocess transport: child \"" + command_ +
                               "\" closed its output before replying");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

std::string SubprocessTransport::describe() const {
  return "subprocess(" + command_ + ")";
}

struct HttpTransport::Impl {
  std::string url;
  std::string host;
  int port = 80;
  std::string path;
  std::unique_ptr<httplib::Client> client;
};

HttpTransport::HttpTransport(const std::string& url) : impl_(new Impl) {
  impl_->url = url;
  constexpr std::string_view scheme = "http://";
  if (url.rfind(scheme, 0) != 0) {
    throw std::runtime_error(
        "http transport: only plain http:// endpoints are supported, got " +
        url);
  }
  std::string rest = url.substr(scheme.size());
  auto slash = rest.find('/');
  std::string host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
  impl_->path = slash == std::string::npos ? "/" : rest.substr(slash);
  auto colon = host_port.find(':');
  if (colon == std::string::npos) {
    impl_->host = host_port;
  } else {
    impl_->host = host_port.substr(0, colon);
    impl_->port = std::stoi(host_port.substr(colon + 1));
  }
  if (impl_->host.empty()) {
    throw std::runtime_error("http transport: no host in url " + url);
  }
  impl_->client = std::make_unique<httplib::Client>(impl_->host, impl_->port);
  impl_->client->set_read_timeout(300, 0);
}

HttpTransport::~HttpTransport() = default;

std::string HttpTransport::roundtrip(const std::string& request) {
  auto res = impl_->client->Post(impl_->path, request, "application/json");
  if (!res) {
    throw std::runtime_error("http transport: request to " + impl_->url +
                             " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw std::runtime_error("http transport: " + impl_->url + " returned " +
                             std::to_string(res->status));
  }
  return res->body;
}

std::string HttpTransport::describe() const { return "http(" + impl_->url + ")"; }

std::unique_ptr<LineTransport> make_transport(const ExternalEndpoint& endpoint) {
  if (!endpoint.http_url.empty() && !endpoint.command.empty()) {
    throw std::runtime_error(
        "external endpoint: specify either an http url or a command, not both");
  }
  if (!endpoint.http_url.empty()) {
    return std::make_unique<HttpTransport>(endpoint.http_url);
  }
  if (!endpoint.command.empty()) {
    return std::make_unique<SubprocessTransport>(endpoint.command);
  }
  throw std::runtime_error("external endpoint: no url or command given");
}

}  // namespace mgtd
