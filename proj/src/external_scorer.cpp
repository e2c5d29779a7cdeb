#include "lmbr/external_scorer.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <sstream>

#include "lmbr/errors.hpp"
#include "lmbr/nbest.hpp"

namespace lmbr {

namespace {

/// Buffered line I/O over a read and a write descriptor.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, pid_t child) : read_fd_(read_fd), write_fd_(write_fd), child_(child) {
    // A peer that exits must surface as a TransportError, not SIGPIPE.
    ::signal(SIGPIPE, SIG_IGN);
  }
  ~FdChannel() override {
    ::close(write_fd_);
    if (read_fd_ != write_fd_) ::close(read_fd_);
    if (child_ > 0) {
      int status = 0;
      if (::waitpid(child_, &status, WNOHANG) == 0) {
        ::kill(child_, SIGTERM);
        ::waitpid(child_, &status, 0);
      }
    }
  }

  void send_line(const std::string& line) override {
    std::string data = line + '\n';
    std::size_t off = 0;
    while (off < data.size()) {
      const ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("write to scorer failed: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  std::string receive_line(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw TransportError("timed out waiting for scorer reply");
      pollfd pfd{read_fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("poll failed: ") + std::strerror(errno));
      }
      if (ready == 0) throw TransportError("timed out waiting for scorer reply");
      char chunk[4096];
      const ssize_t n = ::read(read_fd_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw TransportError(std::string("read from scorer failed: ") + std::strerror(errno));
      }
      if (n == 0) throw TransportError("scorer closed the connection");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int read_fd_;
  int write_fd_;
  pid_t child_;
  std::string buffer_;
};

}  // namespace

std::unique_ptr<LineChannel> open_process_channel(const std::string& command) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
    throw TransportError(std::string("pipe failed: ") + std::strerror(errno));
  const pid_t pid = ::fork();
  if (pid < 0) throw TransportError(std::string("fork failed: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<FdChannel>(from_child[0], to_child[1], pid);
}

std::unique_ptr<LineChannel> open_tcp_channel(const std::string& host, int port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw TransportError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (addrinfo* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw TransportError("scorer unreachable at " + host + ":" + service);
  return std::make_unique<FdChannel>(fd, fd, -1);
}

std::unique_ptr<LineChannel> open_channel(const std::string& address) {
  if (address.rfind("tcp:", 0) == 0) {
    const std::string rest = address.substr(4);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw TransportError("expected tcp:HOST:PORT, got " + address);
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw TransportError("bad port in " + address);
    }
    return open_tcp_channel(rest.substr(0, colon), port);
  }
  if (address.rfind("cmd:", 0) == 0) return open_process_channel(address.substr(4));
  return open_process_channel(address);
}

ExternalScorer::ExternalScorer(std::unique_ptr<LineChannel> channel, SymbolTable& symbols,
                               std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), symbols_(symbols), timeout_(timeout) {}

ExternalScorer::~ExternalScorer() {
  try {
    free_all();
  } catch (const std::exception&) {
    // The peer may already be gone.
  }
}

std::string ExternalScorer::request(const std::string& line) {
  std::string reply;
  try {
    channel_->send_line(line);
    reply = channel_->receive_line(timeout_);
  } catch (const TransportError& e) {
    throw TransportError("sentence " + sentence_id_ + ": " + e.what());
  }
  if (reply.rfind("ERR", 0) == 0)
    throw TransportError("sentence " + sentence_id_ + ": scorer error:" + reply.substr(3));
  return reply;
}

std::int64_t ExternalScorer::parse_ok_state(const std::string& reply) {
  std::istringstream in(reply);
  std::string ok;
  std::int64_t state = 0;
  if (!(in >> ok >> state) || ok != "OK")
    throw TransportError("sentence " + sentence_id_ + ": protocol violation, expected 'OK <state>', got '" + reply + "'");
  issued_.push_back(state);
  return state;
}

void ExternalScorer::free_all() {
  for (auto s : issued_) request("FREE " + std::to_string(s));
  issued_.clear();
  cache_.clear();
}

ScorerState ExternalScorer::start(std::span<const TokenId> source) {
  free_all();
  if (sentence_id_.empty()) sentence_id_ = std::to_string(auto_id_);
  ++auto_id_;
  std::string line = "INIT " + sentence_id_ + " |||";
  for (TokenId t : source) line += " " + symbols_.symbol(t);
  ScorerState s;
  s.words.push_back(parse_ok_state(request(line)));
  return s;
}

Distribution ExternalScorer::distribution(const ScorerState& state) {
  const std::int64_t id = state.words.at(0);
  if (auto it = cache_.find(id); it != cache_.end()) return it->second;
  const std::string reply = request("DIST " + std::to_string(id));
  auto violation = [&](const std::string& why) {
    return TransportError("sentence " + sentence_id_ + ": protocol violation (" + why + "): '" + reply + "'");
  };
  const auto fields = split_fields(reply);
  if (fields.size() != 3) throw violation("expected three '|||' fields");
  {
    std::istringstream head(fields[0]);
    std::string tag;
    std::int64_t echoed = 0;
    if (!(head >> tag >> echoed) || tag != "DIST" || echoed != id) throw violation("bad DIST header");
  }
  std::vector<std::pair<TokenId, double>> entries;
  const auto items = split_tokens(fields[1]);
  if (items.size() % 2 != 0) throw violation("odd token/logprob list");
  for (std::size_t i = 0; i < items.size(); i += 2) {
    char* end = nullptr;
    const double lp = std::strtod(items[i + 1].c_str(), &end);
    if (end != items[i + 1].c_str() + items[i + 1].size() || std::isnan(lp)) throw violation("bad log-probability");
    const TokenId t = symbols_.intern(items[i]);
    entries.emplace_back(t, lp);
    seen_[t] = true;
  }
  const auto tail = split_tokens(fields[2]);
  if (tail.size() != 2 || tail[0] != "DEFAULT") throw violation("missing DEFAULT");
  char* end = nullptr;
  const double def = std::strtod(tail[1].c_str(), &end);
  if (end != tail[1].c_str() + tail[1].size() || std::isnan(def)) throw violation("bad default");
  Distribution d(std::move(entries), def);
  cache_.emplace(id, d);
  return d;
}

ScorerState ExternalScorer::advance(const ScorerState& state, TokenId token) {
  ScorerState s;
  s.words.push_back(parse_ok_state(
      request("ADV " + std::to_string(state.words.at(0)) + " ||| " + symbols_.symbol(token))));
  return s;
}

std::vector<TokenId> ExternalScorer::vocabulary() const {
  std::vector<TokenId> v;
  for (const auto& [t, _] : seen_) v.push_back(t);
  return v;
}

}  // namespace lmbr
