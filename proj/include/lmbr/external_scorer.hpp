#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "lmbr/scorer.hpp"
#include "lmbr/symbols.hpp"

namespace lmbr {

/// Newline-delimited duplex text stream.
class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void send_line(const std::string& line) = 0;
  /// Throws TransportError on end of stream or timeout.
  virtual std::string receive_line(std::chrono::milliseconds timeout) = 0;
};

/// Runs `command` under /bin/sh with its stdin/stdout connected to the channel.
std::unique_ptr<LineChannel> open_process_channel(const std::string& command);
std::unique_ptr<LineChannel> open_tcp_channel(const std::string& host, int port);
/// `tcp:HOST:PORT` or `cmd:COMMAND`; anything else is taken as a command.
std::unique_ptr<LineChannel> open_channel(const std::string& address);

/// Scorer proxied over the line protocol
///   INIT <id> ||| <source>   -> OK <state>
///   DIST <state>             -> DIST <state> ||| tok lp ... ||| DEFAULT lp
///   ADV <state> ||| <token>  -> OK <state>
///   FREE <state>             -> OK
/// with `ERR <message>` for failures. States are peer-assigned ids. One
/// request is outstanding at a time. Tokens in peer replies are interned
/// into `symbols`.
class ExternalScorer : public Scorer {
 public:
  ExternalScorer(std::unique_ptr<LineChannel> channel, SymbolTable& symbols,
                 std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~ExternalScorer() override;

  /// Identifier sent with the next INIT and quoted in transport errors.
  void set_sentence_id(std::string id) { sentence_id_ = std::move(id); }
  const std::string& sentence_id() const { return sentence_id_; }

  ScorerState start(std::span<const TokenId> source) override;
  Distribution distribution(const ScorerState& state) override;
  ScorerState advance(const ScorerState& state, TokenId token) override;
  /// Tokens seen in replies so far.
  std::vector<TokenId> vocabulary() const override;
  bool normalized() const override { return false; }

 private:
  std::string request(const std::string& line);
  std::int64_t parse_ok_state(const std::string& reply);
  void free_all();

  std::unique_ptr<LineChannel> channel_;
  SymbolTable& symbols_;
  std::chrono::milliseconds timeout_;
  std::string sentence_id_ = "0";
  std::size_t auto_id_ = 0;
  std::vector<std::int64_t> issued_;
  std::map<std::int64_t, Distribution> cache_;
  std::map<TokenId, bool> seen_;
};

}  // namespace lmbr
