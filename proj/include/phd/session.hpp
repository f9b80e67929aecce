#pragma once

#include <string>
#include <vector>

#include "phd/master.hpp"
#include "phd/transport.hpp"

namespace phd {

/// One operator command and its textual result. Timing and diagnostics go to
/// `err` so that `out` is deterministic for fixed seeds and pins.
struct CommandResult {
  bool ok = true;
  std::string out;
  std::string err;
};

/// Commands: load <triples> [assignment], query <queries>, workload <queries>,
/// update <ops>, metrics, stats. Arguments are file contents, not paths.
CommandResult execute_command(Master& master, const std::string& command, const std::vector<std::string>& args);

/// ClientRequest payload: str command, u32 count, blob per argument.
std::string encode_request(const std::string& command, const std::vector<std::string>& args);
/// ClientReply payload: u8 ok, blob out, blob err.
std::string encode_reply(const CommandResult& r);
CommandResult decode_reply(const std::string& payload);

/// Serves client requests on the master endpoint until a "shutdown" command
/// arrives, then shuts the workers down.
void serve_master(Master& master, Endpoint& ep);

/// Worker ids, one integer per triple line (whitespace separated).
std::vector<std::size_t> parse_assignment(std::string_view text);

}  // namespace phd
