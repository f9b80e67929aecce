#include "phd/session.hpp"

#include <charconv>
#include <chrono>
#include <iomanip>
#include <sstream>

namespace phd {

namespace {

const char* mode_name(QueryMode m) { return m == QueryMode::Parallel ? "parallel" : "semijoin"; }

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

const std::string& arg(const std::vector<std::string>& args, std::size_t i, const std::string& command) {
  if (i >= args.size()) throw InputError(command + ": missing argument");
  return args[i];
}

CommandResult run_load(Master& m, const std::vector<std::string>& args) {
  CommandResult r;
  const auto triples = parse_triples(arg(args, 0, "load"));
  std::vector<std::size_t> assignment;
  if (args.size() > 1 && !args[1].empty()) assignment = parse_assignment(args[1]);
  m.load(triples, assignment.empty() ? nullptr : &assignment);
  const auto metrics = m.metrics();
  r.out = "loaded " + std::to_string(triples.size()) + " triples on " + std::to_string(m.workers()) + " workers\n";
  r.out += "main_triples";
  for (auto c : metrics.main_counts) r.out += " " + std::to_string(c);
  r.out += "\n";
  return r;
}

CommandResult run_stats(Master& m) {
  CommandResult r;
  const auto& s = m.stats();
  std::ostringstream out;
  out << "predicate\tpS\tpO\teffective_pS\teffective_pO\n";
  for (const auto& [p, raw] : s.raw) {
    out << p << '\t' << fixed(raw.subject, 4) << '\t' << fixed(raw.object, 4) << '\t'
        << fixed(s.subject_score(p), 4) << '\t' << fixed(s.object_score(p), 4) << '\n';
  }
  r.out = out.str();
  return r;
}

CommandResult run_queries(Master& m, const std::vector<std::string>& args) {
  CommandResult r;
  const auto queries = parse_query_file(arg(args, 0, "query"));
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto rep = m.run(queries[i]);
    r.out += "# query " + std::to_string(i + 1) + "\n" + rep.result.to_text();
    r.out += "# mode=" + std::string(mode_name(rep.mode)) + " rows=" + std::to_string(rep.result.rows.size()) +
             (rep.triggered ? " redistributed" : "") + "\n";
    r.err += "query " + std::to_string(i + 1) + ": " + fixed(rep.wall_ms, 3) + " ms (redistribution " +
             fixed(rep.redistribute_ms, 3) + " ms)\n";
  }
  return r;
}

CommandResult run_workload(Master& m, const std::vector<std::string>& args) {
  CommandResult r;
  const auto queries = parse_query_file(arg(args, 0, "workload"));
  r.out = "query_seq,mode,wall_ms,cumulative_ms,replication_ratio,remote_bytes\n";
  double cumulative = 0.0;
  auto last = m.metrics();
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto rep = m.run(queries[i]);
    cumulative += rep.wall_ms;
    const auto now = m.metrics();
    const auto bytes = now.traffic.remote.total_bytes() - last.traffic.remote.total_bytes();
    r.out += std::to_string(i + 1) + "," + mode_name(rep.mode) + "," + fixed(rep.wall_ms, 3) + "," +
             fixed(cumulative, 3) + "," + fixed(now.replication_ratio, 6) + "," + std::to_string(bytes) + "\n";
    last = now;
  }
  return r;
}

CommandResult run_update(Master& m, const std::vector<std::string>& args) {
  CommandResult r;
  const auto ops = parse_updates(arg(args, 0, "update"));
  const auto t0 = std::chrono::steady_clock::now();
  const auto applied = m.apply_updates(ops);
  std::size_t ins = 0, del = 0, ins_ok = 0, del_ok = 0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].kind == UpdateKind::Insert) {
      ++ins;
      ins_ok += applied[i];
    } else {
      ++del;
      del_ok += applied[i];
    }
  }
  r.out = "inserted " + std::to_string(ins_ok) + "/" + std::to_string(ins) + " deleted " + std::to_string(del_ok) +
          "/" + std::to_string(del) + "\n";
  r.err = "update: " +
          fixed(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count(), 3) +
          " ms\n";
  return r;
}

}  // namespace

CommandResult execute_command(Master& m, const std::string& command, const std::vector<std::string>& args) {
  try {
    if (command == "load") return run_load(m, args);
    if (command == "query") return run_queries(m, args);
    if (command == "workload") return run_workload(m, args);
    if (command == "update") return run_update(m, args);
    if (command == "metrics") return CommandResult{true, m.metrics().to_text(), {}};
    if (command == "stats") return run_stats(m);
    return CommandResult{false, {}, "unknown command '" + command + "'\n"};
  } catch (const std::exception& e) {
    return CommandResult{false, {}, command + ": " + e.what() + "\n"};
  }
}

std::string encode_request(const std::string& command, const std::vector<std::string>& args) {
  Writer w;
  w.str(command).u32(static_cast<std::uint32_t>(args.size()));
  for (const auto& a : args) w.blob(a);
  return w.take();
}

std::string encode_reply(const CommandResult& r) {
  Writer w;
  w.u8(r.ok ? 1 : 0).blob(r.out).blob(r.err);
  return w.take();
}

CommandResult decode_reply(const std::string& payload) {
  Reader r(payload);
  CommandResult out;
  out.ok = r.u8() != 0;
  out.out = r.blob();
  out.err = r.blob();
  return out;
}

void serve_master(Master& master, Endpoint& ep) {
  while (!ep.closed()) {
    auto msg = ep.next_command(Millis(1000));
    if (!msg || msg->tag != Tag::ClientRequest) continue;
    CommandResult res;
    std::string command;
    try {
      Reader r(msg->payload);
      command = r.str();
      std::vector<std::string> args(r.u32());
      for (auto& a : args) a = r.blob();
      if (command != "shutdown") res = execute_command(master, command, args);
    } catch (const WireError& e) {
      res = CommandResult{false, {}, std::string("bad request: ") + e.what() + "\n"};
    }
    ep.send(msg->sender, Tag::ClientReply, msg->op, encode_reply(res));
    if (command == "shutdown") {
      master.shutdown();
      return;
    }
  }
}

std::vector<std::size_t> parse_assignment(std::string_view text) {
  std::vector<std::size_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == text.size()) break;
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(text.data() + i, text.data() + text.size(), v);
    if (ec != std::errc{}) throw InputError("assignment file: expected a worker id at offset " + std::to_string(i));
    i = static_cast<std::size_t>(p - text.data());
    out.push_back(v);
  }
  return out;
}

}  // namespace phd
