// phdstore: operator CLI. Runs a cluster in-process (--local N) or talks to a
// master started with `phdstore serve --role master`.
#include <CLI11.hpp>

#include <csignal>
#include <iostream>

#include "phd/cluster.hpp"
#include "phd/session.hpp"

using namespace phd;

namespace {

struct Common {
  std::string config_file;
  std::vector<std::string> sets;
  std::size_t local = 0;
  std::string master;

  Config config() const {
    Config cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    for (const auto& s : sets) cfg.set(s);
    if (local > 0) cfg.set("workers", std::to_string(local));
    return cfg;
  }
};

void add_common(CLI::App* app, Common& c, bool target) {
  app->add_option("--config", c.config_file, "key=value configuration file")->check(CLI::ExistingFile);
  app->add_option("--set", c.sets, "configuration override key=value (repeatable)");
  if (target) {
    auto* local = app->add_option("--local", c.local, "run N workers in this process")->check(CLI::Range(1, 4096));
    auto* master = app->add_option("--master", c.master, "address host:port of a running master");
    local->excludes(master);
  }
}

int print(const CommandResult& r) {
  std::cout << r.out;
  std::cerr << r.err;
  return r.ok ? 0 : 1;
}

int serve(const Common& common, const std::string& role, int id, const std::string& listen,
          const std::string& master_addr, long wait_ms) {
  const auto cfg = common.config();
  const auto opts = options_from_config(cfg);
  const auto bind = listen.empty() ? Address{"127.0.0.1", 0} : parse_address(listen);
  if (role == "master") {
    TcpEndpoint ep(kMasterId, bind);
    std::cerr << "master listening on " << bind.host << ":" << ep.port() << ", waiting for " << opts.workers
              << " workers\n";
    await_registration(ep, opts.workers, Millis(wait_ms));
    Master m(opts.workers, ep, opts.master);
    std::cerr << "cluster ready\n";
    serve_master(m, ep);
    ep.close();
    return 0;
  }
  if (role == "worker") {
    if (id < 0 || static_cast<std::size_t>(id) >= opts.workers) throw InputError("--id must be in [0, workers)");
    if (master_addr.empty()) throw InputError("a worker needs --master host:port");
    TcpEndpoint ep(static_cast<NodeId>(id), bind);
    register_with_master(ep, parse_address(master_addr), bind.host, Millis(wait_ms));
    Worker w(static_cast<NodeId>(id), opts.workers, ep, opts.placement, opts.master.timeout);
    w.run();
    ep.close();
    return 0;
  }
  throw InputError("--role must be master or worker");
}

int client(const Common& common, const std::string& command, const std::vector<std::string>& args,
           const std::string& data, const std::string& assign) {
  if (common.local == 0 && common.master.empty()) throw InputError("give --local N or --master host:port");
  if (common.local > 0) {
    LocalCluster cluster(options_from_config(common.config()));
    if (!data.empty()) {
      auto r = execute_command(cluster.master(), "load",
                               {read_file(data), assign.empty() ? std::string() : read_file(assign)});
      if (!r.ok) return print(r);
      if (command != "load") std::cerr << r.out;
    } else if (command == "load") {
      throw InputError("load needs --data");
    }
    if (command == "load") return 0;
    return print(execute_command(cluster.master(), command, args));
  }
  const auto cfg = common.config();
  TcpClient conn(parse_address(common.master));
  const Millis timeout(cfg.get_int("timeout_ms", 600000));
  auto send = [&](const std::string& cmd, const std::vector<std::string>& a) {
    const auto reply = conn.request(Tag::ClientRequest, encode_request(cmd, a), timeout);
    if (reply.tag != Tag::ClientReply) throw TransportError("unexpected reply from master");
    return decode_reply(reply.payload);
  };
  if (!data.empty()) {
    const auto r = send("load", {read_file(data), assign.empty() ? std::string() : read_file(assign)});
    if (!r.ok || command == "load") return print(r);
    std::cerr << r.out;
  } else if (command == "load") {
    throw InputError("load needs --data");
  }
  return print(send(command, args));
}

}  // namespace

int main(int argc, char** argv) {
  std::signal(SIGPIPE, SIG_IGN);
  CLI::App app{"phdstore: workload-adaptive distributed RDF store"};
  app.require_subcommand(1);
  Common common;

  std::string role, listen, master_addr;
  int id = -1;
  long wait_ms = 600000;
  auto* serve_cmd = app.add_subcommand("serve", "start a master or worker node");
  add_common(serve_cmd, common, false);
  serve_cmd->add_option("--role", role, "master or worker")->required();
  serve_cmd->add_option("--id", id, "worker id");
  serve_cmd->add_option("--listen", listen, "bind address host:port (port 0 picks one)");
  serve_cmd->add_option("--master", master_addr, "master address (workers)");
  serve_cmd->add_option("--wait-ms", wait_ms, "registration timeout");

  std::string data, assign, file;
  struct Sub {
    const char* name;
    const char* help;
    bool needs_file;
  };
  const Sub subs[] = {{"load", "partition a triple file across the workers", false},
                      {"query", "run every query of a file", true},
                      {"workload", "run a query sequence and print a CSV series", true},
                      {"update", "apply a +/- update batch file", true},
                      {"metrics", "print traffic, replication and balance metrics", false},
                      {"stats", "print global predicate statistics", false},
                      {"shutdown", "stop a remote cluster", false}};
  std::vector<std::pair<CLI::App*, const Sub*>> clients;
  for (const auto& s : subs) {
    auto* c = app.add_subcommand(s.name, s.help);
    add_common(c, common, true);
    c->add_option("--data", data, "triple file to load first")->check(CLI::ExistingFile);
    c->add_option("--assign", assign, "per-line worker assignment for --data")->check(CLI::ExistingFile);
    if (s.needs_file) c->add_option("file", file, "input file")->required()->check(CLI::ExistingFile);
    clients.emplace_back(c, &s);
  }

  CLI11_PARSE(app, argc, argv);
  try {
    if (*serve_cmd) return serve(common, role, id, listen, master_addr, wait_ms);
    for (const auto& [c, s] : clients) {
      if (!*c) continue;
      if (std::string(s->name) == "shutdown") {
        if (common.master.empty()) throw InputError("shutdown needs --master");
        return client(common, "shutdown", {}, "", "");
      }
      std::vector<std::string> args;
      if (s->needs_file) args.push_back(read_file(file));
      return client(common, s->name, args, data, assign);
    }
  } catch (const std::exception& e) {
    std::cerr << "phdstore: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
