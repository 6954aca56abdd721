#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "privfair/privfair.hpp"

namespace pf = privfair;

namespace {

struct Roster {
  pf::SchemeKind scheme = pf::SchemeKind::replicated3;
  std::map<int, std::string> servers;  // id -> host:port
  pf::SessionId sid;
};

pf::SessionId parse_session_id(const std::string& hex) {
  if (hex.size() != 32) throw pf::ParseError("session_id must be 32 hex chars");
  pf::SessionId sid;
  for (int i = 0; i < 16; ++i) {
    sid.bytes[i] = static_cast<pf::u8>(std::stoul(hex.substr(2 * i, 2), nullptr, 16));
  }
  return sid;
}

Roster load_roster(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pf::ParseError("cannot open roster file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw pf::ParseError(path + ": " + e.what());
  }
  Roster r;
  const std::string scheme = j.value("scheme", "3pc");
  if (scheme == "2pc") {
    r.scheme = pf::SchemeKind::additive2;
  } else if (scheme == "3pc") {
    r.scheme = pf::SchemeKind::replicated3;
  } else {
    throw pf::ParseError(path + ": scheme must be 2pc or 3pc");
  }
  if (!j.contains("servers")) throw pf::ParseError(path + ": missing servers map");
  for (auto& [key, value] : j["servers"].items()) {
    r.servers[std::stoi(key)] = value.get<std::string>();
  }
  const int expected = static_cast<int>(r.scheme);
  if (static_cast<int>(r.servers.size()) != expected) {
    throw pf::ParseError(path + ": roster needs exactly " +
                         std::to_string(expected) + " servers for " + scheme);
  }
  for (int p = 1; p <= expected; ++p) {
    if (!r.servers.count(p)) {
      throw pf::ParseError(path + ": missing server id " + std::to_string(p));
    }
  }
  if (j.contains("session_id")) {
    r.sid = parse_session_id(j["session_id"].get<std::string>());
  } else if (std::getenv("PRIVFAIR_SEED")) {
    pf::Prg g(pf::master_seed());
    r.sid = pf::SessionId::from_prg(g);
  }
  return r;
}

std::vector<pf::MetricKind> parse_metrics(const std::string& csv) {
  std::vector<pf::MetricKind> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(pf::parse_metric(item));
  }
  if (out.empty()) throw pf::ParseError("metric selection must be non-empty");
  return out;
}

pf::GroupNames parse_group_names(const std::string& csv) {
  pf::GroupNames names;
  auto pos = csv.find(',');
  if (pos == std::string::npos || pos == 0 || pos + 1 == csv.size()) {
    throw pf::ParseError("--group-names expects '<protected>,<unprotected>'");
  }
  names.protected_name = csv.substr(0, pos);
  names.unprotected_name = csv.substr(pos + 1);
  return names;
}

const char* metric_progress_name(pf::MetricKind m) {
  switch (m) {
    case pf::MetricKind::dp: return "DP";
    case pf::MetricKind::eop: return "EOP";
    case pf::MetricKind::eod: return "EOD";
    case pf::MetricKind::gacc: return "GACC";
  }
  return "?";
}

pf::SessionConfig make_config(const Roster& roster, pf::u8 party, int frac_bits,
                              int timeout_s) {
  pf::SessionConfig cfg;
  cfg.scheme = roster.scheme;
  cfg.party_id = party;
  cfg.codec.frac_bits = frac_bits;
  cfg.sid = roster.sid;
  cfg.seed = pf::master_seed();
  cfg.round_timeout = std::chrono::seconds(timeout_s);
  return cfg;
}

// Clients dial every server; servers dial lower ids and accept the rest.
std::unique_ptr<pf::SocketTransport> connect_as_client(const Roster& roster,
                                                       pf::u8 own_id, int timeout_s) {
  std::map<pf::u8, std::string> dial;
  for (const auto& [id, addr] : roster.servers) dial[static_cast<pf::u8>(id)] = addr;
  return std::make_unique<pf::SocketTransport>(own_id, "", dial, std::vector<pf::u8>{},
                                               std::chrono::seconds(timeout_s));
}

std::unique_ptr<pf::SocketTransport> connect_as_server(const Roster& roster,
                                                       int party,
                                                       const std::string& listen) {
  std::map<pf::u8, std::string> dial;
  std::vector<pf::u8> expect{pf::kDealerId, pf::kOwnerId, pf::kInvestigatorId};
  for (const auto& [id, addr] : roster.servers) {
    if (id < party) dial[static_cast<pf::u8>(id)] = addr;
    if (id > party) expect.push_back(static_cast<pf::u8>(id));
  }
  const std::string addr = listen.empty() ? roster.servers.at(party) : listen;
  return std::make_unique<pf::SocketTransport>(static_cast<pf::u8>(party), addr, dial,
                                               expect);
}

void write_report_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path);
  if (!out) throw pf::ParseError("cannot write report file: " + path);
  out << text;
}

int run_dealer(const Roster& roster, const std::vector<pf::MetricKind>& metrics,
               int frac_bits, int timeout_s, int samples, int features, int hidden,
               int classes, const std::string& arch_s, const std::string& out_prep) {
  const pf::ModelArch arch = arch_s == "mlp1" ? pf::ModelArch::mlp1
                                              : pf::ModelArch::logistic_regression;
  const auto demand = pf::audit_prep_demand(metrics, arch, samples, features, hidden,
                                            classes, frac_bits, roster.scheme);
  pf::Prg rng = pf::Prg(pf::master_seed()).fork(pf::kDealerId);
  std::cerr << "dealer: sized " << demand.triples << " triples, "
            << demand.random_with_bits << " random-with-bits\n";
  auto serve = [&](auto scheme_tag) {
    using S = decltype(scheme_tag);
    auto pools = pf::dealer_gen_all<S>(demand, rng);
    if (!out_prep.empty()) {
      for (pf::PrepKind kind : {pf::PrepKind::triples, pf::PrepKind::random_bits,
                                pf::PrepKind::random_with_bits}) {
        auto bytes = pf::serialize_prep<S>(
            kind, std::span<const pf::PrepPool<S>>(pools.data(), pools.size()));
        std::string name = out_prep + "/prep_" +
                           std::to_string(static_cast<int>(kind)) + ".pfd";
        std::ofstream f(name, std::ios::binary);
        if (!f) throw pf::ParseError("cannot write " + name);
        f.write(reinterpret_cast<const char*>(bytes.data()),
                static_cast<std::streamsize>(bytes.size()));
      }
    }
    auto transport = connect_as_client(roster, pf::kDealerId, timeout_s);
    pf::Session sess(make_config(roster, pf::kDealerId, frac_bits, timeout_s),
                     *transport);
    pf::dealer_send<S>(sess, pools);
  };
  if (roster.scheme == pf::SchemeKind::additive2) {
    serve(pf::Additive2{});
  } else {
    serve(pf::Replicated3{});
  }
  std::cerr << "dealer: batches delivered\n";
  return 0;
}

int run_server(const Roster& roster, int party,
               const std::vector<pf::MetricKind>& metrics, int frac_bits,
               int timeout_s, const std::string& listen) {
  auto transport = connect_as_server(roster, party, listen);
  pf::Session sess(make_config(roster, static_cast<pf::u8>(party), frac_bits, timeout_s),
                   *transport);
  if (roster.scheme == pf::SchemeKind::additive2) {
    pf::server_run<pf::Additive2>(sess, metrics);
  } else {
    pf::server_run<pf::Replicated3>(sess, metrics);
  }
  std::cerr << "server " << party << ": protocols complete\n";
  return 0;
}

int run_owner(const Roster& roster, const std::string& model_path,
              const std::vector<pf::MetricKind>& metrics, int frac_bits,
              int timeout_s) {
  const pf::PlainModel model = pf::load_model(model_path);
  std::cout << "Encrypting model parameters..." << std::endl;
  std::cout << "Connecting to servers..." << std::endl;
  auto transport = connect_as_client(roster, pf::kOwnerId, timeout_s);
  std::cout << "Connected to servers..." << std::endl;
  pf::Session sess(make_config(roster, pf::kOwnerId, frac_bits, timeout_s), *transport);
  pf::Prg rng = pf::Prg(pf::master_seed()).fork(pf::kOwnerId);
  std::cout << "Secret sharing parameters with servers..." << std::endl;
  if (roster.scheme == pf::SchemeKind::additive2) {
    pf::owner_submit<pf::Additive2>(sess, model, rng);
  } else {
    pf::owner_submit<pf::Replicated3>(sess, model, rng);
  }
  for (pf::MetricKind m : metrics) {
    std::cout << "Servers running MPC protocol for " << metric_progress_name(m)
              << std::endl;
  }
  std::cout << "Finished protocol execution" << std::endl;
  return 0;
}

int run_investigator(const Roster& roster, const std::string& data_path, int classes,
                     const std::vector<pf::MetricKind>& metrics, int frac_bits,
                     int timeout_s, const std::string& out,
                     const pf::GroupNames& names) {
  const pf::PlainDataset ds = pf::load_dataset(data_path, classes);
  std::cout << "Encrypting audit data" << std::endl;
  std::cout << "Connecting to servers..." << std::endl;
  auto transport = connect_as_client(roster, pf::kInvestigatorId, timeout_s);
  std::cout << "Connected to servers..." << std::endl;
  pf::Session sess(make_config(roster, pf::kInvestigatorId, frac_bits, timeout_s),
                   *transport);
  pf::Prg rng = pf::Prg(pf::master_seed()).fork(pf::kInvestigatorId);
  std::cout << "Secret sharing audit data with servers..." << std::endl;
  pf::FairnessReport report;
  if (roster.scheme == pf::SchemeKind::additive2) {
    pf::investigator_submit<pf::Additive2>(sess, ds, classes, rng);
    for (pf::MetricKind m : metrics) {
      std::cout << "Servers running MPC protocol for " << metric_progress_name(m)
                << std::endl;
    }
    report = pf::investigator_collect<pf::Additive2>(sess, metrics, classes);
  } else {
    pf::investigator_submit<pf::Replicated3>(sess, ds, classes, rng);
    for (pf::MetricKind m : metrics) {
      std::cout << "Servers running MPC protocol for " << metric_progress_name(m)
                << std::endl;
    }
    report = pf::investigator_collect<pf::Replicated3>(sess, metrics, classes);
  }
  std::cout << "Finished protocol execution" << std::endl;
  std::cout << "Aggregating results..." << std::endl;
  const std::string text = report.to_string(names);
  std::cout << text;
  write_report_file(out, text);
  return 0;
}

int run_simulate(const std::string& model_path, const std::string& data_path,
                 const std::string& scheme_s,
                 const std::vector<pf::MetricKind>& metrics, int frac_bits,
                 int timeout_s, const std::string& out,
                 const std::string& transcript_dir, const pf::GroupNames& names) {
  pf::SimulateOptions opts;
  opts.scheme = scheme_s == "2pc" ? pf::SchemeKind::additive2
                                  : pf::SchemeKind::replicated3;
  opts.metrics = metrics;
  opts.frac_bits = frac_bits;
  opts.seed = pf::master_seed();
  opts.timeout = std::chrono::seconds(timeout_s);
  const pf::PlainModel model = pf::load_model(model_path);
  const pf::PlainDataset ds = pf::load_dataset(data_path, model.classes);
  std::cout << "Encrypting model parameters..." << std::endl;
  std::cout << "Encrypting audit data" << std::endl;
  std::cout << "Secret sharing with " << static_cast<int>(opts.scheme)
            << " local servers..." << std::endl;
  auto result = pf::simulate_audit(model, ds, opts);
  for (pf::MetricKind m : metrics) {
    std::cout << "Servers running MPC protocol for " << metric_progress_name(m)
              << std::endl;
  }
  std::cout << "Finished protocol execution" << std::endl;
  std::cout << "Aggregating results..." << std::endl;
  const std::string text = result.report.to_string(names);
  std::cout << text;
  write_report_file(out, text);
  if (!transcript_dir.empty()) {
    for (const auto& [party, bytes] : result.transcripts) {
      std::string name = transcript_dir + "/transcript_" + std::to_string(party) + ".bin";
      std::ofstream f(name, std::ios::binary);
      if (!f) throw pf::ParseError("cannot write " + name);
      f.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    }
  }
  return 0;
}

int run_plain_audit(const std::string& model_path, const std::string& data_path,
                    const std::vector<pf::MetricKind>& metrics,
                    const std::string& out, const pf::GroupNames& names) {
  const pf::PlainModel model = pf::load_model(model_path);
  const pf::PlainDataset ds = pf::load_dataset(data_path, model.classes);
  const auto labels = pf::plain_infer(model, ds);
  std::ostringstream ss;
  for (pf::MetricKind m : metrics) {
    const auto rep = pf::plain_metrics(labels, ds.y, ds.a, model.classes, m);
    rep.render(ss, names);
  }
  std::cout << ss.str();
  write_report_file(out, ss.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"privfair: privacy-preserving group-fairness audits over MPC"};
  app.require_subcommand(1);

  std::string roster_path, model_path, data_path, out_path, listen_addr;
  std::string scheme_s = "3pc", metrics_s = "dp,eop", arch_s = "logistic_regression";
  std::string group_names_s = "protected,unprotected";
  std::string transcript_dir, out_prep;
  int frac_bits = 16, timeout_s = 30, party = 1, classes = 2;
  int samples = 0, features = 0, hidden = 0;

  auto add_common = [&](CLI::App* cmd, bool needs_roster) {
    if (needs_roster) {
      cmd->add_option("--roster", roster_path, "roster JSON file")->required();
    }
    cmd->add_option("--metrics", metrics_s, "comma list of dp,eop,eod,gacc");
    cmd->add_option("--frac-bits", frac_bits, "fixed-point fractional bits");
    cmd->add_option("--timeout", timeout_s, "round timeout, seconds");
  };

  auto* dealer = app.add_subcommand("dealer", "generate and serve correlated randomness");
  add_common(dealer, true);
  dealer->add_option("--samples", samples, "audit set size N")->required();
  dealer->add_option("--features", features, "feature count d")->required();
  dealer->add_option("--classes", classes, "class count C");
  dealer->add_option("--hidden", hidden, "mlp hidden width");
  dealer->add_option("--arch", arch_s, "logistic_regression or mlp1");
  dealer->add_option("--out-prep", out_prep, "also write PFD1 batch files here");

  auto* server = app.add_subcommand("server", "run a compute party");
  add_common(server, true);
  server->add_option("--party-id", party, "server id (1-based)")->required();
  server->add_option("--listen", listen_addr, "listen address override");

  auto* owner = app.add_subcommand("owner", "submit the model (Alice)");
  add_common(owner, true);
  owner->add_option("--model", model_path, "model file")->required();

  auto* investigator = app.add_subcommand("investigator", "submit data, collect report (Bob)");
  add_common(investigator, true);
  investigator->add_option("--data", data_path, "audit dataset CSV")->required();
  investigator->add_option("--classes", classes, "class count C");
  investigator->add_option("--out", out_path, "write the report here");
  investigator->add_option("--group-names", group_names_s, "protected,unprotected labels");

  auto* simulate = app.add_subcommand("simulate", "run every role in one process");
  add_common(simulate, false);
  simulate->add_option("--scheme", scheme_s, "2pc or 3pc");
  simulate->add_option("--model", model_path, "model file")->required();
  simulate->add_option("--data", data_path, "audit dataset CSV")->required();
  simulate->add_option("--out", out_path, "write the report here");
  simulate->add_option("--transcript-dir", transcript_dir, "dump per-party transcripts");
  simulate->add_option("--group-names", group_names_s, "protected,unprotected labels");

  auto* plain = app.add_subcommand("plain-audit", "reference audit without encryption");
  plain->add_option("--metrics", metrics_s, "comma list of dp,eop,eod,gacc");
  plain->add_option("--model", model_path, "model file")->required();
  plain->add_option("--data", data_path, "audit dataset CSV")->required();
  plain->add_option("--out", out_path, "write the report here");
  plain->add_option("--group-names", group_names_s, "protected,unprotected labels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (frac_bits < 11 || frac_bits > 20) {
      throw pf::ParseError("--frac-bits must lie in [11, 20]");
    }
    const auto metrics = parse_metrics(metrics_s);
    const auto names = parse_group_names(group_names_s);
    if (dealer->parsed()) {
      return run_dealer(load_roster(roster_path), metrics, frac_bits, timeout_s,
                        samples, features, hidden, classes, arch_s, out_prep);
    }
    if (server->parsed()) {
      return run_server(load_roster(roster_path), party, metrics, frac_bits,
                        timeout_s, listen_addr);
    }
    if (owner->parsed()) {
      return run_owner(load_roster(roster_path), model_path, metrics, frac_bits,
                       timeout_s);
    }
    if (investigator->parsed()) {
      return run_investigator(load_roster(roster_path), data_path, classes, metrics,
                              frac_bits, timeout_s, out_path, names);
    }
    if (simulate->parsed()) {
      return run_simulate(model_path, data_path, scheme_s, metrics, frac_bits,
                          timeout_s, out_path, transcript_dir, names);
    }
    if (plain->parsed()) {
      return run_plain_audit(model_path, data_path, metrics, out_path, names);
    }
  } catch (const pf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
