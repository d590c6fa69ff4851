#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amecos/amecos.hpp"

namespace fs = std::filesystem;
using namespace amecos;

namespace {

enum Exit { kOk = 0, kRejected = 1, kInput = 2, kResource = 3 };

// --spec [OBJ=]NAME[:params]; without OBJ= it binds every object of the
// histories that has no spec yet.
void apply_specs(Registry& reg, const std::vector<std::string>& specs, const std::set<std::string>& objects) {
  for (const auto& s : specs) {
    auto eq = s.find('=');
    auto colon = s.find(':');
    if (eq != std::string::npos && (colon == std::string::npos || eq < colon)) {
      reg[s.substr(0, eq)] = spec_from_string(s.substr(eq + 1));
      continue;
    }
    for (const auto& o : objects)
      if (!reg.count(o)) reg[o] = spec_from_string(s);
  }
}

Registry merged(const std::vector<HistoryFile>& files) {
  Registry reg;
  for (const auto& f : files)
    for (const auto& [o, spec] : f.specs) reg.emplace(o, spec);
  return reg;
}

std::set<std::string> objects_of(const std::vector<HistoryFile>& files) {
  std::set<std::string> out;
  for (const auto& f : files)
    for (const auto& o : f.history.opexes) out.insert(o.object);
  return out;
}

// Objects with decide op-exes but no spec become agreement objects over the
// decided values.
void infer_agreement(Registry& reg, const std::vector<History>& hs, AgreementKind kind) {
  std::map<std::string, std::set<Value>> decided;
  for (const auto& h : hs)
    for (const auto& o : h.opexes)
      if (o.operation == "decide" && o.res) decided[o.object].insert(o.output);
  for (const auto& [obj, vals] : decided)
    if (!reg.count(obj)) reg[obj] = make_agreement(kind, std::vector<Value>(vals.begin(), vals.end()));
}

Strategy strategy_from(const std::string& s) {
  if (s == "auto") return Strategy::automatic;
  if (s == "permutation") return Strategy::permutation;
  if (s == "pairwise") return Strategy::pairwise;
  throw InputError("unknown strategy '" + s + "'");
}

void print_verdict(const Verdict& v, const std::string& cond, const History& h, bool json) {
  if (json) {
    std::cout << to_json(v, cond).dump(2) << "\n";
    return;
  }
  std::cout << (v.accepted ? "accepted" : "rejected") << " under " << cond << " (" << v.strategy << ", "
            << v.nodes << " nodes, " << v.elapsed_ms << " ms)\n";
  if (v.accepted && v.witness) {
    const History& hh = v.repaired ? *v.repaired : h;
    std::cout << "witness:";
    for (auto [a, b] : v.witness->pairs()) std::cout << " " << opex_label(hh, a) << "->" << opex_label(hh, b);
    std::cout << "\n";
    for (std::size_t i : v.inserted) std::cout << "inserted: " << opex_label(hh, i) << "\n";
  } else {
    std::cout << "failing clauses:";
    for (const auto& d : v.diagnosis) std::cout << " " << d;
    std::cout << "\n";
    if (v.bounded) std::cout << "rejected within bounds\n";
  }
}

void print_audit(const AuditReport& r, const Sigma& s, bool json) {
  if (json) {
    std::cout << to_json(r, s).dump(2) << "\n";
    return;
  }
  std::cout << r.theorem << " audit over " << s.states.size() << " states\n";
  for (const auto& a : r.axioms)
    std::cout << "  " << a.axiom << ": " << (a.holds ? "holds" : "violated")
              << (a.witness.is_null() ? "" : " " + a.witness.dump()) << "\n";
  if (r.critical) std::cout << "critical state: " << s.describe(*r.critical) << "\n";
  if (r.consistent_with_theorem()) {
    std::cout << "violated:";
    for (const auto& v : r.violated) std::cout << " " << v;
    std::cout << "\n";
  } else {
    std::cout << "all hypotheses hold; contradiction: " << r.contradiction.dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based correctness checking and state-space audits for concurrent objects"};
  app.require_subcommand(1);

  std::string history_file, consistency = "linearizability", strategy = "auto", universe_file, program, out,
              histories_dir;
  std::vector<std::string> specs;
  int k = 1;
  std::size_t max_insert = 1;
  std::optional<std::uint64_t> max_nodes;
  bool json = false, reduced = false;

  auto add_check_opts = [&](CLI::App* c) {
    c->add_option("--history", history_file, "History JSON file")->required()->check(CLI::ExistingFile);
    c->add_option("--spec", specs, "Object spec [OBJ=]NAME[:params], repeatable");
    c->add_option("--consistency", consistency, "Condition name, or a+b for a union");
    c->add_option("--k", k, "k for k-serializability");
    c->add_option("--strategy", strategy, "auto, permutation or pairwise");
    c->add_option("--max-nodes", max_nodes, "Search node budget");
    c->add_flag("--json", json, "Print the machine-readable report");
  };

  auto* check_cmd = app.add_subcommand("check", "Decide whether a history is correct under a condition");
  add_check_opts(check_cmd);
  auto* byz_cmd = app.add_subcommand("byz-check", "Search bounded Byzantine repairs of a history");
  add_check_opts(byz_cmd);
  byz_cmd->add_option("--universe", universe_file, "Candidate op-exes for Byzantine processes")
      ->required()
      ->check(CLI::ExistingFile);
  byz_cmd->add_option("--max-insert", max_insert, "Inserted pending op-exes per Byzantine process");

  auto* gen_cmd = app.add_subcommand("gen", "Enumerate the histories of a program");
  gen_cmd->add_option("--program", program, "alg1..alg5 or a program JSON file")->required();
  gen_cmd->add_option("--out", out, "Output directory")->required();

  auto* sigma_cmd = app.add_subcommand("sigma", "Build the state graph of a history set");
  sigma_cmd->add_option("--histories", histories_dir, "Directory of history JSON files")->required();
  sigma_cmd->add_option("--out", out, "DOT output file")->required();
  sigma_cmd->add_flag("--reduced", reduced, "Omit broadcast responses and pre-broadcast deliveries");

  auto* flp_cmd = app.add_subcommand("audit-flp", "Audit the consensus impossibility axioms");
  flp_cmd->add_option("--histories", histories_dir, "Directory of history JSON files")->required();
  flp_cmd->add_option("--spec", specs, "Object spec [OBJ=]NAME[:params], repeatable");
  flp_cmd->add_flag("--json", json, "Print the machine-readable report");

  auto* ksa_cmd = app.add_subcommand("audit-ksa", "Audit the wait-free k-set agreement impossibility axioms");
  ksa_cmd->add_option("--histories", histories_dir, "Directory of history JSON files")->required();
  ksa_cmd->add_option("--k", k, "k")->required();
  ksa_cmd->add_option("--spec", specs, "Object spec [OBJ=]NAME[:params], repeatable");
  ksa_cmd->add_flag("--json", json, "Print the machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInput;
  }

  try {
    if (check_cmd->parsed() || byz_cmd->parsed()) {
      HistoryFile f = load_history(history_file);
      auto report = validate_history(f.history);
      if (!report.valid()) {
        for (const auto& r : report.results)
          if (!r.pass) std::cerr << "invalid history: " << r.constraint << " " << r.detail << "\n";
        return kInput;
      }
      Registry reg = f.specs;
      apply_specs(reg, specs, f.history.objects());
      ConditionSet cond = condition_set(consistency, reg, k);
      SearchConfig cfg{strategy_from(strategy), std::nullopt, max_nodes};
      Verdict v;
      if (byz_cmd->parsed()) {
        ByzConfig bc{universe_from_json(io::read_json(universe_file), universe_file), max_insert, std::nullopt};
        v = check_byzantine(f.history, cond, bc, cfg);
      } else {
        v = check(f.history, cond, cfg);
      }
      print_verdict(v, consistency, f.history, json);
      return v.accepted ? kOk : kRejected;
    }

    if (gen_cmd->parsed()) {
      auto [prog, gc] = load_program(program);
      Generation g = enumerate_histories(prog, gc);
      fs::create_directories(out);
      for (const auto& h : g.histories) {
        Value j = to_json(h);
        if (!prog.spec_names.empty()) j["specs"] = prog.spec_names;
        io::write_text(fs::path(out) / (h.name + ".json"), j.dump(2) + "\n");
      }
      for (const auto& w : g.warnings) std::cerr << "warning: " << w << "\n";
      Sigma s = build_sigma(g.histories);
      auto sum = sink_summary(s);
      std::cout << prog.name << ": " << g.histories.size() << " histories under " << gc.condition << " ("
                << g.interleavings << " interleavings), " << s.states.size() << " states, " << sum.sinks
                << " sinks in " << sum.classes.size() << " classes\n";
      return kOk;
    }

    std::vector<HistoryFile> files = load_history_dir(histories_dir);
    std::vector<History> hs;
    for (const auto& f : files) hs.push_back(f.history);

    if (sigma_cmd->parsed()) {
      Sigma s = build_sigma(reduced ? reduced_view(hs) : hs);
      io::write_text(out, to_dot(s, reduced ? "sigma-reduced" : "sigma"));
      auto a = check_asynchrony(s);
      auto sum = sink_summary(s);
      std::cout << s.states.size() << " states, " << s.edges.size() << " edges, " << sum.sinks << " sinks, "
                << sum.classes.size() << " sink classes\n";
      std::cout << "Asynchrony: " << (a.holds ? "holds" : "violated " + a.witness.dump()) << "\n";
      return kOk;
    }

    Registry reg = merged(files);
    apply_specs(reg, specs, objects_of(files));
    bool flp = flp_cmd->parsed();
    infer_agreement(reg, hs, flp ? AgreementKind::consensus : AgreementKind::set_agreement);
    Sigma s = build_sigma(hs);
    bool has_agreement = false;
    for (const auto& [o, spec] : reg)
      has_agreement = has_agreement || spec.kind == "consensus" || spec.kind == "set-agreement";
    if (!has_agreement) {
      // Nothing to decide: only the asynchrony preamble applies.
      auto a = check_asynchrony(s, flp ? AsyncMode::pairwise : AsyncMode::setwise);
      std::cout << "no agreement object; " << a.axiom << ": "
                << (a.holds ? "holds" : "violated " + a.witness.dump()) << "\n";
      return a.holds ? kOk : kRejected;
    }
    AuditReport r = flp ? flp_audit(s, reg) : ksa_audit(s, k, reg);
    print_audit(r, s, json);
    return r.consistent_with_theorem() ? kOk : kRejected;
  } catch (const ResourceError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kResource;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  }
}
