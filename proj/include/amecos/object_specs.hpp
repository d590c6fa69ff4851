#pragma once

#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amecos/history.hpp"
#include "amecos/relation.hpp"

namespace amecos {

enum class OpType { normal, notif };

using ContextPredicate = std::function<bool(const OpEx&, const Context&)>;
using LivenessPredicate = std::function<bool(std::size_t, const History&, const RelationView&)>;

// Unset predicates hold everywhere.
struct OperationSpec {
  std::string name;
  OpType type = OpType::normal;
  ContextPredicate V;
  ContextPredicate S;
  LivenessPredicate L;
};

struct ObjectSpec {
  std::string kind;
  Value params;
  std::map<std::string, OperationSpec> operations;
  // Liveness that only makes sense for the object as a whole.
  std::function<bool(const History&, const std::string&)> object_liveness;

  const OperationSpec* find(const std::string& op) const {
    auto it = operations.find(op);
    return it == operations.end() ? nullptr : &it->second;
  }

  ObjectSpec& add(OperationSpec op) {
    std::string n = op.name;
    if (!operations.emplace(n, std::move(op)).second)
      throw std::invalid_argument("duplicate operation " + n);
    return *this;
  }
};

// object id -> spec
using Registry = std::map<std::string, ObjectSpec>;

struct SpecError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::set<std::pair<std::string, std::string>> notification_ops(const Registry& reg) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [obj, spec] : reg)
    for (const auto& [name, op] : spec.operations)
      if (op.type == OpType::notif) out.emplace(obj, name);
  return out;
}

// Matching in the style of `r_broadcast_i(-, id)`: unset fields and kAny
// slots match anything.
inline constexpr std::nullopt_t kAny = std::nullopt;

struct Pattern {
  std::optional<std::string> op;
  std::optional<ProcessId> proc;
  std::optional<std::vector<std::optional<Value>>> in_slots;
  std::optional<std::vector<std::optional<Value>>> out_slots;
  std::optional<Value> in_exact;
  std::optional<Value> out_exact;

  Pattern& by(const ProcessId& p) {
    proc = p;
    return *this;
  }
  Pattern& in(Value v) {
    in_exact = std::move(v);
    return *this;
  }
  Pattern& in(std::initializer_list<std::optional<Value>> slots) {
    in_slots = std::vector<std::optional<Value>>(slots);
    return *this;
  }
  Pattern& out(Value v) {
    out_exact = std::move(v);
    return *this;
  }
  Pattern& out(std::initializer_list<std::optional<Value>> slots) {
    out_slots = std::vector<std::optional<Value>>(slots);
    return *this;
  }

  static bool slots_match(const std::vector<std::optional<Value>>& slots, const Value& v) {
    if (!v.is_array() || v.size() != slots.size()) return false;
    for (std::size_t i = 0; i < slots.size(); ++i)
      if (slots[i] && v[i] != *slots[i]) return false;
    return true;
  }

  bool operator()(const OpEx& o) const {
    if (op && o.operation != *op) return false;
    if (proc && o.proc != *proc) return false;
    if (in_exact && o.input != *in_exact) return false;
    if (out_exact && o.output != *out_exact) return false;
    if (in_slots && !slots_match(*in_slots, o.input)) return false;
    if (out_slots && !slots_match(*out_slots, o.output)) return false;
    return true;
  }
};

inline Pattern op(const std::string& name) {
  Pattern p;
  p.op = name;
  return p;
}

inline bool op_termination(const OpEx& o, const History& h) {
  return !h.is_correct(o.proc) || o.kind() != OpKind::pending;
}

inline LivenessPredicate termination_liveness() {
  return [](std::size_t o, const History& h, const RelationView&) {
    return op_termination(h.opexes[o], h);
  };
}

namespace detail {

// Is v the value of one of the ⟶_c-latest writes among those selected by
// `is_write`? Only the order pairs needed for the answer are queried.
inline bool latest_write_has(const Context& c, const Value& v,
                             const std::function<bool(const OpEx&)>& is_write,
                             const std::function<Value(const OpEx&)>& value_of) {
  for (std::size_t w : c.members()) {
    const OpEx& ow = c.opex(w);
    if (!is_write(ow) || value_of(ow) != v) continue;
    bool latest = true;
    for (std::size_t w2 : c.members()) {
      if (w2 == w || !is_write(c.opex(w2))) continue;
      if (c.before(w, w2)) {
        latest = false;
        break;
      }
    }
    if (latest) return true;
  }
  return false;
}

inline Value at_or_null(const Value& v, std::size_t i) {
  return v.is_array() && v.size() > i ? v[i] : Value();
}

inline std::set<Value> as_set(const Value& v) {
  std::set<Value> out;
  if (v.is_array())
    for (const auto& x : v) out.insert(x);
  return out;
}

}  // namespace detail

inline ObjectSpec make_swsr_register(const ProcessId& writer, const ProcessId& reader) {
  if (writer == reader) throw std::invalid_argument("writer and reader must differ");
  ObjectSpec s;
  s.kind = "swsr-register";
  s.params = {{"writer", writer}, {"reader", reader}};
  auto is_write = [](const OpEx& o) { return o.operation == "write"; };
  auto input_of = [](const OpEx& o) { return o.input; };

  OperationSpec read{"read", OpType::normal, nullptr, nullptr, nullptr};
  read.V = [reader](const OpEx& o, const Context& c) { return o.proc == reader && c.any(op("write")); };
  read.S = [=](const OpEx& o, const Context& c) {
    return detail::latest_write_has(c, o.output, is_write, input_of);
  };
  read.L = termination_liveness();

  OperationSpec write{"write", OpType::normal, nullptr, nullptr, nullptr};
  write.V = [writer](const OpEx& o, const Context&) { return o.proc == writer; };
  write.L = termination_liveness();

  s.add(read).add(write);
  return s;
}

struct MemoryPolicy {
  bool swmr = false;
  std::map<Value, ProcessId> writers;  // address -> designated writer (SWMR)
};

// read(a)/v has input a, write(v, a) has input [v, a].
inline ObjectSpec make_shared_memory(const MemoryPolicy& policy = {}) {
  ObjectSpec s;
  s.kind = "shared-memory";
  s.params = {{"swmr", policy.swmr}};
  if (policy.swmr) {
    Value w = Value::array();
    for (const auto& [a, p] : policy.writers) w.push_back({a, p});
    s.params["writers"] = w;
  }

  OperationSpec read{"read", OpType::normal, nullptr, nullptr, nullptr};
  read.V = [](const OpEx& o, const Context& c) { return c.any(op("write").in({kAny, o.input})); };
  read.S = [](const OpEx& o, const Context& c) {
    Value a = o.input;
    return detail::latest_write_has(
        c, o.output,
        [a](const OpEx& w) { return w.operation == "write" && detail::at_or_null(w.input, 1) == a; },
        [](const OpEx& w) { return detail::at_or_null(w.input, 0); });
  };
  read.L = termination_liveness();

  OperationSpec write{"write", OpType::normal, nullptr, nullptr, nullptr};
  if (policy.swmr) {
    auto writers = policy.writers;
    write.V = [writers](const OpEx& o, const Context&) {
      auto it = writers.find(detail::at_or_null(o.input, 1));
      return it != writers.end() && it->second == o.proc;
    };
  }
  write.L = termination_liveness();

  s.add(read).add(write);
  return s;
}

// r_broadcast(m, id) has input [m, id]; r_deliver/(m, id, j) has output
// [m, id, j]. Undelivered candidates range over every sender.
inline ObjectSpec make_reliable_broadcast() {
  ObjectSpec s;
  s.kind = "reliable-broadcast";

  OperationSpec bc{"r_broadcast", OpType::normal, nullptr, nullptr, nullptr};
  bc.V = [](const OpEx& o, const Context& c) {
    return !c.any(op("r_broadcast").by(o.proc).in({kAny, detail::at_or_null(o.input, 1)}));
  };
  bc.L = [](std::size_t oi, const History& h, const RelationView& rel) {
    const OpEx& o = h.opexes[oi];
    if (!op_termination(o, h)) return false;
    Value want = {detail::at_or_null(o.input, 0), detail::at_or_null(o.input, 1), o.proc};
    for (const ProcessId& pj : correct_processes(h)) {
      bool found = false;
      for (std::size_t d = 0; d < h.opexes.size() && !found; ++d) {
        const OpEx& od = h.opexes[d];
        found = od.object == o.object && od.operation == "r_deliver" && od.proc == pj &&
                od.output == want && rel(oi, d);
      }
      if (!found) return false;
    }
    return true;
  };

  OperationSpec dl{"r_deliver", OpType::notif, nullptr, nullptr, nullptr};
  dl.S = [](const OpEx& o, const Context& c) {
    auto delivered = [&](const OpEx& b) {
      Value key = {detail::at_or_null(b.input, 0), detail::at_or_null(b.input, 1), b.proc};
      return c.any(op("r_deliver").by(o.proc).out(key));
    };
    std::vector<std::size_t> cand;
    for (std::size_t b : c.members())
      if (c.opex(b).operation == "r_broadcast" && !delivered(c.opex(b))) cand.push_back(b);
    for (std::size_t b : cand) {
      const OpEx& ob = c.opex(b);
      Value key = {detail::at_or_null(ob.input, 0), detail::at_or_null(ob.input, 1), ob.proc};
      if (key != o.output) continue;
      bool first = true;
      for (std::size_t b2 : cand)
        if (b2 != b && c.before(b2, b)) {
          first = false;
          break;
        }
      if (first) return true;
    }
    return false;
  };
  dl.L = [](std::size_t oi, const History& h, const RelationView&) {
    const OpEx& o = h.opexes[oi];
    if (!h.is_correct(o.proc)) return true;
    for (const ProcessId& pj : correct_processes(h)) {
      bool found = false;
      for (const OpEx& od : h.opexes)
        found = found || (od.object == o.object && od.operation == "r_deliver" && od.proc == pj &&
                          detail::at_or_null(od.output, 0) == detail::at_or_null(o.output, 0) &&
                          detail::at_or_null(od.output, 1) == detail::at_or_null(o.output, 1));
      if (!found) return false;
    }
    return true;
  };

  s.add(bc).add(dl);
  return s;
}

// send(m, j) has input [m, j]; receive/(m, i) has output [m, i].
inline ObjectSpec make_message_passing() {
  ObjectSpec s;
  s.kind = "message-passing";

  OperationSpec send{"send", OpType::normal, nullptr, nullptr, nullptr};
  send.L = [](std::size_t oi, const History& h, const RelationView& rel) {
    const OpEx& o = h.opexes[oi];
    if (!op_termination(o, h)) return false;
    Value dest = detail::at_or_null(o.input, 1);
    if (!dest.is_string() || !h.is_correct(dest.get<std::string>())) return true;
    Value want = {detail::at_or_null(o.input, 0), o.proc};
    for (std::size_t r = 0; r < h.opexes.size(); ++r) {
      const OpEx& orc = h.opexes[r];
      if (orc.object == o.object && orc.operation == "receive" && orc.proc == dest.get<std::string>() &&
          orc.output == want && rel(oi, r))
        return true;
    }
    return false;
  };

  OperationSpec recv{"receive", OpType::notif, nullptr, nullptr, nullptr};
  recv.S = [](const OpEx& o, const Context& c) {
    Value m = detail::at_or_null(o.output, 0);
    Value from = detail::at_or_null(o.output, 1);
    if (!from.is_string()) return false;
    return c.any(op("send").by(from.get<std::string>()).in({m, o.proc})) &&
           !c.any(op("receive").by(o.proc).out(o.output));
  };

  s.add(send).add(recv);
  return s;
}

enum class AgreementKind { consensus, set_agreement };

// decide/v is a notification. Consensus and set agreement share formulas;
// they differ by the condition they are checked under.
inline ObjectSpec make_agreement(AgreementKind kind, const std::vector<Value>& domain) {
  if (domain.empty()) throw std::invalid_argument("agreement domain must be nonempty");
  ObjectSpec s;
  s.kind = kind == AgreementKind::consensus ? "consensus" : "set-agreement";
  s.params = {{"domain", domain}};
  std::set<Value> dom(domain.begin(), domain.end());

  OperationSpec decide{"decide", OpType::notif, nullptr, nullptr, nullptr};
  decide.S = [dom](const OpEx& o, const Context& c) {
    if (!dom.count(o.output)) return false;
    for (std::size_t m : c.members())
      if (c.opex(m).operation == "decide" && c.opex(m).output != o.output) return false;
    return true;
  };
  s.add(decide);
  // Some process must decide: a complete history holding the object but no
  // decide op-ex has no op-ex to carry the failure, so the object carries it.
  s.object_liveness = [](const History& h, const std::string& obj) {
    if (!h.complete) return true;
    for (const auto& o : h.opexes)
      if (o.object == obj && o.operation == "decide") return true;
    return false;
  };
  return s;
}

// propose(v)/V: V is exactly the own value plus the values proposed by the
// context.
inline ObjectSpec make_lattice_agreement() {
  ObjectSpec s;
  s.kind = "lattice-agreement";
  OperationSpec propose{"propose", OpType::normal, nullptr, nullptr, nullptr};
  propose.S = [](const OpEx& o, const Context& c) {
    if (!o.output.is_array()) return false;
    std::set<Value> want{o.input};
    for (std::size_t m : c.members())
      if (c.opex(m).operation == "propose") want.insert(c.opex(m).input);
    return detail::as_set(o.output) == want;
  };
  propose.L = termination_liveness();
  s.add(propose);
  return s;
}

inline ObjectSpec make_test_and_set() {
  ObjectSpec s;
  s.kind = "test-and-set";
  OperationSpec ts{"test&set", OpType::normal, nullptr, nullptr, nullptr};
  ts.S = [](const OpEx& o, const Context& c) { return (o.output == Value(0)) == !c.any(op("test&set")); };
  ts.L = termination_liveness();
  s.add(ts);
  return s;
}

namespace detail {

inline Value parse_scalar(const std::string& s) {
  try {
    return Value::parse(s);
  } catch (const nlohmann::json::exception&) {
    return Value(s);
  }
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace detail

// Builds a spec from its CLI name, e.g. "swsr-register:pw,pr",
// "shared-memory:swmr:x=p1", "consensus:0,1".
inline ObjectSpec spec_from_string(const std::string& text) {
  auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  std::string params = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "swsr-register") {
    auto ps = detail::split(params, ',');
    if (ps.size() != 2) throw SpecError("swsr-register needs WRITER,READER");
    return make_swsr_register(ps[0], ps[1]);
  }
  if (name == "shared-memory") {
    MemoryPolicy pol;
    if (!params.empty()) {
      auto parts = detail::split(params, ':');
      if (parts.empty() || parts[0] != "swmr") throw SpecError("shared-memory accepts only the swmr policy");
      pol.swmr = true;
      if (parts.size() > 1)
        for (const auto& kv : detail::split(parts[1], ',')) {
          auto eq = kv.find('=');
          if (eq == std::string::npos) throw SpecError("swmr writers are ADDR=PROC");
          pol.writers[detail::parse_scalar(kv.substr(0, eq))] = kv.substr(eq + 1);
        }
    }
    return make_shared_memory(pol);
  }
  if (name == "shared-memory,swmr") return spec_from_string("shared-memory:swmr" + (params.empty() ? "" : ":" + params));
  if (name == "reliable-broadcast") return make_reliable_broadcast();
  if (name == "message-passing") return make_message_passing();
  if (name == "lattice-agreement") return make_lattice_agreement();
  if (name == "test-and-set") return make_test_and_set();
  if (name == "consensus" || name == "set-agreement") {
    std::vector<Value> dom;
    for (const auto& v : detail::split(params, ',')) dom.push_back(detail::parse_scalar(v));
    if (dom.empty()) throw SpecError(name + " needs a value domain, e.g. " + name + ":0,1");
    return make_agreement(name == "consensus" ? AgreementKind::consensus : AgreementKind::set_agreement, dom);
  }
  throw SpecError("unknown spec '" + name + "'");
}

}  // namespace amecos
