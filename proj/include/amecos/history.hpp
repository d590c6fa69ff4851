#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "json.hpp"

namespace amecos {

using Value = nlohmann::json;
using ProcessId = std::string;

enum class ProcType { correct, omitting, byzantine };

inline const char* to_string(ProcType t) {
  switch (t) {
    case ProcType::correct: return "correct";
    case ProcType::omitting: return "omitting";
    case ProcType::byzantine: return "byzantine";
  }
  return "correct";
}

inline ProcType proc_type_from(const std::string& s) {
  if (s == "correct") return ProcType::correct;
  if (s == "omitting" || s == "faulty_omitting") return ProcType::omitting;
  if (s == "byzantine" || s == "faulty_byzantine") return ProcType::byzantine;
  throw std::invalid_argument("unknown process type '" + s + "'");
}

struct Process {
  ProcessId id;
  ProcType type = ProcType::correct;
};

enum class Dir { inv, res };

struct Event {
  std::string id;
  Value value;
  long position = 0;
  ProcessId proc;
  int idx = 0;
};

enum class OpKind { complete, pending, notification, malformed };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::complete: return "complete";
    case OpKind::pending: return "pending";
    case OpKind::notification: return "notification";
    case OpKind::malformed: return "malformed";
  }
  return "malformed";
}

struct OpEx {
  std::string object;
  std::string operation;
  ProcessId proc;
  Value input;
  Value output;
  std::optional<Event> inv;
  std::optional<Event> res;

  // complete/pending/notification follow from which events exist; an op-ex
  // with no event at all, or with res before inv, is malformed.
  OpKind kind() const {
    if (inv && res) return inv->position < res->position ? OpKind::complete : OpKind::malformed;
    if (inv) return OpKind::pending;
    if (res) return OpKind::notification;
    return OpKind::malformed;
  }

  long first_position() const {
    if (inv) return inv->position;
    if (res) return res->position;
    return -1;
  }

  bool operator==(const OpEx& o) const {
    auto ev = [](const std::optional<Event>& a, const std::optional<Event>& b) {
      if (a.has_value() != b.has_value()) return false;
      if (!a) return true;
      return a->position == b->position && a->value == b->value && a->proc == b->proc;
    };
    return object == o.object && operation == o.operation && proc == o.proc &&
           input == o.input && output == o.output && ev(inv, o.inv) && ev(res, o.res);
  }
};

struct EventRef {
  std::size_t opex;
  Dir dir;
};

struct History {
  std::string name;
  std::vector<Process> processes;
  std::vector<OpEx> opexes;
  bool complete = true;

  const Process* process(const ProcessId& id) const {
    for (const auto& p : processes)
      if (p.id == id) return &p;
    return nullptr;
  }

  bool is_correct(const ProcessId& id) const {
    const Process* p = process(id);
    return p && p->type == ProcType::correct;
  }

  const Event& event(const EventRef& r) const {
    const OpEx& o = opexes.at(r.opex);
    return r.dir == Dir::inv ? *o.inv : *o.res;
  }

  // All events sorted by position.
  std::vector<EventRef> events() const {
    std::vector<EventRef> out;
    for (std::size_t i = 0; i < opexes.size(); ++i) {
      if (opexes[i].inv) out.push_back({i, Dir::inv});
      if (opexes[i].res) out.push_back({i, Dir::res});
    }
    std::stable_sort(out.begin(), out.end(), [&](const EventRef& a, const EventRef& b) {
      return event(a).position < event(b).position;
    });
    return out;
  }

  std::set<std::string> objects() const {
    std::set<std::string> out;
    for (const auto& o : opexes) out.insert(o.object);
    return out;
  }
};

// Sorts op-exes canonically by (first event position, process id), names
// events that came without an id, and assigns per-process indices.
inline void finalize(History& h) {
  std::stable_sort(h.opexes.begin(), h.opexes.end(), [](const OpEx& a, const OpEx& b) {
    return std::make_pair(a.first_position(), a.proc) < std::make_pair(b.first_position(), b.proc);
  });
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    OpEx& o = h.opexes[i];
    if (o.inv) {
      o.inv->proc = o.proc;
      o.inv->value = o.input;
      if (o.inv->id.empty()) o.inv->id = "o" + std::to_string(i) + ".inv";
    }
    if (o.res) {
      o.res->proc = o.proc;
      o.res->value = o.output;
      if (o.res->id.empty()) o.res->id = "o" + std::to_string(i) + ".res";
    }
  }
  std::map<ProcessId, std::vector<Event*>> per_proc;
  for (auto& o : h.opexes) {
    if (o.inv) per_proc[o.proc].push_back(&*o.inv);
    if (o.res) per_proc[o.proc].push_back(&*o.res);
  }
  for (auto& [p, evs] : per_proc) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const Event* a, const Event* b) { return a->position < b->position; });
    for (std::size_t k = 0; k < evs.size(); ++k) evs[k]->idx = static_cast<int>(k + 1);
  }
}

class HistoryBuilder {
 public:
  HistoryBuilder& process(const ProcessId& id, ProcType t = ProcType::correct) {
    h_.processes.push_back({id, t});
    return *this;
  }

  HistoryBuilder& opex(const std::string& object, const std::string& operation,
                       const ProcessId& proc, Value input, Value output,
                       std::optional<long> inv, std::optional<long> res) {
    OpEx o{object, operation, proc, std::move(input), std::move(output), std::nullopt, std::nullopt};
    if (inv) o.inv = Event{"", Value(), *inv, proc, 0};
    if (res) o.res = Event{"", Value(), *res, proc, 0};
    h_.opexes.push_back(std::move(o));
    return *this;
  }

  HistoryBuilder& complete(const std::string& object, const std::string& operation,
                           const ProcessId& proc, Value input, Value output, long inv, long res) {
    return opex(object, operation, proc, std::move(input), std::move(output), inv, res);
  }

  HistoryBuilder& pending(const std::string& object, const std::string& operation,
                          const ProcessId& proc, Value input, long inv) {
    return opex(object, operation, proc, std::move(input), Value(), inv, std::nullopt);
  }

  HistoryBuilder& notification(const std::string& object, const std::string& operation,
                               const ProcessId& proc, Value output, long res) {
    return opex(object, operation, proc, Value(), std::move(output), std::nullopt, res);
  }

  HistoryBuilder& complete_flag(bool c) {
    h_.complete = c;
    return *this;
  }

  HistoryBuilder& name(std::string n) {
    h_.name = std::move(n);
    return *this;
  }

  History build() const {
    History h = h_;
    finalize(h);
    return h;
  }

 private:
  History h_;
};

struct ConstraintResult {
  std::string constraint;
  bool pass = true;
  std::vector<std::string> offenders;
  std::string detail;
};

struct ValidationReport {
  std::vector<ConstraintResult> results;

  bool valid() const {
    return std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
  }

  const ConstraintResult& operator[](const std::string& name) const {
    for (const auto& r : results)
      if (r.constraint == name) return r;
    throw std::out_of_range("no constraint " + name);
  }
};

inline std::string opex_label(const History& h, std::size_t i) {
  const OpEx& o = h.opexes[i];
  return "#" + std::to_string(i) + " " + o.object + "." + o.operation + "@" + o.proc;
}

// Checks EvTotalOrder, EvValidity, OpExValidity and OpValidity. When
// `notif_ops` is supplied it names the (object, operation) pairs that are
// notification-typed; otherwise OpValidity only asks every operation to be
// used uniformly as either notification or invoked operation.
inline ValidationReport validate_history(
    const History& h, const std::optional<std::set<std::pair<std::string, std::string>>>& notif_ops =
                          std::nullopt) {
  ValidationReport rep;

  ConstraintResult total{"EvTotalOrder"};
  std::map<long, std::vector<std::string>> by_pos;
  for (const auto& o : h.opexes) {
    if (o.inv) by_pos[o.inv->position].push_back(o.inv->id);
    if (o.res) by_pos[o.res->position].push_back(o.res->id);
  }
  for (const auto& [pos, ids] : by_pos) {
    if (pos < 0) {
      total.pass = false;
      total.offenders.insert(total.offenders.end(), ids.begin(), ids.end());
      total.detail += "negative position " + std::to_string(pos) + "; ";
    }
    if (ids.size() > 1) {
      total.pass = false;
      total.offenders.insert(total.offenders.end(), ids.begin(), ids.end());
      total.detail += "position " + std::to_string(pos) + " shared by " + std::to_string(ids.size()) +
                      " events; ";
    }
  }
  rep.results.push_back(total);

  ConstraintResult evv{"EvValidity"};
  std::map<std::string, int> id_count;
  for (const auto& o : h.opexes) {
    for (const auto* e : {o.inv ? &*o.inv : nullptr, o.res ? &*o.res : nullptr}) {
      if (!e) continue;
      ++id_count[e->id];
      if (e->proc != o.proc) {
        evv.pass = false;
        evv.offenders.push_back(e->id);
        evv.detail += "event " + e->id + " carries proc " + e->proc + " but its op-ex is on " + o.proc + "; ";
      }
    }
  }
  for (const auto& [id, c] : id_count) {
    if (c > 1) {
      evv.pass = false;
      evv.offenders.push_back(id);
      evv.detail += "event " + id + " belongs to " + std::to_string(c) + " op-exes; ";
    }
  }
  rep.results.push_back(evv);

  ConstraintResult opx{"OpExValidity"};
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    const OpEx& o = h.opexes[i];
    std::string why;
    if (!o.inv && !o.res) why = "no invocation and no response";
    else if (o.inv && o.res && o.inv->id == o.res->id) why = "invocation equals response";
    else if (o.inv && o.res && o.inv->position >= o.res->position) why = "response does not follow invocation";
    if (why.empty() && !h.process(o.proc)) why = "process " + o.proc + " is not declared";
    if (!why.empty()) {
      opx.pass = false;
      opx.offenders.push_back(opex_label(h, i));
      opx.detail += opex_label(h, i) + ": " + why + "; ";
    }
  }
  rep.results.push_back(opx);

  ConstraintResult opv{"OpValidity"};
  std::map<std::pair<std::string, std::string>, std::pair<int, int>> usage;  // notif, invoked
  for (std::size_t i = 0; i < h.opexes.size(); ++i) {
    const OpEx& o = h.opexes[i];
    auto key = std::make_pair(o.object, o.operation);
    bool is_notif = o.kind() == OpKind::notification;
    if (notif_ops) {
      bool declared = notif_ops->count(key) > 0;
      if (declared != is_notif && o.kind() != OpKind::malformed) {
        opv.pass = false;
        opv.offenders.push_back(opex_label(h, i));
        opv.detail += opex_label(h, i) + (declared ? ": notification operation with an invocation; "
                                                   : ": invoked operation without an invocation; ");
      }
    } else if (o.kind() != OpKind::malformed) {
      (is_notif ? usage[key].first : usage[key].second)++;
    }
  }
  for (const auto& [key, u] : usage) {
    if (u.first > 0 && u.second > 0) {
      opv.pass = false;
      for (std::size_t i = 0; i < h.opexes.size(); ++i)
        if (h.opexes[i].object == key.first && h.opexes[i].operation == key.second)
          opv.offenders.push_back(opex_label(h, i));
      opv.detail += key.first + "." + key.second + " is used both as notification and as invoked operation; ";
    }
  }
  rep.results.push_back(opv);
  return rep;
}

namespace detail {
inline History filtered(const History& h, const std::function<bool(const OpEx&)>& keep) {
  History out;
  out.name = h.name;
  out.processes = h.processes;
  out.complete = h.complete;
  for (const auto& o : h.opexes)
    if (keep(o)) out.opexes.push_back(o);
  return out;
}
}  // namespace detail

// H|x. Events keep their positions and indices.
inline History project_object(const History& h, const std::string& obj) {
  return detail::filtered(h, [&](const OpEx& o) { return o.object == obj; });
}

// H|p. Events keep their positions and indices.
inline History project_process(const History& h, const ProcessId& p) {
  return detail::filtered(h, [&](const OpEx& o) { return o.proc == p; });
}

inline int event_index(const History& h, const std::string& event_id) {
  for (const auto& o : h.opexes) {
    if (o.inv && o.inv->id == event_id) return o.inv->idx;
    if (o.res && o.res->id == event_id) return o.res->idx;
  }
  throw std::invalid_argument("unknown event " + event_id);
}

inline std::set<ProcessId> correct_processes(const History& h) {
  std::set<ProcessId> out;
  for (const auto& p : h.processes)
    if (p.type == ProcType::correct) out.insert(p.id);
  return out;
}

}  // namespace amecos
