#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "amecos/history.hpp"

namespace amecos {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Read access to a binary relation over op-ex indices. Predicates only see
// relations through this interface, which lets the checker evaluate them on
// partial assignments.
class RelationView {
 public:
  virtual ~RelationView() = default;
  virtual std::size_t size() const = 0;
  virtual bool operator()(std::size_t a, std::size_t b) const = 0;
};

class OrderRelation : public RelationView {
 public:
  static constexpr std::size_t kMaxSize = 64;

  explicit OrderRelation(std::size_t n = 0) : n_(n), rows_(n, 0) {
    if (n > kMaxSize) throw ResourceError("relation over more than 64 op-exes");
  }

  std::size_t size() const override { return n_; }

  bool operator()(std::size_t a, std::size_t b) const override { return (rows_[a] >> b) & 1u; }

  void set(std::size_t a, std::size_t b, bool v = true) {
    if (v) rows_[a] |= (std::uint64_t{1} << b);
    else rows_[a] &= ~(std::uint64_t{1} << b);
  }

  std::uint64_t row(std::size_t a) const { return rows_[a]; }

  std::vector<std::pair<std::size_t, std::size_t>> pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t a = 0; a < n_; ++a)
      for (std::size_t b = 0; b < n_; ++b)
        if ((*this)(a, b)) out.emplace_back(a, b);
    return out;
  }

  static OrderRelation from_pairs(std::size_t n,
                                  const std::vector<std::pair<std::size_t, std::size_t>>& ps) {
    OrderRelation r(n);
    for (auto [a, b] : ps) r.set(a, b);
    return r;
  }

  // The strict total order listing `seq` first to last.
  static OrderRelation from_sequence(std::size_t n, const std::vector<std::size_t>& seq) {
    OrderRelation r(n);
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (std::size_t j = i + 1; j < seq.size(); ++j) r.set(seq[i], seq[j]);
    return r;
  }

  bool operator==(const OrderRelation& o) const { return n_ == o.n_ && rows_ == o.rows_; }

 private:
  std::size_t n_;
  std::vector<std::uint64_t> rows_;
};

// ctx(o, O, rel): the op-exes of o's object that precede o, plus rel
// restricted to them and o. The subject is never its own member.
class Context {
 public:
  Context(const std::vector<OpEx>& universe, const RelationView& rel, std::size_t subject)
      : universe_(&universe), rel_(&rel), subject_(subject) {
    if (subject >= universe.size()) throw std::invalid_argument("subject not in universe");
    const std::string& obj = universe[subject].object;
    for (std::size_t a = 0; a < universe.size(); ++a)
      if (a != subject && universe[a].object == obj && rel(a, subject)) members_.push_back(a);
  }

  std::size_t subject() const { return subject_; }
  const OpEx& subject_opex() const { return (*universe_)[subject_]; }
  const std::vector<std::size_t>& members() const { return members_; }
  const OpEx& opex(std::size_t i) const { return (*universe_)[i]; }
  bool empty() const { return members_.empty(); }
  std::size_t size() const { return members_.size(); }

  bool contains(std::size_t a) const {
    for (std::size_t m : members_)
      if (m == a) return true;
    return false;
  }

  // a ⟶_c b; both ends must lie in O_c ∪ {o}.
  bool before(std::size_t a, std::size_t b) const {
    if ((a != subject_ && !contains(a)) || (b != subject_ && !contains(b)))
      throw std::out_of_range("context order queried outside the context");
    return (*rel_)(a, b);
  }

  template <class Pred>
  bool any(Pred p) const {
    for (std::size_t m : members_)
      if (p(opex(m))) return true;
    return false;
  }

 private:
  const std::vector<OpEx>* universe_;
  const RelationView* rel_;
  std::size_t subject_;
  std::vector<std::size_t> members_;
};

inline Context context(const History& h, std::size_t o, const RelationView& rel) {
  return Context(h.opexes, rel, o);
}

// Same as above for a subject given by value; it must be an element of
// `opexes`.
inline Context context(const OpEx& o, const std::vector<OpEx>& opexes, const RelationView& rel) {
  for (std::size_t i = 0; i < opexes.size(); ++i)
    if (opexes[i] == o) return Context(opexes, rel, i);
  throw std::invalid_argument("subject not in universe");
}

}  // namespace amecos
