#include "netlock/sat_solver.hpp"

#include <algorithm>
#include <limits>

namespace netlock::sat {

namespace {

enum class LBool : std::uint8_t { False = 0, True = 1, Undef = 2 };

using CRef = std::uint32_t;
constexpr CRef kNoReason = std::numeric_limits<CRef>::max();

struct Clause {
  std::vector<Lit> lits;
  bool learnt = false;
  bool deleted = false;
  std::uint32_t lbd = 0;
  float activity = 0;
};

struct Watcher {
  CRef cref;
  Lit blocker;
};

// Binary max-heap over variables ordered by activity.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}

  bool empty() const { return heap_.empty(); }
  bool contains(Var v) const { return v < pos_.size() && pos_[v] >= 0; }

  void grow(Var v) {
    if (pos_.size() <= v) pos_.resize(v + 1, -1);
  }

  void insert(Var v) {
    grow(v);
    if (contains(v)) return;
    pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    up(heap_.size() - 1);
  }

  void increased(Var v) {
    if (contains(v)) up(static_cast<std::size_t>(pos_[v]));
  }

  Var pop() {
    Var top = heap_.front();
    heap_.front() = heap_.back();
    pos_[heap_.front()] = 0;
    heap_.pop_back();
    pos_[top] = -1;
    if (!heap_.empty()) down(0);
    return top;
  }

 private:
  bool less(Var a, Var b) const { return act_[a] > act_[b]; }

  void up(std::size_t i) {
    Var v = heap_[i];
    while (i > 0) {
      std::size_t parent = (i - 1) / 2;
      if (!less(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[heap_[i]] = static_cast<int>(i);
      i = parent;
    }
    heap_[i] = v;
    pos_[v] = static_cast<int>(i);
  }

  void down(std::size_t i) {
    Var v = heap_[i];
    for (;;) {
      std::size_t child = 2 * i + 1;
      if (child >= heap_.size()) break;
      if (child + 1 < heap_.size() && less(heap_[child + 1], heap_[child])) ++child;
      if (!less(heap_[child], v)) break;
      heap_[i] = heap_[child];
      pos_[heap_[i]] = static_cast<int>(i);
      i = child;
    }
    heap_[i] = v;
    pos_[v] = static_cast<int>(i);
  }

  const std::vector<double>& act_;
  std::vector<Var> heap_;
  std::vector<int> pos_;
};

double luby(double y, std::uint64_t x) {
  std::uint64_t size = 1;
  int seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  double r = 1;
  for (int i = 0; i < seq; ++i) r *= y;
  return r;
}

class CdclSolver final : public Solver {
 public:
  CdclSolver() : order_(activity_) {}

  Var new_var() override {
    Var v = static_cast<Var>(assigns_.size());
    assigns_.push_back(LBool::Undef);
    level_.push_back(0);
    reason_.push_back(kNoReason);
    polarity_.push_back(1);
    activity_.push_back(0.0);
    seen_.push_back(0);
    watches_.emplace_back();
    watches_.emplace_back();
    order_.insert(v);
    return v;
  }

  std::size_t num_vars() const override { return assigns_.size(); }

  bool add_clause(std::span<const Lit> in) override {
    if (!ok_) return false;
    cancel_until(0);
    std::vector<Lit> c(in.begin(), in.end());
    std::sort(c.begin(), c.end());
    std::size_t j = 0;
    Lit prev{std::numeric_limits<std::uint32_t>::max()};
    for (std::size_t i = 0; i < c.size(); ++i) {
      const LBool v = value(c[i]);
      if (v == LBool::True || c[i] == ~prev) return true;
      if (v != LBool::False && c[i] != prev) c[j++] = prev = c[i];
    }
    c.resize(j);
    if (c.empty()) return ok_ = false;
    if (c.size() == 1) {
      enqueue(c[0], kNoReason);
      return ok_ = (propagate() == kNoReason);
    }
    attach(alloc(std::move(c), false, 0));
    return true;
  }

  Result solve(std::span<const Lit> assumptions) override {
    model_.clear();
    if (!ok_) return Result::Unsat;
    assumptions_.assign(assumptions.begin(), assumptions.end());
    Result status = Result::Unknown;
    for (std::uint64_t restart = 0; status == Result::Unknown; ++restart) {
      const auto budget = static_cast<std::uint64_t>(luby(2, restart) * 100);
      status = search(budget);
      if (status == Result::Unknown && timed_out()) break;
      ++stats_.restarts;
    }
    if (status == Result::Sat) {
      model_.resize(assigns_.size());
      for (std::size_t v = 0; v < assigns_.size(); ++v) model_[v] = assigns_[v] == LBool::True;
    }
    cancel_until(0);
    return status;
  }

  bool model_value(Var v) const override { return v < model_.size() && model_[v]; }

  void set_deadline(std::optional<Clock::time_point> deadline) override { deadline_ = deadline; }

  SolverStats stats() const override { return stats_; }

 private:
  LBool value(Lit l) const {
    const LBool a = assigns_[l.var()];
    return a == LBool::Undef ? a : static_cast<LBool>(static_cast<std::uint8_t>(a) ^ (l.negated() ? 1U : 0U));
  }
  std::uint32_t decision_level() const { return static_cast<std::uint32_t>(trail_lim_.size()); }

  bool timed_out() {
    return deadline_ && Clock::now() >= *deadline_;
  }

  CRef alloc(std::vector<Lit> lits, bool learnt, std::uint32_t lbd) {
    CRef cr;
    if (!free_.empty()) {
      cr = free_.back();
      free_.pop_back();
    } else {
      cr = static_cast<CRef>(clauses_.size());
      clauses_.emplace_back();
    }
    auto& c = clauses_[cr];
    c.lits = std::move(lits);
    c.learnt = learnt;
    c.deleted = false;
    c.lbd = lbd;
    c.activity = 0;
    return cr;
  }

  void attach(CRef cr) {
    const auto& c = clauses_[cr].lits;
    watches_[c[0].x].push_back({cr, c[1]});
    watches_[c[1].x].push_back({cr, c[0]});
  }

  void enqueue(Lit p, CRef from) {
    assigns_[p.var()] = p.negated() ? LBool::False : LBool::True;
    level_[p.var()] = decision_level();
    reason_[p.var()] = from;
    trail_.push_back(p);
  }

  void cancel_until(std::uint32_t lvl) {
    if (decision_level() <= lvl) return;
    for (std::size_t i = trail_.size(); i-- > trail_lim_[lvl];) {
      const Var v = trail_[i].var();
      assigns_[v] = LBool::Undef;
      reason_[v] = kNoReason;
      polarity_[v] = trail_[i].negated() ? 1 : 0;
      order_.insert(v);
    }
    trail_.resize(trail_lim_[lvl]);
    qhead_ = trail_.size();
    trail_lim_.resize(lvl);
  }

  CRef propagate() {
    CRef confl = kNoReason;
    while (qhead_ < trail_.size()) {
      const Lit false_lit = ~trail_[qhead_++];
      ++stats_.propagations;
      auto& ws = watches_[false_lit.x];
      std::size_t i = 0, j = 0;
      const std::size_t n = ws.size();
      while (i < n) {
        const Watcher w = ws[i];
        if (value(w.blocker) == LBool::True) {
          ws[j++] = ws[i++];
          continue;
        }
        auto& lits = clauses_[w.cref].lits;
        if (lits[0] == false_lit) std::swap(lits[0], lits[1]);
        ++i;
        const Lit first = lits[0];
        const Watcher nw{w.cref, first};
        if (first != w.blocker && value(first) == LBool::True) {
          ws[j++] = nw;
          continue;
        }
        bool moved = false;
        for (std::size_t k = 2; k < lits.size(); ++k) {
          if (value(lits[k]) != LBool::False) {
            std::swap(lits[1], lits[k]);
            watches_[lits[1].x].push_back(nw);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = nw;
        if (value(first) == LBool::False) {
          confl = w.cref;
          qhead_ = trail_.size();
          while (i < n) ws[j++] = ws[i++];
        } else {
          enqueue(first, w.cref);
        }
      }
      ws.resize(j);
      if (confl != kNoReason) break;
    }
    return confl;
  }

  void bump_var(Var v) {
    if ((activity_[v] += var_inc_) > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    order_.increased(v);
  }

  void bump_clause(Clause& c) {
    if ((c.activity += static_cast<float>(cla_inc_)) > 1e20F) {
      for (auto& cl : clauses_)
        if (cl.learnt) cl.activity *= 1e-20F;
      cla_inc_ *= 1e-20;
    }
  }

  std::uint32_t abstract_level(Var v) const { return 1U << (level_[v] & 31U); }

  bool lit_redundant(Lit p, std::uint32_t levels) {
    stack_.clear();
    stack_.push_back(p);
    const std::size_t top = to_clear_.size();
    while (!stack_.empty()) {
      const Var v = stack_.back().var();
      stack_.pop_back();
      const auto& lits = clauses_[reason_[v]].lits;
      for (std::size_t i = 1; i < lits.size(); ++i) {
        const Lit q = lits[i];
        const Var u = q.var();
        if (seen_[u] || level_[u] == 0) continue;
        if (reason_[u] != kNoReason && (abstract_level(u) & levels) != 0) {
          seen_[u] = 1;
          stack_.push_back(q);
          to_clear_.push_back(q);
        } else {
          for (std::size_t j = top; j < to_clear_.size(); ++j) seen_[to_clear_[j].var()] = 0;
          to_clear_.resize(top);
          return false;
        }
      }
    }
    return true;
  }

  void analyze(CRef confl, std::vector<Lit>& learnt, std::uint32_t& bt_level) {
    int path = 0;
    Lit p{std::numeric_limits<std::uint32_t>::max()};
    learnt.clear();
    learnt.push_back(p);
    std::size_t index = trail_.size();
    bool first = true;
    do {
      auto& c = clauses_[confl];
      if (c.learnt) bump_clause(c);
      for (std::size_t j = first ? 0 : 1; j < c.lits.size(); ++j) {
        const Lit q = c.lits[j];
        const Var v = q.var();
        if (seen_[v] || level_[v] == 0) continue;
        bump_var(v);
        seen_[v] = 1;
        if (level_[v] >= decision_level()) {
          ++path;
        } else {
          learnt.push_back(q);
        }
      }
      first = false;
      while (!seen_[trail_[--index].var()]) {
      }
      p = trail_[index];
      confl = reason_[p.var()];
      seen_[p.var()] = 0;
      --path;
    } while (path > 0);
    learnt[0] = ~p;

    to_clear_.assign(learnt.begin(), learnt.end());
    std::uint32_t levels = 0;
    for (std::size_t i = 1; i < learnt.size(); ++i) levels |= abstract_level(learnt[i].var());
    std::size_t j = 1;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      if (reason_[learnt[i].var()] == kNoReason || !lit_redundant(learnt[i], levels)) learnt[j++] = learnt[i];
    }
    learnt.resize(j);
    for (const auto& l : to_clear_) seen_[l.var()] = 0;

    bt_level = 0;
    if (learnt.size() > 1) {
      std::size_t max_i = 1;
      for (std::size_t i = 2; i < learnt.size(); ++i)
        if (level_[learnt[i].var()] > level_[learnt[max_i].var()]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level_[learnt[1].var()];
    }
  }

  std::uint32_t compute_lbd(const std::vector<Lit>& lits) {
    ++lbd_stamp_;
    if (lbd_seen_.size() <= decision_level()) lbd_seen_.resize(decision_level() + 1, 0);
    std::uint32_t n = 0;
    for (const auto& l : lits) {
      const auto lv = level_[l.var()];
      if (lbd_seen_[lv] != lbd_stamp_) {
        lbd_seen_[lv] = lbd_stamp_;
        ++n;
      }
    }
    return n;
  }

  bool locked(CRef cr) const {
    const auto& c = clauses_[cr].lits;
    return value(c[0]) == LBool::True && reason_[c[0].var()] == cr;
  }

  void reduce_db() {
    std::vector<CRef> cands;
    for (CRef cr = 0; cr < clauses_.size(); ++cr) {
      const auto& c = clauses_[cr];
      if (c.learnt && !c.deleted && c.lits.size() > 2 && c.lbd > 2 && !locked(cr)) cands.push_back(cr);
    }
    std::sort(cands.begin(), cands.end(), [&](CRef a, CRef b) {
      const auto& ca = clauses_[a];
      const auto& cb = clauses_[b];
      if (ca.lbd != cb.lbd) return ca.lbd > cb.lbd;
      return ca.activity < cb.activity;
    });
    const std::size_t remove = cands.size() / 2;
    for (std::size_t i = 0; i < remove; ++i) {
      auto& c = clauses_[cands[i]];
      c.deleted = true;
      c.lits.clear();
      c.lits.shrink_to_fit();
      free_.push_back(cands[i]);
      --learnt_count_;
    }
    for (auto& ws : watches_) {
      std::erase_if(ws, [&](const Watcher& w) { return clauses_[w.cref].deleted; });
    }
  }

  Lit pick_branch() {
    while (!order_.empty()) {
      const Var v = order_.pop();
      if (assigns_[v] == LBool::Undef) {
        ++stats_.decisions;
        return Lit::make(v, polarity_[v] != 0);
      }
    }
    return Lit{std::numeric_limits<std::uint32_t>::max()};
  }

  Result search(std::uint64_t conflict_budget) {
    std::uint64_t conflicts = 0;
    std::vector<Lit> learnt;
    for (;;) {
      const CRef confl = propagate();
      if (confl != kNoReason) {
        ++stats_.conflicts;
        ++conflicts;
        if (decision_level() == 0) {
          ok_ = false;
          return Result::Unsat;
        }
        std::uint32_t bt = 0;
        analyze(confl, learnt, bt);
        const auto lbd = compute_lbd(learnt);
        cancel_until(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], kNoReason);
        } else {
          const CRef cr = alloc(learnt, true, lbd);
          attach(cr);
          bump_clause(clauses_[cr]);
          enqueue(learnt[0], cr);
          ++learnt_count_;
          ++stats_.learnts;
        }
        var_inc_ /= 0.95;
        cla_inc_ /= 0.999;
        if ((stats_.conflicts & 63U) == 0 && timed_out()) {
          cancel_until(0);
          return Result::Unknown;
        }
        continue;
      }
      if (conflicts >= conflict_budget) {
        cancel_until(0);
        return Result::Unknown;
      }
      if (stats_.conflicts >= next_reduce_) {
        next_reduce_ = stats_.conflicts + 2000 + 300 * (++reductions_);
        reduce_db();
      }
      Lit next{std::numeric_limits<std::uint32_t>::max()};
      while (decision_level() < assumptions_.size()) {
        const Lit a = assumptions_[decision_level()];
        const LBool v = value(a);
        if (v == LBool::True) {
          trail_lim_.push_back(trail_.size());
        } else if (v == LBool::False) {
          return Result::Unsat;
        } else {
          next = a;
          break;
        }
      }
      if (next.x == std::numeric_limits<std::uint32_t>::max()) {
        if ((stats_.decisions & 1023U) == 0 && timed_out()) {
          cancel_until(0);
          return Result::Unknown;
        }
        next = pick_branch();
        if (next.x == std::numeric_limits<std::uint32_t>::max()) return Result::Sat;
      }
      trail_lim_.push_back(trail_.size());
      enqueue(next, kNoReason);
    }
  }

  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<CRef> free_;
  std::vector<std::vector<Watcher>> watches_;
  std::vector<LBool> assigns_;
  std::vector<std::uint32_t> level_;
  std::vector<CRef> reason_;
  std::vector<std::uint8_t> polarity_;
  std::vector<double> activity_;
  std::vector<std::uint8_t> seen_;
  std::vector<Lit> trail_;
  std::vector<std::size_t> trail_lim_;
  std::size_t qhead_ = 0;
  VarHeap order_;
  double var_inc_ = 1.0;
  double cla_inc_ = 1.0;
  std::vector<Lit> assumptions_;
  std::vector<bool> model_;
  std::vector<Lit> stack_;
  std::vector<Lit> to_clear_;
  std::vector<std::uint64_t> lbd_seen_;
  std::uint64_t lbd_stamp_ = 0;
  std::size_t learnt_count_ = 0;
  std::uint64_t next_reduce_ = 2000;
  std::uint64_t reductions_ = 0;
  std::optional<Clock::time_point> deadline_;
  SolverStats stats_;
};

}  // namespace

std::unique_ptr<Solver> make_solver() { return std::make_unique<CdclSolver>(); }

}  // namespace netlock::sat
