#include "netlock/planner.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <random>
#include <set>

#include "netlock/simulator.hpp"

namespace netlock {

std::string StylePolicy::name() const {
  if (styles.empty()) return "none";
  return is_hybrid() ? "hybrid" : std::string(to_string(styles.front()));
}

StylePolicy parse_style_policy(std::string_view text) {
  if (text == "hybrid") return StylePolicy::hybrid();
  if (auto s = parse_lock_style(text)) return StylePolicy::fixed(*s);
  throw PlannerError("unknown lock style '" + std::string(text) +
                     "' (expected xor_xnor, mux_lock, perturb_restore, pairwise_subgraph or hybrid)");
}

std::string_view to_string(FeedbackReason r) {
  switch (r) {
    case FeedbackReason::ParseFail: return "parse_fail";
    case FeedbackReason::WrongKeyWeak: return "wrong_key_weak";
    case FeedbackReason::SatRecovered: return "sat_recovered";
  }
  return "?";
}

namespace {

constexpr std::size_t kAttemptsPerTarget = 16;

class SitePicker {
 public:
  SitePicker(const Netlist& n, const RankedSites& ranked, const PlannerOptions& opt)
      : n_(n), ranked_(ranked), opt_(opt) {
    std::mt19937_64 rng(1);
    const Simulator sim(n);
    const auto all = sim.run_signals(random_patterns(n.input_count(), 256, rng));
    ones_.resize(all.rows());
    for (std::size_t r = 0; r < all.rows(); ++r) {
      std::size_t c = 0;
      for (auto w : all.row(r)) c += static_cast<std::size_t>(std::popcount(w));
      ones_[r] = c;
    }
  }

  LockPlan plan;
  std::set<std::string> banned;

  bool used(const std::string& s) const {
    for (const auto& inst : plan.instances)
      if (std::find(inst.targets.begin(), inst.targets.end(), s) != inst.targets.end()) return true;
    return false;
  }

  bool place(LockStyle style, const std::vector<std::uint32_t>& bits, const std::vector<bool>& correct,
             std::size_t helpers, std::size_t insert_at, const std::vector<std::string>& preferred = {}) {
    auto try_target = [&](std::size_t pos) {
      const auto& t = ranked_.entries[pos].node;
      if (used(t) || banned.count(t)) return false;
      return try_site(style, pos, bits, correct, helpers, insert_at);
    };
    for (const auto& p : preferred) {
      const auto pos = ranked_.position(p);
      if (pos < ranked_.entries.size() && try_target(pos)) return true;
    }
    for (std::size_t pos = 0; pos < ranked_.entries.size(); ++pos)
      if (try_target(pos)) return true;
    return false;
  }

 private:
  const std::vector<bool>& tfo(const std::string& s) {
    auto it = tfo_.find(s);
    if (it == tfo_.end()) it = tfo_.emplace(s, transitive_fanout(n_, *n_.find(s))).first;
    return it->second;
  }

  bool outside(const std::string& target, const std::string& other) {
    return other != target && !tfo(target)[*n_.find(other)];
  }

  // Helper literal that holds on the majority of sampled patterns.
  HelperSignal helper(const std::string& s) const { return {s, 2 * ones_[*n_.find(s)] >= 256}; }

  bool accept(LockInstance inst, std::size_t insert_at) {
    auto trial = plan;
    trial.instances.insert(trial.instances.begin() + static_cast<std::ptrdiff_t>(insert_at), std::move(inst));
    if (!validate_partial(trial).empty()) return false;
    plan = std::move(trial);
    return true;
  }

  std::vector<PlanViolation> validate_partial(LockPlan p) const {
    std::map<std::uint32_t, std::uint32_t> dense;
    for (const auto& inst : p.instances)
      for (auto b : inst.key_bits) dense.emplace(b, 0);
    std::uint32_t next = 0;
    for (auto& [bit, idx] : dense) idx = next++;
    for (auto& inst : p.instances)
      for (auto& b : inst.key_bits) b = dense[b];
    p.key_width = next;
    return validate_plan(p, n_, opt_.bounds);
  }

  // Gate outputs in rank order that may feed a lock on `target`.
  std::vector<std::string> feeders(const std::string& target, std::size_t limit) {
    std::vector<std::string> out;
    for (const auto& e : ranked_.entries) {
      if (out.size() >= limit) break;
      if (used(e.node) || !outside(target, e.node)) continue;
      out.push_back(e.node);
    }
    return out;
  }

  bool try_site(LockStyle style, std::size_t pos, const std::vector<std::uint32_t>& bits,
                const std::vector<bool>& correct, std::size_t helpers, std::size_t insert_at) {
    const auto& t = ranked_.entries[pos].node;
    LockInstance inst{style, {t}, bits, correct, {}};
    switch (style) {
      case LockStyle::XorXnor:
        return accept(inst, insert_at);
      case LockStyle::MuxLock: {
        auto cands = feeders(t, kAttemptsPerTarget * 4);
        std::stable_partition(cands.begin(), cands.end(), [&](const std::string& d) { return !decoys_.count(d); });
        cands.resize(std::min(cands.size(), kAttemptsPerTarget));
        for (const auto& d : cands) {
          inst.helpers = {{d, true}};
          if (accept(inst, insert_at)) {
            decoys_.insert(d);
            return true;
          }
        }
        return false;
      }
      case LockStyle::PerturbRestore: {
        const auto cands = feeders(t, helpers + kAttemptsPerTarget);
        for (std::size_t off = 0; off + helpers <= cands.size() && off < kAttemptsPerTarget; ++off) {
          inst.helpers.clear();
          for (std::size_t h = 0; h < helpers; ++h) inst.helpers.push_back(helper(cands[off + h]));
          if (accept(inst, insert_at)) return true;
        }
        return false;
      }
      case LockStyle::PairwiseSubgraph: {
        std::size_t tried = 0;
        for (std::size_t p2 = pos + 1; p2 < ranked_.entries.size() && tried < kAttemptsPerTarget; ++p2) {
          const auto& t2 = ranked_.entries[p2].node;
          if (used(t2) || banned.count(t2) || !outside(t, t2) || !outside(t2, t)) continue;
          ++tried;
          inst.targets = {t, t2};
          if (accept(inst, insert_at)) return true;
        }
        return false;
      }
    }
    return false;
  }

  const Netlist& n_;
  const RankedSites& ranked_;
  const PlannerOptions& opt_;
  std::vector<std::size_t> ones_;
  std::map<std::string, std::vector<bool>> tfo_;
  std::set<std::string> decoys_;
};

std::vector<bool> draw_bits(std::uint32_t width, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<bool> bits(width);
  for (std::uint32_t i = 0; i < width; ++i) bits[i] = (rng() & 1U) != 0;
  return bits;
}

void require_valid(const LockPlan& plan, const Netlist& n, const PlanBounds& bounds) {
  auto v = validate_plan(plan, n, bounds);
  if (!v.empty()) throw PlannerError("planner produced an invalid plan: " + v.front().message);
}

std::size_t best_position(const LockInstance& inst, const RankedSites& ranked) {
  std::size_t best = ranked.entries.size();
  for (const auto& t : inst.targets) best = std::min(best, ranked.position(t));
  return best;
}

}  // namespace

LockPlan heuristic_plan(const Netlist& n, const RankedSites& ranked, std::uint32_t key_width, const StylePolicy& policy,
                        std::uint64_t seed, const PlannerOptions& opt) {
  if (key_width == 0) throw PlannerError("key width must be at least 1");
  if (policy.styles.empty()) throw PlannerError("empty style policy");
  if (n.is_locked()) throw PlannerError("netlist '" + n.name() + "' is already locked");
  const auto correct = draw_bits(key_width, seed);
  SitePicker picker(n, ranked, opt);
  picker.plan.source_circuit = n.name();
  picker.plan.seed = seed;

  std::uint32_t next = 0;
  for (std::size_t i = 0; next < key_width; ++i) {
    auto style = policy.styles[i % policy.styles.size()];
    const std::uint32_t remaining = key_width - next;
    std::uint32_t group = 1;
    if (style == LockStyle::PerturbRestore) {
      if (remaining == 1) {
        auto& insts = picker.plan.instances;
        auto last = std::find_if(insts.rbegin(), insts.rend(),
                                 [](const LockInstance& x) { return x.style == LockStyle::PerturbRestore; });
        if (last != insts.rend()) {
          last->key_bits.push_back(next);
          last->correct_bits.push_back(correct[next]);
          ++next;
          continue;
        }
        style = LockStyle::XorXnor;
      } else {
        group = std::min<std::uint32_t>(static_cast<std::uint32_t>(std::max<std::size_t>(2, opt.perturb_group_bits)),
                                        remaining);
      }
    }
    std::vector<std::uint32_t> bits;
    std::vector<bool> cbits;
    for (std::uint32_t b = next; b < next + group; ++b) {
      bits.push_back(b);
      cbits.push_back(correct[b]);
    }
    if (!picker.place(style, bits, cbits, opt.perturb_helpers, picker.plan.instances.size())) {
      throw PlannerError("insufficient eligible sites in '" + n.name() + "': placed " + std::to_string(next) + " of " +
                         std::to_string(key_width) + " key bits, no legal site for " + std::string(to_string(style)));
    }
    next += group;
  }
  picker.plan.key_width = key_width;
  require_valid(picker.plan, n, opt.bounds);
  return picker.plan;
}

LockPlan refine_plan(const LockPlan& prev, const PlannerFeedback& fb, const Netlist& n, const RankedSites& ranked,
                     std::uint64_t seed, const PlannerOptions& opt) {
  SitePicker picker(n, ranked, opt);
  picker.plan = prev;
  picker.plan.seed = seed;
  auto& insts = picker.plan.instances;
  auto fail = [&](const std::string& why) {
    return PlannerError("no legal " + std::string(to_string(fb.reason)) + " refinement: " + why);
  };

  switch (fb.reason) {
    case FeedbackReason::ParseFail: {
      std::set<std::size_t> drop;
      bool all = fb.violations.empty();
      for (const auto& v : fb.violations) {
        if (v.instance >= prev.instances.size()) {
          all = true;
        } else {
          drop.insert(v.instance);
        }
      }
      if (all)
        for (std::size_t i = 0; i < prev.instances.size(); ++i) drop.insert(i);
      std::vector<std::pair<std::size_t, LockInstance>> removed;
      for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
        removed.emplace_back(*it, insts[*it]);
        for (const auto& t : insts[*it].targets) picker.banned.insert(t);
        insts.erase(insts.begin() + static_cast<std::ptrdiff_t>(*it));
      }
      std::reverse(removed.begin(), removed.end());
      for (const auto& [idx, inst] : removed) {
        const auto helpers = inst.style == LockStyle::PerturbRestore
                                 ? std::clamp(inst.helpers.size(), opt.bounds.min_helpers, opt.bounds.max_helpers)
                                 : opt.perturb_helpers;
        if (!picker.place(inst.style, inst.key_bits, inst.correct_bits, helpers, std::min(idx, insts.size())))
          throw fail("no site for instance " + std::to_string(idx));
      }
      break;
    }
    case FeedbackReason::WrongKeyWeak: {
      if (insts.empty()) throw fail("plan has no instances");
      for (auto& inst : insts) {
        if (inst.style == LockStyle::PerturbRestore && inst.helpers.size() > std::max<std::size_t>(1, opt.bounds.min_helpers))
          inst.helpers.pop_back();
      }
      std::size_t worst = 0;
      for (std::size_t i = 1; i < insts.size(); ++i)
        if (best_position(insts[i], ranked) >= best_position(insts[worst], ranked)) worst = i;
      const LockInstance moved = insts[worst];
      for (const auto& inst : prev.instances)
        for (const auto& t : inst.targets) picker.banned.insert(t);
      insts.erase(insts.begin() + static_cast<std::ptrdiff_t>(worst));
      const auto helpers = moved.style == LockStyle::PerturbRestore ? moved.helpers.size() : opt.perturb_helpers;
      if (!picker.place(moved.style, moved.key_bits, moved.correct_bits, helpers, worst))
        throw fail("no unused site accepts the lowest-ranked instance");
      break;
    }
    case FeedbackReason::SatRecovered: {
      std::vector<std::size_t> xs;
      for (std::size_t i = 0; i < insts.size(); ++i)
        if (insts[i].style == LockStyle::XorXnor) xs.push_back(i);
      if (xs.size() < 2) throw fail("fewer than two xor_xnor instances to merge");
      std::vector<std::pair<std::uint32_t, bool>> merged;
      std::vector<std::string> preferred;
      for (auto i : xs) {
        merged.emplace_back(insts[i].key_bits[0], insts[i].correct_bits[0]);
        preferred.push_back(insts[i].targets[0]);
      }
      std::sort(merged.begin(), merged.end());
      std::stable_sort(preferred.begin(), preferred.end(), [&](const std::string& a, const std::string& b) {
        return ranked.position(a) < ranked.position(b);
      });
      for (auto it = xs.rbegin(); it != xs.rend(); ++it) insts.erase(insts.begin() + static_cast<std::ptrdiff_t>(*it));
      std::vector<std::uint32_t> bits;
      std::vector<bool> cbits;
      for (const auto& [b, c] : merged) {
        bits.push_back(b);
        cbits.push_back(c);
      }
      if (!picker.place(LockStyle::PerturbRestore, bits, cbits, opt.perturb_helpers, std::min(xs.front(), insts.size()),
                        preferred))
        throw fail("no site accepts the merged perturb_restore group");
      break;
    }
  }
  require_valid(picker.plan, n, opt.bounds);
  return picker.plan;
}

double candidate_score(const VerificationReport& v) {
  const double ber = std::min(v.corruption.bit_error_rate, 0.5);
  return 1.0 * (v.correct_key_ok ? 1.0 : 0.0) + 2.0 * ber / 0.5 -
         0.5 * std::min(v.overhead.gate_overhead_ratio, 1.0) - 10.0 * (v.parse_ok ? 0.0 : 1.0);
}

std::uint64_t plan_hash(const LockPlan& plan) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_plan(plan)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void rank_candidates(std::vector<CandidateRecord>& cands) {
  for (auto& c : cands) c.score = candidate_score(c.verification);
  std::vector<std::pair<std::uint64_t, std::size_t>> keys;
  for (std::size_t i = 0; i < cands.size(); ++i) keys.emplace_back(plan_hash(cands[i].plan), i);
  std::vector<std::size_t> order(cands.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = cands[a];
    const auto& cb = cands[b];
    if (ca.score != cb.score) return ca.score > cb.score;
    const double oa = ca.verification.overhead.gate_overhead_ratio;
    const double ob = cb.verification.overhead.gate_overhead_ratio;
    if (oa != ob) return oa < ob;
    return keys[a].first < keys[b].first;
  });
  std::vector<CandidateRecord> sorted;
  sorted.reserve(cands.size());
  for (auto i : order) sorted.push_back(std::move(cands[i]));
  cands = std::move(sorted);
}

}  // namespace netlock
