#include "seqgpt/match/matcher.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <queue>

namespace seqgpt::match {

namespace {

std::atomic<std::uint64_t> g_invocations{0};

bool ids_less(std::span<const geo::Poi> a, std::span<const geo::Poi> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const geo::Poi& x, const geo::Poi& y) { return x.id < y.id; });
}

struct RankedWorse {
  bool operator()(const MatchResult& a, const MatchResult& b) const { return ranks_before(a, b); }
};

// Bounded max-heap of the k best results seen so far.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  bool admits(double s, std::span<const geo::Poi> ids) const {
    if (heap_.size() < k_) return true;
    const MatchResult& worst = heap_.top();
    return s < worst.score_m || (s == worst.score_m && ids_less(ids, worst.assignment));
  }

  void offer(double s, std::span<const geo::Poi> assignment) {
    if (!admits(s, assignment)) return;
    heap_.push({{assignment.begin(), assignment.end()}, s, similarity_from_score(s)});
    if (heap_.size() > k_) heap_.pop();
  }

  std::vector<MatchResult> take() {
    std::vector<MatchResult> out;
    out.reserve(heap_.size());
    while (!heap_.empty()) {
      out.push_back(heap_.top());
      heap_.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

 private:
  std::size_t k_;
  std::priority_queue<MatchResult, std::vector<MatchResult>, RankedWorse> heap_;
};

std::vector<geo::Poi> area_candidates(const geo::PoiStore& store, const ExemplarQuery& q,
                                      const std::string& category) {
  std::vector<geo::Poi> out;
  for (geo::Poi& p : store.within(q.area)) {
    if (p.category == category) out.push_back(std::move(p));
  }
  std::sort(out.begin(), out.end(),
            [](const geo::Poi& a, const geo::Poi& b) { return a.id < b.id; });
  return out;
}

bool contains_id(std::span<const geo::Poi> chosen, const std::string& id) {
  return std::any_of(chosen.begin(), chosen.end(), [&](const geo::Poi& p) { return p.id == id; });
}

}  // namespace

double score(const ExemplarQuery& query, std::span<const geo::Poi> assignment) {
  if (assignment.size() != query.examples.size()) {
    throw ContractViolation("assignment length " + std::to_string(assignment.size()) +
                            " does not match " + std::to_string(query.examples.size()) +
                            " example slots");
  }
  const std::size_t m = assignment.size();
  if (m <= 1) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 1; i < m; ++i) {
    sum += std::abs(geo::haversine_m(assignment[0].point, assignment[i].point) -
                    query.examples[i].anchor_distance_m);
  }
  return sum / static_cast<double>(m - 1);
}

bool ranks_before(const MatchResult& a, const MatchResult& b) {
  if (a.score_m != b.score_m) return a.score_m < b.score_m;
  return ids_less(a.assignment, b.assignment);
}

std::vector<MatchResult> match_exemplar(const geo::PoiStore& store, const ExemplarQuery& query,
                                        const MatchConfig& config) {
  g_invocations.fetch_add(1, std::memory_order_relaxed);
  query.validate();
  if (config.cap == 0) throw ContractViolation("candidate cap must be positive");
  const std::size_t m = query.examples.size();
  TopK top(query.k);

  for (const geo::Poi& anchor : area_candidates(store, query, query.examples[0].category)) {
    // Per-slot candidate lists around this anchor, best ring deviation first.
    std::vector<std::vector<geo::Poi>> slots(m);
    bool feasible = true;
    for (std::size_t i = 1; i < m && feasible; ++i) {
      const ExampleSpec& spec = query.examples[i];
      std::vector<std::pair<double, geo::Poi>> ring;
      for (geo::Poi& p :
           store.ring_query(anchor.point, spec.anchor_distance_m, query.eps_m, spec.category)) {
        if (p.id == anchor.id || !query.area.contains(p.point)) continue;
        const double dev = std::abs(geo::haversine_m(anchor.point, p.point) - spec.anchor_distance_m);
        ring.emplace_back(dev, std::move(p));
      }
      std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second.id < b.second.id;
      });
      if (ring.size() > config.cap) ring.erase(ring.begin() + static_cast<std::ptrdiff_t>(config.cap), ring.end());
      for (auto& entry : ring) slots[i].push_back(std::move(entry.second));
      feasible = !slots[i].empty();
    }
    if (!feasible) continue;

    std::vector<geo::Poi> chosen{anchor};
    chosen.reserve(m);
    auto extend = [&](auto&& self, std::size_t slot) -> void {
      if (slot == m) {
        top.offer(score(query, chosen), chosen);
        return;
      }
      for (const geo::Poi& p : slots[slot]) {
        if (contains_id(chosen, p.id)) continue;
        chosen.push_back(p);
        self(self, slot + 1);
        chosen.pop_back();
      }
    };
    extend(extend, 1);
  }
  return top.take();
}

std::uint64_t match_invocations() noexcept { return g_invocations.load(std::memory_order_relaxed); }

std::vector<MatchResult> brute_force_match(const geo::PoiStore& store, const ExemplarQuery& query) {
  query.validate();
  const std::size_t m = query.examples.size();
  std::vector<std::vector<geo::Poi>> slots;
  double product = 1.0;
  for (const ExampleSpec& spec : query.examples) {
    slots.push_back(area_candidates(store, query, spec.category));
    product *= static_cast<double>(slots.back().size());
  }
  if (product > kBruteForceLimit) throw InstanceTooLarge(product);

  std::vector<MatchResult> all;
  std::vector<geo::Poi> chosen;
  auto enumerate = [&](auto&& self, std::size_t slot) -> void {
    if (slot == m) {
      const double s = score(query, chosen);
      all.push_back({chosen, s, similarity_from_score(s)});
      return;
    }
    for (const geo::Poi& p : slots[slot]) {
      if (contains_id(chosen, p.id)) continue;
      if (slot > 0) {
        const double dev = std::abs(geo::haversine_m(chosen[0].point, p.point) -
                                    query.examples[slot].anchor_distance_m);
        if (dev > query.eps_m) continue;
      }
      chosen.push_back(p);
      self(self, slot + 1);
      chosen.pop_back();
    }
  };
  enumerate(enumerate, 0);
  std::sort(all.begin(), all.end(), ranks_before);
  if (all.size() > query.k) all.resize(query.k);
  return all;
}

}  // namespace seqgpt::match
