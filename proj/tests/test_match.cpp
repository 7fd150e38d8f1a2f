#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "seqgpt/match/matcher.hpp"
#include "seqgpt/match/query_cache.hpp"
#include "seqgpt/match/resolve.hpp"
#include "seqgpt/match/wire.hpp"
#include "support.hpp"

namespace seqgpt::match {
namespace {

using nlohmann::json;
using testing::random_instance;

// Straightforward reference: every ordered tuple of distinct area POIs with
// the right categories, each within eps of its stated distance.
std::vector<MatchResult> reference(const geo::PoiStore& store, const ExemplarQuery& q) {
  std::vector<std::vector<const geo::Poi*>> slots(q.examples.size());
  for (std::size_t i = 0; i < q.examples.size(); ++i) {
    for (const geo::Poi& p : store.pois()) {
      if (p.category == q.examples[i].category && q.area.contains(p.point)) slots[i].push_back(&p);
    }
  }
  std::vector<MatchResult> out;
  std::vector<const geo::Poi*> pick;
  auto rec = [&](auto&& self, std::size_t i) -> void {
    if (i == slots.size()) {
      MatchResult r;
      double sum = 0;
      for (const auto* p : pick) r.assignment.push_back(*p);
      for (std::size_t j = 1; j < pick.size(); ++j) {
        sum += std::abs(geo::haversine_m(pick[0]->point, pick[j]->point) - q.examples[j].anchor_distance_m);
      }
      r.score_m = pick.size() > 1 ? sum / double(pick.size() - 1) : 0.0;
      r.similarity = 1.0 / (1.0 + r.score_m / 100.0);
      out.push_back(std::move(r));
      return;
    }
    for (const auto* p : slots[i]) {
      if (std::find(pick.begin(), pick.end(), p) != pick.end()) continue;
      if (i > 0 && std::abs(geo::haversine_m(pick[0]->point, p->point) - q.examples[i].anchor_distance_m) > q.eps_m)
        continue;
      pick.push_back(p);
      self(self, i + 1);
      pick.pop_back();
    }
  };
  rec(rec, 0);
  std::sort(out.begin(), out.end(), [](const MatchResult& a, const MatchResult& b) {
    if (a.score_m != b.score_m) return a.score_m < b.score_m;
    for (std::size_t i = 0; i < a.assignment.size(); ++i) {
      if (a.assignment[i].id != b.assignment[i].id) return a.assignment[i].id < b.assignment[i].id;
    }
    return false;
  });
  if (out.size() > q.k) out.resize(q.k);
  return out;
}

std::vector<std::vector<std::string>> id_tuples(const std::vector<MatchResult>& rs) {
  std::vector<std::vector<std::string>> out;
  for (const auto& r : rs) {
    out.emplace_back();
    for (const auto& p : r.assignment) out.back().push_back(p.id);
  }
  return out;
}

geo::Poi poi(std::string id, std::string cat, double lat, double lon, std::string name = "") {
  return {id, name.empty() ? id : name, cat, geo::GeoPoint(lat, lon), {}};
}

ExampleSpec cat(std::string c, double d) { return {ExampleKind::category_only, std::nullopt, std::move(c), d}; }

// ----- scoring -----

TEST(Score, MeanAbsoluteDeviationFromAnchor) {
  // Along the equator 0.004 deg = 444.779706578235 m, 0.0045 deg = 500.3771699005143 m.
  const std::vector<geo::Poi> a = {poi("a", "gym", 0, 0), poi("h", "hotel", 0, 0.004), poi("c", "cafe", 0, 0.0045)};
  ExemplarQuery q{{cat("gym", 0), cat("hotel", 461), cat("cafe", 500)}, geo::Circle({0, 0}, 1000)};
  EXPECT_NEAR(score(q, a), ((461 - 444.779706578235) + (500.3771699005143 - 500)) / 2, 1e-9);
  q.examples.resize(1);
  EXPECT_EQ(score(q, std::span(a).first(1)), 0.0);
  EXPECT_THROW(score(q, a), ContractViolation);
}

TEST(Score, SimilarityMapping) {
  EXPECT_EQ(similarity_from_score(0), 1.0);
  EXPECT_DOUBLE_EQ(similarity_from_score(100), 0.5);
  EXPECT_GT(similarity_from_score(10), similarity_from_score(11));
}

TEST(Matcher, RanksHandBuiltInstance) {
  const geo::PoiStore store({poi("a", "gym", 0, 0), poi("h1", "hotel", 0, 0.004), poi("h2", "hotel", 0, 0.0045),
                             poi("h3", "hotel", 0, 0.02), poi("g2", "gym", 0, 0.001)});
  const ExemplarQuery q{{cat("gym", 0), cat("hotel", 461)}, geo::Circle({0, 0.002}, 2000), 10, 100};
  const auto rs = match_exemplar(store, q);
  // g2 -> h1 = 333.6 m (dev 127, out), g2 -> h2 = 389.2 m (dev 71.8)
  ASSERT_EQ(id_tuples(rs), (std::vector<std::vector<std::string>>{{"a", "h1"}, {"a", "h2"}, {"g2", "h2"}}));
  EXPECT_NEAR(rs[0].score_m, 461 - 444.779706578235, 1e-9);
  EXPECT_NEAR(rs[1].score_m, 500.3771699005143 - 461, 1e-9);
  EXPECT_DOUBLE_EQ(rs[0].similarity, similarity_from_score(rs[0].score_m));
}

TEST(Matcher, AssignmentsAreInjective) {
  const geo::PoiStore store({poi("a", "gym", 0, 0), poi("b", "gym", 0, 0.001)});
  const ExemplarQuery q{{cat("gym", 0), cat("gym", 111)}, geo::Circle({0, 0}, 500), 10, 50};
  const auto rs = match_exemplar(store, q);
  EXPECT_EQ(id_tuples(rs), (std::vector<std::vector<std::string>>{{"a", "b"}, {"b", "a"}}));
  const ExemplarQuery self{{cat("gym", 0), cat("gym", 0)}, geo::Circle({0, 0}, 500), 10, 50};
  EXPECT_TRUE(match_exemplar(store, self).empty());
}

TEST(Matcher, AllSlotsMustLieInTheArea) {
  const geo::PoiStore store({poi("a", "gym", 0, 0), poi("h", "hotel", 0, 0.004)});
  const ExemplarQuery q{{cat("gym", 0), cat("hotel", 445)}, geo::Circle({0, 0}, 300), 10, 50};
  EXPECT_TRUE(match_exemplar(store, q).empty());
  EXPECT_TRUE(brute_force_match(store, q).empty());
}

TEST(Matcher, EmptyAndSingleSlot) {
  const geo::PoiStore store({poi("b", "gym", 0, 0.001), poi("a", "gym", 0, 0), poi("c", "cafe", 0, 0)});
  ExemplarQuery q{{cat("gym", 0)}, geo::Circle({0, 0}, 500), 10, 50};
  EXPECT_EQ(id_tuples(match_exemplar(store, q)), (std::vector<std::vector<std::string>>{{"a"}, {"b"}}));
  q.examples[0].category = "museum";
  EXPECT_TRUE(match_exemplar(store, q).empty());
}

TEST(Matcher, ValidatesInput) {
  const geo::PoiStore store({poi("a", "gym", 0, 0)});
  ExemplarQuery q{{cat("gym", 0)}, geo::Circle({0, 0}, 500)};
  EXPECT_THROW(match_exemplar(store, q, {.cap = 0}), ContractViolation);
  q.k = 0;
  EXPECT_THROW(match_exemplar(store, q), ContractViolation);
  q.k = 1;
  q.examples[0].anchor_distance_m = 5;
  EXPECT_THROW(match_exemplar(store, q), ContractViolation);
  q.examples = {};
  EXPECT_THROW(brute_force_match(store, q), ContractViolation);
}

TEST(Matcher, BruteForceRefusesHugeInstances) {
  std::vector<geo::Poi> pois;
  for (int i = 0; i < 250; ++i) pois.push_back(poi("p" + std::to_string(i), "gym", 0, i * 1e-5));
  const geo::PoiStore store(std::move(pois));
  const ExemplarQuery q{{cat("gym", 0), cat("gym", 10), cat("gym", 20)}, geo::Circle({0, 0.001}, 1000)};
  EXPECT_THROW(brute_force_match(store, q), InstanceTooLarge);
}

TEST(Matcher, UnboundedCapEqualsBruteForceAndReference) {
  std::mt19937_64 rng(20240611);
  int nonempty = 0;
  for (int i = 0; i < 300; ++i) {
    auto inst = random_instance(rng, 60, 1 + i % 3);
    const auto fast = match_exemplar(*inst.store, inst.query, {.cap = kUnboundedCap});
    const auto brute = brute_force_match(*inst.store, inst.query);
    const auto ref = reference(*inst.store, inst.query);
    ASSERT_EQ(id_tuples(fast), id_tuples(ref)) << "instance " << i;
    ASSERT_EQ(id_tuples(brute), id_tuples(ref)) << "instance " << i;
    nonempty += !ref.empty();
    for (std::size_t j = 0; j < ref.size(); ++j) {
      EXPECT_NEAR(fast[j].score_m, ref[j].score_m, 1e-9);
      EXPECT_NEAR(brute[j].score_m, ref[j].score_m, 1e-9);
    }
  }
  EXPECT_GT(nonempty, 150);
}

TEST(Matcher, CappedResultsAreValidAndNeverBetterThanExact) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    auto inst = random_instance(rng, 60, 3);
    const auto exact = brute_force_match(*inst.store, inst.query);
    const auto capped = match_exemplar(*inst.store, inst.query, {.cap = 2});
    EXPECT_LE(capped.size(), exact.size());
    for (std::size_t j = 0; j < capped.size(); ++j) {
      EXPECT_GE(capped[j].score_m, exact[j].score_m - 1e-9);
      EXPECT_NEAR(capped[j].score_m, score(inst.query, capped[j].assignment), 1e-12);
      if (j) {
        EXPECT_TRUE(ranks_before(capped[j - 1], capped[j]));
      }
    }
  }
}

// ----- resolve -----

TEST(Resolve, NamedSlotsTakeDatasetDistance) {
  const auto store = testing::desk_store();
  const std::vector<DraftExample> draft = {
      {ExampleKind::named, "suntec city", "", std::nullopt},
      {ExampleKind::named, "Anytime Fitness City Hall", "", 416.0},
      {ExampleKind::category_only, std::nullopt, "hotel", 200.0},
  };
  const auto out = resolve_examples(*store, draft);
  EXPECT_EQ(out[0].name, "Suntec City");
  EXPECT_EQ(out[0].category, "mall");
  EXPECT_EQ(out[0].anchor_distance_m, 0.0);
  EXPECT_EQ(out[1].category, "gym");
  EXPECT_NEAR(*out[1].anchor_distance_m, 460.99967583658844, 1e-6);
  EXPECT_EQ(out[2], draft[2]);
}

TEST(Resolve, Errors) {
  const geo::PoiStore store({poi("a", "gym", 0, 0, "Twin"), poi("b", "gym", 1, 1, "Twin"), poi("c", "mall", 0, 0, "Mall")});
  try {
    resolve_examples(store, {{ExampleKind::named, "Nowhere", "", std::nullopt}});
    FAIL();
  } catch (const UnknownPlace& e) {
    EXPECT_EQ(e.code(), "UNKNOWN_PLACE");
    EXPECT_EQ(e.name(), "Nowhere");
  }
  try {
    resolve_examples(store, {{ExampleKind::named, "twin", "", std::nullopt}});
    FAIL();
  } catch (const AmbiguousPlace& e) {
    EXPECT_EQ(e.code(), "AMBIGUOUS_PLACE");
    EXPECT_EQ(e.candidates().size(), 2u);
  }
  const DraftExample gym{ExampleKind::category_only, std::nullopt, "gym", std::nullopt};
  const DraftExample mall{ExampleKind::named, "Mall", "", std::nullopt};
  EXPECT_THROW(resolve_examples(store, {gym, mall}), AnchorUnresolved);
  DraftExample mall_at = mall;
  mall_at.anchor_distance_m = 300;
  EXPECT_EQ(*resolve_examples(store, {gym, mall_at})[1].anchor_distance_m, 300.0);

  QueryDraft d{{mall, gym}};
  EXPECT_THROW(resolve_query(store, d), MissingArea);
  d.area = geo::Circle({0, 0}, 1000);
  try {
    resolve_query(store, d);
    FAIL();
  } catch (const MissingDistance& e) {
    EXPECT_EQ(e.code(), "MISSING_DISTANCE");
  }
  d.examples[1].anchor_distance_m = 50;
  const auto q = resolve_query(store, d);
  EXPECT_EQ(q.examples[0].name, "Mall");
  EXPECT_EQ(q.examples[1].anchor_distance_m, 50.0);
  EXPECT_THROW(resolve_query(store, QueryDraft{}), ContractViolation);
}

// ----- wire -----

TEST(Wire, QueryRoundTrip) {
  const ExemplarQuery q{{{ExampleKind::named, "Suntec City", "mall", 0}, cat("hotel", 200.5)},
                        geo::Circle({-33.8688, 151.2093}, 1500), 7, 250};
  const json j = to_json(q);
  EXPECT_EQ(j["examples"][0]["kind"], "named");
  EXPECT_EQ(j["examples"][1]["kind"], "category_only");
  EXPECT_FALSE(j["examples"][1].contains("name"));
  EXPECT_EQ(j["area"]["radius_m"], 1500.0);
  EXPECT_EQ(query_from_json(j), q);
  EXPECT_EQ(query_from_json(json::parse(j.dump())), q);
}

TEST(Wire, StrictParseRejectsMalformed) {
  const json good = to_json(ExemplarQuery{{cat("gym", 0)}, geo::Circle({0, 0}, 100)});
  auto with = [&](auto&& edit) {
    json j = good;
    edit(j);
    return j;
  };
  const json bad[] = {
      json::array(),
      with([](json& j) { j.erase("examples"); }),
      with([](json& j) { j["examples"] = json::array(); }),
      with([](json& j) { j["examples"][0]["kind"] = "fuzzy"; }),
      with([](json& j) { j["examples"][0]["anchor_distance_m"] = "0"; }),
      with([](json& j) { j["examples"][0]["anchor_distance_m"] = 3; }),
      with([](json& j) { j["area"]["radius_m"] = -1; }),
      with([](json& j) { j["area"]["center"]["lat"] = 91; }),
      with([](json& j) { j["k"] = 0; }),
      with([](json& j) { j["k"] = 1.5; }),
      with([](json& j) { j["eps_m"] = 0; }),
      with([](json& j) { j["examples"][0]["kind"] = "named"; }),
  };
  for (const json& j : bad) {
    EXPECT_THROW(query_from_json(j), InvalidQuery) << j.dump();
  }
  EXPECT_NO_THROW(query_from_json(good));
}

TEST(Wire, DraftParse) {
  const auto d = draft_from_json(json::parse(R"({
    "examples": [{"kind": "named", "name": "Suntec City"},
                 {"kind": "category_only", "category": " Hotel ", "anchor_distance_m": 200}],
    "area": {"name": "downtown Sydney"}})"));
  ASSERT_EQ(d.examples.size(), 2u);
  EXPECT_EQ(d.examples[0].category, "");
  EXPECT_FALSE(d.examples[0].anchor_distance_m);
  EXPECT_EQ(d.examples[1].category, "hotel");
  EXPECT_EQ(d.area_name, "downtown Sydney");
  EXPECT_FALSE(d.area);
  EXPECT_EQ(d.k, kDefaultK);
  EXPECT_EQ(d.eps_m, kDefaultEpsM);
  EXPECT_EQ(draft_from_json(to_json(d)), d);
  EXPECT_EQ(draft_from_json(json::object()), QueryDraft{});

  EXPECT_THROW(draft_from_json(json::parse(R"({"examples": [{"kind": "category_only"}]})")), InvalidQuery);
  EXPECT_THROW(draft_from_json(json::parse(R"({"examples": [{"kind": "named", "name": ""}]})")), InvalidQuery);
  EXPECT_THROW(draft_from_json(json::parse(R"({"area": {}})")), InvalidQuery);
  EXPECT_THROW(draft_from_json(json::parse(
                   R"({"examples": [{"kind": "category_only", "category": "x", "anchor_distance_m": -4}]})")),
               InvalidQuery);
}

TEST(Wire, ResultJson) {
  const MatchResult r{{poi("a", "gym", 1, 2, "A")}, 12.5, similarity_from_score(12.5)};
  const json j = to_json(std::vector<MatchResult>{r});
  ASSERT_EQ(j.size(), 1u);
  EXPECT_EQ(j[0]["assignment"][0]["id"], "a");
  EXPECT_EQ(j[0]["assignment"][0]["lat"], 1.0);
  EXPECT_EQ(j[0]["score_m"], 12.5);
  EXPECT_FALSE(j[0]["assignment"][0].contains("tags"));
}

// ----- cache key -----

TEST(CacheKey, Canonicalization) {
  const geo::Circle area({-33.8688, 151.2093}, 1500);
  auto key = [&](double d, std::string c = "hotel", geo::Circle a = geo::Circle({-33.8688, 151.2093}, 1500)) {
    return cache_key(ExemplarQuery{{cat("mall", 0), cat(c, d)}, a});
  };
  EXPECT_EQ(key(461), key(463));
  EXPECT_NE(key(461), key(474));
  EXPECT_EQ(key(461, "Hotel"), key(461, "hotel"));
  EXPECT_EQ(key(200, "hotel", geo::Circle({-33.86881, 151.20932}, 1520)), key(200));
  EXPECT_NE(key(200, "hotel", geo::Circle({-33.8698, 151.2093}, 1500)), key(200));
  EXPECT_NE(key(200, "hotel", geo::Circle({-33.8688, 151.2093}, 1700)), key(200));
  EXPECT_EQ(cache_key(ExemplarQuery{{cat("gym", 0)}, geo::Circle({-0.00001, 0}, 10)}),
            cache_key(ExemplarQuery{{cat("gym", 0)}, geo::Circle({0.00001, 0}, 10)}));
  ExemplarQuery a{{cat("gym", 0)}, area}, b = a;
  b.k = 5;
  EXPECT_NE(cache_key(a), cache_key(b));
  b = a;
  b.eps_m = 499;
  EXPECT_NE(cache_key(a), cache_key(b));
}

}  // namespace
}  // namespace seqgpt::match
