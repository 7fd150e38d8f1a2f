#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "seqgpt/geo/ingest.hpp"
#include "seqgpt/server/gazetteer.hpp"
#include "seqgpt/server/http_server.hpp"
#include "seqgpt/server/search_service.hpp"
#include "seqgpt/server/session_store.hpp"

#include "seqgpt/match/wire.hpp"

// Readable gtest failure output.
namespace seqgpt::geo {
inline void PrintTo(const Poi& p, std::ostream* os) { *os << match::to_json(p).dump(); }
}  // namespace seqgpt::geo
namespace seqgpt::match {
inline void PrintTo(const MatchResult& r, std::ostream* os) { *os << to_json(r).dump(); }
inline void PrintTo(const DraftExample& e, std::ostream* os) {
  *os << to_string(e.kind) << " " << e.name.value_or("-") << " [" << e.category << "] @"
      << (e.anchor_distance_m ? std::to_string(*e.anchor_distance_m) : "?");
}
inline void PrintTo(const ExemplarQuery& q, std::ostream* os) { *os << to_json(q).dump(); }
inline void PrintTo(const QueryDraft& d, std::ostream* os) { *os << to_json(d).dump(); }
}  // namespace seqgpt::match

namespace seqgpt::testing {

inline std::filesystem::path data_dir() { return SEQGPT_DATA_DIR; }
inline std::filesystem::path fixture_dir() { return SEQGPT_FIXTURE_DIR; }

inline std::shared_ptr<const geo::PoiStore> desk_store() {
  static auto store = std::make_shared<const geo::PoiStore>(geo::load_pois(data_dir() / "desk_pois.csv"));
  return store;
}

inline std::shared_ptr<server::SearchService> desk_service(match::MatchConfig config = {}) {
  return std::make_shared<server::SearchService>(desk_store(), server::Gazetteer::load(data_dir() / "gazetteer.csv"),
                                                 match::QueryCache::kDefaultCapacity, config);
}

/// Api over the desk dataset with the built-in graph, the rule backend,
/// sequential session ids ("s1", "s2", ...) and a frozen clock.
inline std::shared_ptr<server::Api> desk_api(match::MatchConfig config = {}) {
  auto counter = std::make_shared<int>(0);
  server::ApiOptions options;
  options.id_source = [counter] { return "s" + std::to_string(++*counter); };
  options.clock = [] { return std::int64_t{0}; };
  return std::make_shared<server::Api>(desk_service(config), dialogue::ChatGraph::standard(), llm::RegistrySpec{},
                                       std::make_shared<server::InMemorySessionStore>(), std::move(options));
}

/// A small random matching instance: up to `max_pois` POIs in a ~3 km box
/// and a query with `m` slots whose distances are plausible for the box.
struct Instance {
  std::shared_ptr<const geo::PoiStore> store;
  match::ExemplarQuery query;
};

inline Instance random_instance(std::mt19937_64& rng, std::size_t max_pois, std::size_t m) {
  static const char* cats[] = {"gym", "hotel", "cafe"};
  std::uniform_real_distribution<double> off(-0.015, 0.015), dist(50, 1800), eps(60, 400), rad(800, 2500);
  const std::size_t n = 1 + rng() % max_pois;
  std::vector<geo::Poi> pois;
  for (std::size_t i = 0; i < n; ++i) {
    pois.push_back({"p" + std::to_string(i), "poi " + std::to_string(i), cats[rng() % 3],
                    geo::GeoPoint(1.30 + off(rng), 103.85 + off(rng)), {}});
  }
  match::ExemplarQuery q{{}, geo::Circle(geo::GeoPoint(1.30 + off(rng) / 3, 103.85 + off(rng) / 3), rad(rng))};
  for (std::size_t i = 0; i < m; ++i) {
    q.examples.push_back({match::ExampleKind::category_only, std::nullopt, cats[rng() % 3], i == 0 ? 0.0 : dist(rng)});
  }
  q.eps_m = eps(rng);
  q.k = 1 + rng() % 12;
  return {std::make_shared<const geo::PoiStore>(std::move(pois)), std::move(q)};
}

/// Pearson's statistic for observed counts against expected probabilities.
inline double chi_square(const std::vector<double>& observed, const std::vector<double>& probs) {
  double total = 0, stat = 0;
  for (double o : observed) total += o;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = total * probs[i];
    stat += (observed[i] - e) * (observed[i] - e) / e;
  }
  return stat;
}

// Upper 1% points of the chi-square distribution.
inline constexpr double kChi2Crit01Df1 = 6.6349;
inline constexpr double kChi2Crit01Df2 = 9.2103;

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("seqgpt-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << content;
}

// The demo conversation: the opening sentence is what map mode sends for the
// two pinned places.
inline constexpr const char* kDemoTurns[] = {
    "I want to search for places like 1. Suntec City and 2. Anytime Fitness City Hall. The distance in meters of "
    "each place from the first place is 416 meters.",
    "I want to add a hotel",
    "Any hotel within 200 meters",
    "Yes, that's right.",
    "In downtown Sydney",
};

// A second, unrelated conversation for isolation checks.
inline constexpr const char* kOtherTurns[] = {
    "I want to search for places like 1. Pan Pacific Marina Hotel and 2. a gym. The distance in meters of each "
    "place from the first place is 300 meters.",
    "Yes, that's right.",
    "Around Marina Bay",
};

}  // namespace seqgpt::testing
