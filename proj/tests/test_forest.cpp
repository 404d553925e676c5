#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "fif/error.hpp"
#include "fif/forest.hpp"
#include "oracle.hpp"
#include "support.hpp"

using namespace fif;

namespace {

ForestConfig config_from(const oracle::Settings& s) {
  ForestConfig c;
  c.n_trees = s.n_trees;
  if (s.psi) c.psi = s.psi;
  if (s.height) c.height_limit = s.height;
  c.min_leaf_size = s.min_leaf;
  c.dictionary = s.dictionary;
  c.inner_products = s.specs;
  c.seed = s.seed;
  c.threads = 1;
  return c;
}

FunctionalDataset noise_data(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < n; ++i) curves.emplace_back(testing::random_values(p, rng));
  return FunctionalDataset::univariate(TimeGrid::uniform(p), std::move(curves));
}

ForestConfig cosine_config(std::size_t trees, std::uint64_t seed) {
  ForestConfig c;
  c.n_trees = trees;
  c.dictionary = DictionarySpec::of(DictionaryKind::cosine);
  c.seed = seed;
  return c;
}

Atom indicator(const TimeGrid& grid, double lo, double hi) {
  return make_atom({IndicatorAtom{lo, hi, false}}, SamplingContext{&grid, 1, nullptr, {}});
}

}  // namespace

TEST_SUITE("forest") {
  TEST_CASE("scores agree with an independent reimplementation") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
      auto problem = oracle::random_problem(rng);
      CAPTURE(trial);
      CAPTURE(to_string(problem.settings.dictionary.kind));
      const auto forest = FIForest::fit(problem.data, config_from(problem.settings));
      const oracle::Forest reference(problem.data, problem.settings);
      std::size_t internal = 0;
      for (const auto& t : forest.trees()) internal += t.structure().internal_count();
      CHECK(internal == reference.internal_nodes());
      for (std::size_t i = 0; i < problem.data.size(); ++i) {
        CHECK(forest.score(problem.data[i]) == doctest::Approx(reference.score(problem.data[i])).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("several trees on proper subsamples agree with the reimplementation") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 40; ++trial) {
      auto problem = oracle::random_problem(rng);
      if (problem.data.size() < 3) continue;
      problem.settings.n_trees = 2 + rng() % 6;
      problem.settings.psi = 2 + rng() % (problem.data.size() - 1);
      const auto forest = FIForest::fit(problem.data, config_from(problem.settings));
      const oracle::Forest reference(problem.data, problem.settings);
      for (std::size_t i = 0; i < problem.data.size(); ++i) {
        CHECK(forest.mean_path_length(problem.data[i]) ==
              doctest::Approx(reference.path(problem.data[i])).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("resolved defaults") {
    CHECK(default_psi(10) == 10);
    CHECK(default_psi(1000) == 256);
    CHECK(default_height_limit(1) == 1);
    CHECK(default_height_limit(2) == 1);
    CHECK(default_height_limit(64) == 6);
    CHECK(default_height_limit(65) == 7);
    CHECK(default_height_limit(256) == 8);
  }

  TEST_CASE("score from mean path") {
    CHECK(score_from_path(avg_bst_path(256), avg_bst_path(256)) == doctest::Approx(0.5));
    CHECK(score_from_path(3.0, avg_bst_path(256)) == doctest::Approx(std::exp2(-3.0 / 10.2448)).epsilon(1e-4));
    CHECK(score_from_path(3.0, avg_bst_path(256)) == doctest::Approx(0.8162).epsilon(1e-3));
    CHECK(score_from_path(2.0, avg_bst_path(16)) == doctest::Approx(0.7443).epsilon(1e-3));
    CHECK(score_from_path(0.0, 0.0) == 1.0);
    CHECK(score_from_path(0.0, 5.0) == 1.0);
  }

  TEST_CASE("one training curve gives a score of 1") {
    auto data = noise_data(1, 20, 3);
    auto forest = FIForest::fit(data, cosine_config(10, 1));
    CHECK(forest.psi() == 1);
    for (const auto& t : forest.trees()) CHECK(t.structure().nodes().size() == 1);
    CHECK(forest.score(data[0]) == 1.0);
  }

  TEST_CASE("two training curves split once") {
    auto data = noise_data(2, 20, 4);
    auto config = cosine_config(20, 2);
    auto forest = FIForest::fit(data, config);
    CHECK(forest.height_limit() == 1);
    for (const auto& t : forest.trees()) {
      const auto& s = t.structure();
      if (s.nodes().size() == 1) continue;  // a degenerate projection can stop the split
      CHECK(s.internal_count() == 1);
      CHECK(s.leaf_count() == 2);
      CHECK(s.max_depth() == 1);
    }
    CHECK(forest.c_psi() == 1.0);
  }

  TEST_CASE("psi = 64 with no effective height limit isolates every curve") {
    auto data = noise_data(64, 30, 5);
    auto config = cosine_config(3, 6);
    config.height_limit = 1000;
    auto forest = FIForest::fit(data, config);
    for (const auto& t : forest.trees()) {
      CHECK(t.structure().internal_count() == 63);
      CHECK(t.structure().leaf_count() == 64);
    }
  }

  TEST_CASE("psi = n uses every row; N trees are grown") {
    auto data = noise_data(10, 15, 8);
    auto forest = FIForest::fit(data, cosine_config(100, 3));
    CHECK(forest.trees().size() == 100);
    for (const auto& t : forest.trees()) {
      std::vector<std::size_t> rows(t.sample_rows().begin(), t.sample_rows().end());
      std::sort(rows.begin(), rows.end());
      std::vector<std::size_t> all(10);
      std::iota(all.begin(), all.end(), std::size_t{0});
      CHECK(rows == all);
    }
  }

  TEST_CASE("depth is one minus score; score_all ranks") {
    auto data = gen_cuevas105(1);
    auto config = cosine_config(100, 1);
    auto forest = FIForest::fit(data, config);
    const auto report = forest.score_all(data);
    std::vector<double> scores;
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& e = report.entries[i];
      CHECK(e.score == forest.score(data[i]));
      CHECK(e.depth == doctest::Approx(1.0 - e.score).epsilon(1e-15));
      CHECK(e.score > 0.0);
      CHECK(e.score <= 1.0);
      scores.push_back(e.score);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      for (std::size_t j = 0; j < data.size(); ++j) {
        if (scores[i] > scores[j]) CHECK(report.entries[i].rank < report.entries[j].rank);
      }
    }
  }

  TEST_CASE("rank ties follow row order") {
    const std::vector<double> s{0.5, 0.9, 0.5, 0.1};
    CHECK(rank_descending(s) == std::vector<std::size_t>{2, 1, 3, 4});
  }

  TEST_CASE("thread count does not change results") {
    auto data = gen_cuevas105(4);
    auto config = cosine_config(50, 9);
    config.threads = 1;
    auto one = FIForest::fit(data, config);
    config.threads = 8;
    auto many = FIForest::fit(data, config);
    const auto a = one.score_all(data, 1);
    const auto b = many.score_all(data, 8);
    for (std::size_t i = 0; i < data.size(); ++i) CHECK(a.entries[i].score == b.entries[i].score);
  }

  TEST_CASE("configuration errors") {
    auto data = noise_data(5, 10, 1);
    auto c = cosine_config(0, 1);
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.psi = 6;
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c.psi = 0;
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.height_limit = 0;
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.min_leaf_size = 0;
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.inner_products = {InnerProductSpec::l2(), InnerProductSpec::l2()};
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.inner_products = {InnerProductSpec{InnerProductKind::combined, 1.5}};
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
    c = cosine_config(10, 1);
    c.dictionary = DictionarySpec::of(DictionaryKind::sinus_cosine_2d);
    CHECK_THROWS_AS(FIForest::fit(data, c), ConfigError);
  }

  TEST_CASE("queries on another grid are rejected") {
    auto data = noise_data(8, 10, 1);
    auto forest = FIForest::fit(data, cosine_config(5, 1));
    Observation shorter{Curve(std::vector<double>(9, 0.0))};
    CHECK_THROWS_AS(forest.score(shorter), DataError);
    Observation two{Curve(std::vector<double>(10, 0.0)), Curve(std::vector<double>(10, 0.0))};
    CHECK_THROWS_AS(forest.score(two), DataError);
    auto other = noise_data(3, 11, 2);
    CHECK_THROWS_AS(forest.score_all(other), DataError);
  }

  TEST_CASE("depth map") {
    std::mt19937_64 rng(3);
    const auto grid = TimeGrid::uniform(30);
    // A class of 63 copies of one curve plus x: x is the only curve that can be split off.
    std::vector<Curve> same(63, Curve(testing::random_values(30, rng)));
    const Curve x(testing::random_values(30, rng, 5.0));
    same.push_back(x);
    auto lonely = FunctionalDataset::univariate(grid, same);
    auto spread = noise_data(64, 30, 4);

    auto c = cosine_config(100, 11);
    auto f1 = FIForest::fit(lonely, c);
    auto f2 = FIForest::fit(spread, c);
    const Observation query{x};

    const FIForest* one[] = {&f1};
    auto d1 = depth_map(one, query);
    REQUIRE(d1.size() == 1);
    CHECK(d1[0] == doctest::Approx(f1.depth(query)));

    const FIForest* both[] = {&f1, &f2};
    auto d = depth_map(both, query);
    REQUIRE(d.size() == 2);
    for (double v : d) {
      CHECK(v >= 0.0);
      CHECK(v < 1.0);
    }
    CHECK(d[0] < 0.25);  // isolated at the first useful split in almost every tree
    CHECK(d[0] < d[1]);

    CHECK_THROWS_AS(depth_map(std::span<const FIForest* const>{}, query), ConfigError);
    auto f3 = FIForest::fit(noise_data(10, 12, 1), c);
    const FIForest* mixed[] = {&f1, &f3};
    CHECK_THROWS_AS(depth_map(mixed, query), DataError);
  }

  TEST_CASE("importance on a hand-built tree") {
    const auto grid = TimeGrid::uniform(11);
    auto table = std::make_shared<const AtomTable>(AtomTable{indicator(grid, 0.0, 0.5), indicator(grid, 0.5, 1.0)});
    // Root of 5 isolates one curve with atom 0, then atom 1 halves the remaining 4.
    IsolationTree structure({
        IsolationNode{5, 0, 0, 0.0, 1, 2},
        IsolationNode{1, 1},
        IsolationNode{4, 1, 1, 0.0, 3, 4},
        IsolationNode{2, 2},
        IsolationNode{2, 2},
    });
    ForestConfig config;
    config.n_trees = 1;
    config.psi = 64;
    config.height_limit = 6;
    config.dictionary = DictionarySpec::dyadic(1);
    std::vector<FITree> trees;
    trees.emplace_back(structure, table, std::vector<std::size_t>{0, 1, 2, 3, 4});
    FIForest forest(config, grid, 1, 64, std::move(trees), table, nullptr);

    auto naive = direction_importance(forest, ImportanceMode::naive);
    REQUIRE(naive.size() == 2);
    CHECK(naive[0].importance == 1.0);
    CHECK(naive[1].importance == 0.0);
    auto adaptive = direction_importance(forest, ImportanceMode::adaptive);
    CHECK(adaptive[0].importance == doctest::Approx(5.0 / 64.0));
    CHECK(adaptive[1].importance == 0.0);
    CHECK(std::holds_alternative<IndicatorAtom>(adaptive[0].params));
  }

  TEST_CASE("importance needs nodes of at least three") {
    auto data = noise_data(2, 16, 1);
    auto config = cosine_config(20, 1);
    config.dictionary = DictionarySpec::dyadic(3);
    auto forest = FIForest::fit(data, config);
    for (auto mode : {ImportanceMode::naive, ImportanceMode::adaptive}) {
      for (const auto& a : direction_importance(forest, mode)) CHECK(a.importance == 0.0);
    }
  }

  TEST_CASE("importance totals match singleton splits") {
    auto data = gen_cuevas105(2);
    auto config = cosine_config(50, 5);
    config.dictionary = DictionarySpec::dyadic(4);
    auto forest = FIForest::fit(data, config);
    REQUIRE(forest.shared_atoms());
    CHECK(forest.shared_atoms()->size() == 30);
    double expected_naive = 0.0, expected_adaptive = 0.0;
    for (const auto& t : forest.trees()) {
      const auto nodes = t.structure().nodes();
      for (const auto& n : nodes) {
        if (n.is_leaf() || n.size < 3) continue;
        if (nodes[n.left].size == 1 || nodes[n.right].size == 1) {
          expected_naive += 1.0;
          expected_adaptive += static_cast<double>(n.size) / 105.0;
        }
      }
    }
    auto sum = [](const std::vector<AtomImportance>& v) {
      double s = 0.0;
      for (const auto& a : v) {
        CHECK(a.importance >= 0.0);
        s += a.importance;
      }
      return s;
    };
    CHECK(sum(direction_importance(forest, ImportanceMode::naive)) == doctest::Approx(expected_naive));
    CHECK(sum(direction_importance(forest, ImportanceMode::adaptive)) == doctest::Approx(expected_adaptive));
  }

  TEST_CASE("importance on self-data is keyed by training row") {
    auto data = noise_data(20, 16, 3);
    auto config = cosine_config(30, 2);
    config.dictionary = DictionarySpec::of(DictionaryKind::self_data);
    auto forest = FIForest::fit(data, config);
    auto imp = direction_importance(forest, ImportanceMode::naive);
    REQUIRE(imp.size() == 20);
    for (std::size_t i = 0; i < imp.size(); ++i) {
      CHECK(imp[i].atom_id == i);
      CHECK(std::get<SelfAtom>(imp[i].params).row == i);
    }
  }

  TEST_CASE("importance is undefined for a continuous dictionary") {
    auto data = noise_data(10, 16, 3);
    auto forest = FIForest::fit(data, cosine_config(5, 2));
    CHECK_THROWS_AS(direction_importance(forest, ImportanceMode::naive), ConfigError);
  }
}
