#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "fif/error.hpp"
#include "fif/eval.hpp"
#include "support.hpp"

using namespace fif;

namespace {

constexpr Label A = Label::anomaly;
constexpr Label N = Label::normal;

double pairwise_auc(const std::vector<double>& s, const std::vector<Label>& l) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (l[i] != A) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (l[j] != N) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

FunctionalDataset labelled_curves(std::vector<int> labels, std::uint64_t seed, std::size_t p = 20) {
  std::mt19937_64 rng(seed);
  std::vector<Curve> curves;
  for (std::size_t i = 0; i < labels.size(); ++i) curves.emplace_back(testing::random_values(p, rng));
  return FunctionalDataset::univariate(TimeGrid::uniform(p), std::move(curves), std::move(labels));
}

MethodSpec cosine_method(std::size_t trees = 50) {
  MethodSpec m;
  m.name = "cos";
  m.forest.n_trees = trees;
  m.forest.dictionary = DictionarySpec::of(DictionaryKind::cosine);
  m.forest.dictionary.size = 200;
  return m;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("auc examples") {
    CHECK(auc(std::vector<double>{.9, .8, .7, .1}, std::vector<Label>{A, N, A, N}) == 0.75);
    CHECK(auc(std::vector<double>{.9, .8, .2, .1}, std::vector<Label>{A, A, N, N}) == 1.0);
    CHECK(auc(std::vector<double>{.5, .5, .5, .5}, std::vector<Label>{A, N, A, N}) == 0.5);
    CHECK(auc(std::vector<double>{.1, .9}, std::vector<Label>{A, N}) == 0.0);
  }

  TEST_CASE("auc errors") {
    CHECK_THROWS_AS(auc(std::vector<double>{.1, .2}, std::vector<Label>{A, A}), DataError);
    CHECK_THROWS_AS(auc(std::vector<double>{.1, .2}, std::vector<Label>{N, N}), DataError);
    CHECK_THROWS_AS(auc(std::vector<double>{.1}, std::vector<Label>{A, N}), DataError);
    CHECK_THROWS_AS(auc(std::vector<double>{}, std::vector<Label>{}), DataError);
  }

  TEST_CASE("auc matches pair enumeration exactly") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 500; ++trial) {
      const std::size_t n = 2 + rng() % 49;
      std::vector<double> s(n);
      std::vector<Label> l(n);
      // Coarse values so ties are frequent.
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = static_cast<double>(rng() % 7) / 7.0;
        l[i] = rng() % 3 == 0 ? A : N;
      }
      l[0] = A;
      l[1] = N;
      CHECK(auc(s, l) == pairwise_auc(s, l));
    }
  }

  TEST_CASE("negating tie-free scores mirrors the auc") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 + rng() % 40;
      std::vector<double> s(n), neg(n);
      std::vector<Label> l(n);
      for (std::size_t i = 0; i < n; ++i) {
        s[i] = u(rng);
        neg[i] = -s[i];
        l[i] = rng() % 2 ? A : N;
      }
      l[0] = A;
      l[1] = N;
      CHECK(auc(s, l) + auc(neg, l) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("class filtering keeps the first anomalies in file order") {
    auto data = labelled_curves({1, 2, 2, 1, 3, 2, 1, 2}, 1);
    const std::vector<int> normal{1}, anomaly{2};
    auto part = filter_classes(data, normal, anomaly, 2);
    CHECK(part.data.size() == 5);
    CHECK(*part.data.labels() == std::vector<int>{1, 2, 2, 1, 1});
    CHECK(part.labels == std::vector<Label>{N, A, A, N, N});
    CHECK(part.data[1] == data[1]);
    CHECK(part.data[4] == data[6]);

    auto all = filter_classes(data, normal, std::vector<int>{2, 3});
    CHECK(all.data.size() == 8);

    CHECK_THROWS_AS(filter_classes(data, normal, normal), ConfigError);
    CHECK_THROWS_AS(filter_classes(data, std::vector<int>{}, anomaly), ConfigError);
    CHECK_THROWS_AS(filter_classes(data, std::vector<int>{9}, std::vector<int>{8}), DataError);
    auto unlabelled = FunctionalDataset::univariate(TimeGrid::uniform(3), {Curve({1, 2, 3})});
    CHECK_THROWS_AS(filter_classes(unlabelled, normal, anomaly), DataError);
  }

  TEST_CASE("presets") {
    REQUIRE(ucr_presets().size() == 13);
    auto ecg = ucr_preset("ecg5000");
    REQUIRE(ecg);
    CHECK(ecg->name == "ECG5000");
    CHECK(ecg->normal_labels == std::vector<int>{1});
    CHECK(ecg->anomaly_labels == std::vector<int>{3, 4, 5});
    auto torso = ucr_preset("CinCECGTorso");
    REQUIRE(torso);
    CHECK(torso->test_anomalies == 345);
    CHECK_FALSE(ucr_preset("NoSuchData"));
  }

  TEST_CASE("fit_and_score for every method") {
    auto train = labelled_curves(std::vector<int>(30, 1), 2);
    auto test = labelled_curves(std::vector<int>(10, 1), 3);
    for (auto kind : {MethodKind::fif, MethodKind::if_axis, MethodKind::if_extended}) {
      MethodSpec m = cosine_method(20);
      m.kind = kind;
      auto s = fit_and_score(m, train, test, 4, 1);
      CHECK(s.size() == 10);
      CHECK(s == fit_and_score(m, train, test, 4, 3));
      for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
      }
    }
    auto other = labelled_curves(std::vector<int>(5, 1), 3, 21);
    CHECK_THROWS_AS(fit_and_score(cosine_method(), train, other, 1), DataError);
  }

  TEST_CASE("anomalies that duplicate training normals give chance-level auc") {
    auto train = labelled_curves(std::vector<int>(80, 1), 5);
    // Test rows are training curves; half of them are labelled anomalies.
    std::vector<Curve> rows;
    std::vector<int> labels;
    for (std::size_t i = 0; i < 80; ++i) {
      rows.push_back(train[i][0]);
      labels.push_back(i % 2 ? 2 : 1);
    }
    auto test = FunctionalDataset::univariate(train.grid(), rows, labels);
    BenchmarkTask task;
    task.dataset = "dup";
    task.normal_labels = {1};
    task.anomaly_labels = {2};
    task.method = cosine_method();
    for (std::uint64_t s = 1; s <= 10; ++s) task.seeds.push_back(s);
    auto report = run_benchmark(task, train, test);
    CHECK(report.mean == doctest::Approx(0.5).epsilon(0.2));
  }

  TEST_CASE("benchmark report is recomputable and deterministic") {
    auto train = labelled_curves({1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2}, 8);
    std::vector<int> test_labels(40, 1);
    for (std::size_t i = 0; i < 40; i += 5) test_labels[i] = 2;
    auto test = labelled_curves(test_labels, 9);
    BenchmarkTask task;
    task.dataset = "toy";
    task.normal_labels = {1};
    task.anomaly_labels = {2};
    task.test_anomalies = 3;
    task.method = cosine_method();
    task.seeds = {3, 4, 5, 6};
    auto report = run_benchmark(task, train, test);
    REQUIRE(report.rows.size() == 4);
    double mean = 0.0;
    for (const auto& r : report.rows) mean += r.auc / 4.0;
    double ss = 0.0;
    for (const auto& r : report.rows) ss += (r.auc - mean) * (r.auc - mean);
    CHECK(report.mean == doctest::Approx(mean).epsilon(1e-14));
    CHECK(report.sd == doctest::Approx(std::sqrt(ss / 3.0)).epsilon(1e-12));

    auto again = run_benchmark(task, train, test);
    for (std::size_t i = 0; i < 4; ++i) CHECK(again.rows[i].auc == report.rows[i].auc);

    std::ostringstream csv;
    write_benchmark_csv(report.rows, csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "dataset,method,seed,auc");
    std::getline(lines, line);
    CHECK(line == "toy,cos,3," + format_number(report.rows[0].auc));

    std::ostringstream summary;
    const BenchmarkReport reports[] = {report};
    write_benchmark_summary_csv(reports, summary);
    CHECK(summary.str() == "dataset,method,seeds,mean_auc,sd_auc\ntoy,cos,4," + format_number(report.mean) + "," +
                               format_number(report.sd) + "\n");
    std::ostringstream table;
    write_benchmark_summary_table(reports, table);
    CHECK(table.str().find("toy") != std::string::npos);

    task.seeds.clear();
    CHECK_THROWS_AS(run_benchmark(task, train, test), ConfigError);
  }

  TEST_CASE("six significant digits") {
    CHECK(format_number(0.123456789) == "0.123457");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(1234567.0) == "1.23457e+06");
  }

  TEST_CASE("sweep axes") {
    CHECK(sweep_axis_from_string("N") == SweepAxis::n_trees);
    CHECK(sweep_axis_from_string("psi") == SweepAxis::psi);
    CHECK(sweep_axis_from_string("dictionary") == SweepAxis::dictionary);
    CHECK(to_string(SweepAxis::height_limit) == "height_limit");
    CHECK_THROWS_AS(sweep_axis_from_string("depth"), ConfigError);
  }

  TEST_CASE("sweep rows come in canonical order") {
    auto data = gen_brownian_dataset(40, 30, 1);
    const auto probes = brownian_probes(data.grid());
    ForestConfig base;
    base.dictionary = DictionarySpec::of(DictionaryKind::cosine);
    base.dictionary.size = 50;
    const std::vector<std::string> values{"1", "5", "20"};
    auto rows = run_stability_sweep(data, probes, base, SweepAxis::n_trees, values, 3, 7, 4);
    REQUIRE(rows.size() == 3 * 3 * probes.size());
    std::size_t k = 0;
    for (const auto& v : values) {
      for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t p = 0; p < probes.size(); ++p, ++k) {
          CHECK(rows[k].axis_value == v);
          CHECK(rows[k].repeat == r);
          CHECK(rows[k].probe == p);
        }
      }
    }
    auto serial = run_stability_sweep(data, probes, base, SweepAxis::n_trees, values, 3, 7, 1);
    for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].score == serial[i].score);

    std::ostringstream csv;
    write_sweep_csv(rows, csv);
    CHECK(csv.str().rfind("axis_value,repeat,probe_id,score\n1,0,0,", 0) == 0);
  }

  TEST_CASE("sweep over other axes") {
    auto data = gen_brownian_dataset(40, 30, 2);
    const auto probes = brownian_probes(data.grid());
    ForestConfig base;
    base.n_trees = 10;
    base.dictionary = DictionarySpec::of(DictionaryKind::cosine);
    base.dictionary.size = 50;
    const std::vector<std::string> psis{"8", "40"};
    CHECK(run_stability_sweep(data, probes, base, SweepAxis::psi, psis, 2, 1).size() == 16);
    const std::vector<std::string> sizes{"10", "100"};
    CHECK(run_stability_sweep(data, probes, base, SweepAxis::dict_size, sizes, 2, 1).size() == 16);
    const std::vector<std::string> dicts{"cosine", "dyadic"};
    CHECK(run_stability_sweep(data, probes, base, SweepAxis::dictionary, dicts, 1, 1).size() == 8);
    const std::vector<std::string> heights{"1", "3"};
    CHECK(run_stability_sweep(data, probes, base, SweepAxis::height_limit, heights, 1, 1).size() == 8);

    const std::vector<std::string> too_big{"41"};
    CHECK_THROWS_AS(run_stability_sweep(data, probes, base, SweepAxis::psi, too_big, 1, 1), ConfigError);
    CHECK_THROWS_AS(run_stability_sweep(data, probes, base, SweepAxis::psi, psis, 0, 1), ConfigError);
    std::vector<Observation> bad{Observation{Curve(std::vector<double>(29, 0.0))}};
    CHECK_THROWS_AS(run_stability_sweep(data, bad, base, SweepAxis::psi, psis, 1, 1), DataError);
  }
}
