#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "share/data/synthetic.hpp"
#include "share/data/windows.hpp"

using namespace share;

namespace {

SeriesSpec quiet_series(std::size_t steps) {
  SeriesSpec s;
  s.num_steps = steps;
  s.noise_level = 0.0;
  s.zone_volatility = 0.0;
  s.population_noise = 0.0;
  return s;
}

std::shared_ptr<const City> small_city(std::size_t n, std::uint64_t seed = 1) {
  CitySpec spec;
  spec.num_lots = n;
  spec.box = {0.0, 0.0, 3.0, 3.0};
  spec.seed = seed;
  return std::make_shared<const City>(generate_city(spec));
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i] / n;
    mb += b[i] / n;
  }
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(City, LotsInsideBox) {
  CitySpec spec;
  spec.num_lots = 50;
  const City city = generate_city(spec);
  ASSERT_EQ(city.size(), 50u);
  for (const auto& lot : city.lots) {
    EXPECT_TRUE(spec.box.contains(lot.position));
    EXPECT_GE(lot.capacity, spec.capacity_min);
    EXPECT_LE(lot.capacity, spec.capacity_max);
  }
  for (const auto& z : city.zones) {
    double total = 0.0;
    for (double w : z) {
      EXPECT_GE(w, 0.0);
      total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(City, SameSeedSameCity) {
  const auto a = small_city(40, 9);
  const auto b = small_city(40, 9);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(a->lots[i].position.x, b->lots[i].position.x);
    EXPECT_EQ(a->lots[i].capacity, b->lots[i].capacity);
    EXPECT_EQ(a->lots[i].labeled, b->lots[i].labeled);
    EXPECT_EQ(a->zones[i], b->zones[i]);
    EXPECT_EQ(a->poi[i], b->poi[i]);
    for (std::size_t j = 0; j < 40; ++j) EXPECT_EQ(a->network->distance(i, j), b->network->distance(i, j));
  }
  const auto c = small_city(40, 10);
  EXPECT_NE(a->lots[0].position.x, c->lots[0].position.x);
}

TEST(City, LabeledCountIsFloorOfFraction) {
  CitySpec spec;
  spec.num_lots = 100;
  spec.labeled_fraction = 0.3;
  EXPECT_EQ(generate_city(spec).labeled_ids().size(), 30u);
  spec.num_lots = 7;
  spec.labeled_fraction = 0.5;
  EXPECT_EQ(generate_city(spec).labeled_ids().size(), 3u);
}

TEST(City, InvalidSpecsThrow) {
  CitySpec spec;
  spec.box = {0.0, 0.0, 0.0, 2.0};
  EXPECT_THROW(generate_city(spec), Error);
  spec = CitySpec{};
  spec.labeled_fraction = 0.0;
  EXPECT_THROW(generate_city(spec), Error);
  spec = CitySpec{};
  spec.num_lots = 1;
  EXPECT_THROW(generate_city(spec), Error);
}

TEST(Series, NoiselessSingleZoneLotIsDailyPeriodic) {
  CitySpec spec;
  spec.num_lots = 3;
  spec.box = {0.0, 0.0, 2.0, 2.0};
  std::vector<ParkingLot> lots(3);
  std::vector<std::vector<double>> zones(3, std::vector<double>(kNumZoneKinds, 0.0));
  for (std::size_t i = 0; i < 3; ++i) {
    lots[i].id = i;
    lots[i].position = {0.5 * static_cast<double>(i) + 0.2, 0.7};
    lots[i].capacity = 120;
    lots[i].labeled = i == 0;
    zones[i][i] = 1.0;
  }
  const City city = assemble_city(spec, lots, zones);
  const Observations obs = generate_observations(city, quiet_series(3 * 96));
  for (std::size_t t = 0; t + 96 < obs.num_steps(); ++t) {
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(obs.pa[t][i], obs.pa[t + 96][i]);
  }
  bool varies = false;
  for (std::size_t t = 1; t < 96; ++t) varies |= obs.pa[t][0] != obs.pa[0][0];
  EXPECT_TRUE(varies);
}

TEST(Series, TwinLotsHaveIdenticalNoiselessSeries) {
  CitySpec spec;
  spec.num_lots = 2;
  spec.box = {0.0, 0.0, 2.0, 2.0};
  std::vector<ParkingLot> lots(2);
  for (std::size_t i = 0; i < 2; ++i) {
    lots[i].id = i;
    lots[i].position = {1.0, 1.0};
    lots[i].capacity = 80;
  }
  lots[0].labeled = true;
  const std::vector<std::vector<double>> zones(2, std::vector<double>{0.4, 0.3, 0.2, 0.1});
  const City city = assemble_city(spec, lots, zones);
  const Observations obs = generate_observations(city, quiet_series(200));
  for (std::size_t t = 0; t < 200; ++t) EXPECT_EQ(obs.pa[t][0], obs.pa[t][1]);
}

TEST(Series, WithoutDiffusionNeighborsAreUncorrelated) {
  const auto city = small_city(30, 3);
  SeriesSpec spec;
  spec.num_steps = 2000;
  spec.diffusion = 0.0;
  spec.noise_persistence = 0.5;
  const Observations obs = generate_observations(*city, spec);
  const auto graph = build_context_graph(city->network->distances(), 1.0);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < city->size(); ++i) {
    for (std::size_t e = graph->row_begin(i); e < graph->row_end(i); ++e) {
      const std::size_t j = graph->columns[e];
      if (j <= i) continue;
      std::vector<double> a, b;
      for (std::size_t t = 0; t < obs.num_steps(); ++t) {
        a.push_back(obs.local_noise[t][i]);
        b.push_back(obs.local_noise[t][j]);
      }
      EXPECT_LT(std::abs(correlation(a, b)), 0.1) << i << "," << j;
      ++pairs;
    }
  }
  EXPECT_GT(pairs, 0u);
}

TEST(Series, DiffusionCorrelatesNeighbors) {
  const auto city = small_city(30, 3);
  SeriesSpec spec;
  spec.num_steps = 2000;
  spec.diffusion = 0.8;
  const Observations obs = generate_observations(*city, spec);
  const auto graph = build_context_graph(city->network->distances(), 1.0);
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < city->size(); ++i) {
    for (std::size_t e = graph->row_begin(i); e < graph->row_end(i); ++e) {
      const std::size_t j = graph->columns[e];
      if (j <= i) continue;
      std::vector<double> a, b;
      for (std::size_t t = 0; t < obs.num_steps(); ++t) {
        a.push_back(obs.local_noise[t][i]);
        b.push_back(obs.local_noise[t][j]);
      }
      total += correlation(a, b);
      ++pairs;
    }
  }
  EXPECT_GT(total / static_cast<double>(pairs), 0.3);
}

TEST(Series, IntegerPaWithinCapacity) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto city = small_city(25, seed);
    SeriesSpec spec;
    spec.num_steps = 500;
    spec.noise_level = 0.3;
    spec.zone_volatility = 0.3;
    spec.seed = seed;
    const Observations obs = generate_observations(*city, spec);
    for (const auto& row : obs.pa) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        EXPECT_GE(row[i], 0);
        EXPECT_LE(row[i], city->lots[i].capacity);
      }
    }
  }
}

TEST(Series, SameSeedBitIdentical) {
  const auto city = small_city(20, 4);
  SeriesSpec spec;
  spec.num_steps = 300;
  const Observations a = generate_observations(*city, spec);
  const Observations b = generate_observations(*city, spec);
  EXPECT_EQ(a.pa, b.pa);
  EXPECT_EQ(a.population, b.population);
}

TEST(Windows, CountFormula) {
  EXPECT_EQ(window_count(20, 12, 3), 6u);
  EXPECT_EQ(window_count(14, 12, 3), 0u);
  EXPECT_EQ(window_count(15, 12, 3), 1u);
}

TEST(Windows, SingleSplitOfTwentySteps) {
  const auto city = small_city(5);
  const auto obs = std::make_shared<const Observations>(generate_observations(*city, quiet_series(20)));
  const Dataset d(city, obs, 12, 3, SplitFractions{1.0, 0.0}, 96);
  EXPECT_EQ(d.train().starts.size(), 6u);
  EXPECT_TRUE(d.validation().starts.empty());
  EXPECT_TRUE(d.test().starts.empty());
}

TEST(Windows, NoWindowCrossesSplitBoundary) {
  const auto city = small_city(5);
  const auto obs = std::make_shared<const Observations>(generate_observations(*city, quiet_series(100)));
  const Dataset d(city, obs, 12, 3, SplitFractions{0.6, 0.2}, 96);
  EXPECT_EQ(d.train().end, 60u);
  for (std::size_t s : d.train().starts) EXPECT_LT(s + 12 + 3 - 1, 60u);
  for (const Split* split : {&d.train(), &d.validation(), &d.test()}) {
    for (std::size_t s : split->starts) {
      EXPECT_GE(s, split->begin);
      EXPECT_LE(s + 15, split->end);
    }
  }
}

TEST(Windows, ChronologicalSplitCounts) {
  const auto city = small_city(5);
  const auto obs = std::make_shared<const Observations>(generate_observations(*city, quiet_series(1000)));
  const Dataset d = make_windows(city, obs, 12, 3);
  // Splits of 600, 200 and 200 steps, each holding length - T - tau + 1 windows.
  EXPECT_EQ(d.train().starts.size(), 586u);
  EXPECT_EQ(d.validation().starts.size(), 186u);
  EXPECT_EQ(d.test().starts.size(), 186u);
  // Target steps of each split cover its interior after the first T steps.
  for (const Split* split : {&d.train(), &d.validation(), &d.test()}) {
    std::set<std::size_t> covered;
    for (std::size_t s : split->starts) {
      for (std::size_t j = 0; j < 3; ++j) covered.insert(s + 12 + j);
    }
    EXPECT_EQ(covered.size(), split->end - split->begin - 12);
    EXPECT_EQ(*covered.begin(), split->begin + 12);
    EXPECT_EQ(*covered.rbegin(), split->end - 1);
  }
}

TEST(Windows, SampleCarriesLabeledObservationsAndFullTruth) {
  const auto city = small_city(10);
  const auto obs = std::make_shared<const Observations>(generate_observations(*city, quiet_series(60)));
  const Dataset d(city, obs, 4, 2, SplitFractions{1.0, 0.0}, 96);
  const WindowSample s = d.sample(7);
  const auto labeled = city->labeled_ids();
  ASSERT_EQ(s.features.size(), 4u);
  ASSERT_EQ(s.observed_pa.size(), 4u);
  ASSERT_EQ(s.targets.size(), 2u);
  for (std::size_t t = 0; t < 4; ++t) {
    ASSERT_EQ(s.observed_pa[t].size(), labeled.size());
    for (std::size_t k = 0; k < labeled.size(); ++k) EXPECT_EQ(s.observed_pa[t][k], obs->pa[7 + t][labeled[k]]);
  }
  EXPECT_EQ(s.targets[1], obs->pa[12]);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(s.target_mask[i], city->lots[i].labeled);
  EXPECT_EQ(s.features[0].shape(), (Shape{10, city->spec.feature_width()}));
}

TEST(Windows, TooShortSeriesThrows) {
  const auto city = small_city(5);
  const auto obs = std::make_shared<const Observations>(generate_observations(*city, quiet_series(10)));
  EXPECT_THROW(make_windows(city, obs, 12, 3), Error);
}
