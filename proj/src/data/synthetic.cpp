#include "share/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "share/numerics/rng.hpp"

namespace share {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Smooth daily bump between hours a and b, wrapped so the profile is periodic.
double daily_bump(double hour, double a, double b) {
  double total = 0.0;
  for (double shift : {-24.0, 0.0, 24.0}) {
    const double h = hour + shift;
    total += logistic(h - a) * logistic(b - h);
  }
  return total;
}

std::size_t labeled_count(std::size_t n, double fraction) {
  const auto count = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(count, 1, n);
}

std::vector<double> softmax(std::vector<double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

}  // namespace

void CitySpec::validate() const {
  if (num_lots < 2) throw Error("city spec: need at least 2 lots");
  if (!(box.width() > 0) || !(box.height() > 0)) throw Error("city spec: degenerate bounding box");
  if (!(grid_spacing > 0)) throw Error("city spec: grid spacing must be positive");
  if (capacity_min < 1 || capacity_max < capacity_min) throw Error("city spec: invalid capacity range");
  if (num_zones < 1) throw Error("city spec: need at least one zone");
  if (num_poi_categories < 1) throw Error("city spec: need at least one POI category");
  if (!(labeled_fraction > 0) || labeled_fraction > 1) throw Error("city spec: labeled fraction must be in (0, 1]");
  if (cluster_spread_km < 0) throw Error("city spec: cluster spread must be non-negative");
}

void SeriesSpec::validate() const {
  if (steps_per_day < 1) throw Error("series spec: steps per day must be positive");
  if (num_steps < 1) throw Error("series spec: need at least one step");
  if (noise_level < 0 || zone_volatility < 0 || population_noise < 0) throw Error("series spec: noise levels must be non-negative");
  if (noise_persistence < 0 || noise_persistence >= 1 || zone_persistence < 0 || zone_persistence >= 1) {
    throw Error("series spec: persistence must be in [0, 1)");
  }
  if (diffusion < 0 || diffusion > 1) throw Error("series spec: diffusion must be in [0, 1]");
  if (!(diffusion_radius_km > 0)) throw Error("series spec: diffusion radius must be positive");
}

std::vector<std::size_t> City::labeled_ids() const {
  std::vector<std::size_t> ids;
  for (const auto& lot : lots) {
    if (lot.labeled) ids.push_back(lot.id);
  }
  return ids;
}

double City::mean_capacity() const {
  double total = 0.0;
  for (const auto& lot : lots) total += lot.capacity;
  return total / static_cast<double>(lots.size());
}

int City::max_capacity() const {
  int mx = 1;
  for (const auto& lot : lots) mx = std::max(mx, lot.capacity);
  return mx;
}

double zone_occupancy(std::size_t zone, double hour) {
  switch (static_cast<ZoneKind>(zone % kNumZoneKinds)) {
    case ZoneKind::kBusiness: return 0.15 + 0.75 * daily_bump(hour, 8.5, 18.0);
    case ZoneKind::kResidential: return 0.85 - 0.6 * daily_bump(hour, 8.0, 18.5);
    case ZoneKind::kShopping: return 0.1 + 0.7 * daily_bump(hour, 11.0, 21.0);
    case ZoneKind::kRecreation: return 0.1 + 0.65 * daily_bump(hour, 16.5, 23.0);
  }
  return 0.5;
}

City assemble_city(const CitySpec& spec, std::vector<ParkingLot> lots,
                   std::vector<std::vector<double>> zones) {
  spec.validate();
  validate_lots(lots);
  if (lots.size() != spec.num_lots || zones.size() != lots.size()) {
    throw Error("city: lot records do not match the spec size");
  }
  for (const auto& z : zones) {
    if (z.size() != spec.num_zones) throw Error("city: zone mixture width does not match the spec");
  }

  City city;
  city.spec = spec;
  city.lots = std::move(lots);
  city.zones = std::move(zones);

  // Zone -> POI category profile, rows normalized, then scaled so entries are O(1).
  SplitMix64 poi_rng = SplitMix64::derive(spec.seed, 5);
  const std::size_t cats = spec.num_poi_categories;
  std::vector<std::vector<double>> profile(spec.num_zones, std::vector<double>(cats));
  for (auto& row : profile) {
    double total = 0.0;
    for (double& v : row) {
      const double u = poi_rng.uniform();
      v = u * u * u;
      total += v;
    }
    for (double& v : row) v *= static_cast<double>(cats) / (2.0 * total);
  }
  city.poi.assign(city.size(), std::vector<double>(cats, 0.0));
  for (std::size_t i = 0; i < city.size(); ++i) {
    SplitMix64 noise = SplitMix64::derive(spec.seed, 0x1000 + i);
    for (std::size_t c = 0; c < cats; ++c) {
      double v = 0.0;
      for (std::size_t z = 0; z < spec.num_zones; ++z) v += city.zones[i][z] * profile[z][c];
      city.poi[i][c] = std::max(0.0, v + spec.poi_noise * noise.normal());
    }
  }

  std::vector<Point> points;
  points.reserve(city.size());
  for (const auto& lot : city.lots) points.push_back(lot.position);
  city.network = std::make_shared<const RoadNetwork>(spec.box, spec.grid_spacing, points, spec.blocked_fraction,
                                                     SplitMix64::derive(spec.seed, 0x100).next());
  return city;
}

City generate_city(const CitySpec& spec) {
  spec.validate();
  const std::size_t n = spec.num_lots;
  const std::size_t clusters = spec.num_clusters ? spec.num_clusters : std::max<std::size_t>(2, n / 12);

  SplitMix64 layout = SplitMix64::derive(spec.seed, 1);
  const double margin = std::min({1.0, 0.15 * spec.box.width(), 0.15 * spec.box.height()});
  std::vector<Point> centers(clusters);
  for (auto& c : centers) {
    c.x = layout.uniform(spec.box.min_x + margin, spec.box.max_x - margin);
    c.y = layout.uniform(spec.box.min_y + margin, spec.box.max_y - margin);
  }

  SplitMix64 zone_rng = SplitMix64::derive(spec.seed, 2);
  SplitMix64 cap_rng = SplitMix64::derive(spec.seed, 3);
  std::vector<ParkingLot> lots(n);
  std::vector<std::vector<double>> zones(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t cluster = i % clusters;
    const Point& c = centers[cluster];
    ParkingLot& lot = lots[i];
    lot.id = i;
    lot.position.x = std::clamp(c.x + spec.cluster_spread_km * layout.normal(), spec.box.min_x, spec.box.max_x);
    lot.position.y = std::clamp(c.y + spec.cluster_spread_km * layout.normal(), spec.box.min_y, spec.box.max_y);
    lot.capacity = static_cast<int>(cap_rng.integer(spec.capacity_min, spec.capacity_max));

    std::vector<double> logits(spec.num_zones);
    for (std::size_t z = 0; z < spec.num_zones; ++z) {
      logits[z] = (z == cluster % spec.num_zones ? spec.zone_purity : 0.0) + 0.7 * zone_rng.normal();
    }
    zones[i] = softmax(std::move(logits));
  }

  // Partial Fisher-Yates: the first floor(fraction * N) shuffled ids carry sensors.
  SplitMix64 label_rng = SplitMix64::derive(spec.seed, 4);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n_labeled = labeled_count(n, spec.labeled_fraction);
  for (std::size_t i = 0; i < n_labeled; ++i) {
    const auto j = static_cast<std::size_t>(label_rng.integer(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n - 1)));
    std::swap(order[i], order[j]);
    lots[order[i]].labeled = true;
  }
  return assemble_city(spec, std::move(lots), std::move(zones));
}

Observations generate_observations(const City& city, const SeriesSpec& spec) {
  spec.validate();
  const std::size_t n = city.size();
  const std::size_t zones = city.spec.num_zones;
  const auto neighbors = build_context_graph(city.network->distances(), spec.diffusion_radius_km);

  SplitMix64 zone_rng = SplitMix64::derive(spec.seed, 11);
  SplitMix64 local_rng = SplitMix64::derive(spec.seed, 12);
  SplitMix64 pop_rng = SplitMix64::derive(spec.seed, 13);
  const double zone_innov = spec.zone_volatility * std::sqrt(1.0 - spec.zone_persistence * spec.zone_persistence);
  const double local_innov = spec.noise_level * std::sqrt(1.0 - spec.noise_persistence * spec.noise_persistence);

  std::vector<double> shock(zones);
  for (double& g : shock) g = spec.zone_volatility * zone_rng.normal();
  std::vector<double> local(n);
  for (double& v : local) v = spec.noise_level * local_rng.normal();

  Observations obs;
  obs.pa.assign(spec.num_steps, std::vector<int>(n));
  obs.population.assign(spec.num_steps, std::vector<double>(n));
  obs.local_noise.assign(spec.num_steps, std::vector<double>(n));
  std::vector<double> base(zones);
  for (std::size_t t = 0; t < spec.num_steps; ++t) {
    if (t > 0) {
      for (double& g : shock) g = spec.zone_persistence * g + zone_innov * zone_rng.normal();
      for (double& v : local) v = spec.noise_persistence * v + local_innov * local_rng.normal();
    }
    const double hour = 24.0 * static_cast<double>(t % spec.steps_per_day) / static_cast<double>(spec.steps_per_day);
    for (std::size_t z = 0; z < zones; ++z) base[z] = zone_occupancy(z, hour);

    for (std::size_t i = 0; i < n; ++i) {
      double spread = local[i];
      const std::size_t deg = neighbors->row_end(i) - neighbors->row_begin(i) - 1;
      if (spec.diffusion > 0 && deg > 0) {
        double around = 0.0;
        for (std::size_t e = neighbors->row_begin(i); e < neighbors->row_end(i); ++e) {
          if (neighbors->columns[e] != i) around += local[neighbors->columns[e]];
        }
        spread = (1.0 - spec.diffusion) * local[i] + spec.diffusion * around / static_cast<double>(deg);
      }
      obs.local_noise[t][i] = spread;

      double expected = 0.0;
      double occupancy = 0.0;
      for (std::size_t z = 0; z < zones; ++z) {
        expected += city.zones[i][z] * base[z];
        occupancy += city.zones[i][z] * (base[z] + shock[z]);
      }
      occupancy = std::clamp(occupancy + spread, 0.0, 1.0);
      const int cap = city.lots[i].capacity;
      obs.pa[t][i] = std::clamp(static_cast<int>(std::lround(cap * (1.0 - occupancy))), 0, cap);
      obs.population[t][i] = expected + spec.population_noise * pop_rng.normal();
    }
  }
  return obs;
}

Tensor step_features(const City& city, const Observations& obs, std::size_t step,
                     std::size_t steps_per_day) {
  const std::size_t n = city.size();
  const std::size_t cats = city.spec.num_poi_categories;
  const std::size_t width = city.spec.feature_width();
  const double phase = 2.0 * std::numbers::pi * static_cast<double>(step % steps_per_day) /
                       static_cast<double>(steps_per_day);
  const double max_cap = city.max_capacity();
  Tensor out(Shape{n, width});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < cats; ++c) out.at(i, c) = city.poi[i][c];
    out.at(i, cats) = city.lots[i].capacity / max_cap;
    out.at(i, cats + 1) = std::sin(phase);
    out.at(i, cats + 2) = std::cos(phase);
    out.at(i, cats + 3) = obs.population[step][i];
  }
  return out;
}

}  // namespace share
