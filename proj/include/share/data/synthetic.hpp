#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "share/graph/city_graph.hpp"
#include "share/numerics/tensor.hpp"

namespace share {

/// Functional zones driving both POI mix and daily occupancy.
enum class ZoneKind { kBusiness = 0, kResidential = 1, kShopping = 2, kRecreation = 3 };
inline constexpr std::size_t kNumZoneKinds = 4;

struct CitySpec {
  std::size_t num_lots = 200;
  BoundingBox box{0.0, 0.0, 6.0, 6.0};
  double grid_spacing = 0.25;
  double blocked_fraction = 0.05;
  int capacity_min = 50;
  int capacity_max = 300;
  std::size_t num_zones = kNumZoneKinds;
  std::size_t num_poi_categories = 12;
  /// Lots are scattered around centers; each center has a dominant zone.
  std::size_t num_clusters = 0;  // 0: max(2, num_lots / 12)
  double cluster_spread_km = 0.5;
  double zone_purity = 2.5;  // logit boost of the dominant zone
  double poi_noise = 0.02;
  double labeled_fraction = 0.3;
  std::uint64_t seed = 1;

  /// Width M of the per-step feature vector.
  std::size_t feature_width() const { return num_poi_categories + 4; }
  void validate() const;
};

struct SeriesSpec {
  std::size_t num_steps = 30 * 96;
  std::size_t steps_per_day = 96;  // 15-minute resolution
  double noise_level = 0.08;       // stddev of per-lot occupancy noise
  double noise_persistence = 0.9;  // AR(1) coefficient per step
  double zone_volatility = 0.08;   // stddev of city-wide per-zone demand shocks
  double zone_persistence = 0.95;
  double diffusion = 0.5;          // share of local noise taken from context neighbors
  double diffusion_radius_km = 1.0;
  double population_noise = 0.05;
  std::uint64_t seed = 2;

  void validate() const;
};

struct City {
  CitySpec spec;
  std::vector<ParkingLot> lots;
  std::vector<std::vector<double>> zones;  // N x Z, rows on the simplex
  std::vector<std::vector<double>> poi;    // N x num_poi_categories
  std::shared_ptr<const RoadNetwork> network;

  std::size_t size() const { return lots.size(); }
  std::vector<std::size_t> labeled_ids() const;
  double mean_capacity() const;
  int max_capacity() const;
};

struct Observations {
  std::vector<std::vector<int>> pa;             // steps x N vacant spots
  std::vector<std::vector<double>> population;  // steps x N
  /// Occupancy noise (zone shocks excluded) before clipping, steps x N.
  std::vector<std::vector<double>> local_noise;

  std::size_t num_steps() const { return pa.size(); }
};

/// Mean daily occupancy fraction of a zone kind at hour-of-day `hour` in [0, 24).
double zone_occupancy(std::size_t zone, double hour);

City generate_city(const CitySpec& spec);
/// Rebuilds the derived parts of a city (POI features, road network) from the
/// spec and the per-lot records, as stored in a city file.
City assemble_city(const CitySpec& spec, std::vector<ParkingLot> lots,
                   std::vector<std::vector<double>> zones);

Observations generate_observations(const City& city, const SeriesSpec& spec);

/// Per-step feature matrix N x M: POI mix, capacity / max capacity,
/// sin and cos of time of day, population signal.
Tensor step_features(const City& city, const Observations& obs, std::size_t step,
                     std::size_t steps_per_day);

}  // namespace share
