#include "share/cli/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "share/data/synthetic.hpp"
#include "share/data/windows.hpp"
#include "share/numerics/optim.hpp"

namespace share {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& g : groups) w = std::max(w, g.max_relative);
  return w;
}

GradCheckReport run_grad_check(const GradCheckOptions& o) {
  CitySpec city_spec;
  city_spec.num_lots = o.num_lots;
  city_spec.box = {0.0, 0.0, 2.0, 2.0};
  city_spec.num_clusters = 2;
  city_spec.cluster_spread_km = 0.4;
  city_spec.labeled_fraction = 0.5;
  city_spec.seed = o.seed;
  SeriesSpec series_spec;
  series_spec.num_steps = 96;
  series_spec.seed = o.seed + 1;

  auto city = std::make_shared<const City>(generate_city(city_spec));
  auto obs = std::make_shared<const Observations>(generate_observations(*city, series_spec));

  ModelConfig config;
  config.variant = o.variant;
  config.window = o.window;
  config.hidden = o.hidden;
  config.latent_nodes = o.latent_nodes;
  config.pa_bins = o.pa_bins;
  const Dataset data(city, obs, config.window, config.horizon, SplitFractions{1.0, 0.0}, series_spec.steps_per_day);
  const ModelContext ctx = make_context(*city, config);
  // A window starting mid-morning, so occupancy is away from the clip bounds.
  const WindowSample sample = data.sample(36);

  ModelParams params = ModelParams::init(config, city->size(), city_spec.feature_width(), o.seed);
  const GradientResult analytic = loss_and_gradients(params, sample, ctx);

  GradCheckReport report;
  report.losses = analytic.losses;
  for (std::size_t i = 0; i < params.tensors().size(); ++i) {
    Tensor& tensor = params.tensors()[i].value;
    const std::vector<double> original(tensor.values().begin(), tensor.values().end());
    const ScalarFunction f = [&](std::span<const double> x) {
      std::copy(x.begin(), x.end(), tensor.values().begin());
      return loss_value(params, sample, ctx).total;
    };
    const std::vector<double> numeric = finite_difference_gradient(f, original, o.step);
    std::copy(original.begin(), original.end(), tensor.values().begin());

    const std::string group = param_group(params.tensors()[i].name);
    auto it = std::find_if(report.groups.begin(), report.groups.end(),
                           [&](const GroupError& g) { return g.group == group; });
    if (it == report.groups.end()) {
      report.groups.push_back({group, 0.0, 0.0, 0});
      it = report.groups.end() - 1;
    }
    const auto a = analytic.grads[i].values();
    it->max_relative = std::max(it->max_relative, max_relative_error(a, numeric));
    for (std::size_t k = 0; k < a.size(); ++k) it->max_absolute = std::max(it->max_absolute, std::abs(a[k] - numeric[k]));
    it->scalars += a.size();
  }
  return report;
}

}  // namespace share
