#include "share/model/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "share/numerics/rng.hpp"

namespace share {

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 4> kVariantNames{{
    {Variant::kShare, "SHARE"},
    {Variant::kCagnn, "CAGNN"},
    {Variant::kCxtgnn, "CxtGNN"},
    {Variant::kGruOnly, "GRU-only"},
}};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (const auto& [k, name] : kVariantNames) {
    if (k == v) return name;
  }
  return "unknown";
}

Variant variant_from_name(std::string_view name) {
  for (const auto& [k, n] : kVariantNames) {
    if (lower(n) == lower(name)) return k;
  }
  if (lower(name) == "gru") return Variant::kGruOnly;
  throw Error("unknown variant '" + std::string(name) + "'");
}

std::size_t latent_count(const ModelConfig& config, std::size_t num_lots) {
  if (config.latent_nodes) return config.latent_nodes;
  const auto k = static_cast<std::size_t>(std::lround(config.latent_ratio * static_cast<double>(num_lots)));
  return std::max<std::size_t>(1, k);
}

std::string param_group(std::string_view name) {
  return std::string(name.substr(0, name.find('.')));
}

std::size_t ModelParams::gru_input_width() const {
  const std::size_t d = config_.hidden;
  switch (config_.variant) {
    case Variant::kShare: return d + d + config_.pa_bins;
    case Variant::kCagnn: return d + config_.pa_bins;
    case Variant::kCxtgnn: return d;
    case Variant::kGruOnly: return num_features_;
  }
  return 0;
}

void ModelParams::add(std::string name, Shape shape) {
  tensors_.push_back(NamedTensor{std::move(name), Tensor(std::move(shape))});
}

ModelParams ModelParams::shaped(const ModelConfig& config, std::size_t num_lots,
                                std::size_t num_features) {
  if (num_lots < 1 || num_features < 1) throw Error("model: need at least one lot and one feature");
  if (config.window < 1 || config.horizon < 1 || config.hidden < 1 || config.pa_bins < 1) {
    throw Error("model: T, tau, hidden width and bin count must be positive");
  }
  if (config.uses_cxtconv() && config.cxt_layers < 1) throw Error("model: need at least one CxtConv layer");
  ModelParams p;
  p.config_ = config;
  p.num_lots_ = num_lots;
  p.num_features_ = num_features;
  p.latent_ = config.uses_scconv() ? latent_count(config, num_lots) : 0;
  const std::size_t d = config.hidden;
  if (config.uses_cxtconv()) {
    for (std::size_t l = 0; l < config.cxt_layers; ++l) {
      const std::size_t in = l == 0 ? num_features : d;
      p.add("cxtconv." + std::to_string(l) + ".W_a", {in, d});
      p.add("cxtconv." + std::to_string(l) + ".W_c", {in, d});
    }
  }
  if (config.uses_scconv()) {
    p.add("scconv.W_s", {d + config.pa_bins, p.latent_});
    p.add("scconv.W_l", {d + config.pa_bins, d});
  }
  if (config.uses_pa()) p.add("propconv.W_a", {num_features, d});
  const std::size_t gate_in = d + p.gru_input_width();
  p.add("gru.W_r", {gate_in, d});
  p.add("gru.W_z", {gate_in, d});
  p.add("gru.W_h", {gate_in, d});
  p.add("gru.b_r", {d});
  p.add("gru.b_z", {d});
  p.add("gru.b_h", {d});
  p.add("output.W_o", {d, config.horizon});
  if (config.uses_pa()) p.add("temporal_pa.W_tp", {d, config.pa_bins});
  return p;
}

ModelParams ModelParams::init(const ModelConfig& config, std::size_t num_lots,
                              std::size_t num_features, std::uint64_t seed) {
  ModelParams p = shaped(config, num_lots, num_features);
  SplitMix64 rng = SplitMix64::derive(seed, 0x494e4954);  // "INIT"
  for (auto& [name, t] : p.tensors_) {
    if (t.rank() != 2) continue;  // biases stay zero
    const double bound = std::sqrt(6.0 / static_cast<double>(t.dim(0) + t.dim(1)));
    for (double& v : t.values()) v = rng.uniform(-bound, bound);
  }
  return p;
}

const Tensor& ModelParams::get(std::string_view name) const {
  for (const auto& t : tensors_) {
    if (t.name == name) return t.value;
  }
  throw Error("model: no parameter named '" + std::string(name) + "'");
}

Tensor& ModelParams::get(std::string_view name) {
  return const_cast<Tensor&>(std::as_const(*this).get(name));
}

std::vector<Tensor*> ModelParams::pointers() {
  std::vector<Tensor*> out;
  out.reserve(tensors_.size());
  for (auto& t : tensors_) out.push_back(&t.value);
  return out;
}

std::size_t ModelParams::num_scalars() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.value.size();
  return n;
}

BoundModel bind(Tape& tape, const ModelParams& params, bool requires_grad) {
  BoundModel m;
  auto take = [&](std::string_view name) {
    Tensor t = params.get(name);
    t.set_requires_grad(requires_grad);
    return tape.leaf(std::move(t));
  };
  const ModelConfig& c = params.config();
  if (c.uses_cxtconv()) {
    for (std::size_t l = 0; l < c.cxt_layers; ++l) {
      const std::string prefix = "cxtconv." + std::to_string(l);
      m.cxt.push_back(CxtConvWeights{take(prefix + ".W_a"), take(prefix + ".W_c")});
    }
  }
  if (c.uses_scconv()) {
    m.assignment = take("scconv.W_s");
    m.latent = take("scconv.W_l");
  }
  if (c.uses_pa()) m.prop_attention = take("propconv.W_a");
  m.gru = GruWeights{take("gru.W_r"), take("gru.W_z"), take("gru.W_h"),
                     take("gru.b_r"), take("gru.b_z"), take("gru.b_h")};
  m.output = take("output.W_o");
  if (c.uses_pa()) m.temporal_pa = take("temporal_pa.W_tp");

  // Same order as params.tensors().
  for (const auto& cw : m.cxt) {
    m.all.push_back(cw.attention);
    m.all.push_back(cw.transform);
  }
  if (c.uses_scconv()) {
    m.all.push_back(m.assignment);
    m.all.push_back(m.latent);
  }
  if (c.uses_pa()) m.all.push_back(m.prop_attention);
  for (Var v : {m.gru.reset, m.gru.update, m.gru.candidate, m.gru.reset_bias, m.gru.update_bias,
                m.gru.candidate_bias}) {
    m.all.push_back(v);
  }
  m.all.push_back(m.output);
  if (c.uses_pa()) m.all.push_back(m.temporal_pa);
  return m;
}

ModelContext make_context(const City& city, const ModelConfig& config) {
  ModelContext ctx;
  ctx.graph = build_city_graph(city.lots, city.network->distances(), config.epsilon_km, config.knn);
  ctx.capacity.reserve(city.size());
  for (const auto& lot : city.lots) ctx.capacity.push_back(lot.capacity);
  ctx.labeled = std::make_shared<const std::vector<std::size_t>>(city.labeled_ids());
  ctx.binning.bins = config.pa_bins;
  ctx.binning.rule = config.binning;
  ctx.binning.absolute_scale = city.max_capacity();
  ctx.unlabeled_mask = Tensor(Shape{city.size(), 1}, 0.0);
  for (const auto& lot : city.lots) ctx.unlabeled_mask[lot.id] = lot.labeled ? 0.0 : 1.0;
  return ctx;
}

namespace {

// N x p one-hot rows for labeled lots at one step; other rows stay zero.
Tensor observed_one_hots(const std::vector<int>& observed, const ModelContext& ctx) {
  const std::size_t p = ctx.binning.bins;
  Tensor out(Shape{ctx.num_lots(), p}, 0.0);
  const auto& labeled = *ctx.labeled;
  if (observed.size() != labeled.size()) throw ShapeError("forward: observed PA width does not match labeled lots");
  for (std::size_t k = 0; k < labeled.size(); ++k) {
    const std::size_t id = labeled[k];
    out.at(id, ctx.binning.bin(observed[k], ctx.capacity[id])) = 1.0;
  }
  return out;
}

}  // namespace

ForwardResult forward_window(Tape& tape, const BoundModel& model, const ModelParams& params,
                             const WindowSample& sample, const ModelContext& ctx, Variant variant) {
  const ModelConfig& c = params.config();
  if (variant != c.variant) {
    throw Error("forward: parameters were built for " + std::string(variant_name(c.variant)) +
                ", not " + std::string(variant_name(variant)));
  }
  const std::size_t n = ctx.num_lots();
  if (params.num_lots() != n) throw ShapeError("forward: parameters expect " + std::to_string(params.num_lots()) + " lots, city has " + std::to_string(n));
  if (sample.features.size() != c.window || sample.observed_pa.size() != c.window) {
    throw ShapeError("forward: window has " + std::to_string(sample.features.size()) + " steps, model expects T=" + std::to_string(c.window));
  }
  if (sample.targets.size() != c.horizon) throw ShapeError("forward: window horizon does not match tau");
  if (ctx.binning.bins != c.pa_bins) throw Error("forward: context binning does not match p");

  ForwardResult out;
  Var h = tape.constant(Tensor(Shape{n, c.hidden}, 0.0));
  const Var unlabeled = c.uses_pa() ? tape.constant(ctx.unlabeled_mask) : Var{};
  for (std::size_t t = 0; t < c.window; ++t) {
    const Tensor& xt = sample.features[t];
    if (xt.rank() != 2 || xt.dim(0) != n || xt.dim(1) != params.num_features()) {
      throw ShapeError("forward: features " + shape_to_string(xt.shape()) + " do not match model");
    }
    const Var raw = tape.constant(xt);
    if (c.variant == Variant::kGruOnly) {
      h = gru_cell(model.gru, h, raw);
      continue;
    }

    Var xc = raw;
    for (const auto& layer : model.cxt) xc = cxtconv_layer(layer, xc, ctx.graph.context, c.slope);
    std::vector<Var> parts{xc};

    if (c.uses_pa()) {
      const Var observed = tape.constant(observed_one_hots(sample.observed_pa[t], ctx));
      const Var spatial = propconv(model.prop_attention, raw, observed, ctx.graph.propagation.aggregation);
      const Var temporal = temporal_pa_distribution(model.temporal_pa, h);
      out.spatial_pa.push_back(spatial);
      out.temporal_pa.push_back(temporal);
      // Lots with sensors use their observed one-hot instead of the estimate.
      const Var xp = add(observed, mul(fuse(spatial, temporal), unlabeled));

      if (c.uses_scconv()) {
        const Var sc_in = concat(xc, xp);
        const Var s = soft_assignment(model.assignment, sc_in);
        const LatentPool pool = latent_pool(s, sc_in, ctx.graph.context);
        parts.push_back(scconv_unpool(model.latent, pool, s, c.slope, c.latent_scaling));
      }
      parts.push_back(xp);
    }
    h = gru_cell(model.gru, h, parts.size() == 1 ? parts.front() : concat(parts));
  }
  out.predictions = predict_head(model.output, h);
  return out;
}

Losses compute_losses(Tape& tape, const ForwardResult& forward, const WindowSample& sample,
                      const ModelContext& ctx, double beta, bool ce_all_steps) {
  const auto& labeled = *ctx.labeled;
  if (labeled.empty()) throw Error("losses: no labeled lot in sample");
  const std::size_t horizon = sample.targets.size();
  const auto n_labeled = static_cast<double>(labeled.size());

  Tensor target(Shape{labeled.size(), horizon});
  for (std::size_t k = 0; k < labeled.size(); ++k) {
    const std::size_t id = labeled[k];
    if (!sample.target_mask[id]) throw Error("losses: labeled lot without a valid target");
    for (std::size_t j = 0; j < horizon; ++j) {
      target.at(k, j) = static_cast<double>(sample.targets[j][id]) / ctx.capacity[id];
    }
  }
  const Var err = sub(gather_rows(forward.predictions, ctx.labeled), tape.constant(std::move(target)));
  Losses l;
  l.o1 = mean(mul(err, err));

  if (forward.spatial_pa.empty()) {
    l.o2 = tape.constant(Tensor::scalar(0.0));
    l.o3 = tape.constant(Tensor::scalar(0.0));
    l.total = l.o1;
    return l;
  }

  const std::size_t steps = forward.spatial_pa.size();
  const std::size_t first = ce_all_steps ? 0 : steps - 1;
  const double weight = -1.0 / (n_labeled * static_cast<double>(steps - first));
  auto cross_entropy = [&](const std::vector<Var>& dists) {
    std::vector<Var> terms;
    for (std::size_t t = first; t < steps; ++t) {
      Tensor y(Shape{labeled.size(), ctx.binning.bins}, 0.0);
      for (std::size_t k = 0; k < labeled.size(); ++k) {
        const std::size_t id = labeled[k];
        y.at(k, ctx.binning.bin(sample.observed_pa[t][k], ctx.capacity[id])) = 1.0;
      }
      const Var picked = gather_rows(dists[t], ctx.labeled);
      terms.push_back(sum(mul(tape.constant(std::move(y)), log(picked))));
    }
    Var total = terms.front();
    for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
    return scale(total, weight);
  };
  l.o2 = cross_entropy(forward.spatial_pa);
  l.o3 = cross_entropy(forward.temporal_pa);
  l.total = add(l.o1, scale(add(l.o2, l.o3), beta));
  return l;
}

namespace {

LossValues values_of(const Losses& l) {
  return LossValues{l.o1.value().item(), l.o2.value().item(), l.o3.value().item(),
                    l.total.value().item()};
}

}  // namespace

GradientResult loss_and_gradients(const ModelParams& params, const WindowSample& sample,
                                  const ModelContext& ctx) {
  Tape tape;
  const BoundModel model = bind(tape, params, true);
  const ForwardResult fwd = forward_window(tape, model, params, sample, ctx, params.config().variant);
  const Losses losses = compute_losses(tape, fwd, sample, ctx, params.config().beta, params.config().ce_all_steps);
  tape.backward(losses.total);

  GradientResult out;
  out.losses = values_of(losses);
  out.grads.reserve(model.all.size());
  for (std::size_t i = 0; i < model.all.size(); ++i) {
    out.grads.emplace_back(params.tensors()[i].value.shape(), tape.grad(model.all[i]));
  }
  out.predictions = fwd.predictions.value();
  return out;
}

LossValues loss_value(const ModelParams& params, const WindowSample& sample, const ModelContext& ctx) {
  Tape tape;
  const BoundModel model = bind(tape, params, false);
  const ForwardResult fwd = forward_window(tape, model, params, sample, ctx, params.config().variant);
  return values_of(compute_losses(tape, fwd, sample, ctx, params.config().beta, params.config().ce_all_steps));
}

Tensor predict(const ModelParams& params, const WindowSample& sample, const ModelContext& ctx) {
  Tape tape;
  const BoundModel model = bind(tape, params, false);
  Tensor out = forward_window(tape, model, params, sample, ctx, params.config().variant).predictions.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    for (std::size_t j = 0; j < out.cols(); ++j) out.at(i, j) *= ctx.capacity[i];
  }
  return out;
}

}  // namespace share
