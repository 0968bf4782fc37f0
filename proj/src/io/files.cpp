#include "share/io/files.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace share {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_in(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_number(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw IoError("malformed number '" + t + "' for " + std::string(what));
  }
  return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw IoError("malformed integer '" + t + "' for " + std::string(what));
  }
  return v;
}

// KeyValueFile ------------------------------------------------------------------

KeyValueFile KeyValueFile::parse(std::istream& in, std::string_view origin) {
  KeyValueFile kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos || trim(body.substr(0, eq)).empty()) {
      throw IoError(std::string(origin) + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    kv.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  auto in = open_in(path);
  return parse(in, path);
}

void KeyValueFile::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

void KeyValueFile::save(const std::string& path) const {
  auto out = open_out(path);
  write(out);
  finish(out, path);
}

bool KeyValueFile::has(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return true;
  }
  return false;
}

const std::string& KeyValueFile::get(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.first == key) return e.second;
  }
  throw IoError("missing key '" + std::string(key) + "'");
}

std::string KeyValueFile::get_or(std::string_view key, std::string fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValueFile::number(std::string_view key) const { return parse_number(get(key), key); }

double KeyValueFile::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long long KeyValueFile::integer(std::string_view key) const { return parse_integer(get(key), key); }

long long KeyValueFile::integer_or(std::string_view key, long long fallback) const {
  return has(key) ? integer(key) : fallback;
}

void KeyValueFile::set(std::string key, std::string value) {
  for (auto& e : entries_) {
    if (e.first == key) {
      e.second = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

void KeyValueFile::merge(const KeyValueFile& other) {
  for (const auto& [k, v] : other.entries_) set(k, v);
}

// City / series --------------------------------------------------------------------

void write_city_specs(KeyValueFile& kv, const CitySpec& c, const SeriesSpec& s) {
  kv.set_integer("city.num_lots", static_cast<long long>(c.num_lots));
  kv.set_number("city.box_min_x", c.box.min_x);
  kv.set_number("city.box_min_y", c.box.min_y);
  kv.set_number("city.box_max_x", c.box.max_x);
  kv.set_number("city.box_max_y", c.box.max_y);
  kv.set_number("city.grid_spacing", c.grid_spacing);
  kv.set_number("city.blocked_fraction", c.blocked_fraction);
  kv.set_integer("city.capacity_min", c.capacity_min);
  kv.set_integer("city.capacity_max", c.capacity_max);
  kv.set_integer("city.num_zones", static_cast<long long>(c.num_zones));
  kv.set_integer("city.num_poi_categories", static_cast<long long>(c.num_poi_categories));
  kv.set_integer("city.num_clusters", static_cast<long long>(c.num_clusters));
  kv.set_number("city.cluster_spread_km", c.cluster_spread_km);
  kv.set_number("city.zone_purity", c.zone_purity);
  kv.set_number("city.poi_noise", c.poi_noise);
  kv.set_number("city.labeled_fraction", c.labeled_fraction);
  kv.set("city.seed", std::to_string(c.seed));
  kv.set_integer("series.num_steps", static_cast<long long>(s.num_steps));
  kv.set_integer("series.steps_per_day", static_cast<long long>(s.steps_per_day));
  kv.set_number("series.noise_level", s.noise_level);
  kv.set_number("series.noise_persistence", s.noise_persistence);
  kv.set_number("series.zone_volatility", s.zone_volatility);
  kv.set_number("series.zone_persistence", s.zone_persistence);
  kv.set_number("series.diffusion", s.diffusion);
  kv.set_number("series.diffusion_radius_km", s.diffusion_radius_km);
  kv.set_number("series.population_noise", s.population_noise);
  kv.set("series.seed", std::to_string(s.seed));
}

namespace {

std::uint64_t parse_seed(const std::string& text, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw IoError("malformed seed '" + text + "' for " + std::string(what));
  }
  return v;
}

}  // namespace

CitySpec read_city_spec(const KeyValueFile& kv) {
  CitySpec c;
  c.num_lots = static_cast<std::size_t>(kv.integer_or("city.num_lots", static_cast<long long>(c.num_lots)));
  c.box.min_x = kv.number_or("city.box_min_x", c.box.min_x);
  c.box.min_y = kv.number_or("city.box_min_y", c.box.min_y);
  c.box.max_x = kv.number_or("city.box_max_x", c.box.max_x);
  c.box.max_y = kv.number_or("city.box_max_y", c.box.max_y);
  c.grid_spacing = kv.number_or("city.grid_spacing", c.grid_spacing);
  c.blocked_fraction = kv.number_or("city.blocked_fraction", c.blocked_fraction);
  c.capacity_min = static_cast<int>(kv.integer_or("city.capacity_min", c.capacity_min));
  c.capacity_max = static_cast<int>(kv.integer_or("city.capacity_max", c.capacity_max));
  c.num_zones = static_cast<std::size_t>(kv.integer_or("city.num_zones", static_cast<long long>(c.num_zones)));
  c.num_poi_categories = static_cast<std::size_t>(kv.integer_or("city.num_poi_categories", static_cast<long long>(c.num_poi_categories)));
  c.num_clusters = static_cast<std::size_t>(kv.integer_or("city.num_clusters", static_cast<long long>(c.num_clusters)));
  c.cluster_spread_km = kv.number_or("city.cluster_spread_km", c.cluster_spread_km);
  c.zone_purity = kv.number_or("city.zone_purity", c.zone_purity);
  c.poi_noise = kv.number_or("city.poi_noise", c.poi_noise);
  c.labeled_fraction = kv.number_or("city.labeled_fraction", c.labeled_fraction);
  if (kv.has("city.seed")) c.seed = parse_seed(kv.get("city.seed"), "city.seed");
  c.validate();
  return c;
}

SeriesSpec read_series_spec(const KeyValueFile& kv) {
  SeriesSpec s;
  s.num_steps = static_cast<std::size_t>(kv.integer_or("series.num_steps", static_cast<long long>(s.num_steps)));
  s.steps_per_day = static_cast<std::size_t>(kv.integer_or("series.steps_per_day", static_cast<long long>(s.steps_per_day)));
  s.noise_level = kv.number_or("series.noise_level", s.noise_level);
  s.noise_persistence = kv.number_or("series.noise_persistence", s.noise_persistence);
  s.zone_volatility = kv.number_or("series.zone_volatility", s.zone_volatility);
  s.zone_persistence = kv.number_or("series.zone_persistence", s.zone_persistence);
  s.diffusion = kv.number_or("series.diffusion", s.diffusion);
  s.diffusion_radius_km = kv.number_or("series.diffusion_radius_km", s.diffusion_radius_km);
  s.population_noise = kv.number_or("series.population_noise", s.population_noise);
  if (kv.has("series.seed")) s.seed = parse_seed(kv.get("series.seed"), "series.seed");
  s.validate();
  return s;
}

void write_city_csv(const std::string& path, const City& city) {
  auto out = open_out(path);
  out << "id,x_km,y_km,capacity,labeled";
  for (std::size_t z = 0; z < city.spec.num_zones; ++z) out << ",zone_" << z;
  out << '\n';
  for (const auto& lot : city.lots) {
    out << lot.id << ',' << format_number(lot.position.x) << ',' << format_number(lot.position.y) << ','
        << lot.capacity << ',' << (lot.labeled ? 1 : 0);
    for (double w : city.zones[lot.id]) out << ',' << format_number(w);
    out << '\n';
  }
  finish(out, path);
}

City read_city_csv(const std::string& path, const CitySpec& spec) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw IoError(path + ": empty city file");
  const auto header = split_csv(line);
  const std::size_t width = 5 + spec.num_zones;
  if (header.size() != width || header[0] != "id") throw IoError(path + ": unexpected city header");
  std::vector<ParkingLot> lots;
  std::vector<std::vector<double>> zones;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != width) throw IoError(where + ": expected " + std::to_string(width) + " fields");
    ParkingLot lot;
    lot.id = static_cast<std::size_t>(parse_integer(f[0], where + " id"));
    lot.position = {parse_number(f[1], where + " x_km"), parse_number(f[2], where + " y_km")};
    lot.capacity = static_cast<int>(parse_integer(f[3], where + " capacity"));
    lot.labeled = parse_integer(f[4], where + " labeled") != 0;
    std::vector<double> z;
    for (std::size_t k = 5; k < width; ++k) z.push_back(parse_number(f[k], where + " zone"));
    lots.push_back(lot);
    zones.push_back(std::move(z));
  }
  return assemble_city(spec, std::move(lots), std::move(zones));
}

void write_series_csv(const std::string& path, const Observations& obs) {
  auto out = open_out(path);
  out << "step,lot,pa,population\n";
  for (std::size_t t = 0; t < obs.num_steps(); ++t) {
    for (std::size_t i = 0; i < obs.pa[t].size(); ++i) {
      out << t << ',' << i << ',' << obs.pa[t][i] << ',' << format_number(obs.population[t][i]) << '\n';
    }
  }
  finish(out, path);
}

Observations read_series_csv(const std::string& path, std::size_t num_lots) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || split_csv(line) != std::vector<std::string>{"step", "lot", "pa", "population"}) {
    throw IoError(path + ": unexpected series header");
  }
  Observations obs;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto f = split_csv(line);
    const std::string where = path + ":" + std::to_string(lineno);
    if (f.size() != 4) throw IoError(where + ": expected 4 fields");
    const auto step = static_cast<std::size_t>(parse_integer(f[0], where + " step"));
    const auto lot = static_cast<std::size_t>(parse_integer(f[1], where + " lot"));
    if (lot >= num_lots) throw IoError(where + ": lot id out of range");
    if (step >= obs.pa.size()) {
      if (step != obs.pa.size()) throw IoError(where + ": steps must appear in order");
      obs.pa.emplace_back(num_lots, -1);
      obs.population.emplace_back(num_lots, 0.0);
    }
    obs.pa[step][lot] = static_cast<int>(parse_integer(f[2], where + " pa"));
    obs.population[step][lot] = parse_number(f[3], where + " population");
  }
  for (const auto& row : obs.pa) {
    for (int v : row) {
      if (v < 0) throw IoError(path + ": missing or negative PA record");
    }
  }
  return obs;
}

// Checkpoints --------------------------------------------------------------------------

void write_model_config(KeyValueFile& kv, const ModelConfig& c) {
  kv.set("model.variant", std::string(variant_name(c.variant)));
  kv.set_integer("model.window", static_cast<long long>(c.window));
  kv.set_integer("model.horizon", static_cast<long long>(c.horizon));
  kv.set_integer("model.hidden", static_cast<long long>(c.hidden));
  kv.set_integer("model.pa_bins", static_cast<long long>(c.pa_bins));
  kv.set_number("model.latent_ratio", c.latent_ratio);
  kv.set_integer("model.latent_nodes", static_cast<long long>(c.latent_nodes));
  kv.set_integer("model.cxt_layers", static_cast<long long>(c.cxt_layers));
  kv.set_number("model.epsilon_km", c.epsilon_km);
  kv.set_integer("model.knn", static_cast<long long>(c.knn));
  kv.set_number("model.beta", c.beta);
  kv.set_number("model.slope", c.slope);
  kv.set_integer("model.ce_all_steps", c.ce_all_steps ? 1 : 0);
  kv.set("model.binning", c.binning == BinningRule::kAbsolute ? "absolute" : "capacity");
  kv.set("model.latent_scaling", c.latent_scaling == LatentScaling::kRaw ? "raw" : "mean");
}

ModelConfig read_model_config(const KeyValueFile& kv) {
  ModelConfig c;
  c.variant = variant_from_name(kv.get_or("model.variant", std::string(variant_name(c.variant))));
  c.window = static_cast<std::size_t>(kv.integer_or("model.window", static_cast<long long>(c.window)));
  c.horizon = static_cast<std::size_t>(kv.integer_or("model.horizon", static_cast<long long>(c.horizon)));
  c.hidden = static_cast<std::size_t>(kv.integer_or("model.hidden", static_cast<long long>(c.hidden)));
  c.pa_bins = static_cast<std::size_t>(kv.integer_or("model.pa_bins", static_cast<long long>(c.pa_bins)));
  c.latent_ratio = kv.number_or("model.latent_ratio", c.latent_ratio);
  c.latent_nodes = static_cast<std::size_t>(kv.integer_or("model.latent_nodes", static_cast<long long>(c.latent_nodes)));
  c.cxt_layers = static_cast<std::size_t>(kv.integer_or("model.cxt_layers", static_cast<long long>(c.cxt_layers)));
  c.epsilon_km = kv.number_or("model.epsilon_km", c.epsilon_km);
  c.knn = static_cast<std::size_t>(kv.integer_or("model.knn", static_cast<long long>(c.knn)));
  c.beta = kv.number_or("model.beta", c.beta);
  c.slope = kv.number_or("model.slope", c.slope);
  c.ce_all_steps = kv.integer_or("model.ce_all_steps", 0) != 0;
  const std::string binning = kv.get_or("model.binning", "capacity");
  if (binning == "absolute") {
    c.binning = BinningRule::kAbsolute;
  } else if (binning == "capacity") {
    c.binning = BinningRule::kCapacityRelative;
  } else {
    throw IoError("unknown binning rule '" + binning + "'");
  }
  const std::string scaling = kv.get_or("model.latent_scaling", "mean");
  if (scaling == "raw") {
    c.latent_scaling = LatentScaling::kRaw;
  } else if (scaling == "mean") {
    c.latent_scaling = LatentScaling::kMean;
  } else {
    throw IoError("unknown latent scaling '" + scaling + "'");
  }
  return c;
}

namespace {

constexpr char kMagic[8] = {'S', 'H', 'A', 'R', 'E', 'P', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in, const std::string& path) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  std::array<unsigned char, sizeof(U)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) throw IoError(path + ": truncated parameter file");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_params_binary(const std::string& path, const ModelParams& params) {
  auto out = open_out(path, std::ios::binary);
  out.write(kMagic, sizeof(kMagic));
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors().size()));
  for (const auto& [name, t] : params.tensors()) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (auto d : t.shape()) put_le<std::uint64_t>(out, d);
    for (double v : t.values()) put_le<double>(out, v);
  }
  finish(out, path);
}

void read_params_binary(const std::string& path, ModelParams& params) {
  auto in = open_in(path, std::ios::binary);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError(path + ": not a parameter file");
  }
  if (get_le<std::uint32_t>(in, path) != kVersion) throw IoError(path + ": unsupported version");
  const auto sections = get_le<std::uint32_t>(in, path);
  if (sections != params.tensors().size()) throw IoError(path + ": section count does not match the model");
  for (auto& [name, t] : params.tensors()) {
    const auto len = get_le<std::uint32_t>(in, path);
    std::string stored(len, '\0');
    if (!in.read(stored.data(), len)) throw IoError(path + ": truncated section name");
    if (stored != name) throw IoError(path + ": expected section '" + name + "', found '" + stored + "'");
    const auto rank = get_le<std::uint32_t>(in, path);
    Shape shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get_le<std::uint64_t>(in, path));
    if (shape != t.shape()) {
      throw IoError(path + ": section '" + name + "' has shape " + shape_to_string(shape) +
                    ", model expects " + shape_to_string(t.shape()));
    }
    for (double& v : t.values()) v = get_le<double>(in, path);
  }
}

void save_checkpoint(const std::string& stem, const ModelParams& params, std::uint64_t seed,
                     const KeyValueFile& provenance) {
  KeyValueFile kv;
  kv.set("format", "share-checkpoint-1");
  kv.set("params_file", stem.substr(stem.find_last_of('/') + 1) + ".bin");
  write_model_config(kv, params.config());
  kv.set_integer("model.num_lots", static_cast<long long>(params.num_lots()));
  kv.set_integer("model.num_features", static_cast<long long>(params.num_features()));
  kv.set("model.seed", std::to_string(seed));
  for (const auto& [name, t] : params.tensors()) kv.set("shape." + name, shape_to_string(t.shape()));
  for (const auto& [k, v] : provenance.entries()) {
    if (!kv.has(k)) kv.set(k, v);
  }
  write_params_binary(stem + ".bin", params);
  kv.save(stem + ".manifest");
}

ModelParams load_checkpoint(const std::string& stem, KeyValueFile* manifest) {
  KeyValueFile kv = KeyValueFile::load(stem + ".manifest");
  if (kv.get_or("format", "") != "share-checkpoint-1") throw IoError(stem + ".manifest: not a checkpoint manifest");
  const ModelConfig config = read_model_config(kv);
  ModelParams params = ModelParams::shaped(config, static_cast<std::size_t>(kv.integer("model.num_lots")),
                                           static_cast<std::size_t>(kv.integer("model.num_features")));
  read_params_binary(stem + ".bin", params);
  if (manifest) *manifest = std::move(kv);
  return params;
}

// Reports ---------------------------------------------------------------------------------

namespace {

constexpr std::array<std::string_view, kNumLotClasses> kClassNames{"labeled", "unlabeled", "all"};

}  // namespace

void write_metrics_log(std::ostream& out, const TrainResult& result) {
  out << "epoch,split,horizon,lot_class,mae,rmse,o1,o2,o3\n";
  for (const auto& r : result.history) {
    out << r.epoch << ",train,all,labeled," << format_number(r.train_labeled.mae()) << ','
        << format_number(r.train_labeled.rmse()) << ',' << format_number(r.train.o1) << ','
        << format_number(r.train.o2) << ',' << format_number(r.train.o3) << '\n';
    if (!r.has_validation) continue;
    const auto& v = r.validation;
    for (std::size_t h = 0; h <= v.horizons.size(); ++h) {
      for (std::size_t c = 0; c < kNumLotClasses; ++c) {
        const ErrorStats s = h < v.horizons.size() ? v.horizons[h][c] : v.overall(static_cast<LotClass>(c));
        out << r.epoch << ",validation," << (h < v.horizons.size() ? std::to_string(h + 1) : "all") << ','
            << kClassNames[c] << ',' << format_number(s.mae()) << ',' << format_number(s.rmse()) << ','
            << format_number(v.losses.o1) << ',' << format_number(v.losses.o2) << ','
            << format_number(v.losses.o3) << '\n';
      }
    }
  }
}

void write_eval_csv(std::ostream& out, const EvalReport& report) {
  out << "horizon,lot_class,mae,rmse,count\n";
  for (std::size_t h = 0; h <= report.horizons.size(); ++h) {
    for (std::size_t c = 0; c < kNumLotClasses; ++c) {
      const ErrorStats s = h < report.horizons.size() ? report.horizons[h][c] : report.overall(static_cast<LotClass>(c));
      out << (h < report.horizons.size() ? std::to_string(h + 1) : "all") << ',' << kClassNames[c] << ','
          << format_number(s.mae()) << ',' << format_number(s.rmse()) << ',' << s.count << '\n';
    }
  }
}

void print_eval_table(std::ostream& out, const EvalReport& report, std::string_view title) {
  const std::size_t horizons = report.horizons.size();
  out << title << '\n';
  out << std::left << std::setw(12) << "lots";
  for (std::size_t h = 0; h < horizons; ++h) {
    out << std::right << std::setw(10) << ("MAE+" + std::to_string(h + 1)) << std::setw(10)
        << ("RMSE+" + std::to_string(h + 1));
  }
  out << '\n';
  for (std::size_t c = 0; c < kNumLotClasses; ++c) {
    out << std::left << std::setw(12) << kClassNames[c];
    for (std::size_t h = 0; h < horizons; ++h) {
      const auto& s = report.horizons[h][c];
      out << std::right << std::fixed << std::setprecision(3) << std::setw(10) << s.mae()
          << std::setw(10) << s.rmse();
    }
    out << '\n';
  }
  out.unsetf(std::ios::fixed);
}

}  // namespace share
