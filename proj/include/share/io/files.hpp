#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "share/data/synthetic.hpp"
#include "share/model/model.hpp"
#include "share/model/training.hpp"

namespace share {

class IoError : public Error {
 public:
  using Error::Error;
};

/// Shortest decimal form that round-trips; always '.' as separator.
std::string format_number(double v);
double parse_number(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);

/// Flat `key = value` text with '#' comments. Keys keep insertion order.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::istream& in, std::string_view origin = "<stream>");
  static KeyValueFile load(const std::string& path);
  void save(const std::string& path) const;
  void write(std::ostream& out) const;

  bool has(std::string_view key) const;
  const std::string& get(std::string_view key) const;
  std::string get_or(std::string_view key, std::string fallback) const;
  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  long long integer(std::string_view key) const;
  long long integer_or(std::string_view key, long long fallback) const;

  void set(std::string key, std::string value);
  void set_number(std::string key, double value) { set(std::move(key), format_number(value)); }
  void set_integer(std::string key, long long value) { set(std::move(key), std::to_string(value)); }
  /// Copies every entry of `other`, overriding existing keys.
  void merge(const KeyValueFile& other);

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// City / series files ------------------------------------------------------

void write_city_specs(KeyValueFile& kv, const CitySpec& city, const SeriesSpec& series);
CitySpec read_city_spec(const KeyValueFile& kv);
SeriesSpec read_series_spec(const KeyValueFile& kv);

/// id,x_km,y_km,capacity,labeled,zone_0..zone_{Z-1}
void write_city_csv(const std::string& path, const City& city);
City read_city_csv(const std::string& path, const CitySpec& spec);

/// step,lot,pa,population
void write_series_csv(const std::string& path, const Observations& obs);
Observations read_series_csv(const std::string& path, std::size_t num_lots);

// Checkpoints -----------------------------------------------------------------

void write_model_config(KeyValueFile& kv, const ModelConfig& config);
ModelConfig read_model_config(const KeyValueFile& kv);

/// Binary parameter file, all integers and doubles little-endian:
///   "SHAREPRM" | u32 version=1 | u32 sections
///   per section: u32 name_len | name bytes | u32 rank | u64 dims[rank] | f64 values
void write_params_binary(const std::string& path, const ModelParams& params);
/// Fills `params` in place; every section name and shape must match.
void read_params_binary(const std::string& path, ModelParams& params);

/// Writes `<stem>.manifest` (hyperparameters, shapes, seed, extra provenance)
/// and `<stem>.bin`.
void save_checkpoint(const std::string& stem, const ModelParams& params, std::uint64_t seed,
                     const KeyValueFile& provenance);
ModelParams load_checkpoint(const std::string& stem, KeyValueFile* manifest = nullptr);

// Reports ---------------------------------------------------------------------

/// epoch,split,horizon,lot_class,mae,rmse,o1,o2,o3
void write_metrics_log(std::ostream& out, const TrainResult& result);
void write_eval_csv(std::ostream& out, const EvalReport& report);
/// Human-readable MAE/RMSE table: rows per lot class, columns per horizon.
void print_eval_table(std::ostream& out, const EvalReport& report, std::string_view title);

}  // namespace share
