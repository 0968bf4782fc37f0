#include "share/cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include "share/cli/grad_check.hpp"
#include "share/cli/run_config.hpp"
#include "share/data/synthetic.hpp"
#include "share/data/windows.hpp"
#include "share/io/files.hpp"

namespace share {

namespace {

namespace fs = std::filesystem;

constexpr double kGradTolerance = 1e-4;

struct LoadedData {
  KeyValueFile manifest;
  SeriesSpec series;
  std::shared_ptr<const City> city;
  std::shared_ptr<const Observations> obs;
};

LoadedData load_data(const std::string& dir) {
  LoadedData d;
  d.manifest = KeyValueFile::load((fs::path(dir) / "manifest.txt").string());
  const CitySpec city_spec = read_city_spec(d.manifest);
  d.series = read_series_spec(d.manifest);
  d.city = std::make_shared<const City>(read_city_csv((fs::path(dir) / "city.csv").string(), city_spec));
  d.obs = std::make_shared<const Observations>(read_series_csv((fs::path(dir) / "series.csv").string(), d.city->size()));
  if (d.obs->num_steps() != d.series.num_steps) throw IoError(dir + ": series length does not match the manifest");
  return d;
}

Dataset make_dataset(const LoadedData& d, const RunConfig& rc) {
  return Dataset(d.city, d.obs, rc.model.window, rc.model.horizon, rc.split, d.series.steps_per_day);
}

const Split& pick_split(const Dataset& data, const std::string& name) {
  if (name == "train") return data.train();
  if (name == "validation") return data.validation();
  if (name == "test") return data.test();
  throw Error("unknown split '" + name + "' (expected train, validation or test)");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("failed writing '" + path + "'");
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

// Layered settings: config file, then --set entries, then dedicated flags.
struct Settings {
  std::string config_path;
  std::vector<std::string> assignments;
  std::vector<std::pair<CLI::Option*, std::string>> flags;
  std::vector<std::unique_ptr<std::string>> storage;

  void add_common(CLI::App* app) {
    app->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    app->add_option("--set", assignments, "override any config key, as key=value");
  }

  void add_flag(CLI::App* app, std::string_view flag, std::string_view key, std::string_view help) {
    storage.push_back(std::make_unique<std::string>());
    flags.emplace_back(app->add_option(std::string(flag), *storage.back(), std::string(help)), std::string(key));
  }

  KeyValueFile compose() const {
    KeyValueFile kv;
    if (!config_path.empty()) kv = KeyValueFile::load(config_path);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos || eq == 0) throw IoError("--set expects key=value, got '" + a + "'");
      kv.set(a.substr(0, eq), a.substr(eq + 1));
    }
    for (std::size_t i = 0; i < flags.size(); ++i) {
      if (flags[i].first->count() > 0) kv.set(flags[i].second, *storage[i]);
    }
    return kv;
  }
};

void add_run_flags(CLI::App* app, Settings& s) {
  s.add_common(app);
  for (const auto& k : run_config_keys()) s.add_flag(app, k.flag, k.key, k.help);
}

// gen-data ------------------------------------------------------------------------

int cmd_gen_data(const Settings& s, const std::string& out_dir, std::ostream& out) {
  KeyValueFile kv = s.compose();
  for (const auto& [key, value] : kv.entries()) {
    if (key.rfind("city.", 0) != 0 && key.rfind("series.", 0) != 0) {
      throw IoError("gen-data: unknown key '" + key + "'");
    }
  }
  // The series seed follows the city seed unless given.
  if (kv.has("city.seed") && !kv.has("series.seed")) {
    kv.set("series.seed", std::to_string(parse_integer(kv.get("city.seed"), "city.seed") + 1));
  }
  const CitySpec city_spec = read_city_spec(kv);
  const SeriesSpec series_spec = read_series_spec(kv);
  const City city = generate_city(city_spec);
  const Observations obs = generate_observations(city, series_spec);

  fs::create_directories(out_dir);
  KeyValueFile manifest;
  manifest.set("format", "share-data-1");
  write_city_specs(manifest, city_spec, series_spec);
  manifest.set_integer("city.num_labeled", static_cast<long long>(city.labeled_ids().size()));
  write_city_csv((fs::path(out_dir) / "city.csv").string(), city);
  write_series_csv((fs::path(out_dir) / "series.csv").string(), obs);
  manifest.save((fs::path(out_dir) / "manifest.txt").string());
  out << "wrote " << city.size() << " lots (" << city.labeled_ids().size() << " labeled), "
      << obs.num_steps() << " steps to " << out_dir << '\n';
  return 0;
}

// train ---------------------------------------------------------------------------------

void print_epoch(std::ostream& out, const EpochRecord& r) {
  out << "epoch " << r.epoch << "  train O=" << format_number(r.train.total) << " O1=" << format_number(r.train.o1);
  if (r.has_validation) {
    out << "  validation O1=" << format_number(r.validation.losses.o1)
        << " MAE(unlabeled)=" << format_number(r.validation.overall(LotClass::kUnlabeled).mae());
  }
  out << '\n';
}

int cmd_train(const Settings& s, const std::string& data_dir, const std::string& stem, bool quiet,
              std::ostream& out) {
  const KeyValueFile kv = s.compose();
  const RunConfig rc = read_run_config(kv);
  const LoadedData d = load_data(data_dir);
  const Dataset data = make_dataset(d, rc);
  const ModelContext ctx = make_context(*d.city, rc.model);
  ModelParams params = ModelParams::init(rc.model, d.city->size(), d.city->spec.feature_width(), rc.seed);

  const TrainResult result = train(params, data, ctx, rc.train, [&](const EpochRecord& r) {
    if (!quiet) print_epoch(out, r);
  });

  ensure_parent(stem);
  KeyValueFile provenance;
  write_run_config(provenance, rc);
  provenance.set("data.dir", data_dir);
  provenance.merge(d.manifest);
  provenance.set("format", "share-checkpoint-1");
  provenance.set_integer("train.best_epoch", static_cast<long long>(result.best_epoch));
  provenance.set_integer("train.epochs_run", static_cast<long long>(result.history.size()));
  provenance.set_number("train.best_validation_o1", result.best_score);
  std::ostringstream metrics;
  write_metrics_log(metrics, result);
  write_text(stem + ".metrics.csv", metrics.str());
  save_checkpoint(stem, params, rc.seed, provenance);
  out << "trained " << variant_name(rc.model.variant) << " for " << result.history.size() << " epochs (best "
      << result.best_epoch << "); wrote " << stem << ".manifest, " << stem << ".bin, " << stem << ".metrics.csv\n";
  return 0;
}

// evaluate / predict ------------------------------------------------------------------------

struct LoadedModel {
  ModelParams params;
  RunConfig rc;
};

LoadedModel load_model(const std::string& stem, const Settings& s) {
  KeyValueFile manifest;
  ModelParams params = load_checkpoint(stem, &manifest);
  // Split and stride come from the checkpoint unless overridden.
  KeyValueFile kv;
  for (const auto& k : run_config_keys()) {
    if (manifest.has(k.key)) kv.set(std::string(k.key), manifest.get(k.key));
  }
  kv.merge(s.compose());
  RunConfig rc = read_run_config(kv);
  rc.model = params.config();
  return {std::move(params), rc};
}

void check_fits(const ModelParams& params, const City& city) {
  if (params.num_lots() != city.size() || params.num_features() != city.spec.feature_width()) {
    throw Error("checkpoint expects " + std::to_string(params.num_lots()) + " lots and " +
                std::to_string(params.num_features()) + " features; data has " + std::to_string(city.size()) +
                " and " + std::to_string(city.spec.feature_width()));
  }
}

int cmd_evaluate(const Settings& s, const std::string& stem, const std::string& data_dir,
                 const std::string& split_name, std::string csv_path, std::ostream& out) {
  const LoadedModel m = load_model(stem, s);
  const LoadedData d = load_data(data_dir);
  check_fits(m.params, *d.city);
  const Dataset data = make_dataset(d, m.rc);
  const ModelContext ctx = make_context(*d.city, m.rc.model);
  const EvalReport report = evaluate(m.params, data, pick_split(data, split_name), ctx, m.rc.eval_stride);
  print_eval_table(out, report,
                   std::string(variant_name(m.rc.model.variant)) + " on " + split_name + " (" +
                       std::to_string(report.windows) + " windows)");
  if (csv_path.empty()) csv_path = stem + "." + split_name + ".eval.csv";
  std::ostringstream csv;
  write_eval_csv(csv, report);
  ensure_parent(csv_path);
  write_text(csv_path, csv.str());
  out << "wrote " << csv_path << '\n';
  return 0;
}

int cmd_predict(const Settings& s, const std::string& stem, const std::string& data_dir,
                std::optional<std::size_t> start, const std::string& out_path, std::ostream& out) {
  const LoadedModel m = load_model(stem, s);
  const LoadedData d = load_data(data_dir);
  check_fits(m.params, *d.city);
  const Dataset data = make_dataset(d, m.rc);
  const ModelContext ctx = make_context(*d.city, m.rc.model);
  const std::size_t span = m.rc.model.window + m.rc.model.horizon;
  const std::size_t last = d.obs->num_steps() - span;
  const std::size_t first = start.value_or(last);
  if (first > last) throw Error("predict: --start must be at most " + std::to_string(last));
  const WindowSample sample = data.sample(first);
  const Tensor forecast = predict(m.params, sample, ctx);

  std::ostringstream csv;
  csv << "lot,labeled,horizon,step,predicted_pa,capacity\n";
  for (const auto& lot : d.city->lots) {
    for (std::size_t h = 0; h < m.rc.model.horizon; ++h) {
      csv << lot.id << ',' << (lot.labeled ? 1 : 0) << ',' << h + 1 << ',' << first + m.rc.model.window + h << ','
          << format_number(forecast.at(lot.id, h)) << ',' << lot.capacity << '\n';
    }
  }
  if (out_path.empty() || out_path == "-") {
    out << csv.str();
  } else {
    ensure_parent(out_path);
    write_text(out_path, csv.str());
    out << "wrote " << out_path << '\n';
  }
  return 0;
}

// grad-check ------------------------------------------------------------------------------------

int cmd_grad_check(const GradCheckOptions& options, const std::string& csv_path, std::ostream& out) {
  const GradCheckReport report = run_grad_check(options);
  out << "gradient check: " << options.num_lots << " lots, T=" << options.window << ", d=" << options.hidden
      << ", K=" << options.latent_nodes << ", p=" << options.pa_bins << ", O=" << format_number(report.losses.total)
      << '\n';
  out << std::left << std::setw(14) << "group" << std::right << std::setw(10) << "scalars" << std::setw(16)
      << "max rel err" << std::setw(16) << "max abs err" << '\n';
  std::ostringstream csv;
  csv << "group,scalars,max_relative_error,max_absolute_error\n";
  for (const auto& g : report.groups) {
    out << std::left << std::setw(14) << g.group << std::right << std::setw(10) << g.scalars << std::setw(16)
        << std::scientific << std::setprecision(3) << g.max_relative << std::setw(16) << g.max_absolute
        << std::defaultfloat << '\n';
    csv << g.group << ',' << g.scalars << ',' << format_number(g.max_relative) << ','
        << format_number(g.max_absolute) << '\n';
  }
  if (!csv_path.empty()) {
    ensure_parent(csv_path);
    write_text(csv_path, csv.str());
  }
  const bool ok = report.worst() < kGradTolerance;
  out << (ok ? "PASS" : "FAIL") << ": worst relative error " << std::scientific << std::setprecision(3)
      << report.worst() << std::defaultfloat << " (tolerance 1e-4)\n";
  return ok ? 0 : 1;
}

// ablation -----------------------------------------------------------------------------------------

int cmd_ablation(const Settings& s, const std::string& data_dir, const std::vector<std::string>& variants,
                 const std::string& csv_path, bool quiet, std::ostream& out) {
  const KeyValueFile kv = s.compose();
  const RunConfig base = read_run_config(kv);
  const LoadedData d = load_data(data_dir);

  std::ostringstream csv;
  csv << "variant,horizon,lot_class,mae,rmse\n";
  std::vector<std::pair<std::string, EvalReport>> rows;
  for (const auto& name : variants) {
    RunConfig rc = base;
    rc.model.variant = variant_from_name(name);
    const Dataset data = make_dataset(d, rc);
    const ModelContext ctx = make_context(*d.city, rc.model);
    ModelParams params = ModelParams::init(rc.model, d.city->size(), d.city->spec.feature_width(), rc.seed);
    const TrainResult result = train(params, data, ctx, rc.train);
    const EvalReport report = evaluate(params, data, data.test(), ctx, rc.eval_stride);
    if (!quiet) {
      out << variant_name(rc.model.variant) << ": " << result.history.size() << " epochs, best " << result.best_epoch
          << '\n';
    }
    for (std::size_t h = 0; h <= report.horizons.size(); ++h) {
      for (std::size_t c = 0; c < kNumLotClasses; ++c) {
        const auto cls = static_cast<LotClass>(c);
        const ErrorStats st = h < report.horizons.size() ? report.at(h, cls) : report.overall(cls);
        static constexpr std::string_view names[] = {"labeled", "unlabeled", "all"};
        csv << variant_name(rc.model.variant) << ',' << (h < report.horizons.size() ? std::to_string(h + 1) : "all")
            << ',' << names[c] << ',' << format_number(st.mae()) << ',' << format_number(st.rmse()) << '\n';
      }
    }
    rows.emplace_back(std::string(variant_name(rc.model.variant)), report);
  }

  out << "test split, MAE / RMSE pooled over horizons\n";
  out << std::left << std::setw(10) << "variant" << std::right << std::setw(22) << "labeled" << std::setw(22)
      << "unlabeled" << std::setw(22) << "all" << '\n';
  out << std::fixed << std::setprecision(3);
  for (const auto& [name, report] : rows) {
    out << std::left << std::setw(10) << name << std::right;
    for (auto cls : {LotClass::kLabeled, LotClass::kUnlabeled, LotClass::kAll}) {
      const ErrorStats st = report.overall(cls);
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(3) << st.mae() << " / " << st.rmse();
      out << std::setw(22) << cell.str();
    }
    out << '\n';
  }
  out << std::defaultfloat;
  if (!csv_path.empty()) {
    ensure_parent(csv_path);
    write_text(csv_path, csv.str());
    out << "wrote " << csv_path << '\n';
  }
  return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parking-availability forecasting for lots with and without sensors", "share"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  // gen-data
  Settings gen;
  std::string gen_out;
  auto* gen_cmd = app.add_subcommand("gen-data", "generate a synthetic city and its PA series");
  gen.add_common(gen_cmd);
  gen_cmd->add_option("--out", gen_out, "output directory")->required();
  gen.add_flag(gen_cmd, "--seed", "city.seed", "city seed (series seed defaults to seed + 1)");
  gen.add_flag(gen_cmd, "--lots", "city.num_lots", "number of lots N");
  gen.add_flag(gen_cmd, "--labeled-fraction", "city.labeled_fraction", "fraction of lots with sensors");
  gen.add_flag(gen_cmd, "--steps", "series.num_steps", "number of 15-minute steps");
  gen.add_flag(gen_cmd, "--noise", "series.noise_level", "per-lot occupancy noise");
  gen.add_flag(gen_cmd, "--diffusion", "series.diffusion", "spatial diffusion of noise in [0, 1]");

  // train
  Settings tr;
  std::string tr_data, tr_out;
  bool tr_quiet = false;
  auto* tr_cmd = app.add_subcommand("train", "fit a model and write a checkpoint");
  add_run_flags(tr_cmd, tr);
  tr_cmd->add_option("--data", tr_data, "data directory from gen-data")->required();
  tr_cmd->add_option("--out", tr_out, "checkpoint path stem")->required();
  tr_cmd->add_flag("--quiet", tr_quiet, "no per-epoch lines");

  // evaluate
  Settings ev;
  std::string ev_ckpt, ev_data, ev_split = "test", ev_csv;
  auto* ev_cmd = app.add_subcommand("evaluate", "MAE/RMSE per horizon for labeled and unlabeled lots");
  ev.add_common(ev_cmd);
  ev.add_flag(ev_cmd, "--eval-stride", "eval.stride", "stride between evaluation windows");
  ev_cmd->add_option("--checkpoint", ev_ckpt, "checkpoint path stem")->required();
  ev_cmd->add_option("--data", ev_data, "data directory")->required();
  ev_cmd->add_option("--split", ev_split, "train | validation | test");
  ev_cmd->add_option("--csv", ev_csv, "report path (default <checkpoint>.<split>.eval.csv)");

  // predict
  Settings pr;
  std::string pr_ckpt, pr_data, pr_out;
  std::optional<std::size_t> pr_start;
  auto* pr_cmd = app.add_subcommand("predict", "tau-step forecasts for every lot");
  pr.add_common(pr_cmd);
  pr_cmd->add_option("--checkpoint", pr_ckpt, "checkpoint path stem")->required();
  pr_cmd->add_option("--data", pr_data, "data directory")->required();
  pr_cmd->add_option("--start", pr_start, "first input step of the window (default: last window)");
  pr_cmd->add_option("--out", pr_out, "output CSV (default stdout)");

  // grad-check
  GradCheckOptions gc;
  std::string gc_variant = "share", gc_csv;
  auto* gc_cmd = app.add_subcommand("grad-check", "compare reverse-mode and finite-difference gradients");
  gc_cmd->add_option("--seed", gc.seed, "toy city and init seed");
  gc_cmd->add_option("--variant", gc_variant, "share | cagnn | cxtgnn | gru");
  gc_cmd->add_option("--step", gc.step, "finite-difference step h")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--csv", gc_csv, "also write the per-group errors as CSV");

  // ablation
  Settings ab;
  std::string ab_data, ab_csv;
  std::vector<std::string> ab_variants{"share", "cagnn", "cxtgnn", "gru"};
  bool ab_quiet = false;
  auto* ab_cmd = app.add_subcommand("ablation", "train every variant on one dataset and compare");
  add_run_flags(ab_cmd, ab);
  ab_cmd->add_option("--data", ab_data, "data directory")->required();
  ab_cmd->add_option("--variants", ab_variants, "variants to train")->delimiter(',');
  ab_cmd->add_option("--csv", ab_csv, "write the comparison as CSV");
  ab_cmd->add_flag("--quiet", ab_quiet, "no per-variant lines");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "share: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (gen_cmd->parsed()) return cmd_gen_data(gen, gen_out, out);
    if (tr_cmd->parsed()) return cmd_train(tr, tr_data, tr_out, tr_quiet, out);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, ev_ckpt, ev_data, ev_split, ev_csv, out);
    if (pr_cmd->parsed()) return cmd_predict(pr, pr_ckpt, pr_data, pr_start, pr_out, out);
    if (gc_cmd->parsed()) {
      gc.variant = variant_from_name(gc_variant);
      return cmd_grad_check(gc, gc_csv, out);
    }
    if (ab_cmd->parsed()) return cmd_ablation(ab, ab_data, ab_variants, ab_csv, ab_quiet, out);
  } catch (const std::exception& e) {
    err << "share: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace share
