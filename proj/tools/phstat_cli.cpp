// phstat: command line runner for the persistence statistics pipelines.
//
//   phstat sample   [--config FILE] [overrides]            -> cloud.csv, cloud.json
//   phstat rips     [--cloud FILE] [overrides]             -> diagram.csv, diagram.json
//   phstat fit      --diagram FILE                         -> model.json, histogram.csv
//   phstat infer    --diagram FILE --model FILE            -> inference.csv, inference.json
//   phstat table    [--config FILE] [overrides]            -> classification.csv, percentiles.csv,
//                                                             inference.csv, fits.csv
//   phstat goodness [--config FILE] [overrides]            -> goodness.csv, goodness.json
//
// The output directory is --out, then the config's output_dir, then
// $PHSTAT_OUTPUT_DIR, then the working directory. Failures print
// {"error": <code>, "message": <text>} on stderr and exit with status 1.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "phstat/experiment.hpp"

namespace {

using namespace phstat;
using experiment::ExperimentConfig;
using io::json;
namespace fs = std::filesystem;

enum class Kind { text, number, integer, maxscale, number_list, integer_list, maxscale_list, boolean };

struct Override {
  const char* flag;
  const char* key;  // dotted path into the config document
  Kind kind;
  const char* help;
};

constexpr Override overrides[] = {
    {"--shape", "shape", Kind::text, "circle, two_concentric, two_distinct, sphere or torus3"},
    {"--n", "n", Kind::integer, "number of points"},
    {"--r", "r", Kind::number, "radius (circle, sphere, two_distinct)"},
    {"--d-outer", "d_outer", Kind::number, "outer diameter (two_concentric)"},
    {"--d-inner", "d_inner", Kind::number, "inner diameter (two_concentric)"},
    {"--gap", "gap", Kind::number, "gap between circles (two_distinct)"},
    {"--M", "M", Kind::number, "fraction of points receiving noise, in [0, 1]"},
    {"--maxscale", "maxscale", Kind::maxscale, "filtration cutoff or \"auto\""},
    {"--maxdim", "maxdim", Kind::integer, "highest homology degree (0, 1 or 2)"},
    {"--n-reps", "n_reps", Kind::integer, "replicated diagrams per test"},
    {"--n-collections", "n_collections", Kind::integer, "collections in the goodness suite"},
    {"--seed", "seed", Kind::integer, "master seed"},
    {"--j-max", "j_max", Kind::integer, "largest j tested (0 = until insignificant)"},
    {"--alpha", "alpha", Kind::number, "significance level"},
    {"--out", "output_dir", Kind::text, "output directory"},
    {"--inference", "inference", Kind::boolean, "run signal inference in table"},
    {"--grid-n", "grid.n", Kind::integer_list, "comma-separated n values"},
    {"--grid-M", "grid.M", Kind::number_list, "comma-separated noise fractions"},
    {"--grid-maxscale", "grid.maxscale", Kind::maxscale_list, "comma-separated maxscales or auto"},
};

json parse_scalar(const std::string& text, Kind kind, const std::string& flag) {
  try {
    switch (kind) {
      case Kind::text: return text;
      case Kind::number:
      case Kind::number_list: return io::parse_double(text);
      case Kind::integer:
      case Kind::integer_list: {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != text.size() || text.front() == '-') break;
        return v;
      }
      case Kind::maxscale:
      case Kind::maxscale_list:
        if (text == "auto") return "auto";
        return io::parse_double(text);
      case Kind::boolean:
        if (text == "true" || text == "1") return true;
        if (text == "false" || text == "0") return false;
        break;
    }
  } catch (const std::exception&) {
  }
  throw Error(Errc::invalid_parameter, "bad value '" + text + "' for " + flag);
}

void apply_override(json& doc, const Override& o, const std::string& text) {
  json value;
  if (o.kind == Kind::number_list || o.kind == Kind::integer_list || o.kind == Kind::maxscale_list) {
    value = json::array();
    for (auto part : io::split_csv(text)) value.push_back(parse_scalar(std::string(part), o.kind, o.flag));
  } else {
    value = parse_scalar(text, o.kind, o.flag);
  }
  const std::string key = o.key;
  if (const auto dot = key.find('.'); dot != std::string::npos) {
    auto& parent = doc[key.substr(0, dot)];
    if (parent.is_null()) parent = json::object();
    parent[key.substr(dot + 1)] = value;
  } else {
    doc[key] = value;
  }
}

struct Invocation {
  std::string config_file;
  std::map<std::string, std::string> raw;  // flag -> text; empty when not given
  std::string cloud_file;
  std::string diagram_file;
  std::string model_file;
};

void register_common(CLI::App* sub, Invocation& inv) {
  sub->add_option("--config", inv.config_file, "experiment config (JSON)");
  for (const auto& o : overrides) sub->add_option(o.flag, inv.raw[o.flag], o.help);
}

ExperimentConfig load_config(const Invocation& inv) {
  json doc = json::object();
  if (!inv.config_file.empty()) {
    try {
      doc = json::parse(io::read_file(inv.config_file));
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_parameter, "config is not valid JSON: " + std::string(e.what()));
    }
  }
  for (const auto& o : overrides) {
    const auto it = inv.raw.find(o.flag);
    if (it != inv.raw.end() && !it->second.empty()) apply_override(doc, o, it->second);
  }
  ExperimentConfig cfg;
  try {
    cfg = experiment::config_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_parameter, "config field has the wrong type: " + std::string(e.what()));
  }
  const bool out_given = doc.contains("output_dir");
  if (!out_given) {
    if (const char* env = std::getenv("PHSTAT_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  }
  experiment::validate(cfg);
  return cfg;
}

fs::path sidecar_of(const fs::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

std::string to_text(auto writer, const auto& value) {
  std::ostringstream ss;
  writer(ss, value);
  return ss.str();
}

struct Written {
  json files = json::array();
  json extra = json::object();

  void write(const fs::path& path, const std::string& contents) {
    io::write_atomically(path, contents);
    files.push_back(path.string());
  }
};

Written cmd_sample(const ExperimentConfig& cfg) {
  const auto cloud = sample_shape(cfg.shape, cfg.seed);
  Written w;
  w.write(cfg.output_dir / "cloud.csv", to_text(io::write_cloud_csv, cloud));
  w.write(cfg.output_dir / "cloud.json", io::cloud_meta_json(cloud).dump(2) + '\n');
  return w;
}

Written cmd_rips(const ExperimentConfig& cfg, const Invocation& inv) {
  std::optional<PointCloud> cloud;
  if (!inv.cloud_file.empty()) {
    std::istringstream in(io::read_file(inv.cloud_file));
    cloud = io::read_cloud_csv(in);
    const auto meta = sidecar_of(inv.cloud_file);
    if (fs::exists(meta)) io::apply_cloud_meta(json::parse(io::read_file(meta)), *cloud);
  } else {
    cloud = sample_shape(cfg.shape, cfg.seed);
  }
  const auto result = experiment::compute_diagram(*cloud, cfg.maxscale, cfg.maxdim);
  Written w;
  w.write(cfg.output_dir / "diagram.csv", to_text(io::write_diagram_csv, result.diagram));
  w.write(cfg.output_dir / "diagram.json",
          experiment::diagram_sidecar(result, &*cloud, cfg.maxdim).dump(2) + '\n');
  w.extra["maxscale"] = result.diagram.maxscale;
  return w;
}

struct LoadedDiagram {
  PersistenceDiagram diagram;
  json sidecar = json::object();
};

LoadedDiagram load_diagram(const std::string& file) {
  detail::require(!file.empty(), Errc::invalid_parameter, "--diagram is required");
  LoadedDiagram out;
  std::istringstream in(io::read_file(file));
  out.diagram = io::read_diagram_csv(in);
  const auto meta = sidecar_of(file);
  if (fs::exists(meta)) {
    out.sidecar = json::parse(io::read_file(meta));
    out.diagram.maxscale = out.sidecar.value("maxscale", out.diagram.maxscale);
  }
  return out;
}

io::RowKey row_key(const LoadedDiagram& d) {
  io::RowKey key{"custom", d.diagram.n_points, 0.0, d.diagram.maxscale};
  if (d.sidecar.contains("cloud")) {
    const auto& c = d.sidecar["cloud"];
    key.shape = c.value("shape", std::string("custom"));
    key.noise_fraction = c.value("noise_fraction", 0.0);
  }
  return key;
}

Written cmd_fit(const ExperimentConfig& cfg, const Invocation& inv) {
  const auto d = load_diagram(inv.diagram_file);
  const auto deaths = finite_deaths(d.diagram);
  const double maxscale = d.diagram.maxscale > 0.0 ? d.diagram.maxscale : infinity;
  const auto fit = experiment::fit_deaths(deaths, maxscale);
  Written w;
  w.write(cfg.output_dir / "model.json", experiment::fit_json(fit).dump(2) + '\n');
  const auto bins = io::histogram(deaths);
  w.write(cfg.output_dir / "histogram.csv", to_text(io::write_histogram_csv, std::span<const io::HistogramBin>(bins)));
  w.extra["family"] = family_name(fit.best.family());
  return w;
}

Written cmd_infer(const ExperimentConfig& cfg, const Invocation& inv) {
  const auto d = load_diagram(inv.diagram_file);
  detail::require(!inv.model_file.empty(), Errc::invalid_parameter, "--model is required");
  const auto model = io::model_from_json(json::parse(io::read_file(inv.model_file)));
  const auto deaths = finite_deaths(d.diagram);
  const auto sc = count_signals(deaths, model, cfg.n_reps, cfg.seed, cfg.alpha, cfg.j_max);
  Written w;
  w.write(cfg.output_dir / "inference.csv", experiment::inference_csv(row_key(d), sc));
  w.write(cfg.output_dir / "inference.json",
          json{{"n_components", sc.n_components}, {"n_reps", cfg.n_reps}, {"seed", cfg.seed}}.dump(2) + '\n');
  w.extra["n_components"] = sc.n_components;
  return w;
}

Written cmd_table(const ExperimentConfig& cfg) {
  const auto t = experiment::run_table(cfg);
  Written w;
  w.write(cfg.output_dir / "classification.csv", t.classification);
  w.write(cfg.output_dir / "percentiles.csv", t.percentiles);
  if (cfg.inference) {
    w.write(cfg.output_dir / "inference.csv", t.inference);
    w.write(cfg.output_dir / "fits.csv", t.fits);
  }
  w.extra["rows"] = t.rows;
  return w;
}

Written cmd_goodness(const ExperimentConfig& cfg) {
  const auto g = experiment::run_goodness(cfg);
  Written w;
  w.write(cfg.output_dir / "goodness.csv", g.records);
  w.write(cfg.output_dir / "goodness.json", g.summary.dump(2) + '\n');
  w.extra["family_counts"] = g.summary["family_counts"];
  return w;
}

int fail(std::string_view code, const std::string& message) {
  std::cerr << json{{"error", code}, {"message", message}}.dump() << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Persistence diagram statistics for sampled point clouds"};
  app.require_subcommand(1);
  Invocation inv;

  auto* sample = app.add_subcommand("sample", "sample a point cloud");
  auto* rips = app.add_subcommand("rips", "compute a Vietoris-Rips persistence diagram");
  auto* fit = app.add_subcommand("fit", "fit death-time distributions to a diagram");
  auto* infer = app.add_subcommand("infer", "test the largest H0 death times");
  auto* table = app.add_subcommand("table", "aggregate tables over a parameter grid");
  auto* goodness = app.add_subcommand("goodness", "goodness-of-fit suite over many collections");
  for (auto* sub : {sample, rips, fit, infer, table, goodness}) register_common(sub, inv);
  rips->add_option("--cloud", inv.cloud_file, "point cloud CSV (default: sample from config)");
  fit->add_option("--diagram", inv.diagram_file, "diagram CSV")->required();
  infer->add_option("--diagram", inv.diagram_file, "diagram CSV")->required();
  infer->add_option("--model", inv.model_file, "model JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(errc_name(Errc::invalid_parameter), e.what());
  }

  try {
    const auto cfg = load_config(inv);
    Written w;
    if (sample->parsed()) w = cmd_sample(cfg);
    else if (rips->parsed()) w = cmd_rips(cfg, inv);
    else if (fit->parsed()) w = cmd_fit(cfg, inv);
    else if (infer->parsed()) w = cmd_infer(cfg, inv);
    else if (table->parsed()) w = cmd_table(cfg);
    else w = cmd_goodness(cfg);
    json summary = w.extra;
    summary["written"] = w.files;
    std::cout << summary.dump() << '\n';
  } catch (const Error& e) {
    return fail(errc_name(e.code()), e.what());
  } catch (const json::exception& e) {
    return fail(errc_name(Errc::io), e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(errc_name(Errc::io), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}
