#pragma once

// Experiment configuration and the end-to-end pipelines behind the command
// line runner. Everything here is a pure function of the configuration.
//
// Config keys (JSON object, all optional):
//   shape, n, r, d_outer, d_inner, gap, M, maxscale (number or "auto"),
//   maxdim, n_reps, n_collections, seed, j_max, alpha, output_dir,
//   inference (bool, table only), grid: {n: [...], M: [...], maxscale: [...]}

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "phstat/diagrams.hpp"
#include "phstat/distfit.hpp"
#include "phstat/error.hpp"
#include "phstat/geometry.hpp"
#include "phstat/inference.hpp"
#include "phstat/io.hpp"
#include "phstat/parallel.hpp"
#include "phstat/rips.hpp"

namespace phstat::experiment {

using io::json;

struct ExperimentConfig {
  ShapeConfig shape;
  std::optional<double> maxscale;  // empty means auto
  int maxdim = 0;
  std::size_t n_reps = 1000;
  std::size_t n_collections = 100;
  Seed seed = 0;
  std::size_t j_max = 0;  // 0: scan until the first insignificant T_j
  double alpha = default_alpha;
  std::filesystem::path output_dir = ".";
  bool inference = true;
  std::vector<std::size_t> grid_n;
  std::vector<double> grid_M;
  std::vector<std::optional<double>> grid_maxscale;
};

namespace detail {

inline std::optional<double> parse_maxscale(const json& v) {
  if (v.is_string()) {
    if (v.get<std::string>() == "auto") return std::nullopt;
    throw Error(Errc::invalid_parameter, "maxscale must be a number or \"auto\"");
  }
  if (!v.is_number()) throw Error(Errc::invalid_parameter, "maxscale must be a number or \"auto\"");
  return v.get<double>();
}

template <class T>
T number(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw Error(Errc::invalid_parameter, std::string(key) + " must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (v.is_number_float() || v.get<double>() < 0.0)
      throw Error(Errc::invalid_parameter, std::string(key) + " must be a non-negative integer");
  } else if constexpr (std::is_integral_v<T>) {
    if (v.is_number_float()) throw Error(Errc::invalid_parameter, std::string(key) + " must be an integer");
  }
  return v.get<T>();
}

}  // namespace detail

/// Builds a config from JSON; unknown keys are rejected so typos surface.
inline ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw Error(Errc::invalid_parameter, "config must be a JSON object");
  static const std::set<std::string> known{"shape", "n", "r", "d_outer", "d_inner", "gap", "M",
                                           "maxscale", "maxdim", "n_reps", "n_collections", "seed",
                                           "j_max", "alpha", "output_dir", "inference", "grid"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw Error(Errc::invalid_parameter, "unknown config key '" + key + "'");

  ExperimentConfig c;
  if (j.contains("shape")) c.shape.shape = parse_shape(j.at("shape").get<std::string>());
  if (j.contains("n")) c.shape.n = detail::number<std::size_t>(j, "n");
  if (j.contains("r")) c.shape.r = detail::number<double>(j, "r");
  if (j.contains("d_outer")) c.shape.d_outer = detail::number<double>(j, "d_outer");
  if (j.contains("d_inner")) c.shape.d_inner = detail::number<double>(j, "d_inner");
  if (j.contains("gap")) c.shape.gap = detail::number<double>(j, "gap");
  if (j.contains("M")) c.shape.noise_fraction = detail::number<double>(j, "M");
  if (j.contains("maxscale")) c.maxscale = detail::parse_maxscale(j.at("maxscale"));
  if (j.contains("maxdim")) c.maxdim = detail::number<int>(j, "maxdim");
  if (j.contains("n_reps")) c.n_reps = detail::number<std::size_t>(j, "n_reps");
  if (j.contains("n_collections")) c.n_collections = detail::number<std::size_t>(j, "n_collections");
  if (j.contains("seed")) c.seed = detail::number<Seed>(j, "seed");
  if (j.contains("j_max")) c.j_max = detail::number<std::size_t>(j, "j_max");
  if (j.contains("alpha")) c.alpha = detail::number<double>(j, "alpha");
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  if (j.contains("inference")) c.inference = j.at("inference").get<bool>();
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    if (!g.is_object()) throw Error(Errc::invalid_parameter, "grid must be an object");
    for (const auto& [key, value] : g.items())
      if (key != "n" && key != "M" && key != "maxscale")
        throw Error(Errc::invalid_parameter, "unknown grid key '" + key + "'");
    if (g.contains("n"))
      for (const auto& v : g.at("n")) c.grid_n.push_back(v.get<std::size_t>());
    if (g.contains("M"))
      for (const auto& v : g.at("M")) c.grid_M.push_back(v.get<double>());
    if (g.contains("maxscale"))
      for (const auto& v : g.at("maxscale")) c.grid_maxscale.push_back(detail::parse_maxscale(v));
  }
  return c;
}

inline json maxscale_json(const std::optional<double>& m) { return m ? json(*m) : json("auto"); }

inline json config_to_json(const ExperimentConfig& c) {
  json grid = json::object();
  if (!c.grid_n.empty()) grid["n"] = c.grid_n;
  if (!c.grid_M.empty()) grid["M"] = c.grid_M;
  if (!c.grid_maxscale.empty()) {
    grid["maxscale"] = json::array();
    for (const auto& m : c.grid_maxscale) grid["maxscale"].push_back(maxscale_json(m));
  }
  return json{{"shape", shape_name(c.shape.shape)},
              {"n", c.shape.n},
              {"r", c.shape.r},
              {"d_outer", c.shape.d_outer},
              {"d_inner", c.shape.d_inner},
              {"gap", c.shape.gap},
              {"M", c.shape.noise_fraction},
              {"maxscale", maxscale_json(c.maxscale)},
              {"maxdim", c.maxdim},
              {"n_reps", c.n_reps},
              {"n_collections", c.n_collections},
              {"seed", c.seed},
              {"j_max", c.j_max},
              {"alpha", c.alpha},
              {"inference", c.inference},
              {"grid", grid}};
}

namespace detail {

inline void check_shape(const ShapeConfig& s) {
  using phstat::detail::require;
  require(s.shape != Shape::custom, Errc::invalid_parameter, "shape must name a sampler");
  require(s.n >= 1, Errc::invalid_parameter, "n must be at least 1");
  require(s.noise_fraction >= 0.0 && s.noise_fraction <= 1.0, Errc::invalid_parameter,
          "M must lie in [0, 1]");
  switch (s.shape) {
    case Shape::circle:
    case Shape::sphere:
      require(s.r > 0.0 && std::isfinite(s.r), Errc::invalid_parameter, "r must be positive");
      break;
    case Shape::two_concentric:
      require(s.n >= 2, Errc::invalid_parameter, "two_concentric needs n >= 2");
      require(s.d_inner > 0.0 && s.d_outer > s.d_inner && std::isfinite(s.d_outer),
              Errc::invalid_parameter, "two_concentric needs d_outer > d_inner > 0");
      break;
    case Shape::two_distinct:
      require(s.n >= 2 && s.n % 2 == 0, Errc::invalid_parameter, "two_distinct needs an even n >= 2");
      require(s.r > 0.0 && std::isfinite(s.r), Errc::invalid_parameter, "r must be positive");
      require(s.gap > 0.0 && std::isfinite(s.gap), Errc::invalid_parameter, "gap must be positive");
      break;
    case Shape::torus3:
    case Shape::custom: break;
  }
}

inline void check_maxscale(const std::optional<double>& m) {
  phstat::detail::require(!m || (*m > 0.0 && !std::isnan(*m)), Errc::invalid_parameter,
                          "maxscale must be positive or \"auto\"");
}

}  // namespace detail

/// Checks every sampler and pipeline precondition up front.
inline void validate(const ExperimentConfig& c) {
  using phstat::detail::require;
  detail::check_shape(c.shape);
  detail::check_maxscale(c.maxscale);
  require(c.maxdim >= 0 && c.maxdim <= 2, Errc::invalid_parameter, "maxdim must be 0, 1 or 2");
  require(c.n_reps >= 1, Errc::invalid_parameter, "n_reps must be at least 1");
  require(c.n_collections >= 2, Errc::invalid_parameter, "n_collections must be at least 2");
  require(c.alpha > 0.0 && c.alpha < 1.0, Errc::invalid_parameter, "alpha must lie in (0, 1)");
  for (auto n : c.grid_n) {
    auto s = c.shape;
    s.n = n;
    detail::check_shape(s);
  }
  for (double m : c.grid_M) {
    auto s = c.shape;
    s.noise_fraction = m;
    detail::check_shape(s);
  }
  for (const auto& m : c.grid_maxscale) detail::check_maxscale(m);
}

// ---------------------------------------------------------------------------
// Single-step pipelines

struct RipsResult {
  PersistenceDiagram diagram;
  bool auto_maxscale = false;
};

inline RipsResult compute_diagram(const PointCloud& cloud, const std::optional<double>& maxscale,
                                  int maxdim) {
  const auto d = pairwise_distances(cloud);
  RipsResult out;
  out.auto_maxscale = !maxscale;
  const double scale = maxscale ? *maxscale : optimal_maxscale(d);
  out.diagram = rips_persistence(d, scale, maxdim);
  return out;
}

inline json diagram_sidecar(const RipsResult& r, const PointCloud* cloud, int maxdim) {
  auto j = io::diagram_sidecar(r.diagram);
  j["auto_maxscale"] = r.auto_maxscale;
  j["maxdim"] = maxdim;
  if (cloud) j["cloud"] = io::cloud_meta_json(*cloud);
  return j;
}

struct FitResult {
  FittedDistribution best;
  std::vector<FittedDistribution> candidates;
};

inline FitResult fit_deaths(std::span<const double> deaths, double maxscale) {
  FitResult out;
  out.best = select_best(deaths, maxscale);
  try {
    out.candidates.push_back(fit_beta(deaths, beta_support_for(deaths, maxscale)));
  } catch (const Error&) {
  }
  try {
    out.candidates.push_back(fit_gpd(deaths));
  } catch (const Error&) {
  }
  return out;
}

inline json fit_json(const FitResult& r) {
  auto j = io::model_json(r.best);
  j["candidates"] = json::array();
  for (const auto& c : r.candidates) j["candidates"].push_back(io::model_json(c));
  return j;
}

inline std::string inference_csv(const io::RowKey& key, const SignalCount& sc) {
  std::string out(io::inference_header);
  out += '\n';
  for (const auto& t : sc.tests) out += io::inference_row(key, t) + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Grid tables

struct GridPoint {
  std::size_t n;
  double M;
  std::optional<double> maxscale;
};

inline std::vector<GridPoint> grid_points(const ExperimentConfig& c) {
  const auto ns = c.grid_n.empty() ? std::vector<std::size_t>{c.shape.n} : c.grid_n;
  const auto ms = c.grid_M.empty() ? std::vector<double>{c.shape.noise_fraction} : c.grid_M;
  const auto scales = c.grid_maxscale.empty() ? std::vector<std::optional<double>>{c.maxscale}
                                              : c.grid_maxscale;
  std::vector<GridPoint> out;
  for (auto n : ns)
    for (double m : ms)
      for (const auto& s : scales) out.push_back({n, m, s});
  return out;
}

struct TableRow {
  io::RowKey key;
  BarClassification classification;
  PercentileTable percentiles;
  FittedDistribution fit;
  SignalCount signals;
  bool inferred = false;
};

/// One grid point. The noisy cloud and its clean companion share the base
/// sample (same shape seed), and c_max is the clean cloud's largest finite
/// H0 death at the same maxscale.
inline TableRow table_row(const ExperimentConfig& c, const GridPoint& g) {
  ShapeConfig shape = c.shape;
  shape.n = g.n;
  shape.noise_fraction = g.M;
  ShapeConfig clean = shape;
  clean.noise_fraction = 0.0;

  const auto noisy_cloud = sample_shape(shape, c.seed);
  const auto noisy = compute_diagram(noisy_cloud, g.maxscale, 0).diagram;
  const auto clean_diag =
      g.M == 0.0 ? noisy : compute_diagram(sample_shape(clean, c.seed), noisy.maxscale, 0).diagram;
  const auto clean_deaths = finite_deaths(clean_diag);
  const auto deaths = finite_deaths(noisy);
  phstat::detail::require(!deaths.empty() && !clean_deaths.empty(), Errc::empty_input,
                          "table: need at least two points");

  TableRow row;
  row.key = {std::string(shape_name(shape.shape)), g.n, g.M, noisy.maxscale};
  row.classification = classify_bars(deaths, *std::max_element(clean_deaths.begin(), clean_deaths.end()));
  row.percentiles = percentiles(deaths);
  if (c.inference) {
    row.fit = select_best(deaths, noisy.maxscale);
    row.signals = count_signals(deaths, row.fit, c.n_reps, derive_seed(c.seed, 2), c.alpha, c.j_max);
    row.inferred = true;
  }
  return row;
}

struct TableOutput {
  std::string classification;
  std::string percentiles;
  std::string inference;  // empty unless inference is enabled
  std::string fits;
  std::size_t rows = 0;
};

inline TableOutput run_table(const ExperimentConfig& c) {
  const auto points = grid_points(c);
  std::vector<TableRow> rows(points.size());
  phstat::detail::parallel_for(points.size(), [&](std::size_t i) { rows[i] = table_row(c, points[i]); });

  TableOutput out;
  out.rows = rows.size();
  out.classification = std::string(io::classification_header) + '\n';
  out.percentiles = std::string(io::percentile_header) + '\n';
  for (const auto& r : rows) {
    out.classification += io::classification_row(r.key, r.classification) + '\n';
    for (std::size_t k = 0; k < PercentileTable::levels.size(); ++k)
      out.percentiles += io::key_prefix(r.key) + ',' + std::to_string(PercentileTable::levels[k]) + ',' +
                         io::format_double(r.percentiles.values[k]) + '\n';
  }
  if (c.inference) {
    out.inference = std::string(io::inference_header) + '\n';
    out.fits = "shape,n,M,maxscale,family,a,b,support,k,sigma,theta,loglik,aic,bic,n_components\n";
    for (const auto& r : rows) {
      for (const auto& t : r.signals.tests) out.inference += io::inference_row(r.key, t) + '\n';
      out.fits += io::key_prefix(r.key) + ',' + std::string(family_name(r.fit.family())) + ',';
      if (r.fit.family() == Family::beta) {
        const auto& b = r.fit.beta();
        out.fits += io::format_double(b.a) + ',' + io::format_double(b.b) + ',' + io::format_double(b.support) + ",,,,";
      } else {
        const auto& g = r.fit.gpd();
        out.fits += ",,," + io::format_double(g.k) + ',' + io::format_double(g.sigma) + ',' +
                    io::format_double(g.theta) + ',';
      }
      out.fits += io::format_double(r.fit.loglik) + ',' + io::format_double(r.fit.aic) + ',' +
                  io::format_double(r.fit.bic) + ',' + std::to_string(r.signals.n_components) + '\n';
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Goodness-of-fit suite

struct GoodnessOutput {
  std::string records;
  json summary;
};

inline GoodnessOutput run_goodness(const ExperimentConfig& c) {
  SuiteConfig suite{c.shape, c.maxscale};
  const auto report = goodness_suite(suite, c.n_collections, c.seed);

  GoodnessOutput out;
  out.records =
      "collection,maxscale,family,a,b,support,k,sigma,theta,loglik,aic,bic,skew_real,skew_sim,"
      "kurt_real,kurt_sim,bottleneck\n";
  std::map<std::string, std::vector<double>> params;
  for (const auto& r : report.records) {
    std::string line = std::to_string(r.index) + ',' + io::format_double(r.maxscale) + ',' +
                       std::string(family_name(r.fit.family())) + ',';
    if (r.fit.family() == Family::beta) {
      const auto& b = r.fit.beta();
      line += io::format_double(b.a) + ',' + io::format_double(b.b) + ',' + io::format_double(b.support) + ",,,,";
      params["beta.a"].push_back(b.a);
      params["beta.b"].push_back(b.b);
    } else {
      const auto& g = r.fit.gpd();
      line += ",,," + io::format_double(g.k) + ',' + io::format_double(g.sigma) + ',' +
              io::format_double(g.theta) + ',';
      params["gpd.k"].push_back(g.k);
      params["gpd.sigma"].push_back(g.sigma);
      params["gpd.theta"].push_back(g.theta);
    }
    line += io::format_double(r.fit.loglik) + ',' + io::format_double(r.fit.aic) + ',' +
            io::format_double(r.fit.bic) + ',' + io::format_double(r.skew_real) + ',' +
            io::format_double(r.skew_sim) + ',' + io::format_double(r.kurt_real) + ',' +
            io::format_double(r.kurt_sim) + ',' + io::format_double(r.bottleneck) + '\n';
    out.records += line;
  }

  json counts = json::object();
  for (const auto& [family, count] : report.family_counts) counts[std::string(family_name(family))] = count;
  json spreads = json::object();
  for (const auto& [name, values] : params)
    spreads[name] = {{"min", *std::min_element(values.begin(), values.end())},
                     {"median", nearest_rank(values, 50.0)},
                     {"max", *std::max_element(values.begin(), values.end())}};
  const auto b = report.bottlenecks();
  out.summary = {{"n_collections", report.records.size()},
                 {"family_counts", counts},
                 {"parameter_spread", spreads},
                 {"bottleneck_median", nearest_rank(b, 50.0)},
                 {"config", config_to_json(c)}};
  return out;
}

}  // namespace phstat::experiment
