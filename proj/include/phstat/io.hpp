#pragma once

// File formats.
//
//   cloud CSV     header x0,...,x{d-1}; one point per row
//   cloud JSON    {"shape", "n", "dim", "radius", "d_outer", "d_inner", "gap",
//                  "noise_fraction", "seed", "noise_seed"}
//   diagram CSV   header dim,birth,death,clipped; death "inf" for the
//                 infinite pair, clipped as 0/1
//   diagram JSON  sidecar {"maxscale", "n_points", "cloud"?, "auto_maxscale"?}
//   model JSON    {"family", "params", "loglik", "aic", "bic", "n_fit",
//                  "support": [lo, hi]} (hi null when unbounded)
//
// Numbers are written in shortest round-trip form, so output is byte-stable.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "phstat/diagrams.hpp"
#include "phstat/distfit.hpp"
#include "phstat/error.hpp"
#include "phstat/geometry.hpp"
#include "phstat/rips.hpp"

namespace phstat::io {

using nlohmann::json;

inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r' || text.back() == '\t'))
    text.remove_suffix(1);
  if (text == "inf" || text == "Inf" || text == "+inf") return infinity;
  if (text == "-inf") return -infinity;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw Error(Errc::io, "cannot parse number '" + std::string(text) + "'");
  return value;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                      : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// Writes to `path` through a temporary sibling and a rename.
inline void write_atomically(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot open " + tmp.string() + " for writing");
    out << contents;
    if (!out) throw Error(Errc::io, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Point clouds

inline void write_cloud_csv(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t k = 0; k < cloud.dim(); ++k) out << (k ? "," : "") << 'x' << k;
  out << '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t k = 0; k < p.size(); ++k) out << (k ? "," : "") << format_double(p[k]);
    out << '\n';
  }
}

inline PointCloud read_cloud_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, "cloud CSV is empty");
  const std::size_t dim = split_csv(line).size();
  std::vector<double> coords;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv(line);
    if (fields.size() != dim) throw Error(Errc::io, "cloud CSV row has the wrong number of columns");
    for (auto f : fields) coords.push_back(parse_double(f));
  }
  if (coords.empty()) throw Error(Errc::io, "cloud CSV has no points");
  return PointCloud(dim, std::move(coords));
}

inline json cloud_meta_json(const PointCloud& cloud) {
  const auto& m = cloud.meta();
  return json{{"shape", shape_name(m.shape)},
              {"n", cloud.size()},
              {"dim", cloud.dim()},
              {"radius", m.radius},
              {"d_outer", m.d_outer},
              {"d_inner", m.d_inner},
              {"gap", m.gap},
              {"noise_fraction", m.noise_fraction},
              {"seed", m.seed},
              {"noise_seed", m.noise_seed}};
}

inline void apply_cloud_meta(const json& j, PointCloud& cloud) {
  auto& m = cloud.meta();
  m.shape = parse_shape(j.value("shape", std::string("custom")));
  m.radius = j.value("radius", 0.0);
  m.d_outer = j.value("d_outer", 0.0);
  m.d_inner = j.value("d_inner", 0.0);
  m.gap = j.value("gap", 0.0);
  m.noise_fraction = j.value("noise_fraction", 0.0);
  m.seed = j.value("seed", Seed{0});
  m.noise_seed = j.value("noise_seed", Seed{0});
}

// ---------------------------------------------------------------------------
// Diagrams

inline void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diag) {
  out << "dim,birth,death,clipped\n";
  for (const auto& p : diag.pairs)
    out << p.dim << ',' << format_double(p.birth) << ',' << format_double(p.death) << ','
        << (p.clipped ? 1 : 0) << '\n';
}

inline PersistenceDiagram read_diagram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::io, "diagram CSV is empty");
  PersistenceDiagram diag;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != 4) throw Error(Errc::io, "diagram CSV rows need 4 columns");
    PersistencePair p;
    p.dim = static_cast<int>(parse_double(f[0]));
    p.birth = parse_double(f[1]);
    p.death = parse_double(f[2]);
    p.clipped = parse_double(f[3]) != 0.0;
    diag.pairs.push_back(p);
  }
  for (const auto& p : diag.pairs) {
    if (p.dim == 0) ++diag.n_points;
    if (p.clipped) diag.maxscale = std::max(diag.maxscale, p.death);
  }
  return diag;
}

inline json diagram_sidecar(const PersistenceDiagram& diag) {
  return json{{"maxscale", diag.maxscale}, {"n_points", diag.n_points}};
}

// ---------------------------------------------------------------------------
// Fitted models

inline json model_json(const FittedDistribution& dist) {
  json params;
  if (dist.family() == Family::beta) {
    params = {{"a", dist.beta().a}, {"b", dist.beta().b}};
  } else {
    params = {{"k", dist.gpd().k}, {"sigma", dist.gpd().sigma}, {"theta", dist.gpd().theta}};
  }
  const double hi = support_upper(dist);
  return json{{"family", family_name(dist.family())},
              {"params", params},
              {"loglik", dist.loglik},
              {"aic", dist.aic},
              {"bic", dist.bic},
              {"n_fit", dist.n_fit},
              {"support", json::array({support_lower(dist), std::isfinite(hi) ? json(hi) : json()})}};
}

inline FittedDistribution model_from_json(const json& j) {
  FittedDistribution dist;
  const auto family = j.at("family").get<std::string>();
  const auto& params = j.at("params");
  if (family == "beta") {
    const auto& support = j.at("support");
    dist.model = BetaModel{params.at("a").get<double>(), params.at("b").get<double>(),
                           support.at(1).get<double>()};
  } else if (family == "gpd") {
    dist.model = GpdModel{params.at("k").get<double>(), params.at("sigma").get<double>(),
                          params.at("theta").get<double>()};
  } else {
    throw Error(Errc::io, "unknown model family '" + family + "'");
  }
  dist.loglik = j.value("loglik", 0.0);
  dist.aic = j.value("aic", 0.0);
  dist.bic = j.value("bic", 0.0);
  dist.n_fit = j.value("n_fit", std::size_t{0});
  return dist;
}

// ---------------------------------------------------------------------------
// Histograms and reports

struct HistogramBin {
  double lo;
  double hi;
  std::size_t count;
  double density;
};

/// Equal-width bins over [0, max]; the last bin is closed on the right.
inline std::vector<HistogramBin> histogram(std::span<const double> xs, std::size_t bins = 30) {
  detail::require(bins >= 1, Errc::invalid_parameter, "histogram: need at least one bin");
  detail::require(!xs.empty(), Errc::empty_input, "histogram: no values");
  const double top = *std::max_element(xs.begin(), xs.end());
  const double width = top > 0.0 ? top / static_cast<double>(bins) : 1.0;
  std::vector<HistogramBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b)
    out[b] = {width * static_cast<double>(b), width * static_cast<double>(b + 1), 0, 0.0};
  for (double x : xs) {
    auto b = static_cast<std::size_t>(x / width);
    if (b >= bins) b = bins - 1;
    ++out[b].count;
  }
  for (auto& bin : out)
    bin.density = static_cast<double>(bin.count) / (static_cast<double>(xs.size()) * width);
  return out;
}

inline void write_histogram_csv(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_lo,bin_hi,count,density\n";
  for (const auto& b : bins)
    out << format_double(b.lo) << ',' << format_double(b.hi) << ',' << b.count << ','
        << format_double(b.density) << '\n';
}

/// Key columns shared by every experiment table.
struct RowKey {
  std::string shape;
  std::size_t n;
  double noise_fraction;
  double maxscale;
};

inline std::string key_prefix(const RowKey& k) {
  return k.shape + ',' + std::to_string(k.n) + ',' + format_double(k.noise_fraction) + ',' +
         format_double(k.maxscale);
}

inline constexpr std::string_view inference_header =
    "shape,n,M,maxscale,j,observed_Tj,ci_lower,ci_upper,p_value,n_reps,significant";

inline std::string inference_row(const RowKey& key, const InferenceReport& r) {
  return key_prefix(key) + ',' + std::to_string(r.j) + ',' + format_double(r.observed) + ",0," +
         format_double(r.ci_upper) + ',' + format_double(r.p_value) + ',' +
         std::to_string(r.n_reps) + ',' + (r.significant ? "1" : "0");
}

inline constexpr std::string_view classification_header =
    "shape,n,M,maxscale,c_max,n_bars,prop_short,prop_long";

inline std::string classification_row(const RowKey& key, const BarClassification& c) {
  return key_prefix(key) + ',' + format_double(c.c_max) + ',' + std::to_string(c.n_bars) + ',' +
         format_double(c.prop_short) + ',' + format_double(c.prop_long);
}

inline constexpr std::string_view percentile_header = "shape,n,M,maxscale,percentile,value";

}  // namespace phstat::io
