#include "areal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "areal/csv.hpp"
#include "areal/error.hpp"
#include "areal/geojson.hpp"
#include "areal/io.hpp"
#include "areal/rates.hpp"
#include "areal/rng.hpp"
#include "areal/stats.hpp"
#include "areal/text.hpp"

namespace areal {
namespace {

std::string padded(const char* prefix, int value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, value);
  return std::string(buf);
}

// Extra (non-alcohol) NAICS codes; none maps to an outlet type.
const std::vector<std::string>& extra_naics() {
  static const std::vector<std::string> codes = {"445110", "722511", "812112", "541110"};
  return codes;
}

const std::vector<std::string>& dv_primary_types() {
  static const std::vector<std::string> v = {"BATTERY", "ASSAULT"};
  return v;
}

const std::vector<std::string>& decoy_primary_types() {
  static const std::vector<std::string> v = {"THEFT", "BURGLARY", "ARSON"};
  return v;
}

const std::vector<std::string>& home_locations() {
  static const std::vector<std::string> v = {"Residence", "Apartment",
                                             "Driveway - Residential"};
  return v;
}

const std::vector<std::string>& street_locations() {
  static const std::vector<std::string> v = {"Street", "Sidewalk", "Restaurant"};
  return v;
}

std::string pick(Rng& rng, const std::vector<std::string>& options) {
  return options[static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(options.size()) - 1))];
}

}  // namespace

double FieldSpec::eval(double u, double v) const {
  switch (kind) {
    case Kind::constant:
      return value;
    case Kind::gradient: {
      const double norm = std::sqrt(dir_u * dir_u + dir_v * dir_v);
      if (!(norm > 0.0)) throw ValidationError("gradient field has zero direction");
      const double du = dir_u / norm;
      const double dv = dir_v / norm;
      double smin = 0.0;
      double smax = 0.0;
      bool first = true;
      for (double cu : {0.0, 1.0}) {
        for (double cv : {0.0, 1.0}) {
          const double s = cu * du + cv * dv;
          if (first || s < smin) smin = s;
          if (first || s > smax) smax = s;
          first = false;
        }
      }
      const double s = u * du + v * dv;
      const double t = (smax > smin) ? (s - smin) / (smax - smin) : 0.0;
      return lo + (hi - lo) * t;
    }
    case Kind::radial: {
      double dmax = 0.0;
      for (double cu : {0.0, 1.0}) {
        for (double cv : {0.0, 1.0}) {
          dmax = std::max(dmax, std::hypot(cu - center_u, cv - center_v));
        }
      }
      const double d = std::hypot(u - center_u, v - center_v);
      const double t = (dmax > 0.0) ? d / dmax : 0.0;
      return hi + (lo - hi) * t;
    }
  }
  throw ValidationError("unknown field kind");
}

SynthDataset generate(const SynthConfig& config) {
  if (config.grid_rows < 2 || config.grid_cols < 2) {
    throw ValidationError("grid must be at least 2x2");
  }
  if (config.grid_rows > 999 || config.grid_cols > 999) {
    throw ValidationError("grid dimension exceeds 999");
  }
  if (config.pop_min < 1 || config.pop_max < config.pop_min) {
    throw ValidationError("population range invalid");
  }
  if (config.pois_per_type < 1) throw ValidationError("pois_per_type must be >= 1");

  const int rows = config.grid_rows;
  const int cols = config.grid_cols;
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  Rng rng(config.seed);

  SynthDataset out;
  out.truth.seed = config.seed;

  // Grid cells in row-major order; zero-padded ids keep that order canonical.
  // Shared corners reuse the same origin + k*cell expression so adjacent
  // cells carry bit-identical vertex coordinates.
  std::vector<double> cell_u(n);
  std::vector<double> cell_v(n);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      const double lon_w = config.origin_lon + c * config.cell_deg;
      const double lon_e = config.origin_lon + (c + 1) * config.cell_deg;
      const double lat_s = config.origin_lat + r * config.cell_deg;
      const double lat_n = config.origin_lat + (r + 1) * config.cell_deg;
      CbgRecord rec;
      rec.cbg_id = padded("C", r, 3) + padded("", c, 3);
      rec.polygon.outer = {{lon_w, lat_s}, {lon_e, lat_s}, {lon_e, lat_n},
                           {lon_w, lat_n}, {lon_w, lat_s}};
      rec.population = rng.uniform_int(config.pop_min, config.pop_max);
      const double frac = rng.uniform(config.device_frac_min, config.device_frac_max);
      rec.device_count =
          std::max<std::int64_t>(1, std::llround(frac * static_cast<double>(rec.population)));
      rec.area_supplied = false;
      rec.area_km2 = 0.0;
      out.cbgs.rows.push_back(std::move(rec));
      cell_u[i] = (c + 0.5) / cols;
      cell_v[i] = (r + 0.5) / rows;
      out.truth.cbg_ids.push_back(out.cbgs.rows.back().cbg_id);
    }
  }

  // Plain socioeconomic variables.
  for (const SynthVariable& var : config.variables) {
    out.schema.variables.push_back({var.name, var.category});
    for (std::size_t i = 0; i < n; ++i) {
      double x = var.field.eval(cell_u[i], cell_v[i]);
      if (var.noise_sd > 0.0) x += rng.normal(0.0, var.noise_sd);
      out.cbgs.rows[i].attributes[var.name] = x;
    }
  }

  // Composition groups: positive intensities normalized to shares of 100,
  // with the reference share written as the exact complement.
  for (const SynthComposition& comp : config.compositions) {
    if (comp.names.size() < 2 || comp.fields.size() != comp.names.size() ||
        comp.noise_sd.size() != comp.names.size()) {
      throw ValidationError("composition group is malformed");
    }
    std::size_t ref_pos = comp.names.size();
    for (std::size_t k = 0; k < comp.names.size(); ++k) {
      out.schema.variables.push_back({comp.names[k], comp.category});
      if (comp.names[k] == comp.reference) ref_pos = k;
    }
    if (ref_pos == comp.names.size()) {
      throw ValidationError("composition reference '" + comp.reference +
                            "' is not in the group");
    }
    out.schema.composition_groups.push_back({comp.names, comp.reference});
    std::vector<double> intensity(comp.names.size());
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t k = 0; k < comp.names.size(); ++k) {
        double g = comp.fields[k].eval(cell_u[i], cell_v[i]);
        if (comp.noise_sd[k] > 0.0) g += rng.normal(0.0, comp.noise_sd[k]);
        intensity[k] = std::max(g, 0.01);
        total += intensity[k];
      }
      double others = 0.0;
      for (std::size_t k = 0; k < comp.names.size(); ++k) {
        if (k == ref_pos) continue;
        const double share = 100.0 * intensity[k] / total;
        out.cbgs.rows[i].attributes[comp.names[k]] = share;
        others += share;
      }
      out.cbgs.rows[i].attributes[comp.names[ref_pos]] = 100.0 - others;
    }
  }

  // POIs: pois_per_type per outlet type plus unrelated extras, uniform over
  // the grid interior.
  const double lon_span = cols * config.cell_deg;
  const double lat_span = rows * config.cell_deg;
  std::vector<std::string> naics_of_type(kOutletTypes.size());
  for (const auto& [code, type] : default_naics_map()) {
    naics_of_type[static_cast<std::size_t>(type)] = code;
  }
  std::vector<std::vector<std::string>> type_poi_ids(kOutletTypes.size());
  auto draw_point = [&](Point& loc) {
    loc.lon = config.origin_lon + lon_span * rng.uniform(0.02, 0.98);
    loc.lat = config.origin_lat + lat_span * rng.uniform(0.02, 0.98);
  };
  for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
    for (int j = 0; j < config.pois_per_type; ++j) {
      PoiRecord poi;
      poi.poi_id = padded(("P" + std::to_string(t) + "_").c_str(), j, 3);
      poi.naics = naics_of_type[t];
      poi.category_label = outlet_type_name(kOutletTypes[t]);
      draw_point(poi.location);
      type_poi_ids[t].push_back(poi.poi_id);
      out.pois.rows.push_back(std::move(poi));
    }
  }
  for (int j = 0; j < config.extra_pois; ++j) {
    PoiRecord poi;
    poi.poi_id = padded("PX_", j, 3);
    poi.naics = extra_naics()[static_cast<std::size_t>(j) % extra_naics().size()];
    poi.category_label = "other";
    draw_point(poi.location);
    out.pois.rows.push_back(std::move(poi));
  }

  // Intended visit rates per outlet type, realized as integer visitor
  // totals split across that type's POIs. Realized rate = total / devices,
  // so |realized - intended| <= 1 / (2 * devices).
  const std::vector<std::string> vr_names = visit_rate_variable_names();
  std::vector<std::vector<double>> realized_vr(kOutletTypes.size(),
                                               std::vector<double>(n, 0.0));
  for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
    const SynthVisitField& vf = config.visit_fields[t];
    std::vector<double>& intended = out.truth.intended_visit_rates[vr_names[t]];
    intended.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double rate = vf.field.eval(cell_u[i], cell_v[i]);
      if (vf.noise_sd > 0.0) rate += rng.normal(0.0, vf.noise_sd);
      rate = std::max(rate, 0.0);
      intended[i] = rate;
      const std::int64_t devices = out.cbgs.rows[i].device_count;
      const std::int64_t total = std::llround(rate * static_cast<double>(devices));
      realized_vr[t][i] = static_cast<double>(total) / static_cast<double>(devices);
      if (total <= 0) continue;
      const std::int64_t npois = static_cast<std::int64_t>(type_poi_ids[t].size());
      const std::int64_t base = total / npois;
      const std::int64_t rem = total % npois;
      for (std::int64_t j = 0; j < npois; ++j) {
        const std::int64_t count = base + (j < rem ? 1 : 0);
        if (count <= 0) continue;
        out.visits.rows.push_back({type_poi_ids[t][static_cast<std::size_t>(j)],
                                   out.cbgs.rows[i].cbg_id, count});
      }
    }
  }
  std::sort(out.visits.rows.begin(), out.visits.rows.end(),
            [](const VisitRecord& a, const VisitRecord& b) {
              return std::tie(a.poi_id, a.cbg_id) < std::tie(b.poi_id, b.cbg_id);
            });

  // Raw columns the coefficients may reference, exactly as the modeling
  // pipeline will see them.
  std::map<std::string, std::vector<double>> raw_columns;
  for (const auto& decl : out.schema.variables) {
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = out.cbgs.rows[i].attributes.at(decl.name);
    raw_columns[decl.name] = std::move(col);
  }
  {
    std::vector<double> density(n);
    for (std::size_t i = 0; i < n; ++i) {
      const CbgRecord& rec = out.cbgs.rows[i];
      density[i] = static_cast<double>(rec.population) / cbg_area_km2(rec);
    }
    raw_columns[std::string(kPopulationDensityVar)] = std::move(density);
  }
  for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
    raw_columns[vr_names[t]] = realized_vr[t];
  }

  auto standardized = [&](const std::string& name) {
    auto it = raw_columns.find(name);
    if (it == raw_columns.end()) {
      throw ValidationError("coefficient references unknown variable '" + name + "'");
    }
    const double m = mean_of(it->second);
    const double s = pop_std(it->second);
    if (!(s > 0.0)) throw ValidationError("variable '" + name + "' is constant");
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (it->second[i] - m) / s;
    return z;
  };

  // Outcome rates on standardized columns, then counts.
  std::vector<double> noiseless(n);
  for (std::size_t i = 0; i < n; ++i) {
    noiseless[i] = config.beta0.eval(cell_u[i], cell_v[i]);
  }
  out.truth.beta["intercept"] =
      std::vector<double>(noiseless.begin(), noiseless.end());
  for (const BetaSpec& spec : config.betas) {
    if (out.truth.beta.count(spec.variable)) {
      throw ValidationError("duplicate coefficient for '" + spec.variable + "'");
    }
    const std::vector<double> z = standardized(spec.variable);
    std::vector<double> field(n);
    for (std::size_t i = 0; i < n; ++i) {
      field[i] = spec.field.eval(cell_u[i], cell_v[i]);
      noiseless[i] += field[i] * z[i];
    }
    out.truth.beta[spec.variable] = std::move(field);
  }
  out.truth.rate_noiseless.resize(n);
  out.truth.rate_intended.resize(n);
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double rate = noiseless[i];
    if (config.noise_sd > 0.0) rate += rng.normal(0.0, config.noise_sd);
    if (rate < 0.0 || noiseless[i] < 0.0) ++clipped;
    out.truth.rate_noiseless[i] = std::max(noiseless[i], 0.0);
    out.truth.rate_intended[i] = std::max(rate, 0.0);
  }
  out.truth.clipped_units = clipped;
  if (static_cast<double>(clipped) > config.max_clip_fraction * static_cast<double>(n)) {
    throw ValidationError("negative-rate clipping hit " + fmt_int(clipped) + " of " +
                          fmt_int(n) + " units; lower coefficients or noise");
  }

  std::vector<std::int64_t> counts(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double expected = out.truth.rate_intended[i] *
                            static_cast<double>(out.cbgs.rows[i].population) / 1000.0;
    counts[i] = config.poisson_counts ? rng.poisson(expected) : std::llround(expected);
  }

  // True incidents: home-location DV events inside the owning cell, away
  // from shared edges so point-in-polygon assignment is unambiguous.
  int next_incident = 0;
  auto cell_point = [&](std::size_t i, Point& loc) {
    const int r = static_cast<int>(i) / cols;
    const int c = static_cast<int>(i) % cols;
    loc.lon = config.origin_lon + (c + rng.uniform(0.05, 0.95)) * config.cell_deg;
    loc.lat = config.origin_lat + (r + rng.uniform(0.05, 0.95)) * config.cell_deg;
  };
  std::int64_t total_true = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::int64_t k = 0; k < counts[i]; ++k) {
      IncidentRecord inc;
      inc.incident_id = padded("I", next_incident++, 6);
      inc.primary_type = pick(rng, dv_primary_types());
      inc.domestic = true;
      inc.location_description = pick(rng, home_locations());
      cell_point(i, inc.location);
      out.incidents.rows.push_back(std::move(inc));
      ++total_true;
    }
  }

  // Decoys cycle through the three rejection reasons: not domestic, not a
  // DV offense type, not a home location.
  const std::int64_t n_decoys =
      std::llround(config.decoy_fraction * static_cast<double>(total_true));
  for (std::int64_t d = 0; d < n_decoys; ++d) {
    IncidentRecord inc;
    inc.incident_id = padded("I", next_incident++, 6);
    const std::size_t cell = static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(n) - 1));
    switch (d % 3) {
      case 0:
        inc.primary_type = pick(rng, dv_primary_types());
        inc.domestic = false;
        inc.location_description = pick(rng, home_locations());
        break;
      case 1:
        inc.primary_type = pick(rng, decoy_primary_types());
        inc.domestic = true;
        inc.location_description = pick(rng, home_locations());
        break;
      default:
        inc.primary_type = pick(rng, dv_primary_types());
        inc.domestic = true;
        inc.location_description = pick(rng, street_locations());
        break;
    }
    cell_point(cell, inc.location);
    out.incidents.rows.push_back(std::move(inc));
  }

  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["seed"] = truth.seed;
  j["cbg_ids"] = truth.cbg_ids;
  j["beta"] = truth.beta;
  j["rate_noiseless"] = truth.rate_noiseless;
  j["rate_intended"] = truth.rate_intended;
  j["intended_visit_rates"] = truth.intended_visit_rates;
  j["clipped_units"] = truth.clipped_units;
  return j.dump(2) + "\n";
}

void write_dataset(const SynthDataset& dataset, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);

  std::vector<GeoFeature> features;
  features.reserve(dataset.cbgs.rows.size());
  for (const CbgRecord& rec : dataset.cbgs.rows) {
    GeoFeature f;
    f.properties["cbg_id"] = rec.cbg_id;
    f.properties["population"] = rec.population;
    f.properties["device_count"] = rec.device_count;
    for (const auto& [name, value] : rec.attributes) f.properties[name] = value;
    f.polygon = rec.polygon;
    features.push_back(std::move(f));
  }
  write_file(out_dir / "cbgs.geojson", feature_collection_to_string(features));

  {
    std::vector<std::vector<std::string>> rows;
    for (const PoiRecord& poi : dataset.pois.rows) {
      rows.push_back({poi.poi_id, poi.naics, fmt_double(poi.location.lon),
                      fmt_double(poi.location.lat), poi.category_label});
    }
    write_file(out_dir / "pois.csv",
               to_csv({"poi_id", "naics", "lon", "lat", "category_label"}, rows));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const VisitRecord& v : dataset.visits.rows) {
      rows.push_back({v.poi_id, v.cbg_id, fmt_int(v.visitor_count)});
    }
    write_file(out_dir / "visits.csv",
               to_csv({"poi_id", "cbg_id", "visitor_count"}, rows));
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const IncidentRecord& inc : dataset.incidents.rows) {
      rows.push_back({inc.incident_id, fmt_double(inc.location.lon),
                      fmt_double(inc.location.lat), inc.domestic ? "true" : "false",
                      inc.primary_type, inc.location_description});
    }
    write_file(out_dir / "incidents.csv",
               to_csv({"incident_id", "lon", "lat", "domestic", "primary_type",
                       "location_description"},
                      rows));
  }
  write_file(out_dir / "variables.json", variable_schema_to_string(dataset.schema));
  write_file(out_dir / "ground_truth.json", ground_truth_to_json(dataset.truth));
}

namespace {

using nlohmann::json;

json field_to_json(const FieldSpec& f) {
  switch (f.kind) {
    case FieldSpec::Kind::constant:
      return json{{"kind", "constant"}, {"value", f.value}};
    case FieldSpec::Kind::gradient:
      return json{{"kind", "gradient"}, {"lo", f.lo},       {"hi", f.hi},
                  {"dir_u", f.dir_u},   {"dir_v", f.dir_v}};
    case FieldSpec::Kind::radial:
      return json{{"kind", "radial"},       {"lo", f.lo},
                  {"hi", f.hi},             {"center_u", f.center_u},
                  {"center_v", f.center_v}};
  }
  throw ValidationError("unknown field kind");
}

FieldSpec field_from_json(const json& j, const std::string& context) {
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) {
    throw ValidationError(context + ": field needs a string 'kind'");
  }
  const std::string kind = j["kind"].get<std::string>();
  FieldSpec f;
  auto num = [&](const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) {
      throw ValidationError(context + ": '" + key + "' must be a number");
    }
    return j[key].get<double>();
  };
  if (kind == "constant") {
    f.kind = FieldSpec::Kind::constant;
    f.value = num("value", 0.0);
  } else if (kind == "gradient") {
    f.kind = FieldSpec::Kind::gradient;
    f.lo = num("lo", 0.0);
    f.hi = num("hi", 0.0);
    f.dir_u = num("dir_u", 1.0);
    f.dir_v = num("dir_v", 0.0);
  } else if (kind == "radial") {
    f.kind = FieldSpec::Kind::radial;
    f.lo = num("lo", 0.0);
    f.hi = num("hi", 0.0);
    f.center_u = num("center_u", 0.5);
    f.center_v = num("center_v", 0.5);
  } else {
    throw ValidationError(context + ": unknown field kind '" + kind + "'");
  }
  return f;
}

}  // namespace

nlohmann::json synth_config_to_json(const SynthConfig& cfg) {
  json j;
  j["grid_rows"] = cfg.grid_rows;
  j["grid_cols"] = cfg.grid_cols;
  j["cell_deg"] = cfg.cell_deg;
  j["origin_lon"] = cfg.origin_lon;
  j["origin_lat"] = cfg.origin_lat;
  j["seed"] = cfg.seed;
  j["pop_min"] = cfg.pop_min;
  j["pop_max"] = cfg.pop_max;
  j["device_frac_min"] = cfg.device_frac_min;
  j["device_frac_max"] = cfg.device_frac_max;
  j["pois_per_type"] = cfg.pois_per_type;
  j["extra_pois"] = cfg.extra_pois;
  json vars = json::array();
  for (const SynthVariable& v : cfg.variables) {
    vars.push_back(json{{"name", v.name},
                        {"category", var_category_name(v.category)},
                        {"field", field_to_json(v.field)},
                        {"noise_sd", v.noise_sd}});
  }
  j["variables"] = std::move(vars);
  json comps = json::array();
  for (const SynthComposition& c : cfg.compositions) {
    json fields = json::array();
    for (const FieldSpec& f : c.fields) fields.push_back(field_to_json(f));
    comps.push_back(json{{"names", c.names},
                         {"category", var_category_name(c.category)},
                         {"fields", std::move(fields)},
                         {"noise_sd", c.noise_sd},
                         {"reference", c.reference}});
  }
  j["compositions"] = std::move(comps);
  json visits;
  for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
    visits[outlet_type_name(kOutletTypes[t])] =
        json{{"field", field_to_json(cfg.visit_fields[t].field)},
             {"noise_sd", cfg.visit_fields[t].noise_sd}};
  }
  j["visit_fields"] = std::move(visits);
  j["beta0"] = field_to_json(cfg.beta0);
  json betas = json::array();
  for (const BetaSpec& b : cfg.betas) {
    betas.push_back(json{{"variable", b.variable}, {"field", field_to_json(b.field)}});
  }
  j["betas"] = std::move(betas);
  j["noise_sd"] = cfg.noise_sd;
  j["decoy_fraction"] = cfg.decoy_fraction;
  j["poisson_counts"] = cfg.poisson_counts;
  j["max_clip_fraction"] = cfg.max_clip_fraction;
  return j;
}

SynthConfig synth_config_from_json(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ValidationError(origin + ": spec must be an object");

  SynthConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j["preset"].is_string() ? j["preset"].get<std::string>() : "";
    const std::uint64_t seed =
        j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
    if (preset == "paper-like") {
      cfg = scenario_paper_like(seed);
    } else if (preset == "heterogeneous") {
      cfg = scenario_heterogeneous(seed);
    } else {
      throw ValidationError(origin + ": unknown preset '" + preset + "'");
    }
  }

  try {
    auto opt_num = [&](const char* key, double& slot) {
      if (j.contains(key)) slot = j.at(key).get<double>();
    };
    auto opt_int = [&](const char* key, int& slot) {
      if (j.contains(key)) slot = j.at(key).get<int>();
    };
    auto opt_i64 = [&](const char* key, std::int64_t& slot) {
      if (j.contains(key)) slot = j.at(key).get<std::int64_t>();
    };
    opt_int("grid_rows", cfg.grid_rows);
    opt_int("grid_cols", cfg.grid_cols);
    opt_num("cell_deg", cfg.cell_deg);
    opt_num("origin_lon", cfg.origin_lon);
    opt_num("origin_lat", cfg.origin_lat);
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    opt_i64("pop_min", cfg.pop_min);
    opt_i64("pop_max", cfg.pop_max);
    opt_num("device_frac_min", cfg.device_frac_min);
    opt_num("device_frac_max", cfg.device_frac_max);
    opt_int("pois_per_type", cfg.pois_per_type);
    opt_int("extra_pois", cfg.extra_pois);
    opt_num("noise_sd", cfg.noise_sd);
    opt_num("decoy_fraction", cfg.decoy_fraction);
    if (j.contains("poisson_counts")) {
      cfg.poisson_counts = j.at("poisson_counts").get<bool>();
    }
    opt_num("max_clip_fraction", cfg.max_clip_fraction);

    if (j.contains("variables")) {
      cfg.variables.clear();
      for (const json& v : j.at("variables")) {
        SynthVariable var;
        var.name = v.at("name").get<std::string>();
        var.category = var_category_from_name(v.at("category").get<std::string>());
        var.field = field_from_json(v.at("field"), origin + ": variable '" + var.name + "'");
        var.noise_sd = v.value("noise_sd", 0.0);
        cfg.variables.push_back(std::move(var));
      }
    }
    if (j.contains("compositions")) {
      cfg.compositions.clear();
      for (const json& c : j.at("compositions")) {
        SynthComposition comp;
        comp.names = c.at("names").get<std::vector<std::string>>();
        comp.category = var_category_from_name(c.at("category").get<std::string>());
        for (const json& f : c.at("fields")) {
          comp.fields.push_back(field_from_json(f, origin + ": composition field"));
        }
        comp.noise_sd = c.at("noise_sd").get<std::vector<double>>();
        comp.reference = c.at("reference").get<std::string>();
        cfg.compositions.push_back(std::move(comp));
      }
    }
    if (j.contains("visit_fields")) {
      for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
        const char* name = outlet_type_name(kOutletTypes[t]);
        if (!j.at("visit_fields").contains(name)) continue;
        const json& vf = j.at("visit_fields").at(name);
        cfg.visit_fields[t].field =
            field_from_json(vf.at("field"), origin + ": visit field '" + name + "'");
        cfg.visit_fields[t].noise_sd = vf.value("noise_sd", 0.0);
      }
    }
    if (j.contains("beta0")) {
      cfg.beta0 = field_from_json(j.at("beta0"), origin + ": beta0");
    }
    if (j.contains("betas")) {
      cfg.betas.clear();
      for (const json& b : j.at("betas")) {
        BetaSpec spec;
        spec.variable = b.at("variable").get<std::string>();
        spec.field =
            field_from_json(b.at("field"), origin + ": beta '" + spec.variable + "'");
        cfg.betas.push_back(std::move(spec));
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(origin + ": malformed generator spec: " + e.what());
  }
  return cfg;
}

SynthConfig scenario_paper_like(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.grid_rows = 20;
  cfg.grid_cols = 20;
  cfg.cell_deg = 0.01;
  cfg.origin_lon = -87.9;
  cfg.origin_lat = 41.6;
  cfg.pop_min = 500;
  cfg.pop_max = 3000;
  cfg.pois_per_type = 12;
  cfg.extra_pois = 15;

  auto gradient = [](double lo, double hi, double du, double dv) {
    FieldSpec f;
    f.kind = FieldSpec::Kind::gradient;
    f.lo = lo;
    f.hi = hi;
    f.dir_u = du;
    f.dir_v = dv;
    return f;
  };
  auto radial = [](double lo, double hi, double cu, double cv) {
    FieldSpec f;
    f.kind = FieldSpec::Kind::radial;
    f.lo = lo;
    f.hi = hi;
    f.center_u = cu;
    f.center_v = cv;
    return f;
  };
  auto constant = [](double value) {
    FieldSpec f;
    f.kind = FieldSpec::Kind::constant;
    f.value = value;
    return f;
  };

  cfg.variables = {
      {"med_income", VarCategory::disadvantage, gradient(30000, 90000, 1.0, 0.3), 4000},
      {"pct_unemployment", VarCategory::disadvantage, radial(3, 15, 0.3, 0.7), 1.0},
      // Near-duplicate of pct_unemployment; exists to trip the collinearity
      // pruning stage.
      {"pct_assistance", VarCategory::disadvantage, radial(3, 15, 0.3, 0.7), 0.35},
      {"pct_renter_hh", VarCategory::instability, gradient(20, 80, 0.0, 1.0), 5.0},
      {"pct_stay_ge5yrs", VarCategory::instability, gradient(30, 80, 0.0, -1.0), 5.0},
      {"pct_age_lt18", VarCategory::age, constant(22), 3.0},
      {"pct_age_gt60", VarCategory::age, gradient(10, 28, 1.0, -0.5), 2.0},
  };
  SynthComposition race;
  race.names = {"pct_white", "pct_black", "pct_other_races"};
  race.category = VarCategory::race;
  race.fields = {gradient(2, 8, 1.0, 0.0), gradient(8, 2, 1.0, 0.0), constant(1.5)};
  race.noise_sd = {0.4, 0.4, 0.15};
  race.reference = "pct_other_races";
  cfg.compositions = {race};

  cfg.visit_fields[0] = {radial(0.05, 0.7, 0.35, 0.6), 0.05};   // liquor_store
  cfg.visit_fields[1] = {gradient(0.02, 0.5, 0.7, 0.7), 0.04};  // drinking_place
  cfg.visit_fields[2] = {radial(0.01, 0.35, 0.8, 0.2), 0.03};   // brewery
  cfg.visit_fields[3] = {constant(0.15), 0.06};                 // winery: null effect

  cfg.beta0 = constant(5.0);
  cfg.betas = {
      {"liquor_store_vr", constant(2.0)},
      {"drinking_place_vr", constant(-1.0)},
      {"brewery_vr", constant(-0.6)},
      {"med_income", constant(-0.8)},
      {"pct_renter_hh", constant(0.5)},
      {"pct_unemployment", constant(0.4)},
  };
  cfg.noise_sd = 0.8;
  cfg.decoy_fraction = 0.35;
  return cfg;
}

SynthConfig scenario_heterogeneous(std::uint64_t seed) {
  SynthConfig cfg = scenario_paper_like(seed);
  FieldSpec beta_liquor;
  beta_liquor.kind = FieldSpec::Kind::gradient;
  beta_liquor.lo = 3.2;   // strong in the west,
  beta_liquor.hi = -0.4;  // sign-flipped in the east
  beta_liquor.dir_u = 1.0;
  beta_liquor.dir_v = 0.0;
  FieldSpec beta_income;
  beta_income.kind = FieldSpec::Kind::gradient;
  beta_income.lo = -2.2;  // protective in the south,
  beta_income.hi = 0.2;   // absent in the north
  beta_income.dir_u = 0.0;
  beta_income.dir_v = 1.0;
  FieldSpec beta_drinking;
  beta_drinking.kind = FieldSpec::Kind::gradient;
  beta_drinking.lo = -2.0;  // strong in the west,
  beta_drinking.hi = 0.0;   // absent in the east
  beta_drinking.dir_u = 1.0;
  beta_drinking.dir_v = 0.0;
  FieldSpec beta0;
  beta0.kind = FieldSpec::Kind::gradient;
  beta0.lo = 3.5;
  beta0.hi = 8.0;
  beta0.dir_u = 1.0;
  beta0.dir_v = 1.0;
  cfg.beta0 = beta0;
  for (BetaSpec& spec : cfg.betas) {
    if (spec.variable == "liquor_store_vr") spec.field = beta_liquor;
    if (spec.variable == "med_income") spec.field = beta_income;
    if (spec.variable == "drinking_place_vr") spec.field = beta_drinking;
  }
  cfg.noise_sd = 0.8;
  return cfg;
}

}  // namespace areal
