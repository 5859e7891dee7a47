#include "areal/rates.hpp"

#include <algorithm>
#include <cmath>

#include "areal/csv.hpp"
#include "areal/text.hpp"

namespace areal {

double cbg_area_km2(const CbgRecord& rec) {
  if (rec.area_supplied) return rec.area_km2;
  // Local equirectangular projection around the shell's mean latitude:
  // lon degrees shrink by cos(lat), then the planar shoelace area applies.
  double lat_sum = 0.0;
  for (const Point& p : rec.polygon.outer) lat_sum += p.lat;
  const double lat_ref = lat_sum / static_cast<double>(rec.polygon.outer.size());
  const double km_per_deg = kEarthRadiusM * M_PI / 180.0 / 1000.0;
  const double cos_ref = std::cos(lat_ref * M_PI / 180.0);

  auto ring_area = [&](const Ring& ring) {
    double acc = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      acc += ring[j].lon * cos_ref * ring[i].lat - ring[i].lon * cos_ref * ring[j].lat;
    }
    return std::fabs(acc / 2.0) * km_per_deg * km_per_deg;
  };
  double area = ring_area(rec.polygon.outer);
  for (const auto& hole : rec.polygon.holes) area -= ring_area(hole);
  return area;
}

double dv_rate_value(std::int64_t incident_count, std::int64_t population) {
  if (population <= 0) {
    throw NumericError("dv_rate requires positive population");
  }
  return 1000.0 * static_cast<double>(incident_count) /
         static_cast<double>(population);
}

double visit_rate_value(std::int64_t visitor_sum, std::int64_t device_count) {
  if (device_count <= 0) {
    throw NumericError("visit rate requires positive device count");
  }
  return static_cast<double>(visitor_sum) / static_cast<double>(device_count);
}

VisitSums reverse_visits(const VisitTable& visits,
                         const std::vector<OutletPoi>& outlets,
                         const CbgTable& cbgs) {
  std::map<std::string, std::size_t> outlet_index;
  for (const auto& o : outlets) {
    outlet_index[o.poi.poi_id] = static_cast<std::size_t>(o.type);
  }
  VisitSums sums;
  for (const auto& v : visits.rows) {
    const auto it = outlet_index.find(v.poi_id);
    if (it == outlet_index.end()) {
      ++sums.skipped_non_outlet;
      continue;
    }
    if (cbgs.find(v.cbg_id) == nullptr) {
      ++sums.skipped_unknown_cbg;
      continue;
    }
    auto& cell = sums.by_cbg[v.cbg_id];
    cell[it->second] += v.visitor_count;
  }
  return sums;
}

std::size_t RateTable::index_of(const std::string& cbg_id) const {
  const auto it = std::lower_bound(
      rows.begin(), rows.end(), cbg_id,
      [](const RateRow& r, const std::string& id) { return r.cbg_id < id; });
  if (it == rows.end() || it->cbg_id != cbg_id) {
    throw ValidationError("rates: unknown cbg_id '" + cbg_id + "'");
  }
  return static_cast<std::size_t>(it - rows.begin());
}

RateTable derive_rates(const CbgTable& cbgs, const std::vector<OutletPoi>& outlets,
                       const VisitTable& visits, const IncidentTable& dv_incidents,
                       const RateOptions& opts) {
  std::vector<Point> pts;
  pts.reserve(dv_incidents.rows.size());
  for (const auto& inc : dv_incidents.rows) pts.push_back(inc.location);
  std::vector<Polygon> polys;
  polys.reserve(cbgs.rows.size());
  for (const auto& rec : cbgs.rows) polys.push_back(rec.polygon);

  const AssignmentResult assigned = assign_points(pts, polys);
  const VisitSums sums = reverse_visits(visits, outlets, cbgs);

  RateTable out;
  out.assigned_incidents = pts.size() - assigned.unassigned;
  out.unassigned_incidents = assigned.unassigned;

  for (std::size_t i = 0; i < cbgs.rows.size(); ++i) {
    const CbgRecord& rec = cbgs.rows[i];
    const std::int64_t count = static_cast<std::int64_t>(assigned.counts[i]);

    std::string reason;
    if (rec.population < opts.min_pop) {
      reason = "population " + fmt_int(rec.population) + " below minimum " +
               fmt_int(opts.min_pop);
    } else if (rec.device_count < opts.min_devices) {
      reason = "device_count " + fmt_int(rec.device_count) + " below minimum " +
               fmt_int(opts.min_devices);
    }
    const double area = cbg_area_km2(rec);
    if (reason.empty() && !(area > 0.0)) reason = "nonpositive area";
    if (!reason.empty()) {
      out.excluded.push_back({rec.cbg_id, reason, count > 0});
      continue;
    }

    RateRow row;
    row.cbg_id = rec.cbg_id;
    row.dv_rate = dv_rate_value(count, rec.population);
    const auto it = sums.by_cbg.find(rec.cbg_id);
    for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
      const std::int64_t visitors = it == sums.by_cbg.end() ? 0 : it->second[t];
      row.visit_rate[t] = visit_rate_value(visitors, rec.device_count);
    }
    row.population_density = static_cast<double>(rec.population) / area;
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> rate_csv_header() {
  std::vector<std::string> header = {"cbg_id", "dv_rate"};
  for (const auto& name : visit_rate_variable_names()) header.push_back(name);
  header.push_back(kPopulationDensityVar);
  return header;
}

std::string rate_table_to_csv(const RateTable& rates) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(rates.rows.size());
  for (const auto& r : rates.rows) {
    std::vector<std::string> row = {r.cbg_id, fmt_double(r.dv_rate)};
    for (std::size_t t = 0; t < kOutletTypes.size(); ++t) {
      row.push_back(fmt_double(r.visit_rate[t]));
    }
    row.push_back(fmt_double(r.population_density));
    rows.push_back(std::move(row));
  }
  return to_csv(rate_csv_header(), rows);
}

RateTable rate_table_from_csv(const std::string& text, const std::string& origin) {
  const CsvTable csv = parse_csv(text, origin);
  RateTable out;
  const std::size_t c_id = csv.col("cbg_id");
  const std::size_t c_rate = csv.col("dv_rate");
  const std::size_t c_dens = csv.col(kPopulationDensityVar);
  std::vector<std::size_t> c_vr;
  for (const auto& name : visit_rate_variable_names()) c_vr.push_back(csv.col(name));

  for (const auto& row : csv.rows) {
    if (row.size() != csv.header.size()) {
      throw ValidationError(origin + ": ragged rate row");
    }
    RateRow r;
    r.cbg_id = row[c_id];
    if (!try_parse_double(row[c_rate], r.dv_rate) ||
        !try_parse_double(row[c_dens], r.population_density)) {
      throw ValidationError(origin + ": non-numeric rate for '" + r.cbg_id + "'");
    }
    for (std::size_t t = 0; t < c_vr.size(); ++t) {
      if (!try_parse_double(row[c_vr[t]], r.visit_rate[t])) {
        throw ValidationError(origin + ": non-numeric visit rate for '" + r.cbg_id + "'");
      }
    }
    out.rows.push_back(std::move(r));
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const RateRow& a, const RateRow& b) { return a.cbg_id < b.cbg_id; });
  return out;
}

VarCategory category_of(const std::string& name, const VariableSchema& schema) {
  if (name == kPopulationDensityVar) return VarCategory::urbanicity;
  for (const auto& vr : visit_rate_variable_names()) {
    if (name == vr) return VarCategory::visits;
  }
  for (const auto& decl : schema.variables) {
    if (decl.name == name) return decl.category;
  }
  throw ValidationError("variable '" + name + "' is not declared in the schema");
}

std::size_t FeatureMatrix::col_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  throw ValidationError("feature matrix has no column '" + name + "'");
}

arma::mat FeatureMatrix::raw() const {
  arma::mat out = values;
  out.each_row() %= col_scale.t();
  out.each_row() += col_mean.t();
  return out;
}

std::vector<std::string> FeatureMatrix::column_names() const {
  std::vector<std::string> names;
  names.reserve(columns.size());
  for (const auto& c : columns) names.push_back(c.name);
  return names;
}

FeatureMatrix assemble_features(const CbgTable& cbgs, const RateTable& rates,
                                const std::vector<std::string>& variables,
                                const VariableSchema& schema, bool include_visits) {
  if (rates.rows.empty()) {
    throw ValidationError("assemble_features: no eligible units");
  }
  std::vector<std::string> all_vars = variables;
  if (include_visits) {
    for (const auto& name : visit_rate_variable_names()) all_vars.push_back(name);
  }
  if (all_vars.empty()) {
    throw ValidationError("assemble_features: empty variable list");
  }

  const std::size_t n = rates.rows.size();
  const std::size_t p = all_vars.size();

  FeatureMatrix fm;
  fm.row_ids.reserve(n);
  fm.values.set_size(n, p);
  fm.target.set_size(n);

  const auto vr_names = visit_rate_variable_names();
  for (std::size_t j = 0; j < p; ++j) {
    const std::string& name = all_vars[j];
    fm.columns.push_back({name, category_of(name, schema)});
    if (std::count(all_vars.begin(), all_vars.end(), name) > 1) {
      throw ValidationError("assemble_features: variable '" + name + "' repeated");
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const RateRow& rr = rates.rows[i];
    const CbgRecord* rec = cbgs.find(rr.cbg_id);
    if (!rec) {
      throw ValidationError("assemble_features: rate row '" + rr.cbg_id +
                            "' missing from unit table");
    }
    fm.row_ids.push_back(rr.cbg_id);
    fm.target(i) = rr.dv_rate;
    for (std::size_t j = 0; j < p; ++j) {
      const std::string& name = all_vars[j];
      double v = 0.0;
      if (name == kPopulationDensityVar) {
        v = rr.population_density;
      } else {
        bool is_vr = false;
        for (std::size_t t = 0; t < vr_names.size(); ++t) {
          if (name == vr_names[t]) {
            v = rr.visit_rate[t];
            is_vr = true;
            break;
          }
        }
        if (!is_vr) {
          const auto it = rec->attributes.find(name);
          if (it == rec->attributes.end()) {
            throw ValidationError("assemble_features: unit '" + rr.cbg_id +
                                  "' lacks attribute '" + name + "'");
          }
          v = it->second;
        }
      }
      fm.values(i, j) = v;
    }
  }

  // Standardize in place with the population convention (denominator n) so a
  // standardized column has mean 0 and standard deviation exactly 1.
  fm.col_mean.set_size(p);
  fm.col_scale.set_size(p);
  for (std::size_t j = 0; j < p; ++j) {
    const double m = arma::mean(fm.values.col(j));
    const double sd = std::sqrt(
        arma::accu(arma::square(fm.values.col(j) - m)) / static_cast<double>(n));
    if (!(sd > 0.0)) {
      throw ValidationError("assemble_features: column '" + all_vars[j] +
                            "' is constant");
    }
    fm.col_mean(j) = m;
    fm.col_scale(j) = sd;
    fm.values.col(j) = (fm.values.col(j) - m) / sd;
  }
  return fm;
}

}  // namespace areal
