#include "girf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "girf/errors.hpp"

namespace girf {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(std::string_view s) {
  if (s == "nan" || s == "NaN") return std::nan("");
  if (s == "inf" || s == "Inf") return INFINITY;
  if (s == "-inf" || s == "-Inf") return -INFINITY;
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ConfigError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw ConfigError("cannot open '" + path + "' for writing");
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out_ << ',';
    out_ << csv_quote(fields[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw ConfigError("failed writing '" + path_ + "'");
}

std::size_t CsvTable::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ConfigError("csv: missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

bool CsvTable::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++i;
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw ConfigError("csv: unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();

  CsvTable table;
  if (records.empty()) throw ConfigError("csv: empty file");
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (records[r].size() != table.header.size()) {
      throw ConfigError("csv: record " + std::to_string(r + 1) + " has " + std::to_string(records[r].size()) +
                        " fields, header has " + std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text_file(path)); }

void write_observations_csv(const std::string& path, const std::vector<double>& times,
                            const ObservationSeries& data) {
  CsvWriter w(path);
  std::vector<std::string> header{"n", "t"};
  for (std::size_t i = 1; i <= data.dim(); ++i) header.push_back("y_" + std::to_string(i));
  w.row(header);
  for (std::size_t n = 1; n <= data.size(); ++n) {
    std::vector<std::string> row{std::to_string(n), format_real(times[n - 1])};
    for (double v : data.at(n)) row.push_back(format_real(v));
    w.row(row);
  }
  w.close();
}

LoadedObservations read_observations_csv(const std::string& path, std::size_t dim) {
  const CsvTable table = read_csv(path);
  const std::size_t tcol = table.column("t");
  std::vector<std::size_t> ycols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (table.header[c].rfind("y_", 0) == 0) ycols.push_back(c);
  }
  if (ycols.size() != dim) {
    throw ConfigError("observations '" + path + "' have " + std::to_string(ycols.size()) +
                      " y columns, model expects " + std::to_string(dim));
  }
  LoadedObservations out{{}, ObservationSeries(table.rows.size(), dim)};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out.times.push_back(parse_real(table.rows[r][tcol]));
    auto y = out.data.at(r + 1);
    for (std::size_t i = 0; i < dim; ++i) y[i] = parse_real(table.rows[r][ycols[i]]);
  }
  return out;
}

void write_latent_csv(const std::string& path, const TimeGrid& grid, const Matrix& latent) {
  CsvWriter w(path);
  std::vector<std::string> header{"k", "t"};
  for (std::size_t i = 1; i <= latent.cols(); ++i) header.push_back("x_" + std::to_string(i));
  w.row(header);
  for (std::size_t k = 0; k < latent.rows(); ++k) {
    std::vector<std::string> row{std::to_string(k), format_real(grid.time(k))};
    for (double v : latent.row(k)) row.push_back(format_real(v));
    w.row(row);
  }
  w.close();
}

void write_filter_csv(const std::string& path, const TimeGrid& grid, const std::vector<FilterOutput>& runs) {
  CsvWriter w(path);
  w.row({"replicate", "n", "s", "t", "cond_loglik", "ess"});
  for (std::size_t r = 0; r < runs.size(); ++r) {
    const auto& out = runs[r];
    for (std::size_t k = 1; k <= out.cond_loglik.size(); ++k) {
      // Runs with a forced S (bootstrap, APF) use their own step count.
      const std::size_t S = out.steps_per_interval;
      const std::size_t n = (k - 1) / S;
      const std::size_t s = (k - 1) % S + 1;
      const double t = S == grid.steps_per_interval() ? grid.time(k)
                       : s == S                      ? grid.obs_time(n + 1)
                                                     : grid.obs_time(n) + (grid.obs_time(n + 1) - grid.obs_time(n)) *
                                                                              static_cast<double>(s) /
                                                                              static_cast<double>(S);
      const double e = k <= out.ess.size() ? out.ess[k - 1] : std::nan("");
      w.row({std::to_string(r), std::to_string(n), std::to_string(s), format_real(t),
             format_real(out.cond_loglik[k - 1]), format_real(e)});
    }
  }
  w.close();
}

void write_filter_means_csv(const std::string& path, const std::vector<double>& times,
                            const std::vector<Matrix>& means) {
  CsvWriter w(path);
  std::vector<std::string> header{"replicate", "n", "t"};
  const std::size_t d = means.empty() ? 0 : means.front().cols();
  for (std::size_t i = 1; i <= d; ++i) header.push_back("m_" + std::to_string(i));
  w.row(header);
  for (std::size_t r = 0; r < means.size(); ++r) {
    for (std::size_t n = 0; n < means[r].rows(); ++n) {
      std::vector<std::string> row{std::to_string(r), std::to_string(n + 1), format_real(times[n])};
      for (double v : means[r].row(n)) row.push_back(format_real(v));
      w.row(row);
    }
  }
  w.close();
}

void write_profile_csv(const std::string& path, const ProfilePoints& points) {
  CsvWriter w(path);
  w.row({"phi", "loglik", "replicate"});
  for (std::size_t i = 0; i < points.phi.size(); ++i) {
    const int rep = i < points.replicate.size() ? points.replicate[i] : 0;
    w.row({format_real(points.phi[i]), format_real(points.loglik[i]), std::to_string(rep)});
  }
  w.close();
}

ProfilePoints read_profile_csv(const std::string& path) {
  const CsvTable table = read_csv(path);
  const std::size_t pc = table.column("phi");
  const std::size_t lc = table.column("loglik");
  const bool has_rep = table.has_column("replicate");
  ProfilePoints out;
  for (const auto& row : table.rows) {
    out.phi.push_back(parse_real(row[pc]));
    out.loglik.push_back(parse_real(row[lc]));
    if (has_rep) out.replicate.push_back(static_cast<int>(parse_real(row[table.column("replicate")])));
  }
  return out;
}

void write_smoothed_csv(const std::string& path, const LocalQuadraticSmoother& curve, std::size_t points,
                        PhiTransform transform) {
  CsvWriter w(path);
  w.row({"phi", "smoothed_loglik"});
  const double lo = curve.lower(), hi = curve.upper();
  for (std::size_t g = 0; g < points; ++g) {
    const double u = points > 1 ? lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1) : lo;
    double phi = u;
    if (transform == PhiTransform::kSqrt) phi = u * u;
    if (transform == PhiTransform::kLog) phi = std::exp(u);
    w.row({format_real(phi), format_real(curve(u))});
  }
  w.close();
}

void write_cities_csv(const std::string& path, const MeaslesNetwork& network) {
  CsvWriter w(path);
  w.row({"city", "population", "latitude", "longitude"});
  for (const auto& c : network.cities) {
    w.row({c.name, format_real(c.population), format_real(c.latitude), format_real(c.longitude)});
  }
  w.close();
}

void write_births_csv(const std::string& path, const MeaslesNetwork& network) {
  CsvWriter w(path);
  w.row({"year", "city", "births"});
  for (std::size_t y = 0; y < network.births.rows(); ++y) {
    for (std::size_t k = 0; k < network.size(); ++k) {
      w.row({std::to_string(network.first_birth_year + static_cast<int>(y)), network.cities[k].name,
             format_real(network.births(y, k))});
    }
  }
  w.close();
}

MeaslesNetwork read_measles_network(const std::string& cities_path, const std::string& births_path) {
  MeaslesNetwork net;
  const CsvTable cities = read_csv(cities_path);
  const std::size_t nc = cities.column("city"), pc = cities.column("population"),
                    lac = cities.column("latitude"), loc = cities.column("longitude");
  std::map<std::string, std::size_t> index;
  for (const auto& row : cities.rows) {
    if (!index.emplace(row[nc], net.cities.size()).second) {
      throw ConfigError("cities: duplicate city '" + row[nc] + "'");
    }
    net.cities.push_back({row[nc], parse_real(row[pc]), parse_real(row[lac]), parse_real(row[loc])});
  }
  if (net.cities.empty()) throw ConfigError("cities: no rows");

  const CsvTable births = read_csv(births_path);
  const std::size_t yc = births.column("year"), bc = births.column("city"), vc = births.column("births");
  int first = 0, last = 0;
  bool any = false;
  for (const auto& row : births.rows) {
    const int year = static_cast<int>(parse_real(row[yc]));
    first = any ? std::min(first, year) : year;
    last = any ? std::max(last, year) : year;
    any = true;
  }
  if (!any) throw ConfigError("births: no rows");
  net.first_birth_year = first;
  net.births = Matrix(static_cast<std::size_t>(last - first + 1), net.size());
  std::vector<char> seen(net.births.rows() * net.size(), 0);
  for (const auto& row : births.rows) {
    auto it = index.find(row[bc]);
    if (it == index.end()) throw ConfigError("births: unknown city '" + row[bc] + "'");
    const auto y = static_cast<std::size_t>(static_cast<int>(parse_real(row[yc])) - first);
    net.births(y, it->second) = parse_real(row[vc]);
    seen[y * net.size() + it->second] = 1;
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ConfigError("births: every city needs a value for every year in the covered range");
  }
  compute_distances(net);
  return net;
}

void write_cases_csv(const std::string& path, const MeaslesNetwork& network, const std::vector<double>& times,
                     const ObservationSeries& data) {
  CsvWriter w(path);
  w.row({"date", "city", "cases"});
  for (std::size_t n = 1; n <= data.size(); ++n) {
    const auto y = data.at(n);
    for (std::size_t k = 0; k < network.size(); ++k) {
      w.row({format_real(times[n - 1]), network.cities[k].name, format_real(y[k])});
    }
  }
  w.close();
}

LoadedObservations read_cases_csv(const std::string& path, const MeaslesNetwork& network) {
  const CsvTable table = read_csv(path);
  const std::size_t dc = table.column("date"), cc = table.column("city"), vc = table.column("cases");
  std::map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < network.size(); ++k) index.emplace(network.cities[k].name, k);
  std::map<double, std::vector<double>> by_date;
  std::map<double, std::size_t> counts;
  for (const auto& row : table.rows) {
    const double t = parse_real(row[dc]);
    auto it = index.find(row[cc]);
    if (it == index.end()) throw ConfigError("cases: unknown city '" + row[cc] + "'");
    auto& v = by_date[t];
    if (v.empty()) v.assign(network.size(), std::nan(""));
    if (!std::isnan(v[it->second])) throw ConfigError("cases: duplicate entry for '" + row[cc] + "'");
    v[it->second] = parse_real(row[vc]);
    ++counts[t];
  }
  LoadedObservations out{{}, ObservationSeries(by_date.size(), network.size())};
  std::size_t n = 1;
  for (const auto& [t, v] : by_date) {
    if (counts[t] != network.size()) throw ConfigError("cases: missing cities at date " + format_real(t));
    out.times.push_back(t);
    std::copy(v.begin(), v.end(), out.data.at(n).begin());
    ++n;
  }
  return out;
}

}  // namespace girf
