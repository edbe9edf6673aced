#pragma once

#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "girf/engine.hpp"
#include "girf/mcap.hpp"
#include "girf/model.hpp"
#include "girf/models/measles.hpp"
#include "girf/simulate.hpp"
#include "girf/time_grid.hpp"

namespace girf {

/// Shortest text of a double with 17 significant digits ("%.17g");
/// non-finite values print as nan, inf, -inf.
std::string format_real(double v);

/// Parses a real written by format_real (or any strtod-compatible text).
/// Throws ConfigError on trailing garbage.
double parse_real(std::string_view s);

/// RFC-4180 field quoting: fields holding a comma, quote, CR or LF are
/// wrapped in quotes with embedded quotes doubled.
std::string csv_quote(std::string_view field);

/// Writes RFC-4180 records terminated by CRLF.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void row(const std::vector<std::string>& fields);
  void close();

 private:
  std::string path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a named column; throws ConfigError when absent.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;
};

/// Parses RFC-4180 text (LF or CRLF records, quoted fields). The first
/// record is the header; every row must have as many fields.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::string& path);

/// n, t, y_1..y_d per observation.
void write_observations_csv(const std::string& path, const std::vector<double>& times,
                            const ObservationSeries& data);

struct LoadedObservations {
  std::vector<double> times;
  ObservationSeries data;
};

/// Reads a file written by write_observations_csv; y columns are taken in
/// header order. Throws ConfigError when the dimension differs from `dim`.
LoadedObservations read_observations_csv(const std::string& path, std::size_t dim);

/// k, t, x_1..x_d per grid point.
void write_latent_csv(const std::string& path, const TimeGrid& grid, const Matrix& latent);

/// replicate, n, s, t, cond_loglik, ess per grid step of each run.
void write_filter_csv(const std::string& path, const TimeGrid& grid, const std::vector<FilterOutput>& runs);

/// replicate, n, t, m_1..m_d filter means at the observation times.
void write_filter_means_csv(const std::string& path, const std::vector<double>& times,
                            const std::vector<Matrix>& means);

/// phi, loglik, replicate.
void write_profile_csv(const std::string& path, const ProfilePoints& points);
ProfilePoints read_profile_csv(const std::string& path);

/// phi, smoothed loglik over a regular grid of the profile range.
void write_smoothed_csv(const std::string& path, const LocalQuadraticSmoother& curve, std::size_t points,
                        PhiTransform transform);

/// city, population, latitude, longitude.
void write_cities_csv(const std::string& path, const MeaslesNetwork& network);
/// year, city, births.
void write_births_csv(const std::string& path, const MeaslesNetwork& network);
/// Builds a network from the two files above; distances are great-circle.
MeaslesNetwork read_measles_network(const std::string& cities_path, const std::string& births_path);

/// date, city, cases in long format; date is the decimal-year time.
void write_cases_csv(const std::string& path, const MeaslesNetwork& network, const std::vector<double>& times,
                     const ObservationSeries& data);
/// Reads long-format cases; every (date, city) pair must be present once.
LoadedObservations read_cases_csv(const std::string& path, const MeaslesNetwork& network);

/// Whole-file helpers.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace girf
