#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gliderdec/domain.hpp"
#include "gliderdec/inversion.hpp"
#include "gliderdec/navigation.hpp"
#include "gliderdec/simulator.hpp"
#include "gliderdec/statespace.hpp"

namespace gliderdec {

/// Malformed text input. line and column are 1-based and point at the
/// offending token; the message names the field or key.
struct ParseError : std::runtime_error {
  ParseError(const std::string& what, int line_, int column_)
      : std::runtime_error(what), line(line_), column(column_) {}
  int line;
  int column;
};

/// Scenario description as key = value lines: '#' comments, dotted keys for
/// the current profiles (current_descent.depth = 0, 250 and so on), unknown
/// or repeated keys rejected. Values that fail to parse raise ParseError at
/// their position. Feasibility is not judged here; the generator does that.
ScenarioSpec read_scenario_file(const std::string& path);

/// Processing settings for a single run. method is one of invert, joint,
/// both; plots toggles SVG emission.
struct RunSettings {
  std::string method = "both";
  bool plots = false;
  InversionConfig inversion;
  StateSpaceConfig statespace;
};

/// Same key = value format: method, plots, inversion.<field>,
/// statespace.<field>. Lists are rejected here; use the sweep reader for
/// grids. Missing file entries keep defaults.
RunSettings read_run_config_file(const std::string& path);

/// One swept processing parameter: a config key plus the values it takes.
struct SweepAxis {
  std::string key;
  std::vector<double> values;
};

/// Sweep grids reuse the run-config format; every numeric inversion.* or
/// statespace.* key given a comma list becomes an axis, scalar keys set the
/// base configuration. The grid is the cartesian product in file order.
struct SweepConfig {
  RunSettings base;
  std::vector<SweepAxis> axes;
};
SweepConfig read_sweep_config_file(const std::string& path);

/// Applies one config key to the settings; shared by the readers and the
/// sweep runner. Throws ParseError (with the given position) on unknown
/// keys or unparseable values.
void apply_run_setting(RunSettings& rs, const std::string& key,
                       const std::string& value, int line, int column);

// --- dive bundle -----------------------------------------------------------
// One directory of UTF-8 CSVs: adcp.csv, ttw.csv, depth.csv, gps.csv. The
// archival writers use 17 significant digits so values round-trip exactly;
// gps.csv may alternatively carry lat_deg/lon_deg columns, converted by the
// equirectangular projection about the start fix at load.

void write_dive_bundle(const DiveRecord& dive, const std::string& dir);

/// Parses the four files; throws ParseError naming file, field, line and
/// column. Returns the raw record without invariant checking so a caller
/// can report validate_dive violations in bulk.
DiveRecord read_dive_bundle(const std::string& dir);

/// truth_profile.csv and truth_states.csv next to the bundle, 17 significant
/// digits. Branch columns repeat the mean profile when the truth field is
/// time-constant.
void write_truth_files(const SyntheticDive& sd, const std::string& dir);

/// Reads truth_profile.csv back (for scoring tools and tests).
CurrentProfileEstimate read_truth_profile(const std::string& path);

// --- result files ----------------------------------------------------------
// Result writers serialize at 9 significant digits and refuse non-finite
// values outright.

void write_profile_csv(const CurrentProfileEstimate& p, const std::string& path);
void write_trajectory_csv(const Trajectory& tr, const std::string& path);

/// Per-method residual norms and condition estimates; pass null for a
/// method that did not run. At least one must be present.
void write_residuals_json(const InversionResult* invert,
                          const StateSpaceResult* joint,
                          const std::string& path);

struct ComparisonSummary {
  std::optional<double> correlation_u;  // set when both methods ran
  std::optional<double> correlation_v;
  double dead_vs_avg = 0.0;  // m, max horizontal offset
  std::optional<double> dead_vs_adcp;
  std::optional<double> avg_vs_adcp;
};
void write_comparison_json(const ComparisonSummary& cs, const std::string& path);

/// Pearson correlation of two equal-length series; needs at least two
/// samples and nonzero variance in each.
double pearson_correlation(const std::vector<double>& a,
                           const std::vector<double>& b);

}  // namespace gliderdec
