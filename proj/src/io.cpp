#include "gliderdec/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace gliderdec {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string fmt_sig(double x, const char* spec) {
  if (!std::isfinite(x)) throw std::logic_error("non-finite value in output");
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, x);
  return buf;
}

std::string fmt17(double x) { return fmt_sig(x, "%.17g"); }
std::string fmt9(double x) { return fmt_sig(x, "%.9g"); }

/// Rounds through the 9-significant-digit text form so JSON numbers match
/// the CSV serialization rule.
double round9(double x) {
  return std::strtod(fmt9(x).c_str(), nullptr);
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ParseError("cannot open " + path, 1, 1);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("short write to " + path);
}

double parse_number(const std::string& text, const std::string& what,
                    int line, int col) {
  const std::string t = trim(text);
  if (t.empty()) throw ParseError(what + ": empty value", line, col);
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw ParseError(what + ": '" + t + "' is not a finite number", line, col);
  return v;
}

long parse_integer(const std::string& text, const std::string& what,
                   int line, int col) {
  const std::string t = trim(text);
  char* end = nullptr;
  const long v = std::strtol(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size())
    throw ParseError(what + ": '" + t + "' is not an integer", line, col);
  return v;
}

bool parse_bool(const std::string& text, const std::string& what,
                int line, int col) {
  const std::string t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParseError(what + ": '" + t + "' is not a boolean", line, col);
}

struct KeyValue {
  std::string key;
  std::string value;
  int line;       // 1-based
  int col_value;  // 1-based start of the value text
};

/// key = value lines; '#' starts a comment; keys must be unique.
std::vector<KeyValue> parse_key_values(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<KeyValue> out;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string line = lines[i];
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError("expected key = value", static_cast<int>(i + 1), 1);
    KeyValue kv;
    kv.key = trim(line.substr(0, eq));
    kv.value = trim(line.substr(eq + 1));
    kv.line = static_cast<int>(i + 1);
    std::size_t vs = eq + 1;
    while (vs < line.size() && std::isspace(static_cast<unsigned char>(line[vs])))
      ++vs;
    kv.col_value = static_cast<int>(vs + 1);
    if (kv.key.empty())
      throw ParseError("empty key", kv.line, 1);
    if (kv.value.empty())
      throw ParseError("key '" + kv.key + "' has no value", kv.line, kv.col_value);
    const auto ins = seen.emplace(kv.key, kv.line);
    if (!ins.second)
      throw ParseError("key '" + kv.key + "' repeats (first at line " +
                           std::to_string(ins.first->second) + ")",
                       kv.line, 1);
    out.push_back(std::move(kv));
  }
  return out;
}

std::vector<double> parse_number_list(const KeyValue& kv) {
  std::vector<double> out;
  std::stringstream ss(kv.value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(parse_number(item, "key '" + kv.key + "'", kv.line, kv.col_value));
  if (out.empty())
    throw ParseError("key '" + kv.key + "': empty list", kv.line, kv.col_value);
  return out;
}

// --- CSV helpers -----------------------------------------------------------

struct CsvField {
  std::string text;
  int col;  // 1-based character offset of the field start
};

std::vector<CsvField> split_csv(const std::string& line) {
  std::vector<CsvField> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string::npos ? line.size() : comma;
    out.push_back({trim(line.substr(start, end - start)),
                   static_cast<int>(start + 1)});
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

struct CsvTable {
  std::string file;
  std::vector<std::string> header;
  std::vector<std::vector<CsvField>> rows;  // data rows
  std::vector<int> row_lines;               // matching 1-based line numbers
};

CsvTable read_csv(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trim(lines[0]).empty())
    throw ParseError(path + ": missing header row", 1, 1);
  CsvTable t;
  t.file = path;
  for (const CsvField& f : split_csv(lines[0])) t.header.push_back(f.text);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    t.rows.push_back(split_csv(lines[i]));
    t.row_lines.push_back(static_cast<int>(i + 1));
    if (t.rows.back().size() != t.header.size())
      throw ParseError(path + ": row has " +
                           std::to_string(t.rows.back().size()) +
                           " fields, header has " +
                           std::to_string(t.header.size()),
                       t.row_lines.back(), 1);
  }
  return t;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want) {
  if (t.header != want) {
    std::string w;
    for (std::size_t i = 0; i < want.size(); ++i)
      w += (i ? "," : "") + want[i];
    throw ParseError(t.file + ": header must be '" + w + "'", 1, 1);
  }
}

double num_at(const CsvTable& t, std::size_t row, std::size_t col) {
  return parse_number(t.rows[row][col].text,
                      t.file + ": field '" + t.header[col] + "'",
                      t.row_lines[row], t.rows[row][col].col);
}

// --- scenario keys ---------------------------------------------------------

void apply_scenario_key(ScenarioSpec& s, const KeyValue& kv) {
  const std::string& k = kv.key;
  auto num = [&] {
    return parse_number(kv.value, "scenario key '" + k + "'", kv.line,
                        kv.col_value);
  };
  if (k == "dive_duration") s.dive_duration = num();
  else if (k == "max_depth") s.max_depth = num();
  else if (k == "descent_rate") s.descent_rate = num();
  else if (k == "ascent_rate") s.ascent_rate = num();
  else if (k == "bottom_gap") s.bottom_gap = num();
  else if (k == "ttw_speed") s.ttw_speed = num();
  else if (k == "heading_deg") s.heading_deg = num();
  else if (k == "heading_rate_deg_per_s") s.heading_rate_deg_per_s = num();
  else if (k == "ping_interval") s.ping_interval = num();
  else if (k == "bin_size") s.bin_size = num();
  else if (k == "bins_per_ping")
    s.bins_per_ping = static_cast<int>(
        parse_integer(kv.value, "scenario key '" + k + "'", kv.line, kv.col_value));
  else if (k == "blanking_distance") s.blanking_distance = num();
  else if (k == "facing") {
    if (kv.value == "up") s.facing = AdcpFacing::Up;
    else if (kv.value == "down") s.facing = AdcpFacing::Down;
    else
      throw ParseError("scenario key 'facing': '" + kv.value +
                           "' is neither up nor down",
                       kv.line, kv.col_value);
  } else if (k == "noise_adcp") s.noise_adcp = num();
  else if (k == "noise_ttw") s.noise_ttw = num();
  else if (k == "seed")
    s.seed = static_cast<std::uint64_t>(
        parse_integer(kv.value, "scenario key '" + k + "'", kv.line, kv.col_value));
  else if (k == "start_east") s.start_east = num();
  else if (k == "start_north") s.start_north = num();
  else if (k == "sample_dt") s.sample_dt = num();
  else if (k == "current_descent.depth") s.current_descent.depth = parse_number_list(kv);
  else if (k == "current_descent.u") s.current_descent.u = parse_number_list(kv);
  else if (k == "current_descent.v") s.current_descent.v = parse_number_list(kv);
  else if (k == "current_ascent.depth") s.current_ascent.depth = parse_number_list(kv);
  else if (k == "current_ascent.u") s.current_ascent.u = parse_number_list(kv);
  else if (k == "current_ascent.v") s.current_ascent.v = parse_number_list(kv);
  else
    throw ParseError("unknown scenario key '" + k + "'", kv.line, 1);
}

}  // namespace

ScenarioSpec read_scenario_file(const std::string& path) {
  ScenarioSpec s;
  for (const KeyValue& kv : parse_key_values(path)) apply_scenario_key(s, kv);
  return s;
}

void apply_run_setting(RunSettings& rs, const std::string& key,
                       const std::string& value, int line, int column) {
  auto num = [&] {
    return parse_number(value, "config key '" + key + "'", line, column);
  };
  if (key == "method") {
    if (value != "invert" && value != "joint" && value != "both")
      throw ParseError("config key 'method': '" + value +
                           "' is not invert, joint or both",
                       line, column);
    rs.method = value;
  } else if (key == "plots") {
    rs.plots = parse_bool(value, "config key 'plots'", line, column);
  } else if (key == "inversion.dz") rs.inversion.dz = num();
  else if (key == "inversion.sigma_adcp") rs.inversion.sigma_adcp = num();
  else if (key == "inversion.sigma_ttw") rs.inversion.sigma_ttw = num();
  else if (key == "inversion.sigma_gps") rs.inversion.sigma_gps = num();
  else if (key == "inversion.lambda_g") rs.inversion.lambda_g = num();
  else if (key == "inversion.lambda_o") rs.inversion.lambda_o = num();
  else if (key == "inversion.bottom_match_weight")
    rs.inversion.bottom_match_weight = num();
  else if (key == "inversion.two_profile") {
    if (value == "auto") rs.inversion.two_profile.reset();
    else
      rs.inversion.two_profile =
          parse_bool(value, "config key '" + key + "'", line, column);
  } else if (key == "inversion.smoothing_target") {
    if (value == "otg") rs.inversion.smoothing_target = SmoothingTarget::Otg;
    else if (value == "ttw_residual")
      rs.inversion.smoothing_target = SmoothingTarget::TtwResidual;
    else
      throw ParseError("config key '" + key + "': '" + value +
                           "' is neither otg nor ttw_residual",
                       line, column);
  } else if (key == "statespace.dz") rs.statespace.dz = num();
  else if (key == "statespace.sigma_accel") rs.statespace.sigma_accel = num();
  else if (key == "statespace.sigma_pos_gps") rs.statespace.sigma_pos_gps = num();
  else if (key == "statespace.sigma_x0_pos") rs.statespace.sigma_x0_pos = num();
  else if (key == "statespace.sigma_x0_vel") rs.statespace.sigma_x0_vel = num();
  else if (key == "statespace.eta1") rs.statespace.eta1 = num();
  else if (key == "statespace.eta2") rs.statespace.eta2 = num();
  else if (key == "statespace.eta3") rs.statespace.eta3 = num();
  else
    throw ParseError("unknown config key '" + key + "'", line, 1);
}

RunSettings read_run_config_file(const std::string& path) {
  RunSettings rs;
  for (const KeyValue& kv : parse_key_values(path))
    apply_run_setting(rs, kv.key, kv.value, kv.line, kv.col_value);
  return rs;
}

SweepConfig read_sweep_config_file(const std::string& path) {
  SweepConfig sc;
  for (const KeyValue& kv : parse_key_values(path)) {
    const bool sweepable = kv.key.rfind("inversion.", 0) == 0 ||
                           kv.key.rfind("statespace.", 0) == 0;
    if (sweepable && kv.value.find(',') != std::string::npos) {
      sc.axes.push_back({kv.key, parse_number_list(kv)});
      // validate the key itself against the first value
      RunSettings probe = sc.base;
      apply_run_setting(probe, kv.key, fmt17(sc.axes.back().values.front()),
                        kv.line, kv.col_value);
    } else {
      apply_run_setting(sc.base, kv.key, kv.value, kv.line, kv.col_value);
    }
  }
  return sc;
}

// --- dive bundle -----------------------------------------------------------

void write_dive_bundle(const DiveRecord& dive, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::string t = "time_s,depth_m,u_rel_mps,v_rel_mps,ping,cast\n";
    const AdcpObservationSet& a = dive.adcp;
    for (std::size_t i = 0; i < a.size(); ++i) {
      t += fmt17(a.t[i]) + "," + fmt17(a.z[i]) + "," + fmt17(a.u_rel[i]) +
           "," + fmt17(a.v_rel[i]) + "," + std::to_string(a.ping_index[i]) +
           "," + (a.cast_label[i] == Cast::Descent ? "D" : "A") + "\n";
    }
    write_text(dir + "/adcp.csv", t);
  }
  {
    std::string t = "time_s,u_ttw_mps,v_ttw_mps\n";
    for (std::size_t i = 0; i < dive.ttw.t.size(); ++i)
      t += fmt17(dive.ttw.t[i]) + "," + fmt17(dive.ttw.u_ttw[i]) + "," +
           fmt17(dive.ttw.v_ttw[i]) + "\n";
    write_text(dir + "/ttw.csv", t);
  }
  {
    std::string t = "time_s,depth_m\n";
    for (std::size_t i = 0; i < dive.depth.t.size(); ++i)
      t += fmt17(dive.depth.t[i]) + "," + fmt17(dive.depth.z[i]) + "\n";
    write_text(dir + "/depth.csv", t);
  }
  {
    std::string t = "role,time_s,east_m,north_m\n";
    t += "start," + fmt17(dive.gps_start.time) + "," +
         fmt17(dive.gps_start.east) + "," + fmt17(dive.gps_start.north) + "\n";
    t += "end," + fmt17(dive.gps_end.time) + "," + fmt17(dive.gps_end.east) +
         "," + fmt17(dive.gps_end.north) + "\n";
    write_text(dir + "/gps.csv", t);
  }
}

DiveRecord read_dive_bundle(const std::string& dir) {
  DiveRecord dive;
  {
    const CsvTable t = read_csv(dir + "/adcp.csv");
    expect_header(t, {"time_s", "depth_m", "u_rel_mps", "v_rel_mps", "ping",
                      "cast"});
    AdcpObservationSet& a = dive.adcp;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      a.t.push_back(num_at(t, r, 0));
      a.z.push_back(num_at(t, r, 1));
      a.u_rel.push_back(num_at(t, r, 2));
      a.v_rel.push_back(num_at(t, r, 3));
      a.ping_index.push_back(static_cast<int>(
          parse_integer(t.rows[r][4].text, t.file + ": field 'ping'",
                        t.row_lines[r], t.rows[r][4].col)));
      const std::string& c = t.rows[r][5].text;
      if (c == "D") a.cast_label.push_back(Cast::Descent);
      else if (c == "A") a.cast_label.push_back(Cast::Ascent);
      else
        throw ParseError(t.file + ": field 'cast': '" + c +
                             "' is neither D nor A",
                         t.row_lines[r], t.rows[r][5].col);
    }
  }
  {
    const CsvTable t = read_csv(dir + "/ttw.csv");
    expect_header(t, {"time_s", "u_ttw_mps", "v_ttw_mps"});
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      dive.ttw.t.push_back(num_at(t, r, 0));
      dive.ttw.u_ttw.push_back(num_at(t, r, 1));
      dive.ttw.v_ttw.push_back(num_at(t, r, 2));
    }
  }
  {
    const CsvTable t = read_csv(dir + "/depth.csv");
    expect_header(t, {"time_s", "depth_m"});
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      dive.depth.t.push_back(num_at(t, r, 0));
      dive.depth.z.push_back(num_at(t, r, 1));
    }
  }
  {
    const CsvTable t = read_csv(dir + "/gps.csv");
    const bool latlon = t.header ==
        std::vector<std::string>{"role", "time_s", "lat_deg", "lon_deg"};
    if (!latlon)
      expect_header(t, {"role", "time_s", "east_m", "north_m"});
    bool got_start = false, got_end = false;
    double lat0 = 0.0, lon0 = 0.0;
    // first pass locates the start fix to anchor the projection
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      if (t.rows[r][0].text == "start") {
        lat0 = num_at(t, r, 2);
        lon0 = num_at(t, r, 3);
      }
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const std::string& role = t.rows[r][0].text;
      GpsFix fix;
      fix.time = num_at(t, r, 1);
      if (latlon) {
        latlon_to_local(num_at(t, r, 2), num_at(t, r, 3), lat0, lon0,
                        fix.east, fix.north);
      } else {
        fix.east = num_at(t, r, 2);
        fix.north = num_at(t, r, 3);
      }
      if (role == "start") {
        if (got_start)
          throw ParseError(t.file + ": duplicate start fix", t.row_lines[r], 1);
        dive.gps_start = fix;
        got_start = true;
      } else if (role == "end") {
        if (got_end)
          throw ParseError(t.file + ": duplicate end fix", t.row_lines[r], 1);
        dive.gps_end = fix;
        got_end = true;
      } else {
        throw ParseError(t.file + ": field 'role': '" + role +
                             "' is neither start nor end",
                         t.row_lines[r], t.rows[r][0].col);
      }
    }
    if (!got_start || !got_end)
      throw ParseError(t.file + ": needs one start and one end fix", 1, 1);
  }
  return dive;
}

void write_truth_files(const SyntheticDive& sd, const std::string& dir) {
  fs::create_directories(dir);
  {
    const CurrentProfileEstimate& p = sd.truth_profile;
    const bool two = p.form == ProfileForm::TwoProfile;
    std::string t =
        "depth_m,u_mps,v_mps,u_desc_mps,v_desc_mps,u_asc_mps,v_asc_mps,"
        "coverage\n";
    for (std::size_t l = 0; l < p.z_hat.size(); ++l) {
      const double ud = two ? p.u_descent[l] : p.u[l];
      const double vd = two ? p.v_descent[l] : p.v[l];
      const double ua = two ? p.u_ascent[l] : p.u[l];
      const double va = two ? p.v_ascent[l] : p.v[l];
      t += fmt17(p.z_hat[l]) + "," + fmt17(p.u[l]) + "," + fmt17(p.v[l]) +
           "," + fmt17(ud) + "," + fmt17(vd) + "," + fmt17(ua) + "," +
           fmt17(va) + "," + std::to_string(p.coverage[l]) + "\n";
    }
    write_text(dir + "/truth_profile.csv", t);
  }
  {
    std::string t = "time_s,east_m,north_m,u_otg_mps,v_otg_mps\n";
    for (std::size_t k = 0; k < sd.truth_t.size(); ++k)
      t += fmt17(sd.truth_t[k]) + "," + fmt17(sd.truth_east[k]) + "," +
           fmt17(sd.truth_north[k]) + "," + fmt17(sd.truth_u_otg[k]) + "," +
           fmt17(sd.truth_v_otg[k]) + "\n";
    write_text(dir + "/truth_states.csv", t);
  }
}

CurrentProfileEstimate read_truth_profile(const std::string& path) {
  const CsvTable t = read_csv(path);
  expect_header(t, {"depth_m", "u_mps", "v_mps", "u_desc_mps", "v_desc_mps",
                    "u_asc_mps", "v_asc_mps", "coverage"});
  CurrentProfileEstimate p;
  bool branches_differ = false;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    p.z_hat.push_back(num_at(t, r, 0));
    p.u.push_back(num_at(t, r, 1));
    p.v.push_back(num_at(t, r, 2));
    p.u_descent.push_back(num_at(t, r, 3));
    p.v_descent.push_back(num_at(t, r, 4));
    p.u_ascent.push_back(num_at(t, r, 5));
    p.v_ascent.push_back(num_at(t, r, 6));
    p.coverage.push_back(static_cast<int>(
        parse_integer(t.rows[r][7].text, t.file + ": field 'coverage'",
                      t.row_lines[r], t.rows[r][7].col)));
    if (p.u_descent.back() != p.u.back() || p.v_descent.back() != p.v.back())
      branches_differ = true;
  }
  if (branches_differ) {
    p.form = ProfileForm::TwoProfile;
    p.coverage_descent = p.coverage;
    p.coverage_ascent = p.coverage;
  } else {
    p.form = ProfileForm::Single;
    p.u_descent.clear();
    p.v_descent.clear();
    p.u_ascent.clear();
    p.v_ascent.clear();
  }
  return p;
}

// --- result files ----------------------------------------------------------

void write_profile_csv(const CurrentProfileEstimate& p, const std::string& path) {
  const bool two = p.form == ProfileForm::TwoProfile;
  std::string t = "depth_m,u_mps,v_mps,coverage";
  if (two)
    t += ",u_desc_mps,v_desc_mps,coverage_desc,u_asc_mps,v_asc_mps,"
         "coverage_asc";
  t += "\n";
  for (std::size_t l = 0; l < p.z_hat.size(); ++l) {
    t += fmt9(p.z_hat[l]) + "," + fmt9(p.u[l]) + "," + fmt9(p.v[l]) + "," +
         std::to_string(p.coverage[l]);
    if (two)
      t += "," + fmt9(p.u_descent[l]) + "," + fmt9(p.v_descent[l]) + "," +
           std::to_string(p.coverage_descent[l]) + "," +
           fmt9(p.u_ascent[l]) + "," + fmt9(p.v_ascent[l]) + "," +
           std::to_string(p.coverage_ascent[l]);
    t += "\n";
  }
  write_text(path, t);
}

void write_trajectory_csv(const Trajectory& tr, const std::string& path) {
  std::string t = "time_s,east_m,north_m\n";
  for (std::size_t k = 0; k < tr.t.size(); ++k)
    t += fmt9(tr.t[k]) + "," + fmt9(tr.east[k]) + "," + fmt9(tr.north[k]) +
         "\n";
  write_text(path, t);
}

namespace {

ordered_json residual_json(const std::vector<BlockResidual>& blocks,
                           double condition) {
  ordered_json j;
  j["condition_estimate"] = round9(condition);
  ordered_json arr = ordered_json::array();
  for (const BlockResidual& b : blocks) {
    ordered_json e;
    e["label"] = b.label;
    e["rows"] = b.rows;
    e["rms_u"] = round9(b.rms_u);
    e["rms_v"] = round9(b.rms_v);
    arr.push_back(std::move(e));
  }
  j["blocks"] = std::move(arr);
  return j;
}

}  // namespace

void write_residuals_json(const InversionResult* invert,
                          const StateSpaceResult* joint,
                          const std::string& path) {
  if (!invert && !joint)
    throw std::logic_error("write_residuals_json: nothing to write");
  ordered_json j;
  if (invert)
    j["invert"] = residual_json(invert->residuals, invert->condition_estimate);
  if (joint)
    j["joint"] = residual_json(joint->residuals, joint->condition_estimate);
  write_text(path, j.dump(2) + "\n");
}

void write_comparison_json(const ComparisonSummary& cs, const std::string& path) {
  ordered_json j;
  if (cs.correlation_u) j["correlation_u"] = round9(*cs.correlation_u);
  if (cs.correlation_v) j["correlation_v"] = round9(*cs.correlation_v);
  ordered_json off;
  off["dead_vs_avg"] = round9(cs.dead_vs_avg);
  if (cs.dead_vs_adcp) off["dead_vs_adcp"] = round9(*cs.dead_vs_adcp);
  if (cs.avg_vs_adcp) off["avg_vs_adcp"] = round9(*cs.avg_vs_adcp);
  j["max_horizontal_offset_m"] = std::move(off);
  write_text(path, j.dump(2) + "\n");
}

double pearson_correlation(const std::vector<double>& a,
                           const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pearson_correlation: length mismatch");
  const std::size_t n = a.size();
  if (n < 2)
    throw std::invalid_argument("pearson_correlation: needs two samples");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
    sab += (a[i] - ma) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0)
    throw std::invalid_argument("pearson_correlation: a series is constant");
  return sab / std::sqrt(saa * sbb);
}

}  // namespace gliderdec
