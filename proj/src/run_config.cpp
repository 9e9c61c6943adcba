#include "tdbem/run_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tdbem {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw ConfigError(msg.str());
}

std::vector<double> parse_numbers(const std::string& v) {
  std::istringstream is(v);
  std::vector<double> out;
  double x;
  while (is >> x) out.push_back(x);
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (geometry != "sphere" && geometry != "icosahedron" && geometry != "screen")
    throw ConfigError("config: geometry must be sphere, icosahedron or screen");
  if (refine < 0) throw ConfigError("config: refine must be >= 0");
  if (geometry == "screen" && screen_n < 1) throw ConfigError("config: n must be >= 1");
  if (dt <= 0.0) throw ConfigError("config: dt must be > 0");
  if (t_final <= 0.0) throw ConfigError("config: t_final must be > 0");
  if (temporal_degree != 0 && temporal_degree != 1)
    throw ConfigError("config: q must be 0 or 1");
  if (tolerance <= 0.0) throw ConfigError("config: tolerance must be > 0");
  if (max_iterations < 1) throw ConfigError("config: max_iterations must be >= 1");
  if (solvers.empty()) throw ConfigError("config: at least one solver mode required");
  for (const auto& s : solvers)
    if (s != "gmres" && s != "pgmres" && s != "standalone")
      throw ConfigError("config: unknown solver mode '" + s + "'");
  if (enrichment_count < 0) throw ConfigError("config: enrichment count must be >= 0");
  if (enrichment_count > 0 && temporal_degree != 1)
    throw ConfigError("config: enrichment requires q = 1");
  if (!enrichment_vectors.empty() && enrichment_vectors.size() != enrichment_phases.size())
    throw ConfigError("config: enrichment vectors/phases length mismatch");
  if (density_error != "auto" && density_error != "true" && density_error != "false")
    throw ConfigError("config: density_error must be auto, true or false");
  if (pressure_points.size() > 0 && pressure_times.empty())
    throw ConfigError("config: pressure points given without times");
  if (threads < 1) throw ConfigError("config: threads must be >= 1");
  quad.validate();
}

RunConfig parse_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  RunConfig cfg;
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(path, lineno, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(path, lineno, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail(path, lineno, "empty key");

    auto as_double = [&](const std::string& v) {
      try {
        size_t pos;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
      } catch (...) {
        fail(path, lineno, "field '" + key + "': not a number: '" + v + "'");
      }
    };
    auto as_int = [&](const std::string& v) {
      double d = as_double(v);
      return static_cast<int>(d);
    };
    auto as_bool = [&](const std::string& v) {
      if (v == "true" || v == "1" || v == "on") return true;
      if (v == "false" || v == "0" || v == "off") return false;
      fail(path, lineno, "field '" + key + "': not a boolean: '" + v + "'");
    };
    auto as_vec3 = [&](const std::string& v) {
      auto nums = parse_numbers(v);
      if (nums.size() != 3) fail(path, lineno, "field '" + key + "': expected 3 numbers");
      return Eigen::Vector3d(nums[0], nums[1], nums[2]);
    };

    const std::string id = section.empty() ? key : section + "." + key;
    if (id == "geometry.kind") cfg.geometry = value;
    else if (id == "geometry.refine") cfg.refine = as_int(value);
    else if (id == "geometry.n") cfg.screen_n = as_int(value);
    else if (id == "time.dt") cfg.dt = as_double(value);
    else if (id == "time.t_final") cfg.t_final = as_double(value);
    else if (id == "time.q") cfg.temporal_degree = as_int(value);
    else if (id == "rhs.preset") cfg.rhs_preset = value;
    else if (id == "rhs.k_f") cfg.k_f_override = as_vec3(value);
    else if (id == "solver.tolerance") cfg.tolerance = as_double(value);
    else if (id == "solver.max_iterations") cfg.max_iterations = as_int(value);
    else if (id == "solver.modes") {
      cfg.solvers.clear();
      std::istringstream is(value);
      std::string tok;
      while (is >> tok) cfg.solvers.push_back(tok);
    } else if (id == "quadrature.outer_degree") cfg.quad.outer_degree = as_int(value);
    else if (id == "quadrature.radial_order") cfg.quad.radial_order = as_int(value);
    else if (id == "quadrature.angular_order") cfg.quad.angular_order = as_int(value);
    else if (id == "quadrature.grading_ratio") cfg.quad.grading_ratio = as_double(value);
    else if (id == "quadrature.grading_depth") cfg.quad.grading_depth = as_int(value);
    else if (id == "quadrature.rhs_time_order") cfg.quad.rhs_time_order = as_int(value);
    else if (id == "quadrature.rhs_space_degree") cfg.quad.rhs_space_degree = as_int(value);
    else if (id == "quadrature.time_order") cfg.quad.time_order = as_int(value);
    else if (id == "quadrature.oracle_depth") cfg.quad.oracle_depth = as_int(value);
    else if (id == "quadrature.outer_refine_depth") cfg.quad.outer_refine_depth = as_int(value);
    else if (id == "quadrature.outer_span_fraction")
      cfg.quad.outer_span_fraction = as_double(value);
    else if (id == "quadrature.radial_rule") {
      if (value == "graded-gauss") cfg.quad.radial_rule = RadialRule::graded_gauss;
      else if (value == "analytic") cfg.quad.radial_rule = RadialRule::analytic;
      else fail(path, lineno, "radial_rule must be graded-gauss or analytic");
    } else if (id == "enrichment.count") cfg.enrichment_count = as_int(value);
    else if (id == "enrichment.wave_number") cfg.wave_number = as_double(value);
    else if (id == "enrichment.vector") {
      auto nums = parse_numbers(value);
      if (nums.size() != 4) fail(path, lineno, "enrichment vector: expected kx ky kz sigma");
      cfg.enrichment_vectors.emplace_back(nums[0], nums[1], nums[2]);
      cfg.enrichment_phases.push_back(nums[3]);
    } else if (id == "pressure.point") cfg.pressure_points.push_back(as_vec3(value));
    else if (id == "pressure.times") cfg.pressure_times = parse_numbers(value);
    else if (id == "output.directory") cfg.output_dir = value;
    else if (id == "output.band_cache") cfg.band_cache = as_bool(value);
    else if (id == "output.cache_dir") cfg.cache_dir = value;
    else if (id == "output.density_error") cfg.density_error = value;
    else if (id == "output.threads") cfg.threads = as_int(value);
    else fail(path, lineno, "unknown field '" + id + "'");
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

std::string config_to_string(const RunConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "geometry=" << cfg.geometry << ";refine=" << cfg.refine << ";n=" << cfg.screen_n
     << ";dt=" << cfg.dt << ";t_final=" << cfg.t_final << ";q=" << cfg.temporal_degree
     << ";rhs=" << cfg.rhs_preset;
  if (cfg.k_f_override)
    os << ";k_f=" << cfg.k_f_override->transpose();
  os << ";quad=" << cfg.quad.outer_degree << "," << cfg.quad.radial_order << ","
     << cfg.quad.angular_order << "," << cfg.quad.grading_ratio << "," << cfg.quad.grading_depth
     << "," << (cfg.quad.radial_rule == RadialRule::analytic ? "analytic" : "graded-gauss") << ","
     << cfg.quad.rhs_time_order << "," << cfg.quad.rhs_space_degree << ","
     << cfg.quad.time_order << "," << cfg.quad.outer_refine_depth << ","
     << cfg.quad.outer_span_fraction;
  os << ";enrichment=" << cfg.enrichment_count;
  if (cfg.wave_number) os << ",w=" << *cfg.wave_number;
  for (size_t i = 0; i < cfg.enrichment_vectors.size(); ++i)
    os << ",v=" << cfg.enrichment_vectors[i].transpose() << "/" << cfg.enrichment_phases[i];
  return os.str();
}

}  // namespace tdbem
