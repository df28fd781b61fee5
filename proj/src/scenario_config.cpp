#include "phaselab/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace phaselab {

namespace {

constexpr ValueType kInt = ValueType::integer;
constexpr ValueType kReal = ValueType::real;
constexpr ValueType kText = ValueType::text;
constexpr ValueType kList = ValueType::real_list;

std::vector<KeySpec> envelope_keys() {
  return {
      {"envelope", kText, false, "constant", "drive envelope", {"constant", "gaussian", "flat_top"}},
      {"t_center", kReal, false, "", "gaussian envelope center"},
      {"t_width", kReal, false, "", "gaussian envelope width (standard deviation of the field)"},
      {"t_on", kReal, false, "", "flat_top start"},
      {"t_off", kReal, false, "", "flat_top end"},
  };
}

std::vector<KindSpec> build_kinds() {
  std::vector<KindSpec> kinds;
  kinds.push_back({"free_gaussian",
                   "free spreading of a Gaussian packet",
                   GridUse::required,
                   {{"x0", kReal, false, "0", "initial center"},
                    {"sigma0", kReal, false, "1", "initial width"},
                    {"k0", kReal, false, "0", "initial mean wavenumber"},
                    {"t_final", kReal, false, "2", "evolution time"},
                    {"dt", kReal, false, "0.001", "time step (must divide t_final)"}},
                   {"sigma_final", "sigma_analytic", "sigma_error", "norm_drift", "max_step_norm_change"}});
  kinds.push_back({"harmonic_stationary",
                   "harmonic ground state and the hydrodynamic residuals along its evolution",
                   GridUse::required,
                   {{"omega", kReal, false, "1", "trap frequency"},
                    {"t_final", kReal, false, "1", "evolution time"},
                    {"dt", kReal, false, "0.001", "time step (must divide t_final)"},
                    {"epsilon", kReal, false, "0.001", "valid-mask threshold relative to max R"}},
                   {"hj_max", "continuity_max", "hj_max_analytic", "continuity_max_analytic", "phase_error",
                    "modulus_error", "energy"}});
  kinds.push_back({"coherent_state",
                   "displaced harmonic ground state oscillating in the trap",
                   GridUse::required,
                   {{"omega", kReal, false, "1", "trap frequency"},
                    {"x0", kReal, false, "2", "initial displacement"},
                    {"periods", kReal, false, "1", "evolution time in trap periods"},
                    {"steps_per_period", kInt, false, "2000", "time steps per period"}},
                   {"center_final", "center_error", "center_error_max", "norm_drift"}});
  kinds.push_back({"two_packet_interference",
                   "two Gaussians with a relative phase overlapping in free flight",
                   GridUse::optional,
                   {{"separation", kReal, false, "8", "distance between packet centers"},
                    {"sigma0", kReal, false, "1", "packet width"},
                    {"t_free", kReal, false, "6", "free flight time"},
                    {"delta_phi", kReal, false, "0", "phase of the right packet"},
                    {"amplitude_ratio", kReal, false, "1", "right/left amplitude ratio"},
                    {"steps", kInt, false, "200", "time steps"}},
                   {"fringe_spacing", "fringe_spacing_exact", "phase_shift", "visibility", "visibility_expected",
                    "center_intensity", "peak_intensity"}});
  kinds.push_back({"phase_scan_interference",
                   "applied packet phase against extracted fringe phase",
                   GridUse::optional,
                   {{"separation", kReal, false, "8", "distance between packet centers"},
                    {"sigma0", kReal, false, "0.5", "packet width"},
                    {"t_free", kReal, false, "6", "free flight time"},
                    {"phis", kList, true, "", "applied phases (at least 3)"},
                    {"application", kText, false, "both", "where the phase is applied",
                     {"preparation", "mid_flight", "both"}},
                    {"kick_time", kReal, false, "", "mid-flight kick time (default: automatic)"},
                    {"amplitude_ratio", kReal, false, "1", "right/left amplitude ratio"},
                    {"steps", kInt, false, "200", "time steps"}},
                   {"fringe_slope", "fringe_offset", "visibility_min"}});
  {
    std::vector<KeySpec> keys = {{"rabi_peak", kReal, true, "", "peak Rabi frequency"},
                                 {"detuning", kReal, false, "0", "drive minus transition frequency"}};
    for (auto& k : envelope_keys()) keys.push_back(k);
    keys.push_back({"jump_times", kList, false, "", "phase jump times, strictly increasing"});
    keys.push_back({"jump_phases", kList, false, "", "optical phase after each jump"});
    keys.push_back({"t_final", kReal, true, "", "evolution time"});
    keys.push_back({"dt", kReal, false, "0.001", "time step"});
    kinds.push_back({"rabi_pulse",
                     "driven two-level system with bare and dressed populations",
                     GridUse::unused,
                     keys,
                     {"P_e_final", "P_g_final", "max_norm_drift", "bare_excited_change", "dressed_plus_change",
                      "dressed_minus_change"}});
  }
  {
    std::vector<KeySpec> keys = {{"rabi_peak", kReal, true, "", "peak Rabi frequency"},
                                 {"detuning", kReal, false, "0", "drive minus transition frequency"}};
    for (auto& k : envelope_keys()) keys.push_back(k);
    keys.push_back({"jump_time", kReal, true, "", "time of the scanned phase jump"});
    keys.push_back({"jump_values", kList, true, "", "scanned jump phases"});
    keys.push_back({"global_offset", kReal, false, "1.5707963267948966", "constant phase used for the offset check"});
    keys.push_back({"t_final", kReal, true, "", "evolution time"});
    keys.push_back({"dt", kReal, false, "0.001", "time step"});
    kinds.push_back({"phase_jump_scan",
                     "final excited population against a mid-pulse optical phase jump",
                     GridUse::unused,
                     keys,
                     {"P_e_range", "P_e_min", "P_e_max", "global_offset_change"}});
  }
  kinds.push_back({"madelung_direct",
                   "direct integration of the hydrodynamic equations against the oracle",
                   GridUse::required,
                   {{"x0", kReal, false, "0", "initial center"},
                    {"sigma0", kReal, false, "1", "initial width"},
                    {"k0", kReal, false, "0", "initial mean wavenumber"},
                    {"t_final", kReal, false, "0.5", "evolution time"},
                    {"dt", kReal, false, "", "hydrodynamic step (default: stability limit)"},
                    {"oracle_dt", kReal, false, "0.001", "split-step time step (must divide t_final)"},
                    {"epsilon", kReal, false, "0.001", "valid-mask threshold relative to max R"}},
                   {"max_dR", "max_dS", "madelung_steps", "clamp_events", "min_R_ratio"}});
  kinds.push_back({"trajectory_ensemble",
                   "Bohmian trajectories and their accumulated action in a free Gaussian",
                   GridUse::required,
                   {{"x0", kReal, false, "0", "initial center"},
                    {"sigma0", kReal, false, "1", "initial width"},
                    {"k0", kReal, false, "0", "initial mean wavenumber"},
                    {"x_starts", kList, false, "-1,0,1", "trajectory start points"},
                    {"t_final", kReal, false, "2", "evolution time"},
                    {"dt", kReal, false, "0.001", "time step (must divide t_final)"},
                    {"substeps", kInt, false, "4", "trajectory RK4 steps per snapshot interval"},
                    {"epsilon", kReal, false, "0.001", "valid-mask threshold relative to max R"}},
                   {"max_position_error", "max_action_mismatch", "ordering_preserved"}});
  return kinds;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_real(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<long long> parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  return std::nullopt;
}

std::optional<std::vector<double>> parse_list(const std::string& raw) {
  std::vector<double> out;
  const std::string s = trim(raw);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = parse_real(item);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (s.back() == ',') return std::nullopt;
  return out;
}

std::optional<ConfigValue> parse_value(const KeySpec& spec, const std::string& raw, std::string& why) {
  switch (spec.type) {
    case ValueType::integer:
      if (auto v = parse_integer(raw)) return ConfigValue(*v);
      why = "expected an integer";
      return std::nullopt;
    case ValueType::real:
      if (auto v = parse_real(raw)) return ConfigValue(*v);
      why = "expected a finite number";
      return std::nullopt;
    case ValueType::boolean:
      if (auto v = parse_bool(raw)) return ConfigValue(*v);
      why = "expected true or false";
      return std::nullopt;
    case ValueType::text: {
      const std::string v = trim(raw);
      if (spec.choices.empty() || std::find(spec.choices.begin(), spec.choices.end(), v) != spec.choices.end()) {
        return ConfigValue(v);
      }
      why = "must be one of";
      for (std::size_t i = 0; i < spec.choices.size(); ++i) {
        why += (i ? ", " : " ") + std::string(spec.choices[i]);
      }
      return std::nullopt;
    }
    case ValueType::real_list:
      if (auto v = parse_list(raw)) return ConfigValue(*v);
      why = "expected a comma-separated list of numbers";
      return std::nullopt;
  }
  return std::nullopt;
}

bool valid_name(const std::string& name) {
  if (name.empty()) return false;
  return std::all_of(name.begin(), name.end(), [](char ch) {
    return (ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '_' || ch == '-';
  });
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

class Checker {
 public:
  explicit Checker(std::vector<Diagnostic>& diags) : diags_(diags) {}

  bool require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) diags_.push_back({field, message});
    return ok;
  }

 private:
  std::vector<Diagnostic>& diags_;
};

bool divides(double t, double dt) {
  if (!(t > 0) || !(dt > 0)) return false;
  const double n = std::round(t / dt);
  return n >= 1 && std::abs(n * dt - t) <= 1e-9 * std::max(1.0, t);
}

void check_time(Checker& ck, const ScenarioConfig& c, const std::string& t_key, const std::string& dt_key) {
  const bool t_ok = ck.require(c.real(t_key) > 0, "params." + t_key, "must be positive");
  const bool dt_ok = ck.require(c.real(dt_key) > 0, "params." + dt_key, "must be positive");
  if (t_ok && dt_ok) {
    ck.require(divides(c.real(t_key), c.real(dt_key)), "params." + dt_key,
               "must divide params." + t_key + " into a whole number of steps");
  }
}

void check_packet(Checker& ck, const Grid1D& grid, double x0, double sigma0, double k0, const std::string& sigma_field,
                  const std::string& x0_field) {
  if (!ck.require(sigma0 > 0, sigma_field, "must be positive")) return;
  ck.require(sigma0 >= 2.0 * grid.dx(), sigma_field,
             "below two grid spacings (dx = " + num(grid.dx()) + "); refine the grid or widen the packet");
  ck.require(std::abs(k0) < grid.k_nyquist(), "params.k0",
             "must stay below the Nyquist wavenumber pi/dx = " + num(grid.k_nyquist()));
  ck.require(x0 - 5.0 * sigma0 >= grid.x_min() && x0 + 5.0 * sigma0 <= grid.x_max(), x0_field,
             "packet must sit at least 5 sigma0 inside the grid");
}

void check_epsilon(Checker& ck, const ScenarioConfig& c) {
  const double eps = c.real("epsilon");
  ck.require(eps > 0 && eps < 1, "params.epsilon", "must lie in (0, 1)");
}

void check_pulse(Checker& ck, const ScenarioConfig& c) {
  const double omega = c.real("rabi_peak");
  ck.require(omega >= 0, "params.rabi_peak", "must be non-negative");
  const std::string& env = c.text("envelope");
  if (env == "gaussian") {
    if (ck.require(c.has("t_center"), "params.t_center", "required by envelope = gaussian") &&
        ck.require(c.has("t_width"), "params.t_width", "required by envelope = gaussian")) {
      ck.require(c.real("t_width") > 0, "params.t_width", "must be positive");
    }
  } else if (env == "flat_top") {
    if (ck.require(c.has("t_on"), "params.t_on", "required by envelope = flat_top") &&
        ck.require(c.has("t_off"), "params.t_off", "required by envelope = flat_top")) {
      ck.require(c.real("t_off") > c.real("t_on"), "params.t_off", "must be later than params.t_on");
    }
  }
  for (const char* key : {"t_center", "t_width", "t_on", "t_off"}) {
    const bool used = (env == "gaussian" && (std::string(key) == "t_center" || std::string(key) == "t_width")) ||
                      (env == "flat_top" && (std::string(key) == "t_on" || std::string(key) == "t_off"));
    if (c.has(key)) ck.require(used, std::string("params.") + key, "not used by envelope = " + env);
  }
  const double t_final = c.real("t_final");
  const double dt = c.real("dt");
  ck.require(t_final > 0, "params.t_final", "must be positive");
  if (ck.require(dt > 0, "params.dt", "must be positive")) {
    const double gap = std::hypot(c.real("detuning"), omega);
    ck.require(dt * gap < 0.1, "params.dt",
               "dt * sqrt(detuning^2 + rabi_peak^2) must stay below 0.1 (is " + num(dt * gap) + ")");
  }
}

void check_semantics(const ScenarioConfig& c, std::vector<Diagnostic>& diags) {
  Checker ck(diags);
  const std::string& kind = c.kind;
  std::optional<Grid1D> grid;
  if (c.grid) grid = c.grid->make();

  if (kind == "free_gaussian" || kind == "madelung_direct" || kind == "trajectory_ensemble") {
    check_packet(ck, *grid, c.real("x0"), c.real("sigma0"), c.real("k0"), "params.sigma0", "params.x0");
  }
  if (kind == "free_gaussian" || kind == "trajectory_ensemble") check_time(ck, c, "t_final", "dt");
  if (kind == "harmonic_stationary" || kind == "coherent_state") {
    const double omega = c.real("omega");
    if (ck.require(omega > 0, "params.omega", "must be positive")) {
      const double sigma = std::sqrt(c.physics.hbar / (2.0 * c.physics.mass * omega));
      const double x0 = kind == "coherent_state" ? c.real("x0") : 0.0;
      check_packet(ck, *grid, x0, sigma, 0.0, "params.omega", kind == "coherent_state" ? "params.x0" : "params.omega");
    }
  }
  if (kind == "harmonic_stationary") {
    check_time(ck, c, "t_final", "dt");
    check_epsilon(ck, c);
  }
  if (kind == "coherent_state") {
    ck.require(c.real("periods") > 0, "params.periods", "must be positive");
    if (ck.require(c.integer("steps_per_period") >= 1, "params.steps_per_period", "must be at least 1")) {
      const double steps = c.real("periods") * double(c.integer("steps_per_period"));
      ck.require(std::abs(steps - std::round(steps)) <= 1e-9 * std::max(1.0, steps) && std::round(steps) >= 1,
                 "params.periods", "periods * steps_per_period must be a whole number of steps");
    }
  }
  if (kind == "two_packet_interference" || kind == "phase_scan_interference") {
    const double sigma0 = c.real("sigma0");
    const double d = c.real("separation");
    ck.require(c.real("t_free") > 0, "params.t_free", "must be positive");
    ck.require(c.integer("steps") >= 2, "params.steps", "must be at least 2");
    ck.require(c.real("amplitude_ratio") > 0, "params.amplitude_ratio", "must be positive");
    if (ck.require(sigma0 > 0, "params.sigma0", "must be positive")) {
      ck.require(d >= 6.0 * sigma0, "params.separation", "packets overlap initially: must be at least 6 sigma0");
      if (grid) {
        ck.require(sigma0 >= 2.0 * grid->dx(), "params.sigma0", "below two grid spacings (dx = " + num(grid->dx()) + ")");
        ck.require(-0.5 * d - 5.0 * sigma0 >= grid->x_min() && 0.5 * d + 5.0 * sigma0 <= grid->x_max(),
                   "params.separation", "packets must sit at least 5 sigma0 inside the grid");
      }
    }
  }
  if (kind == "phase_scan_interference") {
    ck.require(c.list("phis").size() >= 3, "params.phis", "needs at least 3 values");
    const std::string& app = c.text("application");
    const double sigma0 = c.real("sigma0");
    const double d = c.real("separation");
    if (app != "preparation" && sigma0 > 0) {
      if (ck.require(d >= 10.0 * sigma0, "params.separation",
                     "mid-flight application needs separation of at least 10 sigma0")) {
        if (c.has("kick_time")) {
          const double ratio = d / (10.0 * sigma0);
          const double latest =
              std::sqrt(ratio * ratio - 1.0) * 2.0 * c.physics.mass * sigma0 * sigma0 / c.physics.hbar;
          const double tk = c.real("kick_time");
          ck.require(tk >= 0 && tk < c.real("t_free"), "params.kick_time", "must lie in [0, t_free)");
          ck.require(tk <= latest, "params.kick_time",
                     "packets overlap by then; must be at most " + num(latest));
        }
      }
    } else if (c.has("kick_time")) {
      ck.require(false, "params.kick_time", "only used with mid-flight application");
    }
  }
  if (kind == "rabi_pulse" || kind == "phase_jump_scan") check_pulse(ck, c);
  if (kind == "rabi_pulse") {
    const auto& times = c.list("jump_times");
    const auto& phases = c.list("jump_phases");
    ck.require(times.size() == phases.size(), "params.jump_phases", "must have as many entries as params.jump_times");
    for (std::size_t i = 1; i < times.size(); ++i) {
      if (!ck.require(times[i] > times[i - 1], "params.jump_times", "must be strictly increasing")) break;
    }
  }
  if (kind == "phase_jump_scan") {
    ck.require(!c.list("jump_values").empty(), "params.jump_values", "needs at least one value");
    const double tj = c.real("jump_time");
    ck.require(tj >= 0 && tj <= c.real("t_final"), "params.jump_time", "must lie in [0, t_final]");
  }
  if (kind == "madelung_direct") {
    check_epsilon(ck, c);
    check_time(ck, c, "t_final", "oracle_dt");
    const double guard = 0.2 * grid->dx() * grid->dx() * c.physics.mass / c.physics.hbar;
    if (c.has("dt")) {
      const double dt = c.real("dt");
      ck.require(dt > 0 && dt <= guard, "params.dt", "must lie in (0, 0.2 dx^2 m / hbar] = (0, " + num(guard) + "]");
    }
    if (c.real("sigma0") > 0) {
      const RealArrayXd x = grid->positions();
      const RealArrayXd r = (-(x - c.real("x0")).square() / (4.0 * c.real("sigma0") * c.real("sigma0"))).exp();
      const double ratio = r.minCoeff() / r.maxCoeff();
      ck.require(ratio > c.real("epsilon"), "params.sigma0",
                 "initial state is not node-free on the grid (min R / max R = " + num(ratio) +
                     " must exceed epsilon); widen the packet or shrink the grid");
    }
  }
  if (kind == "trajectory_ensemble") {
    check_epsilon(ck, c);
    ck.require(c.integer("substeps") >= 1, "params.substeps", "must be at least 1");
    const auto& starts = c.list("x_starts");
    ck.require(!starts.empty(), "params.x_starts", "needs at least one start point");
    for (double xs : starts) {
      if (!ck.require(xs > grid->x_min() + 5.0 * grid->dx() && xs < grid->x_max() - 5.0 * grid->dx(),
                      "params.x_starts", "start point " + num(xs) + " lies outside the grid margin")) {
        break;
      }
    }
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error([&] {
        std::string msg = "invalid config";
        for (const auto& d : diagnostics) msg += "\n  " + d.field + ": " + d.message;
        return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

const std::vector<KindSpec>& scenario_kinds() {
  static const std::vector<KindSpec> kinds = build_kinds();
  return kinds;
}

const KindSpec* find_kind(std::string_view name) {
  for (const auto& k : scenario_kinds()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

double ScenarioConfig::real(const std::string& key) const { return std::get<double>(params.at(key)); }
long long ScenarioConfig::integer(const std::string& key) const { return std::get<long long>(params.at(key)); }
const std::string& ScenarioConfig::text(const std::string& key) const { return std::get<std::string>(params.at(key)); }
const std::vector<double>& ScenarioConfig::list(const std::string& key) const {
  return std::get<std::vector<double>>(params.at(key));
}

ScenarioConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError({{"config", e.message() + " (line " + std::to_string(e.line()) + ")"}});
  }

  std::vector<Diagnostic> diags;
  const std::set<std::string> sections = {"scenario", "grid", "physics", "params", "output"};
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      diags.push_back({key, "key outside any section"});
    } else if (!sections.count(key)) {
      diags.push_back({key, "unknown section"});
    }
  }
  auto section = [&](const std::string& name) -> const pt::ptree* {
    const auto it = tree.find(name);
    return it == tree.not_found() ? nullptr : &it->second;
  };
  auto value_of = [](const pt::ptree* s, const std::string& key) -> std::optional<std::string> {
    if (!s) return std::nullopt;
    if (const auto v = s->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) return *v;
    return std::nullopt;
  };
  auto check_keys = [&](const std::string& name, const std::set<std::string>& allowed) {
    if (const auto* s = section(name)) {
      for (const auto& [key, _] : *s) {
        if (!allowed.count(key)) diags.push_back({name + "." + key, "unknown key"});
      }
    }
  };

  ScenarioConfig cfg;
  check_keys("scenario", {"name", "kind"});
  const auto* scen = section("scenario");
  const auto name = value_of(scen, "name");
  const auto kind_name = value_of(scen, "kind");
  if (!name) {
    diags.push_back({"scenario.name", "required"});
  } else if (!valid_name(trim(*name))) {
    diags.push_back({"scenario.name", "must match [a-z0-9_-]+ (got '" + trim(*name) + "')"});
  } else {
    cfg.name = trim(*name);
  }
  const KindSpec* kind = nullptr;
  if (!kind_name) {
    diags.push_back({"scenario.kind", "required"});
  } else if (!(kind = find_kind(trim(*kind_name)))) {
    diags.push_back({"scenario.kind", "unknown kind '" + trim(*kind_name) + "' (see list-scenarios)"});
  } else {
    cfg.kind = std::string(kind->name);
  }

  // [physics]
  check_keys("physics", {"hbar", "mass"});
  if (const auto* s = section("physics")) {
    for (const char* key : {"hbar", "mass"}) {
      if (const auto raw = value_of(s, key)) {
        const auto v = parse_real(*raw);
        if (!v || !(*v > 0)) {
          diags.push_back({std::string("physics.") + key, "must be a positive number"});
        } else {
          (std::string(key) == "hbar" ? cfg.physics.hbar : cfg.physics.mass) = *v;
        }
      }
    }
  }

  // [output]
  check_keys("output", {"snapshot_every", "emit_svg"});
  if (const auto* s = section("output")) {
    if (const auto raw = value_of(s, "snapshot_every")) {
      const auto v = parse_integer(*raw);
      if (!v || *v < 1) {
        diags.push_back({"output.snapshot_every", "must be a positive integer"});
      } else {
        cfg.snapshot_every = *v;
      }
    }
    if (const auto raw = value_of(s, "emit_svg")) {
      const auto v = parse_bool(*raw);
      if (!v) {
        diags.push_back({"output.emit_svg", "expected true or false"});
      } else {
        cfg.emit_svg = *v;
      }
    }
  }

  if (kind) {
    // [grid]
    const auto* g = section("grid");
    if (kind->grid == GridUse::unused) {
      if (g) diags.push_back({"grid", "not used by kind " + cfg.kind});
    } else if (!g && kind->grid == GridUse::required) {
      diags.push_back({"grid", "required by kind " + cfg.kind});
    } else if (g) {
      check_keys("grid", {"n_points", "x_min", "x_max"});
      GridSpec spec;
      bool ok = true;
      if (const auto raw = value_of(g, "n_points")) {
        const auto v = parse_integer(*raw);
        if (!v) {
          diags.push_back({"grid.n_points", "expected an integer"});
          ok = false;
        } else if (*v < 8 || !is_power_of_two(*v)) {
          diags.push_back({"grid.n_points", "must be a power of two and at least 8 (got " + std::to_string(*v) + ")"});
          ok = false;
        } else {
          spec.n_points = *v;
        }
      } else {
        diags.push_back({"grid.n_points", "required"});
        ok = false;
      }
      for (const char* key : {"x_min", "x_max"}) {
        const auto raw = value_of(g, key);
        const auto v = raw ? parse_real(*raw) : std::nullopt;
        if (!raw) {
          diags.push_back({std::string("grid.") + key, "required"});
          ok = false;
        } else if (!v) {
          diags.push_back({std::string("grid.") + key, "expected a finite number"});
          ok = false;
        } else {
          (std::string(key) == "x_min" ? spec.x_min : spec.x_max) = *v;
        }
      }
      if (ok && !(spec.x_max > spec.x_min)) {
        diags.push_back({"grid.x_max", "must be greater than grid.x_min"});
        ok = false;
      }
      if (ok) cfg.grid = spec;
    }

    // [params]
    const auto* p = section("params");
    std::set<std::string> allowed;
    for (const auto& k : kind->params) allowed.insert(std::string(k.key));
    if (p) {
      for (const auto& [key, _] : *p) {
        if (!allowed.count(key)) diags.push_back({"params." + key, "unknown key for kind " + cfg.kind});
      }
    }
    for (const auto& spec : kind->params) {
      const std::string key(spec.key);
      const auto raw = value_of(p, key);
      std::string why;
      if (raw) {
        if (auto v = parse_value(spec, *raw, why)) {
          cfg.params[key] = *v;
        } else {
          diags.push_back({"params." + key, why});
        }
      } else if (spec.required) {
        diags.push_back({"params." + key, "required by kind " + cfg.kind + " (" + std::string(spec.help) + ")"});
      } else if (!spec.default_value.empty() || spec.type == ValueType::real_list) {
        cfg.params[key] = *parse_value(spec, std::string(spec.default_value), why);
      }
    }
  }

  if (diags.empty()) check_semantics(cfg, diags);
  if (!diags.empty()) throw ConfigError(std::move(diags));
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError({{"config", "cannot read " + path.string()}});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace phaselab
