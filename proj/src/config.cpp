#include "topam/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>

namespace topam {

const char* problem_name(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::Cantilever: return "cantilever";
    case ProblemKind::Mbb: return "mbb";
    case ProblemKind::Inverter: return "inverter";
  }
  return "?";
}

double RunConfig::emin() const {
  if (Emin) return *Emin;
  return problem == ProblemKind::Inverter ? 1e-4 : 1e-9;
}

std::vector<double> RunConfig::orientation_angles() const {
  if (!angles_deg.empty()) return angles_deg;
  std::vector<double> out;
  if (count <= 0) return out;
  OrientationLayout lay = layout;
  if (lay == OrientationLayout::Auto) {
    switch (problem) {
      case ProblemKind::Cantilever: lay = OrientationLayout::Full; break;
      case ProblemKind::Mbb: lay = OrientationLayout::HalfClosed; break;
      case ProblemKind::Inverter: lay = OrientationLayout::HalfOpen; break;
    }
  }
  for (int k = 0; k < count; ++k) {
    switch (lay) {
      case OrientationLayout::Full: out.push_back(360.0 * k / count); break;
      case OrientationLayout::HalfClosed: out.push_back(count > 1 ? 180.0 * k / (count - 1) : 0.0); break;
      case OrientationLayout::HalfOpen: out.push_back(-90.0 + 180.0 * k / count); break;
      case OrientationLayout::Auto: break;
    }
  }
  return out;
}

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw InputError(msg);
  };
  need(nelx >= 1 && nely >= 1, "problem.nelx and problem.nely must be >= 1");
  need(volfrac > 0.0 && volfrac < 1.0, "problem.volfrac must lie in (0, 1)");
  need(r_min > 0.0, "problem.r_min must be positive");
  need(passive_radius >= 0.0, "problem.passive_radius must be >= 0");
  need(force != 0.0 && std::isfinite(force), "problem.force must be finite and nonzero");
  need(spring_in >= 0.0 && spring_out >= 0.0, "inverter springs must be >= 0");
  need(E0 > emin() && emin() > 0.0, "material needs E0 > Emin > 0");
  need(nu > -1.0 && nu < 0.5, "material.nu must lie in (-1, 0.5)");
  need(0.0 < mu_dil && mu_dil < mu_int && mu_int < mu_ero && mu_ero < 1.0,
       "projection thresholds must satisfy 0 < mu_dil < mu_int < mu_ero < 1");
  need(max_iters >= 1, "schedule.max_iters must be >= 1");
  need(continuation_every >= 1, "schedule.continuation_every must be >= 1");
  need(eta_start >= 1.0 && eta_step >= 0.0, "SIMP exponent schedule must start at >= 1 and not decrease");
  need(beta_start > 0.0 && beta_factor >= 1.0, "beta schedule must start positive and not decrease");
  need(volume_update_every >= 1, "schedule.volume_update_every must be >= 1");
  need(move_at_eta1 > 0.0 && move_at_eta2 > 0.0, "move limits must be positive");
  need(objective_scale > 0.0 && constraint_scale > 0.0, "scales must be positive");
  need(alpha_deg > 0.0 && alpha_deg < 90.0, "overhang.alpha must lie in (0, 90) degrees");
  need(p >= 1.0 && r >= 1.0, "aggregation exponents p and r must be >= 1");
  need(active_fraction > 0.0 && active_fraction <= 1.0, "overhang.active_fraction must lie in (0, 1]");
  need(eps_n_ini > 0.0 && eps_n_end > 0.0, "normalization cutoffs must be positive");
  need(count >= 0, "overhang.count must be >= 0");
  if (overhang) need(!orientation_angles().empty(), "overhang constraint enabled with an empty orientation list");
  for (double a : angles_deg) need(std::isfinite(a), "orientation angles must be finite");
  need(it_free >= 0 && it_free <= continuation_every, "free_evolution.it_free must lie in [0, continuation_every]");
  need(eps_m >= 0.0, "free_evolution.eps_m must be >= 0");
  need(pp_max_events >= 0, "postprocess.max_events must be >= 0");
  need(pp_mu > 0.0 && pp_mu < 1.0, "postprocess.mu must lie in (0, 1)");
  need(eps_c >= 0.0 && eps_v >= 0.0 && eps_v < 1.0 && region_radius >= 0.0,
       "postprocess thresholds out of range");
  need(r_max > 0.0, "maxsize.r_max must be positive");
  if (maxsize) need(r_max > r_min, "maxsize.r_max must exceed problem.r_min");
  need(eps_ms > 0.0 && eps_ms < 1.0, "maxsize.eps_ms must lie in (0, 1)");
  need(p_ms >= 1.0, "maxsize.p must be >= 1");
  need(!out_dir.empty(), "output.dir must not be empty");
}

// ---------------------------------------------------------------------------
// presets

namespace {

struct OverhangPreset {
  double p, eps_ini, eps_end;
  int it_free;
  double r;
};

void set_overhang(RunConfig& c, const OverhangPreset& o) {
  c.overhang = true;
  c.p = o.p;
  c.eps_n_ini = o.eps_ini;
  c.eps_n_end = o.eps_end;
  c.it_free = o.it_free;
  c.r = o.r;
}

RunConfig cantilever() {
  RunConfig c;
  c.problem = ProblemKind::Cantilever;
  c.nelx = 200;
  c.nely = 100;
  c.volfrac = 0.4;
  c.r_min = 3.0;
  return c;
}

RunConfig mbb() {
  RunConfig c;
  c.problem = ProblemKind::Mbb;
  c.nelx = 300;
  c.nely = 100;
  c.volfrac = 0.4;
  c.r_min = 3.0;
  return c;
}

RunConfig inverter() {
  RunConfig c;
  c.problem = ProblemKind::Inverter;
  c.nelx = 200;
  c.nely = 100;
  c.volfrac = 0.3;
  c.r_min = 3.0;
  // A nearly linear start lets the first steps cut the input off from the
  // output port; the design never reconnects.
  c.eta_start = 3.0;
  c.eta_step = 0.0;
  c.move_at_eta1 = 0.2;
  c.move_at_eta2 = 0.2;
  return c;
}

const std::vector<std::pair<std::string, std::function<RunConfig()>>>& preset_table() {
  static const std::vector<std::pair<std::string, std::function<RunConfig()>>> table = [] {
    std::vector<std::pair<std::string, std::function<RunConfig()>>> t;
    t.emplace_back("fig8a", [] { return cantilever(); });
    for (int theta : {0, 45, 90, 135, 180, 225, 270, 315}) {
      t.emplace_back("fig11-" + std::to_string(theta), [theta] {
        RunConfig c = cantilever();
        set_overhang(c, {60, 0.3, 0.9, 10, 20});
        c.angles_deg = {static_cast<double>(theta)};
        return c;
      });
    }
    t.emplace_back("fig12a", [] {
      RunConfig c = cantilever();
      c.count = 36;  // monitored, not constrained
      return c;
    });
    const std::pair<const char*, int> fig12[] = {{"fig12b", 36}, {"fig12c", 72}, {"fig12d", 180}};
    for (const auto& [name, m] : fig12) {
      const int count = m;
      t.emplace_back(name, [count] {
        RunConfig c = cantilever();
        set_overhang(c, {60, 0.2, 2.0, 10, 20});
        c.count = count;
        return c;
      });
    }
    for (double rmin : {2.0, 5.0}) {
      t.emplace_back(rmin == 2.0 ? "cantilever-rmin2-m180" : "cantilever-rmin5-m180", [rmin] {
        RunConfig c = cantilever();
        set_overhang(c, {60, 0.2, 2.0, 10, 20});
        c.count = 180;
        c.r_min = rmin;
        return c;
      });
    }
    t.emplace_back("cantilever-alpha60-rmin3", [] {
      RunConfig c = cantilever();
      set_overhang(c, {80, 0.2, 1.5, 2, 40});
      c.count = 180;
      c.alpha_deg = 60.0;
      return c;
    });
    t.emplace_back("cantilever-alpha60-rmin5", [] {
      RunConfig c = cantilever();
      set_overhang(c, {80, 0.1, 1.5, 2, 40});
      c.count = 180;
      c.alpha_deg = 60.0;
      c.r_min = 5.0;
      return c;
    });
    t.emplace_back("mbb-ref", [] { return mbb(); });
    t.emplace_back("mbb-m2", [] {
      RunConfig c = mbb();
      set_overhang(c, {60, 0.3, 1.0, 4, 10});
      c.angles_deg = {0.0, 180.0};
      return c;
    });
    t.emplace_back("mbb-m4", [] {
      RunConfig c = mbb();
      set_overhang(c, {60, 0.3, 1.0, 4, 10});
      c.count = 4;
      return c;
    });
    t.emplace_back("mbb-m37", [] {
      RunConfig c = mbb();
      set_overhang(c, {60, 0.2, 1.5, 5, 30});
      c.count = 37;
      return c;
    });
    t.emplace_back("mbb-m37-alpha60", [] {
      RunConfig c = mbb();
      set_overhang(c, {60, 0.2, 1.5, 5, 30});
      c.count = 37;
      c.alpha_deg = 60.0;
      return c;
    });
    t.emplace_back("fig15a", [] { return inverter(); });
    t.emplace_back("fig15b", [] {
      RunConfig c = inverter();
      set_overhang(c, {80, 0.2, 1.0, 5, 30});
      c.count = 36;
      return c;
    });
    t.emplace_back("fig15c", [] {
      RunConfig c = inverter();
      set_overhang(c, {80, 0.2, 1.0, 5, 30});
      c.angles_deg = {0.0};
      return c;
    });
    t.emplace_back("fig15d", [] {
      RunConfig c = inverter();
      set_overhang(c, {80, 0.2, 1.0, 5, 30});
      c.angles_deg = {90.0};
      return c;
    });
    t.emplace_back("fig16a", [] {
      RunConfig c = inverter();
      c.maxsize = true;
      return c;
    });
    t.emplace_back("fig16b", [] {
      RunConfig c = inverter();
      c.maxsize = true;
      set_overhang(c, {80, 0.4, 1.0, 10, 15});
      c.count = 36;
      return c;
    });
    t.emplace_back("fig16c", [] {
      RunConfig c = mbb();
      c.maxsize = true;
      return c;
    });
    t.emplace_back("fig16d", [] {
      RunConfig c = mbb();
      c.maxsize = true;
      set_overhang(c, {60, 0.5, 2.0, 10, 20});
      c.count = 36;
      return c;
    });
    t.emplace_back("fig16e", [] {
      RunConfig c = cantilever();
      c.maxsize = true;
      return c;
    });
    t.emplace_back("fig16f", [] {
      RunConfig c = cantilever();
      c.maxsize = true;
      set_overhang(c, {60, 0.4, 1.0, 5, 15});
      c.count = 180;
      return c;
    });
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, make] : preset_table()) names.push_back(name);
  return names;
}

RunConfig preset_config(const std::string& name) {
  for (const auto& [n, make] : preset_table()) {
    if (n == name) {
      RunConfig c = make();
      c.preset = name;
      return c;
    }
  }
  throw InputError("unknown preset '" + name + "'");
}

// ---------------------------------------------------------------------------
// text format

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return std::tolower(ch); });
  return s;
}

double to_double(const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw InputError("expected a number, got '" + v + "'");
  }
  if (pos != v.size() || !std::isfinite(out)) throw InputError("expected a number, got '" + v + "'");
  return out;
}

int to_int(const std::string& v) {
  const double d = to_double(v);
  if (d != std::floor(d) || std::abs(d) > std::numeric_limits<int>::max())
    throw InputError("expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& v) {
  const std::string s = lower(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw InputError("expected true or false, got '" + v + "'");
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Key {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define TOPAM_DOUBLE(name, member) \
  {name, {[](RunConfig& c, const std::string& v) { c.member = to_double(v); }, [](const RunConfig& c) { return num(c.member); }}}
#define TOPAM_INT(name, member) \
  {name, {[](RunConfig& c, const std::string& v) { c.member = to_int(v); }, [](const RunConfig& c) { return std::to_string(c.member); }}}
#define TOPAM_BOOL(name, member)                                                  \
  {name, {[](RunConfig& c, const std::string& v) { c.member = to_bool(v); }, \
          [](const RunConfig& c) { return std::string(c.member ? "true" : "false"); }}}

const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = {
      {"problem.type",
       {[](RunConfig& c, const std::string& v) {
          const std::string s = lower(v);
          if (s == "cantilever") c.problem = ProblemKind::Cantilever;
          else if (s == "mbb") c.problem = ProblemKind::Mbb;
          else if (s == "inverter") c.problem = ProblemKind::Inverter;
          else throw InputError("unknown problem '" + v + "' (cantilever, mbb, inverter)");
        },
        [](const RunConfig& c) { return std::string(problem_name(c.problem)); }}},
      TOPAM_INT("problem.nelx", nelx),
      TOPAM_INT("problem.nely", nely),
      TOPAM_DOUBLE("problem.volfrac", volfrac),
      TOPAM_BOOL("problem.volume_equality", volume_equality),
      TOPAM_DOUBLE("problem.r_min", r_min),
      TOPAM_DOUBLE("problem.passive_radius", passive_radius),
      TOPAM_DOUBLE("problem.force", force),
      TOPAM_DOUBLE("problem.spring_in", spring_in),
      TOPAM_DOUBLE("problem.spring_out", spring_out),
      TOPAM_DOUBLE("material.E0", E0),
      {"material.Emin",
       {[](RunConfig& c, const std::string& v) {
          if (lower(v) == "auto") c.Emin.reset();
          else c.Emin = to_double(v);
        },
        [](const RunConfig& c) { return c.Emin ? num(*c.Emin) : std::string("auto"); }}},
      TOPAM_DOUBLE("material.nu", nu),
      TOPAM_DOUBLE("projection.mu_ero", mu_ero),
      TOPAM_DOUBLE("projection.mu_int", mu_int),
      TOPAM_DOUBLE("projection.mu_dil", mu_dil),
      TOPAM_INT("schedule.max_iters", max_iters),
      TOPAM_INT("schedule.continuation_every", continuation_every),
      TOPAM_DOUBLE("schedule.eta_start", eta_start),
      TOPAM_DOUBLE("schedule.eta_step", eta_step),
      TOPAM_DOUBLE("schedule.beta_start", beta_start),
      TOPAM_DOUBLE("schedule.beta_factor", beta_factor),
      TOPAM_INT("schedule.volume_update_every", volume_update_every),
      TOPAM_DOUBLE("schedule.move_at_eta1", move_at_eta1),
      TOPAM_DOUBLE("schedule.move_at_eta2", move_at_eta2),
      TOPAM_DOUBLE("schedule.objective_scale", objective_scale),
      TOPAM_DOUBLE("schedule.constraint_scale", constraint_scale),
      TOPAM_BOOL("overhang.enabled", overhang),
      TOPAM_DOUBLE("overhang.alpha", alpha_deg),
      {"overhang.angles",
       {[](RunConfig& c, const std::string& v) { c.angles_deg = parse_number_list(v); },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.angles_deg.size(); ++i) s += (i ? "," : "") + num(c.angles_deg[i]);
          return s;
        }}},
      TOPAM_INT("overhang.count", count),
      {"overhang.layout",
       {[](RunConfig& c, const std::string& v) {
          const std::string s = lower(v);
          if (s == "auto") c.layout = OrientationLayout::Auto;
          else if (s == "full") c.layout = OrientationLayout::Full;
          else if (s == "half-closed") c.layout = OrientationLayout::HalfClosed;
          else if (s == "half-open") c.layout = OrientationLayout::HalfOpen;
          else throw InputError("unknown layout '" + v + "' (auto, full, half-closed, half-open)");
        },
        [](const RunConfig& c) {
          switch (c.layout) {
            case OrientationLayout::Full: return std::string("full");
            case OrientationLayout::HalfClosed: return std::string("half-closed");
            case OrientationLayout::HalfOpen: return std::string("half-open");
            case OrientationLayout::Auto: break;
          }
          return std::string("auto");
        }}},
      TOPAM_DOUBLE("overhang.p", p),
      TOPAM_DOUBLE("overhang.r", r),
      TOPAM_DOUBLE("overhang.active_fraction", active_fraction),
      TOPAM_INT("overhang.active_threshold", active_threshold),
      TOPAM_DOUBLE("overhang.eps_n_ini", eps_n_ini),
      TOPAM_DOUBLE("overhang.eps_n_end", eps_n_end),
      {"overhang.fields",
       {[](RunConfig& c, const std::string& v) {
          const std::string s = lower(v);
          if (s == "auto") c.fields = FieldRule::Auto;
          else if (s == "all") c.fields = FieldRule::All;
          else if (s == "dilated") c.fields = FieldRule::Dilated;
          else if (s == "int,dil" || s == "intermediate-dilated") c.fields = FieldRule::IntermediateDilated;
          else throw InputError("unknown field rule '" + v + "' (auto, all, dilated, int,dil)");
        },
        [](const RunConfig& c) {
          switch (c.fields) {
            case FieldRule::All: return std::string("all");
            case FieldRule::Dilated: return std::string("dilated");
            case FieldRule::IntermediateDilated: return std::string("int,dil");
            case FieldRule::Auto: break;
          }
          return std::string("auto");
        }}},
      TOPAM_BOOL("overhang.solid_ghosts", solid_ghosts),
      {"overhang.base_plate",
       {[](RunConfig& c, const std::string& v) {
          const std::string s = lower(v);
          if (s == "lower") c.lower_base_plate = true;
          else if (s == "all") c.lower_base_plate = false;
          else throw InputError("unknown base plate '" + v + "' (lower, all)");
        },
        [](const RunConfig& c) { return std::string(c.lower_base_plate ? "lower" : "all"); }}},
      TOPAM_BOOL("overhang.fix_base_plate_filter", fix_base_plate_filter),
      TOPAM_BOOL("free_evolution.enabled", free_evolution),
      TOPAM_INT("free_evolution.it_free", it_free),
      TOPAM_DOUBLE("free_evolution.eps_m", eps_m),
      TOPAM_BOOL("free_evolution.invert_surface_test", invert_surface_test),
      TOPAM_BOOL("postprocess.enabled", postprocess),
      TOPAM_INT("postprocess.max_events", pp_max_events),
      TOPAM_DOUBLE("postprocess.eta", pp_eta),
      TOPAM_DOUBLE("postprocess.beta", pp_beta),
      TOPAM_DOUBLE("postprocess.mu", pp_mu),
      TOPAM_DOUBLE("postprocess.eps_c", eps_c),
      TOPAM_DOUBLE("postprocess.eps_v", eps_v),
      TOPAM_DOUBLE("postprocess.region_radius", region_radius),
      TOPAM_BOOL("postprocess.printed_void_test", printed_void_test),
      TOPAM_BOOL("maxsize.enabled", maxsize),
      TOPAM_DOUBLE("maxsize.r_max", r_max),
      TOPAM_DOUBLE("maxsize.eps_ms", eps_ms),
      TOPAM_BOOL("maxsize.grow_dilated", grow_dilated_maxsize),
      TOPAM_DOUBLE("maxsize.p", p_ms),
      {"output.dir",
       {[](RunConfig& c, const std::string& v) { c.out_dir = v; },
        [](const RunConfig& c) { return c.out_dir; }}},
      TOPAM_BOOL("output.log_all_fields", log_all_fields),
      TOPAM_INT("output.seed", seed),
  };
  return table;
}

#undef TOPAM_DOUBLE
#undef TOPAM_INT
#undef TOPAM_BOOL

const Key* find_key(const std::string& name) {
  for (const auto& [k, key] : keys())
    if (k == name) return &key;
  return nullptr;
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(item));
  }
  return out;
}

RunConfig parse_config(const std::string& text, const std::string& origin, std::optional<RunConfig> base,
                       bool honor_preset_key) {
  RunConfig cfg = base ? *base : RunConfig{};
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  auto fail = [&](const std::string& msg) {
    throw InputError(origin + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      section = lower(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("missing key");
    if ((section.empty() || section == "run") && key == "preset") {
      if (!honor_preset_key) continue;
      try {
        const std::string keep_out = cfg.out_dir;
        cfg = preset_config(value);
        cfg.out_dir = keep_out;
      } catch (const InputError& e) {
        fail(e.what());
      }
      continue;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    const Key* k = find_key(full);
    if (!k) fail("unknown key '" + full + "'");
    try {
      k->set(cfg, value);
    } catch (const InputError& e) {
      fail(full + ": " + e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const InputError& e) {
    throw InputError(origin + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path, std::optional<std::string> preset) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  // a preset given by the caller wins over one named inside the file
  std::optional<RunConfig> base;
  if (preset) base = preset_config(*preset);
  return parse_config(ss.str(), path, base, !preset.has_value());
}

std::string format_config(const RunConfig& cfg) {
  std::ostringstream os;
  if (!cfg.preset.empty()) os << "# preset: " << cfg.preset << "\n";
  std::string current;
  for (const auto& [name, key] : keys()) {
    const auto dot = name.find('.');
    const std::string section = name.substr(0, dot);
    if (section != current) {
      os << (current.empty() ? "" : "\n") << "[" << section << "]\n";
      current = section;
    }
    os << name.substr(dot + 1) << " = " << key.get(cfg) << "\n";
  }
  return os.str();
}

}  // namespace topam
