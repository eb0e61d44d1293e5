#pragma once

// Scenario files: JSON (comments allowed), strict keys, field-path errors.
// Every default is resolved at parse time and appears in the canonical echo,
// so parse(echo(s)) == s.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "emqs/diagnostics.hpp"

namespace emqs {

using Json = nlohmann::ordered_json;

struct RegionSpec {
  std::string name;
  CellBox box;
  std::optional<double> kappa, eps, nu;
  bool operator==(const RegionSpec&) const = default;
};

struct MaterialSpec {
  double kappa = 0.0;
  double eps = 1.0;
  double nu = 1.0;
  std::vector<RegionSpec> regions;
  bool operator==(const MaterialSpec&) const = default;
};

enum class KappaHatRule { None, EpsOverTau, Constant };

struct ArtificialSpec {
  KappaHatRule kappa_hat_rule = KappaHatRule::EpsOverTau;
  double kappa_hat = 0.0;  // used by the Constant rule
  std::optional<double> eps_hat;
  double tau = 0.0;  // resolved
  GaugeRegion region = GaugeRegion::Whole;
  bool operator==(const ArtificialSpec&) const = default;
};

/// Rectangular current loop through the nodes from `lo` to `hi`, in the plane
/// normal to `normal`, counter-clockwise about it.
struct LoopPattern {
  Axis normal = Axis::Z;
  Lattice lo{1, 1, 1}, hi{2, 2, 1};
  double current = 1.0;
  bool operator==(const LoopPattern&) const = default;
};

/// Every `direction` edge with both end nodes in the closed node box [lo, hi].
struct BoxPattern {
  Axis direction = Axis::X;
  Lattice lo{0, 0, 0}, hi{0, 0, 0};
  double current = 1.0;
  bool operator==(const BoxPattern&) const = default;
};

struct EdgeEntry {
  Axis axis = Axis::X;
  Lattice at{0, 0, 0};  // tail node
  double value = 1.0;
  bool operator==(const EdgeEntry&) const = default;
};

struct EdgeListPattern {
  std::vector<EdgeEntry> edges;
  bool operator==(const EdgeListPattern&) const = default;
};

using PatternSpec = std::variant<LoopPattern, BoxPattern, EdgeListPattern>;

struct SourceSpec {
  PatternSpec pattern = EdgeListPattern{};
  Profile profile = Sine{};
  double amplitude = 1.0;
  bool operator==(const SourceSpec&) const = default;
};

enum class InitKind { Zero, Random };

struct FieldInit {
  InitKind kind = InitKind::Zero;
  double amplitude = 1.0;
  bool operator==(const FieldInit&) const = default;
};

struct Scenario {
  std::string name = "scenario";
  GridSpec grid;
  Lattice ground{1, 1, 1};  // resolved
  MaterialSpec materials;
  ArtificialSpec artificial;
  std::vector<FormulationTag> formulations;
  SourceSpec source;
  StepperConfig stepper;
  FieldInit A0, phi0;
  std::uint64_t seed = 0;
  std::vector<double> sweep_factors;
  std::string output_dir = "out";
  bool operator==(const Scenario&) const = default;
};

namespace scenario_detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& msg) {
  throw InvalidArgument("scenario: " + path + ": " + msg);
}

inline void only_keys(const Json& j, const std::string& path, std::set<std::string> keys) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) {
      std::string list;
      for (const auto& k : keys) list += (list.empty() ? "" : ", ") + k;
      fail(path + "." + it.key(), "unknown key (allowed: " + list + ")");
    }
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

inline long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(path, "expected an integer");
  return j.get<long long>();
}

inline std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class T>
T triple(const Json& j, const std::string& path, bool integral) {
  if (!j.is_array() || j.size() != 3) fail(path, "expected an array of 3 numbers");
  T out{};
  for (int a = 0; a < 3; ++a) {
    const std::string p = path + "[" + std::to_string(a) + "]";
    if (integral)
      out[a] = static_cast<typename T::value_type>(integer(j[a], p));
    else
      out[a] = static_cast<typename T::value_type>(number(j[a], p));
  }
  return out;
}

inline Axis axis(const Json& j, const std::string& path) {
  const std::string s = string(j, path);
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  fail(path, "expected one of x, y, z");
}

inline std::string axis_str(Axis a) { return std::string(1, axis_name(a)); }

inline Json lattice_json(const Lattice& p) { return Json::array({p[0], p[1], p[2]}); }

}  // namespace scenario_detail

/// Checks that every part of the scenario fits its grid.
inline void validate(const Scenario& s) {
  using scenario_detail::fail;
  try {
    s.grid.validate();
  } catch (const InvalidArgument& e) {
    fail("grid", e.what());
  }
  const auto& n = s.grid.cells;
  for (int a = 0; a < 3; ++a)
    if (s.ground[a] < 1 || s.ground[a] >= n[a])
      fail("grid.ground", "ground node must be an interior node (0 < index < cells)");

  auto check_material = [](const std::string& where, std::optional<double> k,
                           std::optional<double> e, std::optional<double> nu) {
    if (k && !(*k >= 0.0)) fail(where, "kappa must be >= 0");
    if (e && !(*e > 0.0)) fail(where, "eps must be > 0");
    if (nu && !(*nu > 0.0)) fail(where, "nu must be > 0");
  };
  check_material("materials.background", s.materials.kappa, s.materials.eps, s.materials.nu);
  for (std::size_t i = 0; i < s.materials.regions.size(); ++i) {
    const auto& r = s.materials.regions[i];
    const std::string where = "materials.regions[" + std::to_string(i) + "] (" + r.name + ")";
    check_material(where, r.kappa, r.eps, r.nu);
    for (int a = 0; a < 3; ++a)
      if (r.box.lo[a] < 0 || r.box.hi[a] > n[a] || r.box.lo[a] >= r.box.hi[a])
        fail(where, "box must satisfy 0 <= lo < hi <= cells on every axis");
  }

  if (!(s.artificial.tau > 0.0)) fail("artificial.tau", "must be > 0");
  if (s.artificial.kappa_hat_rule == KappaHatRule::Constant && !(s.artificial.kappa_hat >= 0.0))
    fail("artificial.kappa_hat", "must be >= 0");
  if (s.artificial.eps_hat && !(*s.artificial.eps_hat >= 0.0))
    fail("artificial.eps_hat", "must be >= 0");

  if (s.formulations.empty()) fail("formulations", "at least one formulation is required");
  for (std::size_t i = 0; i < s.formulations.size(); ++i) {
    const auto t = s.formulations[i];
    const std::string where = "formulations[" + std::to_string(i) + "]";
    if (needs_kappa_hat(t) && s.artificial.kappa_hat_rule == KappaHatRule::None)
      fail(where, std::string(tag_name(t)) + " requires artificial.kappa_hat");
    if (needs_eps_hat(t) && !s.artificial.eps_hat)
      fail(where, std::string(tag_name(t)) + " requires artificial.eps_hat");
  }

  auto node_in_grid = [&](const Lattice& p) {
    for (int a = 0; a < 3; ++a)
      if (p[a] < 0 || p[a] > n[a]) return false;
    return true;
  };
  std::visit(
      [&](const auto& pat) {
        using T = std::decay_t<decltype(pat)>;
        if constexpr (std::is_same_v<T, LoopPattern>) {
          const int a = axis_index(pat.normal);
          if (!node_in_grid(pat.lo) || !node_in_grid(pat.hi))
            fail("source.pattern", "loop corners must be grid nodes");
          if (pat.lo[a] != pat.hi[a])
            fail("source.pattern", "loop corners must lie in one plane normal to the loop axis");
          for (int b = 0; b < 3; ++b)
            if (b != a && pat.lo[b] >= pat.hi[b])
              fail("source.pattern", "loop needs lo < hi on both in-plane axes");
        } else if constexpr (std::is_same_v<T, BoxPattern>) {
          if (!node_in_grid(pat.lo) || !node_in_grid(pat.hi))
            fail("source.pattern", "box corners must be grid nodes");
          for (int b = 0; b < 3; ++b)
            if (pat.lo[b] > pat.hi[b]) fail("source.pattern", "box needs lo <= hi");
        } else {
          for (std::size_t i = 0; i < pat.edges.size(); ++i) {
            const auto& e = pat.edges[i];
            const std::string where = "source.pattern.edges[" + std::to_string(i) + "]";
            Lattice head = e.at;
            head[axis_index(e.axis)] += 1;
            if (!node_in_grid(e.at) || !node_in_grid(head)) fail(where, "edge is outside the grid");
          }
        }
      },
      s.source.pattern);

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sine>) {
          if (!(p.frequency > 0.0)) fail("source.profile.frequency", "must be > 0");
        } else if constexpr (std::is_same_v<T, GaussianPulse>) {
          if (!(p.sigma > 0.0)) fail("source.profile.sigma", "must be > 0");
        } else {
          if (!(p.t_rise > 0.0)) fail("source.profile.t_rise", "must be > 0");
        }
      },
      s.source.profile);

  try {
    s.stepper.validate();
  } catch (const InvalidArgument& e) {
    fail("stepper", e.what());
  }
  for (std::size_t i = 0; i < s.sweep_factors.size(); ++i)
    if (!(s.sweep_factors[i] > 0.0))
      fail("sweep.factors[" + std::to_string(i) + "]", "must be > 0");
}

inline Scenario parse_scenario_json(const Json& root) {
  using namespace scenario_detail;
  only_keys(root, "$", {"name", "grid", "materials", "artificial", "formulations", "source",
                        "stepper", "init", "seed", "sweep", "output"});
  Scenario s;
  if (root.contains("name")) s.name = string(root["name"], "name");

  // grid
  if (!root.contains("grid")) fail("grid", "missing");
  {
    const Json& g = root["grid"];
    only_keys(g, "grid", {"cells", "spacing", "ground"});
    if (!g.contains("cells")) fail("grid.cells", "missing");
    s.grid.cells = triple<std::array<int, 3>>(g["cells"], "grid.cells", true);
    if (g.contains("spacing"))
      s.grid.spacing = triple<std::array<double, 3>>(g["spacing"], "grid.spacing", false);
    for (int a = 0; a < 3; ++a) s.ground[a] = std::max(1, s.grid.cells[a] / 2);
    if (g.contains("ground")) s.ground = triple<Lattice>(g["ground"], "grid.ground", true);
  }

  // materials
  if (root.contains("materials")) {
    const Json& m = root["materials"];
    only_keys(m, "materials", {"background", "regions"});
    if (m.contains("background")) {
      const Json& b = m["background"];
      only_keys(b, "materials.background", {"kappa", "eps", "nu"});
      if (b.contains("kappa")) s.materials.kappa = number(b["kappa"], "materials.background.kappa");
      if (b.contains("eps")) s.materials.eps = number(b["eps"], "materials.background.eps");
      if (b.contains("nu")) s.materials.nu = number(b["nu"], "materials.background.nu");
    }
    if (m.contains("regions")) {
      if (!m["regions"].is_array()) fail("materials.regions", "expected an array");
      for (std::size_t i = 0; i < m["regions"].size(); ++i) {
        const Json& r = m["regions"][i];
        const std::string p = "materials.regions[" + std::to_string(i) + "]";
        only_keys(r, p, {"name", "lo", "hi", "kappa", "eps", "nu"});
        RegionSpec reg;
        reg.name = r.contains("name") ? string(r["name"], p + ".name") : "region" + std::to_string(i);
        if (!r.contains("lo") || !r.contains("hi")) fail(p, "needs lo and hi cell corners");
        reg.box.lo = triple<Lattice>(r["lo"], p + ".lo", true);
        reg.box.hi = triple<Lattice>(r["hi"], p + ".hi", true);
        if (r.contains("kappa")) reg.kappa = number(r["kappa"], p + ".kappa");
        if (r.contains("eps")) reg.eps = number(r["eps"], p + ".eps");
        if (r.contains("nu")) reg.nu = number(r["nu"], p + ".nu");
        s.materials.regions.push_back(reg);
      }
    }
  }

  // formulations
  if (!root.contains("formulations")) fail("formulations", "missing");
  {
    const Json& f = root["formulations"];
    if (!f.is_array()) fail("formulations", "expected an array of tags");
    for (std::size_t i = 0; i < f.size(); ++i) {
      const std::string p = "formulations[" + std::to_string(i) + "]";
      try {
        s.formulations.push_back(parse_tag(string(f[i], p)));
      } catch (const InvalidArgument& e) {
        fail(p, e.what());
      }
    }
  }

  // source
  if (root.contains("source")) {
    const Json& src = root["source"];
    only_keys(src, "source", {"pattern", "profile", "amplitude"});
    if (src.contains("amplitude")) s.source.amplitude = number(src["amplitude"], "source.amplitude");
    if (src.contains("pattern")) {
      const Json& pt = src["pattern"];
      const std::string p = "source.pattern";
      if (!pt.is_object() || !pt.contains("type")) fail(p, "needs a type (loop, box, edges)");
      const std::string type = string(pt["type"], p + ".type");
      if (type == "loop") {
        only_keys(pt, p, {"type", "normal", "lo", "hi", "current"});
        LoopPattern lp;
        if (pt.contains("normal")) lp.normal = axis(pt["normal"], p + ".normal");
        if (!pt.contains("lo") || !pt.contains("hi")) fail(p, "loop needs lo and hi node corners");
        lp.lo = triple<Lattice>(pt["lo"], p + ".lo", true);
        lp.hi = triple<Lattice>(pt["hi"], p + ".hi", true);
        if (pt.contains("current")) lp.current = number(pt["current"], p + ".current");
        s.source.pattern = lp;
      } else if (type == "box") {
        only_keys(pt, p, {"type", "direction", "lo", "hi", "current"});
        BoxPattern bp;
        if (!pt.contains("direction")) fail(p + ".direction", "missing");
        bp.direction = axis(pt["direction"], p + ".direction");
        if (!pt.contains("lo") || !pt.contains("hi")) fail(p, "box needs lo and hi node corners");
        bp.lo = triple<Lattice>(pt["lo"], p + ".lo", true);
        bp.hi = triple<Lattice>(pt["hi"], p + ".hi", true);
        if (pt.contains("current")) bp.current = number(pt["current"], p + ".current");
        s.source.pattern = bp;
      } else if (type == "edges") {
        only_keys(pt, p, {"type", "edges"});
        EdgeListPattern ep;
        if (pt.contains("edges")) {
          if (!pt["edges"].is_array()) fail(p + ".edges", "expected an array");
          for (std::size_t i = 0; i < pt["edges"].size(); ++i) {
            const Json& e = pt["edges"][i];
            const std::string q = p + ".edges[" + std::to_string(i) + "]";
            only_keys(e, q, {"axis", "at", "value"});
            EdgeEntry ee;
            if (!e.contains("axis") || !e.contains("at")) fail(q, "needs axis and at");
            ee.axis = axis(e["axis"], q + ".axis");
            ee.at = triple<Lattice>(e["at"], q + ".at", true);
            if (e.contains("value")) ee.value = number(e["value"], q + ".value");
            ep.edges.push_back(ee);
          }
        }
        s.source.pattern = ep;
      } else {
        fail(p + ".type", "unknown pattern '" + type + "' (expected loop, box, edges)");
      }
    }
    if (src.contains("profile")) {
      const Json& pr = src["profile"];
      const std::string p = "source.profile";
      if (!pr.is_object() || !pr.contains("type"))
        fail(p, "needs a type (sine, gaussian_pulse, smooth_ramp)");
      const std::string type = string(pr["type"], p + ".type");
      if (type == "sine") {
        only_keys(pr, p, {"type", "frequency"});
        Sine q;
        if (pr.contains("frequency")) q.frequency = number(pr["frequency"], p + ".frequency");
        s.source.profile = q;
      } else if (type == "gaussian_pulse") {
        only_keys(pr, p, {"type", "t0", "sigma"});
        GaussianPulse q;
        if (pr.contains("t0")) q.t0 = number(pr["t0"], p + ".t0");
        if (pr.contains("sigma")) q.sigma = number(pr["sigma"], p + ".sigma");
        s.source.profile = q;
      } else if (type == "smooth_ramp") {
        only_keys(pr, p, {"type", "t_rise"});
        SmoothRamp q;
        if (pr.contains("t_rise")) q.t_rise = number(pr["t_rise"], p + ".t_rise");
        s.source.profile = q;
      } else {
        fail(p + ".type", "unknown profile '" + type + "' (expected sine, gaussian_pulse, smooth_ramp)");
      }
    }
  } else {
    s.source.amplitude = 0.0;
  }

  // stepper
  if (root.contains("stepper")) {
    const Json& st = root["stepper"];
    only_keys(st, "stepper", {"dt", "theta", "steps", "record_stride", "solver"});
    if (st.contains("dt")) s.stepper.dt = number(st["dt"], "stepper.dt");
    if (st.contains("theta")) s.stepper.theta = number(st["theta"], "stepper.theta");
    if (st.contains("steps")) s.stepper.steps = integer(st["steps"], "stepper.steps");
    if (st.contains("record_stride"))
      s.stepper.record_stride = integer(st["record_stride"], "stepper.record_stride");
    if (st.contains("solver")) {
      const Json& so = st["solver"];
      only_keys(so, "stepper.solver", {"kind", "tolerance", "max_iterations", "check_rank"});
      if (so.contains("kind")) {
        const std::string k = string(so["kind"], "stepper.solver.kind");
        if (k == "direct")
          s.stepper.solver.kind = SolverKind::Direct;
        else if (k == "iterative")
          s.stepper.solver.kind = SolverKind::Iterative;
        else
          fail("stepper.solver.kind", "expected direct or iterative");
      }
      if (so.contains("tolerance"))
        s.stepper.solver.tolerance = number(so["tolerance"], "stepper.solver.tolerance");
      if (so.contains("max_iterations"))
        s.stepper.solver.max_iterations =
            int(integer(so["max_iterations"], "stepper.solver.max_iterations"));
      if (so.contains("check_rank")) {
        if (!so["check_rank"].is_boolean()) fail("stepper.solver.check_rank", "expected a boolean");
        s.stepper.solver.check_rank = so["check_rank"].get<bool>();
      }
    }
  }

  // artificial (after source and stepper: tau defaults depend on both)
  {
    const bool sine = root.contains("source") && std::holds_alternative<Sine>(s.source.profile);
    s.artificial.tau = sine ? 1.0 / (2.0 * std::numbers::pi * std::get<Sine>(s.source.profile).frequency)
                            : 10.0 * s.stepper.dt;
  }
  if (root.contains("artificial")) {
    const Json& ar = root["artificial"];
    only_keys(ar, "artificial", {"kappa_hat", "eps_hat", "tau", "region"});
    if (ar.contains("tau")) s.artificial.tau = number(ar["tau"], "artificial.tau");
    if (ar.contains("kappa_hat")) {
      const Json& k = ar["kappa_hat"];
      if (k.is_string()) {
        const std::string r = k.get<std::string>();
        if (r == "eps_over_tau")
          s.artificial.kappa_hat_rule = KappaHatRule::EpsOverTau;
        else if (r == "none")
          s.artificial.kappa_hat_rule = KappaHatRule::None;
        else
          fail("artificial.kappa_hat", "expected \"eps_over_tau\", \"none\" or a number");
      } else {
        s.artificial.kappa_hat_rule = KappaHatRule::Constant;
        s.artificial.kappa_hat = number(k, "artificial.kappa_hat");
      }
    }
    if (ar.contains("eps_hat") && !ar["eps_hat"].is_null())
      s.artificial.eps_hat = number(ar["eps_hat"], "artificial.eps_hat");
    if (ar.contains("region")) {
      const std::string r = string(ar["region"], "artificial.region");
      if (r == "whole")
        s.artificial.region = GaugeRegion::Whole;
      else if (r == "non_conductive")
        s.artificial.region = GaugeRegion::NonConductive;
      else
        fail("artificial.region", "expected whole or non_conductive");
    }
  }

  // init
  if (root.contains("init")) {
    const Json& in = root["init"];
    only_keys(in, "init", {"A0", "phi0"});
    auto field = [&](const char* key, FieldInit& out) {
      if (!in.contains(key)) return;
      const std::string p = std::string("init.") + key;
      const Json& f = in[key];
      only_keys(f, p, {"kind", "amplitude"});
      if (f.contains("kind")) {
        const std::string k = string(f["kind"], p + ".kind");
        if (k == "zero")
          out.kind = InitKind::Zero;
        else if (k == "random")
          out.kind = InitKind::Random;
        else
          fail(p + ".kind", "expected zero or random");
      }
      if (f.contains("amplitude")) out.amplitude = number(f["amplitude"], p + ".amplitude");
    };
    field("A0", s.A0);
    field("phi0", s.phi0);
  }

  if (root.contains("seed")) {
    const long long v = integer(root["seed"], "seed");
    if (v < 0) fail("seed", "must be >= 0");
    s.seed = std::uint64_t(v);
  }
  if (root.contains("sweep")) {
    const Json& sw = root["sweep"];
    only_keys(sw, "sweep", {"factors"});
    if (sw.contains("factors")) {
      if (!sw["factors"].is_array()) fail("sweep.factors", "expected an array");
      for (std::size_t i = 0; i < sw["factors"].size(); ++i)
        s.sweep_factors.push_back(number(sw["factors"][i], "sweep.factors[" + std::to_string(i) + "]"));
    }
  }
  if (root.contains("output")) {
    const Json& o = root["output"];
    only_keys(o, "output", {"dir"});
    if (o.contains("dir")) s.output_dir = string(o["dir"], "output.dir");
  }

  validate(s);
  return s;
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("scenario: " + origin + ": " + e.what());
  }
}

inline Scenario parse_scenario_text(const std::string& text, const std::string& origin = "<text>") {
  return parse_scenario_json(parse_json_text(text, origin));
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("scenario: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline Scenario parse_scenario(const std::string& path) {
  return parse_scenario_text(read_text_file(path), path);
}

/// Canonical form with every default spelled out.
inline Json to_json(const Scenario& s) {
  using scenario_detail::axis_str;
  using scenario_detail::lattice_json;
  Json j;
  j["name"] = s.name;
  j["grid"] = {{"cells", lattice_json(s.grid.cells)},
               {"spacing", Json::array({s.grid.spacing[0], s.grid.spacing[1], s.grid.spacing[2]})},
               {"ground", lattice_json(s.ground)}};
  Json regions = Json::array();
  for (const auto& r : s.materials.regions) {
    Json rj = {{"name", r.name}, {"lo", lattice_json(r.box.lo)}, {"hi", lattice_json(r.box.hi)}};
    if (r.kappa) rj["kappa"] = *r.kappa;
    if (r.eps) rj["eps"] = *r.eps;
    if (r.nu) rj["nu"] = *r.nu;
    regions.push_back(rj);
  }
  j["materials"] = {
      {"background", {{"kappa", s.materials.kappa}, {"eps", s.materials.eps}, {"nu", s.materials.nu}}},
      {"regions", regions}};
  Json ar;
  switch (s.artificial.kappa_hat_rule) {
    case KappaHatRule::None: ar["kappa_hat"] = "none"; break;
    case KappaHatRule::EpsOverTau: ar["kappa_hat"] = "eps_over_tau"; break;
    case KappaHatRule::Constant: ar["kappa_hat"] = s.artificial.kappa_hat; break;
  }
  ar["eps_hat"] = s.artificial.eps_hat ? Json(*s.artificial.eps_hat) : Json(nullptr);
  ar["tau"] = s.artificial.tau;
  ar["region"] = s.artificial.region == GaugeRegion::Whole ? "whole" : "non_conductive";
  j["artificial"] = ar;
  Json tags = Json::array();
  for (auto t : s.formulations) tags.push_back(std::string(tag_name(t)));
  j["formulations"] = tags;

  Json pat = std::visit(
      [&](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LoopPattern>) {
          return {{"type", "loop"}, {"normal", axis_str(p.normal)}, {"lo", lattice_json(p.lo)},
                  {"hi", lattice_json(p.hi)}, {"current", p.current}};
        } else if constexpr (std::is_same_v<T, BoxPattern>) {
          return {{"type", "box"}, {"direction", axis_str(p.direction)}, {"lo", lattice_json(p.lo)},
                  {"hi", lattice_json(p.hi)}, {"current", p.current}};
        } else {
          Json edges = Json::array();
          for (const auto& e : p.edges)
            edges.push_back({{"axis", axis_str(e.axis)}, {"at", lattice_json(e.at)}, {"value", e.value}});
          return {{"type", "edges"}, {"edges", edges}};
        }
      },
      s.source.pattern);
  Json prof = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Sine>)
          return {{"type", "sine"}, {"frequency", p.frequency}};
        else if constexpr (std::is_same_v<T, GaussianPulse>)
          return {{"type", "gaussian_pulse"}, {"t0", p.t0}, {"sigma", p.sigma}};
        else
          return {{"type", "smooth_ramp"}, {"t_rise", p.t_rise}};
      },
      s.source.profile);
  j["source"] = {{"pattern", pat}, {"profile", prof}, {"amplitude", s.source.amplitude}};
  j["stepper"] = {
      {"dt", s.stepper.dt},
      {"theta", s.stepper.theta},
      {"steps", s.stepper.steps},
      {"record_stride", s.stepper.record_stride},
      {"solver",
       {{"kind", s.stepper.solver.kind == SolverKind::Direct ? "direct" : "iterative"},
        {"tolerance", s.stepper.solver.tolerance},
        {"max_iterations", s.stepper.solver.max_iterations},
        {"check_rank", s.stepper.solver.check_rank}}}};
  auto init = [](const FieldInit& f) -> Json {
    return {{"kind", f.kind == InitKind::Zero ? "zero" : "random"}, {"amplitude", f.amplitude}};
  };
  j["init"] = {{"A0", init(s.A0)}, {"phi0", init(s.phi0)}};
  j["seed"] = s.seed;
  j["sweep"] = {{"factors", s.sweep_factors}};
  j["output"] = {{"dir", s.output_dir}};
  return j;
}

inline std::string echo(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Building simulation inputs

inline MaterialField build_material(const Scenario& s, const DofMap& map) {
  MaterialField m = MaterialField::uniform(map, s.materials.kappa, s.materials.eps, s.materials.nu);
  for (const auto& r : s.materials.regions) m.fill_box(map, r.box, r.kappa, r.eps, r.nu);
  switch (s.artificial.kappa_hat_rule) {
    case KappaHatRule::None: break;
    case KappaHatRule::EpsOverTau: m.set_kappa_hat_eps_over_tau(s.artificial.tau); break;
    case KappaHatRule::Constant: m.set_kappa_hat(s.artificial.kappa_hat); break;
  }
  if (s.artificial.eps_hat) m.set_eps_hat(*s.artificial.eps_hat);
  return m;
}

inline Problem build_problem(const Scenario& s) {
  const DofMap map = build_grid(s.grid, s.ground);
  return Problem(s.grid, build_material(s, map), s.artificial.region, s.ground);
}

/// Edge pattern on the interior edges. Edges on the PEC boundary carry no
/// current and are skipped.
inline Vector build_pattern(const Scenario& s, const DofMap& map) {
  Vector u = Vector::Zero(map.num_interior_edges());
  auto add = [&](Axis axis, const Lattice& tail, double value) {
    if (map.edge_on_boundary(axis, tail)) return;
    u[map.reduced_edge(map.edge_index(axis, tail))] += value;
  };
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LoopPattern>) {
          const int a = axis_index(p.normal), b = (a + 1) % 3, c = (a + 2) % 3;
          // Counter-clockwise about the normal: +b along the low c side, +c
          // along the high b side, -b along the high c side, -c along the low b side.
          for (int i = p.lo[b]; i < p.hi[b]; ++i) {
            Lattice q = p.lo;
            q[b] = i;
            add(axis_from_index(b), q, p.current);
            q[c] = p.hi[c];
            add(axis_from_index(b), q, -p.current);
          }
          for (int k = p.lo[c]; k < p.hi[c]; ++k) {
            Lattice q = p.lo;
            q[c] = k;
            add(axis_from_index(c), q, -p.current);
            q[b] = p.hi[b];
            add(axis_from_index(c), q, p.current);
          }
        } else if constexpr (std::is_same_v<T, BoxPattern>) {
          const int d = axis_index(p.direction);
          for (int k = p.lo[2]; k <= p.hi[2]; ++k)
            for (int j = p.lo[1]; j <= p.hi[1]; ++j)
              for (int i = p.lo[0]; i <= p.hi[0]; ++i) {
                const Lattice q{i, j, k};
                if (q[d] + 1 > p.hi[d]) continue;
                add(p.direction, q, p.current);
              }
        } else {
          for (const auto& e : p.edges) add(e.axis, e.at, e.value);
        }
      },
      s.source.pattern);
  return u;
}

inline SourceWaveform build_source(const Scenario& s, const DofMap& map) {
  return {build_pattern(s, map), s.source.profile, s.source.amplitude};
}

/// Initial A0 and phi0 from the seed.
inline std::pair<Vector, Vector> initial_fields(const Scenario& s, const Problem& p) {
  std::mt19937_64 rng(s.seed);
  auto make = [&](const FieldInit& f, Index n) {
    if (f.kind == InitKind::Zero) return Vector(Vector::Zero(n));
    Vector v = detail::random_vector(rng, n);
    return Vector(f.amplitude * v);
  };
  Vector A0 = make(s.A0, p.ops.num_edges());
  Vector phi0 = make(s.phi0, p.ops.num_nodes());
  return {A0, phi0};
}

/// Human-readable warnings about a scenario that is valid but unusual.
inline std::vector<std::string> scenario_warnings(const Scenario& s, const Problem& p) {
  std::vector<std::string> w;
  const Vector u = build_pattern(s, p.map);
  if (s.source.amplitude != 0.0 && u.size() > 0) {
    if (u.cwiseAbs().maxCoeff() == 0.0)
      w.push_back("source pattern has no interior edges (all on the PEC boundary)");
    const Vector div = p.ops.G.transpose() * u;
    const double d = div.size() ? div.cwiseAbs().maxCoeff() : 0.0;
    if (d > 1e-12 * std::max(1.0, u.cwiseAbs().maxCoeff())) {
      std::ostringstream os;
      os << "source is not solenoidal (max |G^T u| = " << d
         << "); it forces the potential equations";
      w.push_back(os.str());
    }
  }
  const bool skew = std::find(s.formulations.begin(), s.formulations.end(),
                              FormulationTag::EmqsCoulombSkew) != s.formulations.end();
  if (skew && s.artificial.kappa_hat_rule == KappaHatRule::Constant) {
    bool uniform_eps = s.materials.eps > 0.0;
    for (const auto& r : s.materials.regions)
      if (r.eps && *r.eps != s.materials.eps) uniform_eps = false;
    if (!uniform_eps)
      w.push_back("constant kappa_hat with non-uniform eps: EMQS_COULOMB_SKEW keeps lambda = 0 "
                  "only when kappa_hat is proportional to eps (use \"eps_over_tau\")");
  }
  if (s.A0.kind == InitKind::Random && s.A0.amplitude != 0.0) {
    for (FormulationTag t : s.formulations)
      if (t != FormulationTag::Maxwell) {
        w.push_back("random A0 is not consistent initial data for " + std::string(tag_name(t)) +
                    "; start from rest for energy and gauge audits");
        break;
      }
  }
  return w;
}

}  // namespace emqs
