#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "emqs/scenario.hpp"

namespace emqs {

/// Ledger CSV columns, in file order.
///
///   step               step index (0 = initial state)
///   t                  time [s]
///   h_quadratic        1/2 x^T E x (nan when E is not symmetric)
///   h_fieldwise        field-wise energy of the matching Hamiltonian kind
///   h_difference       h_quadratic - h_fieldwise
///   dissipation        xm^T R xm of the last step
///   port_power         ym^T um of the last step
///   work_in            accumulated dt * port_power
///   work_dissipated    accumulated dt * dissipation
///   balance_residual   worst |H+ - H- - dt(-dissipation + port_power)| since the previous row
///   balance_relative   the same divided by max(1, |H-|)
///   gauge_residual     worst |G^T Me (a+ - a-)|_max since the previous row
///   gauge_relative     the same divided by |G^T Me|_inf max_t |a|_max
///   lambda_max         |lambda|_max (0 without a lambda block)
///   phi_max            |phi|_max
///   flux_residual      |Mmu h - C A|_max
///   flux_relative      worst relative flux residual since the previous row
inline constexpr std::array<const char*, 17> kLedgerColumns = {
    "step",           "t",                "h_quadratic",      "h_fieldwise",    "h_difference",
    "dissipation",    "port_power",       "work_in",          "work_dissipated", "balance_residual",
    "balance_relative", "gauge_residual", "gauge_relative",   "lambda_max",     "phi_max",
    "flux_residual",  "flux_relative"};

namespace io_detail {

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// JSON has no NaN or infinity; they are written as strings.
inline Json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

}  // namespace io_detail

inline void write_ledger_csv(std::ostream& os, const EnergyLedger& ledger) {
  for (std::size_t i = 0; i < kLedgerColumns.size(); ++i)
    os << (i ? "," : "") << kLedgerColumns[i];
  os << "\r\n";
  using io_detail::num;
  for (const auto& r : ledger.rows) {
    os << r.step << ',' << num(r.t) << ',' << num(r.h_quadratic) << ',' << num(r.h_fieldwise)
       << ',' << num(r.h_quadratic - r.h_fieldwise) << ',' << num(r.dissipation) << ','
       << num(r.port_power) << ',' << num(r.work_in) << ',' << num(r.work_dissipated) << ','
       << num(r.balance_residual) << ',' << num(r.balance_relative) << ','
       << num(r.gauge_residual) << ',' << num(r.gauge_relative) << ',' << num(r.lambda_max)
       << ',' << num(r.phi_max) << ',' << num(r.flux_residual) << ',' << num(r.flux_relative)
       << "\r\n";
  }
}

inline Json to_json(const Verdict& v) {
  Json j = {{"check", v.check},
            {"tag", v.tag},
            {"expected", v.expected},
            {"measured", io_detail::jnum(v.measured)},
            {"tolerance", io_detail::jnum(v.tolerance)},
            {"pass", v.pass}};
  if (!v.detail.empty()) j["detail"] = v.detail;
  return j;
}

inline Json to_json(const std::vector<Verdict>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) a.push_back(to_json(v));
  return a;
}

inline Json to_json(const ComparisonReport& r) {
  using io_detail::jnum;
  auto summary = [](const ComparisonSummary& s) {
    return Json{{"max", jnum(s.max)}, {"rms", jnum(s.rms)}};
  };
  Json steps = Json::array();
  for (const auto& s : r.steps)
    steps.push_back({{"step", s.step},
                     {"t", jnum(s.t)},
                     {"a", jnum(s.a)},
                     {"potential", jnum(s.potential)},
                     {"h", jnum(s.h)},
                     {"y", jnum(s.y)}});
  Json j = {{"first", std::string(tag_name(r.first))},
            {"second", std::string(tag_name(r.second))},
            {"mode", r.informational ? "informational" : "verdict"},
            {"tolerance", r.tolerance},
            {"gated", r.gated},
            {"summary",
             {{"a", summary(r.a)},
              {"potential", summary(r.potential)},
              {"h", summary(r.h)},
              {"y", summary(r.y)}}}};
  j["pass"] = r.pass ? Json(*r.pass) : Json(nullptr);
  j["steps"] = steps;
  return j;
}

inline Json to_json(const SweepTable& t) {
  Json rows = Json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"factor", r.factor}, {"dt", r.dt}, {"discrepancy", io_detail::jnum(r.discrepancy)}});
  Json j = {{"reference", std::string(tag_name(t.reference))},
            {"candidate", std::string(tag_name(t.candidate))},
            {"rows", rows}};
  j["monotone"] = t.monotone ? to_json(*t.monotone) : Json(nullptr);
  return j;
}

}  // namespace emqs
