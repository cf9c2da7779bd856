#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scaffoldlab/ramification.hpp"
#include "scaffoldlab/scaffold_builder.hpp"

namespace scaffoldlab {

struct VerifySpec {
  bool scaffold = false;
  std::optional<std::pair<long long, long long>> window;  // [lo, hi)
};

// One analysis case as read from a config file.  Field names match the JSON
// schema exactly: p, n, beta, omega, series_precision, verify.scaffold,
// verify.window, c_test.
struct CaseConfig {
  unsigned p = 2;
  unsigned n = 1;
  std::vector<std::string> beta;
  std::optional<std::vector<std::string>> omega;
  std::optional<long long> series_precision;
  VerifySpec verify;
  std::optional<long long> c_test;  // depth-one only: finite bound for verification
};

// Parses and validates config JSON text; errors name the offending field.
CaseConfig parse_config(const std::string& json_text);

// Reads the file and delegates to parse_config.
CaseConfig load_config(const std::string& path);

struct Diagnostics {
  std::vector<std::string> stages;           // pipeline stages actually run, in order
  std::vector<std::string> notes;            // retries, fallbacks, effective precision
  std::vector<NamedCheck> generator_checks;  // generator verification outcomes
};

struct Report {
  CaseConfig config;  // echo of the analyzed configuration
  bool reduced = false;
  std::vector<long long> u;  // upper ramification breaks
  std::vector<long long> b;  // lower ramification breaks
  std::vector<long long> m;  // twist orders (empty when not derivable)
  std::vector<NamedCheck> assumption_report;
  bool eligible = false;

  // Populated only when eligible.
  std::optional<long long> vLY;
  std::vector<long long> cofactor_valuations;      // v_K(t_i)
  std::optional<long long> precision_c;            // absent = unbounded (n = 1)
  std::optional<ScaffoldCertificate> certificate;  // when verify.scaffold
  std::optional<GmsVerdict> gms;
  std::optional<HopfVerdict> hopf;

  Diagnostics diagnostics;
};

// Runs the full pipeline: parse -> reduce-check -> breaks -> decompose ->
// assumptions -> tower -> Y/X -> precision -> verification -> verdicts.
// Ineligible cases stop after the assumption report.  Precision exhaustion
// retries with doubled series precision up to three times before giving up.
Report analyze(const CaseConfig& config);

// format is "json" (canonical: sorted keys, stable layout) or "text".
std::string render_report(const Report& report, const std::string& format);

}  // namespace scaffoldlab
