#include "scaffoldlab/cli_reporter.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scaffoldlab/asw_tower.hpp"
#include "scaffoldlab/errors.hpp"

namespace scaffoldlab {

using nlohmann::json;

namespace {

constexpr long long kTowerCap = 27;   // largest p^n with full tower arithmetic
constexpr long long kConfigCap = 128;  // largest p^n handled at all
constexpr int kMaxRetries = 3;

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

bool small_prime(long long v) {
  if (v < 2) return false;
  for (long long d = 2; d * d <= v; ++d)
    if (v % d == 0) return false;
  return true;
}

long long ipow_ll(long long base, unsigned exp) {
  long long acc = 1;
  for (unsigned k = 0; k < exp; ++k) {
    if (acc > kConfigCap) return kConfigCap + 1;  // callers only compare against caps
    acc *= base;
  }
  return acc;
}

long long get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) bad("\"" + path + "\" must be an integer");
  return j.get<long long>();
}

std::vector<std::string> get_series_list(const json& j, const std::string& path, unsigned n) {
  if (!j.is_array()) bad("\"" + path + "\" must be an array of series strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) bad("\"" + path + "\" must contain only strings");
    out.push_back(e.get<std::string>());
  }
  if (out.size() != n) bad("\"" + path + "\" must list exactly n = " + std::to_string(n) +
                           " series, got " + std::to_string(out.size()));
  return out;
}

}  // namespace

CaseConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    bad(std::string("not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) bad("top level must be an object");

  static const std::set<std::string> known{"p",      "n",      "beta",  "omega",
                                           "series_precision", "verify", "c_test"};
  for (const auto& item : doc.items())
    if (!known.count(item.key())) bad("unknown field \"" + item.key() + "\"");
  for (const char* req : {"p", "n", "beta"})
    if (!doc.contains(req)) bad(std::string("missing field \"") + req + "\"");

  CaseConfig cfg;
  const long long p = get_int(doc["p"], "p");
  if (!small_prime(p) || p > 127) bad("\"p\" must be prime (and at most 127)");
  cfg.p = static_cast<unsigned>(p);
  const long long n = get_int(doc["n"], "n");
  if (n < 1 || n > 7) bad("\"n\" must be between 1 and 7");
  cfg.n = static_cast<unsigned>(n);

  cfg.beta = get_series_list(doc["beta"], "beta", cfg.n);
  if (doc.contains("omega")) cfg.omega = get_series_list(doc["omega"], "omega", cfg.n);

  if (doc.contains("series_precision")) {
    const long long sp = get_int(doc["series_precision"], "series_precision");
    if (sp < 16) bad("\"series_precision\" must be at least 16");
    cfg.series_precision = sp;
  }

  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    if (!v.is_object()) bad("\"verify\" must be an object");
    for (const auto& item : v.items())
      if (item.key() != "scaffold" && item.key() != "window")
        bad("unknown field \"verify." + item.key() + "\"");
    if (v.contains("scaffold")) {
      if (!v["scaffold"].is_boolean()) bad("\"verify.scaffold\" must be a boolean");
      cfg.verify.scaffold = v["scaffold"].get<bool>();
    }
    if (v.contains("window")) {
      const json& w = v["window"];
      if (!w.is_array() || w.size() != 2) bad("\"verify.window\" must be [lo, hi)");
      const long long lo = get_int(w[0], "verify.window[0]");
      const long long hi = get_int(w[1], "verify.window[1]");
      if (hi <= lo) bad("\"verify.window\" must satisfy lo < hi");
      cfg.verify.window = std::make_pair(lo, hi);
    }
  }

  if (doc.contains("c_test")) {
    if (cfg.n != 1) bad("\"c_test\" applies only when n = 1");
    const long long c = get_int(doc["c_test"], "c_test");
    if (c < 1) bad("\"c_test\" must be at least 1");
    cfg.c_test = c;
  }

  const long long pn = ipow_ll(cfg.p, cfg.n);
  if (pn > kConfigCap) bad("p^n must be at most " + std::to_string(kConfigCap));
  if (cfg.verify.scaffold && pn > kTowerCap)
    bad("\"verify.scaffold\" requires p^n <= " + std::to_string(kTowerCap));
  return cfg;
}

CaseConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

Report analyze(const CaseConfig& config) {
  Report rep;
  rep.config = config;
  Diagnostics& diag = rep.diagnostics;
  auto stage = [&diag](const char* s) { diag.stages.emplace_back(s); };

  const PrimeField field(config.p);
  const long long pn = ipow_ll(config.p, config.n);

  stage("parse");
  std::vector<LaurentSeries> beta;
  for (std::size_t i = 0; i < config.beta.size(); ++i) {
    try {
      beta.push_back(parse_series(field, config.beta[i]));
    } catch (const ConfigError& e) {
      throw ConfigError("beta[" + std::to_string(i) + "]: " + e.what());
    }
  }
  std::optional<std::vector<LaurentSeries>> omega;
  if (config.omega) {
    omega.emplace();
    for (std::size_t i = 0; i < config.omega->size(); ++i) {
      try {
        omega->push_back(parse_series(field, (*config.omega)[i]));
      } catch (const ConfigError& e) {
        throw ConfigError("omega[" + std::to_string(i) + "]: " + e.what());
      }
    }
  }

  stage("reduce-check");
  const ReducedReport reduced = check_reduced(beta, config.p);
  rep.reduced = reduced.reduced;
  if (!rep.reduced) {
    rep.assumption_report = reduced.coordinates;
    diag.notes.emplace_back("defining vector is not reduced; analysis stopped");
    return rep;
  }

  stage("breaks");
  rep.u = upper_breaks(beta, config.p);
  rep.b = lower_breaks(rep.u, config.p);
  std::optional<std::vector<long long>> m;
  try {
    m = stable_m(rep.u, config.p);
    rep.m = *m;
  } catch (const ConfigError& e) {
    diag.notes.emplace_back(std::string("twist orders unavailable: ") + e.what());
  }

  stage("decompose");
  std::optional<Decomposition> dec;
  try {
    dec = decompose(beta, config.p, omega);
  } catch (const ConfigError& e) {
    diag.notes.emplace_back(std::string("decomposition unavailable: ") + e.what());
  }

  stage("assumptions");
  AssumptionReport assumptions = check_assumptions(rep.u, rep.b, config.p, m, dec);
  rep.assumption_report = assumptions.checks;
  rep.eligible = assumptions.eligible;
  if (!rep.eligible) return rep;

  const BreakData breaks = make_break_data(rep.u, config.p);
  rep.precision_c = scaffold_precision(breaks, config.p);

  if (pn > kTowerCap) {
    // Above the desk cap the tower itself is out of reach; the valuations
    // below are the closed forms that the in-cap path verifies exactly.
    stage("precision");
    long long v = -breaks.b[0];
    for (std::size_t k = 1; k < breaks.m.size(); ++k)
      v -= ipow_ll(config.p, config.n + static_cast<unsigned>(k) - 1) * breaks.m[k];
    rep.vLY = v;
    for (std::size_t i = 0; i < breaks.m.size(); ++i) {
      long long c = 0;
      for (std::size_t h = 0; h < breaks.m.size(); ++h) {
        if (h == i) continue;
        const unsigned e = static_cast<unsigned>(h < i ? h : h - 1);
        c -= ipow_ll(config.p, e) * breaks.m[h];
      }
      rep.cofactor_valuations.push_back(c);
    }
    diag.notes.emplace_back("p^n exceeds the tower cap of " + std::to_string(kTowerCap) +
                            ": generator and scaffold verification skipped; "
                            "valuations filled from the closed formulas");
  } else {
    stage("tower");
    long long prec =
        config.series_precision.value_or(4 * pn * breaks.u.back() + 64);
    for (int attempt = 0;; ++attempt) {
      try {
        TowerConfig tc;
        tc.p = config.p;
        tc.n = config.n;
        tc.beta = beta;
        tc.series_precision = prec;
        const std::shared_ptr<const Tower> tower = Tower::build(tc);

        GeneratorData gen = build_generators(tower, breaks, *dec);
        std::vector<NamedCheck> gen_checks = verify_generators(gen);
        const long long vly = tower->exact_valuation(gen.Y);
        std::vector<long long> cof_vals;
        for (const LaurentSeries& cof : gen.cofactors) {
          const Valuation vc = cof.valuation();
          if (!vc.is_finite()) throw ContractError("cofactor with no finite valuation");
          cof_vals.push_back(vc.value);
        }

        std::optional<ScaffoldCertificate> cert;
        if (config.verify.scaffold) {
          const DigitMaps dm = digit_maps(breaks.b, config.p);
          const ScaffoldOperators ops(gen, dm);
          const auto window = config.verify.window.value_or(std::make_pair(-pn, 2 * pn));
          const long long used_c =
              config.n == 1 ? config.c_test.value_or(breaks.b[0]) : *rep.precision_c;
          cert = verify_scaffold(ops, window.first, window.second, used_c, rep.precision_c);
        }

        stage("Y/X");
        stage("precision");
        rep.vLY = vly;
        rep.cofactor_valuations = std::move(cof_vals);
        diag.generator_checks = std::move(gen_checks);
        if (cert) {
          stage("verification");
          rep.certificate = std::move(cert);
        }
        diag.notes.emplace_back("series precision " + std::to_string(prec));
        break;
      } catch (const PrecisionError& e) {
        if (attempt >= kMaxRetries) throw;
        diag.notes.emplace_back("precision retry " + std::to_string(attempt + 1) + ": " +
                                std::to_string(prec) + " -> " + std::to_string(2 * prec) +
                                " (" + e.what() + ")");
        prec *= 2;
      }
    }
  }

  stage("verdicts");
  rep.gms = gms_verdict(breaks, config.p, rep.precision_c);
  rep.hopf = hopf_verdict(breaks, config.p, *rep.gms);
  return rep;
}

namespace {

json config_json(const CaseConfig& c) {
  json j;
  j["p"] = c.p;
  j["n"] = c.n;
  j["beta"] = c.beta;
  if (c.omega) j["omega"] = *c.omega;
  if (c.series_precision) j["series_precision"] = *c.series_precision;
  json v;
  v["scaffold"] = c.verify.scaffold;
  if (c.verify.window) v["window"] = {c.verify.window->first, c.verify.window->second};
  j["verify"] = v;
  if (c.c_test) j["c_test"] = *c.c_test;
  return j;
}

json checks_json(const std::vector<NamedCheck>& checks) {
  json arr = json::array();
  for (const NamedCheck& c : checks)
    arr.push_back(json{{"detail", c.detail}, {"name", c.name}, {"ok", c.ok}});
  return arr;
}

json certificate_json(const ScaffoldCertificate& c) {
  json j;
  j["precision_c"] = c.precision_c ? json(*c.precision_c) : json("unbounded");
  j["used_c"] = c.used_c;
  j["psi_choice"] = c.psi_choice;
  j["window"] = {c.window_lo, c.window_hi};
  j["valid"] = c.valid;
  json recs = json::array();
  for (const AxiomRecord& r : c.records) {
    json e{{"axiom", r.axiom}, {"detail", r.detail}, {"i", r.i}, {"ok", r.ok}, {"t", r.t}};
    if (r.unit) e["unit"] = *r.unit;
    recs.push_back(e);
  }
  j["records"] = recs;
  j["unit_periodicity"] = checks_json(c.unit_periodicity);
  return j;
}

std::string render_json(const Report& rep) {
  json out;
  out["config"] = config_json(rep.config);
  out["reduced"] = rep.reduced;
  out["u"] = rep.u;
  out["b"] = rep.b;
  out["m"] = rep.m;
  out["assumption_report"] = checks_json(rep.assumption_report);
  out["eligible"] = rep.eligible;
  if (rep.vLY) out["vLY"] = *rep.vLY;
  if (!rep.cofactor_valuations.empty()) out["cofactor_valuations"] = rep.cofactor_valuations;
  if (rep.eligible)
    out["precision_c"] = rep.precision_c ? json(*rep.precision_c) : json("unbounded");
  if (rep.certificate) out["certificate"] = certificate_json(*rep.certificate);
  if (rep.gms)
    out["gms"] = json{{"divisor_ok", rep.gms->divisor_ok},
                      {"r_u1", rep.gms->r_u1},
                      {"strengthened_ok", rep.gms->strengthened_ok},
                      {"verdict", rep.gms->verdict}};
  if (rep.hopf)
    out["hopf"] = json{{"congruence_ok", rep.hopf->congruence_ok}, {"verdict", rep.hopf->verdict}};
  json d;
  d["stages"] = rep.diagnostics.stages;
  d["notes"] = rep.diagnostics.notes;
  d["generator_checks"] = checks_json(rep.diagnostics.generator_checks);
  out["diagnostics"] = d;
  return out.dump(2) + "\n";
}

void render_list(std::ostringstream& os, const char* label, const std::vector<long long>& xs) {
  os << label << ":";
  for (long long x : xs) os << " " << x;
  os << "\n";
}

std::string render_text(const Report& rep) {
  std::ostringstream os;
  os << "case: p=" << rep.config.p << " n=" << rep.config.n << "\n";
  os << "beta:";
  for (const std::string& b : rep.config.beta) os << " " << b;
  os << "\n";
  os << "reduced: " << (rep.reduced ? "yes" : "no") << "\n";
  if (!rep.u.empty()) render_list(os, "upper breaks", rep.u);
  if (!rep.b.empty()) render_list(os, "lower breaks", rep.b);
  if (!rep.m.empty()) render_list(os, "twist orders", rep.m);

  std::size_t ok = 0;
  for (const NamedCheck& c : rep.assumption_report) ok += c.ok ? 1 : 0;
  os << "assumptions: " << ok << "/" << rep.assumption_report.size() << " hold\n";
  for (const NamedCheck& c : rep.assumption_report)
    if (!c.ok) os << "  fail " << c.name << ": " << c.detail << "\n";
  os << "eligible: " << (rep.eligible ? "yes" : "no") << "\n";

  if (!rep.eligible) {
    os << "precision c: n/a\n";
    os << "verdict: ineligible\n";
    return os.str();
  }

  if (rep.vLY) os << "v_L(Y): " << *rep.vLY << "\n";
  if (!rep.cofactor_valuations.empty())
    render_list(os, "cofactor valuations (v_K)", rep.cofactor_valuations);
  os << "precision c: ";
  if (rep.precision_c)
    os << *rep.precision_c << "\n";
  else
    os << "unbounded\n";

  if (!rep.diagnostics.generator_checks.empty()) {
    std::size_t gok = 0;
    for (const NamedCheck& c : rep.diagnostics.generator_checks) gok += c.ok ? 1 : 0;
    os << "generator checks: " << gok << "/" << rep.diagnostics.generator_checks.size()
       << " pass\n";
    for (const NamedCheck& c : rep.diagnostics.generator_checks)
      if (!c.ok) os << "  fail " << c.name << ": " << c.detail << "\n";
  }

  if (rep.certificate) {
    const ScaffoldCertificate& c = *rep.certificate;
    os << "scaffold certificate: " << (c.valid ? "valid" : "INVALID") << " ("
       << c.records.size() << " records, used c = " << c.used_c << ", window [" << c.window_lo
       << ", " << c.window_hi << "))\n";
    for (const AxiomRecord& r : c.records)
      if (!r.ok)
        os << "  fail axiom " << r.axiom << " at i=" << r.i << " t=" << r.t << ": " << r.detail
           << "\n";
  }

  if (rep.gms) {
    os << "verdict: " << rep.gms->verdict << " (r(u1) = " << rep.gms->r_u1 << ", strengthened "
       << (rep.gms->strengthened_ok ? "yes" : "no") << ", divisor "
       << (rep.gms->divisor_ok ? "yes" : "no") << ")\n";
  }
  if (rep.hopf)
    os << "hopf: " << rep.hopf->verdict
       << (rep.hopf->congruence_ok ? " (congruence holds)" : " (congruence fails)") << "\n";
  for (const std::string& note : rep.diagnostics.notes) os << "note: " << note << "\n";
  return os.str();
}

}  // namespace

std::string render_report(const Report& report, const std::string& format) {
  if (format == "json") return render_json(report);
  if (format == "text") return render_text(report);
  throw ConfigError("unknown report format: " + format);
}

}  // namespace scaffoldlab
