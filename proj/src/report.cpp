// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "nlsdecay/errors.hpp"

namespace nlsdecay {
namespace {

constexpr double kProfileResidualLimit = 1e-8;

Json complex_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

std::string label(int point, int chain, int position) {
  return std::to_string(point) + "." + std::to_string(chain) + "." + std::to_string(position);
}

std::string sci(double v) {
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << v;
  return s.str();
}

// Empty cell for null, shortest round-trip text otherwise.
std::string cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
      if (c == '"') quoted += '"';
      quoted += c;
    }
    return quoted + "\"";
  }
  return v.dump();
}

void write_row(std::ostream& out, std::initializer_list<Json> cells) {
  bool first = true;
  for (const Json& c : cells) {
    if (!first) out << ',';
    out << cell(c);
    first = false;
  }
  out << '\n';
}

Json optional_int(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  return out;
}

}  // namespace

bool any_failed(const std::vector<CheckRecord>& checks) {
  for (const auto& c : checks) {
    if (c.status == "fail") return true;
  }
  return false;
}

std::vector<CheckRecord> profile_checks(const ProfileStage& profile) {
  if (!profile.profile) {
    return {{"profile_residual", "skipped", "potentials supplied without a profile"}};
  }
  const double r = profile.profile->residual;
  return {{"profile_residual", r <= kProfileResidualLimit ? "pass" : "fail",
           "residual " + sci(r) + " (limit " + sci(kProfileResidualLimit) + ")"}};
}

std::vector<CheckRecord> spectrum_checks(const RunConfig& cfg, const SpectrumStage& spectrum) {
  std::vector<CheckRecord> out;
  const SymmetryReport& s = spectrum.symmetry;
  out.push_back({"symmetry", s.passed ? "pass" : "fail",
                 "negation " + sci(s.negation_distance) + ", conjugation " +
                     sci(s.conjugation_distance)});
  out.push_back({"spectrum_complete", spectrum.set.partial ? "fail" : "pass",
                 spectrum.set.partial ? "some shifts failed; see diagnostics" : "all shifts ran"});
  if (spectrum.lminus_positive) {
    out.push_back({"axis_confinement", spectrum.axis_confined ? "pass" : "fail",
                   "L_minus is nonnegative; eigenvalues must lie on the axes"});
  }
  for (size_t i = 0; i < spectrum.entries.size(); ++i) {
    const EigenEntry& e = spectrum.entries[i];
    const std::string id = "[" + std::to_string(i) + "]";
    out.push_back({"eigenpair_residual" + id,
                   e.point.residual <= cfg.eigen_tolerance ? "pass" : "fail",
                   "residual " + sci(e.point.residual)});
    if (!e.jordan) {
      out.push_back({"jordan" + id, "skipped", e.note});
    } else {
      const bool ok = e.jordan->determinate && e.jordan->consistent;
      out.push_back({"jordan" + id, ok ? "pass" : "fail",
                     "algebraic " + std::to_string(e.jordan->algebraic) + ", geometric " +
                         std::to_string(e.jordan->geometric) + ", index " +
                         std::to_string(e.jordan->index)});
    }
  }
  return out;
}

std::vector<CheckRecord> decay_checks(const DecayStage& decay) {
  std::vector<CheckRecord> out;
  for (const PointDecay& p : decay.points) {
    const std::string id = "[" + std::to_string(p.point) + "]";
    if (!p.skipped.empty()) {
      out.push_back({"decay" + id, "skipped", p.skipped});
      continue;
    }
    out.push_back({"identity" + id, p.identity_residual <= kIdentityTolerance ? "pass" : "fail",
                   "residual " + sci(p.identity_residual)});
  }
  for (const ModeDecay& m : decay.modes) {
    out.push_back({"decay_rate[" + label(m.point, m.chain, m.position) + "]",
                   m.report.passed ? "pass" : "fail", "rate " + sci(m.report.fit.rate)});
  }
  for (const LemmaEntry& l : decay.lemmas) {
    std::ostringstream name;
    name << (l.length > 1 ? "chain_bound[" : "eigen_bound[") << l.point << '.' << l.chain
         << " delta=" << l.delta << ']';
    const LemmaReport& r = l.report;
    if (r.status != CheckStatus::kApplied) {
      out.push_back({name.str(), "skipped", to_string(r.status) + ": " + r.reason});
      continue;
    }
    double worst = 0.0;
    for (const auto& s : r.samples) worst = std::max(worst, s.ratio);
    const bool ok = r.all_hold && r.monotone_lhs;
    out.push_back({name.str(), ok ? "pass" : "fail",
                   "max ratio " + sci(worst) + (r.monotone_lhs ? "" : ", lhs not monotone")});
  }
  return out;
}

Json config_json(const RunConfig& cfg) {
  Json j;
  j["dimension"] = cfg.dimension;
  j["domain_half_length"] = cfg.half_length;
  j["points"] = cfg.points;
  j["order"] = cfg.order;
  j["mu"] = cfg.mu;
  j["sigma"] = cfg.sigma;
  j["potentials_file"] = cfg.potentials_file;
  j["potentials_off"] = cfg.potentials_off;
  j["strip_margin"] = cfg.strip_margin;
  j["imag_cap"] = cfg.imag_cap;
  j["eigen_tolerance"] = cfg.eigen_tolerance;
  j["newton_tolerance"] = cfg.newton_tolerance;
  j["rate_tolerance"] = cfg.rate_tolerance;
  j["delta_list"] = cfg.delta_fractions;
  j["eps_list"] = cfg.epsilons;
  j["fit_lo"] = cfg.fit_lo ? Json(*cfg.fit_lo) : Json(nullptr);
  j["fit_hi"] = cfg.fit_hi ? Json(*cfg.fit_hi) : Json(nullptr);
  j["out"] = cfg.out_dir;
  j["seed"] = cfg.seed;
  j["eigenvectors"] = cfg.eigenvectors;
  return j;
}

Json profile_json(const ProfileStage& profile) {
  Json j;
  j["source"] = profile.source;
  j["potential_tail_magnitude"] = profile.potentials.tail_magnitude;
  if (profile.profile) {
    const StationaryProfile& p = *profile.profile;
    j["residual"] = p.residual;
    j["seed_residual"] = profile.seed_residual;
    j["iterations"] = p.iterations;
    j["sign_changing"] = p.sign_changing;
    j["peak"] = p.phi.values().cwiseAbs().maxCoeff();
  } else {
    j["residual"] = nullptr;
  }
  return j;
}

Json spectrum_json(const SpectrumStage& spectrum) {
  const SpectralSet& set = spectrum.set;
  Json j;
  j["strip"] = {{"re_bound", set.strip.re_bound}, {"im_bound", set.strip.im_bound}};
  j["partial"] = set.partial;
  j["dedup_radius"] = set.dedup_radius;
  j["cluster_radius"] = set.cluster_radius;
  j["diagnostics"] = set.diagnostics;
  j["lminus"] = {{"smallest_eigenvalue", spectrum.lminus_smallest},
                 {"nonnegative", spectrum.lminus_positive}};
  j["axis_confined"] = spectrum.axis_confined;
  j["total_multiplicity"] = set.total_multiplicity();
  Json points = Json::array();
  for (size_t i = 0; i < spectrum.entries.size(); ++i) {
    const EigenEntry& e = spectrum.entries[i];
    Json p;
    p["index"] = i;
    p["value"] = complex_json(e.point.value);
    Json members = Json::array();
    for (Complex m : e.point.members) members.push_back(complex_json(m));
    p["members"] = members;
    p["multiplicity"] = e.point.multiplicity;
    p["residual"] = e.point.residual;
    p["shift"] = complex_json(e.point.shift);
    p["iterations"] = e.point.iterations;
    p["algebraic"] = optional_int(e.point.algebraic);
    p["geometric"] = optional_int(e.point.geometric);
    p["jordan_index"] = optional_int(e.point.jordan_index);
    p["riesz_radius"] = e.riesz_radius;
    p["note"] = e.note;
    if (e.jordan) {
      const JordanStructure& js = *e.jordan;
      p["kernel_dimensions"] = js.kernel_dimensions;
      p["determinate"] = js.determinate;
      p["consistent"] = js.consistent;
      p["gap_ratio"] = js.gap_ratio;
      p["rank_threshold"] = js.threshold;
      p["chain_independence"] = js.smallest_singular_value;
      p["riesz"] = {{"nodes", js.riesz.nodes},
                    {"rank", js.riesz.rank},
                    {"previous_rank", js.riesz.previous_rank},
                    {"idempotency_defect", js.riesz.idempotency_defect},
                    {"norm_estimate", js.riesz.norm_estimate},
                    {"rank_determinate", js.riesz.rank_determinate}};
      Json chains = Json::array();
      for (const JordanChain& c : js.chains) {
        chains.push_back({{"length", c.index()}, {"relation_residuals", c.relation_residuals}});
      }
      p["chains"] = chains;
    }
    points.push_back(p);
  }
  j["points"] = points;
  return j;
}

Json symmetry_json(const SymmetryReport& s) {
  return Json{{"negation_distance", s.negation_distance},
              {"conjugation_distance", s.conjugation_distance},
              {"tolerance", s.tolerance},
              {"passed", s.passed}};
}

Json decay_json(const RunConfig& cfg, const DecayStage& decay) {
  Json j;
  j["window"] = {{"lo", cfg.window_lo()}, {"hi", cfg.window_hi()}};
  j["rate_tolerance"] = cfg.rate_tolerance;
  j["identity_tolerance"] = kIdentityTolerance;
  j["epsilons"] = cfg.epsilons;
  Json points = Json::array();
  for (const PointDecay& p : decay.points) {
    points.push_back({{"point", p.point},
                      {"energy", complex_json(p.energy)},
                      {"mu_e", p.mu_e},
                      {"deltas", p.deltas},
                      {"identity_residual", p.skipped.empty() ? Json(p.identity_residual)
                                                              : Json(nullptr)},
                      {"skipped", p.skipped}});
  }
  j["points"] = points;
  Json modes = Json::array();
  for (const ModeDecay& m : decay.modes) {
    const DecayFit& f = m.report.fit;
    Json bounds = Json::array();
    for (const DecayBound& b : m.report.bounds) {
      bounds.push_back({{"delta", b.delta}, {"bound", b.bound}, {"passed", b.passed}});
    }
    modes.push_back({{"point", m.point},
                     {"chain", m.chain},
                     {"position", m.position},
                     {"rate", f.rate},
                     {"plain_rate", f.plain_rate},
                     {"corrected_rate", f.corrected_rate},
                     {"prefactor_power", f.prefactor_power},
                     {"power_corrected", f.power_corrected},
                     {"r_squared", f.r_squared},
                     {"side_rates", f.side_rates},
                     {"samples", f.samples},
                     {"bounds", bounds},
                     {"passed", m.report.passed}});
  }
  j["modes"] = modes;
  Json lemmas = Json::array();
  for (const LemmaEntry& l : decay.lemmas) {
    const LemmaReport& r = l.report;
    Json samples = Json::array();
    for (const InequalitySample& s : r.samples) {
      samples.push_back({{"epsilon", s.epsilon},
                         {"lhs", s.lhs},
                         {"rhs", s.rhs},
                         {"ratio", s.ratio},
                         {"holds", s.holds}});
    }
    lemmas.push_back({{"point", l.point},
                      {"chain", l.chain},
                      {"length", l.length},
                      {"delta", l.delta},
                      {"status", to_string(r.status)},
                      {"reason", r.reason},
                      {"radius", r.radius},
                      {"exterior_quotient", r.exterior_quotient},
                      {"monotone_lhs", r.monotone_lhs},
                      {"all_hold", r.all_hold},
                      {"samples", samples}});
  }
  j["lemmas"] = lemmas;
  return j;
}

Json checks_json(const std::vector<CheckRecord>& checks) {
  Json arr = Json::array();
  for (const auto& c : checks) {
    arr.push_back({{"name", c.name}, {"status", c.status}, {"detail", c.detail}});
  }
  return arr;
}

Json make_report(const RunConfig& cfg, const ReportParts& parts) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_json(cfg);
  j["profile"] = parts.profile ? profile_json(*parts.profile) : Json(nullptr);
  j["spectrum"] = parts.spectrum ? spectrum_json(*parts.spectrum) : Json(nullptr);
  j["symmetry"] = parts.spectrum ? symmetry_json(parts.spectrum->symmetry) : Json(nullptr);
  j["decay"] = parts.decay ? decay_json(cfg, *parts.decay) : Json(nullptr);
  j["checks"] = checks_json(parts.checks);
  Json timing = Json::object();
  if (!cfg.canonical) {
    for (const auto& [stage, seconds] : parts.timing) timing[stage] = seconds;
  }
  j["timing"] = timing;
  return j;
}

std::vector<std::filesystem::path> write_report_csvs(const Json& report,
                                                     const std::filesystem::path& dir) {
  if (!report.is_object() || !report.contains("schema_version")) {
    throw ValidationError("not a report document");
  }
  if (report["schema_version"] != kReportSchemaVersion) {
    throw ValidationError("unsupported report schema version " +
                          report["schema_version"].dump());
  }
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;

  const Json& spectrum = report.value("spectrum", Json(nullptr));
  if (spectrum.is_object()) {
    const auto path = dir / "spectrum.csv";
    std::ofstream out = open_csv(path);
    out << "index,re,im,multiplicity,algebraic,geometric,jordan_index,residual\n";
    for (const Json& p : spectrum["points"]) {
      write_row(out, {p["index"], p["value"]["re"], p["value"]["im"], p["multiplicity"],
                      p["algebraic"], p["geometric"], p["jordan_index"], p["residual"]});
    }
    written.push_back(path);
  }

  const Json& decay = report.value("decay", Json(nullptr));
  if (decay.is_object()) {
    const auto path = dir / "decay.csv";
    std::ofstream out = open_csv(path);
    out << "point,chain,position,rate,plain_rate,corrected_rate,prefactor_power,r_squared,"
           "largest_bound,passed\n";
    for (const Json& m : decay["modes"]) {
      Json largest = nullptr;
      for (const Json& b : m["bounds"]) {
        if (largest.is_null() || b["bound"].get<double>() > largest.get<double>()) {
          largest = b["bound"];
        }
      }
      write_row(out, {m["point"], m["chain"], m["position"], m["rate"], m["plain_rate"],
                      m["corrected_rate"], m["prefactor_power"], m["r_squared"], largest,
                      m["passed"]});
    }
    written.push_back(path);

    const auto lpath = dir / "lemmas.csv";
    std::ofstream lout = open_csv(lpath);
    lout << "point,chain,length,delta,status,radius,epsilon,lhs,rhs,ratio,holds\n";
    for (const Json& l : decay["lemmas"]) {
      if (l["samples"].empty()) {
        write_row(lout, {l["point"], l["chain"], l["length"], l["delta"], l["status"],
                         l["radius"], nullptr, nullptr, nullptr, nullptr, nullptr});
      }
      for (const Json& s : l["samples"]) {
        write_row(lout, {l["point"], l["chain"], l["length"], l["delta"], l["status"],
                         l["radius"], s["epsilon"], s["lhs"], s["rhs"], s["ratio"], s["holds"]});
      }
    }
    written.push_back(lpath);
  }

  const auto cpath = dir / "checks.csv";
  std::ofstream checks_out = open_csv(cpath);
  checks_out << "name,status,detail\n";
  for (const Json& c : report.value("checks", Json::array())) {
    write_row(checks_out, {c["name"], c["status"], c["detail"]});
  }
  written.push_back(cpath);
  return written;
}

void write_tails_csv(std::ostream& out, const SpectrumStage& spectrum) {
  out << "point,chain,position,x,abs_x,log_amplitude\n";
  out << std::setprecision(12);
  for (size_t p = 0; p < spectrum.entries.size(); ++p) {
    const auto& jordan = spectrum.entries[p].jordan;
    if (!jordan) continue;
    for (size_t c = 0; c < jordan->chains.size(); ++c) {
      const auto& vectors = jordan->chains[c].vectors;
      for (size_t l = 0; l < vectors.size(); ++l) {
        const Vec2Field& v = vectors[l];
        const Grid& g = v.grid();
        for (Index i = 0; i < g.node_count(); ++i) {
          const double a = std::abs(v.first()[i]) + std::abs(v.second()[i]);
          if (!(a > 0.0)) continue;
          const double x = g.coordinate(static_cast<int>(i));
          out << p << ',' << c << ',' << l << ',' << x << ',' << std::abs(x) << ','
              << std::log(a) << '\n';
        }
      }
    }
  }
}

void write_eigenvectors_csv(std::ostream& out, const SpectrumStage& spectrum) {
  out << "point,chain,position,x,re_first,im_first,re_second,im_second\n";
  out << std::setprecision(12);
  for (size_t p = 0; p < spectrum.entries.size(); ++p) {
    const auto& jordan = spectrum.entries[p].jordan;
    if (!jordan) continue;
    for (size_t c = 0; c < jordan->chains.size(); ++c) {
      const auto& vectors = jordan->chains[c].vectors;
      for (size_t l = 0; l < vectors.size(); ++l) {
        const Vec2Field& v = vectors[l];
        const Grid& g = v.grid();
        for (Index i = 0; i < g.node_count(); ++i) {
          out << p << ',' << c << ',' << l << ',' << g.coordinate(static_cast<int>(i)) << ','
              << v.first()[i].real() << ',' << v.first()[i].imag() << ','
              << v.second()[i].real() << ',' << v.second()[i].imag() << '\n';
        }
      }
    }
  }
}

}  // namespace nlsdecay
