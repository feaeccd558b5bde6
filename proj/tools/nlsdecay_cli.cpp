// SPDX-License-Identifier: Apache-2.0
// Command-line front end: soliton, spectrum, decay, verify, report.
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "nlsdecay/acceptance.hpp"
#include "nlsdecay/errors.hpp"
#include "nlsdecay/pipeline.hpp"
#include "nlsdecay/report.hpp"

namespace fs = std::filesystem;
using namespace nlsdecay;

namespace {

enum ExitCode { kOk = 0, kCriterionFailure = 1, kInvalid = 2, kNumericFailure = 3 };

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

fs::path prepare_out(const RunConfig& cfg) {
  const fs::path dir(cfg.out_dir);
  if (!fs::exists(dir)) {
    fs::create_directories(dir);
    std::cout << "created output directory " << dir.string() << "\n";
  } else {
    std::cout << "output directory " << dir.string() << "\n";
  }
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  writer(out);
}

int finish(const RunConfig& cfg, const fs::path& dir, const ReportParts& parts) {
  const Json report = make_report(cfg, parts);
  write_text(dir / "report.json", report.dump(2) + "\n");
  write_report_csvs(report, dir);
  int failed = 0, skipped = 0;
  for (const auto& c : parts.checks) {
    if (c.status == "fail") {
      ++failed;
      std::cout << "FAIL " << c.name << ": " << c.detail << "\n";
    } else if (c.status == "skipped") {
      ++skipped;
    }
  }
  std::cout << parts.checks.size() << " checks, " << failed << " failed, " << skipped
            << " skipped; report " << (dir / "report.json").string() << "\n";
  return failed == 0 ? kOk : kCriterionFailure;
}

void write_profile_files(const fs::path& dir, const ProfileStage& profile) {
  if (profile.profile) {
    write_file(dir / "profile.csv", [&](std::ostream& o) { write_profile_csv(o, profile.profile->phi); });
  }
  write_file(dir / "potentials.csv",
             [&](std::ostream& o) { write_potentials_csv(o, profile.potentials); });
}

void print_profile(const ProfileStage& profile) {
  if (profile.profile) {
    std::cout << "profile: residual " << profile.profile->residual << " after "
              << profile.profile->iterations << " Newton steps\n";
  } else {
    std::cout << "profile: potentials " << profile.source << "\n";
  }
}

void print_spectrum(const SpectrumStage& s) {
  std::cout << "gap eigenvalues: " << s.set.points.size() << " points, "
            << s.set.total_multiplicity() << " values" << (s.set.partial ? " (partial)" : "")
            << "\n";
  for (const auto& e : s.entries) {
    std::cout << "  E = " << e.point.value.real() << (e.point.value.imag() < 0 ? " - " : " + ")
              << std::abs(e.point.value.imag()) << "i  members " << e.point.multiplicity;
    if (e.jordan) {
      std::cout << "  algebraic " << e.jordan->algebraic << "  geometric " << e.jordan->geometric
                << "  index " << e.jordan->index;
    }
    std::cout << "\n";
  }
  std::cout << "symmetry: " << (s.symmetry.passed ? "pass" : "fail") << "\n";
}

int cmd_soliton(const RunConfig& cfg) {
  if (cfg.potentials_off || !cfg.potentials_file.empty()) {
    throw ValidationError("soliton needs the nonlinearity, not supplied potentials");
  }
  cfg.validate();
  const fs::path dir = prepare_out(cfg);
  Stopwatch clock;
  ReportParts parts;
  const ProfileStage profile = run_profile(cfg);
  parts.timing["profile"] = clock.lap();
  print_profile(profile);
  write_profile_files(dir, profile);
  parts.profile = &profile;
  parts.checks = profile_checks(profile);
  return finish(cfg, dir, parts);
}

int cmd_spectrum(const RunConfig& cfg, bool with_decay) {
  cfg.validate();
  const fs::path dir = prepare_out(cfg);
  Stopwatch clock;
  ReportParts parts;
  const ProfileStage profile = run_profile(cfg);
  parts.timing["profile"] = clock.lap();
  print_profile(profile);
  write_profile_files(dir, profile);
  const BlockOperator op = build_operator(cfg, profile);
  const SpectrumStage spectrum = run_spectrum(cfg, profile, op);
  parts.timing["spectrum"] = clock.lap();
  print_spectrum(spectrum);
  for (const auto& d : spectrum.set.diagnostics) std::cout << "  note: " << d << "\n";
  parts.profile = &profile;
  parts.spectrum = &spectrum;
  parts.checks = profile_checks(profile);
  for (auto& c : spectrum_checks(cfg, spectrum)) parts.checks.push_back(std::move(c));
  if (cfg.eigenvectors) {
    write_file(dir / "eigenvectors.csv",
               [&](std::ostream& o) { write_eigenvectors_csv(o, spectrum); });
  }
  if (!with_decay) return finish(cfg, dir, parts);

  const DecayStage decay = run_decay(cfg, profile, spectrum);
  parts.timing["decay"] = clock.lap();
  parts.decay = &decay;
  for (auto& c : decay_checks(decay)) parts.checks.push_back(std::move(c));
  write_file(dir / "tails.csv", [&](std::ostream& o) { write_tails_csv(o, spectrum); });
  for (const auto& m : decay.modes) {
    std::cout << "  decay point " << m.point << " chain " << m.chain << " vector " << m.position
              << ": rate " << m.report.fit.rate << (m.report.passed ? "" : " (below bound)")
              << "\n";
  }
  return finish(cfg, dir, parts);
}

int cmd_verify(const RunConfig& cfg) {
  cfg.validate();
  const fs::path dir = prepare_out(cfg);
  const auto results = run_acceptance(cfg, [](const CriterionResult& r) {
    std::cout << format_criterion(r) << std::endl;
  });
  const Json doc = acceptance_json(results);
  write_text(dir / "verify.json", doc.dump(2) + "\n");
  bool all = true;
  for (const auto& r : results) {
    if (!r.passed) {
      std::cerr << "criterion " << r.id << " (" << r.name << ") failed\n";
      all = false;
    }
  }
  return all ? kOk : kCriterionFailure;
}

int cmd_report(const RunConfig& cfg, const std::string& input) {
  const fs::path path = input.empty() ? fs::path(cfg.out_dir) / "report.json" : fs::path(input);
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open report " + path.string());
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("malformed report " + path.string() + ": " + e.what());
  }
  const fs::path dir = input.empty() ? fs::path(cfg.out_dir) : path.parent_path();
  for (const auto& p : write_report_csvs(doc, dir.empty() ? fs::path(".") : dir)) {
    std::cout << "wrote " << p.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectra and eigenfunction decay of linearized NLS operators"};
  app.set_config("--config", "", "flat key = value file; command-line flags take precedence");
  app.fallthrough();
  app.require_subcommand(1);

  RunConfig cfg;
  double fit_lo = -1.0, fit_hi = -1.0;
  app.add_option("--mu", cfg.mu, "frequency mu > 0")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "nonlinearity exponent sigma > 0")->capture_default_str();
  app.add_option("--domain-half-length", cfg.half_length, "half-length L")->capture_default_str();
  app.add_option("--points", cfg.points, "points per axis N")->capture_default_str();
  app.add_option("--order", cfg.order, "finite-difference order")
      ->check(CLI::IsMember({2, 4}))
      ->capture_default_str();
  app.add_option("--strip-margin", cfg.strip_margin, "strip is |Re E| < mu - margin")
      ->capture_default_str();
  app.add_option("--imag-cap", cfg.imag_cap, "strip is |Im E| <= cap")->capture_default_str();
  app.add_option("--delta-list", cfg.delta_fractions, "delta values as fractions of mu_E")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--eps-list", cfg.epsilons, "weight saturation parameters")
      ->delimiter(',')
      ->capture_default_str();
  app.add_option("--out", cfg.out_dir, "output directory")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--potentials-file", cfg.potentials_file, "CSV x,U,W replacing the soliton");
  app.add_flag("--potentials-off", cfg.potentials_off, "use U = W = 0");
  app.add_flag("--canonical", cfg.canonical, "omit timing so reports are byte-reproducible");
  app.add_flag("--eigenvectors", cfg.eigenvectors, "also write eigenvectors.csv");
  app.add_option("--rate-tol", cfg.rate_tolerance, "slack on fitted decay rates")
      ->capture_default_str();
  app.add_option("--eigen-tol", cfg.eigen_tolerance, "eigenpair residual tolerance")
      ->capture_default_str();
  app.add_option("--newton-tol", cfg.newton_tolerance, "profile residual tolerance")
      ->capture_default_str();
  app.add_option("--fit-lo", fit_lo, "inner radius of the decay fit window (default 0.4 L)");
  app.add_option("--fit-hi", fit_hi, "outer radius of the decay fit window (default 0.85 L)");

  auto* soliton = app.add_subcommand("soliton", "stationary profile and potentials");
  auto* spectrum = app.add_subcommand("spectrum", "gap eigenvalues with Jordan structure");
  auto* decay = app.add_subcommand("decay", "spectrum plus decay rates and weighted bounds");
  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  auto* report = app.add_subcommand("report", "re-render a report JSON as CSV files");
  std::string report_input;
  report->add_option("report", report_input, "report JSON (default OUT/report.json)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalid;
  }
  if (app.count("--fit-lo") > 0) cfg.fit_lo = fit_lo;
  if (app.count("--fit-hi") > 0) cfg.fit_hi = fit_hi;

  try {
    if (soliton->parsed()) return cmd_soliton(cfg);
    if (spectrum->parsed()) return cmd_spectrum(cfg, false);
    if (decay->parsed()) return cmd_spectrum(cfg, true);
    if (verify->parsed()) return cmd_verify(cfg);
    if (report->parsed()) return cmd_report(cfg, report_input);
  } catch (const ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalid;
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericFailure;
  }
  return kInvalid;
}
