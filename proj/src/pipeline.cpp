// SPDX-License-Identifier: Apache-2.0
#include "nlsdecay/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nlsdecay/errors.hpp"
#include "nlsdecay/log.hpp"

namespace nlsdecay {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

GapOptions RunConfig::gap_options() const {
  GapOptions g;
  g.margin = strip_margin;
  g.imag_cap = imag_cap;
  g.tolerance = eigen_tolerance;
  g.seed = seed;
  return g;
}

Grid RunConfig::grid() const { return Grid(dimension, half_length, points); }

void RunConfig::validate() const {
  require(dimension == 1, "the pipeline runs in dimension 1 only");
  require(finite(half_length) && half_length > 0.0, "domain half-length must be positive");
  require(points >= 8, "points per axis must be at least 8");
  require(order == 2 || order == 4, "stencil order must be 2 or 4");
  require(finite(mu) && mu > 0.0, "mu must be positive");
  require(finite(sigma) && sigma > 0.0, "sigma must be positive");
  require(finite(strip_margin) && strip_margin > 0.0, "strip margin must be positive");
  if (strip_margin >= mu) {
    std::ostringstream msg;
    msg << "degenerate strip: margin " << strip_margin << " >= mu " << mu;
    throw ValidationError(msg.str());
  }
  require(finite(imag_cap) && imag_cap >= 0.0, "imaginary cap must be non-negative");
  require(finite(eigen_tolerance) && eigen_tolerance > 0.0, "eigen tolerance must be positive");
  require(finite(newton_tolerance) && newton_tolerance > 0.0,
          "Newton tolerance must be positive");
  require(finite(rate_tolerance) && rate_tolerance >= 0.0, "rate tolerance must be non-negative");
  require(!delta_fractions.empty(), "delta list is empty");
  for (double d : delta_fractions) {
    require(finite(d) && d > 0.0 && d < 0.5, "delta fractions must lie in (0, 0.5)");
  }
  require(!epsilons.empty(), "epsilon list is empty");
  for (double e : epsilons) require(finite(e) && e >= 0.0, "epsilons must be non-negative");
  const double lo = window_lo();
  const double hi = window_hi();
  require(finite(lo) && lo >= 0.0 && lo < hi, "fit window must satisfy 0 <= lo < hi");
  require(hi <= 0.9 * half_length, "fit window reaches the boundary zone (hi > 0.9 L)");
  require(!out_dir.empty(), "output directory is empty");
  require(!(potentials_off && !potentials_file.empty()),
          "potentials-off and a potentials file are mutually exclusive");
}

ProfileStage run_profile(const RunConfig& cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  if (cfg.potentials_off) return ProfileStage{"off", std::nullopt, 0.0, zero_potentials(grid)};
  if (!cfg.potentials_file.empty()) {
    const PotentialPair loaded = read_potentials_file(cfg.potentials_file);
    const Grid& g = loaded.U.grid();
    if (g.points() != grid.points() ||
        std::abs(g.half_length() - grid.half_length()) > 1e-8 * grid.spacing()) {
      std::ostringstream msg;
      msg << "potentials file grid (N=" << g.points() << ", L=" << g.half_length()
          << ") differs from the configured grid (N=" << grid.points()
          << ", L=" << grid.half_length() << ")";
      throw ValidationError(msg.str());
    }
    return ProfileStage{"file", std::nullopt, 0.0,
                        make_potential_pair(RealField(grid, loaded.U.values()),
                                            RealField(grid, loaded.W.values()))};
  }
  const NonlinearitySpec nl(cfg.sigma);
  const StationaryProfile seed = closed_form_soliton(grid, cfg.mu, nl, cfg.order);
  NewtonOptions newton;
  newton.tolerance = cfg.newton_tolerance;
  StationaryProfile profile = solve_ground_state(grid, cfg.mu, nl, seed.phi, newton, cfg.order);
  PotentialPair pots = linearization_potentials(profile, nl);
  return ProfileStage{"soliton", std::move(profile), seed.residual, std::move(pots)};
}

BlockOperator build_operator(const RunConfig& cfg, const ProfileStage& profile) {
  return assemble_H(cfg.grid(), cfg.mu, profile.potentials, cfg.order);
}

SpectrumStage run_spectrum(const RunConfig& cfg, const ProfileStage& profile,
                           const BlockOperator& op) {
  SpectrumStage stage;
  stage.set = gap_eigenvalues(op, cfg.gap_options());
  const std::vector<Complex> values = stage.set.values();

  JordanOptions jopts;
  jopts.riesz.seed = cfg.seed + 1;
  for (SpectralPoint& point : stage.set.points) {
    EigenEntry entry;
    double spread = 0.0;
    for (Complex m : point.members) spread = std::max(spread, std::abs(m - point.value));
    entry.riesz_radius = default_riesz_radius(cfg.mu, point.value, values, spread);
    if (entry.riesz_radius <= 2.0 * spread) {
      entry.note = "contour radius does not clear the cluster spread";
    } else {
      try {
        entry.jordan = jordan_structure(op, point.value, entry.riesz_radius, jopts);
        point.geometric = entry.jordan->geometric;
        point.algebraic = entry.jordan->algebraic;
        point.jordan_index = entry.jordan->index;
      } catch (const NumericError& e) {
        entry.note = e.what();
        log_message(LogLevel::kWarning, "Jordan analysis skipped: " + entry.note);
      }
    }
    entry.point = point;
    stage.entries.push_back(std::move(entry));
  }

  stage.symmetry = symmetry_check(stage.set);
  const LminusOperator lm = assemble_Lminus(cfg.grid(), cfg.mu, profile.potentials, cfg.order);
  stage.lminus_smallest = lm.smallest_eigenvalue;
  stage.lminus_positive = lm.positive;
  stage.axis_confined = axis_confined(stage.set);
  return stage;
}

DecayStage run_decay(const RunConfig& cfg, const ProfileStage& profile,
                     const SpectrumStage& spectrum) {
  DecayStage stage;
  const Grid grid = cfg.grid();
  for (size_t p = 0; p < spectrum.entries.size(); ++p) {
    const EigenEntry& entry = spectrum.entries[p];
    PointDecay pd;
    pd.point = static_cast<int>(p);
    pd.energy = entry.point.value;
    pd.mu_e = cfg.mu - std::abs(pd.energy.real());
    if (!entry.jordan) {
      pd.skipped = "no Jordan structure: " + entry.note;
    } else if (!entry.jordan->determinate || !entry.jordan->consistent) {
      pd.skipped = "Jordan structure not numerically determinate";
    } else if (!(pd.mu_e > 0.0)) {
      pd.skipped = "eigenvalue outside the gap";
    }
    if (!pd.skipped.empty()) {
      stage.points.push_back(std::move(pd));
      continue;
    }
    for (double f : cfg.delta_fractions) pd.deltas.push_back(f * pd.mu_e);

    const EnergyOperator hhat =
        assemble_HhatE(grid, cfg.mu, pd.energy, profile.potentials, cfg.order);
    const auto& chains = entry.jordan->chains;
    for (size_t c = 0; c < chains.size(); ++c) {
      const JordanChain& chain = chains[c];
      for (size_t l = 0; l < chain.vectors.size(); ++l) {
        stage.modes.push_back({pd.point, static_cast<int>(c), static_cast<int>(l),
                               decay_report(chain.vectors[l], cfg.mu, pd.energy, pd.deltas,
                                            cfg.window_lo(), cfg.window_hi(),
                                            cfg.rate_tolerance)});
      }
      JordanChain eigen_only{chain.value, {chain.vectors.back()},
                             {chain.relation_residuals.back()}};
      for (double delta : pd.deltas) {
        if (chain.index() > 1) {
          stage.lemmas.push_back({pd.point, static_cast<int>(c), chain.index(), delta,
                                  chain_decay_sweep(hhat, chain, delta, cfg.epsilons)});
        }
        stage.lemmas.push_back({pd.point, static_cast<int>(c), 1, delta,
                                chain_decay_sweep(hhat, eigen_only, delta, cfg.epsilons)});
      }
    }
    if (!chains.empty()) {
      const DecayParameters params =
          DecayParameters::make(cfg.mu, pd.energy, pd.deltas.front(), 1.0);
      pd.identity_residual = conjugation_identity_residual(
          hhat, weight_field(grid, params).f, chains.front().vectors.back());
    }
    stage.points.push_back(std::move(pd));
  }
  return stage;
}

}  // namespace nlsdecay
