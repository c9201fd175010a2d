#pragma once
// Command dispatch for the command-line tool. Every command writes its data
// files into the output directory plus `<command>.manifest.json`.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "gbarq/airy.hpp"
#include "gbarq/config.hpp"
#include "gbarq/freefall.hpp"
#include "gbarq/gqs.hpp"
#include "gbarq/inference.hpp"
#include "gbarq/io.hpp"
#include "gbarq/mirror.hpp"
#include "gbarq/physcore.hpp"
#include "gbarq/source.hpp"

#ifndef GBARQ_VERSION
#define GBARQ_VERSION "0.1.0"
#endif

namespace gbarq {

namespace fs = std::filesystem;

struct CommandContext {
  const RunConfig& cfg;
  fs::path out;
  std::string hash;
  std::uint64_t seed = 0;
  std::vector<std::string> files;
  std::string stage;

  fs::path file(const std::string& name) {
    files.push_back(name);
    return out / name;
  }
};

namespace commands {

inline void scales(CommandContext& c) {
  c.stage = "physcore";
  const ScaleSet s = derive_scales(c.cfg.real("physics.g0"));
  Json j;
  j["config_hash"] = c.hash;
  j["g_m_per_s2"] = s.g;
  j["l_g_m"] = s.l_g;
  j["eps_g_J"] = s.eps_g;
  j["eps_g_peV"] = s.eps_g / constants().e_charge * 1e12;
  j["t_g_s"] = s.t_g;
  j["v_g_m_per_s"] = s.v_g;
  write_json(c.file("scales.json"), j);
  std::cout << "l_g = " << s.l_g * 1e6 << " um, eps_g = " << s.eps_g / constants().e_charge * 1e12
            << " peV, t_g = " << s.t_g * 1e3 << " ms, v_g = " << s.v_g * 1e2 << " cm/s\n";
}

inline void basis(CommandContext& c) {
  c.stage = "airy";
  const int n_max = static_cast<int>(c.cfg.integer("geometry.n_max"));
  const auto zeros = shared_zero_table(n_max);
  write_zero_table(*zeros, c.file("zeros.txt").string());
  const ScaleSet s = derive_scales(c.cfg.real("physics.g0"));
  CsvWriter w(c.file("basis.csv"));
  w.meta("config_hash", c.hash).meta("g_m_per_s2", s.g).header({"n", "lambda_n", "aiprime_at_zero", "turning_height_m"});
  for (int n = 1; n <= n_max; ++n) w.row({double(n), zeros->lambda(n), zeros->aiprime(n), zeros->lambda(n) * s.l_g});
  std::cout << "lambda_1 = " << zeros->lambda(1) << ", lambda_" << n_max << " = " << zeros->lambda(n_max) << '\n';
}

inline void source_dist(CommandContext& c) {
  c.stage = "source";
  const ModelSpec spec = model_spec(c.cfg);
  const TrapConfig trap = build_trap(spec.f, spec.h);
  const PhotodetachConfig pd = build_photodetach(spec.delta_E, spec.pol_axis);
  const RecoilLaw law = build_recoil_law(spec);
  const double dv = trap.delta_p / constants().m_atom;
  const auto nodes = recoil_quadrature(spec.pol_axis, {static_cast<int>(c.cfg.integer("recoil.polar_order")),
                                                        static_cast<int>(c.cfg.integer("recoil.azimuth_order"))});
  double wsum = 0, m2 = 0;
  for (const auto& n : nodes) {
    wsum += n.weight;
    const double cth = dot(n.q_hat, pd.pol_axis);
    m2 += n.weight * cth * cth;
  }
  Json j;
  j["config_hash"] = c.hash;
  j["zeta_m"] = trap.zeta;
  j["delta_p_kg_m_per_s"] = trap.delta_p;
  j["delta_v_m_per_s"] = dv;
  j["q_kg_m_per_s"] = pd.q_mag;
  j["v_r_m_per_s"] = pd.v_r;
  j["recoil_mode"] = c.cfg.text("recoil.mode");
  j["quadrature_nodes"] = nodes.size();
  j["quadrature_weight_sum"] = wsum;
  j["quadrature_second_moment"] = m2;
  write_json(c.file("source.json"), j);

  const double vmax = c.cfg.real("sourcedist.v_max");
  const auto axis = linspace(-vmax, vmax, static_cast<std::size_t>(c.cfg.integer("sourcedist.points")));
  std::vector<double> vals(axis.size() * axis.size());
  parallel_for(vals.size(), [&](std::size_t k) {
    vals[k] = velocity_distribution({0.0, axis[k % axis.size()], axis[k / axis.size()]}, law, dv);
  });
  CsvWriter w(c.file("source_dist.csv"));
  w.meta("config_hash", c.hash).meta("v_x_m_per_s", 0.0).header({"v_y_m_per_s", "v_z_m_per_s", "Pi0_s3_per_m3"});
  for (std::size_t k = 0; k < vals.size(); ++k) w.row({axis[k % axis.size()], axis[k / axis.size()], vals[k]});
  std::cout << "zeta = " << trap.zeta * 1e6 << " um, dv = " << dv * 1e2 << " cm/s, v_r = " << pd.v_r << " m/s\n";
}

inline void end_of_mirror(CommandContext& c) {
  c.stage = "mirror";
  const ModelSpec spec = model_spec(c.cfg);
  const ScaleSet sc = derive_scales(c.cfg.real("physics.g0"));
  const TrapConfig trap = build_trap(spec.f, spec.h);
  const GQSBasis basis = build_basis(spec.n_max, sc, resolved_z_max(spec));
  const RecoilLaw law = build_recoil_law(spec);
  c.stage = "gqs";
  const auto amps = ring_amplitudes(basis, trap, law);
  const auto tr = transmitted_fraction(amps, law, c.cfg.integer("atoms.N"));
  c.stage = "mirror";
  const double vmax = c.cfg.real("endmirror.v_max");
  const auto v = linspace(-vmax, vmax, static_cast<std::size_t>(c.cfg.integer("endmirror.v_points")));
  const auto t = linspace(c.cfg.real("endmirror.t_min"), c.cfg.real("endmirror.t_max"),
                          static_cast<std::size_t>(c.cfg.integer("endmirror.t_points")));
  const double m = constants().m_atom;
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = m * v[i];
  const auto pi = momentum_distribution_end(p, t, basis, law, amps);
  CsvWriter w(c.file("end_of_mirror.csv"));
  w.meta("config_hash", c.hash).meta("g_m_per_s2", sc.g).header({"t_s", "v_z_m_per_s", "Pi_s_per_m"});
  for (std::size_t it = 0; it < t.size(); ++it)
    for (std::size_t i = 0; i < v.size(); ++i) w.row({t[it], v[i], m * pi[it * v.size() + i]});
  Json j;
  j["config_hash"] = c.hash;
  j["transmitted_fraction"] = tr.fraction;
  j["N"] = c.cfg.integer("atoms.N");
  j["N_c"] = tr.n_c;
  j["rings"] = law.rings.size();
  write_json(c.file("transmission.json"), j);
  std::cout << "transmitted fraction = " << tr.fraction << ", N_c = " << tr.n_c << '\n';
}

inline void current_map(CommandContext& c) {
  c.stage = "freefall";
  const ModelSpec spec = model_spec(c.cfg);
  const CurrentModel model(spec, c.cfg.real("physics.g0"));
  const std::string kind = c.cfg.text("grid.kind");
  CurrentMap cm;
  if (kind == "t-tau") {
    const TimeGrid g = default_time_grid(model, c.cfg.real("numerics.points_per_period"), c.cfg.real("numerics.window_sigmas"));
    cm = current_map_t_tau(model, g.t, g.tau);
  } else {
    const auto a = linspace(c.cfg.real("grid.Y_min"), c.cfg.real("grid.Y_max"),
                            static_cast<std::size_t>(c.cfg.integer("grid.Y_points")));
    const auto T = linspace(c.cfg.real("grid.T_min"), c.cfg.real("grid.T_max"),
                            static_cast<std::size_t>(c.cfg.integer("grid.T_points")));
    cm = kind == "yt" ? current_map_yt(model, a, T) : current_map_folded(model, a, T);
  }
  cm.config_hash = c.hash;
  // beats between the extreme levels; a coarser step aliases them and the
  // grid integral is then unreliable
  const double fringe = default_window(model).fringe_period;
  const double step2 = cm.axis2.size() > 1 ? (cm.axis2.back() - cm.axis2.front()) / double(cm.axis2.size() - 1) : 0.0;
  const bool resolved = step2 <= 0.5 * fringe;
  if (!resolved)
    std::cerr << "warning: time step " << step2 << " s does not resolve the " << fringe
              << " s fringe period; the integrated weight is aliased\n";
  std::size_t best = 0;
  for (std::size_t k = 0; k < cm.values.size(); ++k)
    if (cm.values[k] > cm.values[best]) best = k;
  const std::string c1 = kind == "yt" ? "Y_m" : kind == "folded" ? "R_bar_m" : "t_s";
  const std::string c2 = kind == "t-tau" ? "tau_s" : "T_s";
  CsvWriter w(c.file("current_map.csv"));
  w.meta("config_hash", c.hash).meta("g_m_per_s2", cm.g).meta("coords", cm.coords).meta("unit", cm.unit);
  w.meta("transmitted_fraction", cm.transmitted).meta("integrated", cm.integrated);
  w.header({c1, c2, "J"});
  const std::size_t n1 = cm.axis1.size();
  for (std::size_t k = 0; k < cm.values.size(); ++k) w.row({cm.axis1[k % n1], cm.axis2[k / n1], cm.values[k]});
  Json j;
  j["config_hash"] = c.hash;
  j["coords"] = cm.coords;
  j["unit"] = cm.unit;
  j["g_m_per_s2"] = cm.g;
  j["argmax"] = {cm.axis1[best % n1], cm.axis2[best / n1]};
  j["peak"] = cm.values[best];
  j["integrated"] = cm.integrated;
  j["transmitted_fraction"] = cm.transmitted;
  j["fringe_period_s"] = fringe;
  j["time_step_s"] = step2;
  j["fringe_resolved"] = resolved;
  write_json(c.file("current_map.json"), j);
  std::cout << "argmax (" << cm.axis1[best % n1] << ", " << cm.axis2[best / n1] << "), integrated " << cm.integrated
            << " of transmitted " << cm.transmitted << '\n';
}

inline EventSampler make_sampler(const RunConfig& cfg, const ModelProvider& prov) {
  return EventSampler(prov.at(cfg.real("physics.g0")), sampler_spec(cfg));
}

inline void simulate(CommandContext& c) {
  c.stage = "inference";
  const ModelProvider prov(model_spec(c.cfg));
  const EventSampler smp = make_sampler(c.cfg, prov);
  const EventSet es = smp.sample(c.cfg.integer("atoms.N"), c.seed);
  write_events_csv(c.file("events.csv"), es, c.hash);
  Json j;
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  j["N"] = es.N;
  j["N_c"] = es.N_c;
  j["transmitted_fraction"] = smp.model().transmitted();
  j["proposals"] = es.proposals;
  j["envelope_violations"] = es.envelope_violations;
  j["clipped_negative_fraction"] = smp.clipped_fraction();
  j["grid_mass"] = smp.grid_mass();
  write_json(c.file("simulate.json"), j);
  std::cout << "N_c = " << es.N_c << " events\n";
}

inline void estimate(CommandContext& c) {
  c.stage = "inference";
  const ModelProvider prov(model_spec(c.cfg));
  const double g0 = c.cfg.real("physics.g0");
  EventSet es;
  const std::string path = c.cfg.text("estimate.events");
  if (!path.empty()) {
    es = read_events_csv(path);
  } else {
    es = make_sampler(c.cfg, prov).sample(c.cfg.integer("atoms.N"), c.seed);
  }
  const LikelihoodScan sc = estimate_g(es, g0, prov, scan_spec(c.cfg), likelihood_spec(c.cfg));
  CsvWriter w(c.file("likelihood_scan.csv"));
  w.meta("config_hash", c.hash).meta("seed", std::to_string(es.seed)).meta("g0_m_per_s2", g0);
  w.header({"rel_offset", "g_m_per_s2", "logL"});
  for (std::size_t i = 0; i < sc.offsets.size(); ++i) w.row({sc.offsets[i], g0 * (1 + sc.offsets[i]), sc.logL[i]});
  Json j;
  j["config_hash"] = c.hash;
  j["seed"] = es.seed;
  j["N_c"] = es.N_c;
  j["likelihood"] = c.cfg.text("likelihood.form");
  j["g_hat_m_per_s2"] = sc.g_hat;
  j["sigma_g_m_per_s2"] = sc.sigma_g;
  j["rel_bias"] = sc.g_hat / g0 - 1.0;
  j["rel_sigma"] = sc.sigma_g / g0;
  j["widened"] = sc.widened;
  j["fit_rms"] = sc.fit_rms;
  j["floored_events"] = sc.floored;
  write_json(c.file("estimate.json"), j);
  std::cout << "g_hat = " << sc.g_hat << " +- " << sc.sigma_g << " m/s^2\n";
}

inline Json fisher_json(const FisherResult& f) {
  Json j;
  j["I_g_s4_per_m2"] = f.I_g;
  j["I_steps"] = f.I_steps;
  j["I_conditional_per_detected"] = f.I_conditional;
  j["transmitted_fraction"] = f.fraction;
  j["d_fraction_dg"] = f.d_fraction_dg;
  j["N"] = f.N;
  j["sigma_CR_m_per_s2"] = f.sigma_CR;
  j["rel_sigma_CR"] = f.sigma_CR / f.g0;
  j["step_spread"] = f.step_spread;
  j["clipped_nodes"] = f.clipped_nodes;
  j["negative_mass"] = f.negative_mass;
  j["grid_nodes"] = f.grid_nodes;
  return j;
}

inline void fisher(CommandContext& c) {
  c.stage = "inference";
  const ModelProvider prov(model_spec(c.cfg));
  const double g0 = c.cfg.real("physics.g0");
  const FisherResult f = fisher_information(prov.spec(), g0, c.cfg.integer("atoms.N"), fisher_spec(c.cfg), &prov);
  Json j = fisher_json(f);
  j["config_hash"] = c.hash;
  write_json(c.file("fisher.json"), j);
  std::cout << "sigma_CR / g0 = " << f.sigma_CR / g0 << '\n';
}

inline void campaign(CommandContext& c) {
  c.stage = "inference";
  const ModelProvider prov(model_spec(c.cfg));
  const double g0 = c.cfg.real("physics.g0");
  const EventSampler smp = make_sampler(c.cfg, prov);
  const int M = static_cast<int>(c.cfg.integer("campaign.M"));
  const long long N = c.cfg.integer("atoms.N");
  const CampaignResult r = run_campaign(M, N, c.seed, smp, prov, scan_spec(c.cfg), likelihood_spec(c.cfg));
  {
    CsvWriter w(c.file("campaign_estimates.csv"));
    w.meta("config_hash", c.hash).meta("seed", std::to_string(c.seed)).header({"draw", "g_hat_m_per_s2", "sigma_fit_m_per_s2"});
    for (std::size_t i = 0; i < r.g_hat.size(); ++i) w.row({double(r.draw_index[i]), r.g_hat[i], r.sigma_fit[i]});
  }
  {
    CsvWriter w(c.file("campaign_histogram.csv"));
    w.meta("config_hash", c.hash).header({"rel_offset_lo", "rel_offset_hi", "density"});
    for (std::size_t i = 0; i < r.hist_density.size(); ++i) w.row({r.hist_edges[i], r.hist_edges[i + 1], r.hist_density[i]});
  }
  Json j;
  j["config_hash"] = c.hash;
  j["seed"] = c.seed;
  j["M"] = M;
  j["N"] = N;
  j["N_c"] = smp.count_for(N, c.seed, 1);
  j["successful"] = r.g_hat.size();
  j["failures"] = r.failures;
  j["failure_messages"] = r.failure_messages;
  j["mean_g_m_per_s2"] = r.mean;
  j["rel_bias"] = r.mean / g0 - 1.0;
  j["sigma_MC_m_per_s2"] = r.sd;
  j["rel_sigma_MC"] = r.sd / g0;
  j["rel_sigma_MC_bootstrap_error"] = r.sd_error / g0;
  j["rel_mean_sigma_fit"] = r.mean_sigma_fit / g0;
  j["excess_kurtosis"] = r.excess_kurtosis;
  if (c.cfg.flag("campaign.fisher")) {
    const FisherResult f = fisher_information(prov.spec(), g0, N, fisher_spec(c.cfg), &prov, smp.grid());
    j["fisher"] = fisher_json(f);
    j["efficiency"] = f.efficiency(r.sd);
    j["cramer_rao_ordering_holds"] = r.sd >= f.sigma_CR * (1.0 - 3.0 / std::sqrt(double(r.g_hat.size())));
  }
  write_json(c.file("campaign.json"), j);
  std::cout << "sigma_MC / g0 = " << r.sd / g0 << " over " << r.g_hat.size() << " draws\n";
}

}  // namespace commands

inline const std::map<std::string, std::function<void(CommandContext&)>>& command_table() {
  static const std::map<std::string, std::function<void(CommandContext&)>> t = {
      {"scales", commands::scales},           {"basis", commands::basis},
      {"source-dist", commands::source_dist}, {"end-of-mirror", commands::end_of_mirror},
      {"current-map", commands::current_map}, {"simulate", commands::simulate},
      {"estimate", commands::estimate},       {"fisher", commands::fisher},
      {"campaign", commands::campaign},
  };
  return t;
}

// Runs one command; returns the process exit status. The manifest is written
// in every case.
inline int run(const RunConfig& cfg, const std::string& command, const fs::path& out) {
  const auto& table = command_table();
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  CommandContext ctx{cfg, out, cfg.hash(), static_cast<std::uint64_t>(cfg.integer("run.seed")), {}, ""};
  Json man;
  man["command"] = command;
  man["config_hash"] = ctx.hash;
  man["seed"] = ctx.seed;
  man["version"] = GBARQ_VERSION;
  man["workers"] = default_workers();
  int status = 0;
  auto it = table.find(command);
  if (it == table.end()) {
    man["status"] = "failed";
    man["error"] = "unknown command " + command;
    status = 2;
  } else {
    try {
      it->second(ctx);
      man["status"] = "ok";
    } catch (const std::exception& e) {
      man["status"] = "failed";
      man["error"] = (ctx.stage.empty() ? std::string() : ctx.stage + ": ") + e.what();
      status = 1;
      std::cerr << "error: " << man["error"].get<std::string>() << '\n';
    }
  }
  man["files"] = ctx.files;
  if (status != 0) man["files_complete"] = false;
  man["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  man["config"] = cfg.canonical();
  write_json(out / (command + ".manifest.json"), man);
  return status;
}

}  // namespace gbarq
