#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "lrp/errors.hpp"
#include "lrp/format.hpp"
#include "lrp/lab.hpp"
#include "lrp/theory.hpp"

namespace lrp {

namespace {

struct ModelFlags {
  int dim = 1;
  double s = 1.5;
  double beta = 1;
  double nn_prob = 0;
  std::string profile = "shifted-power";
  std::string norm = "euclidean";
  std::string q_table;  // "m:q,m:q,..."

  BondModel build() const {
    BondModel m;
    m.dim = dim;
    m.nn_prob = nn_prob;
    m.norm = parse_norm(norm);
    switch (parse_profile(profile)) {
      case ProfileKind::shifted_power: m.profile = ConnectionProfile::shifted_power(beta, s); break;
      case ProfileKind::pure_power: m.profile = ConnectionProfile::pure_power(beta, s); break;
      case ProfileKind::custom_table: {
        std::vector<std::pair<double, double>> t;
        std::stringstream in(q_table);
        std::string item;
        while (std::getline(in, item, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw InvalidInput("q-table entries look like magnitude:q");
          try {
            t.emplace_back(std::stod(item.substr(0, colon)), std::stod(item.substr(colon + 1)));
          } catch (const std::logic_error&) {
            throw InvalidInput("bad q-table entry '" + item + "'");
          }
        }
        if (t.empty()) throw InvalidInput("custom-table profile needs --q-table");
        m.profile = ConnectionProfile::custom_table(std::move(t));
        break;
      }
    }
    m.validate();
    return m;
  }
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--dim", f.dim, "Lattice dimension");
  app->add_option("--s", f.s, "Decay exponent s");
  app->add_option("--beta", f.beta, "Connection strength beta");
  app->add_option("--nn-prob", f.nn_prob, "Extra nearest-neighbour bond probability");
  app->add_option("--profile", f.profile, "shifted-power, pure-power or custom-table");
  app->add_option("--norm", f.norm, "euclidean, sup or taxicab");
  app->add_option("--q-table", f.q_table, "custom-table entries magnitude:q,...");
}

struct OutputFlags {
  std::string out;
  std::string format = "json";
  bool timing = false;
};

void add_output_flags(CLI::App* app, OutputFlags& f) {
  app->add_option("--out", f.out, "Output file (default stdout)");
  app->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
  app->add_flag("--timing", f.timing, "Include wall-clock time in JSON reports");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open output file " + path);
  f << text;
  if (!f) throw InvalidInput("failed writing " + path);
}

void emit_report(Report rep, const OutputFlags& o) {
  rep.include_timing = o.timing;
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
  emit(o.format == "csv" ? rep.csv_text() : rep.json_text(), o.out);
}

std::string theory_text(const ModelFlags& mf, double qprime, double q, double ell0, double N0, double sprime, double rho0,
                        int depth, double gamma) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "delta(s=" << format_double(mf.s) << ", d=" << mf.dim << ") = " << delta(mf.s, mf.dim) << "\n";
  out << "\npsi(q', q) = relative entropy rate\n";
  out << "q'\tq\tpsi\n";
  std::vector<double> qps = {qprime};
  if (qprime < 0) qps = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  for (double x : qps) out << x << "\t" << q << "\t" << chernoff_rate(x, q) << "\n";
  if (mf.s > mf.dim && mf.s < 2.0 * mf.dim) {
    out << "\ndepth_K(N, gamma=" << gamma << ") and depth_n(N, gamma, eps=1)\n";
    out << "N\tK\tn\n";
    for (double N : {1e3, 1e6, 1e9, 1e12}) out << N << "\t" << depth_K(N, gamma) << "\t" << depth_n(N, gamma, 1.0) << "\n";
    const double sp = sprime > 0 ? sprime : 0.5 * (mf.s + 2.0 * mf.dim);
    const ScaleSequence seq = make_scale_sequence(ell0, N0, mf.s, sp, mf.dim, rho0, depth);
    out << "\nscale sequence (ell0=" << ell0 << ", N0=" << N0 << ", s'=" << sp << ", rho0=" << rho0 << ", shift=" << seq.shift
        << ")\n";
    out << "n\tell\tN\tr\tp\trho\tc0_term\n";
    for (int n = 1; n <= seq.depth(); ++n) {
      const auto i = static_cast<std::size_t>(n);
      out << n << "\t" << seq.ell[i - 1] << "\t" << seq.N[i] << "\t" << seq.r[i - 1] << "\t" << seq.p[i - 1] << "\t"
          << seq.rho[i] << "\t" << seq.c0_terms[i - 1] << "\n";
    }
    out << "c0 = " << seq.c0 << (seq.N_exact ? "" : " (N beyond 2^53, rounded)") << "\n";
  }
  return out.str();
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Long-range percolation simulation and bound calculators", "lrp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  ModelFlags mf;
  OutputFlags of;
  ExperimentConfig cfg;
  std::uint64_t seed = 0;
  Coord side = 64;
  bool centered = false;
  double memory_gib = 8;
  std::vector<double> distances;
  Coord K = 3;
  CompleteGraphParams cg{100, 0.9, 0.3, 0.7, 0.15};
  double qprime = -1, q = 0.9, ell0 = 3, N0 = 1, rho0 = 0.5;
  int depth = 6;

  auto common = [&](CLI::App* sub, bool sides) {
    add_model_flags(sub, mf);
    add_output_flags(sub, of);
    sub->add_option("--seed", seed, "Master seed (default $LRP_SEED or 1)");
    sub->add_option("--threads", cfg.threads, "Worker threads");
    sub->add_option("--memory-budget", memory_gib, "Memory budget in GiB");
    if (sides) {
      sub->add_option("--sides", cfg.sides, "Box sides, ascending")->delimiter(',');
      sub->add_option("--trials", cfg.trials, "Trials per size");
      sub->add_option("--rho", cfg.rho, "Density threshold rho");
      sub->add_option("--ell", cfg.ell, "Window side ell (odd)");
      sub->add_option("--gamma", cfg.gamma, "Scale ratio gamma");
      sub->add_option("--sprime", cfg.sprime, "Exponent s' (default (s + 2d)/2)");
    }
  };

  auto* sample = app.add_subcommand("sample", "Sample one graph and write its edge list");
  common(sample, false);
  sample->add_option("--side", side, "Box side");
  sample->add_flag("--centered", centered, "Center the box on the origin (side must be odd)");

  auto* cf = app.add_subcommand("cluster-fraction", "Largest-component fraction tails");
  common(cf, true);
  auto* ds = app.add_subcommand("distance-scaling", "Chemical distance against log log |x|");
  common(ds, true);
  ds->add_option("--distances", distances, "Distances |x| (default dyadic schedule)")->delimiter(',');
  ds->add_option("--box-factor", cfg.box_factor, "Box side as a multiple of |x|");
  auto* dd = app.add_subcommand("dense-density", "Dense-set density tails");
  common(dd, true);
  auto* cgc = app.add_subcommand("complete-graph", "Site-bond percolation on the complete graph");
  cgc->add_option("--n", cg.n, "Vertices");
  cgc->add_option("--r", cg.r, "Site occupation probability");
  cgc->add_option("--p", cg.p, "Bond occupation probability");
  cgc->add_option("--rprime", cg.rprime, "Site threshold r'");
  cgc->add_option("--pprime", cg.pprime, "Bond threshold p'");
  cgc->add_option("--trials", cfg.trials, "Trials");
  cgc->add_option("--seed", seed, "Master seed (default $LRP_SEED or 1)");
  cgc->add_option("--threads", cfg.threads, "Worker threads");
  add_output_flags(cgc, of);
  auto* br = app.add_subcommand("block-renorm", "Block occupancy and block connection statistics");
  common(br, true);
  br->add_option("--K", K, "Block side (odd, divides every side)");
  br->add_option("--delta", cfg.delta, "Block occupancy threshold");
  br->add_option("--betas", cfg.coupled_betas, "Coupled beta values")->delimiter(',');
  auto* ha = app.add_subcommand("hierarchy-audit", "Hierarchies of sampled shortest paths");
  common(ha, true);
  ha->add_option("--distances", distances, "Distances |x|")->delimiter(',');
  ha->add_option("--box-factor", cfg.box_factor, "Box side as a multiple of |x|");
  ha->add_option("--exponent", cfg.exponent, "Regularity exponent (default Delta)");
  auto* th = app.add_subcommand("theory", "Print Delta, psi and scale-sequence tables");
  add_model_flags(th, mf);
  th->add_option("--qprime", qprime, "q' for psi (default a grid)");
  th->add_option("--q", q, "q for psi");
  th->add_option("--gamma", cfg.gamma, "gamma for depth tables");
  th->add_option("--sprime", cfg.sprime, "Exponent s'");
  th->add_option("--ell0", ell0, "Minimal scale ell_0");
  th->add_option("--N0", N0, "Base scale N_0");
  th->add_option("--rho0", rho0, "Base density rho_0");
  th->add_option("--depth", depth, "Scale-sequence depth");
  th->add_option("--out", of.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  try {
    bool seed_given = false;
    for (const CLI::App* sub : {sample, cf, ds, dd, cgc, br, ha}) seed_given = seed_given || sub->count("--seed") > 0;
    cfg.seed = seed_given ? seed : default_seed();
    if (!(memory_gib > 0)) throw InvalidInput("memory budget must be positive");
    cfg.memory_budget_bytes = static_cast<std::size_t>(memory_gib * double(1 << 30));

    if (*th) {
      emit(theory_text(mf, qprime, q, ell0, N0, cfg.sprime, rho0, depth, cfg.gamma), of.out);
      return 0;
    }
    if (*cgc) {
      emit_report(run_complete_graph_check(cg, cfg.trials, cfg.seed, cfg.threads), of);
      return 0;
    }
    cfg.model = mf.build();
    if (*sample) {
      const BoxSpec box = centered ? BoxSpec::centered(Point::zero(mf.dim), side) : BoxSpec::cornered(Point::zero(mf.dim), side);
      SamplerOptions so;
      so.threads = cfg.threads;
      so.memory_budget_bytes = cfg.memory_budget_bytes;
      emit(edge_list_text(sample_graph(cfg.model, box, cfg.seed, so)), of.out);
      return 0;
    }
    if (*cf) {
      emit_report(run_cluster_fraction(cfg), of);
    } else if (*ds) {
      if (distances.empty()) distances = default_distances(mf.dim, cfg.memory_budget_bytes);
      emit_report(run_distance_scaling(cfg, distances).report, of);
    } else if (*dd) {
      emit_report(run_dense_density(cfg), of);
    } else if (*br) {
      emit_report(run_block_renorm(cfg, K, cfg.delta), of);
    } else if (*ha) {
      if (distances.empty()) throw InvalidInput("hierarchy-audit needs --distances");
      emit_report(run_hierarchy_audit(cfg, distances), of);
    }
    return 0;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lrp
