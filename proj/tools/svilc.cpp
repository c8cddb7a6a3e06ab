// Copyright 2026 The svilc Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line driver: scf -> chi -> observables -> sweeps, all configured from one file.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "svilc/chi_solver.hpp"
#include "svilc/config.hpp"
#include "svilc/errors.hpp"
#include "svilc/linalg.hpp"
#include "svilc/meanfield.hpp"
#include "svilc/observables.hpp"
#include "svilc/qubit_system.hpp"
#include "svilc/report.hpp"

namespace fs = std::filesystem;
using namespace svilc;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitSolver = 2;

struct Options {
  std::string preset;
  std::string config;
  int threads = 0;
  std::string out;
  bool verbose = false;
  std::vector<std::string> feeds;    // NAME=VALUE overrides of the operating point
  std::string pattern;               // chi: a single DCQ label
  std::vector<std::string> sweeps;   // sweep: subset by name
  bool no_cache = false;
};

RunConfig resolve_config(const Options& o) {
  if (!o.preset.empty() && !o.config.empty()) {
    throw ValidationError("--preset and --config are mutually exclusive (put \"preset\" inside the config)");
  }
  RunConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
  } else {
    c = preset_config(o.preset.empty() ? "desk-1svq" : o.preset);
  }
  if (o.threads > 0) c.threads = o.threads;
  if (!o.out.empty()) c.output_dir = o.out;
  for (const auto& kv : o.feeds) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--feed: expected NAME=VALUE, got " + kv);
    const std::string name = kv.substr(0, eq);
    double v = 0.0;
    try {
      std::size_t used = 0;
      v = std::stod(kv.substr(eq + 1), &used);
      if (used != kv.size() - eq - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError("--feed " + name + ": value is not a number");
    }
    c.operating_point[name] = v;
  }
  validate_config(c);
  set_default_threads(c.threads);
  return c;
}

// Key of everything the mean field depends on, for the checkpoint cache.
std::string meanfield_key(const RunConfig& c) {
  nlohmann::json j = to_json(c);
  nlohmann::json k = {{"lattice", j["lattice"]}, {"physics", j["physics"]}, {"dcqs", j["dcqs"]},
                      {"scf", j["solver"]["scf"]}};
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : k.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return hash_hex(h);
}

struct Pipeline {
  RunConfig config;
  fs::path out;
  std::unique_ptr<QubitSystem> system;

  Pipeline(RunConfig c, bool verbose, bool use_cache) : config(std::move(c)), out(config.output_dir) {
    fs::create_directories(out);
    const BondGraph graph = build_lattice(config.layout.lattice);
    QubitLayout layout = resolved_layout(config, graph);
    layout.scf.verbose = verbose;
    const fs::path chk = out / "meanfield.chk";
    const fs::path key = out / "meanfield.key";
    const std::string want = meanfield_key(config);
    MeanFieldSolution mf;
    bool loaded = false;
    if (use_cache && fs::exists(chk) && fs::exists(key)) {
      std::ifstream k(key);
      std::string have;
      std::getline(k, have);
      if (have == want) {
        mf = load_checkpoint(chk.string(), graph);
        loaded = true;
      }
    }
    if (!loaded) {
      mf = solve_layout_meanfield(layout, graph);
      if (mf.converged) {
        save_checkpoint(chk.string(), mf);
        std::ofstream(key) << want << '\n';
      }
    }
    if (!mf.converged) {
      std::cerr << "warning: SCF stopped at residual " << mf.residual << " after " << mf.iterations
                << " iterations (tolerance " << layout.scf.tol << ")\n";
    }
    system = std::make_unique<QubitSystem>(layout, std::move(mf));
  }
};

void write_fields(std::ostream& os, const BondGraph& g, const MeanFieldSolution& mf) {
  os << "# converged=" << (mf.converged ? "yes" : "no") << " iterations=" << mf.iterations
     << " residual=" << mf.residual << " total_energy_meV=" << std::setprecision(12) << mf.total_energy << '\n';
  os << "x y n S xi_rad\n";
  for (int j = 0; j < g.n_sites(); ++j) {
    const Site s = g.sites[static_cast<std::size_t>(j)];
    os << s.x << ' ' << s.y << ' ' << mf.fields.n[j] << ' ' << mf.fields.S[j] << ' ' << mf.fields.xi[j] << '\n';
  }
}

int run_scf(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  const auto& sys = *p.system;
  OutputFile f(p.out, "fields.txt", p.config);
  write_fields(f.stream(), sys.graph(), sys.meanfield());
  f.commit();
  OutputFile w(p.out, "texture_windings.txt", p.config);
  w.stream() << "# staggered-frame winding of the spin azimuth per basis loop (nonzero only)\n";
  w.stream() << "loop cx cy winding\n";
  const auto& tw = sys.context().texture_windings();
  for (int l = 0; l < sys.basis().n_loops(); ++l) {
    if (tw[static_cast<std::size_t>(l)] == 0) continue;
    const auto& c = sys.basis().loops[static_cast<std::size_t>(l)].centroid;
    w.stream() << l << ' ' << c.x << ' ' << c.y << ' ' << tw[static_cast<std::size_t>(l)] << '\n';
  }
  w.commit();
  std::cout << "scf: E = " << std::setprecision(10) << sys.meanfield().total_energy << " meV, residual "
            << sys.meanfield().residual << ", " << sys.meanfield().iterations << " iterations -> " << p.out << '\n';
  return sys.meanfield().converged ? kExitOk : kExitSolver;
}

int run_patterns(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  const auto& sys = *p.system;
  const auto& tw = sys.context().texture_windings();
  const auto patterns = enumerate_patterns(tw);
  const Eigen::VectorXd inj = sys.injection(p.config.operating_feeds());
  std::vector<std::string> rows(patterns.size());
  std::vector<std::string> errors(patterns.size());
  parallel_for(patterns.size(), p.config.threads, [&](std::size_t i) {
    std::ostringstream os;
    os << std::setprecision(12);
    try {
      const CurrentState st = solve_chi(sys.context(), patterns[i], inj, sys.layout().chi);
      const StateLabel lab = sys.label_state(st.bond_currents);
      os << patterns[i].label << ',' << (satisfies_parity(patterns[i], tw) ? "even" : "odd") << ','
         << st.energy << ',' << st.gradient_norm << ',' << st.iterations << ',' << (st.regularized ? 1 : 0) << ','
         << lab.label << (lab.ambiguous ? "?" : "");
    } catch (const SolverError& e) {
      os << patterns[i].label << ",even,nan,nan,0,0,";
      errors[i] = e.what();
    }
    rows[i] = os.str();
  });
  OutputFile f(p.out, "patterns.csv", p.config);
  f.stream() << "# one row per winding pattern over odd-texture loops (+ means wbar = +1)\n";
  f.stream() << "pattern,parity,energy_meV,kirchhoff_residual_2et/hbar,newton_iterations,regularized,dcq_label\n";
  for (const auto& r : rows) f.stream() << r << '\n';
  int status = kExitOk;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i].empty()) {
      std::cerr << "pattern " << patterns[i].label << ": " << errors[i] << '\n';
      status = kExitSolver;
    }
  }
  if (status != kExitOk) return status;  // the .partial file is kept
  f.commit();
  std::cout << "patterns: " << patterns.size() << " written to " << f.path() << '\n';
  return kExitOk;
}

int run_chi(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  const auto& sys = *p.system;
  const Eigen::VectorXd inj = sys.injection(p.config.operating_feeds());
  std::vector<WindingPattern> patterns;
  if (o.pattern.empty()) {
    patterns = sys.dcq_patterns();
  } else {
    patterns.push_back(sys.dcq_pattern(o.pattern));
  }
  ChiOptions chi = sys.layout().chi;
  chi.verbose = o.verbose;
  OutputFile summary(p.out, "chi_summary.csv", p.config);
  summary.stream() << "state,energy_meV,column_current_2et/hbar,kirchhoff_residual_2et/hbar,regularized\n";
  for (const auto& pat : patterns) {
    const CurrentState st = solve_chi(sys.context(), pat, inj, chi);
    const StateLabel lab = sys.label_state(st.bond_currents);
    OutputFile f(p.out, "currents_" + pat.label + ".txt", p.config);
    f.stream() << "# state " << pat.label << "; arrow length 1 lattice spacing per 1/3 (2et/hbar)\n";
    write_bond_currents(f.stream(), sys.graph(), st.bond_currents, "bond currents, units of 2et/hbar");
    f.commit();
    summary.stream() << std::setprecision(12) << pat.label << ',' << st.energy << ',';
    for (std::size_t k = 0; k < lab.column_currents.size(); ++k) {
      summary.stream() << (k ? ";" : "") << lab.column_currents[k];
    }
    summary.stream() << ',' << st.gradient_norm << ',' << (st.regularized ? 1 : 0) << '\n';
  }
  summary.commit();
  std::cout << "chi: " << patterns.size() << " states written to " << p.out << '\n';
  return kExitOk;
}

void write_levels(std::ostream& os, const SpectrumPoint& sp) {
  os << "level,label,energy_meV,field_eigenvalue_meV\n";
  os << std::setprecision(12);
  for (Eigen::Index k = 0; k < sp.levels.energies.size(); ++k) {
    os << k << ',' << sp.levels.labels[static_cast<std::size_t>(k)] << ',' << sp.levels.energies[k] << ','
       << sp.levels.field_eigenvalues[k] << '\n';
  }
}

int run_spectrum(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  const SpectrumPoint sp = compute_spectrum(*p.system, p.config.operating_feeds(), p.config.threads);
  OutputFile f(p.out, "spectrum.csv", p.config);
  f.stream() << "# feeds (2et/hbar):";
  for (std::size_t i = 0; i < p.system->layout().feeds.size(); ++i) {
    f.stream() << ' ' << p.system->layout().feeds[i].name << '=' << sp.feed_values[static_cast<Eigen::Index>(i)];
  }
  f.stream() << '\n';
  write_levels(f.stream(), sp);
  f.commit();
  std::cout << "spectrum: " << sp.levels.energies.size() << " levels written to " << f.path() << '\n';
  for (Eigen::Index k = 0; k < sp.levels.energies.size(); ++k) {
    std::cout << "  " << sp.levels.labels[static_cast<std::size_t>(k)] << "  " << std::setprecision(12)
              << sp.levels.energies[k] << " meV\n";
  }
  return kExitOk;
}

int run_sweep(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  std::vector<SweepSpec> todo;
  if (o.sweeps.empty()) {
    todo = p.config.sweeps;
  } else {
    for (const auto& n : o.sweeps) todo.push_back(p.config.sweep(n));
  }
  if (todo.empty()) throw ValidationError("sweeps: the configuration declares no sweeps");
  int status = kExitOk;
  for (const auto& spec : todo) {
    const SpectrumSweep sw = sweep_feed(*p.system, spec, p.config.threads);
    bool missing = false;
    for (const auto& pt : sw.points) missing = missing || !pt.ok;
    OutputFile csv(p.out, "sweep_" + spec.name + ".csv", p.config);
    write_sweep_csv(csv.stream(), p.system->layout(), sw);
    OutputFile cr(p.out, "crossings_" + spec.name + ".txt", p.config);
    write_crossings(cr.stream(), sw);
    if (missing) {
      std::cerr << "sweep " << spec.name << ": some grid points failed; results kept as .partial\n";
      status = kExitSolver;
      continue;
    }
    csv.commit();
    cr.commit();
    std::cout << "sweep " << spec.name << ": " << sw.points.size() << " points, " << sw.crossings.size()
              << " crossings\n";
    for (const auto& c : sw.crossings) {
      std::cout << "  " << c.first << " / " << c.second << " at " << std::setprecision(6) << c.parameter << '\n';
    }
  }
  return status;
}

int run_dipoles(const Options& o) {
  Pipeline p(resolve_config(o), o.verbose, !o.no_cache);
  const SpectrumPoint sp = compute_spectrum(*p.system, p.config.operating_feeds(), p.config.threads);
  const DipoleMatrix d = transition_dipoles(sp.coupling, sp.levels, p.system->layout().lattice.lattice_constant_nm);
  OutputFile f(p.out, "dipoles.txt", p.config);
  write_dipole_table(f.stream(), d, table_order(p.system->n_qubits()), "transition dipole moments");
  f.stream() << "# diagonal <mu_y> per state (1e-30 C m):";
  for (std::size_t k = 0; k < d.labels.size(); ++k) {
    f.stream() << ' ' << d.labels[k] << '=' << std::setprecision(6) << d.mu_y(static_cast<Eigen::Index>(k),
                                                                                static_cast<Eigen::Index>(k)).real();
  }
  f.stream() << '\n';
  if (!sp.coupling.singular_pairs.empty()) {
    f.stream() << "# singular overlaps (elements set to 0):";
    for (const auto& [a, b] : sp.coupling.singular_pairs) {
      f.stream() << ' ' << sp.coupling.labels[static_cast<std::size_t>(a)] << '/'
                 << sp.coupling.labels[static_cast<std::size_t>(b)];
    }
    f.stream() << '\n';
  }
  f.commit();
  std::cout << "dipoles: written to " << f.path() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"svilc: spin-vortex-induced loop current qubit simulator"};
  app.set_version_flag("--version", std::string("svilc ") + kToolVersion);
  app.require_subcommand(1);
  Options o;
  app.add_option("--preset", o.preset, "Preset layout")->check(CLI::IsMember(preset_names()));
  app.add_option("--config", o.config, "Configuration file (JSON, // comments allowed)")->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Output directory");
  app.add_flag("-v,--verbose", o.verbose, "Solver progress on stderr");
  app.add_flag("--no-cache", o.no_cache, "Recompute the mean field even if a matching checkpoint exists");

  auto* scf = app.add_subcommand("scf", "Self-consistent mean field; writes fields and texture windings");
  auto* patterns = app.add_subcommand("patterns", "Solve every winding pattern allowed by parity");
  patterns->add_option("--feed", o.feeds, "Feed value NAME=VALUE (2et/hbar), repeatable");
  auto* chi = app.add_subcommand("chi", "Solve DCQ states and export bond currents");
  chi->add_option("--feed", o.feeds, "Feed value NAME=VALUE (2et/hbar), repeatable");
  chi->add_option("--state", o.pattern, "Single DCQ label such as DDU");
  auto* spectrum = app.add_subcommand("spectrum", "Diagonalized DCQ levels at the operating point");
  spectrum->add_option("--feed", o.feeds, "Feed value NAME=VALUE (2et/hbar), repeatable");
  auto* sweep = app.add_subcommand("sweep", "Feed sweeps with crossing detection");
  sweep->add_option("--sweep", o.sweeps, "Run only the named sweeps");
  auto* dipoles = app.add_subcommand("dipoles", "Transition dipole table");
  dipoles->add_option("--feed", o.feeds, "Feed value NAME=VALUE (2et/hbar), repeatable");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (scf->parsed()) return run_scf(o);
    if (patterns->parsed()) return run_patterns(o);
    if (chi->parsed()) return run_chi(o);
    if (spectrum->parsed()) return run_spectrum(o);
    if (sweep->parsed()) return run_sweep(o);
    if (dipoles->parsed()) return run_dipoles(o);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolver;
  }
  return kExitValidation;
}
