#include "qmarket/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "qmarket/closed_market.hpp"
#include "qmarket/errors.hpp"
#include "qmarket/fock.hpp"
#include "qmarket/io.hpp"
#include "qmarket/pilotwave.hpp"
#include "qmarket/reservoir_generated.hpp"
#include "qmarket/reservoir_info.hpp"

namespace qmarket {

namespace {

std::string trader_csv(const std::string& prefix, int trader) {
  return prefix + "_trader" + std::to_string(trader + 1) + ".csv";
}

void run_pilotwave(const ExperimentConfig& cfg) {
  if (cfg.csv_prefix.empty())
    throw ConfigError("config: output.csv_prefix is required for simulate");
  const PilotwaveSetup& p = cfg.pilot;
  WaveField psi = gaussian_packet(p.grid, p.sigma, p.center1, p.center2, p.hbar, p.mass);
  PotentialField hard = free_potential(p.grid);
  if (p.harmonic) {
    for (int i = 0; i < p.grid.n1; ++i) {
      const double d1 = p.grid.q1(i) - p.vc1;
      for (int j = 0; j < p.grid.n2; ++j) {
        const double d2 = p.grid.q2(j) - p.vc2;
        hard.V(i, j) = 0.5 * (p.k1 * d1 * d1 + p.k2 * d2 * d2);
      }
    }
  }
  const std::vector<double> t = linspace(0.0, cfg.time.t_max, cfg.time.n_samples);
  const double dt = t[1] - t[0];
  std::vector<ForceField> forces;
  std::vector<double> norms;
  forces.reserve(t.size());
  norms.reserve(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    const double peak = psi.values.cwiseAbs().maxCoeff();
    PotentialField qp = quantum_potential(psi, p.r_floor_rel * peak);
    qp.V = hard.V;
    forces.push_back(add_forces(mental_force(qp), hard_force(qp)));
    norms.push_back(total_probability(psi));
    if (i + 1 == t.size() && !cfg.fields_prefix.empty()) {
      write_field_csv(cfg.fields_prefix + "_R.csv", p.grid, qp.R);
      write_field_csv(cfg.fields_prefix + "_U.csv", p.grid, qp.U);
    }
    if (i + 1 < t.size()) psi = schrodinger_step(psi, hard, dt);
  }
  const auto points = integrate_portfolio(p.pi0, forces, {p.path}, t);
  write_portfolio_csv(cfg.csv_prefix + "_portfolio.csv", points, norms);
}

// Oracle defaults.

BathWindow window_model2(const ReservoirSpecII& spec, const OracleSettings& o) {
  BathWindow win{o.k_min, o.k_max, o.n_k};
  if (win.n_k == 0) win.n_k = 4001;
  if (win.k_min == 0.0 && win.k_max == 0.0) {
    const double U =
        spec.window_halfwidth > 0 ? spec.window_halfwidth : 40.0 * std::max(gamma_prime(spec), 1.0);
    win.k_min = (spec.omega - U) / spec.Omega;
    win.k_max = (spec.omega + U) / spec.Omega;
  }
  return win;
}

BathWindow window_model3(const ReservoirSpecIII& spec, const OracleSettings& o) {
  BathWindow win{o.k_min, o.k_max, o.n_k};
  if (win.n_k == 0) win.n_k = 2400;
  if (win.k_min == 0.0 && win.k_max == 0.0) {
    const double re_g = information_decay(spec).real();
    const double M =
        spec.window_halfwidth > 0 ? spec.window_halfwidth : 40.0 * std::max(1.0, re_g);
    const double lo = std::min({spec.omega_s, spec.omega_c, spec.Omega});
    const double hi = std::max({spec.omega_s, spec.omega_c, spec.Omega});
    win.k_min = (lo - M) / spec.Omega_r;
    win.k_max = (hi + M) / spec.Omega_r;
  }
  return win;
}

std::string pass_fail(bool ok) { return ok ? "PASS" : "FAIL"; }

double rel_diff(double value, double reference) {
  const double scale = std::abs(reference);
  if (scale == 0.0) return std::abs(value);
  return std::abs(value - reference) / scale;
}

int near_int(double x, const std::string& what) {
  const double r = std::round(x);
  if (std::abs(x - r) > 1e-9)
    throw ConfigError("oracle-check: " + what + " must be an integer occupation");
  return static_cast<int>(r);
}

void oracle_model1(const ExperimentConfig& cfg, const OracleSettings& o,
                   std::vector<std::string>& lines, bool& all_ok) {
  const double tol = o.tolerance > 0 ? o.tolerance : 1e-8;
  for (size_t ti = 0; ti < cfg.traders1.size(); ++ti) {
    const Model1Trader& tr = cfg.traders1[ti];
    const int S = near_int(tr.init.shares, "shares");
    const int K = near_int(tr.init.cash, "cash");
    const int I = near_int(tr.init.loi, "loi");
    const int M = S + K + I;
    if (M > o.max_total)
      throw ConfigError("oracle-check: total quanta exceed the sector bound");
    SectorBasis basis(3, M);
    SectorEvolution evo(basis, sector_hamiltonian(basis, tr.params));
    TraderPropagator prop(coupling_matrix(tr.params));
    Eigen::VectorXi occ0(3);
    occ0 << S, K, I;
    double max_d = 0.0;
    for (double t : linspace(0.0, cfg.time.t_max, o.n_times)) {
      const Eigen::Vector3d exact = evo.occupations(occ0, t);
      const Eigen::Vector3d closed = occupations(prop.at(t), tr.init);
      max_d = std::max(max_d, (exact - closed).cwiseAbs().maxCoeff());
    }
    const bool ok = max_d < tol;
    all_ok = all_ok && ok;
    std::ostringstream line;
    line << "model1 trader " << ti + 1 << ": max occupation discrepancy "
         << format_double(max_d) << " over " << o.n_times << " times (tolerance "
         << format_double(tol) << ") " << pass_fail(ok);
    lines.push_back(line.str());
  }
}

void oracle_model2(const ExperimentConfig& cfg, const OracleSettings& o,
                   std::vector<std::string>& lines, bool& all_ok) {
  const double tol = o.tolerance > 0 ? o.tolerance : 0.05;
  for (size_t ti = 0; ti < cfg.traders2.size(); ++ti) {
    const Model2Trader& tr = cfg.traders2[ti];
    const double gp = gamma_prime(tr.spec);
    const double t_star = o.t_check > 0 ? o.t_check : (gp > 0 ? 20.0 / gp : cfg.time.t_max);
    const double pi0 = tr.init.shares + tr.init.cash;

    const auto closed = occupations_model2(tr.spec, tr.init, t_star);
    const double dpi_closed = closed.first + closed.second - pi0;
    const double dpi_formula = delta_pi_model2(pi0, tr.spec.n_I);
    const double rel_formula = rel_diff(dpi_closed, dpi_formula);
    const bool ok_formula = rel_formula < 0.01;

    const DiscretizedBathII bath(tr.spec, tr.init, window_model2(tr.spec, o));
    const double dpi_oracle = bath.portfolio(t_star) - pi0;
    const double rel_oracle = rel_diff(dpi_oracle, dpi_closed);
    const bool ok_oracle = rel_oracle < tol;

    const double leak = bath.leakage_fraction(t_star);
    const bool ok_leak = leak <= o.leakage_max;

    all_ok = all_ok && ok_formula && ok_oracle && ok_leak;
    std::ostringstream l1, l2, l3;
    l1 << "model2 trader " << ti + 1 << ": closed-form portfolio shift "
       << format_double(dpi_closed) << " vs long-time value " << format_double(dpi_formula)
       << ", relative difference " << format_double(rel_formula) << " (tolerance 0.01) "
       << pass_fail(ok_formula);
    l2 << "model2 trader " << ti + 1 << ": discretized-bath shift "
       << format_double(dpi_oracle) << " vs closed form, relative difference "
       << format_double(rel_oracle) << " (tolerance " << format_double(tol) << ") "
       << pass_fail(ok_oracle);
    l3 << "model2 trader " << ti + 1 << ": window-edge leakage " << format_double(leak)
       << " (limit " << format_double(o.leakage_max) << ") " << pass_fail(ok_leak);
    if (!ok_leak) l3 << " warning: k-window too narrow for the requested time";
    lines.push_back(l1.str());
    lines.push_back(l2.str());
    lines.push_back(l3.str());
  }
}

void oracle_model3(const ExperimentConfig& cfg, const OracleSettings& o,
                   std::vector<std::string>& lines, bool& all_ok) {
  const double tol = o.tolerance > 0 ? o.tolerance : 0.1;
  for (size_t ti = 0; ti < cfg.traders3.size(); ++ti) {
    const Model3Trader& tr = cfg.traders3[ti];
    const double t_star = o.t_check > 0 ? o.t_check : 100.0;

    const DiscretizedBathIII bath(tr.spec, tr.init, window_model3(tr.spec, o));
    const double dpi_oracle = bath.delta_pi(t_star);
    const double dpi_formula = delta_pi_model3(tr.spec, tr.init.loi);
    const double rel = rel_diff(dpi_oracle, dpi_formula);
    const bool ok_rel = rel < tol;

    const double leak = bath.leakage_fraction(t_star);
    const bool ok_leak = leak <= o.leakage_max;

    all_ok = all_ok && ok_rel && ok_leak;
    std::ostringstream l1, l2;
    l1 << "model3 trader " << ti + 1 << ": discretized-bath portfolio gain "
       << format_double(dpi_oracle) << " vs asymptotic formula " << format_double(dpi_formula)
       << ", relative difference " << format_double(rel) << " (tolerance "
       << format_double(tol) << ") " << pass_fail(ok_rel);
    l2 << "model3 trader " << ti + 1 << ": window-edge leakage " << format_double(leak)
       << " (limit " << format_double(o.leakage_max) << ") " << pass_fail(ok_leak);
    if (!ok_leak) l2 << " warning: k-window too narrow for the requested time";
    lines.push_back(l1.str());
    lines.push_back(l2.str());
  }
}

int thread_budget(int total) {
  int n = 0;
  if (const char* env = std::getenv("QMARKET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1)
      throw ConfigError("QMARKET_THREADS must be a positive integer");
    n = static_cast<int>(v);
  } else {
    n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
  }
  return std::max(1, std::min(n, total));
}

double delta_pi_value(const ExperimentConfig& cfg, int trader) {
  if (cfg.model == ModelKind::model3) {
    const Model3Trader& tr = cfg.traders3.at(trader);
    return delta_pi_model3(tr.spec, tr.init.loi);
  }
  const TimeSeries s = simulate_trader(cfg, trader);
  return s.portfolio.back() - s.portfolio.front();
}

}  // namespace

TimeSeries simulate_trader(const ExperimentConfig& cfg, int trader) {
  const std::vector<double> t = linspace(0.0, cfg.time.t_max, cfg.time.n_samples);
  switch (cfg.model) {
    case ModelKind::model1: {
      const Model1Trader& tr = cfg.traders1.at(trader);
      return portfolio_series(tr.params, tr.init, t);
    }
    case ModelKind::model2: {
      const Model2Trader& tr = cfg.traders2.at(trader);
      return series_model2(tr.spec, tr.init, t);
    }
    case ModelKind::model3: {
      const Model3Trader& tr = cfg.traders3.at(trader);
      return series_model3(tr.spec, tr.init, t, cfg.with_bath_term);
    }
    default:
      throw ConfigError("simulate: the pilot-wave stage has no occupation series");
  }
}

void run_simulate(const std::string& config_path) {
  const ExperimentConfig cfg = load_config(config_path);
  if (cfg.model == ModelKind::pilotwave) {
    run_pilotwave(cfg);
    return;
  }
  if (cfg.csv_prefix.empty())
    throw ConfigError("config: output.csv_prefix is required for simulate");
  std::vector<Curve> curves;
  for (int i = 0; i < cfg.n_traders(); ++i) {
    const TimeSeries s = simulate_trader(cfg, i);
    write_series_csv(trader_csv(cfg.csv_prefix, i), s);
    curves.push_back({"trader " + std::to_string(i + 1) + " portfolio", s.t, s.portfolio});
  }
  if (!cfg.svg_path.empty()) write_svg(cfg.svg_path, "portfolio", curves);
}

void run_oracle_check(const std::string& config_path) {
  const ExperimentConfig cfg = load_config(config_path);
  const OracleSettings o = cfg.oracle.value_or(OracleSettings{});
  std::vector<std::string> lines;
  bool all_ok = true;
  switch (cfg.model) {
    case ModelKind::model1: oracle_model1(cfg, o, lines, all_ok); break;
    case ModelKind::model2: oracle_model2(cfg, o, lines, all_ok); break;
    case ModelKind::model3: oracle_model3(cfg, o, lines, all_ok); break;
    default: throw ConfigError("oracle-check: no oracle for the pilot-wave stage");
  }
  lines.push_back(std::string("oracle-check result: ") + pass_fail(all_ok));
  for (const std::string& l : lines) std::cout << l << '\n';
  if (!cfg.report_path.empty()) {
    std::filesystem::path p(cfg.report_path);
    if (p.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(p.parent_path(), ec);
    }
    std::ofstream out(cfg.report_path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + cfg.report_path);
    for (const std::string& l : lines) out << l << '\n';
  }
  if (!all_ok) throw ToleranceError("oracle-check failed; see report lines");
}

void run_figures(const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path dir(out_dir);
  const std::vector<double> t = linspace(0.0, 20.0, 2000);
  const MarketInit init{30.0, 15.0, 5.0};
  auto series = [&](double ws, double wc, double W) {
    return portfolio_series(TraderParams{ws, wc, W, 0.5}, init, t);
  };
  auto occupation_curves = [](const TimeSeries& s) {
    return std::vector<Curve>{{"n_shares", s.t, s.n_shares},
                              {"n_cash", s.t, s.n_cash},
                              {"n_loi", s.t, s.n_loi},
                              {"portfolio", s.t, s.portfolio}};
  };

  const TimeSeries left = series(20.0, 20.0, 3.0);
  const TimeSeries right = series(2.0, 2.0, 3.0);
  write_series_csv((dir / "fig1_left.csv").string(), left);
  write_series_csv((dir / "fig1_right.csv").string(), right);
  write_svg((dir / "fig1_left.svg").string(), "closed market, stiff trader (omega=20)",
            occupation_curves(left));
  write_svg((dir / "fig1_right.svg").string(), "closed market, soft trader (omega=2)",
            occupation_curves(right));

  const struct {
    const char* base;
    double Omega1;
  } comparisons[] = {{"fig2", 5.0}, {"fig3", 10.0}};
  for (const auto& c : comparisons) {
    const TimeSeries one = series(1.0, 2.0, c.Omega1);
    const TimeSeries two = series(1.0, 2.0, 1.0);
    write_series_csv((dir / (std::string(c.base) + "_trader1.csv")).string(), one);
    write_series_csv((dir / (std::string(c.base) + "_trader2.csv")).string(), two);
    std::ostringstream title;
    title << "closed market portfolios, Omega1=" << c.Omega1 << " vs Omega2=1";
    write_svg((dir / (std::string(c.base) + ".svg")).string(), title.str(),
              {{"trader 1 portfolio", one.t, one.portfolio},
               {"trader 2 portfolio", two.t, two.portfolio}});
  }
}

void run_critical(const CriticalArgs& a) {
  ReservoirSpecIII t1, t2;
  t1.omega_s = t2.omega_s = a.omega_s;
  t1.omega_c = t2.omega_c = a.omega_c;
  t1.Omega_r = t2.Omega_r = a.Omega_r;
  t1.lambda_inf = t2.lambda_inf = a.lambda_inf;
  t1.Omega = a.omega1;
  t2.Omega = a.omega2;
  t1.gamma = a.gamma2;
  t2.gamma = a.gamma2;
  const CriticalGamma r = critical_gamma1(t1, t2, a.loi, a.lo, a.hi);
  if (r.found) {
    std::cout << "critical gamma1 = " << format_double(r.gamma1) << " (target delta_pi "
              << format_double(r.target_delta_pi) << ", residual "
              << format_double(r.residual) << ")\n";
    return;
  }
  const double hi = a.hi > 0 ? a.hi : a.gamma2;
  ReservoirSpecIII s_lo = t1, s_hi = t1;
  s_lo.gamma = a.lo;
  s_hi.gamma = hi;
  std::cout << "no crossing in bracket [" << format_double(a.lo) << ", " << format_double(hi)
            << "]: delta_pi1 spans [" << format_double(delta_pi_model3(s_hi, a.loi)) << ", "
            << format_double(delta_pi_model3(s_lo, a.loi)) << "] vs target "
            << format_double(r.target_delta_pi) << '\n';
}

std::vector<std::string> sweep_value_columns(const ExperimentConfig& cfg,
                                             const SweepSpec& sweep) {
  if (cfg.model == ModelKind::pilotwave)
    throw ConfigError("sweep: only the market models can be swept");
  const int n = cfg.n_traders();
  auto per_trader = [&](const std::string& stem) {
    std::vector<std::string> cols;
    for (int i = 0; i < n; ++i) cols.push_back(stem + "_" + std::to_string(i + 1));
    return cols;
  };
  switch (sweep.objective) {
    case SweepObjective::delta_pi: return per_trader("delta_pi");
    case SweepObjective::amplitude: return per_trader("amplitude");
    case SweepObjective::dominant_frequency: return per_trader("dominant_frequency");
    case SweepObjective::ordering:
      if (n != 2) throw ConfigError("sweep: the ordering objective needs two traders");
      return {"delta_pi_1", "delta_pi_2", "sign_delta"};
  }
  throw ConfigError("sweep: unknown objective");
}

std::vector<double> sweep_objective_row(const ExperimentConfig& cfg, const SweepSpec& sweep) {
  std::vector<double> row;
  switch (sweep.objective) {
    case SweepObjective::delta_pi:
      for (int i = 0; i < cfg.n_traders(); ++i) row.push_back(delta_pi_value(cfg, i));
      break;
    case SweepObjective::amplitude:
      for (int i = 0; i < cfg.n_traders(); ++i)
        row.push_back(peak_to_peak(simulate_trader(cfg, i).portfolio));
      break;
    case SweepObjective::dominant_frequency:
      for (int i = 0; i < cfg.n_traders(); ++i) {
        const TimeSeries s = simulate_trader(cfg, i);
        row.push_back(dominant_frequency(s.portfolio, s.t[1] - s.t[0]));
      }
      break;
    case SweepObjective::ordering: {
      const double d1 = delta_pi_value(cfg, 0);
      const double d2 = delta_pi_value(cfg, 1);
      row = {d1, d2, static_cast<double>((d1 > d2) - (d1 < d2))};
      break;
    }
  }
  return row;
}

void run_sweep(const std::string& config_path, const std::string& sweep_path) {
  const std::string text = read_text_file(config_path);
  const SweepSpec sweep = load_sweep(sweep_path);
  const ExperimentConfig base = parse_config(text);
  const std::vector<std::string> value_cols = sweep_value_columns(base, sweep);

  std::vector<std::vector<double>> axes;
  for (const SweepParam& p : sweep.params) axes.push_back(linspace(p.min, p.max, p.steps));
  const int n_inner = axes.size() > 1 ? static_cast<int>(axes[1].size()) : 1;
  const int n_outer = axes.empty() ? 1 : static_cast<int>(axes[0].size());
  const int total = n_outer * n_inner;

  std::vector<std::vector<double>> rows(total);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const int idx = next.fetch_add(1);
      if (idx >= total) return;
      try {
        std::vector<std::pair<std::string, double>> overrides;
        std::vector<double> row;
        if (!axes.empty()) {
          const double v = axes[0][idx / n_inner];
          overrides.emplace_back(sweep.params[0].pointer, v);
          row.push_back(v);
        }
        if (axes.size() > 1) {
          const double v = axes[1][idx % n_inner];
          overrides.emplace_back(sweep.params[1].pointer, v);
          row.push_back(v);
        }
        const ExperimentConfig cfg = apply_overrides(text, overrides);
        for (double v : sweep_objective_row(cfg, sweep)) row.push_back(v);
        rows[idx] = std::move(row);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  const int n_threads = thread_budget(total);
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);

  std::vector<std::string> header;
  for (const SweepParam& p : sweep.params) header.push_back(p.pointer);
  header.insert(header.end(), value_cols.begin(), value_cols.end());
  write_table_csv(sweep.csv_path, header, rows);
}

}  // namespace qmarket
