#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qmarket/mode_system.hpp"
#include "qmarket/reservoir_info.hpp"

using namespace qmarket;

namespace {

ReservoirSpecII ref_spec() {
  ReservoirSpecII s;
  s.omega = 2.0;
  s.Omega = 3.0;
  s.lambda_inf = 0.5;
  s.n_I = 5.0;
  return s;
}

const MarketInit kInit{30.0, 15.0, 0.0};

}  // namespace

TEST_CASE("relaxation rate and input validation") {
  ReservoirSpecII s = ref_spec();
  CHECK(gamma_prime(s) == doctest::Approx(M_PI / 6.0).epsilon(1e-15));
  s.Omega = 0.0;
  CHECK_THROWS_AS(gamma_prime(s), std::invalid_argument);
  s = ref_spec();
  s.lambda_inf = -0.1;
  CHECK_THROWS_AS(gamma_prime(s), std::invalid_argument);
  s = ref_spec();
  s.lambda_inf = 0.0;
  CHECK_THROWS_AS(eta1_model2(s, 0.3, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eta1_sq_damped(s, 0.3, 1.0), std::invalid_argument);
}

TEST_CASE("response kernel limits") {
  const ReservoirSpecII s = ref_spec();
  const double gp = gamma_prime(s);

  CHECK(std::abs(eta1_model2(s, 0.7, 0.0)) < 1e-15);
  CHECK(eta1_sq_damped(s, 0.7, 0.0) == doctest::Approx(0.0));

  // Damped form equals |eta1|^2 e^{-2 g' t} where the growing form is safe.
  for (double k : {0.1, 0.6667, 2.0}) {
    for (double t : {0.5, 3.0, 8.0}) {
      const double direct = std::norm(eta1_model2(s, k, t)) * std::exp(-2.0 * gp * t);
      CHECK(eta1_sq_damped(s, k, t) == doctest::Approx(direct).epsilon(1e-11));
    }
  }

  // Large t saturates at the Lorentzian envelope.
  const double k = 1.2;
  const double theta = s.omega - s.Omega * k;
  const double envelope = 1.0 / (gp * gp + theta * theta);
  CHECK(eta1_sq_damped(s, k, 60.0 / gp) == doctest::Approx(envelope).epsilon(1e-12));
}

TEST_CASE("normalization identity of the coupling kernel") {
  ReservoirSpecII s = ref_spec();
  CHECK(lorentzian_identity(s) == doctest::Approx(1.0).epsilon(1e-8));
  s.omega = 0.3;
  s.Omega = 1.0;
  s.lambda_inf = 0.1;
  CHECK(lorentzian_identity(s) == doctest::Approx(1.0).epsilon(1e-8));
  s.omega = 10.0;
  s.Omega = 0.5;
  s.lambda_inf = 2.0;
  CHECK(lorentzian_identity(s) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("closed-form occupations: initial data, decoupling, symmetry decay") {
  const ReservoirSpecII s = ref_spec();
  auto [s0, k0] = occupations_model2(s, kInit, 0.0);
  CHECK(s0 == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(k0 == doctest::Approx(15.0).epsilon(1e-12));

  ReservoirSpecII free = ref_spec();
  free.lambda_inf = 0.0;
  auto [sf, kf] = occupations_model2(free, kInit, 12.0);
  CHECK(sf == 30.0);
  CHECK(kf == 15.0);

  // The share/cash imbalance decays as e^{-g' t} independent of the bath.
  const double gp = gamma_prime(s);
  for (double t : {0.5, 2.0, 6.0}) {
    auto [ns, nk] = occupations_model2(s, kInit, t);
    CHECK(ns - nk == doctest::Approx(15.0 * std::exp(-gp * t)).epsilon(1e-9));
  }
}

TEST_CASE("long-time occupations reach the mixed equilibrium") {
  ReservoirSpecII s = ref_spec();
  s.window_halfwidth = 4000.0;  // push the window truncation below 1e-4
  const double gp = gamma_prime(s);
  const double t_inf = 20.0 / gp;
  auto [ns, nk] = occupations_model2(s, kInit, t_inf);
  // (S + K)/4 + n_I/2 for each of shares and cash.
  CHECK(ns == doctest::Approx(13.75).epsilon(1e-3));
  CHECK(nk == doctest::Approx(13.75).epsilon(1e-3));
  const double pi0 = kInit.shares + kInit.cash;
  CHECK((ns + nk) - pi0 == doctest::Approx(delta_pi_model2(pi0, s.n_I)).epsilon(5e-4));
}

TEST_CASE("portfolio shift formula") {
  CHECK(delta_pi_model2(45.0, 5.0) == doctest::Approx(-17.5));
  CHECK(delta_pi_model2(10.0, 5.0) == doctest::Approx(0.0));
  CHECK(delta_pi_model2(0.0, 3.0) == doctest::Approx(3.0));
}

TEST_CASE("series bookkeeping keeps the ledger balanced") {
  const ReservoirSpecII s = ref_spec();
  const std::vector<double> grid{0.0, 1.0, 4.0, 9.0};
  const TimeSeries out = series_model2(s, kInit, grid);
  REQUIRE(out.t.size() == grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(out.portfolio[j] ==
          doctest::Approx(out.n_shares[j] + out.n_cash[j]).epsilon(1e-12));
    CHECK(out.n_shares[j] + out.n_cash[j] + out.n_loi[j] ==
          doctest::Approx(45.0).epsilon(1e-12));
  }
  CHECK(out.n_loi[0] == doctest::Approx(0.0));
}

TEST_CASE("discretized bath against the dense eigensolver") {
  // Same finite system through two algebra paths: the symmetric/antisymmetric
  // rotation plus arrowhead factorization, and a plain dense eigensolve.
  const ReservoirSpecII s = ref_spec();
  BathWindow win{(s.omega - 20.0) / s.Omega, (s.omega + 20.0) / s.Omega, 301};
  DiscretizedBathII bath(s, kInit, win);
  CHECK(bath.n_modes() == 301);

  SpectralPropagator dense(bath.dense_matrix());
  const Eigen::VectorXd n0 = bath.initial_occupations();
  CHECK(n0(0) == 30.0);
  CHECK(n0(1) == 15.0);
  CHECK(n0(2) == 5.0);

  for (double t : {0.0, 1.5, 4.0}) {
    auto [ns, nk] = bath.occupations(t);
    CHECK(ns == doctest::Approx(dense.occupation(0, n0, t)).epsilon(1e-9));
    CHECK(nk == doctest::Approx(dense.occupation(1, n0, t)).epsilon(1e-9));
  }
}

TEST_CASE("discretized bath approaches the closed form") {
  const ReservoirSpecII s = ref_spec();
  BathWindow win{(s.omega - 40.0) / s.Omega, (s.omega + 40.0) / s.Omega, 1001};
  DiscretizedBathII bath(s, kInit, win);
  const double t = 4.0;
  auto [ns_o, nk_o] = bath.occupations(t);
  auto [ns_c, nk_c] = occupations_model2(s, kInit, t);
  CHECK(std::abs(ns_o - ns_c) < 0.05);
  CHECK(std::abs(nk_o - nk_c) < 0.05);
  CHECK(bath.leakage_fraction(t) < 1e-3);
  CHECK(bath.portfolio(t) == doctest::Approx(ns_o + nk_o).epsilon(1e-12));
}
