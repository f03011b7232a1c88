#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "dsic/pilot_opt.hpp"
#include "dsic/signals.hpp"

using namespace dsic;

TEST_CASE("effective rank: extremes, scale invariance, pinned value") {
  Eigen::VectorXd flat(4);
  flat << 2.0, 2.0, 2.0, 2.0;
  CHECK(shannon_rank(flat) == doctest::Approx(4.0).epsilon(1e-12));

  Eigen::VectorXd solo(3);
  solo << 5.0, 0.0, 0.0;
  CHECK(shannon_rank(solo) == doctest::Approx(1.0).epsilon(1e-12));

  Eigen::VectorXd pair(2);
  pair << 3.0, 1.0;
  // Entropy of {.75, .25}: 2^0.811278 = 1.754765...
  CHECK(shannon_rank(pair) == doctest::Approx(1.7548).epsilon(1e-4));
  CHECK(shannon_rank(3.7 * pair) == doctest::Approx(shannon_rank(pair)).epsilon(1e-12));

  // Flattening the spectrum can only raise the effective rank.
  Eigen::VectorXd steep(3), mild(3);
  steep << 10.0, 1.0, 0.1;
  mild << 5.0, 4.0, 2.1;
  CHECK(shannon_rank(mild) > shannon_rank(steep));

  Eigen::VectorXd none;
  CHECK_THROWS_AS(shannon_rank(none), std::invalid_argument);
  Eigen::VectorXd neg(2);
  neg << 1.0, -0.5;
  CHECK_THROWS_AS(shannon_rank(neg), std::invalid_argument);
  Eigen::VectorXd zeros = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(shannon_rank(zeros), std::invalid_argument);
}

TEST_CASE("gram spectrum of simple matrices") {
  const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(5, 5);
  const GramSpectrum s = gram_spectrum(eye);
  CHECK(s.trace == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(s.lambda_min == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.lambda_max == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.cond2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.shannon_rank == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(s.trace_inverse == doctest::Approx(5.0).epsilon(1e-10));
  CHECK(pilot_criterion(s) == doctest::Approx(5.0).epsilon(1e-10));

  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(2, 2);
  diag(0, 0) = 3.0;
  diag(1, 1) = 1.0;
  const GramSpectrum d = gram_spectrum(diag);
  CHECK(pilot_criterion(d) == doctest::Approx(1.7548 * 1.0).epsilon(1e-4));

  CHECK_THROWS_AS(gram_spectrum(Eigen::MatrixXcd::Zero(2, 3)), std::invalid_argument);
  Eigen::MatrixXcd not_herm(2, 2);
  not_herm << cplx(1, 0), cplx(2, 0), cplx(0, 0), cplx(1, 0);
  CHECK_THROWS_AS(gram_spectrum(not_herm), std::invalid_argument);
}

TEST_CASE("spectrum invariants on random regressor grams") {
  BasisConfig cfg;
  cfg.order = 5;
  cfg.memory = 2;
  cfg.kind = BasisKind::GLP;
  for (std::uint64_t t = 0; t < 6; ++t) {
    const ComplexSequence x = gen_gaussian_sequence(240, {71, streams::pilot, t});
    const MeasurementMatrix m = build_measurement_matrix(x, cfg, SourceKind::pilot);
    const GramSpectrum s = gram_spectrum(m);
    const int lw = cfg.weight_count();

    // Eigenvalue sum equals the trace taken directly from the Gram matrix.
    CHECK(s.eigenvalues.sum() == doctest::Approx(s.trace).epsilon(1e-10));
    CHECK(s.lambda_min > 0.0);
    CHECK(s.lambda_max >= s.lambda_min);
    CHECK(s.shannon_rank >= 1.0);
    CHECK(s.shannon_rank <= lw + 1e-9);

    // Trace-of-inverse bracket in terms of trace and condition number.
    const double lw2 = static_cast<double>(lw) * lw;
    CHECK(s.trace_inverse >= lw2 / s.trace * (1.0 - 1e-10));
    CHECK(s.trace_inverse <= lw2 * s.cond2 / s.trace * (1.0 + 1e-10));
    CHECK(s.trace_inverse <= lw / s.lambda_min * (1.0 + 1e-10));

    // Unitary conjugation leaves the whole spectrum alone.
    const Eigen::MatrixXcd gram = m.entries.adjoint() * m.entries;
    Eigen::MatrixXcd noise = Eigen::MatrixXcd::Random(lw, lw);
    const Eigen::MatrixXcd u =
        Eigen::HouseholderQR<Eigen::MatrixXcd>(noise).householderQ();
    const GramSpectrum s2 = gram_spectrum(u.adjoint() * gram * u);
    CHECK(s2.lambda_min == doctest::Approx(s.lambda_min).epsilon(1e-8));
    CHECK(s2.shannon_rank == doctest::Approx(s.shannon_rank).epsilon(1e-8));
    CHECK(pilot_criterion(s2) == doctest::Approx(pilot_criterion(s)).epsilon(1e-8));
  }
}

TEST_CASE("singular grams score zero") {
  // Exact zero eigenvalue: the sentinels must go infinite.
  Eigen::MatrixXcd exact = Eigen::MatrixXcd::Zero(3, 3);
  exact(0, 0) = 2.0;
  exact(1, 1) = 1.0;
  const GramSpectrum s = gram_spectrum(exact);
  CHECK(s.lambda_min == 0.0);
  CHECK(pilot_criterion(s) == 0.0);
  CHECK(std::isinf(s.cond2));
  CHECK(std::isinf(s.trace_inverse));

  // Duplicated column: numerically singular, criterion collapses to
  // roundoff scale even when the smallest eigenvalue is not an exact zero.
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Random(20, 3);
  a.col(2) = a.col(1);
  const GramSpectrum dup = gram_spectrum(Eigen::MatrixXcd(a.adjoint() * a));
  CHECK(dup.lambda_min < 1e-10 * dup.lambda_max);
  CHECK(pilot_criterion(dup) < 1e-9 * dup.lambda_max);
}

TEST_CASE("ensemble selection is the deterministic argmax") {
  BasisConfig cfg;
  cfg.order = 7;
  cfg.memory = 3;
  cfg.kind = BasisKind::GLP;
  const StreamSeed seed{81, streams::ensemble, 0};

  std::vector<EnsembleRow> rows;
  const PilotCandidate best =
      select_pilot(40, 256, PilotDistribution::gaussian, cfg, seed, 0, &rows);
  REQUIRE(rows.size() == 40);

  // Recompute the winner from the emitted rows with the documented ordering.
  int win = 0;
  for (int i = 1; i < 40; ++i) {
    const EnsembleRow& a = rows[static_cast<std::size_t>(i)];
    const EnsembleRow& b = rows[static_cast<std::size_t>(win)];
    const bool better = a.criterion > b.criterion ||
                        (a.criterion == b.criterion && a.papr_db < b.papr_db) ||
                        (a.criterion == b.criterion && a.papr_db == b.papr_db &&
                         a.index < b.index);
    if (better) win = i;
  }
  CHECK(best.ensemble_index == win);
  CHECK(best.criterion_value ==
        doctest::Approx(rows[static_cast<std::size_t>(win)].criterion).epsilon(1e-12));

  // The winning sequence is reproducible from its index alone.
  const ComplexSequence re =
      gen_gaussian_sequence(256, seed.with_trial(static_cast<std::uint64_t>(win)));
  REQUIRE(re.size() == best.sequence.size());
  for (std::size_t n = 0; n < re.size(); ++n) CHECK(re[n] == best.sequence[n]);

  // Single-candidate ensembles return that candidate.
  const PilotCandidate only =
      select_pilot(1, 256, PilotDistribution::gaussian, cfg, seed);
  CHECK(only.ensemble_index == 0);

  CHECK_THROWS_AS(select_pilot(0, 256, PilotDistribution::gaussian, cfg, seed),
                  std::invalid_argument);
  CHECK_THROWS_AS(select_pilot(4, 8, PilotDistribution::gaussian, cfg, seed),
                  std::invalid_argument);
}

TEST_CASE("selected pilot ranks well on the downstream noise amplification") {
  // The criterion is a proxy; verify the winner lands in the good half of
  // the ensemble for the quantity the bounds actually care about.
  BasisConfig cfg;
  cfg.order = 5;
  cfg.memory = 3;
  cfg.kind = BasisKind::GLP;
  const StreamSeed seed{82, streams::ensemble, 0};
  const int ens = 60;

  std::vector<EnsembleRow> rows;
  const PilotCandidate best =
      select_pilot(ens, 320, PilotDistribution::gaussian, cfg, seed, 0, &rows);

  std::vector<double> tr_inv(static_cast<std::size_t>(ens));
  for (int i = 0; i < ens; ++i) {
    const ComplexSequence x =
        gen_gaussian_sequence(320, seed.with_trial(static_cast<std::uint64_t>(i)));
    tr_inv[static_cast<std::size_t>(i)] =
        gram_spectrum(build_measurement_matrix(x, cfg, SourceKind::pilot))
            .trace_inverse;
  }
  std::vector<double> sorted = tr_inv;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[sorted.size() / 2];
  CHECK(tr_inv[static_cast<std::size_t>(best.ensemble_index)] <= median);
}

TEST_CASE("chisq and multitone ensembles run end to end") {
  BasisConfig cfg;
  cfg.order = 5;
  cfg.memory = 2;
  cfg.kind = BasisKind::GLP;
  const StreamSeed seed{83, streams::ensemble, 0};

  const PilotCandidate heavy =
      select_pilot(8, 200, PilotDistribution::chisq, cfg, seed);
  CHECK(heavy.criterion_value > 0.0);

  // Multitone candidates are all identical (deterministic construction), so
  // the tie-break must pick index 0.
  const PilotCandidate tones =
      select_pilot(8, 200, PilotDistribution::multitone, cfg, seed, 40);
  CHECK(tones.ensemble_index == 0);
}

TEST_CASE("spectral bounds bracket the exact quantities") {
  BasisConfig cfg;
  cfg.order = 5;
  cfg.memory = 1;
  cfg.kind = BasisKind::GLP;
  const ComplexSequence xp = gen_gaussian_sequence(200, {84, streams::pilot, 0});
  const ComplexSequence xd = gen_gaussian_sequence(350, {84, streams::data, 0});
  const MeasurementMatrix mp = build_measurement_matrix(xp, cfg, SourceKind::pilot);
  const MeasurementMatrix md = build_measurement_matrix(xd, cfg, SourceKind::data);
  const GramSpectrum sp = gram_spectrum(mp);
  const GramSpectrum sd = gram_spectrum(md);

  const Eigen::MatrixXcd gp = mp.entries.adjoint() * mp.entries;
  const Eigen::MatrixXcd gd = md.entries.adjoint() * md.entries;
  const double tr_exact = Eigen::LDLT<Eigen::MatrixXcd>(gp).solve(gd).trace().real();

  const auto [lo, hi] = nire_bounds(sp, sd);
  CHECK(lo <= tr_exact * (1.0 + 1e-10));
  CHECK(tr_exact <= hi * (1.0 + 1e-10));
  CHECK(lo > 0.0);

  // bire bound dominates a directly computed projection worst case.
  const Eigen::VectorXcd trunc =
      0.01 * Eigen::VectorXcd::Random(mp.rows());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(mp.entries);
  const double bire_exact = (md.entries * qr.solve(trunc)).squaredNorm();
  CHECK(bire_exact <= bire_bound(sp, sd, trunc.squaredNorm()) * (1.0 + 1e-10));
}
