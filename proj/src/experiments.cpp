#include "dsic/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "dsic/pilot_opt.hpp"
#include "dsic/signals.hpp"

namespace dsic {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t mix_in(std::uint64_t h, std::uint64_t v) { return mix64(h ^ mix64(v)); }

}  // namespace

std::string to_string(PilotKind k) {
  switch (k) {
    case PilotKind::multitone: return "multitone";
    case PilotKind::random_gaussian: return "random_gaussian";
    case PilotKind::optimized_gaussian: return "optimized_gaussian";
    case PilotKind::optimized_chisq: return "optimized_chisq";
    case PilotKind::global_ls: return "global_ls";
  }
  return "?";
}

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::PH: return "ph";
    case BasisKind::GLP: return "glp";
    case BasisKind::PH_IQ: return "ph_iq";
  }
  return "?";
}

const char* artifact_version() { return "0.1.0"; }

double percentile(std::vector<double> values, double q) {
  values.erase(std::remove_if(values.begin(), values.end(),
                              [](double v) { return std::isnan(v); }),
               values.end());
  if (values.empty()) return kNan;
  if (q < 0.0) q = 0.0;
  if (q > 1.0) q = 1.0;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

namespace {

// ---------------------------------------------------------------------------
// Trial engine
// ---------------------------------------------------------------------------

struct PointId {
  int order = 1;
  int pilot_len = 0;
  int antennas = 1;
  double irr_db = kInf;
  PilotKind kind = PilotKind::optimized_gaussian;
  BasisKind canceller = BasisKind::GLP;
};

struct TrialOutput {
  RsiReport report;
  double criterion = kNan;
  bool failed = false;
};

// Everything shared by the trials of one sweep point: the fitted PA truth,
// its Laguerre-coordinate weights, and (for fixed-pilot kinds) the selected
// pilot with its prefactorized system.
struct PointSetup {
  const ExperimentConfig* cfg = nullptr;
  PointId id;
  PolyPaFit truth;
  Eigen::VectorXcd glp_pa_coeffs;  // PA polynomial in Laguerre coordinates
  std::vector<ComplexSequence> fixed_pilots;
  std::optional<MeasurementMatrix> psi_p_fixed;
  std::shared_ptr<LsSolver> fixed_solver;
  bool fixed_deficient = false;
  double fixed_criterion = kNan;
};

double per_antenna_drive_dbm(const ExperimentConfig& cfg, int antennas) {
  return cfg.budget.tx_power_dbm - cfg.pa.linear_gain_db -
         10.0 * std::log10(static_cast<double>(antennas));
}

// PA polynomial re-expressed in Laguerre coordinates, padded to the larger
// of (model order, truth order) so model slices are well defined.
Eigen::VectorXcd pa_in_glp_coords(const PolyPaFit& truth, int model_order) {
  const int p_max = std::max(model_order, truth.order);
  BasisConfig flat;
  flat.order = p_max;
  flat.memory = 0;
  flat.kind = BasisKind::GLP;
  const Eigen::MatrixXcd l = glp_transform(flat);
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(l.rows());
  for (std::size_t k = 0; k < truth.coeffs.size(); ++k)
    c(static_cast<Eigen::Index>(k)) = truth.coeffs[k];
  return l.triangularView<Eigen::Upper>().solve(c);
}

std::uint64_t trial_run_id(const ExperimentConfig& cfg, const PointId& id, int trial) {
  std::uint64_t h = mix64(cfg.master_seed);
  h = mix_in(h, static_cast<std::uint64_t>(id.order));
  h = mix_in(h, static_cast<std::uint64_t>(id.pilot_len));
  h = mix_in(h, static_cast<std::uint64_t>(id.antennas));
  h = mix_in(h, static_cast<std::uint64_t>(id.kind));
  h = mix_in(h, static_cast<std::uint64_t>(id.canceller));
  std::uint64_t irr_bits;
  static_assert(sizeof(double) == sizeof(std::uint64_t));
  std::memcpy(&irr_bits, &id.irr_db, sizeof(irr_bits));
  h = mix_in(h, irr_bits);
  return mix_in(h, static_cast<std::uint64_t>(trial));
}

ComplexSequence noise_block(std::size_t len, double sigma, StreamSeed seed) {
  CounterRng rng(seed);
  ComplexSequence out;
  out.samples.resize(len);
  for (std::size_t n = 0; n < len; ++n)
    out.samples[n] = sigma * rng.gaussian(n);
  return out;
}

void accumulate(ComplexSequence& acc, const ComplexSequence& inc) {
  if (acc.empty()) {
    acc = inc;
    return;
  }
  for (std::size_t n = 0; n < acc.size(); ++n) acc[n] += inc[n];
}

Eigen::Map<const Eigen::VectorXcd> as_vector(const ComplexSequence& s) {
  return {s.samples.data(), static_cast<Eigen::Index>(s.size())};
}

TrialOutput run_trial(const PointSetup& pt, int trial) {
  const ExperimentConfig& cfg = *pt.cfg;
  const int m_ant = pt.id.antennas;
  const std::uint64_t ms = cfg.master_seed;
  const std::uint64_t t = static_cast<std::uint64_t>(trial);
  const std::size_t lp = static_cast<std::size_t>(pt.id.pilot_len);
  const std::size_t ld = static_cast<std::size_t>(cfg.data_len());
  const bool global = pt.id.kind == PilotKind::global_ls;

  LinkBudget ant_budget = cfg.budget;
  ant_budget.tx_power_dbm -= 10.0 * std::log10(static_cast<double>(m_ant));

  std::vector<ComplexSequence> xd(static_cast<std::size_t>(m_ant));
  std::vector<ChannelModel> ch(static_cast<std::size_t>(m_ant));
  for (int a = 0; a < m_ant; ++a) {
    const std::uint64_t ao = 32u * static_cast<std::uint64_t>(a);
    xd[static_cast<std::size_t>(a)] =
        gen_gaussian_sequence(ld, {ms, streams::data + ao, t});
    ch[static_cast<std::size_t>(a)] =
        gen_channel(cfg.memory, cfg.delay_spread_taps, cfg.isolation_db,
                    cfg.asic_db, {ms, streams::channel + ao, t});
  }
  std::vector<ComplexSequence> xp;
  if (global) {
    xp = xd;
  } else if (pt.id.kind == PilotKind::random_gaussian) {
    xp.resize(static_cast<std::size_t>(m_ant));
    for (int a = 0; a < m_ant; ++a)
      xp[static_cast<std::size_t>(a)] = gen_gaussian_sequence(
          lp, {ms, streams::pilot + 32u * static_cast<std::uint64_t>(a), t});
  } else {
    xp = pt.fixed_pilots;
  }

  const auto through_tx = [&](const ComplexSequence& x) {
    ComplexSequence v =
        std::isinf(pt.id.irr_db) ? x : apply_iq_imbalance(x, pt.id.irr_db);
    for (cplx& s : v.samples) s = poly_pa_apply(pt.truth, s);
    v.refresh_power();
    return v;
  };

  // Received block: sum over antennas of channel-filtered PA output, plus
  // channel-filtered transmitter noise, plus the receiver floor.
  const double tx_sigma = std::sqrt(ant_budget.tx_noise_mw());
  const double rx_sigma = std::sqrt(cfg.budget.rx_noise_mw());
  const auto receive = [&](const std::vector<ComplexSequence>& x,
                           std::uint64_t tx_stream, std::uint64_t rx_stream,
                           ComplexSequence& clean, ComplexSequence& noisy) {
    clean = ComplexSequence{};
    for (int a = 0; a < m_ant; ++a)
      accumulate(clean, apply_channel(through_tx(x[static_cast<std::size_t>(a)]),
                                      ch[static_cast<std::size_t>(a)]));
    noisy = clean;
    if (tx_sigma > 0.0)
      for (int a = 0; a < m_ant; ++a) {
        const std::uint64_t ao = 32u * static_cast<std::uint64_t>(a);
        accumulate(noisy,
                   apply_channel(noise_block(x[static_cast<std::size_t>(a)].size(),
                                             tx_sigma, {ms, tx_stream + ao, t}),
                                 ch[static_cast<std::size_t>(a)]));
      }
    if (rx_sigma > 0.0)
      accumulate(noisy, noise_block(noisy.size(), rx_sigma, {ms, rx_stream, t}));
    clean.refresh_power();
    noisy.refresh_power();
  };

  ComplexSequence clean_d, r_d;
  receive(xd, streams::tx_noise_data, streams::rx_noise_data, clean_d, r_d);
  ComplexSequence clean_p, r_p;
  if (global) {
    clean_p = clean_d;
    r_p = r_d;
  } else {
    receive(xp, streams::tx_noise_pilot, streams::rx_noise_pilot, clean_p, r_p);
  }

  BasisConfig bc;
  bc.order = pt.id.order;
  bc.memory = cfg.memory;
  bc.kind = pt.id.canceller;
  const MeasurementMatrix psi_d = build_mimo_system(xd, bc, SourceKind::data);
  MeasurementMatrix psi_p_local;
  const MeasurementMatrix* psi_p = nullptr;
  if (global) {
    psi_p = &psi_d;
  } else if (pt.psi_p_fixed) {
    psi_p = &*pt.psi_p_fixed;
  } else {
    psi_p_local = build_mimo_system(xp, bc, SourceKind::pilot);
    psi_p = &psi_p_local;
  }

  TrialOutput out;
  out.criterion = std::isnan(pt.fixed_criterion)
                      ? pilot_criterion(gram_spectrum(*psi_p))
                      : pt.fixed_criterion;

  double noise_mw = cfg.budget.rx_noise_mw();
  for (int a = 0; a < m_ant; ++a)
    noise_mw += ch[static_cast<std::size_t>(a)].energy() * ant_budget.tx_noise_mw();

  const std::uint64_t run_id = trial_run_id(cfg, pt.id, trial);
  const double rx_power = r_d.mean_power();

  const auto fail_out = [&]() {
    out.failed = true;
    out.report.rsi_dbm = mw_to_dbm(rx_power);
    out.report.noise_dbm = mw_to_dbm(noise_mw);
    out.report.cancellation_db = 0.0;
    out.report.truncation_dbm = kNan;
    out.report.bire_dbm = kNan;
    out.report.nire_dbm = kNan;
    out.report.analytic_expected_dbm = kNan;
    out.report.bound_dbm = kNan;
    return out;
  };

  Eigen::VectorXcd w;
  if (pt.fixed_deficient) return fail_out();
  if (pt.fixed_solver) {
    w = pt.fixed_solver->solve(as_vector(r_p));
  } else {
    try {
      LsSolver solver(*psi_p);
      w = solver.solve(as_vector(r_p));
    } catch (const RankDeficientError&) {
      return fail_out();
    }
  }

  WeightVector weights{w, psi_d.basis};
  ComplexSequence residual = cancel(psi_d, weights, r_d);

  // The closed-form decomposition is defined for the Laguerre model of the
  // direct chain; the IQ-imbalance and multi-antenna studies report the
  // measured residual only.
  const bool decomposable = pt.id.canceller == BasisKind::GLP && m_ant == 1 &&
                            std::isinf(pt.id.irr_db);
  if (!decomposable) {
    out.report.rsi_dbm = mw_to_dbm(residual.mean_power());
    out.report.noise_dbm = mw_to_dbm(noise_mw);
    out.report.cancellation_db = mw_to_dbm(rx_power) - out.report.rsi_dbm;
    out.report.truncation_dbm = kNan;
    out.report.bire_dbm = kNan;
    out.report.nire_dbm = kNan;
    out.report.analytic_expected_dbm = kNan;
    out.report.bound_dbm = kNan;
    return out;
  }

  // Truth weights of the model slice: Laguerre PA coefficients spread over
  // the channel taps, matching the column order of the regressor matrices.
  const int half = (pt.id.order + 1) / 2;
  Eigen::VectorXcd w_true(psi_d.cols());
  for (int l = 0; l <= cfg.memory; ++l)
    for (int k = 0; k < half; ++k)
      w_true(static_cast<Eigen::Index>(l) * half + k) =
          pt.glp_pa_coeffs(k) * ch[0].taps[static_cast<std::size_t>(l)];

  TruthBundle bundle;
  bundle.psi_pilot = psi_p->entries;
  bundle.psi_data = psi_d.entries;
  bundle.trunc_pilot = as_vector(clean_p) - psi_p->entries * w_true;
  bundle.trunc_data = as_vector(clean_d) - psi_d.entries * w_true;
  bundle.noise_power_mw = noise_mw;
  bundle.rx_power_mw = rx_power;
  bundle.run_id = run_id;

  out.report = decompose_rsi(bundle, CancelResult{weights, residual, run_id});
  return out;
}

// ---------------------------------------------------------------------------
// Point setup and aggregation
// ---------------------------------------------------------------------------

PilotDistribution kind_distribution(PilotKind kind) {
  switch (kind) {
    case PilotKind::multitone: return PilotDistribution::multitone;
    case PilotKind::optimized_chisq: return PilotDistribution::chisq;
    default: return PilotDistribution::gaussian;
  }
}

bool is_fixed_pilot(PilotKind kind) {
  return kind == PilotKind::multitone || kind == PilotKind::optimized_gaussian ||
         kind == PilotKind::optimized_chisq;
}

PointSetup make_point(const ExperimentConfig& cfg, const PointId& id) {
  PointSetup pt;
  pt.cfg = &cfg;
  pt.id = id;
  pt.truth = fit_polynomial_pa(cfg.pa, per_antenna_drive_dbm(cfg, id.antennas),
                               cfg.truth_order, cfg.pa_fit_samples,
                               {cfg.master_seed, streams::pa_fit,
                                static_cast<std::uint64_t>(id.antennas)});
  pt.glp_pa_coeffs = pa_in_glp_coords(pt.truth, id.order);

  if (!is_fixed_pilot(id.kind)) return pt;

  BasisConfig est_bc;
  est_bc.order = id.order;
  est_bc.memory = cfg.memory;
  est_bc.kind = id.canceller;
  // The image-aware canceller reuses the pilot chosen for the plain one, so
  // the two legs of the imbalance study compare at an equal pilot budget.
  BasisConfig sel_bc = est_bc;
  if (sel_bc.kind == BasisKind::PH_IQ) sel_bc.kind = BasisKind::GLP;

  pt.fixed_pilots.resize(static_cast<std::size_t>(id.antennas));
  const std::size_t lp = static_cast<std::size_t>(id.pilot_len);
  if (id.kind == PilotKind::multitone) {
    const std::size_t tones =
        cfg.multitone_tones ? cfg.multitone_tones : default_tone_count(lp);
    for (int a = 0; a < id.antennas; ++a)
      pt.fixed_pilots[static_cast<std::size_t>(a)] =
          gen_multitone_pilot(lp, tones, {cfg.master_seed, streams::ensemble, 0});
  } else {
    // Each antenna picks the best of its own candidate ensemble.
    for (int a = 0; a < id.antennas; ++a) {
      const PilotCandidate cand = select_pilot(
          cfg.ensemble_size, lp, kind_distribution(id.kind), sel_bc,
          {cfg.master_seed, streams::ensemble + 32u * static_cast<std::uint64_t>(a), 0},
          cfg.multitone_tones);
      pt.fixed_pilots[static_cast<std::size_t>(a)] = cand.sequence;
    }
  }

  try {
    pt.psi_p_fixed = build_mimo_system(pt.fixed_pilots, est_bc, SourceKind::pilot);
    const MeasurementMatrix& scored =
        sel_bc.kind == est_bc.kind
            ? *pt.psi_p_fixed
            : build_mimo_system(pt.fixed_pilots, sel_bc, SourceKind::pilot);
    pt.fixed_criterion = pilot_criterion(gram_spectrum(scored));
    pt.fixed_solver = std::make_shared<LsSolver>(*pt.psi_p_fixed);
  } catch (const RankDeficientError&) {
    pt.fixed_deficient = true;
  }
  return pt;
}

void run_point(const ExperimentConfig& cfg, const PointId& id,
               ExperimentResult& result) {
  const PointSetup pt = make_point(cfg, id);
  std::vector<TrialOutput> outs(static_cast<std::size_t>(cfg.trials));
#pragma omp parallel for schedule(dynamic)
  for (int trial = 0; trial < cfg.trials; ++trial)
    outs[static_cast<std::size_t>(trial)] = run_trial(pt, trial);

  std::vector<double> rsi, crit, rsin, trunc, bire, nire, analytic, bound, canc;
  int failed = 0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const TrialOutput& o = outs[static_cast<std::size_t>(trial)];
    failed += o.failed ? 1 : 0;
    rsi.push_back(o.report.rsi_dbm);
    crit.push_back(o.criterion);
    rsin.push_back(o.report.rsi_dbm - o.report.noise_dbm);
    trunc.push_back(o.report.truncation_dbm);
    bire.push_back(o.report.bire_dbm);
    nire.push_back(o.report.nire_dbm);
    analytic.push_back(o.report.analytic_expected_dbm);
    bound.push_back(o.report.bound_dbm);
    canc.push_back(o.report.cancellation_db);

    TrialRecord rec;
    rec.order = id.order;
    rec.pilot_len = id.pilot_len;
    rec.antennas = id.antennas;
    rec.irr_db = id.irr_db;
    rec.pilot_kind = id.kind;
    rec.canceller = id.canceller;
    rec.trial = trial;
    rec.failed = o.failed;
    rec.criterion = o.criterion;
    rec.report = o.report;
    result.trial_records.push_back(rec);
  }

  SweepRow row;
  row.order = id.order;
  row.pilot_len = id.pilot_len;
  row.antennas = id.antennas;
  row.irr_db = id.irr_db;
  row.pilot_kind = id.kind;
  row.canceller = id.canceller;
  row.trials = cfg.trials;
  row.failed_trials = failed;
  row.criterion_median = percentile(crit, 0.5);
  row.rsi_dbm_median = percentile(rsi, 0.5);
  row.rsi_dbm_iqr = percentile(rsi, 0.75) - percentile(rsi, 0.25);
  row.rsi_minus_noise_db_median = percentile(rsin, 0.5);
  row.truncation_dbm_median = percentile(trunc, 0.5);
  row.bire_dbm_median = percentile(bire, 0.5);
  row.nire_dbm_median = percentile(nire, 0.5);
  row.noise_dbm = outs.empty() ? kNan : outs.front().report.noise_dbm;
  row.analytic_dbm_median = percentile(analytic, 0.5);
  row.bound_dbm_median = percentile(bound, 0.5);
  row.cancellation_db_median = percentile(canc, 0.5);
  result.rows.push_back(row);
}

PointId base_point(const ExperimentConfig& cfg) {
  PointId id;
  id.order = cfg.fixed_order;
  id.pilot_len = cfg.pilot_len();
  id.antennas = 1;
  id.irr_db = kInf;
  id.canceller = BasisKind::GLP;
  return id;
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

ExperimentResult run_order_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  for (int order : cfg.orders)
    for (PilotKind kind :
         {PilotKind::multitone, PilotKind::random_gaussian,
          PilotKind::optimized_gaussian, PilotKind::global_ls}) {
      PointId id = base_point(cfg);
      id.order = order;
      id.kind = kind;
      run_point(cfg, id, result);
    }
  return result;
}

ExperimentResult run_pilot_length_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  for (int symbols : cfg.pilot_symbols)
    for (PilotKind kind :
         {PilotKind::optimized_gaussian, PilotKind::optimized_chisq}) {
      PointId id = base_point(cfg);
      id.pilot_len = symbols * cfg.symbol_len;
      id.kind = kind;
      run_point(cfg, id, result);
    }
  return result;
}

ExperimentResult run_pilot_compare(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  for (PilotKind kind :
       {PilotKind::multitone, PilotKind::random_gaussian,
        PilotKind::optimized_gaussian, PilotKind::optimized_chisq,
        PilotKind::global_ls}) {
    PointId id = base_point(cfg);
    id.kind = kind;
    run_point(cfg, id, result);
  }
  return result;
}

ExperimentResult run_mimo_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  for (int antennas : cfg.antennas)
    for (int order : cfg.orders) {
      PointId id = base_point(cfg);
      id.antennas = antennas;
      id.order = order;
      id.kind = PilotKind::optimized_gaussian;
      run_point(cfg, id, result);
    }
  return result;
}

ExperimentResult run_iq_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  for (double irr : cfg.irr_list_db)
    for (BasisKind canceller : {BasisKind::GLP, BasisKind::PH_IQ}) {
      PointId id = base_point(cfg);
      id.irr_db = irr;
      id.kind = PilotKind::optimized_gaussian;
      id.canceller = canceller;
      run_point(cfg, id, result);
    }
  return result;
}

ExperimentResult run_bound_check(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult result;
  result.config = cfg;
  result.bound_rows.resize(static_cast<std::size_t>(cfg.instances));

#pragma omp parallel for schedule(dynamic)
  for (int idx = 0; idx < cfg.instances; ++idx) {
    const std::uint64_t ms = cfg.master_seed;
    const std::uint64_t u = static_cast<std::uint64_t>(idx);
    CounterRng dim_rng({ms, streams::misc, u});

    // Random small instance: model order below truth order, modest memory,
    // overdetermined but not luxuriously so.
    const int order_model = 3 + 2 * static_cast<int>(dim_rng.uniform(0) * 2.9999);
    const int order_truth = order_model + 2 + 2 * static_cast<int>(dim_rng.uniform(1) * 2.9999);
    const int memory = static_cast<int>(dim_rng.uniform(2) * 4.9999);
    const int lw = (order_model + 1) / 2 * (memory + 1);
    const int lp = memory + 2 * lw +
                   static_cast<int>(dim_rng.uniform(3) * 3.0 * lw) + 1;
    const int ldd = memory + 2 * lw +
                    static_cast<int>(dim_rng.uniform(4) * 3.0 * lw) + 1;
    const double noise_mw = 1e-4 * (0.1 + 0.9 * dim_rng.uniform(5));

    // Truth polynomial: unit linear term plus decaying random odd orders.
    PolyPaFit truth;
    truth.order = order_truth;
    truth.coeffs.resize(static_cast<std::size_t>(order_truth + 1) / 2);
    truth.coeffs[0] = cplx(1.0, 0.0);
    for (std::size_t k = 1; k < truth.coeffs.size(); ++k)
      truth.coeffs[k] = 0.4 * std::pow(0.45, static_cast<double>(k)) *
                        dim_rng.gaussian(16 + k);

    const ComplexSequence x_p = gen_gaussian_sequence(
        static_cast<std::size_t>(lp), {ms, streams::pilot, u});
    const ComplexSequence x_d = gen_gaussian_sequence(
        static_cast<std::size_t>(ldd), {ms, streams::data, u});
    const ChannelModel ch =
        gen_channel(memory, 2.0, 0.0, 0.0, {ms, streams::channel, u});

    const auto through = [&](const ComplexSequence& x) {
      ComplexSequence s = x;
      for (cplx& v : s.samples) v = poly_pa_apply(truth, v);
      return apply_channel(s, ch);
    };
    const ComplexSequence clean_p = through(x_p);
    const ComplexSequence clean_d = through(x_d);
    ComplexSequence r_p = clean_p;
    accumulate(r_p, noise_block(clean_p.size(), std::sqrt(noise_mw),
                                {ms, streams::rx_noise_pilot, u}));

    BasisConfig glp_cfg;
    glp_cfg.order = order_model;
    glp_cfg.memory = memory;
    glp_cfg.kind = BasisKind::GLP;
    BasisConfig ph_cfg = glp_cfg;
    ph_cfg.kind = BasisKind::PH;

    const MeasurementMatrix psi_p = build_measurement_matrix(x_p, glp_cfg, SourceKind::pilot);
    const MeasurementMatrix psi_d = build_measurement_matrix(x_d, glp_cfg, SourceKind::data);
    const MeasurementMatrix phi_p = build_measurement_matrix(x_p, ph_cfg, SourceKind::pilot);
    const MeasurementMatrix phi_d = build_measurement_matrix(x_d, ph_cfg, SourceKind::data);

    // Truth in Laguerre coordinates, spread across channel taps.
    Eigen::VectorXcd glp_pa = pa_in_glp_coords(truth, order_model);
    const int half = (order_model + 1) / 2;
    Eigen::VectorXcd w_true(psi_p.cols());
    for (int l = 0; l <= memory; ++l)
      for (int k = 0; k < half; ++k)
        w_true(static_cast<Eigen::Index>(l) * half + k) =
            glp_pa(k) * ch.taps[static_cast<std::size_t>(l)];

    const Eigen::VectorXcd trunc_p = as_vector(clean_p) - psi_p.entries * w_true;
    const Eigen::VectorXcd trunc_d = as_vector(clean_d) - psi_d.entries * w_true;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(psi_p.entries);
    const Eigen::VectorXcd leak = qr.solve(trunc_p);
    const Eigen::VectorXcd bire_vec = psi_d.entries * leak;

    const Eigen::MatrixXcd gram_p = psi_p.entries.adjoint() * psi_p.entries;
    const Eigen::MatrixXcd gram_d = psi_d.entries.adjoint() * psi_d.entries;
    const GramSpectrum sp = gram_spectrum(gram_p);
    const GramSpectrum sd = gram_spectrum(gram_d);
    const double tr_ratio =
        Eigen::LDLT<Eigen::MatrixXcd>(gram_p).solve(gram_d).trace().real();

    const double dl = static_cast<double>(psi_d.rows());
    BoundRow row;
    row.instance = idx;
    row.order_model = order_model;
    row.order_truth = order_truth;
    row.memory = memory;
    row.pilot_len = lp;
    row.bire_mw = bire_vec.squaredNorm() / dl;
    row.nire_tr = tr_ratio;
    row.analytic_mw = (trunc_d - bire_vec).squaredNorm() / dl +
                      noise_mw * tr_ratio / dl + noise_mw;
    row.bound_mw = 2.0 * trunc_d.squaredNorm() / dl + 2.0 * row.bire_mw +
                   noise_mw * tr_ratio / dl + noise_mw;
    row.bire_bound_mw = bire_bound(sp, sd, trunc_p.squaredNorm()) / dl;
    const auto [nlo, nhi] = nire_bounds(sp, sd);
    row.nire_lo = nlo;
    row.nire_hi = nhi;
    row.tr_inv = sp.trace_inverse;
    const double lw2 = static_cast<double>(lw) * static_cast<double>(lw);
    row.tr_inv_lo = lw2 / sp.trace;
    row.tr_inv_hi = lw2 * sp.cond2 / sp.trace;
    row.tr_inv_cap = sp.lambda_min > 0 ? static_cast<double>(lw) / sp.lambda_min : kInf;

    // Same pilot fit in both bases must predict the same data block.
    const Eigen::VectorXcd w_glp = qr.solve(as_vector(r_p));
    const Eigen::VectorXcd w_ph =
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd>(phi_p.entries).solve(as_vector(r_p));
    const Eigen::VectorXcd pred_glp = psi_d.entries * w_glp;
    const Eigen::VectorXcd pred_ph = phi_d.entries * w_ph;
    row.theorem1_rel_err = (pred_glp - pred_ph).norm() / pred_glp.norm();

    const double slack = 1.0 + 1e-9;
    int v = 0;
    if (!(row.analytic_mw <= row.bound_mw * slack)) ++v;
    if (!(row.bire_mw <= row.bire_bound_mw * slack)) ++v;
    if (!(row.nire_lo <= row.nire_tr * slack && row.nire_tr <= row.nire_hi * slack)) ++v;
    if (!(row.tr_inv_lo <= row.tr_inv * slack && row.tr_inv <= row.tr_inv_hi * slack)) ++v;
    if (!(row.tr_inv <= row.tr_inv_cap * slack)) ++v;
    if (!(row.theorem1_rel_err <= 1e-8)) ++v;
    row.violations = v;
    result.bound_rows[static_cast<std::size_t>(idx)] = row;
  }

  for (const BoundRow& row : result.bound_rows)
    result.bound_violations += row.violations;
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case ExperimentKind::order_sweep: return run_order_sweep(cfg);
    case ExperimentKind::pilot_length: return run_pilot_length_sweep(cfg);
    case ExperimentKind::pilot_compare: return run_pilot_compare(cfg);
    case ExperimentKind::mimo: return run_mimo_sweep(cfg);
    case ExperimentKind::iq: return run_iq_sweep(cfg);
    case ExperimentKind::bound_check: return run_bound_check(cfg);
    case ExperimentKind::select_pilot:
      throw ConfigError("select_pilot is a CLI utility, not a sweep");
  }
  throw ConfigError("unknown experiment");
}

// ---------------------------------------------------------------------------
// Output files
// ---------------------------------------------------------------------------

namespace {

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

constexpr const char* kSweepHeader =
    "experiment,profile,order,pilot_len,antennas,irr_db,pilot_kind,canceller,"
    "trials,failed_trials,criterion_median,rsi_dbm_median,rsi_dbm_iqr,"
    "rsi_minus_noise_db_median,truncation_dbm_median,bire_dbm_median,"
    "nire_dbm_median,noise_dbm,analytic_dbm_median,bound_dbm_median,"
    "cancellation_db_median";

constexpr const char* kBoundHeader =
    "instance,order_model,order_truth,memory,pilot_len,analytic_mw,bound_mw,"
    "bire_mw,bire_bound_mw,nire_tr,nire_lo,nire_hi,tr_inv,tr_inv_lo,tr_inv_hi,"
    "tr_inv_cap,theorem1_rel_err,violations";

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_manifest(const ExperimentConfig& cfg, const std::string& out_dir,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream ss;
  ss << "artifact_version = " << artifact_version() << '\n'
     << "schema_version = " << cfg.schema_version << '\n'
     << "experiment = " << to_string(cfg.experiment) << '\n'
     << "profile = " << to_string(cfg.profile) << '\n'
     << "config_hash = " << std::hex << cfg.hash() << std::dec << '\n'
     << "master_seed = " << cfg.master_seed << '\n';
  for (const auto& [k, v] : extra) ss << k << " = " << v << '\n';
  write_file(out_dir + "/manifest.txt", ss.str());
}

void write_outputs(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const ExperimentConfig& cfg = result.config;

  if (!result.rows.empty()) {
    std::ostringstream ss;
    ss << kSweepHeader << '\n';
    for (const SweepRow& r : result.rows) {
      ss << to_string(cfg.experiment) << ',' << to_string(cfg.profile) << ','
         << r.order << ',' << r.pilot_len << ',' << r.antennas << ','
         << fmt(r.irr_db) << ',' << to_string(r.pilot_kind) << ','
         << to_string(r.canceller) << ',' << r.trials << ',' << r.failed_trials
         << ',' << fmt(r.criterion_median) << ',' << fmt(r.rsi_dbm_median) << ','
         << fmt(r.rsi_dbm_iqr) << ',' << fmt(r.rsi_minus_noise_db_median) << ','
         << fmt(r.truncation_dbm_median) << ',' << fmt(r.bire_dbm_median) << ','
         << fmt(r.nire_dbm_median) << ',' << fmt(r.noise_dbm) << ','
         << fmt(r.analytic_dbm_median) << ',' << fmt(r.bound_dbm_median) << ','
         << fmt(r.cancellation_db_median) << '\n';
    }
    write_file(out_dir + "/" + to_string(cfg.experiment) + ".csv", ss.str());
  }

  if (!result.bound_rows.empty()) {
    std::ostringstream ss;
    ss << kBoundHeader << '\n';
    for (const BoundRow& r : result.bound_rows) {
      ss << r.instance << ',' << r.order_model << ',' << r.order_truth << ','
         << r.memory << ',' << r.pilot_len << ',' << fmt(r.analytic_mw) << ','
         << fmt(r.bound_mw) << ',' << fmt(r.bire_mw) << ','
         << fmt(r.bire_bound_mw) << ',' << fmt(r.nire_tr) << ','
         << fmt(r.nire_lo) << ',' << fmt(r.nire_hi) << ',' << fmt(r.tr_inv)
         << ',' << fmt(r.tr_inv_lo) << ',' << fmt(r.tr_inv_hi) << ','
         << fmt(r.tr_inv_cap) << ',' << fmt(r.theorem1_rel_err) << ','
         << r.violations << '\n';
    }
    write_file(out_dir + "/bound_check.csv", ss.str());
  }

  if (!result.trial_records.empty()) {
    std::ostringstream ss;
    ss << "experiment,order,pilot_len,antennas,irr_db,pilot_kind,canceller,"
          "trial,failed,criterion,"
       << RsiReport::csv_header() << '\n';
    for (const TrialRecord& r : result.trial_records) {
      ss << to_string(cfg.experiment) << ',' << r.order << ',' << r.pilot_len
         << ',' << r.antennas << ',' << fmt(r.irr_db) << ','
         << to_string(r.pilot_kind) << ',' << to_string(r.canceller) << ','
         << r.trial << ',' << (r.failed ? 1 : 0) << ',' << fmt(r.criterion)
         << ',' << r.report.csv_row() << '\n';
    }
    write_file(out_dir + "/trials.csv", ss.str());
  }

  write_file(out_dir + "/config.txt", cfg.serialize());
  write_manifest(cfg, out_dir,
                 {{"sweep_rows", std::to_string(result.rows.size())},
                  {"bound_rows", std::to_string(result.bound_rows.size())},
                  {"bound_violations", std::to_string(result.bound_violations)},
                  {"trial_rows", std::to_string(result.trial_records.size())}});
}

}  // namespace dsic
