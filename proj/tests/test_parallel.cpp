#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <omp.h>

#include "dsic/basis.hpp"
#include "dsic/config.hpp"
#include "dsic/experiments.hpp"
#include "dsic/pilot_opt.hpp"
#include "dsic/signals.hpp"

using namespace dsic;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parallel matrix construction is bit-identical to the reference") {
  BasisConfig cfg;
  cfg.memory = 6;
  cfg.kind = BasisKind::GLP;
  for (int order : {1, 5, 9}) {
    cfg.order = order;
    const ComplexSequence x = gen_gaussian_sequence(700, {91, streams::pilot, 0});
    const MeasurementMatrix par = build_measurement_matrix(x, cfg, SourceKind::pilot);
    const MeasurementMatrix ser =
        build_measurement_matrix_serial(x, cfg, SourceKind::pilot);
    REQUIRE(par.rows() == ser.rows());
    REQUIRE(par.cols() == ser.cols());
    CHECK((par.entries - ser.entries).norm() == 0.0);
  }

  BasisConfig iq = cfg;
  iq.order = 5;
  iq.kind = BasisKind::PH_IQ;
  const ComplexSequence x = gen_gaussian_sequence(700, {91, streams::pilot, 1});
  CHECK((build_measurement_matrix(x, iq, SourceKind::data).entries -
         build_measurement_matrix_serial(x, iq, SourceKind::data).entries)
            .norm() == 0.0);
}

TEST_CASE("parallel ensemble scan picks the same winner as the reference") {
  BasisConfig cfg;
  cfg.order = 7;
  cfg.memory = 4;
  cfg.kind = BasisKind::GLP;
  const StreamSeed seed{92, streams::ensemble, 0};

  std::vector<EnsembleRow> rows_par, rows_ser;
  const PilotCandidate par =
      select_pilot(48, 320, PilotDistribution::gaussian, cfg, seed, 0, &rows_par);
  const PilotCandidate ser = select_pilot_serial(48, 320, PilotDistribution::gaussian,
                                                 cfg, seed, 0, &rows_ser);

  CHECK(par.ensemble_index == ser.ensemble_index);
  CHECK(par.criterion_value == ser.criterion_value);
  REQUIRE(par.sequence.size() == ser.sequence.size());
  for (std::size_t n = 0; n < par.sequence.size(); ++n)
    CHECK(par.sequence[n] == ser.sequence[n]);

  REQUIRE(rows_par.size() == rows_ser.size());
  for (std::size_t i = 0; i < rows_par.size(); ++i) {
    CHECK(rows_par[i].index == rows_ser[i].index);
    CHECK(rows_par[i].criterion == rows_ser[i].criterion);
    CHECK(rows_par[i].papr_db == rows_ser[i].papr_db);
  }
}

TEST_CASE("thread count does not change experiment outputs") {
  ExperimentConfig cfg = default_config(ExperimentKind::pilot_compare, Profile::desk);
  cfg.trials = 6;
  cfg.symbol_len = 64;
  cfg.memory = 3;
  cfg.data_symbols = 2;
  cfg.pilot_symbols_fixed = 2;
  cfg.fixed_order = 5;
  cfg.truth_order = 9;
  cfg.ensemble_size = 8;
  cfg.validate();

  const int max_threads = omp_get_max_threads();
  const auto dir1 = std::filesystem::temp_directory_path() / "dsic_thr_1";
  const auto dir4 = std::filesystem::temp_directory_path() / "dsic_thr_4";

  omp_set_num_threads(1);
  write_outputs(run_pilot_compare(cfg), dir1.string());
  omp_set_num_threads(4);
  write_outputs(run_pilot_compare(cfg), dir4.string());
  omp_set_num_threads(max_threads);

  for (const char* name : {"pilot_compare.csv", "trials.csv"})
    CHECK(slurp((dir1 / name).string()) == slurp((dir4 / name).string()));

  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir4);
}
