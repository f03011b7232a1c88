// End-to-end checks of the command-line binary: exit codes, output files,
// and the determinism contract, all through std::system on the real
// executable (path injected by the build as DSIC_CLI_PATH).

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& capture = "/dev/null") {
  const std::string cmd =
      std::string("\"") + DSIC_CLI_PATH + "\" " + args + " > \"" + capture +
      "\" 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(bool(in), "missing file: " << path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::string line;
  std::getline(in, line);
  return line;
}

fs::path fresh_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("dsic_cli_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Small enough to run in a couple of seconds, large enough that every
// experiment path (multiple orders, pilot lengths, antennas) is exercised.
const char* kMiniConfig =
    "schema_version = 1\n"
    "trials = 6\n"
    "symbol_len = 64\n"
    "memory = 3\n"
    "data_symbols = 3\n"
    "pilot_symbols = 1,2\n"
    "pilot_symbols_fixed = 2\n"
    "orders = 3,5\n"
    "fixed_order = 5\n"
    "truth_order = 9\n"
    "ensemble_size = 8\n"
    "antennas = 1,2\n"
    "irr_list_db = 25,55\n"
    "instances = 30\n"
    "pa_fit_samples = 16384\n";

fs::path write_mini_config(const fs::path& dir) {
  const fs::path p = dir / "mini.cfg";
  std::ofstream out(p);
  out << kMiniConfig;
  return p;
}

}  // namespace

TEST_CASE("help and usage errors") {
  const fs::path dir = fresh_dir("usage");
  const fs::path log = dir / "help.txt";

  CHECK(run_cli("--help", log.string()) == 0);
  const std::string help = slurp(log);
  CHECK(help.find("order-sweep") != std::string::npos);
  CHECK(help.find("select-pilot") != std::string::npos);

  CHECK(run_cli("") == 2);                        // subcommand is required
  CHECK(run_cli("order-sweep --bogus-flag") == 2);
  CHECK(run_cli("no-such-subcommand") == 2);
  CHECK(run_cli("pilot-compare --profile lab") == 2);  // not desk|paper
  fs::remove_all(dir);
}

TEST_CASE("configuration errors exit with code 2") {
  const fs::path dir = fresh_dir("badcfg");

  CHECK(run_cli("pilot-compare --config " + (dir / "nonexistent.cfg").string()) == 2);

  const fs::path bad_key = dir / "bad_key.cfg";
  std::ofstream(bad_key) << "schema_version = 1\nno_such_key = 7\n";
  CHECK(run_cli("pilot-compare --config " + bad_key.string()) == 2);

  const fs::path bad_value = dir / "bad_value.cfg";
  std::ofstream(bad_value) << "schema_version = 1\nfixed_order = 4\n";
  CHECK(run_cli("pilot-compare --config " + bad_value.string()) == 2);

  const fs::path no_schema = dir / "no_schema.cfg";
  std::ofstream(no_schema) << "trials = 5\n";
  CHECK(run_cli("pilot-compare --config " + no_schema.string()) == 2);

  // Overrides are validated too: zero trials is rejected.
  const fs::path cfg = write_mini_config(dir);
  CHECK(run_cli("pilot-compare --config " + cfg.string() + " --trials 0") == 2);
  fs::remove_all(dir);
}

TEST_CASE("pilot-compare writes the documented artifacts") {
  const fs::path dir = fresh_dir("compare");
  const fs::path cfg = write_mini_config(dir);
  const fs::path out = dir / "out";

  const int rc = run_cli("pilot-compare --config " + cfg.string() +
                         " --seed 77 --out " + out.string());
  CHECK(rc == 0);

  CHECK(fs::exists(out / "pilot_compare.csv"));
  CHECK(fs::exists(out / "trials.csv"));
  CHECK(fs::exists(out / "config.txt"));
  CHECK(fs::exists(out / "manifest.txt"));

  CHECK(first_line(out / "pilot_compare.csv") ==
        "experiment,profile,order,pilot_len,antennas,irr_db,pilot_kind,"
        "canceller,trials,failed_trials,criterion_median,rsi_dbm_median,"
        "rsi_dbm_iqr,rsi_minus_noise_db_median,truncation_dbm_median,"
        "bire_dbm_median,nire_dbm_median,noise_dbm,analytic_dbm_median,"
        "bound_dbm_median,cancellation_db_median");

  const std::string manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find("artifact_version = ") != std::string::npos);
  CHECK(manifest.find("config_hash = ") != std::string::npos);
  CHECK(manifest.find("master_seed = 77") != std::string::npos);
  CHECK(manifest.find("experiment = pilot_compare") != std::string::npos);

  // The config snapshot carries the seed override, so a rerun from the
  // snapshot reproduces the run.
  const std::string snapshot = slurp(out / "config.txt");
  CHECK(snapshot.find("master_seed = 77") != std::string::npos);
  CHECK(snapshot.find("trials = 6") != std::string::npos);

  // Same invocation again: byte-identical tables.
  const fs::path out2 = dir / "out2";
  CHECK(run_cli("pilot-compare --config " + cfg.string() +
                " --seed 77 --out " + out2.string()) == 0);
  CHECK(slurp(out / "pilot_compare.csv") == slurp(out2 / "pilot_compare.csv"));
  CHECK(slurp(out / "trials.csv") == slurp(out2 / "trials.csv"));

  // Different seed: different numbers.
  const fs::path out3 = dir / "out3";
  CHECK(run_cli("pilot-compare --config " + cfg.string() +
                " --seed 78 --out " + out3.string()) == 0);
  CHECK(slurp(out / "pilot_compare.csv") != slurp(out3 / "pilot_compare.csv"));
  fs::remove_all(dir);
}

TEST_CASE("remaining experiment subcommands run on the mini config") {
  const fs::path dir = fresh_dir("subs");
  const fs::path cfg = write_mini_config(dir);

  for (const char* sub : {"order-sweep", "pilot-length", "mimo", "iq"}) {
    const fs::path out = dir / (std::string("out_") + sub);
    const int rc = run_cli(std::string(sub) + " --config " + cfg.string() +
                           " --seed 5 --out " + out.string());
    CHECK_MESSAGE(rc == 0, "subcommand " << sub);
    std::string stem(sub);
    for (char& c : stem)
      if (c == '-') c = '_';
    CHECK_MESSAGE(fs::exists(out / (stem + ".csv")), "table for " << sub);
    CHECK(fs::exists(out / "manifest.txt"));
  }
  fs::remove_all(dir);
}

TEST_CASE("bound-check audits instances and exits cleanly") {
  const fs::path dir = fresh_dir("bounds");
  const fs::path cfg = write_mini_config(dir);
  const fs::path out = dir / "out";

  const int rc = run_cli("bound-check --config " + cfg.string() +
                         " --seed 11 --out " + out.string());
  CHECK(rc == 0);  // 3 would mean an inequality failed
  CHECK(fs::exists(out / "bound_check.csv"));
  CHECK(first_line(out / "bound_check.csv").rfind("instance,order_model", 0) == 0);

  // 30 instances plus the header line.
  std::ifstream in(out / "bound_check.csv");
  int lines = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++lines;
  CHECK(lines == 31);
  fs::remove_all(dir);
}

TEST_CASE("select-pilot dumps the winning sequence and the ensemble table") {
  const fs::path dir = fresh_dir("select");
  const fs::path cfg = write_mini_config(dir);
  const fs::path out = dir / "out";

  const int rc = run_cli("select-pilot --config " + cfg.string() +
                         " --seed 9 --out " + out.string());
  CHECK(rc == 0);

  CHECK(first_line(out / "pilot.csv") == "re,im");
  std::ifstream pilot(out / "pilot.csv");
  int rows = -1;  // discount the header
  for (std::string line; std::getline(pilot, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 2 * 64);  // pilot_symbols_fixed * symbol_len

  CHECK(first_line(out / "ensemble.csv") ==
        "index,criterion,rank_s,lambda_min,cond2,papr_db");
  std::ifstream ens(out / "ensemble.csv");
  int cands = -1;
  for (std::string line; std::getline(ens, line);)
    if (!line.empty()) ++cands;
  CHECK(cands == 8);

  const std::string manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find("selected_index = ") != std::string::npos);
  CHECK(manifest.find("criterion = ") != std::string::npos);
  fs::remove_all(dir);
}
