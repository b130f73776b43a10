#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

// End-to-end runs of the installed command-line binary. IDMAUC_CLI_PATH is
// injected by the build; every test works inside a scratch directory under
// the system temp root.

namespace fs = std::filesystem;

namespace {

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "idmauc_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct CliResult {
  int code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  fs::path capture = scratch_dir() / ("capture" + std::to_string(counter++) + ".txt");
  std::string command =
      std::string(IDMAUC_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  int status = std::system(command.c_str());
  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream buffer;
  buffer << in.rdbuf();
  result.output = buffer.str();
  return result;
}

std::string path_of(const std::string& name) { return (scratch_dir() / name).string(); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

TEST_CASE("help is reachable and argument errors exit with code 1") {
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("--help").output.find("simulate") != std::string::npos);
  CHECK(run_cli("simulate --help").code == 0);

  CHECK(run_cli("").code == 1);                // a subcommand is required
  CHECK(run_cli("frobnicate").code == 1);      // unknown subcommand
  CHECK(run_cli("simulate --out x.csv").code == 1);  // --seed is mandatory
  CHECK(run_cli("simulate --scenario ZZ --seed 1 --out " + path_of("zz.csv")).code == 1);
  CHECK(run_cli("auc --truth --definition cd --grid 12,36").code == 1);  // window missing
  CHECK(run_cli("auc --definition id --grid 12").code == 1);  // neither --fit nor --truth
  CHECK(run_cli("fit --input " + path_of("none.csv") + " --model nonsense").code == 1);
}

TEST_CASE("data and fit failures exit with code 2") {
  CHECK(run_cli("fit --input " + path_of("missing.csv") + " --model cox").code == 2);

  // A dataset with no deaths: the Cox fit cannot proceed.
  std::ofstream out(path_of("nodeaths.csv"));
  out << "id,visit_time,marker,survival_time,death_indicator\n"
         "a,0,0,10,0\na,3,1,10,0\nb,0,0,12,0\n";
  out.close();
  CliResult r = run_cli("fit --input " + path_of("nodeaths.csv") + " --model cox");
  CHECK(r.code == 2);
  CHECK(r.output.find("no deaths") != std::string::npos);

  // Garbage into the diagnostic command.
  std::ofstream g(path_of("garbage.csv"));
  g << "this is not a record file\n";
  g.close();
  CHECK(run_cli("diagnose --input " + path_of("garbage.csv")).code == 2);
}

TEST_CASE("simulation is reproducible and writes records plus true paths") {
  std::string first = path_of("sim1.csv");
  std::string second = path_of("sim2.csv");
  CHECK(run_cli("simulate --scenario R --seed 5 --out " + first + " --paths-out " +
                path_of("sim1.paths.csv"))
            .code == 0);
  CHECK(run_cli("simulate --scenario R --seed 5 --out " + second + " --paths-out " +
                path_of("sim2.paths.csv"))
            .code == 0);

  std::string a = slurp(first);
  CHECK(!a.empty());
  CHECK(a == slurp(second));
  CHECK(slurp(path_of("sim1.paths.csv")) == slurp(path_of("sim2.paths.csv")));
  CHECK(a.rfind("id,visit_time,marker,survival_time,death_indicator\n", 0) == 0);
  CHECK(slurp(path_of("sim1.paths.csv")).rfind("id,illness_time,death_time,exit_direct\n", 0) ==
        0);
}

TEST_CASE("every model fits the simulated records and feeds the AUC command") {
  const std::string data = path_of("roundtrip.csv");
  REQUIRE(run_cli("simulate --scenario R --seed 12 --out " + data + " --paths-out " +
                  path_of("roundtrip.paths.csv"))
              .code == 0);

  const std::string models[] = {"cox", "weibull", "pwc", "pwc-panel"};
  for (const std::string& model : models) {
    CAPTURE(model);
    std::string fit_file = path_of("fit_" + model + ".csv");
    std::string flags;
    if (model == "pwc") flags = " --cutpoints 30 --proportional";
    if (model == "pwc-panel") flags = " --cutpoints 30";
    CliResult fit = run_cli("fit --input " + data + " --model " + model + flags + " --out " +
                            fit_file);
    REQUIRE(fit.code == 0);

    std::string contents = slurp(fit_file);
    CHECK(contents.rfind("key,name,value\n", 0) == 0);
    CHECK(contents.find("model,," + model + "\n") != std::string::npos);
    if (model != "weibull")
      CHECK(contents.find("param,hazard_ratio,") != std::string::npos);

    std::string curve_file = path_of("auc_" + model + ".csv");
    CliResult auc = run_cli("auc --fit " + fit_file +
                            " --definition id --grid 12,36,60 --out " + curve_file);
    REQUIRE(auc.code == 0);

    std::stringstream curve(slurp(curve_file));
    std::string line;
    REQUIRE(std::getline(curve, line));
    CHECK(line == "definition,estimator,window,time,value");
    int rows = 0;
    while (std::getline(curve, line)) {
      auto fields = split_line(line);
      REQUIRE(fields.size() == 5);
      CHECK(fields[0] == "id");
      double value = std::stod(fields[4]);
      CHECK(value > 0.0);
      CHECK(value < 1.0);
      ++rows;
    }
    CHECK(rows == 3);
  }
}

TEST_CASE("the truth AUC reproduces the frozen oracle through the command line") {
  CliResult r = run_cli("auc --truth --definition cd --grid 12 --window 60 --out -");
  REQUIRE(r.code == 0);
  std::stringstream out(r.output);
  std::string header, row;
  REQUIRE(std::getline(out, header));
  REQUIRE(std::getline(out, row));
  auto fields = split_line(row);
  REQUIRE(fields.size() == 5);
  CHECK(fields[0] == "cd");
  CHECK(fields[1] == "truth");
  CHECK(std::stod(fields[4]) == doctest::Approx(0.5937428797338548).epsilon(1e-9));
}

TEST_CASE("the study command writes a deterministic report") {
  std::string report1 = path_of("study1.csv");
  std::string report2 = path_of("study2.csv");
  const std::string args =
      "study --scenarios R --estimators weibull --reps 2 --seed 9 --id-grid 12 --threads 1 "
      "--out ";
  REQUIRE(run_cli(args + report1).code == 0);
  REQUIRE(run_cli(args + report2).code == 0);
  CHECK(slurp(report1) == slurp(report2));

  std::stringstream in(slurp(report1));
  std::string line;
  REQUIRE(std::getline(in, line));
  auto header = split_line(line);
  REQUIRE(header.size() == 11);
  CHECK(header[0] == "scenario");
  CHECK(header[1] == "estimator");
  REQUIRE(std::getline(in, line));
  auto row = split_line(line);
  CHECK(row[0] == "R");
  CHECK(row[1] == "weibull");
  CHECK(row[10] == "2");  // n_replications
}

TEST_CASE("the diagnostic command renders slopes for simulated data") {
  const std::string data = path_of("diag.csv");
  REQUIRE(run_cli("simulate --scenario R --seed 4 --out " + data + " --paths-out " +
                  path_of("diag.paths.csv"))
              .code == 0);
  CliResult r = run_cli("diagnose --input " + data + " --out -");
  REQUIRE(r.code == 0);
  CHECK(r.output.rfind("row_type,transition,x,y\n", 0) == 0);
  CHECK(r.output.find("slope,") != std::string::npos);
}
