#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oseen/experiment.hpp"

using namespace oseen;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig config;
    config.domain = Domain::Square;
    config.family = Family::RT;
    config.degree = 0;
    config.beta = BetaId::Beta1;
    config.normalize = true;
    config.nu = 0.5;
    config.levels = {4, 6, 8};
    config.nev = 2;
    config.seed = 13;
    return config;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config validation", "[experiment]") {
    ExperimentConfig config = small_config();
    config.nu = 0.0;
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
    config = small_config();
    config.nev = 0;
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
    config = small_config();
    config.levels = {8, 4};
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
    config = small_config();
    config.levels = {};
    REQUIRE_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("convergence run produces tracks and fits", "[experiment]") {
    const ConvergenceRun run = run_convergence(small_config());
    REQUIRE(run.levels.size() == 3);
    REQUIRE(run.tracks.size() == 2);
    for (const auto& track : run.tracks) {
        REQUIRE(track.lambdas.size() == 3);
        REQUIRE(track.fit.alpha > 0.5);
    }
    // constants computed on the coarsest level at this size
    REQUIRE(run.constants.has_value());
    REQUIRE(run.constants->gamma_h > 0.0);
    // level metadata
    REQUIRE(run.levels[0].dof_interface ==
            run.levels[0].n_sigma + run.levels[0].n_u);
    REQUIRE(run.levels[0].dof_total == run.levels[0].dof_interface + 1);
}

TEST_CASE("identical runs produce byte-identical reports", "[experiment]") {
    const ConvergenceRun a = run_convergence(small_config());
    const ConvergenceRun b = run_convergence(small_config());
    std::ostringstream csv_a, csv_b;
    write_convergence_csv(a, csv_a);
    write_convergence_csv(b, csv_b);
    REQUIRE(csv_a.str() == csv_b.str());
    REQUIRE(convergence_to_json(a).dump(2) == convergence_to_json(b).dump(2));
}

TEST_CASE("csv schema", "[experiment]") {
    const ConvergenceRun run = run_convergence(small_config());
    std::ostringstream csv;
    write_convergence_csv(run, csv);
    std::istringstream in(csv.str());
    std::string header;
    std::getline(in, header);
    REQUIRE(header == "level,N,h,dof,eig_index,re,im,alpha,extr_re,extr_im,fit_residual");
    int rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    REQUIRE(rows == 3 * 2);  // levels x eigenvalues
}

TEST_CASE("reference table checking", "[experiment]") {
    const ConvergenceRun run = run_convergence(small_config());
    const std::complex<double> extr = run.tracks[0].fit.lambda_extr;
    std::ostringstream table;
    table.precision(17);
    table << "# index re im tol alpha_lo alpha_hi\n";
    table << "0 " << extr.real() << " " << extr.imag() << " 1e-6 0.5 8\n";
    {
        std::istringstream in(table.str());
        std::ostringstream log;
        REQUIRE(check_against_reference(run, read_reference_table(in), log));
    }
    std::ostringstream bad;
    bad << "0 " << extr.real() + 1.0 << " 0 1e-6 0.5 8\n";
    {
        std::istringstream in(bad.str());
        std::ostringstream log;
        REQUIRE_FALSE(check_against_reference(run, read_reference_table(in), log));
    }
}

TEST_CASE("spectrum emission round trip", "[experiment]") {
    ExperimentConfig config = small_config();
    config.levels = {8};
    config.nev = 8;
    const SpectrumRun run = emit_spectrum(config);
    REQUIRE(!run.values.empty());
    // conjugate symmetry of the emitted set
    for (const auto& v : run.values) {
        if (std::abs(v.imag()) <= 1e-6 * std::max(1.0, std::abs(v))) continue;
        bool paired = false;
        for (const auto& w : run.values)
            if (is_conjugate_pair(v, w)) paired = true;
        REQUIRE(paired);
    }
    std::ostringstream out;
    write_spectrum_file(run, out);
    std::istringstream in(out.str());
    const auto parsed = read_spectrum_file(in);
    REQUIRE(parsed.size() == run.values.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) REQUIRE(parsed[i] == run.values[i]);
}

TEST_CASE("nev = 0 is rejected", "[experiment]") {
    ExperimentConfig config = small_config();
    config.nev = 0;
    REQUIRE_THROWS_AS(emit_spectrum(config), std::invalid_argument);
}

TEST_CASE("robustness sweep runs both scenarios", "[experiment]") {
    ExperimentConfig config = small_config();
    config.domain = Domain::SquareCentered;
    config.family = Family::BDM;
    config.degree = 1;
    config.nu_sweep = {0};
    config.robust_levels = {4, 6, 8};
    const RobustnessRun run = run_robustness(config);
    REQUIRE(run.points.size() == 2);
    for (const auto& point : run.points) {
        REQUIRE(point.nu == 1.0);
        REQUIRE_FALSE(point.solver_failed);
        REQUIRE(point.orders.size() == 4);
    }
    // at nu = 1 both scenarios use the same field, so the fits coincide
    for (std::size_t e = 0; e < 4; ++e)
        REQUIRE(run.points[0].orders[e] == Catch::Approx(run.points[1].orders[e]).margin(1e-9));
}

TEST_CASE("cli end-to-end determinism and exit codes", "[experiment]") {
    namespace fs = std::filesystem;
    const fs::path dir_a = fs::temp_directory_path() / "oseen_cli_a";
    const fs::path dir_b = fs::temp_directory_path() / "oseen_cli_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const std::string base = std::string(OSEEN_CLI_PATH) +
                             " convergence --domain square --family rt --degree 0 --beta beta1 "
                             "--normalize --nu 0.5 --levels 4,6,8 --nev 2 --seed 13 --out-dir ";
    REQUIRE(std::system((base + dir_a.string() + " > /dev/null").c_str()) == 0);
    REQUIRE(std::system((base + dir_b.string() + " > /dev/null").c_str()) == 0);
    REQUIRE(slurp((dir_a / "convergence.csv").string()) ==
            slurp((dir_b / "convergence.csv").string()));
    REQUIRE(slurp((dir_a / "convergence.json").string()) ==
            slurp((dir_b / "convergence.json").string()));
    REQUIRE(!slurp((dir_a / "convergence.csv").string()).empty());

    // config error -> exit code 2
    const int bad = std::system(
        (std::string(OSEEN_CLI_PATH) + " convergence --domain nowhere > /dev/null 2>&1").c_str());
    REQUIRE(WEXITSTATUS(bad) == 2);
    const int bad2 = std::system(
        (std::string(OSEEN_CLI_PATH) + " convergence --nu -1 > /dev/null 2>&1").c_str());
    REQUIRE(WEXITSTATUS(bad2) == 2);
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("cli config file with command-line override", "[experiment]") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "oseen_cli_cfg";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "run.cfg";
    {
        std::ofstream out(cfg);
        out << "domain=square\nfamily=rt\ndegree=0\nbeta=beta1\nnormalize=true\n"
            << "nu=0.5\nlevels=4,6,8\nnev=2\nout-dir=" << (dir / "out").string() << "\n";
    }
    // command line overrides nev from the file
    const std::string cmd = std::string(OSEEN_CLI_PATH) + " convergence --config " +
                            cfg.string() + " --nev 1 > /dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    const std::string csv = slurp((dir / "out" / "convergence.csv").string());
    int rows = -1;  // header line
    for (char c : csv)
        if (c == '\n') ++rows;
    REQUIRE(rows == 3);  // 3 levels x 1 eigenvalue
    fs::remove_all(dir);
}
