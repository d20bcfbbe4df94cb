// Command line driver for the Oseen pseudostress eigenvalue experiments.
//
// Subcommands: convergence (level sweep + rate fits), robustness (viscosity
// sweep), spectrum (eigenvalue cloud), export-mesh.
// Exit codes: 0 success, 2 configuration error, 3 solver failure,
// 4 reference-check failure.

#include <complex>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oseen/experiment.hpp"

namespace {

struct CliOptions {
    std::string domain = "square";
    std::string pattern = "right";
    std::string family = "rt";
    int degree = 0;
    std::string beta = "beta1";
    bool normalize = false;
    double beta_scale = 1.0;
    double nu = 0.5;
    std::vector<int> levels = {20, 30, 40, 50};
    int nev = 4;
    std::string shift = "auto";
    std::string out_dir = "out";
    std::uint64_t seed = 13;
    bool emit_matrices = false;
    std::vector<int> nu_sweep = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> robust_levels = {8, 16, 24};
    std::string check_file;
    std::string config_path;
};

// Flat key=value configuration file ('#' comments). Values here sit between
// the built-in defaults and the command line: any option also given on the
// command line wins.
void apply_config_file(CliOptions& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    auto parse_levels = [](const std::string& text) {
        std::vector<int> out;
        std::istringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
        return out;
    };
    auto parse_bool = [](const std::string& text) {
        return text == "1" || text == "true" || text == "yes" || text == "on";
    };
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto strip = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            if (a == std::string::npos) return std::string();
            const auto b = s.find_last_not_of(" \t\r");
            return s.substr(a, b - a + 1);
        };
        if (strip(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw CLI::ValidationError("--config",
                                       "line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key == "domain") opt.domain = value;
        else if (key == "pattern") opt.pattern = value;
        else if (key == "family") opt.family = value;
        else if (key == "degree") opt.degree = std::stoi(value);
        else if (key == "beta") opt.beta = value;
        else if (key == "normalize") opt.normalize = parse_bool(value);
        else if (key == "beta-scale") opt.beta_scale = std::stod(value);
        else if (key == "nu") opt.nu = std::stod(value);
        else if (key == "levels") opt.levels = parse_levels(value);
        else if (key == "nev") opt.nev = std::stoi(value);
        else if (key == "shift") opt.shift = value;
        else if (key == "out-dir") opt.out_dir = value;
        else if (key == "seed") opt.seed = std::stoull(value);
        else if (key == "emit-matrices") opt.emit_matrices = parse_bool(value);
        else if (key == "nu-sweep") opt.nu_sweep = parse_levels(value);
        else if (key == "robust-levels") opt.robust_levels = parse_levels(value);
        else
            throw CLI::ValidationError("--config", "unknown key '" + key + "' on line " +
                                           std::to_string(lineno));
    }
}

oseen::ExperimentConfig to_config(const CliOptions& opt) {
    oseen::ExperimentConfig config;
    if (opt.domain == "square")
        config.domain = oseen::Domain::Square;
    else if (opt.domain == "square2")
        config.domain = oseen::Domain::SquareCentered;
    else if (opt.domain == "lshape")
        config.domain = oseen::Domain::LShape;
    else
        throw CLI::ValidationError("--domain", "must be square, square2 or lshape");
    if (opt.pattern == "right")
        config.pattern = oseen::DiagonalPattern::Right;
    else if (opt.pattern == "left")
        config.pattern = oseen::DiagonalPattern::Left;
    else
        throw CLI::ValidationError("--pattern", "must be right or left");
    if (opt.family == "rt")
        config.family = oseen::Family::RT;
    else if (opt.family == "bdm")
        config.family = oseen::Family::BDM;
    else
        throw CLI::ValidationError("--family", "must be rt or bdm");
    config.degree = opt.degree;
    config.beta = oseen::beta_id_from_string(opt.beta);
    config.normalize = opt.normalize;
    config.beta_scale = opt.beta_scale;
    config.nu = opt.nu;
    config.levels = opt.levels;
    config.nev = opt.nev;
    config.out_dir = opt.out_dir;
    config.seed = opt.seed;
    config.emit_matrices = opt.emit_matrices;
    config.nu_sweep = opt.nu_sweep;
    config.robust_levels = opt.robust_levels;
    if (opt.shift == "auto") {
        config.shift_auto = true;
    } else {
        config.shift_auto = false;
        std::istringstream ss(opt.shift);
        double re = 0.0, im = 0.0;
        char comma = 0;
        if (!(ss >> re)) throw CLI::ValidationError("--shift", "must be auto or re[,im]");
        if (ss >> comma >> im && comma != ',')
            throw CLI::ValidationError("--shift", "must be auto or re[,im]");
        config.shift = {re, im};
    }
    config.validate();
    return config;
}

void add_common_options(CLI::App* app, CliOptions& opt) {
    app->add_option("--domain", opt.domain, "square | square2 | lshape");
    app->add_option("--pattern", opt.pattern, "diagonal direction: right | left");
    app->add_option("--family", opt.family, "rt | bdm");
    app->add_option("--degree", opt.degree, "family degree (RT: 0..2, BDM: 1..3)");
    app->add_option("--beta", opt.beta, "zero | beta1 | beta2 | beta3 | beta4 | axis");
    app->add_flag("--normalize", opt.normalize, "divide beta by its sup norm");
    app->add_option("--beta-scale", opt.beta_scale, "multiplier on the raw field");
    app->add_option("--nu", opt.nu, "kinematic viscosity");
    app->add_option("--levels", opt.levels, "mesh resolutions N")->delimiter(',');
    app->add_option("--nev", opt.nev, "number of eigenvalues");
    app->add_option("--shift", opt.shift, "auto or re[,im]");
    app->add_option("--out-dir", opt.out_dir, "output directory");
    app->add_option("--seed", opt.seed, "Arnoldi start vector seed");
    app->add_flag("--emit-matrices", opt.emit_matrices, "write MatrixMarket blocks per level");
    app->add_option("--config", opt.config_path,
                    "flat key=value configuration file (command line wins)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed pseudostress eigenvalue solver for the 2D Oseen problem"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* conv = app.add_subcommand("convergence", "level sweep with rate fits");
    add_common_options(conv, opt);
    conv->add_option("--check", opt.check_file, "reference table; exit 4 when violated");

    CliOptions ropt;
    CLI::App* robust = app.add_subcommand("robustness", "viscosity sweep, both scalings");
    add_common_options(robust, ropt);
    robust->add_option("--nu-sweep", ropt.nu_sweep, "exponents j, nu = 2^-j")->delimiter(',');
    robust->add_option("--robust-levels", ropt.robust_levels, "three mesh resolutions")
        ->delimiter(',');

    CliOptions sopt;
    sopt.nev = 50;
    CLI::App* spectrum = app.add_subcommand("spectrum", "eigenvalue cloud at the finest level");
    add_common_options(spectrum, sopt);

    CliOptions mopt;
    CLI::App* mesh_cmd = app.add_subcommand("export-mesh", "write the mesh as plain text");
    add_common_options(mesh_cmd, mopt);

    try {
        // config file first, command line second, so the command line wins
        for (int i = 1; i < argc; ++i) {
            std::string arg = argv[i];
            std::string path;
            if (arg == "--config" && i + 1 < argc)
                path = argv[i + 1];
            else if (arg.rfind("--config=", 0) == 0)
                path = arg.substr(9);
            if (!path.empty())
                for (CliOptions* target : {&opt, &ropt, &sopt, &mopt})
                    apply_config_file(*target, path);
        }
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (conv->parsed()) {
            const oseen::ExperimentConfig config = to_config(opt);
            const oseen::ConvergenceRun run = oseen::run_convergence(config);
            oseen::write_convergence_outputs(run);
            for (std::size_t e = 0; e < run.tracks.size(); ++e) {
                const auto& fit = run.tracks[e].fit;
                std::cout << "eig " << e << ": extr = " << fit.lambda_extr.real();
                if (std::abs(fit.lambda_extr.imag()) > 1e-12)
                    std::cout << (fit.lambda_extr.imag() >= 0 ? "+" : "")
                              << fit.lambda_extr.imag() << "i";
                std::cout << ", order = " << fit.alpha
                          << (fit.monotone_warning ? "  [non-monotone]" : "") << "\n";
            }
            if (!opt.check_file.empty()) {
                std::ifstream ref(opt.check_file);
                if (!ref) {
                    std::cerr << "cannot open reference table " << opt.check_file << "\n";
                    return 2;
                }
                if (!oseen::check_against_reference(run, oseen::read_reference_table(ref),
                                                    std::cout))
                    return 4;
            }
        } else if (robust->parsed()) {
            const oseen::ExperimentConfig config = to_config(ropt);
            const oseen::RobustnessRun run = oseen::run_robustness(config);
            oseen::write_robustness_outputs(run);
            for (const auto& p : run.points)
                std::cout << (p.normalized_scenario ? "sup1 " : "supnu") << " j=" << p.j
                          << (p.instability() ? "  UNSTABLE" : "  stable") << "\n";
        } else if (spectrum->parsed()) {
            const oseen::ExperimentConfig config = to_config(sopt);
            const oseen::SpectrumRun run = oseen::emit_spectrum(config);
            oseen::write_spectrum_outputs(run);
            std::cout << "spectrum: " << run.values.size() << " eigenvalues written\n";
        } else if (mesh_cmd->parsed()) {
            const oseen::ExperimentConfig config = to_config(mopt);
            const oseen::Mesh mesh =
                config.domain == oseen::Domain::Square
                    ? oseen::build_square(config.levels.front(), config.pattern)
                    : (config.domain == oseen::Domain::SquareCentered
                           ? oseen::build_square_centered(config.levels.front(), config.pattern)
                           : oseen::build_lshape(config.levels.front(), config.pattern));
            std::filesystem::create_directories(config.out_dir);
            oseen::write_mesh(mesh, config.out_dir + "/mesh.txt");
            std::cout << "mesh: " << mesh.n_vertices() << " vertices, " << mesh.n_cells()
                      << " cells\n";
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const oseen::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
