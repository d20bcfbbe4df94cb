#pragma once

// Experiment driver: level sweeps with eigenvalue continuation, convergence
// fits, the viscosity robustness study, and spectrum emission, plus the
// CSV/JSON/table-check output machinery used by the command line tool.

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oseen/convection.hpp"
#include "oseen/diagnostics.hpp"
#include "oseen/eigensolver.hpp"
#include "oseen/mesh.hpp"
#include "oseen/postprocess.hpp"

namespace oseen {

struct ExperimentConfig {
    Domain domain = Domain::Square;
    DiagonalPattern pattern = DiagonalPattern::Right;
    Family family = Family::RT;
    int degree = 0;
    BetaId beta = BetaId::Beta1;
    bool normalize = false;
    double beta_scale = 1.0;
    double nu = 0.5;
    std::vector<int> levels = {20, 30, 40, 50};
    int nev = 4;
    std::complex<double> shift{0.0, 0.0};
    bool shift_auto = true;
    std::string out_dir;
    std::uint64_t seed = 13;
    bool emit_matrices = false;
    int constants_max_nsigma = 4000;
    std::vector<int> nu_sweep = {0, 1, 2, 3, 4, 5, 6, 7, 8};
    std::vector<int> robust_levels = {8, 16, 24};

    void validate() const {
        if (!(nu > 0.0)) throw std::invalid_argument("config: nu must be positive");
        if (nev < 1) throw std::invalid_argument("config: nev must be >= 1");
        if (levels.empty()) throw std::invalid_argument("config: levels must not be empty");
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (levels[i] < 1) throw std::invalid_argument("config: levels must be >= 1");
            if (i > 0 && levels[i] <= levels[i - 1])
                throw std::invalid_argument("config: levels must be strictly increasing");
        }
    }
};

struct LevelResult {
    int N = 0;
    double h = 0.0;
    int n_sigma = 0;
    int n_u = 0;
    long dof_interface = 0;  // n_sigma + n_u (the accounting used by references)
    long dof_total = 0;      // including the trace multiplier
    std::vector<EigenPair> pairs;
};

struct EigTrack {
    std::vector<std::complex<double>> lambdas;  // one per level
    FitResult fit;
    FitResult fit_last3;
};

struct ConvergenceRun {
    ExperimentConfig config;
    double shift_used = 0.0;
    double beta_sup = 0.0;
    std::vector<LevelResult> levels;
    std::vector<EigTrack> tracks;
    std::optional<ConstantsReport> constants;
};

namespace detail {

inline Mesh build_domain_mesh(const ExperimentConfig& config, int N) {
    switch (config.domain) {
        case Domain::Square: return build_square(N, config.pattern);
        case Domain::SquareCentered: return build_square_centered(N, config.pattern);
        default: return build_lshape(N, config.pattern);
    }
}

inline LevelResult run_level(const ExperimentConfig& config, int N, std::complex<double> shift,
                             const std::string& matrix_dir = {}) {
    const Mesh mesh = build_domain_mesh(config, N);
    const SpacePair space = build_space_pair(mesh, config.family, config.degree);
    const ConvectionField beta =
        make_convection_field(config.beta, config.domain, config.beta_scale, config.normalize);
    const SparseSystem sys = assemble_forms(space, beta, config.nu);
    if (!matrix_dir.empty()) {
        std::filesystem::create_directories(matrix_dir);
        write_matrix_market(sys.A, matrix_dir + "/A.mtx");
        write_matrix_market(sys.B, matrix_dir + "/B.mtx");
        write_matrix_market(sys.C, matrix_dir + "/C.mtx");
        write_matrix_market(sys.M, matrix_dir + "/M.mtx");
        write_matrix_market(sys.g, matrix_dir + "/g.mtx");
    }
    const EigenProblem problem = build_eigen_problem(sys, shift, config.nev, config.seed);
    LevelResult level;
    level.N = N;
    level.h = mesh.h_max;
    level.n_sigma = space.n_sigma;
    level.n_u = space.n_u;
    level.dof_interface = space.n_sigma + space.n_u;
    level.dof_total = space.n_sigma + space.n_u + 1;
    level.pairs = solve_shift_invert(problem);
    return level;
}

inline int spectrum_class(std::complex<double> v) {
    if (std::abs(v.imag()) <= 1e-6 * std::max(1.0, std::abs(v))) return 0;
    return v.imag() > 0.0 ? 1 : -1;
}

// Greedy nearest-neighbor continuation; real eigenvalues prefer real
// candidates so a conjugate-pair member never swaps with a real mode.
inline std::vector<int> match_tracks(const std::vector<std::complex<double>>& prev,
                                     const std::vector<std::complex<double>>& cands) {
    const std::size_t n = prev.size();
    std::vector<int> assignment(n, -1);
    std::vector<bool> used(cands.size(), false);
    for (std::size_t pick = 0; pick < n; ++pick) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = n, bj = cands.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (assignment[i] >= 0) continue;
            for (std::size_t j = 0; j < cands.size(); ++j) {
                if (used[j]) continue;
                double cost = std::abs(prev[i] - cands[j]);
                if (spectrum_class(prev[i]) != spectrum_class(cands[j]))
                    cost += 1e6 * (1.0 + std::abs(prev[i]));
                if (cost < best) {
                    best = cost;
                    bi = i;
                    bj = j;
                }
            }
        }
        if (bi == n) break;
        assignment[bi] = static_cast<int>(bj);
        used[bj] = true;
    }
    return assignment;
}

inline double auto_shift(const ExperimentConfig& config) {
    ExperimentConfig coarse = config;
    coarse.nev = std::max(1, std::min(config.nev, 4));
    const LevelResult probe = run_level(coarse, config.levels.front(), {0.0, 0.0});
    if (probe.pairs.empty()) throw SolverError("auto shift: no eigenvalues at the coarsest level");
    return 0.8 * std::abs(probe.pairs.front().lambda);
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline ConvergenceRun run_convergence(const ExperimentConfig& config) {
    config.validate();
    ConvergenceRun run;
    run.config = config;
    const std::complex<double> shift =
        config.shift_auto ? std::complex<double>(detail::auto_shift(config), 0.0) : config.shift;
    run.shift_used = shift.real();
    run.beta_sup =
        make_convection_field(config.beta, config.domain, config.beta_scale, config.normalize)
            .sup_norm;

    for (std::size_t li = 0; li < config.levels.size(); ++li) {
        const int N = config.levels[li];
        std::string matrix_dir;
        if (config.emit_matrices && !config.out_dir.empty())
            matrix_dir = config.out_dir + "/matrices_N" + std::to_string(N);
        run.levels.push_back(detail::run_level(config, N, shift, matrix_dir));
        if (static_cast<int>(run.levels.back().pairs.size()) < config.nev)
            throw SolverError("level N=" + std::to_string(N) + " produced fewer than nev pairs");
    }

    // continuation from the coarsest level
    run.tracks.resize(static_cast<std::size_t>(config.nev));
    std::vector<std::complex<double>> current(static_cast<std::size_t>(config.nev));
    for (int e = 0; e < config.nev; ++e) {
        current[static_cast<std::size_t>(e)] = run.levels.front().pairs[static_cast<std::size_t>(e)].lambda;
        run.tracks[static_cast<std::size_t>(e)].lambdas.push_back(current[static_cast<std::size_t>(e)]);
    }
    for (std::size_t li = 1; li < run.levels.size(); ++li) {
        std::vector<std::complex<double>> cands;
        for (const auto& p : run.levels[li].pairs) cands.push_back(p.lambda);
        const std::vector<int> pick = detail::match_tracks(current, cands);
        for (int e = 0; e < config.nev; ++e) {
            const int j = pick[static_cast<std::size_t>(e)];
            if (j < 0)
                throw SolverError("eigenvalue continuation lost track " + std::to_string(e));
            current[static_cast<std::size_t>(e)] = cands[static_cast<std::size_t>(j)];
            run.tracks[static_cast<std::size_t>(e)].lambdas.push_back(current[static_cast<std::size_t>(e)]);
        }
    }

    if (run.levels.size() >= 3) {
        for (auto& track : run.tracks) {
            std::vector<FitLevel> data;
            for (std::size_t li = 0; li < run.levels.size(); ++li)
                data.push_back({run.levels[li].h, track.lambdas[li]});
            track.fit = fit_rate(data);
            if (data.size() > 3) {
                std::vector<FitLevel> tail(data.end() - 3, data.end());
                track.fit_last3 = fit_rate(tail);
            } else {
                track.fit_last3 = track.fit;
            }
        }
    }

    if (run.levels.front().n_sigma <= config.constants_max_nsigma) {
        const Mesh mesh = detail::build_domain_mesh(config, config.levels.front());
        const SpacePair space = build_space_pair(mesh, config.family, config.degree);
        const ConvectionField beta =
            make_convection_field(config.beta, config.domain, config.beta_scale, config.normalize);
        const SparseSystem sys = assemble_forms(space, beta, config.nu);
        run.constants = estimate_constants(sys, space, beta.sup_norm);
    }
    return run;
}

// ---------------------------------------------------------------------------
// Robustness sweep: beta = nu (1,0), either renormalized to sup norm 1 or
// kept at sup norm nu, for nu = 2^{-j}.

struct RobustnessPoint {
    int j = 0;
    double nu = 0.0;
    bool normalized_scenario = false;  // true: |beta| = 1, false: |beta| = nu
    std::vector<double> orders;
    std::vector<std::complex<double>> extrapolated;
    bool negative_eigenvalue = false;
    bool failed_fit = false;
    bool solver_failed = false;
    std::string failure;

    bool instability() const { return negative_eigenvalue || failed_fit || solver_failed; }
};

struct RobustnessRun {
    ExperimentConfig config;
    std::vector<RobustnessPoint> points;
};

inline RobustnessRun run_robustness(const ExperimentConfig& base) {
    RobustnessRun run;
    run.config = base;
    for (const bool normalized : {true, false}) {
        for (const int j : base.nu_sweep) {
            RobustnessPoint point;
            point.j = j;
            point.nu = std::ldexp(1.0, -j);
            point.normalized_scenario = normalized;
            ExperimentConfig config = base;
            config.beta = BetaId::AxisConstant;
            config.beta_scale = point.nu;
            config.normalize = normalized;
            config.nu = point.nu;
            config.levels = base.robust_levels;
            config.nev = 4;
            try {
                const ConvergenceRun conv = run_convergence(config);
                for (const auto& track : conv.tracks) {
                    point.orders.push_back(track.fit.alpha);
                    point.extrapolated.push_back(track.fit.lambda_extr);
                    if (track.fit.monotone_warning || track.fit.alpha <= 0.52 ||
                        track.fit.alpha >= 7.98)
                        point.failed_fit = true;
                    for (const auto& lambda : track.lambdas)
                        if (lambda.real() < 0.0) point.negative_eigenvalue = true;
                }
            } catch (const std::exception& e) {
                point.solver_failed = true;
                point.failure = e.what();
            }
            run.points.push_back(std::move(point));
        }
    }
    return run;
}

// ---------------------------------------------------------------------------
// Spectrum emission.

struct SpectrumRun {
    ExperimentConfig config;
    int N = 0;
    std::vector<std::complex<double>> values;  // sorted, conjugate-symmetric
    int dropped_unpaired = 0;
};

inline SpectrumRun emit_spectrum(const ExperimentConfig& config) {
    config.validate();
    SpectrumRun run;
    run.config = config;
    run.N = config.levels.back();
    const std::complex<double> shift =
        config.shift_auto ? std::complex<double>(detail::auto_shift(config), 0.0) : config.shift;
    const LevelResult level = detail::run_level(config, run.N, shift);
    std::vector<std::complex<double>> values;
    for (const auto& p : level.pairs) values.push_back(p.lambda);
    values.resize(std::min(values.size(), static_cast<std::size_t>(config.nev)));

    // conjugate symmetry check: drop members whose partner did not converge
    std::vector<std::complex<double>> kept;
    for (const auto& v : values) {
        if (detail::spectrum_class(v) == 0) {
            kept.push_back(v);
            continue;
        }
        bool paired = false;
        for (const auto& w : values)
            if (&w != &v && is_conjugate_pair(v, w)) paired = true;
        if (paired)
            kept.push_back(v);
        else
            ++run.dropped_unpaired;
    }
    run.values = filter_spectrum(kept);
    return run;
}

// ---------------------------------------------------------------------------
// Writers. All numeric output uses 17 significant digits and no timestamps,
// so identical configs and seeds produce byte-identical files.

inline void write_convergence_csv(const ConvergenceRun& run, std::ostream& out) {
    out << "level,N,h,dof,eig_index,re,im,alpha,extr_re,extr_im,fit_residual\n";
    using detail::format_double;
    for (std::size_t li = 0; li < run.levels.size(); ++li) {
        const LevelResult& level = run.levels[li];
        for (std::size_t e = 0; e < run.tracks.size(); ++e) {
            const EigTrack& track = run.tracks[e];
            out << li << "," << level.N << "," << format_double(level.h) << ","
                << level.dof_total << "," << e << ","
                << format_double(track.lambdas[li].real()) << ","
                << format_double(track.lambdas[li].imag()) << ","
                << format_double(track.fit.alpha) << ","
                << format_double(track.fit.lambda_extr.real()) << ","
                << format_double(track.fit.lambda_extr.imag()) << ","
                << format_double(track.fit.fit_residual) << "\n";
        }
    }
}

inline nlohmann::ordered_json config_to_json(const ExperimentConfig& config) {
    nlohmann::ordered_json j;
    j["domain"] = config.domain == Domain::Square
                      ? "square"
                      : (config.domain == Domain::SquareCentered ? "square2" : "lshape");
    j["pattern"] = config.pattern == DiagonalPattern::Right ? "right" : "left";
    j["family"] = config.family == Family::RT ? "rt" : "bdm";
    j["degree"] = config.degree;
    j["beta"] = to_string(config.beta);
    j["normalize"] = config.normalize;
    j["beta_scale"] = config.beta_scale;
    j["nu"] = config.nu;
    j["levels"] = config.levels;
    j["nev"] = config.nev;
    j["seed"] = config.seed;
    return j;
}

inline nlohmann::ordered_json constants_to_json(const ConstantsReport& c) {
    nlohmann::ordered_json j;
    j["gamma_h"] = c.gamma_h;
    j["c1_h"] = c.c1_h;
    j["contraction_L"] = c.contraction_L;
    j["cj_h"] = c.cj_h;
    j["uniqueness_ratio"] = c.uniqueness_ratio;
    j["contraction_ok"] = c.contraction_ok;
    j["uniqueness_ok"] = c.uniqueness_ok;
    j["f_norm"] = c.f_norm;
    j["r0_window_feasible"] = c.r0_window_feasible;
    j["r0_upper"] = c.r0_upper;
    j["n_sigma"] = c.n_sigma;
    j["n_u"] = c.n_u;
    return j;
}

inline nlohmann::ordered_json convergence_to_json(const ConvergenceRun& run) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(run.config);
    j["shift_used"] = run.shift_used;
    j["beta_sup_norm"] = run.beta_sup;
    j["levels"] = nlohmann::ordered_json::array();
    for (const auto& level : run.levels) {
        nlohmann::ordered_json lj;
        lj["N"] = level.N;
        lj["h"] = level.h;
        lj["dof"] = level.dof_interface;
        lj["dof_total"] = level.dof_total;
        lj["n_sigma"] = level.n_sigma;
        lj["n_u"] = level.n_u;
        lj["eigenvalues"] = nlohmann::ordered_json::array();
        for (const auto& p : level.pairs) {
            nlohmann::ordered_json ej;
            ej["re"] = p.lambda.real();
            ej["im"] = p.lambda.imag();
            ej["residual"] = p.residual;
            lj["eigenvalues"].push_back(ej);
        }
        j["levels"].push_back(lj);
    }
    j["tracks"] = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < run.tracks.size(); ++e) {
        const EigTrack& track = run.tracks[e];
        nlohmann::ordered_json tj;
        tj["eig_index"] = e;
        tj["lambdas"] = nlohmann::ordered_json::array();
        for (const auto& l : track.lambdas) {
            nlohmann::ordered_json lj;
            lj["re"] = l.real();
            lj["im"] = l.imag();
            tj["lambdas"].push_back(lj);
        }
        tj["alpha"] = track.fit.alpha;
        tj["alpha_last3"] = track.fit_last3.alpha;
        tj["extr_re"] = track.fit.lambda_extr.real();
        tj["extr_im"] = track.fit.lambda_extr.imag();
        tj["fit_residual"] = track.fit.fit_residual;
        tj["monotone_warning"] = track.fit.monotone_warning;
        j["tracks"].push_back(tj);
    }
    j["constants"] = run.constants ? constants_to_json(*run.constants) : nlohmann::ordered_json();
    return j;
}

inline nlohmann::ordered_json robustness_to_json(const RobustnessRun& run) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(run.config);
    j["points"] = nlohmann::ordered_json::array();
    for (const auto& p : run.points) {
        nlohmann::ordered_json pj;
        pj["scenario"] = p.normalized_scenario ? "sup1" : "supnu";
        pj["j"] = p.j;
        pj["nu"] = p.nu;
        pj["orders"] = p.orders;
        pj["extr_re"] = nlohmann::ordered_json::array();
        pj["extr_im"] = nlohmann::ordered_json::array();
        for (const auto& l : p.extrapolated) {
            pj["extr_re"].push_back(l.real());
            pj["extr_im"].push_back(l.imag());
        }
        pj["negative_eigenvalue"] = p.negative_eigenvalue;
        pj["failed_fit"] = p.failed_fit;
        pj["solver_failed"] = p.solver_failed;
        pj["instability"] = p.instability();
        if (!p.failure.empty()) pj["failure"] = p.failure;
        j["points"].push_back(pj);
    }
    return j;
}

inline void write_robustness_csv(const RobustnessRun& run, std::ostream& out) {
    out << "scenario,j,nu,eig_index,alpha,extr_re,extr_im,negative_eigenvalue,failed_fit,"
           "solver_failed\n";
    using detail::format_double;
    for (const auto& p : run.points) {
        for (std::size_t e = 0; e < p.orders.size(); ++e) {
            out << (p.normalized_scenario ? "sup1" : "supnu") << "," << p.j << ","
                << format_double(p.nu) << "," << e << "," << format_double(p.orders[e]) << ","
                << format_double(p.extrapolated[e].real()) << ","
                << format_double(p.extrapolated[e].imag()) << "," << p.negative_eigenvalue << ","
                << p.failed_fit << "," << p.solver_failed << "\n";
        }
        if (p.orders.empty())
            out << (p.normalized_scenario ? "sup1" : "supnu") << "," << p.j << ","
                << format_double(p.nu) << ",,,,," << p.negative_eigenvalue << "," << p.failed_fit
                << "," << p.solver_failed << "\n";
    }
}

inline void write_spectrum_file(const SpectrumRun& run, std::ostream& out) {
    for (const auto& v : run.values)
        out << detail::format_double(v.real()) << " " << detail::format_double(v.imag()) << "\n";
}

inline std::vector<std::complex<double>> read_spectrum_file(std::istream& in) {
    std::vector<std::complex<double>> values;
    double re = 0.0, im = 0.0;
    while (in >> re >> im) values.emplace_back(re, im);
    return values;
}

// ---------------------------------------------------------------------------
// Reference-table check. Line format (comments start with '#'):
//   eig_index  extr_re  extr_im  extr_tol  alpha_lo  alpha_hi

struct ReferenceRow {
    int eig_index = 0;
    std::complex<double> extr;
    double extr_tol = 0.0;
    double alpha_lo = 0.0;
    double alpha_hi = 0.0;
};

inline std::vector<ReferenceRow> read_reference_table(std::istream& in) {
    std::vector<ReferenceRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        ReferenceRow row;
        double re = 0.0, im = 0.0;
        if (ls >> row.eig_index >> re >> im >> row.extr_tol >> row.alpha_lo >> row.alpha_hi) {
            row.extr = {re, im};
            rows.push_back(row);
        }
    }
    return rows;
}

inline bool check_against_reference(const ConvergenceRun& run,
                                    const std::vector<ReferenceRow>& rows, std::ostream& log) {
    bool ok = true;
    for (const auto& row : rows) {
        if (row.eig_index < 0 || row.eig_index >= static_cast<int>(run.tracks.size())) {
            log << "check: eig_index " << row.eig_index << " out of range\n";
            ok = false;
            continue;
        }
        const EigTrack& track = run.tracks[static_cast<std::size_t>(row.eig_index)];
        const double err = std::abs(track.fit.lambda_extr - row.extr);
        const bool extr_ok = err <= row.extr_tol;
        const bool alpha_ok = track.fit.alpha >= row.alpha_lo && track.fit.alpha <= row.alpha_hi;
        log << "check eig " << row.eig_index << ": |extr - ref| = " << err
            << (extr_ok ? " <= " : " > ") << row.extr_tol << ", alpha = " << track.fit.alpha
            << (alpha_ok ? " in [" : " NOT in [") << row.alpha_lo << ", " << row.alpha_hi << "]\n";
        ok = ok && extr_ok && alpha_ok;
    }
    return ok;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << content;
}

inline void write_convergence_outputs(const ConvergenceRun& run) {
    if (run.config.out_dir.empty()) return;
    std::filesystem::create_directories(run.config.out_dir);
    std::ostringstream csv;
    write_convergence_csv(run, csv);
    write_file(run.config.out_dir + "/convergence.csv", csv.str());
    write_file(run.config.out_dir + "/convergence.json", convergence_to_json(run).dump(2) + "\n");
}

inline void write_robustness_outputs(const RobustnessRun& run) {
    if (run.config.out_dir.empty()) return;
    std::filesystem::create_directories(run.config.out_dir);
    std::ostringstream csv;
    write_robustness_csv(run, csv);
    write_file(run.config.out_dir + "/robustness.csv", csv.str());
    write_file(run.config.out_dir + "/robustness.json", robustness_to_json(run).dump(2) + "\n");
}

inline void write_spectrum_outputs(const SpectrumRun& run) {
    if (run.config.out_dir.empty()) return;
    std::filesystem::create_directories(run.config.out_dir);
    std::ostringstream dat;
    write_spectrum_file(run, dat);
    write_file(run.config.out_dir + "/spectrum.dat", dat.str());
    nlohmann::ordered_json j;
    j["config"] = config_to_json(run.config);
    j["N"] = run.N;
    j["dropped_unpaired"] = run.dropped_unpaired;
    j["values"] = nlohmann::ordered_json::array();
    for (const auto& v : run.values) {
        nlohmann::ordered_json vj;
        vj["re"] = v.real();
        vj["im"] = v.imag();
        j["values"].push_back(vj);
    }
    write_file(run.config.out_dir + "/spectrum.json", j.dump(2) + "\n");
}

}  // namespace oseen
