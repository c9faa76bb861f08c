#pragma once

// Batch experiment front end: JSON configs fully determine a run, results go
// to CSV/JSON/binary files under an output directory, and a manifest with a
// content-hash inventory is written atomically at the end. Identical config
// and seed produce byte-identical data files; the manifest additionally
// carries wall-clock timings and is exempt from that guarantee.

#include "pnlab/corpus.hpp"
#include "pnlab/driver.hpp"
#include "pnlab/field_io.hpp"
#include "pnlab/inequalities.hpp"
#include "pnlab/version.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace pnlab {

using json = nlohmann::json;
namespace fs = std::filesystem;

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind {
    solve,
    verify_embeddings,
    decay_study,
    blowup_study,
    regularization_study,
    sweep,
};

inline ExperimentKind kind_from_string(const std::string& s) {
    if (s == "solve") return ExperimentKind::solve;
    if (s == "verify-embeddings") return ExperimentKind::verify_embeddings;
    if (s == "decay-study") return ExperimentKind::decay_study;
    if (s == "blowup-study") return ExperimentKind::blowup_study;
    if (s == "regularization-study") return ExperimentKind::regularization_study;
    if (s == "sweep") return ExperimentKind::sweep;
    throw ConfigError("unknown experiment kind: " + s);
}

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::solve: return "solve";
        case ExperimentKind::verify_embeddings: return "verify-embeddings";
        case ExperimentKind::decay_study: return "decay-study";
        case ExperimentKind::blowup_study: return "blowup-study";
        case ExperimentKind::regularization_study: return "regularization-study";
        case ExperimentKind::sweep: return "sweep";
    }
    return "unknown";
}

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve;
    std::uint64_t seed = 0;
    int jobs = 0;  // 0: hardware concurrency
    json raw;      // full config echo
};

// ---------------------------------------------------------------------------
// Config parsing with validation-before-compute.

namespace cfg {

inline const json& require_field(const json& j, const std::string& key,
                                 const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(where + ": missing field '" + key + "'");
    return *it;
}

inline double number(const json& j, const std::string& key, const std::string& where,
                     std::optional<double> fallback = std::nullopt) {
    auto it = j.find(key);
    if (it == j.end()) {
        if (fallback) return *fallback;
        throw ConfigError(where + ": missing number '" + key + "'");
    }
    if (!it->is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return it->get<double>();
}

inline Grid parse_grid(const json& j) {
    const int dim = static_cast<int>(number(j, "dim", "grid"));
    const auto& ext = require_field(j, "extent", "grid");
    const auto& n = require_field(j, "n", "grid");
    if (dim == 1) {
        if (ext.size() < 1 || n.size() < 1) throw ConfigError("grid: extent/n need 1 entry");
        return Grid::line(ext[0].get<double>(), n[0].get<int>());
    }
    if (dim == 2) {
        if (ext.size() < 2 || n.size() < 2) throw ConfigError("grid: extent/n need 2 entries");
        return Grid::rectangle(ext[0].get<double>(), ext[1].get<double>(), n[0].get<int>(),
                               n[1].get<int>());
    }
    throw ConfigError("grid: dim must be 1 or 2");
}

inline GridFunction parse_initial_state(const json& j, const Grid& g) {
    if (!j.contains("u0")) return GridFunction(g);
    const json& u0 = j["u0"];
    const std::string type = require_field(u0, "type", "u0").get<std::string>();
    const double amp = number(u0, "amplitude", "u0", 1.0);
    if (type == "zero") return GridFunction(g);
    if (type == "eigenfunction") {
        EigenPair ep = first_eigenpair(g);
        GridFunction v = ep.v1;
        v *= amp;
        return v;
    }
    if (type == "sine") {
        const int k = static_cast<int>(number(u0, "mode", "u0", 1.0));
        return GridFunction::sample(g, [&](double x, double y) {
            double s = amp * std::sin(k * M_PI * x / g.extent(0));
            if (g.dim() == 2) s *= std::sin(k * M_PI * y / g.extent(1));
            return s;
        });
    }
    if (type == "bump") {
        const double a = number(u0, "a", "u0", 2.0);
        const double b = number(u0, "b", "u0", 2.0);
        CorpusEntry e = g.dim() == 1 ? corpus::bump_1d(g.extent(0), a, b, amp)
                                     : corpus::bump_2d(g.extent(0), g.extent(1), a, b, amp);
        return sample(e, g);
    }
    throw ConfigError("u0: unknown type '" + type + "'");
}

inline SourceFn parse_source(const json& j, const Grid& g) {
    if (!j.contains("source")) return {};
    const json& src = j["source"];
    const std::string type = require_field(src, "type", "source").get<std::string>();
    if (type == "zero") return {};
    if (type == "sine") {
        const double amp = number(src, "amplitude", "source", 1.0);
        const int k = static_cast<int>(number(src, "mode", "source", 1.0));
        const double lx = g.extent(0);
        const double ly = g.dim() == 2 ? g.extent(1) : 1.0;
        const int dim = g.dim();
        return [=](double, double x, double y) {
            double s = amp * std::sin(k * M_PI * x / lx);
            if (dim == 2) s *= std::sin(k * M_PI * y / ly);
            return s;
        };
    }
    throw ConfigError("source: unknown type '" + type + "'");
}

inline ProblemSpec parse_problem(const json& root) {
    const json& j = require_field(root, "problem", "config");
    Grid g = parse_grid(require_field(j, "grid", "problem"));
    const double rho = number(j, "rho", "problem");
    const double mu = number(j, "mu", "problem", 0.0);
    const double b0 = number(j, "b0", "problem", 0.0);
    const double T = number(j, "T", "problem");
    ProblemSpec spec(g, rho, j.contains("b_const") ? rho : mu, b0, T);
    if (j.contains("b_const")) {
        const double bc = j["b_const"].get<double>();
        if (bc < 0.0) throw ConfigError("problem: b_const must be >= 0");
        GridFunction b(g);
        for (auto& v : b.values()) v = bc;
        spec.b_coeff = std::move(b);
    }
    spec.u0 = parse_initial_state(j, g);
    spec.source = parse_source(j, g);
    spec.validate();
    return spec;
}

inline SolverConfig parse_solver(const json& root) {
    SolverConfig cfg;
    if (!root.contains("solver")) return cfg;
    const json& j = root["solver"];
    if (j.contains("method")) cfg.method = method_from_string(j["method"].get<std::string>());
    cfg.dt = number(j, "dt", "solver", cfg.dt);
    if (j.contains("galerkin_m")) cfg.galerkin_m = j["galerkin_m"].get<int>();
    if (j.contains("epsilon_schedule"))
        cfg.epsilon_schedule = j["epsilon_schedule"].get<std::vector<double>>();
    if (j.contains("newton_tol")) cfg.newton.tol = j["newton_tol"].get<double>();
    cfg.validate();
    return cfg;
}

}  // namespace cfg

inline ExperimentConfig parse_config(const json& j) {
    ExperimentConfig cfg;
    cfg.kind = kind_from_string(
        cfg::require_field(j, "kind", "config").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.jobs = j.value("jobs", 0);
    cfg.raw = j;
    // parse eagerly so invalid configs fail before any computation
    switch (cfg.kind) {
        case ExperimentKind::solve:
        case ExperimentKind::decay_study:
        case ExperimentKind::blowup_study:
        case ExperimentKind::regularization_study:
            cfg::parse_problem(j);
            cfg::parse_solver(j);
            break;
        case ExperimentKind::verify_embeddings:
            break;
        case ExperimentKind::sweep: {
            if (!j.contains("sweep") || !j["sweep"].contains("base"))
                throw ConfigError("sweep: needs 'sweep.base' (the base config)");
            break;
        }
    }
    return cfg;
}

inline ExperimentConfig load_config_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
    return parse_config(j);
}

// ---------------------------------------------------------------------------
// Output helpers.

namespace out {

inline std::uint64_t fnv1a64_file(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (is.read(buf, sizeof buf) || is.gcount() > 0) {
        for (std::streamsize i = 0; i < is.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
        if (!is) break;
    }
    return h;
}

inline std::string fmt(double v) { return detail::format_double(v); }

class StageClock {
public:
    void begin(const std::string& name) {
        flush();
        current_ = name;
        start_ = std::chrono::steady_clock::now();
    }
    json finish() {
        flush();
        return stages_;
    }

private:
    void flush() {
        if (current_.empty()) return;
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
        stages_.push_back({{"name", current_}, {"seconds", sec}});
        current_.clear();
    }
    std::string current_;
    std::chrono::steady_clock::time_point start_;
    json stages_ = json::array();
};

}  // namespace out

struct RunOutcome {
    int exit_code = 0;
    json verdict;
};

// ---------------------------------------------------------------------------
// Experiment bodies.

namespace detail_exp {

inline void write_trajectory_outputs(const TrajectoryRecord& traj,
                                     const BlowupMonitor& monitor, const fs::path& dir,
                                     int snapshot_stride) {
    {
        std::ofstream os(dir / "diagnostics.csv", std::ios::binary);
        os << "t,phi,s_delta_core,bochner_running,step_residual,newton_iters\n";
        for (const auto& d : traj.diagnostics)
            os << out::fmt(d.t) << ',' << out::fmt(d.phi) << ',' << out::fmt(d.s_delta_core)
               << ',' << out::fmt(d.bochner_running) << ',' << out::fmt(d.step_residual)
               << ',' << d.newton_iters << '\n';
    }
    write_csv(traj.final_state(), (dir / "final_state.csv").string());
    if (snapshot_stride > 0) {
        fs::create_directories(dir / "snapshots");
        for (std::size_t k = 0; k < traj.states.size();
             k += static_cast<std::size_t>(snapshot_stride)) {
            char name[32];
            std::snprintf(name, sizeof name, "state_%06zu.bin", k);
            write_binary(traj.states[k], (dir / "snapshots" / name).string());
        }
    }
    {
        std::ofstream os(dir / "monitor.csv", std::ios::binary);
        os << "t,ip_v1,positivity_functional\n";
        for (std::size_t k = 0; k < monitor.times().size(); ++k)
            os << out::fmt(monitor.times()[k]) << ',' << out::fmt(monitor.ip_v1()[k]) << ','
               << out::fmt(monitor.diagnostic()[k]) << '\n';
    }
}

inline json trajectory_verdict(const RunResult& run) {
    return json{{"status", to_string(run.trajectory.status)},
                {"admissible", run.admissibility.admissible},
                {"admissibility_branch", run.admissibility.branch},
                {"t_star", run.trajectory.blowup_time},
                {"steps", run.trajectory.times.size() - 1},
                {"final_phi", run.trajectory.diagnostics.back().phi},
                {"bochner_final", run.trajectory.diagnostics.back().bochner_running},
                {"note", run.trajectory.failure_note}};
}

// One named verify check bound to a corpus dimensionality.
struct VerifyPlanEntry {
    std::string name;  // file/selection name, parameters included
    int dim;
    std::function<InequalityReport(const TestCorpus&, const std::vector<int>&,
                                   std::optional<FittedConstants>)>
        run;
};

inline std::vector<VerifyPlanEntry> default_verify_plan() {
    using std::vector;
    std::vector<VerifyPlanEntry> plan;
    auto add = [&](std::string name, int dim, auto fn) {
        plan.push_back({std::move(name), dim, fn});
    };
    // 1D
    add("grad-second_a1_b2_b0-2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_by_second_derivatives(c, 1.0, 2.0, 2.0, f, pin);
    });
    add("grad-second_a1_b2_b0-0", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_by_second_derivatives(c, 1.0, 2.0, 0.0, f, pin);
    });
    add("zeroth-by-gradient_a1_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_zeroth_order_by_gradient(c, 1.0, 0.0, 2.0, false, f, pin);
    });
    add("zeroth-by-gradient-wide_a1_b01_b1", 1,
        [](const TestCorpus& c, const vector<int>& f, auto pin) {
            return verify_zeroth_order_by_gradient(c, 1.0, 1.0, 1.0, true, f, pin);
        });
    add("gradient-pair_equal-degree", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_comparison(c, 2.0, 1.0, 1.0, 2.0, f, pin);
    });
    add("func-laplacian_a1_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_function_by_laplacian(c, 1.0, 2.0, f, pin);
    });
    add("func-laplacian_a0_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_function_by_laplacian(c, 0.0, 2.0, f, pin);
    });
    add("grad-power_a1_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_power_split(c, 1.0, 2.0, false, f, pin);
    });
    add("grad-power-pure_a1_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_power_split(c, 1.0, 2.0, true, f, pin);
    });
    add("seminorm-embed_a1b2_a0b3", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_seminorm_embedding(c, PnParams(1, 2), PnParams(0, 3), f, pin);
    });
    add("transform-w2_a2_b2", 1, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_transform_regularity(c, PnParams(2, 2), f, pin);
    });
    // 2D (beta > 2 where the dimension demands it)
    add("grad-second_a1_b2_b0-2", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_by_second_derivatives(c, 1.0, 2.0, 2.0, f, pin);
    });
    add("zeroth-by-gradient_a1_b2", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_zeroth_order_by_gradient(c, 1.0, 0.0, 2.0, false, f, pin);
    });
    add("gradient-pair_equal-degree", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_comparison(c, 2.0, 1.0, 1.0, 2.0, f, pin);
    });
    add("func-laplacian_a1_b2", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_function_by_laplacian(c, 1.0, 2.0, f, pin);
    });
    add("grad-power_a1_b2.5", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_power_split(c, 1.0, 2.5, false, f, pin);
    });
    add("grad-power-pure_a1_b2.5", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_gradient_power_split(c, 1.0, 2.5, true, f, pin);
    });
    add("seminorm-embed_a2b2.5_a0b4.5", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_seminorm_embedding(c, PnParams(2.0, 2.5), PnParams(0.0, 4.5), f, pin);
    });
    add("transform-w2_a2_b2.5", 2, [](const TestCorpus& c, const vector<int>& f, auto pin) {
        return verify_transform_regularity(c, PnParams(2.0, 2.5), f, pin);
    });
    return plan;
}

inline std::string sanitize_filename(std::string s) {
    for (char& c : s)
        if (c == '.' || c == ',' || c == ' ') c = '-';
    return s;
}

}  // namespace detail_exp

// ---------------------------------------------------------------------------

inline RunOutcome run_solve(const ExperimentConfig& cfg, const fs::path& dir) {
    ProblemSpec spec = cfg::parse_problem(cfg.raw);
    SolverConfig solver = cfg::parse_solver(cfg.raw);
    RunResult run = run_trajectory(spec, solver);
    const int stride = cfg.raw.contains("solver")
                           ? cfg.raw["solver"].value("snapshot_stride", 0)
                           : 0;
    detail_exp::write_trajectory_outputs(run.trajectory, run.monitor, dir, stride);
    RunOutcome out;
    out.verdict = detail_exp::trajectory_verdict(run);
    const std::string expected = cfg.raw.value("expected", std::string("completed"));
    const std::string got = to_string(run.trajectory.status);
    out.exit_code = (expected == "any" || got == expected) ? 0 : 1;
    return out;
}

inline RunOutcome run_verify(const ExperimentConfig& cfg, const fs::path& dir) {
    const json verify = cfg.raw.value("verify", json::object());
    const json corpus_cfg = verify.value("corpus", json::object());
    const int n1d = corpus_cfg.value("n1d", 100);
    const int n2d = corpus_cfg.value("n2d", 24);
    const int random_count = corpus_cfg.value("random_count", 5);
    std::vector<int> dims = corpus_cfg.value("dims", std::vector<int>{1, 2});
    std::vector<int> factors = verify.value("refinement_factors", std::vector<int>{1, 2, 4});
    std::vector<std::string> selected =
        verify.value("inequalities", std::vector<std::string>{});
    const json pins = verify.value("pinned_constants", json::object());

    TestCorpus c1 = make_corpus_1d(1.0, n1d, cfg.seed, random_count);
    TestCorpus c2 = make_corpus_2d(1.0, 1.0, n2d, n2d, cfg.seed, random_count);

    auto plan = detail_exp::default_verify_plan();
    json summary = json::array();
    bool any_violation = false;
    bool any_unstable = false;
    for (const auto& entry : plan) {
        if (std::find(dims.begin(), dims.end(), entry.dim) == dims.end()) continue;
        if (!selected.empty()) {
            bool match = false;
            for (const auto& s : selected)
                if (entry.name.rfind(s, 0) == 0) match = true;
            if (!match) continue;
        }
        std::optional<FittedConstants> pinned;
        if (pins.contains(entry.name)) {
            FittedConstants fc;
            fc.c1 = pins[entry.name].value("c1", 0.0);
            fc.c2 = pins[entry.name].value("c2", 0.0);
            pinned = fc;
        }
        const TestCorpus& corpus = entry.dim == 1 ? c1 : c2;
        InequalityReport rep = entry.run(corpus, factors, pinned);
        const std::string fname = std::to_string(entry.dim) + "d_" +
                                  detail_exp::sanitize_filename(entry.name) + ".csv";
        {
            std::ofstream os(dir / fname, std::ios::binary);
            write_report_csv(rep, os);
        }
        json levels = json::array();
        for (const auto& l : rep.refinement)
            levels.push_back({{"factor", l.factor},
                              {"c1", l.constants.c1},
                              {"c2", l.constants.c2}});
        summary.push_back({{"name", entry.name},
                           {"dim", entry.dim},
                           {"id", rep.id},
                           {"c1", rep.fitted.c1},
                           {"c2", rep.fitted.c2},
                           {"refinement", levels},
                           {"max_drift", rep.max_drift},
                           {"refinement_stable", rep.refinement_stable},
                           {"violation", rep.violation},
                           {"violation_note", rep.violation_note},
                           {"max_masked_fraction", rep.max_masked_fraction},
                           {"csv", fname}});
        any_violation |= rep.violation;
        any_unstable |= !rep.refinement_stable;
    }
    RunOutcome out;
    out.verdict = {{"inequalities", summary},
                   {"violations", any_violation},
                   {"refinement_unstable", any_unstable}};
    {
        std::ofstream os(dir / "summary.json", std::ios::binary);
        os << out.verdict.dump(2) << '\n';
    }
    out.exit_code = (any_violation || any_unstable) ? 1 : 0;
    return out;
}

inline RunOutcome run_decay(const ExperimentConfig& cfg, const fs::path& dir) {
    ProblemSpec spec = cfg::parse_problem(cfg.raw);
    SolverConfig solver = cfg::parse_solver(cfg.raw);
    RunResult run = run_trajectory(spec, solver);
    DecayRecord rec = decay_study(run.trajectory, spec);
    {
        std::ofstream os(dir / "decay.csv", std::ios::binary);
        os << "t,phi,envelope,ip_v1\n";
        std::size_t tail_at = 0;
        for (std::size_t k = 0; k < run.trajectory.times.size(); ++k) {
            const double t = run.trajectory.times[k];
            os << out::fmt(t) << ',' << out::fmt(run.trajectory.diagnostics[k].phi) << ',';
            if (tail_at < rec.tail_times.size() &&
                std::abs(rec.tail_times[tail_at] - t) < 1e-12 * std::max(1.0, t)) {
                os << out::fmt(rec.envelope[tail_at]);
                ++tail_at;
            }
            os << ',' << out::fmt(run.monitor.ip_v1()[k]) << '\n';
        }
    }
    RunOutcome out;
    out.verdict = detail_exp::trajectory_verdict(run);
    out.verdict["slope"] = rec.slope;
    out.verdict["expected_slope"] = rec.expected_slope;
    out.verdict["slope_in_band"] = rec.slope_in_band;
    out.verdict["decay_status"] =
        rec.status == DecayRecord::Status::ok ? "ok" : "inconclusive";
    out.verdict["envelope_violation"] = rec.envelope_violation;
    out.verdict["plateau"] = rec.plateau;
    out.verdict["envelope_c1"] = rec.envelope_c1;
    {
        std::ofstream os(dir / "verdict.json", std::ios::binary);
        os << out.verdict.dump(2) << '\n';
    }
    const bool source_free = !spec.has_source() && spec.b0 == 0.0 && !spec.b_coeff;
    bool ok = run.trajectory.status == TerminationStatus::completed &&
              !rec.envelope_violation;
    if (ok && source_free && rec.status == DecayRecord::Status::ok)
        ok = rec.slope_in_band;
    out.exit_code = ok ? 0 : 1;
    return out;
}

inline RunOutcome run_blowup(const ExperimentConfig& cfg, const fs::path& dir) {
    ProblemSpec spec = cfg::parse_problem(cfg.raw);
    SolverConfig solver = cfg::parse_solver(cfg.raw);
    if (!spec.b_coeff)
        throw ConfigError("blowup-study: needs problem.b_const (the b(x) variant)");
    EigenPair eig = first_eigenpair(spec.grid());
    BlowupCriterion crit = classify_regime(spec, eig);
    RunResult run = run_trajectory(spec, solver, &eig);
    detail_exp::write_trajectory_outputs(run.trajectory, run.monitor, dir, 0);

    RunOutcome out;
    out.verdict = detail_exp::trajectory_verdict(run);
    out.verdict["regime"] = to_string(crit.regime);
    out.verdict["M"] = crit.M;
    out.verdict["lambda1"] = crit.lambda1;
    out.verdict["delta"] = crit.delta;
    out.verdict["ip_v1_monotone"] = run.monitor.ip_v1_monotone_increasing();

    std::string expected = cfg.raw.value("expected", std::string("auto"));
    if (expected == "auto")
        expected = crit.regime == Regime::blow_up_candidate ? "blow-up-detected"
                                                            : "completed";
    const std::string got = to_string(run.trajectory.status);
    out.exit_code = (expected == "any" || got == expected) ? 0 : 1;
    out.verdict["expected"] = expected;
    {
        std::ofstream os(dir / "verdict.json", std::ios::binary);
        os << out.verdict.dump(2) << '\n';
    }
    return out;
}

inline RunOutcome run_regularization(const ExperimentConfig& cfg, const fs::path& dir) {
    ProblemSpec spec = cfg::parse_problem(cfg.raw);
    SolverConfig solver = cfg::parse_solver(cfg.raw);
    RegularizedFamily family = solve_elliptic_regularized(spec, solver);

    // time-stepping reference at an 8x finer dt for the epsilon trend
    SolverConfig ref_cfg = solver;
    ref_cfg.method = Method::semi_implicit;
    ref_cfg.dt = solver.dt / 8.0;
    RunResult ref = run_trajectory(spec, ref_cfg);
    TrajectoryRecord ref_coarse = subsample(ref.trajectory, 8);

    json gaps = json::array();
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    const double ref_norm = l2q_norm(ref_coarse);
    for (std::size_t k = 0; k < family.trajectories.size(); ++k) {
        const double gap = l2q_distance(family.trajectories[k], ref_coarse);
        const double rel = ref_norm > 0 ? gap / ref_norm : gap;
        if (rel >= prev) monotone = false;
        prev = rel;
        gaps.push_back({{"epsilon", family.epsilons[k]},
                        {"l2q_gap", gap},
                        {"relative_gap", rel}});
        char name[48];
        std::snprintf(name, sizeof name, "diagnostics_eps%zu.csv", k);
        std::ofstream os(dir / name, std::ios::binary);
        os << "t,phi,s_delta_core\n";
        for (const auto& d : family.trajectories[k].diagnostics)
            os << out::fmt(d.t) << ',' << out::fmt(d.phi) << ','
               << out::fmt(d.s_delta_core) << '\n';
    }
    {
        std::ofstream os(dir / "gaps.csv", std::ios::binary);
        os << "epsilon,l2q_gap,relative_gap\n";
        for (const auto& g : gaps)
            os << out::fmt(g["epsilon"].get<double>()) << ','
               << out::fmt(g["l2q_gap"].get<double>()) << ','
               << out::fmt(g["relative_gap"].get<double>()) << '\n';
    }
    RunOutcome out;
    out.verdict = {{"gaps", gaps},
                   {"monotone_decreasing", monotone},
                   {"complete", family.complete},
                   {"note", family.note}};
    {
        std::ofstream os(dir / "verdict.json", std::ios::binary);
        os << out.verdict.dump(2) << '\n';
    }
    out.exit_code = (family.complete && monotone) ? 0 : 1;
    return out;
}

// forward declaration for sweep recursion
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& dir);

inline RunOutcome run_sweep(const ExperimentConfig& cfg, const fs::path& dir) {
    const json& sw = cfg.raw["sweep"];
    const json base = sw["base"];
    const json axes = sw.value("axes", json::array());

    // cartesian product of the override axes
    struct Point {
        std::string key;
        json config;
    };
    std::vector<Point> points{{"", base}};
    for (const auto& axis : axes) {
        const std::string path = axis["path"].get<std::string>();
        std::vector<Point> next;
        for (const auto& p : points)
            for (const auto& value : axis["values"]) {
                json c = p.config;
                json* node = &c;
                std::string rest = path, token;
                while (!rest.empty()) {
                    const auto dot = rest.find('.');
                    token = rest.substr(0, dot);
                    rest = dot == std::string::npos ? "" : rest.substr(dot + 1);
                    if (rest.empty())
                        (*node)[token] = value;
                    else
                        node = &(*node)[token];
                }
                std::ostringstream key;
                key << p.key << (p.key.empty() ? "" : "_") << token << '='
                    << value.dump();
                next.push_back({key.str(), c});
            }
        points = std::move(next);
    }
    std::sort(points.begin(), points.end(),
              [](const Point& a, const Point& b) { return a.key < b.key; });

    struct PointResult {
        std::string key;
        int exit_code = 0;
        json verdict;
    };
    std::vector<PointResult> results(points.size());
    std::atomic<std::size_t> cursor{0};
    const int jobs = cfg.jobs > 0 ? cfg.jobs
                                  : static_cast<int>(std::thread::hardware_concurrency());
    auto worker = [&]() {
        while (true) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= points.size()) return;
            PointResult& r = results[i];
            r.key = points[i].key.empty() ? "point" : points[i].key;
            const fs::path pdir = dir / "points" / detail_exp::sanitize_filename(r.key);
            fs::create_directories(pdir);
            try {
                ExperimentConfig sub = parse_config(points[i].config);
                sub.seed = cfg.seed;
                RunOutcome o = run_experiment(sub, pdir);
                r.exit_code = o.exit_code;
                r.verdict = o.verdict;
            } catch (const std::exception& e) {
                r.exit_code = 2;
                r.verdict = {{"error", e.what()}};
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < std::max(1, jobs); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    json agg = json::array();
    int exit_code = 0;
    {
        std::ofstream os(dir / "aggregate.csv", std::ios::binary);
        os << "key,exit_code,status\n";
        for (const auto& r : results) {
            os << r.key << ',' << r.exit_code << ','
               << (r.verdict.contains("status") ? r.verdict["status"].get<std::string>()
                                                : std::string("-"))
               << '\n';
            agg.push_back({{"key", r.key}, {"exit_code", r.exit_code}, {"verdict", r.verdict}});
            exit_code = std::max(exit_code, r.exit_code != 0 ? 1 : 0);
        }
    }
    RunOutcome out;
    out.verdict = {{"points", agg}};
    out.exit_code = exit_code;
    return out;
}

/// Execute one experiment into `dir` and write the manifest. The exit code
/// encodes the verdict (0 pass; 1 violation/failure/unexpected regime).
inline RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& dir) {
    fs::create_directories(dir);
    out::StageClock clock;
    clock.begin("run");
    RunOutcome outcome;
    switch (cfg.kind) {
        case ExperimentKind::solve: outcome = run_solve(cfg, dir); break;
        case ExperimentKind::verify_embeddings: outcome = run_verify(cfg, dir); break;
        case ExperimentKind::decay_study: outcome = run_decay(cfg, dir); break;
        case ExperimentKind::blowup_study: outcome = run_blowup(cfg, dir); break;
        case ExperimentKind::regularization_study:
            outcome = run_regularization(cfg, dir);
            break;
        case ExperimentKind::sweep: outcome = run_sweep(cfg, dir); break;
    }
    clock.begin("inventory");

    json files = json::array();
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "manifest.json")
            paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
        char hash[20];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(out::fnv1a64_file(p)));
        files.push_back({{"path", fs::relative(p, dir).generic_string()},
                         {"bytes", fs::file_size(p)},
                         {"fnv1a64", hash}});
    }

    json manifest = {{"version", kVersion},
                     {"kind", to_string(cfg.kind)},
                     {"seed", cfg.seed},
                     {"config", cfg.raw},
                     {"stages", clock.finish()},
                     {"verdict", outcome.verdict},
                     {"exit_code", outcome.exit_code},
                     {"files", files}};
    const fs::path tmp = dir / "manifest.json.tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        os << manifest.dump(2) << '\n';
    }
    fs::rename(tmp, dir / "manifest.json");
    return outcome;
}

}  // namespace pnlab
