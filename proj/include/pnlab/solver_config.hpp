#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pnlab {

enum class Method { semi_implicit, implicit_newton, galerkin, elliptic_regularized };

inline const char* to_string(Method m) {
    switch (m) {
        case Method::semi_implicit: return "semi-implicit";
        case Method::implicit_newton: return "implicit-newton";
        case Method::galerkin: return "galerkin";
        case Method::elliptic_regularized: return "elliptic-regularized";
    }
    return "unknown";
}

inline Method method_from_string(const std::string& s) {
    if (s == "semi-implicit") return Method::semi_implicit;
    if (s == "implicit-newton") return Method::implicit_newton;
    if (s == "galerkin") return Method::galerkin;
    if (s == "elliptic-regularized") return Method::elliptic_regularized;
    throw std::invalid_argument("unknown solver method: " + s);
}

struct NewtonParams {
    double tol = 1e-10;
    int max_iters = 50;
    double damping = 0.5;
};

struct SolverConfig {
    Method method = Method::semi_implicit;
    double dt = 1e-2;
    NewtonParams newton;
    int galerkin_m = 8;
    std::vector<double> epsilon_schedule = {0.1, 0.05, 0.025, 0.0125};
    int max_step_halvings = 10;
    // Reject a step that grows max|u| by more than this factor. Smooth ramps
    // from rest stay below 2 per step; runs approaching a singularity exceed
    // it well before a fixed-dt step could jump across.
    double growth_reject_factor = 2.5;
    // Linearization guard for the lagged scheme: when dt times the reaction
    // rate gets large, the step is cross-checked against the fully implicit
    // one and rejected when they disagree by this relative amount (or when
    // the implicit root is lost, the signature of a singularity).
    double step_error_reject_tol = 0.1;
    double blowup_amplitude_factor = 1e6;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("SolverConfig: dt must be > 0");
        if (galerkin_m < 1) throw std::invalid_argument("SolverConfig: need m >= 1 modes");
        for (double e : epsilon_schedule)
            if (!(e > 0.0))
                throw std::invalid_argument("SolverConfig: epsilon values must be > 0");
        for (std::size_t i = 0; i + 1 < epsilon_schedule.size(); ++i)
            if (epsilon_schedule[i + 1] >= epsilon_schedule[i])
                throw std::invalid_argument(
                    "SolverConfig: epsilon schedule must be strictly decreasing");
    }
};

}  // namespace pnlab
