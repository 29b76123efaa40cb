#include "ifmem/params.hpp"

#include <cmath>
#include <string>

#include "ifmem/errors.hpp"

namespace ifmem {
namespace {

constexpr std::array<std::string_view, kParamCount> kNames = {
    "A_p",     "A_n",     "V_p",     "V_n",     "x_p",     "x_n",     "alpha_p", "alpha_n",
    "g_max_p", "b_max_p", "g_max_n", "b_max_n", "g_min_p", "b_min_p", "g_min_n", "b_min_n",
};

using Member = double ModelParameters::*;

constexpr std::array<Member, kParamCount> kMembers = {
    &ModelParameters::A_p,     &ModelParameters::A_n,     &ModelParameters::V_p,
    &ModelParameters::V_n,     &ModelParameters::x_p,     &ModelParameters::x_n,
    &ModelParameters::alpha_p, &ModelParameters::alpha_n, &ModelParameters::g_max_p,
    &ModelParameters::b_max_p, &ModelParameters::g_max_n, &ModelParameters::b_max_n,
    &ModelParameters::g_min_p, &ModelParameters::b_min_p, &ModelParameters::g_min_n,
    &ModelParameters::b_min_n,
};

}  // namespace

std::string_view param_name(ParamId id) { return kNames[static_cast<std::size_t>(id)]; }

std::optional<ParamId> param_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kParamCount; ++i) {
        if (kNames[i] == name) return static_cast<ParamId>(i);
    }
    return std::nullopt;
}

double& ModelParameters::operator[](ParamId id) {
    return this->*kMembers[static_cast<std::size_t>(id)];
}

double ModelParameters::operator[](ParamId id) const {
    return this->*kMembers[static_cast<std::size_t>(id)];
}

bool admissible(ParamId id, double value) {
    if (!std::isfinite(value)) return false;
    if (is_window_onset(id)) return value > 0.0 && value < 1.0;
    return value >= 0.0;
}

void validate(const ModelParameters& p) {
    for (ParamId id : kAllParams) {
        if (!admissible(id, p[id])) {
            const std::string range = is_window_onset(id) ? "in (0, 1)" : "finite and >= 0";
            throw DomainError("parameter " + std::string(param_name(id)) + " = " +
                              std::to_string(p[id]) + " must be " + range);
        }
    }
    if (p.eta != Polarity::positive && p.eta != Polarity::negative) {
        throw DomainError("eta must be +1 or -1");
    }
    if (!std::isfinite(p.x0) || p.x0 < 0.0 || p.x0 > 1.0) {
        throw DomainError("x0 = " + std::to_string(p.x0) + " must be in [0, 1]");
    }
}

}  // namespace ifmem
