#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace ifmem {

/// Identifies one of the sixteen fitted model coefficients.
enum class ParamId : std::size_t {
    A_p,
    A_n,
    V_p,
    V_n,
    x_p,
    x_n,
    alpha_p,
    alpha_n,
    g_max_p,
    b_max_p,
    g_max_n,
    b_max_n,
    g_min_p,
    b_min_p,
    g_min_n,
    b_min_n,
};

inline constexpr std::size_t kParamCount = 16;

inline constexpr std::array<ParamId, kParamCount> kAllParams = {
    ParamId::A_p,     ParamId::A_n,     ParamId::V_p,     ParamId::V_n,
    ParamId::x_p,     ParamId::x_n,     ParamId::alpha_p, ParamId::alpha_n,
    ParamId::g_max_p, ParamId::b_max_p, ParamId::g_max_n, ParamId::b_max_n,
    ParamId::g_min_p, ParamId::b_min_p, ParamId::g_min_n, ParamId::b_min_n,
};

std::string_view param_name(ParamId id);
std::optional<ParamId> param_from_name(std::string_view name);

/// Window onsets live in the open interval (0, 1); every other coefficient
/// is a non-negative magnitude.
constexpr bool is_window_onset(ParamId id) {
    return id == ParamId::x_p || id == ParamId::x_n;
}

/// Direction of state motion relative to the threshold function.
enum class Polarity : int { positive = 1, negative = -1 };

constexpr double sign_of(Polarity p) { return p == Polarity::positive ? 1.0 : -1.0; }

/// Full coefficient vector of the compact model plus the polarity of state
/// motion and the initial state.
struct ModelParameters {
    double A_p = 0.0;
    double A_n = 0.0;
    double V_p = 0.0;
    double V_n = 0.0;
    double x_p = 0.5;
    double x_n = 0.5;
    double alpha_p = 0.0;
    double alpha_n = 0.0;

    double g_max_p = 0.0;  // LRS forward, tunnelling
    double b_max_p = 0.0;
    double g_max_n = 0.0;  // LRS reverse, Schottky-like
    double b_max_n = 0.0;
    double g_min_p = 0.0;  // HRS forward, Schottky-like
    double b_min_p = 0.0;
    double g_min_n = 0.0;  // HRS reverse, tunnelling
    double b_min_n = 0.0;

    Polarity eta = Polarity::positive;
    double x0 = 0.0;

    double& operator[](ParamId id);
    double operator[](ParamId id) const;

    friend bool operator==(const ModelParameters&, const ModelParameters&) = default;
};

/// Throws DomainError describing the first violated invariant.
void validate(const ModelParameters& p);

/// Whether `value` is admissible for parameter `id` in isolation.
bool admissible(ParamId id, double value);

}  // namespace ifmem
