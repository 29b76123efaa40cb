#include "ifmem/objective.hpp"

#include <cmath>
#include <string>

#include "ifmem/errors.hpp"

namespace ifmem {
namespace {

void require_same_length(std::size_t a, std::size_t b) {
    if (a != b) {
        throw AlignmentError("trace lengths differ: " + std::to_string(a) + " vs " +
                             std::to_string(b));
    }
    if (a == 0) throw AlignmentError("traces are empty");
}

void require_aligned(const IVTrace& simulated, const IVTrace& measured) {
    require_same_length(simulated.current.size(), measured.current.size());
    if (simulated.time.size() != simulated.current.size() ||
        measured.time.size() != measured.current.size()) {
        throw AlignmentError("time and current columns differ in length");
    }
    const double step = measured.dt > 0.0 ? measured.dt : simulated.dt;
    if (!(step > 0.0)) return;  // single-sample traces
    for (std::size_t i = 0; i < measured.time.size(); ++i) {
        if (std::abs(simulated.time[i] - measured.time[i]) >= step / 2.0) {
            throw AlignmentError("traces misaligned at sample " + std::to_string(i));
        }
    }
}

double abs_error_sum(std::span<const double> a, std::span<const double> b) {
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(a[i] - b[i]);
    return total;
}

}  // namespace

double mae(std::span<const double> simulated, std::span<const double> measured) {
    require_same_length(simulated.size(), measured.size());
    return abs_error_sum(simulated, measured) / static_cast<double>(measured.size());
}

double mpe(std::span<const double> simulated, std::span<const double> measured) {
    require_same_length(simulated.size(), measured.size());
    double norm = 0.0;
    for (double m : measured) norm += std::abs(m);
    if (norm == 0.0) throw NormalizationError("MPE undefined: measured current is zero everywhere");
    return 100.0 * abs_error_sum(simulated, measured) / norm;
}

double mae(const IVTrace& simulated, const IVTrace& measured) {
    require_aligned(simulated, measured);
    return mae(std::span<const double>(simulated.current), std::span<const double>(measured.current));
}

double mpe(const IVTrace& simulated, const IVTrace& measured) {
    require_aligned(simulated, measured);
    return mpe(std::span<const double>(simulated.current), std::span<const double>(measured.current));
}

}  // namespace ifmem
