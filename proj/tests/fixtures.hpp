#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ifmem/data_io.hpp"

namespace ifmem::testing {

inline std::filesystem::path data_dir() { return IFMEM_DATA_DIR; }

inline const std::vector<std::string>& area_labels() {
    static const std::vector<std::string> labels{"10um", "32um", "100um"};
    return labels;
}

inline GaussianParamSet table1(const std::string& label) {
    return load_gaussian(data_dir() / "table1" / (label + ".json"));
}

inline std::vector<GaussianParamSet> table1_all() {
    std::vector<GaussianParamSet> sets;
    for (const auto& label : area_labels()) sets.push_back(table1(label));
    return sets;
}

inline ModelParameters table1_means(const std::string& label) { return table1(label).means(); }

}  // namespace ifmem::testing
