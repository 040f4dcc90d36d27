#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "markedtime/lab/lattice.hpp"

namespace markedtime::lab {

struct RandomModelParams {
    int n_steps = 3;
    int n_marks = 2;
    int q_index = 1;
    int scale_index = 0;
    JumpMode jump_mode = JumpMode::at_most_one;
    TauRule tau;
    std::uint64_t kernel_seed = 0;
    /// Set one kernel entry to 0 (negative test of the positivity hypothesis).
    bool zero_kernel_entry = false;
};

RandomModelParams random_model_params(std::uint64_t seed, int max_steps = 6, int max_marks = 3);

template <class T>
LatticeModel<T> make_model(const RandomModelParams& params);

/// The one-step model with K(up, 0) = 4/5 and K(down, 0) = 3/10.
template <class T>
LatticeModel<T> one_step_example();

struct LabSuiteOptions {
    int n_models = 100;
    std::uint64_t seed = 20240611;
    bool rational = true;
    int max_steps = 6;
    int max_marks = 3;
    bool zero_kernel_entry = false;
    /// Models are checked concurrently; the manifest does not depend on it.
    int workers = 0;
};

struct LabSuiteResult {
    nlohmann::ordered_json manifest;
    bool all_pass = false;
    std::string first_failure;
};

/// Runs every exact check on `n_models` random lattices plus the fixed
/// examples. Never throws for model problems: they are reported as failures.
LabSuiteResult run_lab_suite(const LabSuiteOptions& options);

}  // namespace markedtime::lab
