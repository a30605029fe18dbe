#pragma once

#include "rislab/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace rislab {

struct SchemaError {
    std::string path, expected, found;
};

struct config_error : std::runtime_error {
    std::vector<SchemaError> errors;
    explicit config_error(std::vector<SchemaError> e);
};

struct NumericSection {
    int s_nodes = 201;
    double alpha_min = -3, alpha_max = 2;
    int alpha_nodes = 101;
    std::vector<int> T_list = {50, 100, 200, 400, 800};
    std::vector<double> alpha_list = {0.0, 0.5};
    int T = 400;                // simulate / balance horizon when a single T is wanted
    int n = 2000;
    std::uint64_t seed = 7;
    std::string rho_i = "invariant";  // invariant | maximally_mixed | explicit
    cmat rho_i_matrix;
};

struct OutputSection {
    std::string directory = "out";
    bool csv = true;
};

struct RunConfig {
    RISModel model;
    std::string task;
    NumericSection numeric;
    OutputSection output;
    std::string source;  // canonical JSON text the run was built from
};

inline const std::vector<std::string> kTasks = {"spectrum", "lambda", "ldp", "simulate", "adiabatic", "balance", "x0"};

RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& json_text);
std::string serialize_config(const RunConfig& c);

std::vector<double> alpha_grid(const NumericSection& n);
cmat initial_state(const RunConfig& c);

struct RunResult {
    int status = 0;
    std::string reason;
    std::vector<std::string> files;
};

RunResult run_task(const RunConfig& c);

}  // namespace rislab
