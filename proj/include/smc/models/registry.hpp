#pragma once

#include <map>
#include <string>
#include <vector>

#include "smc/sim/simulator.hpp"

namespace smc::models {

/// A model chosen by name plus string parameters, as given on the command
/// line or in a config file. Names: "kelly", "crra", "iidNormal", "ar1",
/// "constant", "counter", or an external spec "exec:<cmd>" / "tcp:<host>:<port>".
struct ModelSpec {
    std::string name = "kelly";
    std::map<std::string, std::string> params;
};

struct ModelBinding {
    SimulatorFactory factory;
    std::vector<std::string> defaultObservables;
    /// Canonical "name k=v ..." text, used in manifests.
    std::string description;
};

/// Validates the parameters (ConfigError on unknown keys or bad values)
/// and returns a factory producing independent simulators.
ModelBinding bindModel(const ModelSpec& spec);

/// Names of the in-process models.
std::vector<std::string> builtinModelNames();

}  // namespace smc::models
