#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "smc/sim/simulator.hpp"

namespace smc {

/// Where an out-of-process simulator lives: a shell command whose
/// stdin/stdout carry the line protocol ("exec:<command>"), or a TCP
/// endpoint ("tcp:<host>:<port>").
struct ExternalSimSpec {
    enum class Transport { Command, Tcp };

    Transport transport = Transport::Command;
    std::string command;
    std::string host;
    std::uint16_t port = 0;
    std::chrono::milliseconds timeout{10000};
    /// Observables analysed when the user names none.
    std::vector<std::string> defaultObservables;

    /// Parses "exec:..." or "tcp:host:port"; throws ConfigError.
    static ExternalSimSpec parse(std::string_view text);
};

/// Launch or connect, then complete a RESET 0 / OK handshake within the
/// timeout. Throws ProtocolError on launch failure, malformed replies or
/// timeout.
std::unique_ptr<Simulator> connectExternal(const ExternalSimSpec& spec);

}  // namespace smc
